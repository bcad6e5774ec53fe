#pragma once

#include <span>

#include "saddlefit/cumulants.hpp"
#include "saddlefit/models.hpp"
#include "saddlefit/ode.hpp"
#include "saddlefit/saddlepoint.hpp"
#include "saddlefit/timeseries.hpp"

namespace saddlefit {

struct LikelihoodConfig {
  int order = 4;
  IntegratorConfig integrator;
  double saddle_tol = 1e-10;

  void validate() const;
};

/// Default configuration for a model (order 4 for m = 1, 3 otherwise).
LikelihoodConfig default_likelihood_config(const DiffusionModel& model);

/// Log saddlepoint density of x_next given x_prev over dt, using an already
/// bound cumulant system. Integration failures, a covariance block that is
/// not positive definite, and NaN all map to -inf.
double transition_logdensity(const BoundCumulantSystem& bound, std::span<const double> x_prev,
                             std::span<const double> x_next, double dt, const LikelihoodConfig& cfg);

double transition_logdensity(const DiffusionModel& model, const CumulantODESystem& system,
                             std::span<const double> x_prev, std::span<const double> x_next,
                             double dt, std::span<const double> theta, const LikelihoodConfig& cfg);

/// Sum of transition log-densities over consecutive observations, each
/// conditioned on the observed previous value. The initial state carries no
/// term. Returns -inf when theta violates the model constraints.
double loglik(const DiffusionModel& model, const TimeSeries& series, std::span<const double> theta,
              const LikelihoodConfig& cfg);

/// Same, with the exact transition density (models with a closed form).
double exact_loglik(const DiffusionModel& model, const TimeSeries& series,
                    std::span<const double> theta);

}  // namespace saddlefit
