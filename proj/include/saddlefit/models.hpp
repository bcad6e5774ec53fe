/**
 * @file models.hpp
 * @brief Polynomial diffusion models, exact transition densities where they
 *        exist, and Euler-Maruyama path simulation.
 *
 * Built-in models (parameter order in brackets):
 *   cir     dX = b(mu - X)dt + sigma sqrt(X) dB                 [b, mu, sigma]
 *   gbm     dX = mu X dt + sigma X dB                            [mu, sigma]
 *   bm      dX = sqrt(c) dB                                      [c]
 *   ou      dX = g(phistar - X)dt + sigma dB                     [g, phistar, sigma]
 *   biv     dX1 = (a X1 X2 - b X1^2)dt + c X2 dB1,
 *           dX2 = g(phistar - X2)dt + sigma dB2                  [a, b, c, g, phistar, sigma]
 *   heston  dS = r S dt + S sqrt(V) dW1,
 *           dV = delta(theta - V)dt + sigma sqrt(V) dW2, corr rho
 *                                                                [r, delta, theta, rho, sigma]
 * The diffusion matrix stored for each model is sigma^T sigma, which is
 * polynomial in the state for all of them.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saddlefit/cumulants.hpp"
#include "saddlefit/polynomial.hpp"
#include "saddlefit/timeseries.hpp"

namespace saddlefit {

enum class Constraint { kNone, kPositive, kNonNegative, kCorrelation };

struct ParamSpec {
  std::string name;
  Constraint constraint = Constraint::kNone;
};

class UnknownModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// True when `value` satisfies `c` (positive: > 0, correlation: |rho| < 1).
bool satisfies(Constraint c, double value);

class DiffusionModel {
 public:
  using SlotFn = std::function<std::vector<double>(std::span<const double>)>;

  DiffusionModel(std::string id, std::vector<std::string> state_names,
                 std::vector<ParamSpec> params, std::vector<bool> positive_state,
                 ModelStructure structure, SlotFn slot_values);

  const std::string& id() const { return id_; }
  std::size_t dim() const { return structure_.dim; }
  std::size_t num_params() const { return params_.size(); }
  const std::vector<ParamSpec>& params() const { return params_; }
  std::vector<std::string> param_names() const;
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<bool>& positive_state() const { return positive_state_; }
  const ModelStructure& structure() const { return structure_; }

  /// Throws ParameterError on wrong length or a violated constraint.
  void check_parameters(std::span<const double> theta) const;

  std::vector<double> slot_values(std::span<const double> theta) const;
  std::vector<Polynomial> drift(std::span<const double> theta) const;
  PolynomialMatrix diffusion(std::span<const double> theta) const;

  std::shared_ptr<const CumulantODESystem> system(int order) const;
  int default_order() const { return dim() == 1 ? 4 : 3; }

 private:
  std::string id_;
  std::vector<std::string> state_names_;
  std::vector<ParamSpec> params_;
  std::vector<bool> positive_state_;
  ModelStructure structure_;
  SlotFn slot_fn_;
};

DiffusionModel make_model(std::string_view id);
std::vector<std::string> model_ids();

/// A model bound to a parameter vector.
struct ModelInstance {
  DiffusionModel model;
  std::vector<double> theta;
  std::vector<Polynomial> drift;
  PolynomialMatrix diffusion;
};

ModelInstance build(std::string_view id, std::span<const double> theta);
ModelInstance build(const DiffusionModel& model, std::span<const double> theta);

class UnsupportedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

bool has_exact_transition(std::string_view id);

/// Log transition density p(x1 | x0) over dt for models with a closed form
/// (cir, gbm, bm, ou). CIR uses the noncentral chi-square form with
/// log-space Bessel evaluation.
double exact_transition_logdensity(std::string_view id, std::span<const double> theta,
                                   std::span<const double> x0, std::span<const double> x1,
                                   double dt);
double exact_transition_density(std::string_view id, std::span<const double> theta,
                                std::span<const double> x0, std::span<const double> x1, double dt);

/// Exact conditional mean and variance (cir, gbm, bm, ou; univariate).
struct TransitionMoments {
  double mean;
  double variance;
};
TransitionMoments exact_transition_moments(std::string_view id, std::span<const double> theta,
                                           double x0, double dt);

/// log I_nu(z) for nu > -1, z > 0, without overflow.
double log_bessel_i(double nu, double z);

/// Euler-Maruyama with `substeps` steps per observation gap. States flagged
/// positive are reflected at zero after each internal step.
TimeSeries simulate_path(const ModelInstance& inst, std::span<const double> x0,
                         std::span<const double> times, int substeps, std::uint64_t seed);

/// `count` independent Euler-Maruyama draws of X(dt) given X(0) = x0,
/// returned row-major (count x m).
std::vector<double> sample_transitions(const ModelInstance& inst, std::span<const double> x0,
                                       double dt, std::size_t count, int substeps,
                                       std::uint64_t seed);

/// Convenience: `length` observations spaced `dt` apart starting at t = 0.
TimeSeries simulate_series(const ModelInstance& inst, std::span<const double> x0, double dt,
                           std::size_t length, int substeps, std::uint64_t seed);

/// Exact CIR sampling through the Poisson-mixed chi-square representation.
TimeSeries simulate_cir_exact(std::span<const double> theta, double x0,
                              std::span<const double> times, std::uint64_t seed);

/// Well-mixed per-replicate seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace saddlefit
