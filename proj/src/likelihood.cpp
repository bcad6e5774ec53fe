#include "saddlefit/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace saddlefit {

void LikelihoodConfig::validate() const {
  if (order < kMinTruncationOrder || order > kMaxTruncationOrder) {
    throw std::invalid_argument("truncation order must be in [" +
                                std::to_string(kMinTruncationOrder) + ", " +
                                std::to_string(kMaxTruncationOrder) + "]");
  }
  if (!(saddle_tol > 0.0)) throw std::invalid_argument("saddle_tol must be > 0");
  integrator.validate();
}

LikelihoodConfig default_likelihood_config(const DiffusionModel& model) {
  LikelihoodConfig cfg;
  cfg.order = model.default_order();
  return cfg;
}

double transition_logdensity(const BoundCumulantSystem& bound, std::span<const double> x_prev,
                             std::span<const double> x_next, double dt,
                             const LikelihoodConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("transition_logdensity: dt must be > 0");
  if (x_prev.size() != bound.dim() || x_next.size() != bound.dim()) {
    throw DimensionMismatch("transition_logdensity: state length mismatch");
  }
  try {
    const CumulantSet k0 = point_mass_initial(x_prev, bound.dim(), bound.order());
    const CumulantSet k1 = integrate(bound, k0, dt, cfg.integrator);
    const TruncatedCGF cgf(k1);
    SaddleOptions opts;
    opts.tol = cfg.saddle_tol;
    const double v = log_density(cgf, x_next, opts);
    return std::isnan(v) ? -INFINITY : v;
  } catch (const IntegrationError&) {
    return -INFINITY;
  } catch (const std::domain_error&) {
    return -INFINITY;
  }
}

double transition_logdensity(const DiffusionModel& model, const CumulantODESystem& system,
                             std::span<const double> x_prev, std::span<const double> x_next,
                             double dt, std::span<const double> theta,
                             const LikelihoodConfig& cfg) {
  return transition_logdensity(system.bind(model.slot_values(theta)), x_prev, x_next, dt, cfg);
}

double loglik(const DiffusionModel& model, const TimeSeries& series, std::span<const double> theta,
              const LikelihoodConfig& cfg) {
  cfg.validate();
  if (series.dim != model.dim()) throw DimensionMismatch("loglik: series dimension mismatch");
  if (series.size() < 2) throw std::invalid_argument("loglik: need at least two observations");
  try {
    model.check_parameters(theta);
  } catch (const ParameterError&) {
    return -INFINITY;
  }
  const auto system = model.system(cfg.order);
  const BoundCumulantSystem bound = system->bind(model.slot_values(theta));
  double total = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double term = transition_logdensity(bound, series.row(k - 1), series.row(k),
                                              series.times[k] - series.times[k - 1], cfg);
    if (term == -INFINITY) return -INFINITY;
    total += term;
  }
  return std::isnan(total) ? -INFINITY : total;
}

double exact_loglik(const DiffusionModel& model, const TimeSeries& series,
                    std::span<const double> theta) {
  if (series.size() < 2) throw std::invalid_argument("exact_loglik: need at least two observations");
  try {
    model.check_parameters(theta);
  } catch (const ParameterError&) {
    return -INFINITY;
  }
  double total = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    total += exact_transition_logdensity(model.id(), theta, series.row(k - 1), series.row(k),
                                         series.times[k] - series.times[k - 1]);
  }
  return std::isnan(total) ? -INFINITY : total;
}

}  // namespace saddlefit
