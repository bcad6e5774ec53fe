#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "saddlefit/cumulants.hpp"

namespace saddlefit {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // <= 0: start with the whole interval
  std::size_t max_steps = 10000;

  void validate() const;
};

/// Raised when the adaptive integrator cannot reach the end point. Carries
/// the last accepted state and the time it was reached.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::vector<double> partial, double t_reached)
      : std::runtime_error(what), partial_(std::move(partial)), t_reached_(t_reached) {}

  const std::vector<double>& partial_state() const { return partial_; }
  double time_reached() const { return t_reached_; }

 private:
  std::vector<double> partial_;
  double t_reached_;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with per-component error weights
/// abs_tol + rel_tol * max(|y_old|, |y_new|).
std::vector<double> integrate_dopri(const BoundCumulantSystem& system, std::span<const double> y0,
                                    double dt, const IntegratorConfig& cfg,
                                    IntegrationStats* stats = nullptr);

/// Point-mass start: first-order cumulants equal x, everything else zero.
CumulantSet point_mass_initial(std::span<const double> x, std::size_t dim, int order);

CumulantSet integrate(const BoundCumulantSystem& system, const CumulantSet& kappa0, double dt,
                      const IntegratorConfig& cfg = {});

CumulantSet integrate(const CumulantODESystem& system, const CumulantSet& kappa0,
                      std::span<const double> slot_values, double dt,
                      const IntegratorConfig& cfg = {});

}  // namespace saddlefit
