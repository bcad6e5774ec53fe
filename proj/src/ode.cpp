#include "saddlefit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace saddlefit {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b*, the embedded 4th-order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
  }
  if (max_steps < 1) throw std::invalid_argument("IntegratorConfig: max_steps must be >= 1");
}

std::vector<double> integrate_dopri(const BoundCumulantSystem& system, std::span<const double> y0,
                                    double dt, const IntegratorConfig& cfg,
                                    IntegrationStats* stats) {
  cfg.validate();
  if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("integrate: dt must be >= 0");
  const std::size_t n = y0.size();
  if (n != system.size()) throw std::invalid_argument("integrate: state size mismatch");

  std::vector<double> y(y0.begin(), y0.end());
  if (dt == 0.0) return y;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  system.rhs(y, k1);

  double t = 0.0;
  double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, dt) : dt;
  std::size_t steps = 0;
  IntegrationStats local;

  while (t < dt) {
    if (steps++ >= cfg.max_steps) {
      throw IntegrationError("integrate: step limit (" + std::to_string(cfg.max_steps) +
                                 ") exhausted at t=" + std::to_string(t),
                             y, t);
    }
    bool last = false;
    if (t + h >= dt) {
      h = dt - t;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    system.rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    system.rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    system.rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    system.rhs(tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    system.rhs(tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    system.rhs(ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (!std::isfinite(err) || !all_finite(ynew)) {
      ++local.rejected;
      h *= 0.25;
      if (h < 1e-14 * dt) {
        throw IntegrationError("integrate: non-finite state (solution blow-up)", y, t);
      }
      continue;
    }

    if (err <= 1.0) {
      t = last ? dt : t + h;
      y.swap(ynew);
      k1.swap(k7);  // first-same-as-last
      ++local.accepted;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++local.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h < 1e-14 * dt) {
        throw IntegrationError("integrate: step size underflow", y, t);
      }
    }
  }
  if (stats) *stats = local;
  return y;
}

CumulantSet point_mass_initial(std::span<const double> x, std::size_t dim, int order) {
  if (x.size() != dim) throw std::invalid_argument("point_mass_initial: state length must equal m");
  CumulantSet k(dim, order);
  std::copy(x.begin(), x.end(), k.values().begin());
  return k;
}

CumulantSet integrate(const BoundCumulantSystem& system, const CumulantSet& kappa0, double dt,
                      const IntegratorConfig& cfg) {
  if (kappa0.dim() != system.dim() || kappa0.order() != system.order()) {
    throw std::invalid_argument("integrate: cumulant shape does not match the system");
  }
  auto y = integrate_dopri(system, kappa0.values(), dt, cfg);
  return CumulantSet(kappa0.dim(), kappa0.order(), std::move(y));
}

CumulantSet integrate(const CumulantODESystem& system, const CumulantSet& kappa0,
                      std::span<const double> slot_values, double dt, const IntegratorConfig& cfg) {
  return integrate(system.bind(slot_values), kappa0, dt, cfg);
}

}  // namespace saddlefit
