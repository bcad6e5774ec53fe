#include "saddlefit/saddlepoint.hpp"

#include <cmath>
#include <numbers>

#include "saddlefit/quadrature.hpp"

namespace saddlefit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

SaddleSolution gaussian_solution(const TruncatedCGF& cgf, const Eigen::VectorXd& x) {
  SaddleSolution s;
  const Eigen::LLT<Eigen::MatrixXd> llt(cgf.covariance());
  const Eigen::VectorXd diff = x - cgf.mean();
  s.saddle = llt.solve(diff);
  s.hessian = cgf.covariance();
  s.cgf_value = cgf.mean().dot(s.saddle) + 0.5 * s.saddle.dot(cgf.covariance() * s.saddle);
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  s.log_density = -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * log_det -
                  0.5 * diff.dot(s.saddle);
  s.density = std::exp(s.log_density);
  return s;
}

}  // namespace

TruncatedCGF::TruncatedCGF(CumulantSet kappa) : kappa_(std::move(kappa)) {
  const std::size_t m = kappa_.dim();
  for (std::size_t k = 0; k < kappa_.size(); ++k) {
    const MultiIndex& r = kappa_.indices()[k];
    const double v = kappa_.values()[k];
    if (!std::isfinite(v)) throw std::domain_error("TruncatedCGF: non-finite cumulant");
    if (v == 0.0) continue;
    double denom = 1.0;
    for (std::size_t i = 0; i < m; ++i) denom *= factorial(r[i]);
    terms_.push_back({v / denom, r.exponents()});
  }
  const auto mean = kappa_.mean();
  const auto cov = kappa_.covariance();
  mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(m));
  cov_ = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  cov_llt_.compute(cov_);
  if (cov_llt_.info() != Eigen::Success) {
    throw NotPositiveDefinite("TruncatedCGF: covariance block is not positive definite");
  }
}

TruncatedCGF::Eval TruncatedCGF::evaluate(std::span<const double> lambda) const {
  return evaluate(Eigen::Map<const Eigen::VectorXd>(lambda.data(),
                                                    static_cast<Eigen::Index>(lambda.size())));
}

TruncatedCGF::Eval TruncatedCGF::evaluate(const Eigen::VectorXd& lambda) const {
  const std::size_t m = dim();
  if (static_cast<std::size_t>(lambda.size()) != m) {
    throw DimensionMismatch("TruncatedCGF::evaluate: length mismatch");
  }
  Eval out{0.0, Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m)};
  for (const Term& t : terms_) {
    double mono = 1.0;
    for (std::size_t i = 0; i < m; ++i) mono *= ipow(lambda[i], t.exps[i]);
    out.value += t.coef * mono;
    for (std::size_t i = 0; i < m; ++i) {
      if (t.exps[i] == 0) continue;
      double g = t.coef * t.exps[i];
      for (std::size_t a = 0; a < m; ++a) g *= ipow(lambda[a], t.exps[a] - (a == i ? 1 : 0));
      out.gradient[i] += g;
      for (std::size_t j = i; j < m; ++j) {
        const int ej = t.exps[j] - (j == i ? 1 : 0);
        if (ej == 0) continue;
        double h = t.coef * t.exps[i] * ej;
        for (std::size_t a = 0; a < m; ++a) {
          h *= ipow(lambda[a], t.exps[a] - (a == i ? 1 : 0) - (a == j ? 1 : 0));
        }
        out.hessian(i, j) += h;
        if (j != i) out.hessian(j, i) += h;
      }
    }
  }
  return out;
}

SaddleSolution solve_saddle(const TruncatedCGF& cgf, std::span<const double> x_in,
                            const SaddleOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_saddle: tol must be > 0");
  const std::size_t m = cgf.dim();
  if (x_in.size() != m) throw DimensionMismatch("solve_saddle: x length mismatch");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x_in.data(), static_cast<Eigen::Index>(m));
  if (!x.allFinite()) {
    SaddleSolution s = gaussian_solution(cgf, x);
    s.fallback_used = true;
    return s;
  }

  const double scale = std::max(x.norm(), std::sqrt(cgf.covariance().trace()));
  const double target = opts.tol * (scale > 0.0 ? scale : 1.0);

  Eigen::VectorXd lambda = Eigen::LLT<Eigen::MatrixXd>(cgf.covariance()).solve(x - cgf.mean());
  auto ev = cgf.evaluate(lambda);
  Eigen::VectorXd g = ev.gradient - x;
  double gnorm = g.norm();

  SaddleSolution s;
  bool ok = false;
  int it = 0;
  for (; it <= opts.max_iterations; ++it) {
    if (!std::isfinite(gnorm)) break;
    if (gnorm <= target) {
      ok = true;
      break;
    }
    if (it == opts.max_iterations) break;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.hessian);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = ldlt.solve(-g);
    if (!step.allFinite()) break;

    // Backtracking on the residual norm; the Newton direction is a descent
    // direction for |grad K - x|^2 whenever the Hessian is non-singular.
    double alpha = 1.0;
    bool accepted = false;
    for (int b = 0; b < opts.max_backtracks; ++b, alpha *= 0.5) {
      const Eigen::VectorXd trial = lambda + alpha * step;
      auto tev = cgf.evaluate(trial);
      const Eigen::VectorXd tg = tev.gradient - x;
      const double tn = tg.norm();
      if (std::isfinite(tn) && tn < gnorm) {
        lambda = trial;
        ev = std::move(tev);
        g = tg;
        gnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  if (ok) {
    const Eigen::LLT<Eigen::MatrixXd> hllt(ev.hessian);
    if (hllt.info() == Eigen::Success) {
      const Eigen::MatrixXd L = hllt.matrixL();
      const double log_det = 2.0 * L.diagonal().array().log().sum();
      s.saddle = lambda;
      s.hessian = ev.hessian;
      s.cgf_value = ev.value;
      s.residual = gnorm;
      s.iterations = it;
      s.converged = true;
      s.log_density = -0.5 * static_cast<double>(m) * kLog2Pi - 0.5 * log_det + ev.value -
                      lambda.dot(x);
      s.density = std::exp(s.log_density);
      if (std::isfinite(s.log_density)) return s;
    }
  }

  SaddleSolution fb = gaussian_solution(cgf, x);
  fb.iterations = it;
  fb.fallback_used = true;
  return fb;
}

double density(const TruncatedCGF& cgf, std::span<const double> x, const SaddleOptions& opts) {
  return solve_saddle(cgf, x, opts).density;
}

double log_density(const TruncatedCGF& cgf, std::span<const double> x, const SaddleOptions& opts) {
  return solve_saddle(cgf, x, opts).log_density;
}

double gaussian_log_density(const TruncatedCGF& cgf, std::span<const double> x) {
  const Eigen::VectorXd xv =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (static_cast<std::size_t>(xv.size()) != cgf.dim()) {
    throw DimensionMismatch("gaussian_log_density: x length mismatch");
  }
  return gaussian_solution(cgf, xv).log_density;
}

double univariate_saddle_density(std::span<const double> kappa, double t, double x) {
  const int n = static_cast<int>(kappa.size());
  if (n < 2) throw std::invalid_argument("univariate_saddle_density: need at least two cumulants");
  double curvature = 0.0;
  for (int i = 0; i <= n - 2; ++i) curvature += kappa[i + 1] * ipow(t, i) / factorial(i);
  double cgf = 0.0;
  for (int i = 1; i <= n; ++i) cgf += kappa[i - 1] * ipow(t, i) / factorial(i);
  return std::exp(cgf - t * x) / std::sqrt(2.0 * std::numbers::pi * curvature);
}

double normalize(const TruncatedCGF& cgf, const Box& domain, double epsrel) {
  const std::size_t m = cgf.dim();
  if (domain.lo.size() != m || domain.hi.size() != m) {
    throw DimensionMismatch("normalize: box dimension mismatch");
  }
  if (m == 1) {
    auto f = [&](double v) { return density(cgf, std::span<const double>(&v, 1)); };
    return integrate_adaptive(f, domain.lo[0], domain.hi[0], 1e-12, epsrel).value;
  }
  if (m == 2) {
    auto outer = [&](double u) {
      auto inner = [&](double v) {
        const double pt[2] = {u, v};
        return density(cgf, pt);
      };
      return integrate_adaptive(inner, domain.lo[1], domain.hi[1], 1e-13, epsrel).value;
    };
    return integrate_adaptive(outer, domain.lo[0], domain.hi[0], 1e-12, epsrel).value;
  }
  throw std::invalid_argument("normalize: quadrature supports m <= 2 only");
}

}  // namespace saddlefit
