#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "saddlefit/cumulants.hpp"

namespace saddlefit {

class NotPositiveDefinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// CGF truncated after the cumulants of a CumulantSet:
///   K(L) = sum_{1 <= |r| <= n} kappa_r L^r / r!
/// Construction requires a symmetric positive definite covariance block.
class TruncatedCGF {
 public:
  explicit TruncatedCGF(CumulantSet kappa);

  struct Eval {
    double value;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };

  std::size_t dim() const { return kappa_.dim(); }
  int order() const { return kappa_.order(); }
  const CumulantSet& cumulants() const { return kappa_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  Eval evaluate(std::span<const double> lambda) const;
  Eval evaluate(const Eigen::VectorXd& lambda) const;

 private:
  struct Term {
    double coef;  // kappa_r / r!
    std::vector<int> exps;
  };
  CumulantSet kappa_;
  std::vector<Term> terms_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> cov_llt_;
};

struct SaddleSolution {
  Eigen::VectorXd saddle;
  Eigen::MatrixXd hessian;
  double cgf_value = 0.0;
  double log_density = 0.0;
  double density = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool fallback_used = false;
};

struct SaddleOptions {
  double tol = 1e-10;  // relative to max(|x|, sqrt(trace cov))
  int max_iterations = 50;
  int max_backtracks = 40;
};

/// Damped Newton on grad K(L) = x from the Gaussian initializer
/// cov^{-1}(x - mean). Falls back to the Gaussian (n = 2) saddlepoint when
/// Newton fails or the Hessian at the root is not positive definite.
SaddleSolution solve_saddle(const TruncatedCGF& cgf, std::span<const double> x,
                            const SaddleOptions& opts = {});

/// Leading-order saddlepoint density
///   (2 pi)^{-m/2} |hess K|^{-1/2} exp{K(L) - L'x}   (unnormalised).
double density(const TruncatedCGF& cgf, std::span<const double> x, const SaddleOptions& opts = {});
double log_density(const TruncatedCGF& cgf, std::span<const double> x,
                   const SaddleOptions& opts = {});

/// Gaussian density with the CGF's first two cumulant blocks.
double gaussian_log_density(const TruncatedCGF& cgf, std::span<const double> x);

/// Univariate saddlepoint written directly in terms of the cumulant list
/// (kappa_1..kappa_n) and the scalar saddle t:
///   f = (2 pi sum_{i=0}^{n-2} kappa_{i+2} t^i / i!)^{-1/2}
///       exp[sum_{i=1}^{n} kappa_i t^i / i! - t x],
///   x = sum_{i=0}^{n-1} kappa_{i+1} t^i / i!.
double univariate_saddle_density(std::span<const double> kappa, double t, double x);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Integral of the saddlepoint density over a box (m <= 2) by adaptive
/// quadrature. Diagnostic only; densities are used unnormalised elsewhere.
double normalize(const TruncatedCGF& cgf, const Box& domain, double epsrel = 1e-8);

}  // namespace saddlefit
