#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "saddlefit/models.hpp"
#include "saddlefit/ode.hpp"
#include "saddlefit/saddlepoint.hpp"

using namespace saddlefit;

namespace {

CumulantSet gaussian_cumulants(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, int order) {
  const std::size_t m = mu.size();
  CumulantSet k(m, order);
  for (std::size_t i = 0; i < m; ++i) {
    k.set(MultiIndex::unit(m, i), mu[i]);
    for (std::size_t j = i; j < m; ++j) {
      k.set(MultiIndex::unit(m, i) + MultiIndex::unit(m, j), cov(i, j));
    }
  }
  return k;
}

double normal_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd d = x - mu;
  const Eigen::MatrixXd L = llt.matrixL();
  return -0.5 * x.size() * std::log(2 * std::numbers::pi) - L.diagonal().array().log().sum() -
         0.5 * d.dot(llt.solve(d));
}

}  // namespace

TEST(TruncatedCgf, GradientAndHessianMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  CumulantSet k(2, 4);
  for (auto& v : k.values()) v = u(rng);
  k.set(MultiIndex{2, 0}, 1.0);
  k.set(MultiIndex{0, 2}, 2.0);
  k.set(MultiIndex{1, 1}, 0.4);
  const TruncatedCGF cgf(k);
  const Eigen::Vector2d l(0.3, -0.2);
  const auto ev = cgf.evaluate(l);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[i] = h;
    const auto p = cgf.evaluate(Eigen::VectorXd(l + e)), q = cgf.evaluate(Eigen::VectorXd(l - e));
    EXPECT_NEAR(ev.gradient[i], (p.value - q.value) / (2 * h), 1e-8);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(ev.hessian(i, j), (p.gradient[j] - q.gradient[j]) / (2 * h), 1e-7);
    }
  }
  EXPECT_NEAR(cgf.evaluate(Eigen::VectorXd::Zero(2)).value, 0.0, 0.0);
}

TEST(TruncatedCgf, RejectsIndefiniteCovariance) {
  EXPECT_THROW(TruncatedCGF(CumulantSet(1, 2, {0.0, -1.0})), NotPositiveDefinite);
  EXPECT_THROW(TruncatedCGF(CumulantSet(2, 2, {0, 0, 1.0, 2.0, 1.0})), NotPositiveDefinite);
}

TEST(Saddle, GaussianIsExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int m = 1; m <= 3; ++m) {
    Eigen::MatrixXd a(m, m);
    for (auto& v : a.reshaped()) v = n01(rng);
    const Eigen::MatrixXd cov = a * a.transpose() + Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd mu(m);
    for (auto& v : mu) v = n01(rng);
    const TruncatedCGF cgf(gaussian_cumulants(mu, cov, 4));
    for (int t = 0; t < 25; ++t) {
      Eigen::VectorXd x(m);
      for (auto& v : x) v = mu[&v - x.data()] + 2 * n01(rng);
      const auto s = solve_saddle(cgf, std::span<const double>(x.data(), m));
      EXPECT_TRUE(s.converged);
      EXPECT_FALSE(s.fallback_used);
      EXPECT_NEAR(s.log_density, normal_logpdf(x, mu, cov), 1e-12);
      EXPECT_NEAR(gaussian_log_density(cgf, std::span<const double>(x.data(), m)),
                  normal_logpdf(x, mu, cov), 1e-12);
    }
  }
}

TEST(Saddle, UnivariateFormulaAgreesWithGeneralSolver) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> kappa{u(rng), 1.0 + u(rng), u(rng), 0.1 * std::abs(u(rng))};
    const TruncatedCGF cgf(CumulantSet(1, 4, kappa));
    const double x = kappa[0] + 3 * u(rng);
    const auto s = solve_saddle(cgf, std::span<const double>(&x, 1));
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(univariate_saddle_density(kappa, s.saddle[0], x), s.density, 1e-12 * s.density);
  }
}

TEST(Saddle, NegativeCurvatureFallsBackToGaussian) {
  // K'(t) = t - t^3 never reaches x = 2 on the branch where K'' > 0
  const TruncatedCGF cgf(CumulantSet(1, 4, {0.0, 1.0, 0.0, -6.0}));
  const double x = 2.0;
  const auto s = solve_saddle(cgf, std::span<const double>(&x, 1));
  EXPECT_TRUE(s.fallback_used);
  EXPECT_NEAR(s.log_density, -0.5 * std::log(2 * std::numbers::pi) - 2.0, 1e-12);
}

TEST(Saddle, CirCloseToExactNearTheMode) {
  const auto model = make_model("cir");
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const auto k = integrate(*model.system(4), point_mass_initial(std::vector<double>{50.0}, 1, 4),
                           model.slot_values(th), 1.0 / 12);
  const TruncatedCGF cgf(k);
  for (double x : {45.0, 50.94, 57.0}) {
    const double x0 = 50.0;
    const double exact = exact_transition_logdensity("cir", th, std::span<const double>(&x0, 1),
                                                     std::span<const double>(&x, 1), 1.0 / 12);
    EXPECT_NEAR(log_density(cgf, std::span<const double>(&x, 1)), exact, 0.02) << x;
  }
}

TEST(Saddle, NormalizeGaussianToOne) {
  const TruncatedCGF g1(CumulantSet(1, 2, {1.0, 4.0}));
  EXPECT_NEAR(normalize(g1, {{-30.0}, {30.0}}), 1.0, 1e-8);
  const TruncatedCGF g2(CumulantSet(2, 2, {0.0, 0.0, 1.0, 0.3, 2.0}));
  EXPECT_NEAR(normalize(g2, {{-12.0, -15.0}, {12.0, 15.0}}), 1.0, 1e-6);
  EXPECT_THROW(normalize(g1, {{0.0, 0.0}, {1.0, 1.0}}), DimensionMismatch);
}

TEST(Saddle, InputChecks) {
  const TruncatedCGF g1(CumulantSet(1, 2, {1.0, 4.0}));
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(solve_saddle(g1, two), DimensionMismatch);
  SaddleOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(solve_saddle(g1, std::vector<double>{1.0}, bad), std::invalid_argument);
}
