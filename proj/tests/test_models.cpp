#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "saddlefit/models.hpp"
#include "saddlefit/ode.hpp"
#include "saddlefit/quadrature.hpp"

using namespace saddlefit;

namespace {

double exact_pdf(const char* id, const std::vector<double>& th, double x0, double x1, double dt) {
  return exact_transition_density(id, th, std::span<const double>(&x0, 1),
                                  std::span<const double>(&x1, 1), dt);
}

struct SampleStats {
  double mean, var, se_mean, se_var;
};

SampleStats sample_stats(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return {m, m2 * n / (n - 1), std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

}  // namespace

TEST(Build, CirAtReferenceParameters) {
  const auto inst = build("cir", std::vector<double>{1.5, 58.0, std::sqrt(15.0)});
  EXPECT_EQ(inst.drift[0].to_string(), "87 - 1.5*x1");
  EXPECT_NEAR(inst.diffusion[0][0].coefficient(MultiIndex{1}), 15.0, 1e-12);
  EXPECT_EQ(inst.diffusion[0][0].size(), 1u);
}

TEST(Build, GbmPolynomials) {
  const auto inst = build("gbm", std::vector<double>{0.12, 0.2});
  EXPECT_EQ(inst.drift[0].to_string(), "0.12*x1");
  EXPECT_NEAR(inst.diffusion[0][0].coefficient(MultiIndex{2}), 0.04, 1e-15);
}

TEST(Build, HestonDiffusionEqualsSigmaSigmaTranspose) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> rho_d(-0.99, 0.99), sig_d(0.05, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double rho = rho_d(rng), sig = sig_d(rng);
    const auto inst = build("heston", std::vector<double>{0.1, 2.0, 0.04, rho, sig});
    const Polynomial S2V = Polynomial::monomial(MultiIndex{2, 1});
    const Polynomial SV = Polynomial::monomial(MultiIndex{1, 1}, rho * sig);
    const Polynomial V = Polynomial::monomial(MultiIndex{0, 1}, sig * sig);
    EXPECT_EQ(inst.diffusion[0][0], S2V);
    EXPECT_EQ(inst.diffusion[0][1], SV);
    EXPECT_EQ(inst.diffusion[1][0], SV);
    EXPECT_EQ(inst.diffusion[1][1], V);
    EXPECT_EQ(inst.drift[0], Polynomial::monomial(MultiIndex{1, 0}, 0.1));
  }
}

TEST(Build, BivariateWithoutDrift) {
  const auto inst = build("biv", std::vector<double>{0.0, 0.0, 1.8, 0.5, 5.0, 1.0});
  EXPECT_TRUE(inst.drift[0].is_zero());
  EXPECT_NEAR(inst.diffusion[0][0].coefficient(MultiIndex{0, 2}), 1.8 * 1.8, 1e-15);
  EXPECT_EQ(inst.diffusion[0][0].size(), 1u);
  EXPECT_TRUE(inst.diffusion[0][1].is_zero());
  EXPECT_EQ(inst.drift[1].to_string(), "2.5 - 0.5*x2");
}

TEST(Build, Errors) {
  EXPECT_THROW(make_model("vasicek"), UnknownModel);
  EXPECT_THROW(build("cir", std::vector<double>{1.0, 2.0}), ParameterError);
  EXPECT_THROW(build("cir", std::vector<double>{-1.0, 2.0, 1.0}), ParameterError);
  EXPECT_THROW(build("heston", std::vector<double>{0.1, 2.0, 0.04, 1.0, 0.3}), ParameterError);
  EXPECT_THROW(build("biv", std::vector<double>{0.1, -0.1, 1.8, 0.5, 5.0, 1.0}), ParameterError);
  EXPECT_NO_THROW(build("biv", std::vector<double>{-0.1, 0.0, 1.8, 0.5, 5.0, 1.0}));
}

TEST(Bessel, KnownValues) {
  EXPECT_NEAR(log_bessel_i(0.0, 1.0), std::log(1.2660658777520082), 1e-14);
  // half-integer orders in closed form
  for (double z : {0.3, 2.0, 40.0}) {
    const double pre = std::sqrt(2.0 / (std::numbers::pi * z));
    EXPECT_NEAR(log_bessel_i(0.5, z), std::log(pre * std::sinh(z)), 1e-12);
    EXPECT_NEAR(log_bessel_i(-0.5, z), std::log(pre * std::cosh(z)), 1e-12);
  }
  // large argument does not overflow
  const double z = 5000.0;
  EXPECT_NEAR(log_bessel_i(2.0, z), z - 0.5 * std::log(2 * std::numbers::pi * z) +
                                        std::log1p(-(16.0 - 1.0) / (8 * z)), 1e-6);
  // tiny argument follows the leading series term
  EXPECT_NEAR(log_bessel_i(1.5, 1e-9), 1.5 * std::log(0.5e-9) - std::lgamma(2.5), 1e-12);
  EXPECT_THROW(log_bessel_i(-1.5, 1.0), std::domain_error);
}

TEST(ExactDensity, GbmIsLognormal) {
  const std::vector<double> th{0.12, 0.2};
  const double x0 = 0.049, dt = 1.0 / 12;
  const double m = std::log(x0) + (0.12 - 0.02) * dt;
  const double s = 0.2 * std::sqrt(dt);
  EXPECT_NEAR(m, -3.007601647538, 1e-11);
  EXPECT_NEAR(s, 0.0577350269, 1e-10);
  for (double x1 : {0.045, 0.049, 0.052}) {
    const double z = (std::log(x1) - m) / s;
    EXPECT_NEAR(exact_pdf("gbm", th, x0, x1, dt),
                std::exp(-0.5 * z * z) / (x1 * s * std::sqrt(2 * std::numbers::pi)), 1e-9);
  }
}

TEST(ExactDensity, CirIntegratesToOneWithClosedFormMean) {
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const double dt = 1.0 / 12;
  auto f = [&](double x) { return x > 0 ? exact_pdf("cir", th, 50.0, x, dt) : 0.0; };
  EXPECT_NEAR(integrate_adaptive(f, 0.0, 200.0, 1e-14, 1e-10).value, 1.0, 1e-6);
  const double mean =
      integrate_adaptive([&](double x) { return x * f(x); }, 0.0, 200.0, 1e-12, 1e-10).value;
  EXPECT_NEAR(mean, 58.0 - 8.0 * std::exp(-0.125), 5e-5);  // 50.9400248
  EXPECT_NEAR(exact_transition_moments("cir", th, 50.0, dt).mean, 50.94002478, 1e-8);
}

TEST(ExactDensity, RandomParametersIntegrateToOne) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> th{0.2 + 2 * u(rng), 1.0 + 20 * u(rng), 0.3 + 2 * u(rng)};
    const double x0 = 1.0 + 20 * u(rng), dt = 0.02 + 0.5 * u(rng);
    const auto mom = exact_transition_moments("cir", th, x0, dt);
    const double hi = mom.mean + 40 * std::sqrt(mom.variance);
    auto f = [&](double x) { return x > 0 ? exact_pdf("cir", th, x0, x, dt) : 0.0; };
    EXPECT_NEAR(integrate_adaptive(f, 0.0, hi, 1e-14, 1e-10).value, 1.0, 1e-6) << t;
  }
  for (int t = 0; t < 5; ++t) {
    const std::vector<double> th{u(rng) - 0.5, 0.1 + u(rng)};
    auto f = [&](double x) { return x > 0 ? exact_pdf("gbm", th, 1.0, x, 0.5) : 0.0; };
    EXPECT_NEAR(integrate_adaptive(f, 0.0, 50.0, 1e-14, 1e-10).value, 1.0, 1e-6);
  }
}

TEST(ExactDensity, ConcentratesAsDtShrinks) {
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const auto a = exact_transition_moments("cir", th, 50.0, 1e-6);
  EXPECT_NEAR(a.mean, 50.0, 1e-4);
  EXPECT_LT(a.variance, 1e-3);
  EXPECT_GT(exact_pdf("cir", th, 50.0, 50.0, 1e-4), exact_pdf("cir", th, 50.0, 50.0, 1e-2));
}

TEST(ExactDensity, Unsupported) {
  const std::vector<double> th{0.1, 0.02, 1.8, 0.5, 5.0, 1.0};
  const std::vector<double> x{1.0, 1.0};
  EXPECT_FALSE(has_exact_transition("biv"));
  EXPECT_THROW(exact_transition_logdensity("biv", th, x, x, 1.0), UnsupportedModel);
}

TEST(Simulate, DeterministicEulerStep) {
  // zero diffusion, drift -x
  ModelStructure s;
  s.dim = 1;
  s.drift = {{{MultiIndex{1}, 0}}};
  s.diffusion = {{{}}};
  s.slot_labels = {"-k"};
  const DiffusionModel model("decay", {"x"}, {{"k", Constraint::kNone}}, {false}, s,
                             [](std::span<const double> t) { return std::vector<double>{-t[0]}; });
  const auto inst = build(model, std::vector<double>{1.0});
  const std::vector<double> times{0.0, 0.1};
  const auto ts = simulate_path(inst, std::vector<double>{1.0}, times, 1, 7);
  EXPECT_DOUBLE_EQ(ts.values[1], 0.9);
}

TEST(Simulate, SameSeedSamePath) {
  const auto inst = build("heston", std::vector<double>{0.118, 9.863, 0.034, -0.855, 0.25});
  const std::vector<double> x0{100.0, 0.034};
  const auto a = simulate_series(inst, x0, 1.0 / 252, 50, 10, 99);
  const auto b = simulate_series(inst, x0, 1.0 / 252, 50, 10, 99);
  const auto c = simulate_series(inst, x0, 1.0 / 252, 50, 10, 100);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.times, b.times);
  EXPECT_NE(a.values, c.values);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_GE(a.row(k)[1], 0.0);
}

TEST(Simulate, CirEulerMeanMatchesClosedForm) {
  const std::vector<double> th{0.12, 0.05, 0.02};
  const auto inst = build("cir", th);
  const double dt = 1.0 / 52;
  const auto xs = sample_transitions(inst, std::vector<double>{0.049}, dt, 100000, 10, 3);
  const auto st = sample_stats(xs);
  const auto ex = exact_transition_moments("cir", th, 0.049, dt);
  EXPECT_LT(std::abs(st.mean - ex.mean), 3 * st.se_mean);
}

TEST(Simulate, OneStepCumulantsMatchOdePredictions) {
  struct Case {
    const char* id;
    std::vector<double> theta;
    double x0, dt;
    int substeps;
  };
  for (const Case& c : {Case{"cir", {0.12, 0.05, 0.02}, 0.049, 1.0 / 52, 10},
                        Case{"gbm", {0.12, 0.2}, 0.049, 1.0 / 12, 200}}) {
    const auto inst = build(c.id, c.theta);
    const auto k = integrate(*inst.model.system(4),
                             point_mass_initial(std::vector<double>{c.x0}, 1, 4),
                             inst.model.slot_values(c.theta), c.dt);
    const auto st = sample_stats(sample_transitions(inst, std::vector<double>{c.x0}, c.dt, 1000000,
                                                    c.substeps, 12));
    EXPECT_LT(std::abs(st.mean - k.values()[0]), 3 * st.se_mean) << c.id;
    EXPECT_LT(std::abs(st.var - k.values()[1]), 3 * st.se_var) << c.id;
  }
}

TEST(Simulate, ExactCirSampler) {
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  std::vector<double> times(2001);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = k * 2.0;
  // far-apart observations are nearly independent draws from the stationary law
  const auto ts = simulate_cir_exact(th, 50.0, times, 4);
  std::vector<double> xs(ts.values.begin() + 1, ts.values.end());
  const auto st = sample_stats(xs);
  const double stat_var = 58.0 * 15.0 / (2 * 1.5);
  EXPECT_LT(std::abs(st.mean - 58.0), 3 * st.se_mean);
  EXPECT_LT(std::abs(st.var - stat_var), 3 * st.se_var);
  EXPECT_EQ(simulate_cir_exact(th, 50.0, times, 4).values, ts.values);
}

TEST(Simulate, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
