#include <gtest/gtest.h>

#include <cmath>

#include "saddlefit/models.hpp"
#include "saddlefit/ode.hpp"

using namespace saddlefit;

TEST(Dopri, ExponentialDecay) {
  // d/dt k1 = -k1 (ou with g = 1, phistar = 0)
  const auto model = make_model("ou");
  const std::vector<double> th{1.0, 0.0, 1.0};
  const auto bound = model.system(2)->bind(model.slot_values(th));
  IntegrationStats stats;
  const auto y = integrate_dopri(bound, std::vector<double>{1.0, 0.0}, 2.0, {}, &stats);
  EXPECT_NEAR(y[0], std::exp(-2.0), 1e-8);  // global error at rel_tol 1e-8
  EXPECT_NEAR(y[1], 0.5 * (1 - std::exp(-4.0)), 1e-8);
  EXPECT_GT(stats.accepted, 0u);
}

TEST(Dopri, CirCumulantsMatchClosedFormMoments) {
  // The CIR cumulant system is closed, so every truncation order reproduces
  // the exact conditional mean and variance.
  const auto model = make_model("cir");
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const auto ex = exact_transition_moments("cir", th, 50.0, 1.0 / 12);
  for (int n = 2; n <= 6; ++n) {
    const auto k = integrate(*model.system(n), point_mass_initial(std::vector<double>{50.0}, 1, n),
                             model.slot_values(th), 1.0 / 12);
    EXPECT_NEAR(k.values()[0], ex.mean, 1e-9 * ex.mean) << "order " << n;
    EXPECT_NEAR(k.values()[1], ex.variance, 1e-8 * ex.variance) << "order " << n;
  }
}

TEST(Dopri, CirOracleCumulants) {
  // scipy solve_ivp(rtol=1e-12) of the hand-written CIR system
  const auto model = make_model("cir");
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const auto k = integrate(*model.system(4), point_mass_initial(std::vector<double>{50.0}, 1, 4),
                           model.slot_values(th), 1.0 / 12);
  const double expected[] = {50.94002478, 55.85208335, 96.08946599, 223.05202439};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(k.values()[i], expected[i], 1e-6 * expected[i]);
}

TEST(Dopri, GbmMeanAndVarianceExactAtAnyOrder) {
  const auto model = make_model("gbm");
  const std::vector<double> th{0.12, 0.2};
  const auto ex = exact_transition_moments("gbm", th, 0.049, 1.0 / 12);
  for (int n = 2; n <= 5; ++n) {
    const auto k = integrate(*model.system(n), point_mass_initial(std::vector<double>{0.049}, 1, n),
                             model.slot_values(th), 1.0 / 12);
    EXPECT_NEAR(k.values()[0], ex.mean, 1e-10);
    EXPECT_NEAR(k.values()[1], ex.variance, 1e-8 * ex.variance);
  }
}

TEST(Dopri, PointMassStart) {
  const auto k = point_mass_initial(std::vector<double>{1.0, 2.0}, 2, 3);
  EXPECT_EQ(k.values()[0], 1.0);
  EXPECT_EQ(k.values()[1], 2.0);
  for (std::size_t i = 2; i < k.size(); ++i) EXPECT_EQ(k.values()[i], 0.0);
  EXPECT_THROW(point_mass_initial(std::vector<double>{1.0}, 2, 3), std::invalid_argument);
}

TEST(Dopri, StepBudgetExhaustionCarriesPartialState) {
  const auto model = make_model("cir");
  const std::vector<double> th{1.5, 58.0, std::sqrt(15.0)};
  const auto bound = model.system(4)->bind(model.slot_values(th));
  IntegratorConfig cfg;
  cfg.max_steps = 2;
  cfg.initial_step = 1e-6;
  try {
    integrate_dopri(bound, std::vector<double>{50.0, 0.0, 0.0, 0.0}, 10.0, cfg);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.partial_state().size(), 4u);
    EXPECT_GT(e.time_reached(), 0.0);
    EXPECT_LT(e.time_reached(), 10.0);
  }
}

TEST(Dopri, RejectsBadConfig) {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  const auto model = make_model("bm");
  const auto bound = model.system(2)->bind(model.slot_values(std::vector<double>{1.0}));
  EXPECT_THROW(integrate_dopri(bound, std::vector<double>{0.0, 0.0}, -1.0, {}), std::invalid_argument);
}

TEST(Dopri, FiniteTimeBlowUpIsReported) {
  // gbm at order 2 with huge volatility over a long horizon stays finite;
  // a quadratic drift from biv with a > 0 and b = 0 blows up.
  const auto model = make_model("biv");
  const std::vector<double> th{5.0, 0.0, 1.0, 0.5, 5.0, 1.0};
  const auto bound = model.system(2)->bind(model.slot_values(th));
  EXPECT_THROW(integrate_dopri(bound, point_mass_initial(std::vector<double>{25.0, 5.0}, 2, 2).values(),
                               50.0, {}),
               IntegrationError);
}
