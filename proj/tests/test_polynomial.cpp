#include <gtest/gtest.h>

#include <random>

#include "saddlefit/polynomial.hpp"

using namespace saddlefit;

namespace {

Polynomial random_poly(std::mt19937_64& rng, std::size_t dim, int max_degree, int terms) {
  std::uniform_int_distribution<int> e(0, max_degree);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Polynomial p(dim);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> ex(dim);
    for (auto& v : ex) v = e(rng);
    p.add_term(MultiIndex(ex), c(rng));
  }
  return p;
}

}  // namespace

TEST(MultiIndex, OrderAndArithmetic) {
  const MultiIndex a{2, 1}, b{1, 0};
  EXPECT_EQ(a.order(), 3);
  EXPECT_TRUE(b.divides(a));
  EXPECT_FALSE(a.divides(b));
  EXPECT_EQ(a - b, (MultiIndex{1, 1}));
  EXPECT_EQ(a + b, (MultiIndex{3, 1}));
  EXPECT_EQ(MultiIndex::unit(3, 1), (MultiIndex{0, 1, 0}));
}

TEST(MultiIndex, GradedOrderPutsFirstCoordinateFirst) {
  const auto idx = graded_indices(2, 1, 2);
  ASSERT_EQ(idx.size(), 5u);
  EXPECT_EQ(idx[0], (MultiIndex{1, 0}));
  EXPECT_EQ(idx[1], (MultiIndex{0, 1}));
  EXPECT_EQ(idx[2], (MultiIndex{2, 0}));
  EXPECT_EQ(idx[3], (MultiIndex{1, 1}));
  EXPECT_EQ(idx[4], (MultiIndex{0, 2}));
  EXPECT_EQ(index_label(idx[3]), "11");
}

TEST(MultiIndex, GradedCountMatchesBinomial) {
  // number of multi-indices with 1 <= |r| <= n in m variables is C(n+m, m) - 1
  EXPECT_EQ(graded_indices(1, 1, 4).size(), 4u);
  EXPECT_EQ(graded_indices(2, 1, 3).size(), 9u);
  EXPECT_EQ(graded_indices(3, 1, 2).size(), 9u);
  EXPECT_EQ(graded_indices(3, 1, 4).size(), 34u);
}

TEST(Polynomial, BuildAndPrint) {
  Polynomial p = Polynomial::constant(1, 87.0) + Polynomial::variable(1, 0, -1.5);
  EXPECT_EQ(p.to_string(), "87 - 1.5*x1");
  EXPECT_EQ(p.degree(), 1);
  EXPECT_DOUBLE_EQ(p.evaluate(std::vector<double>{2.0}), 84.0);
  EXPECT_EQ(Polynomial(2).to_string(), "0");
  const std::vector<std::string> names{"S", "V"};
  EXPECT_EQ(Polynomial::monomial(MultiIndex{2, 1}).to_string(names), "S^2*V");
}

TEST(Polynomial, ZeroCoefficientsAreDropped) {
  Polynomial p = Polynomial::variable(2, 0, 3.0);
  p -= Polynomial::variable(2, 0, 3.0);
  EXPECT_TRUE(p.is_zero());
  EXPECT_EQ(p.size(), 0u);
  EXPECT_TRUE((Polynomial::variable(2, 1) * 0.0).is_zero());
}

TEST(Polynomial, ProductAndDerivative) {
  const Polynomial x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const Polynomial p = (x + y) * (x - y);
  EXPECT_EQ(p.coefficient(MultiIndex{2, 0}), 1.0);
  EXPECT_EQ(p.coefficient(MultiIndex{1, 1}), 0.0);
  EXPECT_EQ(p.coefficient(MultiIndex{0, 2}), -1.0);
  EXPECT_EQ(p.derivative(0), 2.0 * x);
  EXPECT_EQ(p.derivative(1), -2.0 * y);
}

TEST(Polynomial, DimensionMismatchThrows) {
  EXPECT_THROW(Polynomial::variable(1, 0) + Polynomial::variable(2, 0), DimensionMismatch);
  EXPECT_THROW(Polynomial::variable(2, 0) * Polynomial::variable(3, 0), DimensionMismatch);
  EXPECT_THROW(Polynomial::variable(2, 0).evaluate(std::vector<double>{1.0}), DimensionMismatch);
}

TEST(Polynomial, RandomAlgebraMatchesPointwise) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const Polynomial p = random_poly(rng, dim, 3, 5), q = random_poly(rng, dim, 3, 5);
    std::vector<double> x(dim);
    for (auto& v : x) v = u(rng);
    const double pv = p.evaluate(x), qv = q.evaluate(x);
    EXPECT_NEAR((p + q).evaluate(x), pv + qv, 1e-12);
    EXPECT_NEAR((p * q).evaluate(x), pv * qv, 1e-10);
    EXPECT_NEAR(poly_mul(p, q).evaluate(x), pv * qv, 1e-10);
    EXPECT_NEAR((p * q - q * p).evaluate(x), 0.0, 1e-12);
    EXPECT_NEAR(CompiledPolynomial(p)(x), pv, 1e-12);
    // product rule
    const Polynomial lhs = (p * q).derivative(0);
    const Polynomial rhs = p.derivative(0) * q + p * q.derivative(0);
    EXPECT_NEAR(lhs.evaluate(x), rhs.evaluate(x), 1e-9);
    EXPECT_LE((p * q).degree(), p.degree() + q.degree());
  }
}

TEST(Generator, CirMomentRecursion) {
  // L x^r = r (b mu - b x) x^{r-1} + r(r-1)/2 s2 x^{r-1}
  const double b = 1.5, mu = 58.0, s2 = 15.0;
  const std::vector<Polynomial> drift{Polynomial::constant(1, b * mu) +
                                      Polynomial::variable(1, 0, -b)};
  const PolynomialMatrix diff{{Polynomial::variable(1, 0, s2)}};
  for (int r = 1; r <= 5; ++r) {
    const Polynomial g = apply_generator(MultiIndex{r}, drift, diff);
    EXPECT_DOUBLE_EQ(g.coefficient(MultiIndex{r}), -r * b);
    EXPECT_DOUBLE_EQ(g.coefficient(MultiIndex{r - 1}), r * b * mu + 0.5 * r * (r - 1) * s2);
    EXPECT_EQ(g.size(), 2u);
  }
}

TEST(Generator, CrossTermUsesOffDiagonalDiffusion) {
  // r = (1,1): L(xy) = y mu1 + x mu2 + sigma12
  const Polynomial zero(2);
  const std::vector<Polynomial> drift{zero, zero};
  const Polynomial s12 = Polynomial::monomial(MultiIndex{1, 1}, 0.3);
  const PolynomialMatrix diff{{Polynomial::constant(2, 1.0), s12}, {s12, Polynomial::constant(2, 2.0)}};
  EXPECT_EQ(apply_generator(MultiIndex{1, 1}, drift, diff), s12);
  const PolynomialMatrix asym{{zero, s12}, {zero, zero}};
  EXPECT_THROW(apply_generator(MultiIndex{1, 1}, drift, asym), std::invalid_argument);
}
