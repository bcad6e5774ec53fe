#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace saddlefit {

/// Exponent vector (r_1, ..., r_m) of a monomial or a moment/cumulant index.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : exps_(dim, 0) {}
  MultiIndex(std::initializer_list<int> exps);
  explicit MultiIndex(std::vector<int> exps);

  static MultiIndex unit(std::size_t dim, std::size_t i);

  std::size_t dim() const { return exps_.size(); }
  int order() const;
  int operator[](std::size_t i) const { return exps_[i]; }
  int& operator[](std::size_t i) { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  bool is_zero() const { return order() == 0; }
  // componentwise a <= b
  bool divides(const MultiIndex& other) const;

  MultiIndex operator+(const MultiIndex& o) const;
  // Componentwise difference; caller checks divides() first.
  MultiIndex operator-(const MultiIndex& o) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> exps_;
};

/// Graded order: lower total order first, then descending lexicographic
/// ((1,0) before (0,1)).
struct GradedLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// All multi-indices of length `dim` with min_order <= |r| <= max_order in
/// graded order.
std::vector<MultiIndex> graded_indices(std::size_t dim, int min_order, int max_order);

std::string index_label(const MultiIndex& r);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse multivariate polynomial with real coefficients. Zero coefficients
/// are never stored.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double>;

  explicit Polynomial(std::size_t dim = 0) : dim_(dim) {}

  static Polynomial constant(std::size_t dim, double c);
  static Polynomial variable(std::size_t dim, std::size_t i, double coef = 1.0);
  static Polynomial monomial(const MultiIndex& exps, double coef = 1.0);

  std::size_t dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  int degree() const;
  double coefficient(const MultiIndex& exps) const;

  Polynomial& add_term(const MultiIndex& exps, double coef);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

  Polynomial derivative(std::size_t i) const;
  double evaluate(std::span<const double> x) const;

  /// Renders e.g. "87 - 1.5*x1". `names` defaults to x1..xm.
  std::string to_string(std::span<const std::string> names = {}) const;

 private:
  void check_dim(const Polynomial& o) const;

  std::size_t dim_;
  TermMap terms_;
};

Polynomial poly_add(const Polynomial& p, const Polynomial& q);
Polynomial poly_mul(const Polynomial& p, const Polynomial& q);

using PolynomialMatrix = std::vector<std::vector<Polynomial>>;

/// Polynomial whose expectation is d/dt E[prod phi_i^{r_i}] under the
/// diffusion generator:
///   sum_i r_i phi^{r-e_i} mu_i + 1/2 sum_{i,j} d^2(phi^r)/dphi_i dphi_j sigma_ij
Polynomial apply_generator(const MultiIndex& r, std::span<const Polynomial> drift,
                           const PolynomialMatrix& diffusion);

/// Flattened polynomial for repeated numeric evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  double operator()(std::span<const double> x) const;
  bool empty() const { return coefs_.empty(); }

 private:
  struct Factor {
    unsigned var;
    unsigned power;
  };
  std::vector<double> coefs_;
  std::vector<unsigned> offsets_;  // coefs_.size() + 1 entries into factors_
  std::vector<Factor> factors_;
};

std::string format_number(double v);

}  // namespace saddlefit
