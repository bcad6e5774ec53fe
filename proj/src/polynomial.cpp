#include "saddlefit/polynomial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace saddlefit {

MultiIndex::MultiIndex(std::initializer_list<int> exps) : exps_(exps) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  }
}

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  }
}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t i) {
  MultiIndex r(dim);
  r[i] = 1;
  return r;
}

int MultiIndex::order() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }

bool MultiIndex::divides(const MultiIndex& other) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (exps_[i] > other.exps_[i]) return false;
  }
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("MultiIndex: dimension mismatch");
  MultiIndex r = *this;
  for (std::size_t i = 0; i < dim(); ++i) r.exps_[i] += o.exps_[i];
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("MultiIndex: dimension mismatch");
  MultiIndex r = *this;
  for (std::size_t i = 0; i < dim(); ++i) {
    r.exps_[i] -= o.exps_[i];
    if (r.exps_[i] < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  }
  return r;
}

bool GradedLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int oa = a.order();
  const int ob = b.order();
  if (oa != ob) return oa < ob;
  return a.exponents() > b.exponents();
}

namespace {

void compositions(std::size_t dim, std::size_t pos, int remaining, std::vector<int>& cur,
                  std::vector<MultiIndex>& out) {
  if (pos + 1 == dim) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    compositions(dim, pos + 1, remaining - e, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> graded_indices(std::size_t dim, int min_order, int max_order) {
  if (dim == 0) throw std::invalid_argument("graded_indices: dim must be >= 1");
  std::vector<MultiIndex> out;
  std::vector<int> cur(dim, 0);
  for (int k = std::max(0, min_order); k <= max_order; ++k) {
    compositions(dim, 0, k, cur, out);
  }
  return out;
}

std::string index_label(const MultiIndex& r) {
  std::string s;
  for (int e : r.exponents()) s += std::to_string(e);
  return s;
}

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Polynomial Polynomial::constant(std::size_t dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex(dim), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t dim, std::size_t i, double coef) {
  if (i >= dim) throw std::out_of_range("Polynomial::variable: index out of range");
  Polynomial p(dim);
  p.add_term(MultiIndex::unit(dim, i), coef);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& exps, double coef) {
  Polynomial p(exps.dim());
  p.add_term(exps, coef);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [k, v] : terms_) d = std::max(d, k.order());
  return terms_.empty() ? -1 : d;
}

double Polynomial::coefficient(const MultiIndex& exps) const {
  auto it = terms_.find(exps);
  return it == terms_.end() ? 0.0 : it->second;
}

Polynomial& Polynomial::add_term(const MultiIndex& exps, double coef) {
  if (exps.dim() != dim_) throw DimensionMismatch("Polynomial: term dimension mismatch");
  if (coef == 0.0) return *this;
  auto [it, inserted] = terms_.try_emplace(exps, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
  return *this;
}

void Polynomial::check_dim(const Polynomial& o) const {
  if (o.dim_ != dim_) {
    throw DimensionMismatch("Polynomial: dimension mismatch (" + std::to_string(dim_) + " vs " +
                            std::to_string(o.dim_) + ")");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_dim(o);
  for (const auto& [k, v] : o.terms_) add_term(k, v);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_dim(o);
  for (const auto& [k, v] : o.terms_) add_term(k, -v);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_dim(b);
  Polynomial out(a.dim_);
  for (const auto& [ka, va] : a.terms_) {
    for (const auto& [kb, vb] : b.terms_) out.add_term(ka + kb, va * vb);
  }
  return out;
}

Polynomial Polynomial::derivative(std::size_t i) const {
  if (i >= dim_) throw std::out_of_range("Polynomial::derivative: index out of range");
  Polynomial out(dim_);
  for (const auto& [k, v] : terms_) {
    if (k[i] == 0) continue;
    MultiIndex d = k;
    d[i] -= 1;
    out.add_term(d, v * k[i]);
  }
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionMismatch("Polynomial::evaluate: dimension mismatch");
  double total = 0.0;
  for (const auto& [k, v] : terms_) {
    double term = v;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (int e = 0; e < k[i]; ++e) term *= x[i];
    }
    total += term;
  }
  return total;
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (terms_.empty()) return "0";
  std::vector<std::string> defaults;
  if (names.empty()) {
    for (std::size_t i = 0; i < dim_; ++i) defaults.push_back("x" + std::to_string(i + 1));
    names = defaults;
  }
  if (names.size() != dim_) throw DimensionMismatch("Polynomial::to_string: name count mismatch");

  std::vector<std::pair<MultiIndex, double>> ordered(terms_.begin(), terms_.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return GradedLess{}(a.first, b.first); });

  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : ordered) {
    double mag = std::abs(v);
    if (first) {
      if (v < 0) os << "-";
    } else {
      os << (v < 0 ? " - " : " + ");
    }
    first = false;

    std::string mono;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (k[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += names[i];
      if (k[i] > 1) mono += "^" + std::to_string(k[i]);
    }
    if (mono.empty()) {
      os << format_number(mag);
    } else if (mag == 1.0) {
      os << mono;
    } else {
      os << format_number(mag) << "*" << mono;
    }
  }
  return os.str();
}

Polynomial poly_add(const Polynomial& p, const Polynomial& q) { return p + q; }
Polynomial poly_mul(const Polynomial& p, const Polynomial& q) { return p * q; }

Polynomial apply_generator(const MultiIndex& r, std::span<const Polynomial> drift,
                           const PolynomialMatrix& diffusion) {
  const std::size_t m = r.dim();
  if (drift.size() != m || diffusion.size() != m) {
    throw DimensionMismatch("apply_generator: drift/diffusion size does not match index");
  }
  for (const auto& row : diffusion) {
    if (row.size() != m) throw DimensionMismatch("apply_generator: diffusion must be m x m");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (drift[i].dim() != m) throw DimensionMismatch("apply_generator: drift dimension");
    for (std::size_t j = 0; j < m; ++j) {
      if (diffusion[i][j].dim() != m) throw DimensionMismatch("apply_generator: diffusion dimension");
      if (!(diffusion[i][j] == diffusion[j][i])) {
        throw std::invalid_argument("apply_generator: diffusion matrix is not symmetric");
      }
    }
  }

  Polynomial out(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (r[i] == 0) continue;
    MultiIndex lowered = r;
    lowered[i] -= 1;
    out += Polynomial::monomial(lowered, r[i]) * drift[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      MultiIndex lowered = r;
      double weight;
      if (i == j) {
        if (r[i] < 2) continue;
        weight = 0.5 * r[i] * (r[i] - 1);
        lowered[i] -= 2;
      } else {
        if (r[i] == 0 || r[j] == 0) continue;
        weight = 0.5 * r[i] * r[j];
        lowered[i] -= 1;
        lowered[j] -= 1;
      }
      out += Polynomial::monomial(lowered, weight) * diffusion[i][j];
    }
  }
  return out;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) {
  offsets_.push_back(0);
  for (const auto& [k, v] : p.terms()) {
    coefs_.push_back(v);
    for (std::size_t i = 0; i < k.dim(); ++i) {
      if (k[i] > 0) factors_.push_back({static_cast<unsigned>(i), static_cast<unsigned>(k[i])});
    }
    offsets_.push_back(static_cast<unsigned>(factors_.size()));
  }
}

double CompiledPolynomial::operator()(std::span<const double> x) const {
  double total = 0.0;
  for (std::size_t t = 0; t < coefs_.size(); ++t) {
    double term = coefs_[t];
    for (unsigned f = offsets_[t]; f < offsets_[t + 1]; ++f) {
      const double xv = x[factors_[f].var];
      for (unsigned e = 0; e < factors_[f].power; ++e) term *= xv;
    }
    total += term;
  }
  return total;
}

}  // namespace saddlefit
