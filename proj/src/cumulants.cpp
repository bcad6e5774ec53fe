#include "saddlefit/cumulants.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace saddlefit {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Visits every s with 0 <= s <= bound componentwise.
void for_each_in_box(const MultiIndex& bound, const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex s(bound.dim());
  while (true) {
    fn(s);
    std::size_t i = 0;
    for (; i < bound.dim(); ++i) {
      if (s[i] < bound[i]) {
        ++s[i];
        break;
      }
      s[i] = 0;
    }
    if (i == bound.dim()) return;
  }
}

double multi_binomial(const MultiIndex& n, const MultiIndex& k) {
  double r = 1.0;
  for (std::size_t i = 0; i < n.dim(); ++i) r *= binomial(n[i], k[i]);
  return r;
}

std::size_t first_nonzero(const MultiIndex& r) {
  for (std::size_t i = 0; i < r.dim(); ++i) {
    if (r[i] != 0) return i;
  }
  return r.dim();
}

// Raw moments from cumulants via
//   m_r = sum_{0 <= s <= r - e_i} C(r - e_i, s) kappa_{s + e_i} m_{r - e_i - s},
// i the first non-zero coordinate of r. Works for doubles and for symbolic
// polynomials in the cumulants alike.
template <class T>
std::vector<T> moment_recursion(const IndexLayout& moments,
                                const std::function<T(const MultiIndex&)>& kappa, const T& one) {
  std::vector<T> m;
  m.reserve(moments.size());
  for (const MultiIndex& r : moments.indices()) {
    if (r.is_zero()) {
      m.push_back(one);
      continue;
    }
    const std::size_t i = first_nonzero(r);
    const MultiIndex base = r - MultiIndex::unit(r.dim(), i);
    T acc = one * 0.0;
    for_each_in_box(base, [&](const MultiIndex& s) {
      const T k = kappa(s + MultiIndex::unit(r.dim(), i));
      const std::size_t pos = moments.find(base - s);
      acc += (k * m[pos]) * multi_binomial(base, s);
    });
    m.push_back(std::move(acc));
  }
  return m;
}

template <class Layout>
std::shared_ptr<const IndexLayout> cached_layout(std::size_t dim, int lo, int hi) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, int, int>, std::shared_ptr<const IndexLayout>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{dim, lo, hi}];
  if (!slot) slot = std::make_shared<const IndexLayout>(dim, lo, hi);
  return slot;
}

struct CumulantTag {};
struct MomentTag {};

void check_order(int order) {
  if (order < kMinTruncationOrder) {
    throw std::invalid_argument("truncation order must be >= 2 (the saddlepoint needs a variance)");
  }
  if (order > kMaxTruncationOrder) {
    throw std::invalid_argument("truncation order above " + std::to_string(kMaxTruncationOrder) +
                                " is not supported");
  }
}

}  // namespace

IndexLayout::IndexLayout(std::size_t dim, int min_order, int max_order)
    : dim_(dim), min_order_(min_order), max_order_(max_order),
      indices_(graded_indices(dim, min_order, max_order)) {
  for (std::size_t k = 0; k < indices_.size(); ++k) lookup_.emplace(indices_[k], k);
}

std::size_t IndexLayout::find(const MultiIndex& r) const {
  auto it = lookup_.find(r);
  return it == lookup_.end() ? npos : it->second;
}

std::shared_ptr<const IndexLayout> cumulant_layout(std::size_t dim, int order) {
  return cached_layout<CumulantTag>(dim, 1, order);
}

std::shared_ptr<const IndexLayout> moment_layout(std::size_t dim, int order) {
  return cached_layout<MomentTag>(dim, 0, order);
}

std::vector<MultiIndex> enumerate_cumulants(std::size_t dim, int order) {
  if (dim < 1) throw std::invalid_argument("enumerate_cumulants: dimension must be >= 1");
  check_order(order);
  return cumulant_layout(dim, order)->indices();
}

CumulantSet::CumulantSet(std::size_t dim, int order)
    : layout_((check_order(order), cumulant_layout(dim, order))), values_(layout_->size(), 0.0) {}

CumulantSet::CumulantSet(std::size_t dim, int order, std::vector<double> values)
    : layout_((check_order(order), cumulant_layout(dim, order))), values_(std::move(values)) {
  if (values_.size() != layout_->size()) {
    throw std::invalid_argument("CumulantSet: expected " + std::to_string(layout_->size()) +
                                " values, got " + std::to_string(values_.size()));
  }
}

double CumulantSet::at(const MultiIndex& r) const {
  const std::size_t k = layout_->find(r);
  return k == IndexLayout::npos ? 0.0 : values_[k];
}

void CumulantSet::set(const MultiIndex& r, double v) {
  const std::size_t k = layout_->find(r);
  if (k == IndexLayout::npos) throw std::out_of_range("CumulantSet::set: index outside truncation");
  values_[k] = v;
}

std::vector<double> CumulantSet::mean() const {
  return {values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(dim())};
}

std::vector<double> CumulantSet::covariance() const {
  const std::size_t m = dim();
  std::vector<double> cov(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cov[i * m + j] = at(MultiIndex::unit(m, i) + MultiIndex::unit(m, j));
    }
  }
  return cov;
}

MomentSet::MomentSet(std::size_t dim, int order)
    : layout_(moment_layout(dim, order)), values_(layout_->size(), 0.0) {
  values_[0] = 1.0;
}

double MomentSet::at(const MultiIndex& r) const {
  const std::size_t k = layout_->find(r);
  if (k == IndexLayout::npos) throw std::out_of_range("MomentSet::at: index outside layout");
  return values_[k];
}

void MomentSet::set(const MultiIndex& r, double v) {
  const std::size_t k = layout_->find(r);
  if (k == IndexLayout::npos) throw std::out_of_range("MomentSet::set: index outside layout");
  values_[k] = v;
}

MomentSet moments_from_cumulants(const CumulantSet& kappa, int target_order) {
  MomentSet out(kappa.dim(), target_order);
  const std::function<double(const MultiIndex&)> k = [&](const MultiIndex& r) { return kappa.at(r); };
  auto m = moment_recursion<double>(out.layout(), k, 1.0);
  std::copy(m.begin(), m.end(), out.values().begin());
  return out;
}

CumulantSet cumulants_from_moments(const MomentSet& moments, int order) {
  if (moments.order() < order) {
    throw std::invalid_argument("cumulants_from_moments: moments must cover the requested order");
  }
  CumulantSet out(moments.dim(), order);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const MultiIndex& r = out.indices()[idx];
    const std::size_t i = first_nonzero(r);
    const MultiIndex base = r - MultiIndex::unit(r.dim(), i);
    double acc = moments.at(r);
    for_each_in_box(base, [&](const MultiIndex& s) {
      if (s == base) return;
      acc -= multi_binomial(base, s) * out.at(s + MultiIndex::unit(r.dim(), i)) *
             moments.at(base - s);
    });
    out.values()[idx] = acc;
  }
  return out;
}

void ModelStructure::validate() const {
  if (dim == 0) throw std::invalid_argument("ModelStructure: dimension must be >= 1");
  if (drift.size() != dim) throw DimensionMismatch("ModelStructure: drift must have m entries");
  if (diffusion.size() != dim) throw DimensionMismatch("ModelStructure: diffusion must be m x m");
  auto check_terms = [&](const std::vector<SlotTerm>& terms) {
    for (const auto& t : terms) {
      if (t.monomial.dim() != dim) throw DimensionMismatch("ModelStructure: monomial dimension");
      if (t.slot >= num_slots()) throw std::out_of_range("ModelStructure: slot out of range");
    }
  };
  for (const auto& d : drift) check_terms(d);
  for (std::size_t i = 0; i < dim; ++i) {
    if (diffusion[i].size() != dim) throw DimensionMismatch("ModelStructure: diffusion must be m x m");
    for (std::size_t j = 0; j < dim; ++j) {
      check_terms(diffusion[i][j]);
      if (j < i && !diffusion[i][j].empty()) {
        throw std::invalid_argument("ModelStructure: give diffusion entries for j >= i only");
      }
    }
  }
}

std::string ModelStructure::key() const {
  std::ostringstream os;
  auto dump = [&](const std::vector<SlotTerm>& terms) {
    os << '[';
    for (const auto& t : terms) os << index_label(t.monomial) << ':' << t.slot << ',';
    os << ']';
  };
  os << dim << ';';
  for (const auto& d : drift) dump(d);
  os << ';';
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) dump(diffusion[i][j]);
  }
  os << ';';
  for (const auto& l : slot_labels) os << l << '|';
  return os.str();
}

std::vector<Polynomial> ModelStructure::drift_polynomials(std::span<const double> slot_values) const {
  if (slot_values.size() != num_slots()) throw std::invalid_argument("slot value count mismatch");
  std::vector<Polynomial> out;
  for (const auto& terms : drift) {
    Polynomial p(dim);
    for (const auto& t : terms) p.add_term(t.monomial, slot_values[t.slot]);
    out.push_back(std::move(p));
  }
  return out;
}

PolynomialMatrix ModelStructure::diffusion_polynomials(std::span<const double> slot_values) const {
  if (slot_values.size() != num_slots()) throw std::invalid_argument("slot value count mismatch");
  PolynomialMatrix out(dim, std::vector<Polynomial>(dim, Polynomial(dim)));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      Polynomial p(dim);
      for (const auto& t : diffusion[i][j]) p.add_term(t.monomial, slot_values[t.slot]);
      out[i][j] = p;
      out[j][i] = p;
    }
  }
  return out;
}

ModelStructure ModelStructure::from_polynomials(std::span<const Polynomial> drift_polys,
                                                const PolynomialMatrix& diffusion_polys,
                                                std::vector<double>& slot_values) {
  ModelStructure s;
  s.dim = drift_polys.size();
  slot_values.clear();
  if (diffusion_polys.size() != s.dim) throw DimensionMismatch("diffusion must be m x m");
  auto add = [&](const Polynomial& p, std::vector<SlotTerm>& into) {
    if (p.dim() != s.dim) throw DimensionMismatch("polynomial dimension mismatch");
    for (const auto& [mono, coef] : p.terms()) {
      into.push_back({mono, s.slot_labels.size()});
      s.slot_labels.push_back(format_number(coef));
      slot_values.push_back(coef);
    }
  };
  s.drift.resize(s.dim);
  for (std::size_t i = 0; i < s.dim; ++i) add(drift_polys[i], s.drift[i]);
  s.diffusion.assign(s.dim, std::vector<std::vector<SlotTerm>>(s.dim));
  for (std::size_t i = 0; i < s.dim; ++i) {
    if (diffusion_polys[i].size() != s.dim) throw DimensionMismatch("diffusion must be m x m");
    for (std::size_t j = i; j < s.dim; ++j) {
      if (!(diffusion_polys[i][j] == diffusion_polys[j][i])) {
        throw std::invalid_argument("diffusion matrix is not symmetric");
      }
      add(diffusion_polys[i][j], s.diffusion[i][j]);
    }
  }
  s.validate();
  return s;
}

BoundCumulantSystem::BoundCumulantSystem(std::size_t dim, int order, std::vector<Polynomial> rhs)
    : dim_(dim), order_(order), rhs_(std::move(rhs)) {
  compiled_.reserve(rhs_.size());
  for (const auto& p : rhs_) compiled_.emplace_back(p);
}

void BoundCumulantSystem::rhs(std::span<const double> kappa, std::span<double> dkappa) const {
  for (std::size_t r = 0; r < compiled_.size(); ++r) dkappa[r] = compiled_[r](kappa);
}

std::vector<double> BoundCumulantSystem::rhs(std::span<const double> kappa) const {
  std::vector<double> out(compiled_.size());
  rhs(kappa, out);
  return out;
}

BoundCumulantSystem CumulantODESystem::bind(std::span<const double> slot_values) const {
  if (slot_values.size() != structure_.num_slots()) {
    throw std::invalid_argument("CumulantODESystem::bind: slot value count mismatch");
  }
  std::vector<Polynomial> rhs;
  rhs.reserve(size());
  for (const auto& per_slot : structural_) {
    Polynomial p(size());
    for (std::size_t k = 0; k < per_slot.size(); ++k) {
      if (slot_values[k] == 0.0) continue;
      for (const auto& [mono, c] : per_slot[k].terms()) p.add_term(mono, c * slot_values[k]);
    }
    rhs.push_back(std::move(p));
  }
  return BoundCumulantSystem(dim(), order_, std::move(rhs));
}

std::vector<double> CumulantODESystem::rhs(std::span<const double> kappa,
                                           std::span<const double> slot_values) const {
  return bind(slot_values).rhs(kappa);
}

std::vector<std::string> CumulantODESystem::variable_names() const {
  std::vector<std::string> names;
  for (const auto& r : layout_->indices()) {
    names.push_back("k" + (dim() == 1 ? std::to_string(r[0]) : index_label(r)));
  }
  return names;
}

std::vector<std::string> CumulantODESystem::render() const {
  const auto names = variable_names();
  std::vector<std::string> lines;
  for (std::size_t r = 0; r < size(); ++r) {
    // kappa monomial -> [(slot, coefficient)]
    std::map<MultiIndex, std::vector<std::pair<std::size_t, double>>, GradedLess> grouped;
    for (std::size_t k = 0; k < structural_[r].size(); ++k) {
      for (const auto& [mono, c] : structural_[r][k].terms()) grouped[mono].emplace_back(k, c);
    }
    std::ostringstream os;
    os << "d/dt " << names[r] << " = ";
    bool first = true;
    for (const auto& [mono, contribs] : grouped) {
      std::string mono_str;
      for (std::size_t v = 0; v < mono.dim(); ++v) {
        if (mono[v] == 0) continue;
        if (!mono_str.empty()) mono_str += "*";
        mono_str += names[v];
        if (mono[v] > 1) mono_str += "^" + std::to_string(mono[v]);
      }
      for (const auto& [slot, c] : contribs) {
        std::string label = structure_.slot_labels[slot];
        double w = c;
        if (!label.empty() && label.front() == '-') {
          w = -w;
          label.erase(0, 1);
        }
        if (label.find_first_of("+-") != std::string::npos) label = "(" + label + ")";
        const bool neg = w < 0;
        const double mag = neg ? -w : w;
        if (first) {
          if (neg) os << "-";
        } else {
          os << (neg ? " - " : " + ");
        }
        first = false;
        std::string body = mag == 1.0 ? std::string() : format_number(mag);
        for (const std::string& part : {label == "1" ? std::string() : label, mono_str}) {
          if (part.empty()) continue;
          body += (body.empty() ? "" : "*") + part;
        }
        os << (body.empty() ? "1" : body);
      }
    }
    if (first) os << "0";
    lines.push_back(os.str());
  }
  return lines;
}

std::shared_ptr<const CumulantODESystem> derive_ode_system(const ModelStructure& structure,
                                                           int order) {
  structure.validate();
  check_order(order);

  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const CumulantODESystem>> cache;
  const std::string key = structure.key() + "#" + std::to_string(order);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  auto sys = std::shared_ptr<CumulantODESystem>(new CumulantODESystem());
  sys->structure_ = structure;
  sys->order_ = order;
  sys->layout_ = cumulant_layout(structure.dim, order);
  const IndexLayout& layout = *sys->layout_;
  const std::size_t m = structure.dim;
  const std::size_t n_vars = layout.size();
  const std::size_t n_slots = structure.num_slots();

  // Generator in raw-moment form.
  int max_moment_order = order;
  sys->moment_table_.resize(n_vars);
  for (std::size_t qi = 0; qi < n_vars; ++qi) {
    const MultiIndex& q = layout[qi];
    auto& rec = sys->moment_table_[qi];
    for (std::size_t i = 0; i < m; ++i) {
      if (q[i] == 0) continue;
      const MultiIndex lowered = q - MultiIndex::unit(m, i);
      for (const auto& t : structure.drift[i]) rec.push_back({lowered + t.monomial, t.slot, double(q[i])});
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        for (const auto& t : structure.diffusion[i][j]) {
          if (i == j) {
            if (q[i] < 2) continue;
            MultiIndex lowered = q;
            lowered[i] -= 2;
            rec.push_back({lowered + t.monomial, t.slot, 0.5 * q[i] * (q[i] - 1)});
          } else {
            if (q[i] == 0 || q[j] == 0) continue;
            MultiIndex lowered = q;
            lowered[i] -= 1;
            lowered[j] -= 1;
            rec.push_back({lowered + t.monomial, t.slot, double(q[i]) * q[j]});
          }
        }
      }
    }
    for (const auto& r : rec) max_moment_order = std::max(max_moment_order, r.moment.order());
  }

  // Raw moments as polynomials in the cumulants, closure kappa_{|s| > n} = 0.
  const auto mlayout = moment_layout(m, max_moment_order);
  const std::function<Polynomial(const MultiIndex&)> kappa_var = [&](const MultiIndex& s) {
    const std::size_t pos = layout.find(s);
    return pos == IndexLayout::npos ? Polynomial(n_vars) : Polynomial::variable(n_vars, pos);
  };
  const std::vector<Polynomial> moment_poly =
      moment_recursion<Polynomial>(*mlayout, kappa_var, Polynomial::constant(n_vars, 1.0));

  // Forward substitution through the unit lower-triangular Jacobian
  // d m_r / d kappa_q:  kdot_r = mdot_r - sum_{q != r} J_rq kdot_q.
  sys->structural_.assign(n_vars, std::vector<Polynomial>(n_slots, Polynomial(n_vars)));
  for (std::size_t ri = 0; ri < n_vars; ++ri) {
    auto& out = sys->structural_[ri];
    for (const auto& rec : sys->moment_table_[ri]) {
      out[rec.slot] += moment_poly[mlayout->find(rec.moment)] * rec.weight;
    }
    const MultiIndex& r = layout[ri];
    const Polynomial& m_r = moment_poly[mlayout->find(r)];
    for (std::size_t qi = 0; qi < ri; ++qi) {
      if (!layout[qi].divides(r)) continue;
      const Polynomial jac = m_r.derivative(qi);
      if (jac.is_zero()) continue;
      for (std::size_t k = 0; k < n_slots; ++k) {
        if (sys->structural_[qi][k].is_zero()) continue;
        out[k] -= jac * sys->structural_[qi][k];
      }
    }
  }

  std::lock_guard lock(mu);
  auto [it, inserted] = cache.emplace(key, sys);
  return it->second;
}

}  // namespace saddlefit
