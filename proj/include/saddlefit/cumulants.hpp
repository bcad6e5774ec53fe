/**
 * @file cumulants.hpp
 * @brief Moment/cumulant bookkeeping and automatic derivation of truncated
 *        cumulant ODE systems for polynomial diffusions.
 *
 * The derivation works on the raw-moment form of the generator: for every
 * multi-index q the generator gives d m_q/dt as a linear combination of raw
 * moments, raw moments are written as polynomials in the cumulants (with all
 * cumulants above the truncation order set to zero), and the chain rule
 * through the moment-cumulant map turns this into d kappa/dt. All of this is
 * done once per model structure and truncation order; the numeric model
 * coefficients are bound afterwards, per parameter vector.
 */
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "saddlefit/polynomial.hpp"

namespace saddlefit {

/// Ordered set of multi-indices with O(log n) position lookup.
class IndexLayout {
 public:
  IndexLayout(std::size_t dim, int min_order, int max_order);

  std::size_t dim() const { return dim_; }
  int min_order() const { return min_order_; }
  int max_order() const { return max_order_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }

  /// Position of r, or npos when r is outside the layout.
  std::size_t find(const MultiIndex& r) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t dim_;
  int min_order_;
  int max_order_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> lookup_;
};

/// Shared layout of cumulants 1 <= |r| <= order (cached, thread-safe).
std::shared_ptr<const IndexLayout> cumulant_layout(std::size_t dim, int order);
/// Shared layout of raw moments 0 <= |r| <= order (cached, thread-safe).
std::shared_ptr<const IndexLayout> moment_layout(std::size_t dim, int order);

/// Supported truncation orders.
inline constexpr int kMinTruncationOrder = 2;
inline constexpr int kMaxTruncationOrder = 6;

std::vector<MultiIndex> enumerate_cumulants(std::size_t dim, int order);

class CumulantSet {
 public:
  CumulantSet(std::size_t dim, int order);
  CumulantSet(std::size_t dim, int order, std::vector<double> values);

  std::size_t dim() const { return layout_->dim(); }
  int order() const { return layout_->max_order(); }
  std::size_t size() const { return values_.size(); }
  const IndexLayout& layout() const { return *layout_; }
  const std::vector<MultiIndex>& indices() const { return layout_->indices(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Cumulant at r; zero for orders above the truncation.
  double at(const MultiIndex& r) const;
  void set(const MultiIndex& r, double v);

  /// First-order block (the mean vector).
  std::vector<double> mean() const;
  /// Second-order block as a dense row-major m x m matrix.
  std::vector<double> covariance() const;

 private:
  std::shared_ptr<const IndexLayout> layout_;
  std::vector<double> values_;
};

class MomentSet {
 public:
  MomentSet(std::size_t dim, int order);

  std::size_t dim() const { return layout_->dim(); }
  int order() const { return layout_->max_order(); }
  const IndexLayout& layout() const { return *layout_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double at(const MultiIndex& r) const;
  void set(const MultiIndex& r, double v);

 private:
  std::shared_ptr<const IndexLayout> layout_;
  std::vector<double> values_;
};

/// Raw moments for all |r| <= target_order, with cumulants above the
/// truncation order of `kappa` treated as zero.
MomentSet moments_from_cumulants(const CumulantSet& kappa, int target_order);

/// Inverse relation: cumulants up to `order` from raw moments.
CumulantSet cumulants_from_moments(const MomentSet& moments, int order);

/// One monomial of a drift or diffusion entry whose coefficient is a model
/// parameter expression bound later.
struct SlotTerm {
  MultiIndex monomial;
  std::size_t slot;
};

/// Structural description of a polynomial diffusion: which monomials appear
/// in each drift entry and in each upper-triangular diffusion entry, each
/// tied to a coefficient slot. Slot labels are only used for rendering.
struct ModelStructure {
  std::size_t dim = 0;
  std::vector<std::vector<SlotTerm>> drift;               // [i]
  std::vector<std::vector<std::vector<SlotTerm>>> diffusion;  // [i][j], j >= i used
  std::vector<std::string> slot_labels;

  std::size_t num_slots() const { return slot_labels.size(); }
  void validate() const;
  /// Canonical text key used for caching derived systems.
  std::string key() const;

  /// Numeric drift/diffusion polynomials at the given slot values.
  std::vector<Polynomial> drift_polynomials(std::span<const double> slot_values) const;
  PolynomialMatrix diffusion_polynomials(std::span<const double> slot_values) const;

  /// Structure whose slots are the monomials of concrete polynomials; the
  /// returned slot values reproduce them exactly.
  static ModelStructure from_polynomials(std::span<const Polynomial> drift,
                                         const PolynomialMatrix& diffusion,
                                         std::vector<double>& slot_values);
};

/// d kappa/dt at fixed coefficient values, compiled for fast evaluation.
class BoundCumulantSystem {
 public:
  BoundCumulantSystem(std::size_t dim, int order, std::vector<Polynomial> rhs);

  std::size_t dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return compiled_.size(); }
  const std::vector<Polynomial>& rhs_polynomials() const { return rhs_; }

  void rhs(std::span<const double> kappa, std::span<double> dkappa) const;
  std::vector<double> rhs(std::span<const double> kappa) const;

 private:
  std::size_t dim_;
  int order_;
  std::vector<Polynomial> rhs_;
  std::vector<CompiledPolynomial> compiled_;
};

/// Derived closed cumulant system for one model structure and order.
class CumulantODESystem {
 public:
  /// Moment-level record: d m_q/dt gets weight * slot_value * m_moment.
  struct MomentRecord {
    MultiIndex moment;
    std::size_t slot;
    double weight;
  };

  std::size_t dim() const { return structure_.dim; }
  int order() const { return order_; }
  std::size_t size() const { return layout_->size(); }
  const IndexLayout& layout() const { return *layout_; }
  const ModelStructure& structure() const { return structure_; }

  /// Per cumulant q (layout order): the moment records of d m_q/dt.
  const std::vector<std::vector<MomentRecord>>& moment_table() const { return moment_table_; }
  /// Per cumulant r, per slot: polynomial in the cumulant variables.
  const std::vector<std::vector<Polynomial>>& structural_table() const { return structural_; }

  BoundCumulantSystem bind(std::span<const double> slot_values) const;

  /// Convenience: d kappa/dt at slot values (binds on every call).
  std::vector<double> rhs(std::span<const double> kappa, std::span<const double> slot_values) const;

  /// Cumulant variable names: k1, k2, ... (m = 1) or k10, k01, ... (m > 1).
  std::vector<std::string> variable_names() const;
  /// One line per cumulant, e.g. "d/dt k2 = sigma^2*k1 - 2*b*k2", using the
  /// slot labels as symbolic coefficients.
  std::vector<std::string> render() const;

 private:
  friend std::shared_ptr<const CumulantODESystem> derive_ode_system(const ModelStructure&, int);
  CumulantODESystem() = default;

  ModelStructure structure_;
  int order_ = 0;
  std::shared_ptr<const IndexLayout> layout_;
  std::vector<std::vector<MomentRecord>> moment_table_;
  std::vector<std::vector<Polynomial>> structural_;
};

/// Derives (or fetches from the process-wide cache) the truncated system.
std::shared_ptr<const CumulantODESystem> derive_ode_system(const ModelStructure& structure,
                                                           int order);

}  // namespace saddlefit
