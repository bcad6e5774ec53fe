#include "saddlefit/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace saddlefit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

SlotTerm term(std::initializer_list<int> mono, std::size_t slot) {
  return {MultiIndex(mono), slot};
}

ModelStructure empty_structure(std::size_t dim) {
  ModelStructure s;
  s.dim = dim;
  s.drift.resize(dim);
  s.diffusion.assign(dim, std::vector<std::vector<SlotTerm>>(dim));
  return s;
}

DiffusionModel make_cir() {
  auto s = empty_structure(1);
  s.slot_labels = {"b*mu", "-b", "sigma^2"};
  s.drift[0] = {term({0}, 0), term({1}, 1)};
  s.diffusion[0][0] = {term({1}, 2)};
  return DiffusionModel(
      "cir", {"x"},
      {{"b", Constraint::kPositive}, {"mu", Constraint::kPositive}, {"sigma", Constraint::kPositive}},
      {true}, std::move(s), [](std::span<const double> t) {
        return std::vector<double>{t[0] * t[1], -t[0], t[2] * t[2]};
      });
}

DiffusionModel make_gbm() {
  auto s = empty_structure(1);
  s.slot_labels = {"mu", "sigma^2"};
  s.drift[0] = {term({1}, 0)};
  s.diffusion[0][0] = {term({2}, 1)};
  return DiffusionModel("gbm", {"x"}, {{"mu", Constraint::kNone}, {"sigma", Constraint::kPositive}},
                        {true}, std::move(s), [](std::span<const double> t) {
                          return std::vector<double>{t[0], t[1] * t[1]};
                        });
}

DiffusionModel make_bm() {
  auto s = empty_structure(1);
  s.slot_labels = {"c"};
  s.diffusion[0][0] = {term({0}, 0)};
  return DiffusionModel("bm", {"x"}, {{"c", Constraint::kPositive}}, {false}, std::move(s),
                        [](std::span<const double> t) { return std::vector<double>{t[0]}; });
}

DiffusionModel make_ou() {
  auto s = empty_structure(1);
  s.slot_labels = {"g*phistar", "-g", "sigma^2"};
  s.drift[0] = {term({0}, 0), term({1}, 1)};
  s.diffusion[0][0] = {term({0}, 2)};
  return DiffusionModel(
      "ou", {"x"},
      {{"g", Constraint::kPositive}, {"phistar", Constraint::kNone}, {"sigma", Constraint::kPositive}},
      {false}, std::move(s), [](std::span<const double> t) {
        return std::vector<double>{t[0] * t[1], -t[0], t[2] * t[2]};
      });
}

DiffusionModel make_biv() {
  auto s = empty_structure(2);
  s.slot_labels = {"a", "-b", "g*phistar", "-g", "c^2", "sigma^2"};
  s.drift[0] = {term({1, 1}, 0), term({2, 0}, 1)};
  s.drift[1] = {term({0, 0}, 2), term({0, 1}, 3)};
  s.diffusion[0][0] = {term({0, 2}, 4)};
  s.diffusion[1][1] = {term({0, 0}, 5)};
  return DiffusionModel("biv", {"x1", "x2"},
                        {{"a", Constraint::kNone},
                         {"b", Constraint::kNonNegative},
                         {"c", Constraint::kPositive},
                         {"g", Constraint::kPositive},
                         {"phistar", Constraint::kNone},
                         {"sigma", Constraint::kPositive}},
                        {true, false}, std::move(s), [](std::span<const double> t) {
                          return std::vector<double>{t[0],        -t[1], t[3] * t[4],
                                                     -t[3],       t[2] * t[2], t[5] * t[5]};
                        });
}

DiffusionModel make_heston() {
  auto s = empty_structure(2);
  s.slot_labels = {"r", "delta*theta", "-delta", "1", "rho*sigma", "sigma^2"};
  s.drift[0] = {term({1, 0}, 0)};
  s.drift[1] = {term({0, 0}, 1), term({0, 1}, 2)};
  s.diffusion[0][0] = {term({2, 1}, 3)};
  s.diffusion[0][1] = {term({1, 1}, 4)};
  s.diffusion[1][1] = {term({0, 1}, 5)};
  return DiffusionModel("heston", {"S", "V"},
                        {{"r", Constraint::kNone},
                         {"delta", Constraint::kPositive},
                         {"theta", Constraint::kPositive},
                         {"rho", Constraint::kCorrelation},
                         {"sigma", Constraint::kPositive}},
                        {true, true}, std::move(s), [](std::span<const double> t) {
                          return std::vector<double>{t[0], t[1] * t[2], -t[1],
                                                     1.0,  t[3] * t[4], t[4] * t[4]};
                        });
}

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw ParameterError(std::string(what) + ": expected " + std::to_string(n) + " values, got " +
                         std::to_string(v.size()));
  }
}

}  // namespace

bool satisfies(Constraint c, double value) {
  if (!std::isfinite(value)) return false;
  switch (c) {
    case Constraint::kNone: return true;
    case Constraint::kPositive: return value > 0.0;
    case Constraint::kNonNegative: return value >= 0.0;
    case Constraint::kCorrelation: return value > -1.0 && value < 1.0;
  }
  return false;
}

DiffusionModel::DiffusionModel(std::string id, std::vector<std::string> state_names,
                               std::vector<ParamSpec> params, std::vector<bool> positive_state,
                               ModelStructure structure, SlotFn slot_values)
    : id_(std::move(id)),
      state_names_(std::move(state_names)),
      params_(std::move(params)),
      positive_state_(std::move(positive_state)),
      structure_(std::move(structure)),
      slot_fn_(std::move(slot_values)) {
  structure_.validate();
  if (state_names_.size() != structure_.dim || positive_state_.size() != structure_.dim) {
    throw std::invalid_argument("DiffusionModel: state metadata does not match dimension");
  }
}

std::vector<std::string> DiffusionModel::param_names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

void DiffusionModel::check_parameters(std::span<const double> theta) const {
  require_size(theta, params_.size(), ("model " + id_ + " parameters").c_str());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!satisfies(params_[i].constraint, theta[i])) {
      const char* rule = "finite";
      switch (params_[i].constraint) {
        case Constraint::kPositive: rule = "> 0"; break;
        case Constraint::kNonNegative: rule = ">= 0"; break;
        case Constraint::kCorrelation: rule = "in (-1, 1)"; break;
        case Constraint::kNone: break;
      }
      throw ParameterError("model " + id_ + ": parameter " + params_[i].name + " must be " + rule);
    }
  }
}

std::vector<double> DiffusionModel::slot_values(std::span<const double> theta) const {
  require_size(theta, params_.size(), ("model " + id_ + " parameters").c_str());
  return slot_fn_(theta);
}

std::vector<Polynomial> DiffusionModel::drift(std::span<const double> theta) const {
  return structure_.drift_polynomials(slot_values(theta));
}

PolynomialMatrix DiffusionModel::diffusion(std::span<const double> theta) const {
  return structure_.diffusion_polynomials(slot_values(theta));
}

std::shared_ptr<const CumulantODESystem> DiffusionModel::system(int order) const {
  return derive_ode_system(structure_, order);
}

std::vector<std::string> model_ids() { return {"cir", "gbm", "bm", "ou", "biv", "heston"}; }

DiffusionModel make_model(std::string_view id) {
  if (id == "cir") return make_cir();
  if (id == "gbm") return make_gbm();
  if (id == "bm") return make_bm();
  if (id == "ou") return make_ou();
  if (id == "biv") return make_biv();
  if (id == "heston") return make_heston();
  throw UnknownModel("unknown model '" + std::string(id) + "'");
}

ModelInstance build(const DiffusionModel& model, std::span<const double> theta) {
  model.check_parameters(theta);
  return {model, std::vector<double>(theta.begin(), theta.end()), model.drift(theta),
          model.diffusion(theta)};
}

ModelInstance build(std::string_view id, std::span<const double> theta) {
  return build(make_model(id), theta);
}

bool has_exact_transition(std::string_view id) {
  return id == "cir" || id == "gbm" || id == "bm" || id == "ou";
}

double log_bessel_i(double nu, double z) {
  if (!(nu > -1.0)) throw std::domain_error("log_bessel_i: order must be > -1");
  if (!(z > 0.0)) throw std::domain_error("log_bessel_i: argument must be > 0");
  if (z < 1e-6 * std::sqrt(std::abs(nu) + 1.0)) {
    // Leading series term; the next one is O(z^2 / (nu + 1)).
    return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) +
           std::log1p(0.25 * z * z / (nu + 1.0));
  }
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  gsl_sf_result ri;
  double scaled;
  int status;
  if (nu >= 0.0) {
    status = gsl_sf_bessel_Inu_scaled_e(nu, z, &ri);
    scaled = ri.val;
  } else {
    // I_{-a} = I_a + (2/pi) sin(a pi) K_a
    const double a = -nu;
    gsl_sf_result rk;
    status = gsl_sf_bessel_Inu_scaled_e(a, z, &ri);
    if (status == GSL_SUCCESS) status = gsl_sf_bessel_Knu_scaled_e(a, z, &rk);
    scaled = ri.val + 2.0 / std::numbers::pi * std::sin(a * std::numbers::pi) *
                          std::exp(-2.0 * z) * rk.val;
  }
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS || !(scaled > 0.0)) {
    throw std::domain_error(std::string("log_bessel_i: ") + gsl_strerror(status));
  }
  return std::log(scaled) + z;
}

double exact_transition_logdensity(std::string_view id, std::span<const double> theta,
                                   std::span<const double> x0s, std::span<const double> x1s,
                                   double dt) {
  if (!has_exact_transition(id)) {
    throw UnsupportedModel("model '" + std::string(id) + "' has no closed-form transition density");
  }
  make_model(id).check_parameters(theta);
  require_size(x0s, 1, "x0");
  require_size(x1s, 1, "x1");
  if (!(dt > 0.0)) throw std::invalid_argument("exact_transition_logdensity: dt must be > 0");
  const double x0 = x0s[0], x1 = x1s[0];

  if (id == "cir") {
    const double b = theta[0], mu = theta[1], s2 = theta[2] * theta[2];
    if (!(x0 > 0.0)) throw std::invalid_argument("cir: x0 must be > 0");
    if (!(x1 > 0.0)) return -INFINITY;
    const double e = std::exp(-b * dt);
    const double c = 2.0 * b / (s2 * -std::expm1(-b * dt));
    const double q = 2.0 * b * mu / s2 - 1.0;
    const double u = c * x0 * e;
    const double v = c * x1;
    return std::log(c) - u - v + 0.5 * q * (std::log(v) - std::log(u)) +
           log_bessel_i(q, 2.0 * std::sqrt(u * v));
  }
  if (id == "gbm") {
    if (!(x0 > 0.0)) throw std::invalid_argument("gbm: x0 must be > 0");
    if (!(x1 > 0.0)) return -INFINITY;
    const double mu = theta[0], s = theta[1];
    const double m = std::log(x0) + (mu - 0.5 * s * s) * dt;
    const double sd = s * std::sqrt(dt);
    const double z = (std::log(x1) - m) / sd;
    return -0.5 * kLog2Pi - std::log(sd) - std::log(x1) - 0.5 * z * z;
  }
  const auto mom = exact_transition_moments(id, theta, x0, dt);
  const double z = x1 - mom.mean;
  return -0.5 * kLog2Pi - 0.5 * std::log(mom.variance) - 0.5 * z * z / mom.variance;
}

double exact_transition_density(std::string_view id, std::span<const double> theta,
                                std::span<const double> x0, std::span<const double> x1, double dt) {
  return std::exp(exact_transition_logdensity(id, theta, x0, x1, dt));
}

TransitionMoments exact_transition_moments(std::string_view id, std::span<const double> theta,
                                           double x0, double dt) {
  if (!has_exact_transition(id)) {
    throw UnsupportedModel("model '" + std::string(id) + "' has no closed-form moments");
  }
  make_model(id).check_parameters(theta);
  if (id == "cir") {
    const double b = theta[0], mu = theta[1], s2 = theta[2] * theta[2];
    const double e = std::exp(-b * dt);
    const double om = -std::expm1(-b * dt);
    return {x0 * e + mu * om, x0 * s2 / b * e * om + mu * s2 / (2.0 * b) * om * om};
  }
  if (id == "gbm") {
    const double mu = theta[0], s2 = theta[1] * theta[1];
    const double mean = x0 * std::exp(mu * dt);
    return {mean, mean * mean * std::expm1(s2 * dt)};
  }
  if (id == "bm") return {x0, theta[0] * dt};
  const double g = theta[0], ps = theta[1], s2 = theta[2] * theta[2];
  return {ps + (x0 - ps) * std::exp(-g * dt), s2 / (2.0 * g) * -std::expm1(-2.0 * g * dt)};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Euler-Maruyama stepper over compiled drift and diffusion polynomials.
class EulerStepper {
 public:
  explicit EulerStepper(const ModelInstance& inst)
      : m_(inst.model.dim()),
        positive_(inst.model.positive_state()),
        sig_(m_ * m_),
        drift_(m_),
        z_(m_),
        root_(m_ * m_),
        cov_(m_ * m_) {
    for (const auto& p : inst.drift) mu_.emplace_back(p);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) sig_[i * m_ + j] = CompiledPolynomial(inst.diffusion[i][j]);
    }
  }

  void advance(std::vector<double>& x, double gap, int substeps, std::mt19937_64& rng) {
    const double h = gap / substeps;
    const double sh = std::sqrt(h);
    for (int s = 0; s < substeps; ++s) {
      for (std::size_t i = 0; i < m_; ++i) drift_[i] = mu_[i].empty() ? 0.0 : mu_[i](x);
      matrix_root(x);
      for (std::size_t i = 0; i < m_; ++i) z_[i] = normal_(rng);
      for (std::size_t i = 0; i < m_; ++i) {
        double noise = 0.0;
        for (std::size_t j = 0; j < m_; ++j) noise += root_[i * m_ + j] * z_[j];
        x[i] += drift_[i] * h + noise * sh;
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (positive_[i]) x[i] = std::abs(x[i]);
      }
    }
  }

 private:
  // Square root of the diffusion matrix with negative parts clamped:
  // lower Cholesky for m <= 2, symmetric eigen root otherwise.
  void matrix_root(const std::vector<double>& x) {
    for (std::size_t k = 0; k < m_ * m_; ++k) cov_[k] = sig_[k].empty() ? 0.0 : sig_[k](x);
    if (m_ == 1) {
      root_[0] = std::sqrt(std::max(cov_[0], 0.0));
    } else if (m_ == 2) {
      const double l11 = std::sqrt(std::max(cov_[0], 0.0));
      const double l21 = l11 > 0.0 ? cov_[2] / l11 : 0.0;
      root_ = {l11, 0.0, l21, std::sqrt(std::max(cov_[3] - l21 * l21, 0.0))};
    } else {
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          a(cov_.data(), m_, m_);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
      const Eigen::MatrixXd r =
          es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = 0; j < m_; ++j) root_[i * m_ + j] = r(i, j);
    }
  }

  std::size_t m_;
  std::vector<bool> positive_;
  std::vector<CompiledPolynomial> mu_;
  std::vector<CompiledPolynomial> sig_;
  std::vector<double> drift_, z_, root_, cov_;
  std::normal_distribution<double> normal_;
};

}  // namespace

TimeSeries simulate_path(const ModelInstance& inst, std::span<const double> x0,
                         std::span<const double> times, int substeps, std::uint64_t seed) {
  const std::size_t m = inst.model.dim();
  if (substeps < 1) throw std::invalid_argument("simulate_path: substeps must be >= 1");
  require_size(x0, m, "simulate_path x0");
  if (times.empty()) throw std::invalid_argument("simulate_path: no observation times");

  EulerStepper stepper(inst);
  std::mt19937_64 rng(seed);
  std::vector<double> x(x0.begin(), x0.end());
  TimeSeries ts;
  ts.dim = m;
  ts.push_back(times[0], x);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double gap = times[k] - times[k - 1];
    if (!(gap > 0.0)) throw std::invalid_argument("simulate_path: times must be strictly increasing");
    stepper.advance(x, gap, substeps, rng);
    ts.push_back(times[k], x);
  }
  return ts;
}

std::vector<double> sample_transitions(const ModelInstance& inst, std::span<const double> x0,
                                       double dt, std::size_t count, int substeps,
                                       std::uint64_t seed) {
  const std::size_t m = inst.model.dim();
  if (substeps < 1) throw std::invalid_argument("sample_transitions: substeps must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("sample_transitions: dt must be > 0");
  require_size(x0, m, "sample_transitions x0");
  EulerStepper stepper(inst);
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(count * m);
  std::vector<double> x(m);
  for (std::size_t n = 0; n < count; ++n) {
    x.assign(x0.begin(), x0.end());
    stepper.advance(x, dt, substeps, rng);
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

TimeSeries simulate_series(const ModelInstance& inst, std::span<const double> x0, double dt,
                           std::size_t length, int substeps, std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_series: dt must be > 0");
  std::vector<double> times(length);
  for (std::size_t k = 0; k < length; ++k) times[k] = static_cast<double>(k) * dt;
  return simulate_path(inst, x0, times, substeps, seed);
}

TimeSeries simulate_cir_exact(std::span<const double> theta, double x0,
                              std::span<const double> times, std::uint64_t seed) {
  make_model("cir").check_parameters(theta);
  if (times.empty()) throw std::invalid_argument("simulate_cir_exact: no observation times");
  const double b = theta[0], mu = theta[1], s2 = theta[2] * theta[2];
  const double d = 4.0 * b * mu / s2;
  std::mt19937_64 rng(seed);
  TimeSeries ts;
  ts.dim = 1;
  double x = x0;
  ts.push_back(times[0], std::span<const double>(&x, 1));
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (!(dt > 0.0)) {
      throw std::invalid_argument("simulate_cir_exact: times must be strictly increasing");
    }
    const double c = 2.0 * b / (s2 * -std::expm1(-b * dt));
    const double lambda = 2.0 * c * x * std::exp(-b * dt);
    std::poisson_distribution<long> pois(0.5 * lambda);
    const long n = lambda > 0.0 ? pois(rng) : 0;
    std::gamma_distribution<double> gam(0.5 * d + static_cast<double>(n), 2.0);
    x = gam(rng) / (2.0 * c);
    ts.push_back(times[k], std::span<const double>(&x, 1));
  }
  return ts;
}

}  // namespace saddlefit
