#include "saddlefit/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "saddlefit/timeseries.hpp"

namespace saddlefit {

void ProposalConfig::validate(std::size_t p) const {
  if (step_sds.size() != p) throw std::invalid_argument("ProposalConfig: step_sds length mismatch");
  for (double s : step_sds) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("ProposalConfig: step sizes must be positive");
    }
  }
  if (!constraints.empty() && constraints.size() != p) {
    throw std::invalid_argument("ProposalConfig: constraints length mismatch");
  }
  if (max_redraws == 0) throw std::invalid_argument("ProposalConfig: max_redraws must be >= 1");
}

std::vector<double> default_step_sds(std::span<const double> theta0) {
  std::vector<double> out;
  for (double v : theta0) out.push_back(std::max(0.05 * std::abs(v), 1e-4));
  return out;
}

ProposalConfig default_proposal(const DiffusionModel& model, std::span<const double> theta0) {
  ProposalConfig cfg;
  cfg.step_sds = default_step_sds(theta0);
  for (const auto& p : model.params()) cfg.constraints.push_back(p.constraint);
  return cfg;
}

std::vector<double> propose(std::span<const double> theta_old, const ProposalConfig& cfg,
                            std::mt19937_64& rng) {
  cfg.validate(theta_old.size());
  std::normal_distribution<double> normal;
  std::vector<double> out(theta_old.size());
  for (std::size_t i = 0; i < theta_old.size(); ++i) {
    const Constraint c = cfg.constraints.empty() ? Constraint::kNone : cfg.constraints[i];
    std::size_t draws = 0;
    do {
      if (draws++ == cfg.max_redraws) {
        throw ProposalError("propose: no admissible draw for parameter " + std::to_string(i) +
                            " after " + std::to_string(cfg.max_redraws) +
                            " tries; step size is degenerate");
      }
      out[i] = theta_old[i] + cfg.step_sds[i] * normal(rng);
    } while (!satisfies(c, out[i]));
  }
  return out;
}

double accept_ratio(double loglik_new, double loglik_old, double logprior_new,
                    double logprior_old, double logq_fwd, double logq_rev) {
  if (loglik_new == -INFINITY || logprior_new == -INFINITY) return 0.0;
  const double s = (loglik_new - loglik_old) + (logprior_new - logprior_old) + (logq_rev - logq_fwd);
  if (std::isnan(s)) return 0.0;
  return s >= 0.0 ? 1.0 : std::exp(s);
}

Chain run_chain(const LogDensityFn& loglik, std::span<const double> theta0,
                const ProposalConfig& cfg, std::size_t length, std::uint64_t seed,
                const LogDensityFn& logprior) {
  if (length < 1) throw std::invalid_argument("run_chain: length must be >= 1");
  cfg.validate(theta0.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Chain chain;
  chain.seed = seed;
  chain.samples.reserve(length);
  chain.samples.emplace_back(theta0.begin(), theta0.end());
  chain.accepted.push_back(true);
  double ll = loglik(theta0);
  double lp = logprior ? logprior(theta0) : 0.0;
  chain.loglik_trace.push_back(ll);

  for (std::size_t k = 1; k < length; ++k) {
    const auto& cur = chain.samples.back();
    auto cand = propose(cur, cfg, rng);
    const double lp_new = logprior ? logprior(cand) : 0.0;
    const double ll_new = lp_new == -INFINITY ? -INFINITY : loglik(cand);
    const double a = ll == -INFINITY ? (ll_new > -INFINITY ? 1.0 : 0.0)
                                     : accept_ratio(ll_new, ll, lp_new, lp);
    const double u = unif(rng);
    if (u < a) {
      chain.samples.push_back(std::move(cand));
      chain.accepted.push_back(true);
      ll = ll_new;
      lp = lp_new;
    } else {
      chain.samples.push_back(cur);
      chain.accepted.push_back(false);
    }
    chain.loglik_trace.push_back(ll);
  }
  return chain;
}

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile: p must be in [0, 1]");
  const double n = static_cast<double>(sorted.size());
  const double rank = (n + 1.0) * p;
  if (rank <= 1.0) return sorted.front();
  if (rank >= n) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

PosteriorSummary summarize(const Chain& chain, std::size_t burn_in, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("summarize: alpha must be in (0, 1)");
  if (burn_in >= chain.length()) {
    throw std::invalid_argument("summarize: burn-in leaves no samples");
  }
  const std::size_t p = chain.num_params();
  PosteriorSummary s;
  s.level = 1.0 - alpha;
  std::vector<double> col;
  for (std::size_t j = 0; j < p; ++j) {
    col.clear();
    for (std::size_t k = burn_in; k < chain.length(); ++k) col.push_back(chain.samples[k][j]);
    std::sort(col.begin(), col.end());
    const double med = percentile(col, 0.5);
    s.medians.push_back(med);
    s.ci_lo.push_back(std::min(percentile(col, 0.5 * alpha), med));
    s.ci_hi.push_back(std::max(percentile(col, 1.0 - 0.5 * alpha), med));
  }
  std::size_t acc = 0;
  for (std::size_t k = 1; k < chain.length(); ++k) acc += chain.accepted[k] ? 1 : 0;
  s.acceptance_rate =
      chain.length() > 1 ? static_cast<double>(acc) / static_cast<double>(chain.length() - 1) : 0.0;
  return s;
}

void write_chain_csv(std::ostream& os, const Chain& chain, const std::vector<std::string>& names) {
  os << "step";
  for (std::size_t j = 0; j < chain.num_params(); ++j) {
    os << ',' << (j < names.size() ? names[j] : "theta" + std::to_string(j + 1));
  }
  os << ",loglik,accepted\n";
  for (std::size_t k = 0; k < chain.length(); ++k) {
    os << k;
    for (double v : chain.samples[k]) os << ',' << csv_number(v);
    os << ',' << csv_number(chain.loglik_trace[k]) << ',' << (chain.accepted[k] ? 1 : 0) << '\n';
  }
}

}  // namespace saddlefit
