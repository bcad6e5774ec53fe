#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "saddlefit/models.hpp"

namespace saddlefit {

struct ProposalConfig {
  std::vector<double> step_sds;
  std::vector<Constraint> constraints;  // empty: unconstrained
  std::size_t max_redraws = 10000;

  void validate(std::size_t p) const;
};

/// 5% of |theta0| per component, floored at 1e-4.
std::vector<double> default_step_sds(std::span<const double> theta0);
ProposalConfig default_proposal(const DiffusionModel& model, std::span<const double> theta0);

class ProposalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Componentwise normal random walk; a constrained component is redrawn
/// until it satisfies its constraint (ProposalError after max_redraws).
std::vector<double> propose(std::span<const double> theta_old, const ProposalConfig& cfg,
                            std::mt19937_64& rng);

/// min(1, exp(sum of log terms)); 0 when loglik_new is -inf.
double accept_ratio(double loglik_new, double loglik_old, double logprior_new = 0.0,
                    double logprior_old = 0.0, double logq_fwd = 0.0, double logq_rev = 0.0);

struct Chain {
  std::vector<std::vector<double>> samples;
  std::vector<bool> accepted;
  std::vector<double> loglik_trace;
  std::uint64_t seed = 0;

  std::size_t length() const { return samples.size(); }
  std::size_t num_params() const { return samples.empty() ? 0 : samples.front().size(); }
};

using LogDensityFn = std::function<double(std::span<const double>)>;

/// Random-walk Metropolis. samples[0] is theta0 (accepted[0] = true). The
/// proposal is treated as symmetric; `logprior` defaults to flat.
Chain run_chain(const LogDensityFn& loglik, std::span<const double> theta0,
                const ProposalConfig& cfg, std::size_t length, std::uint64_t seed,
                const LogDensityFn& logprior = {});

struct PosteriorSummary {
  std::vector<double> medians;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  double acceptance_rate = 0.0;
  double level = 0.9;
};

/// Percentile with rank (n + 1) p between order statistics, clamped to the
/// sample range. `sorted` must be ascending.
double percentile(std::span<const double> sorted, double p);

/// Medians and central (1 - alpha) intervals of samples[burn_in:]. The
/// acceptance rate counts moves after the initial state.
PosteriorSummary summarize(const Chain& chain, std::size_t burn_in, double alpha);

void write_chain_csv(std::ostream& os, const Chain& chain, const std::vector<std::string>& names);

}  // namespace saddlefit
