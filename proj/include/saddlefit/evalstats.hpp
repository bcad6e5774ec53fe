#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "saddlefit/likelihood.hpp"
#include "saddlefit/mcmc.hpp"
#include "saddlefit/models.hpp"

namespace saddlefit {

using DensityFn = std::function<double(double)>;

/// Integral of |f_true - f_hat| over [lo, hi] (infinite limits allowed).
double integrated_error(const DensityFn& f_true, const DensityFn& f_hat, double lo, double hi,
                        double epsrel = 1e-8);

/// integrated_error(A) / integrated_error(B); throws std::domain_error when
/// the denominator is zero.
double error_ratio(const DensityFn& f_true, const DensityFn& approx_a, const DensityFn& approx_b,
                   double lo, double hi, double epsrel = 1e-8);

struct CoverageConfig {
  std::vector<double> theta_true;
  std::size_t replicates = 1;
  std::size_t series_length = 40;
  std::vector<double> x0;
  double dt = 1.0;
  int substeps = 10;
  bool exact_cir_sampler = false;  // cir only
  std::size_t chain_length = 20000;
  std::size_t burn_in = 10000;
  double level = 0.9;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  LikelihoodConfig likelihood;
  std::optional<ProposalConfig> proposal;  // default: default_proposal(model, theta_true)
};

/// Builds the log-likelihood for one simulated series; the default is the
/// saddlepoint loglik with `CoverageConfig::likelihood`.
using LikelihoodFactory = std::function<LogDensityFn(const TimeSeries&)>;

struct ReplicateOutcome {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<bool> hit;
  PosteriorSummary summary;
};

struct CoverageReport {
  std::vector<std::string> param_names;
  std::vector<std::size_t> hits;
  std::size_t replicates = 0;  // successful replicates
  std::size_t failed = 0;
  double level = 0.9;
  std::vector<ReplicateOutcome> outcomes;

  double coverage(std::size_t j) const;
  double mean_acceptance() const;
};

CoverageReport coverage_study(const DiffusionModel& model, const CoverageConfig& cfg,
                              const LikelihoodFactory& factory = {});

/// Columns: parameter, hits, replicates, coverage.
void write_coverage_csv(std::ostream& os, const CoverageReport& report);
std::string format_coverage_table(const CoverageReport& report);

}  // namespace saddlefit
