#include "saddlefit/evalstats.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "saddlefit/quadrature.hpp"
#include "saddlefit/timeseries.hpp"

namespace saddlefit {

double integrated_error(const DensityFn& f_true, const DensityFn& f_hat, double lo, double hi,
                        double epsrel) {
  if (!(lo < hi)) throw std::invalid_argument("integrated_error: empty interval");
  auto diff = [&](double x) { return std::abs(f_true(x) - f_hat(x)); };
  return integrate_adaptive(diff, lo, hi, 1e-13, epsrel).value;
}

double error_ratio(const DensityFn& f_true, const DensityFn& approx_a, const DensityFn& approx_b,
                   double lo, double hi, double epsrel) {
  const double den = integrated_error(f_true, approx_b, lo, hi, epsrel);
  if (den == 0.0) throw std::domain_error("error_ratio: reference approximation has zero error");
  return integrated_error(f_true, approx_a, lo, hi, epsrel) / den;
}

double CoverageReport::coverage(std::size_t j) const {
  return replicates ? static_cast<double>(hits.at(j)) / static_cast<double>(replicates) : 0.0;
}

double CoverageReport::mean_acceptance() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& o : outcomes) {
    if (o.failed) continue;
    s += o.summary.acceptance_rate;
    ++n;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

namespace {

ReplicateOutcome run_replicate(const DiffusionModel& model, const CoverageConfig& cfg,
                               const ProposalConfig& proposal, const LikelihoodFactory& factory,
                               std::uint64_t seed) {
  ReplicateOutcome out;
  out.seed = seed;
  try {
    TimeSeries ts;
    if (cfg.exact_cir_sampler) {
      std::vector<double> times(cfg.series_length);
      for (std::size_t k = 0; k < times.size(); ++k) times[k] = static_cast<double>(k) * cfg.dt;
      ts = simulate_cir_exact(cfg.theta_true, cfg.x0.at(0), times, seed);
    } else {
      ts = simulate_series(build(model, cfg.theta_true), cfg.x0, cfg.dt, cfg.series_length,
                           cfg.substeps, seed);
    }
    LogDensityFn ll;
    if (factory) {
      ll = factory(ts);
    } else {
      ll = [&model, ts, lc = cfg.likelihood](std::span<const double> th) {
        return loglik(model, ts, th, lc);
      };
    }
    if (!std::isfinite(ll(cfg.theta_true))) {
      throw std::runtime_error("non-finite likelihood at the starting value");
    }
    const Chain chain = run_chain(ll, cfg.theta_true, proposal, cfg.chain_length,
                                  derive_seed(seed, 0x6d636d63));
    out.summary = summarize(chain, cfg.burn_in, 1.0 - cfg.level);
    for (std::size_t j = 0; j < cfg.theta_true.size(); ++j) {
      out.hit.push_back(out.summary.ci_lo[j] <= cfg.theta_true[j] &&
                        cfg.theta_true[j] <= out.summary.ci_hi[j]);
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

CoverageReport coverage_study(const DiffusionModel& model, const CoverageConfig& cfg,
                              const LikelihoodFactory& factory) {
  if (cfg.replicates < 1) throw std::invalid_argument("coverage_study: replicates must be >= 1");
  if (cfg.series_length < 2) throw std::invalid_argument("coverage_study: series too short");
  if (cfg.burn_in >= cfg.chain_length) {
    throw std::invalid_argument("coverage_study: burn-in must be shorter than the chain");
  }
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw std::invalid_argument("coverage_study: level must be in (0, 1)");
  }
  if (cfg.exact_cir_sampler && model.id() != "cir") {
    throw std::invalid_argument("coverage_study: exact sampler is only available for cir");
  }
  model.check_parameters(cfg.theta_true);
  if (cfg.x0.size() != model.dim()) throw DimensionMismatch("coverage_study: x0 length mismatch");
  if (!factory) cfg.likelihood.validate();
  const ProposalConfig proposal = cfg.proposal ? *cfg.proposal : default_proposal(model, cfg.theta_true);
  proposal.validate(cfg.theta_true.size());

  CoverageReport report;
  report.param_names = model.param_names();
  report.level = cfg.level;
  report.outcomes.resize(cfg.replicates);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.replicates;) {
      report.outcomes[i] = run_replicate(model, cfg, proposal, factory, derive_seed(cfg.seed, i));
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, cfg.replicates));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.hits.assign(report.param_names.size(), 0);
  for (const auto& o : report.outcomes) {
    if (o.failed) {
      ++report.failed;
      continue;
    }
    ++report.replicates;
    for (std::size_t j = 0; j < o.hit.size(); ++j) report.hits[j] += o.hit[j] ? 1 : 0;
  }
  return report;
}

void write_coverage_csv(std::ostream& os, const CoverageReport& report) {
  os << "parameter,hits,replicates,coverage\n";
  for (std::size_t j = 0; j < report.param_names.size(); ++j) {
    os << report.param_names[j] << ',' << report.hits[j] << ',' << report.replicates << ','
       << csv_number(report.coverage(j)) << '\n';
  }
}

std::string format_coverage_table(const CoverageReport& report) {
  std::ostringstream os;
  os << "Observed coverage of " << std::setprecision(3) << 100.0 * report.level
     << "% credible intervals (" << report.replicates << " replicates";
  if (report.failed) os << ", " << report.failed << " failed";
  os << ")\n";
  os << std::left << std::setw(12) << "parameter" << std::right << std::setw(10) << "hits"
     << std::setw(12) << "coverage" << '\n';
  for (std::size_t j = 0; j < report.param_names.size(); ++j) {
    os << std::left << std::setw(12) << report.param_names[j] << std::right << std::setw(10)
       << report.hits[j] << std::setw(12) << std::fixed << std::setprecision(2)
       << report.coverage(j) << '\n';
    os.unsetf(std::ios::fixed);
  }
  os << "mean acceptance rate: " << std::fixed << std::setprecision(3) << report.mean_acceptance()
     << '\n';
  return os.str();
}

}  // namespace saddlefit
