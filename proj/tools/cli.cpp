#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "saddlefit/evalstats.hpp"
#include "saddlefit/likelihood.hpp"
#include "saddlefit/mcmc.hpp"
#include "saddlefit/models.hpp"
#include "saddlefit/timeseries.hpp"

namespace saddlefit::cli {

namespace {

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

[[noreturn]] void usage(const std::string& what) { throw Failure(kUsage, what); }

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
      usage(flag + ": cannot parse '" + cell + "' as a number");
    }
    out.push_back(v);
  }
  if (out.empty()) usage(flag + ": expected a comma-separated list of numbers");
  return out;
}

DiffusionModel load_model(const std::string& id) {
  try {
    return make_model(id);
  } catch (const UnknownModel& e) {
    std::string known;
    for (const auto& m : model_ids()) known += (known.empty() ? "" : ", ") + m;
    usage(std::string(e.what()) + " (known: " + known + ")");
  }
}

int resolve_order(const DiffusionModel& model, int order) {
  if (order == 0) return model.default_order();
  if (order < kMinTruncationOrder || order > kMaxTruncationOrder) {
    usage("--order must be between " + std::to_string(kMinTruncationOrder) + " and " +
          std::to_string(kMaxTruncationOrder));
  }
  return order;
}

std::vector<double> model_theta(const DiffusionModel& model, const std::string& text,
                                const std::string& flag) {
  if (text.empty()) {
    std::string names;
    for (const auto& n : model.param_names()) names += (names.empty() ? "" : ",") + n;
    usage(flag + " is required (" + names + ")");
  }
  auto theta = parse_list(text, flag);
  try {
    model.check_parameters(theta);
  } catch (const ParameterError& e) {
    usage(flag + ": " + e.what());
  }
  return theta;
}

std::vector<double> state_vector(const DiffusionModel& model, const std::string& text,
                                 const std::string& flag) {
  if (text.empty()) usage(flag + " is required");
  auto x = parse_list(text, flag);
  if (x.size() != model.dim()) {
    usage(flag + ": expected " + std::to_string(model.dim()) + " values for model " + model.id());
  }
  return x;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw Failure(kFailure, "cannot write '" + path + "'");
  return file;
}

// Expands `--config FILE` into flags for keys not already given on the
// command line. FILE holds `key = value` lines; '#' and ';' start comments.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) usage("--config requires a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream in(path);
  if (!in) usage("cannot open config file '" + path + "'");
  auto given = [&](const std::string& key) {
    for (const auto& a : rest) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  // Subcommand must stay in position 1 so the injected flags bind to it.
  std::vector<std::string> out(rest.begin(), rest.begin() + std::min<std::size_t>(2, rest.size()));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find_first_of("#;")));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      usage(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (given(key)) continue;
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key + "=" + value);
    }
  }
  out.insert(out.end(), rest.begin() + std::min<std::size_t>(2, rest.size()), rest.end());
  return out;
}

struct Options {
  std::string model;
  std::string theta, theta0, x0, at;
  int order = 0;
  double rel_tol = 1e-8, abs_tol = 1e-10;
  std::uint64_t seed = 1;
  unsigned jobs = 1;

  // simulate
  double dt = 0.0;
  std::size_t length = 0;
  int substeps = 10;
  bool exact = false;
  std::string out_path;

  // density
  double from = NAN, to = NAN;
  std::size_t points = 201;

  // fit
  std::string data;
  std::size_t chain_length = 20000;
  std::size_t burn_in = 10000;
  double level = 0.9;
  std::string step_sds;
  std::string chain_out, summary_out;
  std::size_t chains = 1;
  double vix_scale = 1.0;

  // coverage
  std::size_t replicates = 100;

  // compare
  std::string sweep_param, sweep_values, dt_values;
  double lo = NAN, hi = NAN;
};

LikelihoodConfig likelihood_config(const DiffusionModel& model, const Options& o) {
  LikelihoodConfig cfg;
  cfg.order = resolve_order(model, o.order);
  cfg.integrator.rel_tol = o.rel_tol;
  cfg.integrator.abs_tol = o.abs_tol;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    usage(e.what());
  }
  return cfg;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) usage("--level must be in (0, 1)");
}

int cmd_derive(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const int order = resolve_order(model, o.order);
  for (const auto& line : model.system(order)->render()) out << line << '\n';
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const auto theta = model_theta(model, o.theta, "--theta");
  const auto x0 = state_vector(model, o.x0, "--x0");
  if (!(o.dt > 0.0)) usage("--dt must be > 0");
  if (o.length < 2) usage("--length must be >= 2");
  if (o.substeps < 1) usage("--substeps must be >= 1");
  TimeSeries ts;
  if (o.exact) {
    if (model.id() != "cir") usage("--exact is only available for cir");
    std::vector<double> times(o.length);
    for (std::size_t k = 0; k < o.length; ++k) times[k] = static_cast<double>(k) * o.dt;
    ts = simulate_cir_exact(theta, x0[0], times, o.seed);
  } else {
    ts = simulate_series(build(model, theta), x0, o.dt, o.length, o.substeps, o.seed);
  }
  std::ofstream file;
  write_timeseries_csv(open_output(o.out_path, file, out), ts);
  return kOk;
}

int cmd_density(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const auto theta = model_theta(model, o.theta, "--theta");
  const auto x0 = state_vector(model, o.x0, "--x0");
  if (!(o.dt > 0.0)) usage("--dt must be > 0");
  const auto cfg = likelihood_config(model, o);
  LikelihoodConfig gauss = cfg;
  gauss.order = 2;
  const auto slots = model.slot_values(theta);
  const auto bound = model.system(cfg.order)->bind(slots);
  const auto bound2 = model.system(2)->bind(slots);
  const bool exact = has_exact_transition(model.id());

  std::vector<std::vector<double>> pts;
  if (!o.at.empty()) {
    pts.push_back(state_vector(model, o.at, "--at"));
  } else {
    if (model.dim() != 1) usage("--from/--to grids need a univariate model; use --at");
    if (!(o.from < o.to)) usage("--from and --to are required with --from < --to");
    if (o.points < 2) usage("--points must be >= 2");
    for (std::size_t k = 0; k < o.points; ++k) {
      pts.push_back({o.from + (o.to - o.from) * static_cast<double>(k) /
                                  static_cast<double>(o.points - 1)});
    }
  }

  std::ofstream file;
  std::ostream& os = open_output(o.out_path, file, out);
  for (std::size_t i = 0; i < model.dim(); ++i) os << (i ? "," : "") << "x" << i + 1;
  os << ",saddle,gaussian" << (exact ? ",exact" : "") << '\n';
  for (const auto& x : pts) {
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << csv_number(x[i]);
    os << ',' << csv_number(std::exp(transition_logdensity(bound, x0, x, o.dt, cfg))) << ','
       << csv_number(std::exp(transition_logdensity(bound2, x0, x, o.dt, gauss)));
    if (exact) os << ',' << csv_number(exact_transition_density(model.id(), theta, x0, x, o.dt));
    os << '\n';
  }
  return kOk;
}

TimeSeries load_series(const DiffusionModel& model, const Options& o) {
  if (o.data.empty()) usage("--data is required");
  TimeSeries ts;
  try {
    ts = read_timeseries_csv_file(o.data);
  } catch (const CsvError& e) {
    throw Failure(kBadData, o.data + ": " + e.what());
  }
  if (ts.dim != model.dim()) {
    throw Failure(kBadData, o.data + ": expected " + std::to_string(model.dim()) +
                                " state columns for model " + model.id() + ", got " +
                                std::to_string(ts.dim));
  }
  if (ts.size() < 2) {
    throw Failure(kBadData, o.data + ": need at least two observations, got " +
                                std::to_string(ts.size()));
  }
  if (o.vix_scale != 1.0) {
    if (model.id() != "heston") usage("--vix-scale applies to the heston model only");
    if (!(o.vix_scale > 0.0)) usage("--vix-scale must be > 0");
    for (std::size_t k = 0; k < ts.size(); ++k) ts.row(k)[1] *= o.vix_scale;
  }
  return ts;
}

std::string chain_path(const std::string& base, std::size_t index, std::size_t count) {
  if (count == 1) return base;
  const auto dot = base.find_last_of('.');
  const auto slash = base.find_last_of('/');
  const std::string tag = "_chain" + std::to_string(index + 1);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + tag;
  return base.substr(0, dot) + tag + base.substr(dot);
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = load_model(o.model);
  const auto cfg = likelihood_config(model, o);
  const auto theta0 = model_theta(model, o.theta0, "--theta0");
  check_level(o.level);
  if (o.chain_length < 1) usage("--chain-length must be >= 1");
  if (o.burn_in >= o.chain_length) usage("--burn-in must be smaller than --chain-length");
  if (o.chains < 1) usage("--chains must be >= 1");
  const TimeSeries ts = load_series(model, o);

  ProposalConfig proposal = default_proposal(model, theta0);
  if (!o.step_sds.empty()) proposal.step_sds = parse_list(o.step_sds, "--step-sds");
  try {
    proposal.validate(theta0.size());
  } catch (const std::invalid_argument& e) {
    usage(std::string("--step-sds: ") + e.what());
  }

  auto ll = [&](std::span<const double> th) { return loglik(model, ts, th, cfg); };
  const double ll0 = ll(theta0);
  if (!std::isfinite(ll0)) {
    throw Failure(kBadStart, "log-likelihood at --theta0 is not finite; choose another start");
  }

  std::vector<Chain> chains(o.chains);
  std::vector<std::string> errors(o.chains);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t c; (c = next.fetch_add(1)) < o.chains;) {
      try {
        chains[c] = run_chain(ll, theta0, proposal, o.chain_length,
                              o.chains == 1 ? o.seed : derive_seed(o.seed, c));
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, o.chains));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw Failure(kFailure, "chain failed: " + e);
  }

  const auto names = model.param_names();
  if (!o.chain_out.empty()) {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      std::ofstream f(chain_path(o.chain_out, c, chains.size()));
      if (!f) throw Failure(kFailure, "cannot write '" + o.chain_out + "'");
      write_chain_csv(f, chains[c], names);
    }
  }

  // Pool post-burn-in draws across chains.
  Chain pooled;
  pooled.seed = o.seed;
  std::size_t accepted = 0, moves = 0;
  for (const auto& ch : chains) {
    for (std::size_t k = o.burn_in; k < ch.length(); ++k) {
      pooled.samples.push_back(ch.samples[k]);
      pooled.accepted.push_back(ch.accepted[k]);
      pooled.loglik_trace.push_back(ch.loglik_trace[k]);
    }
    for (std::size_t k = 1; k < ch.length(); ++k) accepted += ch.accepted[k] ? 1 : 0;
    moves += ch.length() - 1;
  }
  PosteriorSummary s = summarize(pooled, 0, 1.0 - o.level);
  s.acceptance_rate = moves ? static_cast<double>(accepted) / static_cast<double>(moves) : 0.0;

  out << "model " << model.id() << ", order " << cfg.order << ", " << ts.size()
      << " observations, " << chains.size() << " chain(s) of " << o.chain_length
      << ", burn-in " << o.burn_in << '\n';
  out << "log-likelihood at theta0: " << ll0 << '\n';
  out << std::left << std::setw(10) << "parameter" << std::right << std::setw(14) << "median"
      << std::setw(14) << "ci_lo" << std::setw(14) << "ci_hi" << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << std::left << std::setw(10) << names[j] << std::right << std::setprecision(6)
        << std::setw(14) << s.medians[j] << std::setw(14) << s.ci_lo[j] << std::setw(14)
        << s.ci_hi[j] << '\n';
  }
  out << "acceptance rate: " << std::setprecision(3) << s.acceptance_rate << '\n';

  if (!o.summary_out.empty()) {
    std::ofstream f(o.summary_out);
    if (!f) throw Failure(kFailure, "cannot write '" + o.summary_out + "'");
    f << "parameter,median,ci_lo,ci_hi,level,acceptance_rate\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
      f << names[j] << ',' << csv_number(s.medians[j]) << ',' << csv_number(s.ci_lo[j]) << ','
        << csv_number(s.ci_hi[j]) << ',' << csv_number(o.level) << ','
        << csv_number(s.acceptance_rate) << '\n';
    }
  }
  if (s.acceptance_rate == 0.0) err << "warning: no proposals were accepted\n";
  return kOk;
}

int cmd_coverage(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = load_model(o.model);
  CoverageConfig cfg;
  cfg.theta_true = model_theta(model, o.theta, "--theta");
  cfg.x0 = state_vector(model, o.x0, "--x0");
  if (!(o.dt > 0.0)) usage("--dt must be > 0");
  if (o.length < 2) usage("--length must be >= 2");
  if (o.replicates < 1) usage("--replicates must be >= 1");
  if (o.burn_in >= o.chain_length) usage("--burn-in must be smaller than --chain-length");
  if (o.exact && model.id() != "cir") usage("--exact is only available for cir");
  check_level(o.level);
  cfg.replicates = o.replicates;
  cfg.series_length = o.length;
  cfg.dt = o.dt;
  cfg.substeps = o.substeps;
  cfg.exact_cir_sampler = o.exact;
  cfg.chain_length = o.chain_length;
  cfg.burn_in = o.burn_in;
  cfg.level = o.level;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.likelihood = likelihood_config(model, o);
  if (!o.step_sds.empty()) {
    ProposalConfig p = default_proposal(model, cfg.theta_true);
    p.step_sds = parse_list(o.step_sds, "--step-sds");
    cfg.proposal = p;
  }
  const auto report = coverage_study(model, cfg);
  out << format_coverage_table(report);
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    const auto& r = report.outcomes[i];
    if (r.failed) err << "replicate " << i + 1 << " (seed " << r.seed << ") failed: " << r.error << '\n';
  }
  if (!o.out_path.empty()) {
    std::ofstream f(o.out_path);
    if (!f) throw Failure(kFailure, "cannot write '" + o.out_path + "'");
    write_coverage_csv(f, report);
  }
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const auto model = load_model(o.model);
  if (!has_exact_transition(model.id())) {
    usage("compare needs a model with a closed-form transition density (cir, gbm, bm, ou)");
  }
  const auto theta = model_theta(model, o.theta, "--theta");
  const auto x0 = state_vector(model, o.x0, "--x0");
  if (!(o.dt > 0.0)) usage("--dt must be > 0");
  const auto cfg = likelihood_config(model, o);
  LikelihoodConfig gauss = cfg;
  gauss.order = 2;
  const bool positive = model.positive_state()[0];

  auto bounds = [&](std::span<const double> th, double dt) {
    const auto mom = exact_transition_moments(model.id(), th, x0[0], dt);
    const double sd = std::sqrt(mom.variance);
    double a = std::isnan(o.lo) ? mom.mean - 12.0 * sd : o.lo;
    const double b = std::isnan(o.hi) ? mom.mean + 12.0 * sd : o.hi;
    if (positive) a = std::max(a, 0.0);
    if (!(a < b)) usage("--lo must be smaller than --hi");
    return std::pair{a, b};
  };

  std::ofstream file;
  std::ostream& os = open_output(o.out_path, file, out);
  os << "sweep,parameter,value,dt,ie_saddle,ie_gaussian\n";
  auto row = [&](const std::string& sweep, const std::string& name, double value,
                 std::span<const double> th, double dt) {
    const auto slots = model.slot_values(th);
    const auto bn = model.system(cfg.order)->bind(slots);
    const auto b2 = model.system(2)->bind(slots);
    auto exact = [&](double x) {
      return std::exp(exact_transition_logdensity(model.id(), th, x0, std::span<const double>(&x, 1), dt));
    };
    auto sp = [&](double x) {
      return std::exp(transition_logdensity(bn, x0, std::span<const double>(&x, 1), dt, cfg));
    };
    auto gs = [&](double x) {
      return std::exp(transition_logdensity(b2, x0, std::span<const double>(&x, 1), dt, gauss));
    };
    const auto [a, b] = bounds(th, dt);
    os << sweep << ',' << name << ',' << (std::isnan(value) ? "" : csv_number(value)) << ','
       << csv_number(dt) << ','
       << csv_number(integrated_error(exact, sp, a, b)) << ','
       << csv_number(integrated_error(exact, gs, a, b)) << '\n';
  };

  row("base", "", NAN, theta, o.dt);
  {
    const auto [a, b] = bounds(theta, o.dt);
    auto exact = [&](double x) {
      return exact_transition_density(model.id(), theta, x0, std::span<const double>(&x, 1), o.dt);
    };
    const double self = integrated_error(exact, exact, a, b);
    os << "self,,," << csv_number(o.dt) << ',' << csv_number(self) << ',' << csv_number(self) << '\n';
  }
  if (!o.sweep_param.empty() || !o.sweep_values.empty()) {
    const auto names = model.param_names();
    const auto it = std::find(names.begin(), names.end(), o.sweep_param);
    if (it == names.end()) usage("--sweep-param must name a parameter of " + model.id());
    const auto idx = static_cast<std::size_t>(it - names.begin());
    if (o.sweep_values.empty()) usage("--sweep-values is required with --sweep-param");
    for (double v : parse_list(o.sweep_values, "--sweep-values")) {
      auto th = theta;
      th[idx] = v;
      try {
        model.check_parameters(th);
      } catch (const ParameterError& e) {
        usage(std::string("--sweep-values: ") + e.what());
      }
      row("param", o.sweep_param, v, th, o.dt);
    }
  }
  if (!o.dt_values.empty()) {
    for (double dt : parse_list(o.dt_values, "--dt-values")) {
      if (!(dt > 0.0)) usage("--dt-values must be > 0");
      row("dt", "dt", dt, theta, dt);
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Saddlepoint likelihoods and MCMC for polynomial diffusions", "saddlefit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto add_model = [&](CLI::App* sc) {
    sc->add_option("--model", o.model, "Model id: cir, gbm, bm, ou, biv, heston")->required();
  };
  auto add_order = [&](CLI::App* sc) {
    sc->add_option("--order", o.order, "Cumulant truncation order (default 4 if 1-d, else 3)");
  };
  auto add_tols = [&](CLI::App* sc) {
    sc->add_option("--rel-tol", o.rel_tol, "ODE relative tolerance")->capture_default_str();
    sc->add_option("--abs-tol", o.abs_tol, "ODE absolute tolerance")->capture_default_str();
  };
  auto add_common_sim = [&](CLI::App* sc) {
    sc->add_option("--theta", o.theta, "Parameter vector, comma separated");
    sc->add_option("--x0", o.x0, "Initial state, comma separated");
    sc->add_option("--dt", o.dt, "Observation spacing");
  };

  auto* derive = app.add_subcommand("derive", "Print the truncated cumulant ODE system");
  add_model(derive);
  add_order(derive);

  auto* simulate = app.add_subcommand("simulate", "Simulate a time series (CSV t,x1[,x2])");
  add_model(simulate);
  add_common_sim(simulate);
  simulate->add_option("--length", o.length, "Number of observations");
  simulate->add_option("--substeps", o.substeps, "Euler steps per observation gap")
      ->capture_default_str();
  simulate->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  simulate->add_flag("--exact", o.exact, "Exact sampler (cir only)");
  simulate->add_option("--out", o.out_path, "Output file (default stdout)");

  auto* density = app.add_subcommand("density", "Evaluate transition densities");
  add_model(density);
  add_common_sim(density);
  add_order(density);
  add_tols(density);
  density->add_option("--from", o.from, "Grid start (univariate)");
  density->add_option("--to", o.to, "Grid end (univariate)");
  density->add_option("--points", o.points, "Grid size")->capture_default_str();
  density->add_option("--at", o.at, "Single evaluation point, comma separated");
  density->add_option("--out", o.out_path, "Output file (default stdout)");

  auto* fit = app.add_subcommand("fit", "Metropolis sampling of the posterior");
  add_model(fit);
  add_order(fit);
  add_tols(fit);
  fit->add_option("--data", o.data, "Time-series CSV");
  fit->add_option("--theta0", o.theta0, "Starting parameter vector");
  fit->add_option("--chain-length", o.chain_length)->capture_default_str();
  fit->add_option("--burn-in", o.burn_in)->capture_default_str();
  fit->add_option("--level", o.level, "Credible level")->capture_default_str();
  fit->add_option("--seed", o.seed)->capture_default_str();
  fit->add_option("--jobs", o.jobs, "Worker threads for multiple chains")->capture_default_str();
  fit->add_option("--chains", o.chains, "Independent chains, pooled in the summary")
      ->capture_default_str();
  fit->add_option("--step-sds", o.step_sds, "Proposal standard deviations");
  fit->add_option("--chain-out", o.chain_out, "Chain dump CSV");
  fit->add_option("--summary-out", o.summary_out, "Posterior summary CSV");
  fit->add_option("--vix-scale", o.vix_scale, "Multiplier for the heston variance column")
      ->capture_default_str();

  auto* coverage = app.add_subcommand("coverage", "Credible-interval coverage study");
  add_model(coverage);
  add_common_sim(coverage);
  add_order(coverage);
  add_tols(coverage);
  coverage->add_option("--length", o.length, "Observations per series");
  coverage->add_option("--replicates", o.replicates)->capture_default_str();
  coverage->add_option("--substeps", o.substeps)->capture_default_str();
  coverage->add_flag("--exact", o.exact, "Exact simulation (cir only)");
  coverage->add_option("--chain-length", o.chain_length)->capture_default_str();
  coverage->add_option("--burn-in", o.burn_in)->capture_default_str();
  coverage->add_option("--level", o.level)->capture_default_str();
  coverage->add_option("--seed", o.seed)->capture_default_str();
  coverage->add_option("--jobs", o.jobs)->capture_default_str();
  coverage->add_option("--step-sds", o.step_sds, "Proposal standard deviations");
  coverage->add_option("--out", o.out_path, "Coverage CSV");

  auto* compare = app.add_subcommand("compare", "Integrated error against the exact density");
  add_model(compare);
  add_common_sim(compare);
  add_order(compare);
  add_tols(compare);
  compare->add_option("--sweep-param", o.sweep_param, "Parameter to vary");
  compare->add_option("--sweep-values", o.sweep_values, "Values for --sweep-param");
  compare->add_option("--dt-values", o.dt_values, "Observation spacings to sweep");
  compare->add_option("--lo", o.lo, "Integration lower limit");
  compare->add_option("--hi", o.hi, "Integration upper limit");
  compare->add_option("--out", o.out_path, "Output file (default stdout)");

  try {
    auto args = expand_config(raw_args);
    if (args.empty()) args.emplace_back("saddlefit");
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }

    if (*derive) return cmd_derive(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*density) return cmd_density(o, out);
    if (*fit) return cmd_fit(o, out, err);
    if (*coverage) return cmd_coverage(o, out, err);
    if (*compare) return cmd_compare(o, out);
    return kUsage;
  } catch (const Failure& f) {
    err << "error: " << f.what() << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace saddlefit::cli
