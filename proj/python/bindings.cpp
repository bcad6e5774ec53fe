#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "saddlefit/evalstats.hpp"
#include "saddlefit/likelihood.hpp"
#include "saddlefit/mcmc.hpp"
#include "saddlefit/models.hpp"
#include "saddlefit/saddlepoint.hpp"

namespace py = pybind11;
using namespace saddlefit;

namespace {

TimeSeries to_series(const std::vector<double>& times, const std::vector<std::vector<double>>& x) {
  if (times.size() != x.size()) throw std::invalid_argument("times and values differ in length");
  TimeSeries ts;
  ts.dim = x.empty() ? 1 : x.front().size();
  for (std::size_t k = 0; k < times.size(); ++k) ts.push_back(times[k], x[k]);
  ts.validate();
  return ts;
}

std::vector<std::vector<double>> rows(const TimeSeries& ts) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < ts.size(); ++k) out.emplace_back(ts.row(k).begin(), ts.row(k).end());
  return out;
}

LikelihoodConfig config_for(const DiffusionModel& m, int order) {
  LikelihoodConfig cfg = default_likelihood_config(m);
  if (order) cfg.order = order;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_saddlefit, mod) {
  mod.doc() = "Saddlepoint transition densities and MCMC for polynomial diffusions";

  py::register_exception<UnknownModel>(mod, "UnknownModel", PyExc_ValueError);
  py::register_exception<ParameterError>(mod, "ParameterError", PyExc_ValueError);

  mod.def("model_ids", &model_ids);
  mod.def("param_names", [](const std::string& id) { return make_model(id).param_names(); });
  mod.def("default_order", [](const std::string& id) { return make_model(id).default_order(); });

  mod.def(
      "derive", [](const std::string& id, int order) {
        const auto m = make_model(id);
        return m.system(order ? order : m.default_order())->render();
      },
      py::arg("model"), py::arg("order") = 0, "Rendered cumulant ODE system, one line per equation.");

  mod.def(
      "drift", [](const std::string& id, const std::vector<double>& theta) {
        std::vector<std::string> out;
        for (const auto& p : build(id, theta).drift) out.push_back(p.to_string());
        return out;
      },
      py::arg("model"), py::arg("theta"));

  mod.def(
      "diffusion", [](const std::string& id, const std::vector<double>& theta) {
        std::vector<std::vector<std::string>> out;
        for (const auto& row : build(id, theta).diffusion) {
          out.emplace_back();
          for (const auto& p : row) out.back().push_back(p.to_string());
        }
        return out;
      },
      py::arg("model"), py::arg("theta"));

  mod.def(
      "cumulants",
      [](const std::string& id, const std::vector<double>& theta, const std::vector<double>& x0,
         double dt, int order) {
        const auto m = make_model(id);
        m.check_parameters(theta);
        const int n = order ? order : m.default_order();
        const auto k = integrate(*m.system(n), point_mass_initial(x0, m.dim(), n),
                                 m.slot_values(theta), dt);
        return std::vector<double>(k.values().begin(), k.values().end());
      },
      py::arg("model"), py::arg("theta"), py::arg("x0"), py::arg("dt"), py::arg("order") = 0,
      "Cumulants of X(dt) given X(0) = x0, in graded order.");

  mod.def(
      "transition_logdensity",
      [](const std::string& id, const std::vector<double>& theta, const std::vector<double>& x0,
         const std::vector<double>& x1, double dt, int order) {
        const auto m = make_model(id);
        m.check_parameters(theta);
        const auto cfg = config_for(m, order);
        return transition_logdensity(m, *m.system(cfg.order), x0, x1, dt, theta, cfg);
      },
      py::arg("model"), py::arg("theta"), py::arg("x0"), py::arg("x1"), py::arg("dt"),
      py::arg("order") = 0);

  mod.def(
      "exact_logdensity",
      [](const std::string& id, const std::vector<double>& theta, double x0, double x1, double dt) {
        return exact_transition_logdensity(id, theta, std::span<const double>(&x0, 1),
                                           std::span<const double>(&x1, 1), dt);
      },
      py::arg("model"), py::arg("theta"), py::arg("x0"), py::arg("x1"), py::arg("dt"));

  mod.def(
      "saddle_logdensity",
      [](std::size_t dim, int order, const std::vector<double>& kappa, const std::vector<double>& x) {
        return log_density(TruncatedCGF(CumulantSet(dim, order, kappa)), x);
      },
      py::arg("dim"), py::arg("order"), py::arg("cumulants"), py::arg("x"),
      "Saddlepoint log-density from a cumulant vector in graded order.");

  mod.def(
      "simulate",
      [](const std::string& id, const std::vector<double>& theta, const std::vector<double>& x0,
         double dt, std::size_t length, int substeps, std::uint64_t seed) {
        const auto ts = simulate_series(build(id, theta), x0, dt, length, substeps, seed);
        return py::make_tuple(ts.times, rows(ts));
      },
      py::arg("model"), py::arg("theta"), py::arg("x0"), py::arg("dt"), py::arg("length"),
      py::arg("substeps") = 10, py::arg("seed") = 1, "Returns (times, values).");

  mod.def(
      "loglik",
      [](const std::string& id, const std::vector<double>& times,
         const std::vector<std::vector<double>>& values, const std::vector<double>& theta,
         int order) {
        const auto m = make_model(id);
        return loglik(m, to_series(times, values), theta, config_for(m, order));
      },
      py::arg("model"), py::arg("times"), py::arg("values"), py::arg("theta"), py::arg("order") = 0);

  mod.def(
      "fit",
      [](const std::string& id, const std::vector<double>& times,
         const std::vector<std::vector<double>>& values, const std::vector<double>& theta0,
         std::size_t length, std::size_t burn_in, double level, std::uint64_t seed, int order) {
        const auto m = make_model(id);
        const auto ts = to_series(times, values);
        const auto cfg = config_for(m, order);
        Chain chain;
        {
          py::gil_scoped_release release;
          chain = run_chain([&](std::span<const double> th) { return loglik(m, ts, th, cfg); },
                            theta0, default_proposal(m, theta0), length, seed);
        }
        const auto s = summarize(chain, burn_in, 1.0 - level);
        py::dict out;
        out["samples"] = chain.samples;
        out["loglik"] = chain.loglik_trace;
        out["median"] = s.medians;
        out["ci_lo"] = s.ci_lo;
        out["ci_hi"] = s.ci_hi;
        out["acceptance_rate"] = s.acceptance_rate;
        return out;
      },
      py::arg("model"), py::arg("times"), py::arg("values"), py::arg("theta0"),
      py::arg("length") = 20000, py::arg("burn_in") = 10000, py::arg("level") = 0.9,
      py::arg("seed") = 1, py::arg("order") = 0);

  mod.def("integrated_error", &integrated_error, py::arg("f_true"), py::arg("f_hat"), py::arg("lo"),
          py::arg("hi"), py::arg("epsrel") = 1e-8);
}
