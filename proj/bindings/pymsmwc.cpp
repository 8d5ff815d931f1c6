#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msmwc/bounds.hpp"
#include "msmwc/checks.hpp"
#include "msmwc/cli_support.hpp"

namespace py = pybind11;

namespace {

msmwc::MsMwc make_simplex_learner(int dim, long horizon, double fixed_rate,
                                  double rate_cap) {
  msmwc::MsMwcConfig cfg;
  cfg.dim = dim;
  cfg.horizon = horizon;
  cfg.region = msmwc::SimplexRegion::truncated(
      dim, 1.0 / (static_cast<double>(dim) * static_cast<double>(horizon)));
  if (fixed_rate > 0) {
    cfg.rates = msmwc::RateSchedule::fixed_uniform(dim, fixed_rate);
  } else {
    cfg.rates = msmwc::RateSchedule::adaptive(rate_cap);
  }
  return msmwc::MsMwc(cfg);
}

std::string run_experiment(const std::string& config_json) {
  const nlohmann::json doc = nlohmann::json::parse(config_json);
  msmwc::ExperimentConfig cfg = msmwc::parse_experiment(doc);
  if (cfg.seeds.size() != 1) {
    throw std::invalid_argument("run_experiment drives a single seed");
  }
  msmwc::RunConfig rc = cfg.run;
  rc.env.seed = cfg.seeds.front();
  const msmwc::RunResult result = msmwc::run(rc);
  return msmwc::summary_json(cfg, cfg.seeds.front(), result).dump(2);
}

}  // namespace

PYBIND11_MODULE(_pymsmwc, m) {
  m.doc() = "multi-rate expert-advice learners: solver, divergences, and benchmark runs";

  m.def(
      "solve_step",
      [](const msmwc::Vec& anchor, const msmwc::Vec& cost, const msmwc::Vec& rates,
         const msmwc::Vec& lower_bounds) {
        msmwc::EntropySolveRequest req;
        const int d = static_cast<int>(anchor.size());
        req.region = msmwc::SimplexRegion::full(d);
        if (lower_bounds.size() == d) req.region.lower_bounds = lower_bounds;
        req.anchor = anchor;
        req.cost = cost;
        req.rates = rates;
        const msmwc::EntropySolveResult res = msmwc::solve(req);
        return res.weights;
      },
      py::arg("anchor"), py::arg("cost"), py::arg("rates"),
      py::arg("lower_bounds") = msmwc::Vec(),
      "Minimize <w, cost> plus the rate-weighted entropic divergence to anchor over the "
      "simplex with per-coordinate lower bounds.");

  m.def(
      "bregman",
      [](const msmwc::Vec& u, const msmwc::Vec& w, const msmwc::Vec& rates) {
        return msmwc::bregman(u, w, rates);
      },
      py::arg("u"), py::arg("w"), py::arg("rates"),
      "Rate-weighted entropic divergence between two nonnegative vectors.");

  m.def("f_kl", &msmwc::f_kl, py::arg("a"), py::arg("b"),
        "Scalar divergence a*ln(a/b) - a + b with the 0-argument conventions.");

  py::class_<msmwc::MsMwc>(m, "SimplexLearner",
                           "Two-step entropic learner on the truncated simplex.")
      .def(py::init(&make_simplex_learner), py::arg("dim"), py::arg("horizon"),
           py::arg("fixed_rate") = 0.0, py::arg("rate_cap") = 1.0 / 64.0)
      .def("begin_round",
           [](msmwc::MsMwc& a, const msmwc::Vec& hint) { return a.begin_round(hint); },
           py::arg("hint"))
      .def("end_round",
           [](msmwc::MsMwc& a, const msmwc::Vec& loss, const msmwc::Vec& target) {
             a.end_round(loss, target);
           },
           py::arg("loss"), py::arg("target"))
      .def_property_readonly("anchor", &msmwc::MsMwc::anchor)
      .def_property_readonly("rates", &msmwc::MsMwc::current_rates)
      .def_property_readonly("dim", &msmwc::MsMwc::dim);

  m.def("run_experiment", &run_experiment, py::arg("config_json"),
        "Parse a single-seed experiment config (JSON text) and return the summary JSON.");

  m.def(
      "self_check",
      [](const std::string& only) {
        std::vector<std::pair<std::string, bool>> out;
        for (const msmwc::CheckResult& r : msmwc::run_checks(only)) {
          out.emplace_back(r.name, r.pass);
        }
        return out;
      },
      py::arg("only") = std::string(),
      "Run the built-in property checks; returns (name, pass) pairs.");
}
