#include "msmwc/cli_support.hpp"

#include "msmwc/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;

namespace msmwc {

namespace {

void schema_fail(const std::string& what) { throw SchemaError(what); }

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) schema_fail(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.count(it.key()) == 0) {
      schema_fail(where + ": unknown key '" + it.key() + "'");
    }
  }
}

double take_number(const json& j, const std::string& key, double dflt,
                   const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) schema_fail(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

long take_integer(const json& j, const std::string& key, long dflt,
                  const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) schema_fail(where + "." + key + ": expected an integer");
  return j.at(key).get<long>();
}

bool take_bool(const json& j, const std::string& key, bool dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean()) schema_fail(where + "." + key + ": expected a boolean");
  return j.at(key).get<bool>();
}

std::string take_string(const json& j, const std::string& key, const std::string& dflt,
                        const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) schema_fail(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

Vec take_vec(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return Vec();
  const json& a = j.at(key);
  if (!a.is_array()) schema_fail(where + "." + key + ": expected a number array");
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) schema_fail(where + "." + key + ": expected a number array");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

EnvironmentSpec parse_environment(const json& j) {
  const std::string where = "environment";
  check_keys(j, {"kind", "d", "T", "seed", "gap", "i_star", "kappa", "mean_gap",
                 "partition", "segment_best", "segments", "drift_step", "ranges",
                 "scale", "subspace_rank", "base_scale", "jump_factor", "jump_round"},
             where);
  EnvironmentSpec s;
  s.kind = take_string(j, "kind", "", where);
  if (s.kind.empty()) schema_fail(where + ".kind is required");
  s.d = static_cast<int>(take_integer(j, "d", 0, where));
  s.T = take_integer(j, "T", 0, where);
  if (s.d <= 0) schema_fail(where + ".d is required and must be positive");
  if (s.T <= 0) schema_fail(where + ".T is required and must be positive");
  const long seed = take_integer(j, "seed", 0, where);
  if (seed < 0) schema_fail(where + ".seed must be nonnegative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.gap = take_number(j, "gap", s.gap, where);
  s.i_star = static_cast<int>(take_integer(j, "i_star", s.i_star, where));
  s.kappa = take_number(j, "kappa", s.kappa, where);
  s.mean_gap = take_number(j, "mean_gap", s.mean_gap, where);
  if (j.contains("partition")) {
    const json& p = j.at("partition");
    if (!p.is_array()) schema_fail(where + ".partition: expected an array of [lo, hi]");
    for (const json& e : p) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer()) {
        schema_fail(where + ".partition: expected an array of [lo, hi]");
      }
      s.partition.push_back({e[0].get<long>(), e[1].get<long>()});
    }
  }
  if (j.contains("segment_best")) {
    const json& b = j.at("segment_best");
    if (!b.is_array()) schema_fail(where + ".segment_best: expected an integer array");
    for (const json& e : b) {
      if (!e.is_number_integer()) schema_fail(where + ".segment_best: expected integers");
      s.segment_best.push_back(e.get<int>());
    }
  }
  s.segments = static_cast<int>(take_integer(j, "segments", s.segments, where));
  s.drift_step = take_number(j, "drift_step", s.drift_step, where);
  s.ranges = take_vec(j, "ranges", where);
  s.scale = take_number(j, "scale", s.scale, where);
  s.subspace_rank = static_cast<int>(take_integer(j, "subspace_rank", s.subspace_rank, where));
  s.base_scale = take_number(j, "base_scale", s.base_scale, where);
  s.jump_factor = take_number(j, "jump_factor", s.jump_factor, where);
  s.jump_round = take_integer(j, "jump_round", s.jump_round, where);
  try {
    s.validate();
  } catch (const std::exception& e) {
    schema_fail(e.what());
  }
  return s;
}

LearnerSpec parse_learner(const json& j) {
  const std::string where = "learner";
  check_keys(j, {"algo", "fixed_rate", "rate_cap", "prior", "ranges", "B0", "D",
                 "hedge_rate", "max_adagrad_scale_values", "record_history"},
             where);
  LearnerSpec s;
  s.algo = take_string(j, "algo", "", where);
  if (s.algo.empty()) schema_fail(where + ".algo is required");
  static const std::set<std::string> algos = {
      "adaptive", "fixed", "hedge",  "constant", "kl",     "multiscale",
      "switching", "unknown_range", "ons",      "gd",     "adagrad",
      "metagrad",  "union3",        "onsul",    "onsuld"};
  if (algos.count(s.algo) == 0) schema_fail(where + ".algo: unknown algorithm " + s.algo);
  s.fixed_rate = take_number(j, "fixed_rate", s.fixed_rate, where);
  s.rate_cap = take_number(j, "rate_cap", s.rate_cap, where);
  s.prior = take_vec(j, "prior", where);
  s.ranges = take_vec(j, "ranges", where);
  s.B0 = take_number(j, "B0", s.B0, where);
  s.D = take_number(j, "D", s.D, where);
  s.hedge_rate = take_number(j, "hedge_rate", s.hedge_rate, where);
  s.max_adagrad_scale_values =
      static_cast<int>(take_integer(j, "max_adagrad_scale_values",
                                    s.max_adagrad_scale_values, where));
  s.record_history = take_bool(j, "record_history", s.record_history, where);
  return s;
}

const std::set<std::string>& valid_bound_ids() {
  static const std::set<std::string> ids = {
      "impossible_tuning", "kl_corrected",         "multi_scale",
      "switching",         "unknown_range",        "second_order_rank",
      "gradient_norm",     "preconditioner_trace", "recentered_rank"};
  return ids;
}

bool is_grid_node(const json& j) {
  return j.is_object() && j.size() == 1 && j.contains("grid");
}

void find_grids(const json& j, const std::string& path,
                std::vector<std::pair<std::string, json>>& out) {
  if (is_grid_node(j)) {
    const json& values = j.at("grid");
    if (!values.is_array() || values.empty()) {
      schema_fail("grid at " + (path.empty() ? "/" : path) + " must be a nonempty array");
    }
    out.push_back({path, values});
    return;
  }
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      find_grids(it.value(), path + "/" + it.key(), out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      find_grids(j[i], path + "/" + std::to_string(i), out);
    }
  }
}

std::vector<std::uint64_t> parse_seed_arg(const std::string& arg) {
  const auto dots = arg.find("..");
  auto to_seed = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      schema_fail("--seed: expected n or lo..hi, got '" + arg + "'");
    }
    if (used != s.size()) schema_fail("--seed: expected n or lo..hi, got '" + arg + "'");
    return static_cast<std::uint64_t>(v);
  };
  if (dots == std::string::npos) return {to_seed(arg)};
  const std::uint64_t lo = to_seed(arg.substr(0, dots));
  const std::uint64_t hi = to_seed(arg.substr(dots + 2));
  if (hi < lo) schema_fail("--seed: range must satisfy lo <= hi");
  if (hi - lo >= 4096) schema_fail("--seed: range too large");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << content;
  f.close();
  if (!f) throw std::runtime_error("failed writing " + p.string());
}

json report_json(const BoundReport& r) {
  json terms = json::object();
  for (const BoundTerm& t : r.terms) terms[t.name] = t.value;
  return json{{"id", r.id},
              {"checkpoint", r.checkpoint},
              {"audit_constant", r.audit_constant},
              {"terms", terms},
              {"bound", r.bound},
              {"realized", r.realized},
              {"ratio", r.ratio()},
              {"holds", r.holds()}};
}

}  // namespace

ExperimentConfig parse_experiment(const json& doc, const std::string& out_override,
                                  const std::string& seed_arg) {
  std::vector<std::pair<std::string, json>> grids;
  find_grids(doc, "", grids);
  if (!grids.empty()) {
    schema_fail("config contains parameter grids; use the sweep subcommand");
  }
  const std::string where = "config";
  check_keys(doc, {"environment", "learner", "predictor", "checkpoints", "bounds",
                   "audit_expert", "audit_olo", "output", "seeds"},
             where);
  if (!doc.contains("environment")) schema_fail("config.environment is required");
  if (!doc.contains("learner")) schema_fail("config.learner is required");

  ExperimentConfig cfg;
  cfg.run.env = parse_environment(doc.at("environment"));
  cfg.run.learner = parse_learner(doc.at("learner"));
  const std::string pk = take_string(doc, "predictor", "zero", where);
  try {
    cfg.run.predictor = PredictorKind::parse(pk);
  } catch (const std::exception& e) {
    schema_fail(e.what());
  }
  if (cfg.run.learner.olo() && cfg.run.predictor.broadcast()) {
    schema_fail("broadcast predictors are only valid for simplex learners");
  }
  if (doc.contains("checkpoints")) {
    const json& cps = doc.at("checkpoints");
    if (!cps.is_array()) schema_fail("config.checkpoints: expected an integer array");
    for (const json& e : cps) {
      if (!e.is_number_integer()) schema_fail("config.checkpoints: expected integers");
      const long cp = e.get<long>();
      if (cp < 1 || cp > cfg.run.env.T) schema_fail("config.checkpoints: out of range");
      cfg.run.checkpoints.push_back(cp);
    }
  }
  if (doc.contains("bounds")) {
    const json& ids = doc.at("bounds");
    if (!ids.is_array()) schema_fail("config.bounds: expected a string array");
    for (const json& e : ids) {
      if (!e.is_string()) schema_fail("config.bounds: expected strings");
      const std::string id = e.get<std::string>();
      if (valid_bound_ids().count(id) == 0) schema_fail("config.bounds: unknown id " + id);
      cfg.run.bound_ids.push_back(id);
    }
  }
  cfg.run.audit_expert = take_number(doc, "audit_expert", cfg.run.audit_expert, where);
  cfg.run.audit_olo = take_number(doc, "audit_olo", cfg.run.audit_olo, where);
  if (cfg.run.audit_expert <= 0 || cfg.run.audit_olo <= 0) {
    schema_fail("audit constants must be positive");
  }
  cfg.out_dir = !out_override.empty() ? out_override
                                      : take_string(doc, "output", "out", where);
  if (!seed_arg.empty()) {
    cfg.seeds = parse_seed_arg(seed_arg);
  } else if (doc.contains("seeds")) {
    const json& seeds = doc.at("seeds");
    if (!seeds.is_array() || seeds.empty()) {
      schema_fail("config.seeds: expected a nonempty integer array");
    }
    for (const json& e : seeds) {
      if (!e.is_number_integer() || e.get<long>() < 0) {
        schema_fail("config.seeds: expected nonnegative integers");
      }
      cfg.seeds.push_back(static_cast<std::uint64_t>(e.get<long>()));
    }
  } else {
    cfg.seeds = {cfg.run.env.seed};
  }
  cfg.echo = doc;
  return cfg;
}

std::vector<SweepPoint> expand_grids(const json& doc) {
  std::vector<std::pair<std::string, json>> grids;
  find_grids(doc, "", grids);
  std::vector<SweepPoint> points;
  if (grids.empty()) {
    points.push_back({doc, json::object()});
    return points;
  }
  std::vector<std::size_t> idx(grids.size(), 0);
  for (;;) {
    SweepPoint p{doc, json::object()};
    for (std::size_t g = 0; g < grids.size(); ++g) {
      const json& value = grids[g].second[idx[g]];
      p.doc[json::json_pointer(grids[g].first)] = value;
      p.overrides[grids[g].first] = value;
    }
    points.push_back(std::move(p));
    if (points.size() > 100000) schema_fail("grid expansion exceeds 100000 points");
    std::size_t g = 0;
    for (; g < grids.size(); ++g) {
      if (++idx[g] < grids[g].second.size()) break;
      idx[g] = 0;
    }
    if (g == grids.size()) break;
  }
  return points;
}

std::string trace_csv(const RunResult& result) {
  const RegretTrace& trace = result.trace;
  std::string out = "t,learner_loss";
  for (const auto& [label, u] : result.comparators) out += ",comparator_" + label + "_loss";
  for (const auto& [label, u] : result.comparators) out += ",regret_" + label;
  out += ",event\n";
  std::vector<double> cum(result.comparators.size(), 0.0);
  double learner_cum = 0;
  for (long t = 1; t <= trace.rounds(); ++t) {
    const TraceRound& r = trace.round(t);
    out += std::to_string(t) + "," + fmt_double(r.learner_loss);
    learner_cum += r.learner_loss;
    std::string regrets;
    for (std::size_t c = 0; c < result.comparators.size(); ++c) {
      const double comp_loss = result.comparators[c].second.dot(r.loss);
      cum[c] += comp_loss;
      out += "," + fmt_double(comp_loss);
      regrets += "," + fmt_double(learner_cum - cum[c]);
    }
    out += regrets + "," + r.event + "\n";
  }
  return out;
}

json summary_json(const ExperimentConfig& cfg, std::uint64_t seed,
                  const RunResult& result) {
  json config = cfg.echo;
  config["environment"]["seed"] = seed;
  json regrets = json::object();
  for (const auto& [label, u] : result.comparators) {
    regrets[label] = result.trace.regret(u);
  }
  json reports = json::array();
  for (const BoundReport& r : result.reports) reports.push_back(report_json(r));
  json events = json::array();
  for (const ScaleEvent& e : result.events) {
    events.push_back(json{{"round", e.round}, {"kind", e.kind}, {"value", e.value}});
  }
  return json{{"rounds", result.trace.rounds()},
              {"seed", seed},
              {"config", config},
              {"final", json{{"learner_cumulative", result.learner_cumulative},
                             {"regret", regrets}}},
              {"bound_reports", reports},
              {"events", events},
              {"hint_clamps", result.hint_clamps}};
}

namespace {

json load_document(const std::string& path) {
  std::ifstream f(path);
  if (!f) schema_fail("cannot read config " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    schema_fail(std::string("malformed JSON: ") + e.what());
  }
  return {};
}

// Validate the heavyweight pieces without running: environment draws and the
// full learner stack construction.
void dry_build(const RunConfig& rc) {
  Environment env(rc.env);
  (void)env.loss(1);
  (void)make_learner(rc.learner, rc.env.d, rc.env.T, rc.predictor.rate_cap());
}

void execute_one(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir,
                 bool suffix) {
  RunConfig rc = cfg.run;
  rc.env.seed = seed;
  const RunResult result = run(rc);
  const std::string tag = suffix ? "_seed" + std::to_string(seed) : "";
  write_text(dir / ("trace" + tag + ".csv"), trace_csv(result));
  write_text(dir / ("summary" + tag + ".json"),
             summary_json(cfg, seed, result).dump(2) + "\n");
}

}  // namespace

int cli_run(const std::string& config_path, const std::string& out_override,
            const std::string& seed_arg) {
  ExperimentConfig cfg;
  try {
    const json doc = load_document(config_path);
    cfg = parse_experiment(doc, out_override, seed_arg);
    dry_build(cfg.run);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const bool suffix = cfg.seeds.size() > 1;
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(static_cast<long>(cfg.seeds.size()), [&](long i) {
      execute_one(cfg, cfg.seeds[static_cast<std::size_t>(i)], dir, suffix);
    });
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cerr << "wrote " << cfg.seeds.size() << " run(s) to " << dir.string() << " in "
              << dt.count() << "s\n";
  } catch (const std::exception& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int cli_sweep(const std::string& config_path, bool resume) {
  std::vector<SweepPoint> points;
  std::vector<ExperimentConfig> cfgs;
  try {
    const json doc = load_document(config_path);
    points = expand_grids(doc);
    cfgs.reserve(points.size());
    for (const SweepPoint& p : points) cfgs.push_back(parse_experiment(p.doc));
    dry_build(cfgs.front().run);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const fs::path root(cfgs.front().out_dir);
    fs::create_directories(root);

    json index = json::array();
    std::vector<fs::path> dirs;
    for (std::size_t p = 0; p < points.size(); ++p) {
      char name[32];
      std::snprintf(name, sizeof(name), "point_%04zu", p);
      dirs.push_back(root / name);
      fs::create_directories(dirs.back());
      index.push_back(json{{"dir", name}, {"overrides", points[p].overrides}});
    }
    write_text(root / "index.json", index.dump(2) + "\n");

    struct Task {
      std::size_t point;
      std::uint64_t seed;
    };
    std::vector<Task> tasks;
    std::size_t skipped = 0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const bool suffix = cfgs[p].seeds.size() > 1;
      for (std::uint64_t seed : cfgs[p].seeds) {
        const std::string tag = suffix ? "_seed" + std::to_string(seed) : "";
        if (resume && fs::exists(dirs[p] / ("summary" + tag + ".json"))) {
          ++skipped;
          continue;
        }
        tasks.push_back({p, seed});
      }
    }
    parallel_for(static_cast<long>(tasks.size()), [&](long i) {
      const Task& task = tasks[static_cast<std::size_t>(i)];
      execute_one(cfgs[task.point], task.seed, dirs[task.point],
                  cfgs[task.point].seeds.size() > 1);
    });
    std::cerr << "swept " << tasks.size() << " run(s) across " << points.size()
              << " point(s)" << (skipped ? ", skipped " + std::to_string(skipped) : "")
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int cli_verify(const std::string& only) {
  if (!only.empty() && only.find('/') == std::string::npos) {
    const std::vector<std::string> mods = check_modules();
    if (std::find(mods.begin(), mods.end(), only) == mods.end()) {
      std::cerr << "unknown module '" << only << "'; available:";
      for (const std::string& m : mods) std::cerr << " " << m;
      std::cerr << "\n";
      return 2;
    }
  }
  const std::vector<CheckResult> results = run_checks(only, &std::cout);
  if (results.empty()) {
    std::cerr << "no checks match '" << only << "'\n";
    return 2;
  }
  json failures = json::array();
  for (const CheckResult& r : results) {
    if (!r.pass) failures.push_back(r.name);
  }
  if (!failures.empty()) {
    std::cout << "FAILURES: " << failures.dump() << "\n";
    return 1;
  }
  std::cout << "all " << results.size() << " checks passed\n";
  return 0;
}

}  // namespace msmwc
