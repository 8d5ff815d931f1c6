#pragma once

#include "msmwc/harness.hpp"

#include <json.hpp>

namespace msmwc {

// Config-file problems (malformed JSON, unknown keys, bad values) that must
// abort before any output is written. CLI exit code 2.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Parsed experiment file: the run prototype, the seeds to execute it under,
// and where the outputs go.
struct ExperimentConfig {
  RunConfig run;
  std::vector<std::uint64_t> seeds;  // at least one entry
  std::string out_dir;
  nlohmann::json echo;  // the validated document, for the summary
};

// Strict-schema parse: unknown keys anywhere are rejected. `seed_arg` (from
// --seed, "7" or "1..8") overrides the config's seeds when nonempty.
ExperimentConfig parse_experiment(const nlohmann::json& doc,
                                  const std::string& out_override = "",
                                  const std::string& seed_arg = "");

// Replace every {"grid": [...]} node by its values' cartesian product.
// Returns one document per point plus a flat override map per point.
struct SweepPoint {
  nlohmann::json doc;
  nlohmann::json overrides;  // json-pointer path -> chosen value
};
std::vector<SweepPoint> expand_grids(const nlohmann::json& doc);

// Render outputs for one finished run.
std::string trace_csv(const RunResult& result);
nlohmann::json summary_json(const ExperimentConfig& cfg, std::uint64_t seed,
                            const RunResult& result);

// Subcommand drivers. Exit codes: 0 ok, 2 schema violation, 3 runtime error.
int cli_run(const std::string& config_path, const std::string& out_override,
            const std::string& seed_arg);
int cli_sweep(const std::string& config_path, bool resume);
int cli_verify(const std::string& only);

}  // namespace msmwc
