#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "predictor_io.hpp"

namespace kbfg {

// A reproducible run description. Everything a run needs — inputs, matching
// strategies, learner settings, seeds — lives in this file; outputs land in a
// caller-chosen directory.
struct AuxConfig {
    std::string id;
    std::string data_path;
    std::string schema_path;
    MatchStrategy strategy;
};

struct RunConfig {
    std::string train_data;
    std::string train_schema;
    std::vector<AuxConfig> auxiliaries;
    bool normalize = true;
    GenerationConfig generation;
    std::optional<ProtocolConfig> protocol;  // required by evaluate runs
    std::string output_prefix = "run";
};

// Parses and fully validates; every problem is reported (not just the first).
RunConfig load_run_config(const std::string& path, std::vector<std::string>& errors);
RunConfig run_config_from_json(const ordered_json& j, std::vector<std::string>& errors);
ordered_json run_config_to_json(const RunConfig& cfg);

ordered_json match_strategy_to_json(const MatchStrategy& s);
MatchStrategy match_strategy_from_json(const ordered_json& j);

// Outputs are written atomically (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);
uint64_t file_digest(const std::string& path);

struct RunOutputs {
    std::vector<std::string> files;  // paths written, manifest last
};

// Loads the datasets, runs generation against every auxiliary, and writes the
// enhanced dataset, the feature manifest, serialized predictors and the run
// manifest under out_dir.
RunOutputs run_generate(const RunConfig& cfg, const std::string& out_dir, int jobs);

// Runs the evaluation protocol and writes the machine-readable report, the
// human-readable table and the run manifest under out_dir.
RunOutputs run_evaluate(const RunConfig& cfg, const std::string& out_dir, int jobs);

ordered_json report_to_json(const ExperimentReport& r, const RunConfig& cfg);

}  // namespace kbfg
