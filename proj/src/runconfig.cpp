#include "runconfig.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace kbfg {

namespace fs = std::filesystem;

ordered_json match_strategy_to_json(const MatchStrategy& s) {
    ordered_json j;
    switch (s.kind) {
    case MatchStrategy::Kind::ExactName:
        j["kind"] = "exact";
        break;
    case MatchStrategy::Kind::ManualTable:
        j["kind"] = "manual";
        j["table"] = s.table_path;
        break;
    case MatchStrategy::Kind::FuzzyName:
        j["kind"] = "fuzzy";
        j["threshold"] = s.name_threshold;
        break;
    case MatchStrategy::Kind::Embedding:
        j["kind"] = "embedding";
        j["vectors"] = s.vectors_path;
        j["min_cosine"] = s.min_cosine;
        break;
    case MatchStrategy::Kind::Distribution:
        j["kind"] = "distribution";
        j["max_distance"] = s.max_distance;
        break;
    }
    return j;
}

MatchStrategy match_strategy_from_json(const ordered_json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exact") return MatchStrategy::exact();
    if (kind == "manual") return MatchStrategy::manual(j.at("table").get<std::string>());
    if (kind == "fuzzy") {
        MatchStrategy s = MatchStrategy::fuzzy();
        if (j.contains("threshold")) s.name_threshold = j.at("threshold").get<double>();
        return s;
    }
    if (kind == "embedding") {
        MatchStrategy s = MatchStrategy::embedding(j.at("vectors").get<std::string>());
        if (j.contains("min_cosine")) s.min_cosine = j.at("min_cosine").get<double>();
        return s;
    }
    if (kind == "distribution") {
        MatchStrategy s = MatchStrategy::distribution();
        if (j.contains("max_distance")) s.max_distance = j.at("max_distance").get<double>();
        return s;
    }
    fail("unknown matching strategy '" + kind + "'");
}

namespace {

ordered_json generation_to_json(const GenerationConfig& g) {
    ordered_json j;
    j["secondary"] = learner_spec_to_json(g.secondary);
    j["primary"] = learner_spec_to_json(g.primary);
    j["wrapper_folds"] = g.wrapper_folds;
    j["recurrent"] = g.recurrent;
    if (g.max_targets) j["max_targets"] = *g.max_targets;
    else j["max_targets"] = nullptr;
    if (g.prioritization_vectors) j["prioritization_vectors"] = *g.prioritization_vectors;
    else j["prioritization_vectors"] = nullptr;
    j["duplicate_policy"] =
        g.duplicate_policy == GenerationConfig::DuplicatePolicy::Committee ? "committee"
                                                                           : "argmax_utility";
    j["intersection_cap"] = g.intersection_cap;
    j["seed"] = g.seed;
    return j;
}

GenerationConfig generation_from_json(const ordered_json& j, std::vector<std::string>& errors) {
    GenerationConfig g;
    try {
        if (j.contains("secondary")) g.secondary = learner_spec_from_json(j.at("secondary"));
        if (j.contains("primary")) g.primary = learner_spec_from_json(j.at("primary"));
        if (j.contains("wrapper_folds")) g.wrapper_folds = j.at("wrapper_folds").get<int>();
        if (j.contains("recurrent")) g.recurrent = j.at("recurrent").get<bool>();
        if (j.contains("max_targets") && !j.at("max_targets").is_null())
            g.max_targets = j.at("max_targets").get<size_t>();
        if (j.contains("prioritization_vectors") && !j.at("prioritization_vectors").is_null())
            g.prioritization_vectors = j.at("prioritization_vectors").get<std::string>();
        if (j.contains("duplicate_policy")) {
            const std::string p = j.at("duplicate_policy").get<std::string>();
            if (p == "committee") g.duplicate_policy = GenerationConfig::DuplicatePolicy::Committee;
            else if (p == "argmax_utility")
                g.duplicate_policy = GenerationConfig::DuplicatePolicy::ArgmaxUtility;
            else errors.push_back("generation.duplicate_policy: unknown value '" + p + "'");
        }
        if (j.contains("intersection_cap")) g.intersection_cap = j.at("intersection_cap").get<size_t>();
        if (j.contains("seed")) g.seed = j.at("seed").get<uint64_t>();
        g.validate();
    } catch (const std::exception& e) {
        errors.push_back(std::string("generation: ") + e.what());
    }
    return g;
}

ordered_json protocol_to_json(const ProtocolConfig& p) {
    ordered_json j;
    j["folds"] = p.folds;
    j["alpha"] = p.alpha;
    ordered_json primaries = ordered_json::array();
    for (const auto& s : p.primary_specs) primaries.push_back(learner_spec_to_json(s));
    j["primaries"] = std::move(primaries);
    j["top_k_cap"] = p.top_k_cap;
    j["emit_curve"] = p.emit_curve;
    j["curve_group"] = p.curve_group;
    j["seed"] = p.seed;
    return j;
}

ProtocolConfig protocol_from_json(const ordered_json& j, const GenerationConfig& gen,
                                  std::vector<std::string>& errors) {
    ProtocolConfig p;
    p.generation = gen;
    try {
        if (j.contains("folds")) p.folds = j.at("folds").get<int>();
        if (j.contains("alpha")) p.alpha = j.at("alpha").get<double>();
        if (j.contains("primaries"))
            for (const auto& js : j.at("primaries"))
                p.primary_specs.push_back(learner_spec_from_json(js));
        if (p.primary_specs.empty())
            p.primary_specs.push_back(LearnerSpec::decision_tree(true));
        if (j.contains("top_k_cap")) p.top_k_cap = j.at("top_k_cap").get<size_t>();
        if (j.contains("emit_curve")) p.emit_curve = j.at("emit_curve").get<bool>();
        if (j.contains("curve_group")) p.curve_group = j.at("curve_group").get<size_t>();
        if (j.contains("seed")) p.seed = j.at("seed").get<uint64_t>();
        p.validate();
    } catch (const std::exception& e) {
        errors.push_back(std::string("protocol: ") + e.what());
    }
    return p;
}

void check_readable(const std::string& path, const std::string& what,
                    std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) errors.push_back(what + ": cannot open '" + path + "'");
}

}  // namespace

ordered_json run_config_to_json(const RunConfig& cfg) {
    ordered_json j;
    ordered_json train;
    train["data"] = cfg.train_data;
    train["schema"] = cfg.train_schema;
    j["train"] = std::move(train);
    ordered_json auxes = ordered_json::array();
    for (const auto& a : cfg.auxiliaries) {
        ordered_json ja;
        ja["id"] = a.id;
        ja["data"] = a.data_path;
        ja["schema"] = a.schema_path;
        ja["strategy"] = match_strategy_to_json(a.strategy);
        auxes.push_back(std::move(ja));
    }
    j["auxiliaries"] = std::move(auxes);
    j["normalize"] = cfg.normalize;
    j["generation"] = generation_to_json(cfg.generation);
    if (cfg.protocol) j["protocol"] = protocol_to_json(*cfg.protocol);
    j["output_prefix"] = cfg.output_prefix;
    return j;
}

RunConfig run_config_from_json(const ordered_json& j, std::vector<std::string>& errors) {
    RunConfig cfg;
    try {
        if (!j.contains("train")) {
            errors.push_back("config: missing 'train' section");
        } else {
            cfg.train_data = j.at("train").value("data", "");
            cfg.train_schema = j.at("train").value("schema", "");
            if (cfg.train_data.empty()) errors.push_back("train.data: missing path");
            if (cfg.train_schema.empty()) errors.push_back("train.schema: missing path");
        }
        if (j.contains("auxiliaries")) {
            size_t idx = 0;
            for (const auto& ja : j.at("auxiliaries")) {
                AuxConfig a;
                a.id = ja.value("id", "aux" + std::to_string(idx));
                a.data_path = ja.value("data", "");
                a.schema_path = ja.value("schema", "");
                if (a.data_path.empty())
                    errors.push_back("auxiliaries[" + std::to_string(idx) + "].data: missing path");
                if (a.schema_path.empty())
                    errors.push_back("auxiliaries[" + std::to_string(idx) +
                                     "].schema: missing path");
                if (ja.contains("strategy")) {
                    try {
                        a.strategy = match_strategy_from_json(ja.at("strategy"));
                        a.strategy.validate();
                    } catch (const std::exception& e) {
                        errors.push_back("auxiliaries[" + std::to_string(idx) + "].strategy: " +
                                         e.what());
                    }
                }
                for (const auto& other : cfg.auxiliaries)
                    if (other.id == a.id)
                        errors.push_back("auxiliaries: duplicate id '" + a.id + "'");
                cfg.auxiliaries.push_back(std::move(a));
                ++idx;
            }
        }
        if (j.contains("normalize")) cfg.normalize = j.at("normalize").get<bool>();
        if (j.contains("generation"))
            cfg.generation = generation_from_json(j.at("generation"), errors);
        if (j.contains("protocol"))
            cfg.protocol = protocol_from_json(j.at("protocol"), cfg.generation, errors);
        if (j.contains("output_prefix")) cfg.output_prefix = j.at("output_prefix").get<std::string>();
        if (cfg.output_prefix.empty() || cfg.output_prefix.find('/') != std::string::npos)
            errors.push_back("output_prefix: must be a non-empty file name fragment");
    } catch (const std::exception& e) {
        errors.push_back(std::string("config: ") + e.what());
    }

    // existence checks, all reported together
    if (!cfg.train_data.empty()) check_readable(cfg.train_data, "train.data", errors);
    if (!cfg.train_schema.empty()) check_readable(cfg.train_schema, "train.schema", errors);
    for (const auto& a : cfg.auxiliaries) {
        if (!a.data_path.empty()) check_readable(a.data_path, "auxiliary '" + a.id + "' data", errors);
        if (!a.schema_path.empty())
            check_readable(a.schema_path, "auxiliary '" + a.id + "' schema", errors);
        if (a.strategy.kind == MatchStrategy::Kind::ManualTable)
            check_readable(a.strategy.table_path, "auxiliary '" + a.id + "' matching table",
                           errors);
        if (a.strategy.kind == MatchStrategy::Kind::Embedding)
            check_readable(a.strategy.vectors_path, "auxiliary '" + a.id + "' vector file",
                           errors);
    }
    if (cfg.generation.prioritization_vectors)
        check_readable(*cfg.generation.prioritization_vectors, "prioritization vector file",
                       errors);
    return cfg;
}

RunConfig load_run_config(const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("cannot open config '" + path + "'");
        return {};
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        errors.push_back("config '" + path + "': " + e.what());
        return {};
    }
    return run_config_from_json(j, errors);
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot write '" + tmp + "'");
        out << content;
        if (!out) fail("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64({reinterpret_cast<const unsigned char*>(buf),
                     static_cast<size_t>(in.gcount())},
                    h);
        if (!in) break;
    }
    return h;
}

namespace {

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ordered_json build_manifest(const char* command, const RunConfig& cfg,
                            const std::vector<std::string>& outputs) {
    ordered_json inputs = ordered_json::array();
    auto add_input = [&](const std::string& path) {
        if (path.empty()) return;
        ordered_json ji;
        ji["path"] = path;
        ji["fnv1a64"] = hex64(file_digest(path));
        inputs.push_back(std::move(ji));
    };
    add_input(cfg.train_data);
    add_input(cfg.train_schema);
    for (const auto& a : cfg.auxiliaries) {
        add_input(a.data_path);
        add_input(a.schema_path);
        if (a.strategy.kind == MatchStrategy::Kind::ManualTable) add_input(a.strategy.table_path);
        if (a.strategy.kind == MatchStrategy::Kind::Embedding) add_input(a.strategy.vectors_path);
    }
    if (cfg.generation.prioritization_vectors) add_input(*cfg.generation.prioritization_vectors);

    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kVersion;
    j["seed"] = cfg.protocol ? cfg.protocol->seed : cfg.generation.seed;
    j["config"] = run_config_to_json(cfg);
    j["inputs"] = std::move(inputs);
    ordered_json oj = ordered_json::array();
    for (const auto& o : outputs) oj.push_back(fs::path(o).filename().string());
    j["outputs"] = std::move(oj);
    return j;
}

struct LoadedRun {
    Dataset train;
    std::vector<std::pair<AuxConfig, Dataset>> auxiliaries;
};

LoadedRun load_datasets(const RunConfig& cfg) {
    LoadedRun run;
    run.train = parse_dataset(cfg.train_data, cfg.train_schema);
    if (cfg.normalize) run.train = run.train.normalized();
    for (const auto& a : cfg.auxiliaries) {
        Dataset d = parse_dataset(a.data_path, a.schema_path);
        if (cfg.normalize) d = d.normalized();
        run.auxiliaries.emplace_back(a, std::move(d));
    }
    return run;
}

}  // namespace

RunOutputs run_generate(const RunConfig& cfg, const std::string& out_dir, int jobs) {
    fs::create_directories(out_dir);
    LoadedRun run = load_datasets(cfg);

    GenerationConfig gen = cfg.generation;
    gen.jobs = jobs;

    GenerationResult result;
    std::vector<std::pair<std::string, FeatureMatching>> matchings;
    if (run.auxiliaries.size() == 1) {
        const auto& [acfg, aux] = run.auxiliaries[0];
        FeatureMatching m = match_features(run.train, aux, acfg.strategy);
        matchings.emplace_back(acfg.id, m);
        result = run_kbfg(run.train, aux, m, gen, acfg.id);
    } else if (run.auxiliaries.size() > 1) {
        std::vector<AuxiliaryInput> inputs;
        for (const auto& [acfg, aux] : run.auxiliaries) {
            FeatureMatching m = match_features(run.train, aux, acfg.strategy);
            matchings.emplace_back(acfg.id, m);
            inputs.push_back({aux, std::move(m), acfg.id});
        }
        result = run_kbfg_star(run.train, inputs, gen);
    }

    Dataset enhanced = enhance(run.train, result.features);

    const fs::path dir(out_dir);
    RunOutputs out;
    auto emit = [&](const std::string& name, const std::string& content) {
        std::string path = (dir / (cfg.output_prefix + "." + name)).string();
        atomic_write(path, content);
        out.files.push_back(path);
    };

    // enhanced dataset: serialize via a temp pair, then move atomically
    {
        std::string data_path = (dir / (cfg.output_prefix + ".enhanced.csv")).string();
        std::string schema_path = (dir / (cfg.output_prefix + ".enhanced.schema")).string();
        serialize_dataset(enhanced, data_path + ".tmp", schema_path + ".tmp");
        std::error_code ec;
        fs::rename(data_path + ".tmp", data_path, ec);
        if (ec) fail("cannot finalize '" + data_path + "'");
        fs::rename(schema_path + ".tmp", schema_path, ec);
        if (ec) fail("cannot finalize '" + schema_path + "'");
        out.files.push_back(data_path);
        out.files.push_back(schema_path);
    }

    for (const auto& [id, m] : matchings) {
        std::string path = (dir / (cfg.output_prefix + ".matching." + id + ".txt")).string();
        save_matching(m, path + ".tmp");
        std::error_code ec;
        fs::rename(path + ".tmp", path, ec);
        if (ec) fail("cannot finalize '" + path + "'");
        out.files.push_back(path);
    }

    {
        // manifest: per-feature metadata only
        ordered_json j;
        j["format"] = "kbfg-features";
        j["version"] = 1;
        ordered_json arr = ordered_json::array();
        for (const auto& f : result.features) {
            ordered_json jf;
            jf["name"] = f.name;
            jf["source_dataset"] = f.source_dataset;
            jf["source_target"] = f.source_target;
            jf["utility_at_acceptance"] = f.utility_at_acceptance;
            jf["information_gain"] = f.information_gain;
            jf["value_kind"] = feature_kind_to_json(f.value_kind);
            jf["inputs"] = f.input_names();
            arr.push_back(std::move(jf));
        }
        j["features"] = std::move(arr);
        ordered_json notes = ordered_json::array();
        for (const auto& n : result.notes) notes.push_back(n);
        j["notes"] = std::move(notes);
        emit("features.json", j.dump(2) + "\n");
    }

    emit("predictors.json", generated_features_to_json(result.features).dump(2) + "\n");

    {
        ordered_json manifest = build_manifest("generate", cfg, out.files);
        std::string path = (dir / (cfg.output_prefix + ".manifest.json")).string();
        atomic_write(path, manifest.dump(2) + "\n");
        out.files.push_back(path);
    }
    return out;
}

ordered_json report_to_json(const ExperimentReport& r, const RunConfig& cfg) {
    ordered_json j;
    j["format"] = "kbfg-report";
    j["version"] = 1;
    j["config"] = run_config_to_json(cfg);
    j["folds"] = r.folds;
    j["alpha"] = r.alpha;
    j["top_k_cap"] = r.top_k_cap;
    j["seed"] = r.seed;
    j["normalization"] = r.normalization_note;

    ordered_json stats = ordered_json::array();
    for (const auto& a : r.aux_stats) {
        ordered_json ja;
        ja["id"] = a.id;
        ja["avg_intersection"] = a.avg_intersection;
        ja["avg_aux_only"] = a.avg_aux_only;
        stats.push_back(std::move(ja));
    }
    j["aux_stats"] = std::move(stats);

    ordered_json learners = ordered_json::array();
    for (const auto& l : r.learners) {
        ordered_json jl;
        jl["spec"] = learner_spec_to_json(l.spec);
        jl["baseline_mean"] = l.baseline_mean;
        jl["enhanced_mean"] = l.enhanced_mean;
        jl["delta"] = l.delta;
        jl["t"] = l.ttest.t;
        jl["p"] = l.ttest.p;
        jl["significant"] = l.significant;
        ordered_json folds = ordered_json::array();
        for (const auto& f : l.folds) {
            ordered_json jf;
            jf["baseline"] = f.baseline;
            jf["enhanced"] = f.enhanced;
            ordered_json accepted = ordered_json::array();
            for (const auto& a : f.accepted) {
                ordered_json ja;
                ja["name"] = a.name;
                ja["source_dataset"] = a.source_dataset;
                ja["source_target"] = a.source_target;
                ja["utility"] = a.utility;
                ja["information_gain"] = a.information_gain;
                ja["inputs"] = a.inputs;
                accepted.push_back(std::move(ja));
            }
            jf["accepted"] = std::move(accepted);
            if (!f.curve.empty()) jf["curve"] = f.curve;
            folds.push_back(std::move(jf));
        }
        jl["folds"] = std::move(folds);
        learners.push_back(std::move(jl));
    }
    j["learners"] = std::move(learners);

    ordered_json notes = ordered_json::array();
    for (const auto& n : r.notes) notes.push_back(n);
    j["notes"] = std::move(notes);
    return j;
}

RunOutputs run_evaluate(const RunConfig& cfg, const std::string& out_dir, int jobs) {
    if (!cfg.protocol) fail("evaluate: config has no 'protocol' section");
    fs::create_directories(out_dir);
    LoadedRun run = load_datasets(cfg);

    ProtocolConfig protocol = *cfg.protocol;
    protocol.generation = cfg.generation;
    protocol.jobs = jobs;

    std::vector<ProtocolAux> auxes;
    for (const auto& [acfg, aux] : run.auxiliaries)
        auxes.push_back({aux, acfg.strategy, acfg.id});

    ExperimentReport report = run_protocol(run.train, auxes, protocol);

    const fs::path dir(out_dir);
    RunOutputs out;
    {
        std::string path = (dir / (cfg.output_prefix + ".report.json")).string();
        atomic_write(path, report_to_json(report, cfg).dump(2) + "\n");
        out.files.push_back(path);
    }
    {
        std::string path = (dir / (cfg.output_prefix + ".report.txt")).string();
        atomic_write(path, report_to_text(report));
        out.files.push_back(path);
    }
    {
        ordered_json manifest = build_manifest("evaluate", cfg, out.files);
        std::string path = (dir / (cfg.output_prefix + ".manifest.json")).string();
        atomic_write(path, manifest.dump(2) + "\n");
        out.files.push_back(path);
    }
    return out;
}

}  // namespace kbfg
