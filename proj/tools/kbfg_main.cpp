// Command-line front end for the kbfg shared library. Everything here goes
// through the public C API in kbfg.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kbfg.h"

namespace {

using ordered_json = nlohmann::ordered_json;

int die(const char* what) {
    std::cerr << "kbfg " << what << " failed: " << kbfg_last_error() << "\n";
    return 1;
}

std::string file_digest_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "unreadable";
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 15];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

// every command leaves a replayable manifest next to its outputs
bool write_manifest(const std::string& path, const std::string& command, uint64_t seed,
                    ordered_json config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kbfg_version();
    j["seed"] = seed;
    j["config"] = std::move(config);
    ordered_json ji = ordered_json::array();
    for (const auto& p : inputs) {
        ordered_json e;
        e["path"] = p;
        e["fnv1a64"] = file_digest_hex(p);
        ji.push_back(std::move(e));
    }
    j["inputs"] = std::move(ji);
    ordered_json jo = ordered_json::array();
    for (const auto& p : outputs) jo.push_back(p);
    j["outputs"] = std::move(jo);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
    return static_cast<bool>(out);
}

std::string default_schema(const std::string& data_path) {
    size_t dot = data_path.find_last_of('.');
    size_t slash = data_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return data_path + ".schema";
    return data_path.substr(0, dot) + ".schema";
}

std::string strategy_json(const std::string& kind, const std::string& table, double threshold,
                          const std::string& vectors, double min_cosine, double max_distance) {
    std::ostringstream os;
    os << "{\"kind\":\"" << kind << "\"";
    if (kind == "manual") os << ",\"table\":\"" << table << "\"";
    if (kind == "fuzzy") os << ",\"threshold\":" << threshold;
    if (kind == "embedding")
        os << ",\"vectors\":\"" << vectors << "\",\"min_cosine\":" << min_cosine;
    if (kind == "distribution") os << ",\"max_distance\":" << max_distance;
    os << "}";
    return os.str();
}

struct BenchDef {
    const char* name;
    const char* config_template;  // relative to the bench directory
    const char* split_data;       // non-null: build the FGT by self-splitting
    const char* split_schema;     // relative to the bench directory
};

constexpr BenchDef kBenchmarks[] = {
    {"pima_breast", "pima_breast.json.in", nullptr, nullptr},
    {"breast_pima", "breast_pima.json.in", nullptr, nullptr},
    {"ilpd_hepatitis", "ilpd_hepatitis.json.in", nullptr, nullptr},
    {"hepatitis_ilpd", "hepatitis_ilpd.json.in", nullptr, nullptr},
    {"spectf_self", "spectf_self.json.in", "spectf.csv", "schemas/spectf.schema"},
    {"qsar_self", "qsar_self.json.in", "qsar.csv", "schemas/qsar.schema"},
};

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-based feature generation from auxiliary tabular datasets"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kbfg_version()));

    // --- match ---------------------------------------------------------------
    auto* match = app.add_subcommand("match", "compute a train/auxiliary feature matching");
    std::string m_train, m_train_schema, m_aux, m_aux_schema, m_out = "matching.txt";
    std::string m_strategy = "exact", m_table, m_vectors;
    double m_threshold = 0.2, m_min_cosine = 0.5, m_max_distance = 0.1;
    bool m_normalize = false;
    match->add_option("--train", m_train, "training CSV")->required();
    match->add_option("--train-schema", m_train_schema, "training schema (default: <train>.schema)");
    match->add_option("--aux", m_aux, "auxiliary CSV")->required();
    match->add_option("--aux-schema", m_aux_schema, "auxiliary schema (default: <aux>.schema)");
    match->add_option("--strategy", m_strategy, "exact|manual|fuzzy|embedding|distribution")
        ->check(CLI::IsMember({"exact", "manual", "fuzzy", "embedding", "distribution"}));
    match->add_option("--table", m_table, "manual matching table (train<TAB>aux lines)");
    match->add_option("--threshold", m_threshold, "fuzzy: max normalized edit distance");
    match->add_option("--vectors", m_vectors, "embedding: word-vector file");
    match->add_option("--min-cosine", m_min_cosine, "embedding: acceptance cosine");
    match->add_option("--max-distance", m_max_distance, "distribution: max distance");
    match->add_flag("--normalize", m_normalize, "min-max normalize both datasets first");
    match->add_option("--out", m_out, "matching file to write");

    // --- generate / evaluate ---------------------------------------------------
    std::string g_config, g_out_dir = ".";
    int g_jobs = 1;
    auto* generate = app.add_subcommand("generate", "run feature generation from a config file");
    generate->add_option("--config", g_config, "run configuration (JSON)")->required();
    generate->add_option("--out-dir", g_out_dir, "output directory");
    generate->add_option("--jobs", g_jobs, "worker threads (1 = serial, bit-identical)");

    std::string e_config, e_out_dir = ".";
    int e_jobs = 1;
    auto* evaluate = app.add_subcommand("evaluate", "run the evaluation protocol from a config file");
    evaluate->add_option("--config", e_config, "run configuration (JSON)")->required();
    evaluate->add_option("--out-dir", e_out_dir, "output directory");
    evaluate->add_option("--jobs", e_jobs, "worker threads (1 = serial, bit-identical)");

    // --- split -------------------------------------------------------------------
    auto* split = app.add_subcommand("split", "split one labeled dataset into a train/auxiliary pair");
    std::string s_data, s_schema, s_out_dir = ".", s_prefix = "split";
    double s_mu1 = 1.0 / 3, s_mu2 = 2.0 / 3;
    uint64_t s_seed = 0;
    split->add_option("--data", s_data, "source CSV")->required();
    split->add_option("--schema", s_schema, "source schema (default: <data>.schema)");
    split->add_option("--mu1", s_mu1, "shared-feature fraction");
    split->add_option("--mu2", s_mu2, "train share of the residual features");
    split->add_option("--seed", s_seed, "split seed");
    split->add_option("--out-dir", s_out_dir, "output directory");
    split->add_option("--prefix", s_prefix, "output file prefix");

    // --- bench ----------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "run a bundled benchmark configuration");
    std::string b_name, b_data_dir = "data", b_bench_dir, b_out_dir = "bench-out";
    uint64_t b_seed = 1;
    int b_jobs = 1;
    bool b_list = false;
    bench->add_flag("--list", b_list, "list available benchmarks");
    bench->add_option("--name", b_name, "benchmark name");
    bench->add_option("--data-dir", b_data_dir, "directory with the fetched datasets");
    bench->add_option("--bench-dir", b_bench_dir,
                      "bundled benchmark directory (default: $KBFG_BENCH_DIR or ./bench)");
    bench->add_option("--out-dir", b_out_dir, "output directory");
    bench->add_option("--seed", b_seed, "protocol seed");
    bench->add_option("--jobs", b_jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    if (match->parsed()) {
        if (m_train_schema.empty()) m_train_schema = default_schema(m_train);
        if (m_aux_schema.empty()) m_aux_schema = default_schema(m_aux);

        kbfg_dataset* train = nullptr;
        kbfg_dataset* aux = nullptr;
        if (kbfg_dataset_open(m_train.c_str(), m_train_schema.c_str(), &train) != KBFG_OK)
            return die("match");
        if (kbfg_dataset_open(m_aux.c_str(), m_aux_schema.c_str(), &aux) != KBFG_OK) {
            kbfg_dataset_close(train);
            return die("match");
        }
        if (m_normalize) {
            kbfg_dataset* tmp = nullptr;
            if (kbfg_dataset_normalize(train, &tmp) != KBFG_OK) return die("match");
            kbfg_dataset_close(train);
            train = tmp;
            if (kbfg_dataset_normalize(aux, &tmp) != KBFG_OK) return die("match");
            kbfg_dataset_close(aux);
            aux = tmp;
        }

        std::string sj = strategy_json(m_strategy, m_table, m_threshold, m_vectors,
                                       m_min_cosine, m_max_distance);
        kbfg_matching* matching = nullptr;
        if (kbfg_match(train, aux, sj.c_str(), &matching) != KBFG_OK) {
            kbfg_dataset_close(train);
            kbfg_dataset_close(aux);
            return die("match");
        }
        if (kbfg_matching_save(matching, m_out.c_str()) != KBFG_OK) return die("match");

        size_t pairs = kbfg_matching_pair_count(matching);
        size_t aux_only = kbfg_matching_aux_only_count(matching);
        std::cout << pairs << " matched, " << aux_only << " aux-only\n";
        if (pairs == 0)
            std::cerr << "warning: empty intersection, the auxiliary dataset cannot be used\n";

        ordered_json cfg;
        cfg["train"] = m_train;
        cfg["train_schema"] = m_train_schema;
        cfg["aux"] = m_aux;
        cfg["aux_schema"] = m_aux_schema;
        cfg["strategy"] = ordered_json::parse(sj);
        cfg["normalize"] = m_normalize;
        cfg["out"] = m_out;
        if (!write_manifest(m_out + ".manifest.json", "match", 0, std::move(cfg),
                            {m_train, m_train_schema, m_aux, m_aux_schema}, {m_out})) {
            std::cerr << "kbfg match failed: cannot write manifest\n";
            return 1;
        }

        kbfg_matching_close(matching);
        kbfg_dataset_close(train);
        kbfg_dataset_close(aux);
        return 0;
    }

    if (generate->parsed()) {
        if (kbfg_run_generate(g_config.c_str(), g_out_dir.c_str(), g_jobs) != KBFG_OK)
            return die("generate");
        std::cout << "generate: outputs written to " << g_out_dir << "\n";
        return 0;
    }

    if (evaluate->parsed()) {
        if (kbfg_run_evaluate(e_config.c_str(), e_out_dir.c_str(), e_jobs) != KBFG_OK)
            return die("evaluate");
        std::cout << "evaluate: outputs written to " << e_out_dir << "\n";
        return 0;
    }

    if (split->parsed()) {
        if (s_schema.empty()) s_schema = default_schema(s_data);
        kbfg_dataset* source = nullptr;
        if (kbfg_dataset_open(s_data.c_str(), s_schema.c_str(), &source) != KBFG_OK)
            return die("split");
        kbfg_dataset* train = nullptr;
        kbfg_dataset* aux = nullptr;
        if (kbfg_split_fgt(source, s_mu1, s_mu2, s_seed, &train, &aux) != KBFG_OK) {
            kbfg_dataset_close(source);
            return die("split");
        }
        std::string mkdir = "mkdir -p '" + s_out_dir + "'";
        if (std::system(mkdir.c_str()) != 0) {
            std::cerr << "split: cannot create " << s_out_dir << "\n";
            return 1;
        }
        std::string base = s_out_dir + "/" + s_prefix;
        if (kbfg_dataset_save(train, (base + ".train.csv").c_str(),
                              (base + ".train.schema").c_str()) != KBFG_OK ||
            kbfg_dataset_save(aux, (base + ".aux.csv").c_str(),
                              (base + ".aux.schema").c_str()) != KBFG_OK)
            return die("split");
        std::cout << "split: " << kbfg_dataset_rows(train) << " train rows / "
                  << kbfg_dataset_features(train) << " features, " << kbfg_dataset_rows(aux)
                  << " aux rows / " << kbfg_dataset_features(aux) << " features\n";

        ordered_json cfg;
        cfg["data"] = s_data;
        cfg["schema"] = s_schema;
        cfg["mu1"] = s_mu1;
        cfg["mu2"] = s_mu2;
        cfg["seed"] = s_seed;
        cfg["prefix"] = s_prefix;
        if (!write_manifest(base + ".manifest.json", "split", s_seed, std::move(cfg),
                            {s_data, s_schema},
                            {base + ".train.csv", base + ".train.schema", base + ".aux.csv",
                             base + ".aux.schema"})) {
            std::cerr << "kbfg split failed: cannot write manifest\n";
            return 1;
        }
        kbfg_dataset_close(train);
        kbfg_dataset_close(aux);
        kbfg_dataset_close(source);
        return 0;
    }

    if (bench->parsed()) {
        if (b_list) {
            for (const auto& b : kBenchmarks) std::cout << b.name << "\n";
            return 0;
        }
        if (b_name.empty()) {
            std::cerr << "bench: --name or --list required\n";
            return 1;
        }
        if (b_bench_dir.empty()) {
            const char* env = std::getenv("KBFG_BENCH_DIR");
            b_bench_dir = env ? env : "bench";
        }
        const BenchDef* def = nullptr;
        for (const auto& b : kBenchmarks)
            if (b_name == b.name) def = &b;
        if (!def) {
            std::cerr << "bench: unknown benchmark '" << b_name << "' (try --list)\n";
            return 1;
        }

        std::ifstream tpl(b_bench_dir + "/" + def->config_template);
        if (!tpl) {
            std::cerr << "bench: cannot open template " << b_bench_dir << "/"
                      << def->config_template << "\n";
            return 1;
        }
        std::stringstream buf;
        buf << tpl.rdbuf();
        std::string config = buf.str();

        if (def->split_data) {
            // self-split FGT: halve the source dataset first
            kbfg_dataset* source = nullptr;
            std::string data = b_data_dir + "/" + def->split_data;
            std::string schema = b_bench_dir + "/" + def->split_schema;
            if (kbfg_dataset_open(data.c_str(), schema.c_str(), &source) != KBFG_OK)
                return die("bench");
            kbfg_dataset* train = nullptr;
            kbfg_dataset* aux = nullptr;
            if (kbfg_split_fgt(source, 1.0 / 3, 2.0 / 3, b_seed, &train, &aux) != KBFG_OK) {
                kbfg_dataset_close(source);
                return die("bench");
            }
            std::string base = b_out_dir + "/" + b_name;
            std::string mkdir = "mkdir -p '" + b_out_dir + "'";
            if (std::system(mkdir.c_str()) != 0) {
                std::cerr << "bench: cannot create " << b_out_dir << "\n";
                return 1;
            }
            if (kbfg_dataset_save(train, (base + ".train.csv").c_str(),
                                  (base + ".train.schema").c_str()) != KBFG_OK ||
                kbfg_dataset_save(aux, (base + ".aux.csv").c_str(),
                                  (base + ".aux.schema").c_str()) != KBFG_OK)
                return die("bench");
            kbfg_dataset_close(train);
            kbfg_dataset_close(aux);
            kbfg_dataset_close(source);
        }

        config = replace_all(config, "@DATA_DIR@", b_data_dir);
        config = replace_all(config, "@BENCH_DIR@", b_bench_dir);
        config = replace_all(config, "@OUT_DIR@", b_out_dir);
        config = replace_all(config, "@SEED@", std::to_string(b_seed));

        std::string mkdir = "mkdir -p '" + b_out_dir + "'";
        if (std::system(mkdir.c_str()) != 0) {
            std::cerr << "bench: cannot create " << b_out_dir << "\n";
            return 1;
        }
        std::string config_path = b_out_dir + "/" + b_name + ".config.json";
        {
            std::ofstream out(config_path, std::ios::binary | std::ios::trunc);
            out << config;
            if (!out) {
                std::cerr << "bench: cannot write " << config_path << "\n";
                return 1;
            }
        }
        if (kbfg_run_evaluate(config_path.c_str(), b_out_dir.c_str(), b_jobs) != KBFG_OK)
            return die("bench");
        std::cout << "bench " << b_name << ": report written to " << b_out_dir << "\n";
        return 0;
    }

    return 0;
}
