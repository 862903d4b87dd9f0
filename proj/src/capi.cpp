#include "kbfg.h"

#include "runconfig.hpp"

using namespace kbfg;

struct kbfg_dataset {
    Dataset data;
};

struct kbfg_matching {
    FeatureMatching matching;
};

namespace {

thread_local std::string t_last_error;

kbfg_status classify_error(const std::string& message) {
    if (message.find("cannot open") != std::string::npos ||
        message.find("cannot write") != std::string::npos ||
        message.find("write failed") != std::string::npos ||
        message.find("cannot rename") != std::string::npos ||
        message.find("cannot finalize") != std::string::npos)
        return KBFG_ERROR_IO;
    if (message.find("row ") != std::string::npos ||
        message.find("unterminated") != std::string::npos ||
        message.find("not declared") != std::string::npos)
        return KBFG_ERROR_PARSE;
    return KBFG_ERROR_INVALID;
}

template <typename Fn>
kbfg_status guarded(Fn&& fn) {
    try {
        fn();
        return KBFG_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return classify_error(t_last_error);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return KBFG_ERROR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return KBFG_ERROR_INTERNAL;
    }
}

kbfg_status invalid_argument(const char* message) {
    t_last_error = message;
    return KBFG_ERROR_INVALID;
}

}  // namespace

extern "C" {

const char* kbfg_version(void) { return kVersion; }

const char* kbfg_last_error(void) { return t_last_error.c_str(); }

kbfg_status kbfg_dataset_open(const char* data_path, const char* schema_path,
                              kbfg_dataset** out) {
    if (!data_path || !schema_path || !out) return invalid_argument("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new kbfg_dataset{parse_dataset(data_path, schema_path)};
        *out = handle;
    });
}

void kbfg_dataset_close(kbfg_dataset* d) { delete d; }

size_t kbfg_dataset_rows(const kbfg_dataset* d) { return d ? d->data.row_count() : 0; }

size_t kbfg_dataset_features(const kbfg_dataset* d) { return d ? d->data.feature_count() : 0; }

int kbfg_dataset_labeled(const kbfg_dataset* d) { return d && d->data.labeled() ? 1 : 0; }

kbfg_status kbfg_dataset_save(const kbfg_dataset* d, const char* data_path,
                              const char* schema_path) {
    if (!d || !data_path || !schema_path) return invalid_argument("null argument");
    return guarded([&] { serialize_dataset(d->data, data_path, schema_path); });
}

kbfg_status kbfg_dataset_normalize(const kbfg_dataset* d, kbfg_dataset** out) {
    if (!d || !out) return invalid_argument("null argument");
    *out = nullptr;
    return guarded([&] { *out = new kbfg_dataset{d->data.normalized()}; });
}

kbfg_status kbfg_match(const kbfg_dataset* train, const kbfg_dataset* aux,
                       const char* strategy_json, kbfg_matching** out) {
    if (!train || !aux || !strategy_json || !out) return invalid_argument("null argument");
    *out = nullptr;
    return guarded([&] {
        ordered_json j = ordered_json::parse(strategy_json);
        MatchStrategy strategy = match_strategy_from_json(j);
        *out = new kbfg_matching{match_features(train->data, aux->data, strategy)};
    });
}

void kbfg_matching_close(kbfg_matching* m) { delete m; }

size_t kbfg_matching_pair_count(const kbfg_matching* m) {
    return m ? m->matching.pairs.size() : 0;
}

size_t kbfg_matching_aux_only_count(const kbfg_matching* m) {
    return m ? m->matching.unmatched_aux.size() : 0;
}

kbfg_status kbfg_matching_pair(const kbfg_matching* m, size_t index, const char** train_name,
                               const char** aux_name, double* score) {
    if (!m) return invalid_argument("null matching");
    if (index >= m->matching.pairs.size()) return invalid_argument("pair index out of range");
    const MatchPair& p = m->matching.pairs[index];
    if (train_name) *train_name = p.train_name.c_str();
    if (aux_name) *aux_name = p.aux_name.c_str();
    if (score) *score = p.score;
    return KBFG_OK;
}

kbfg_status kbfg_matching_save(const kbfg_matching* m, const char* path) {
    if (!m || !path) return invalid_argument("null argument");
    return guarded([&] { save_matching(m->matching, path); });
}

kbfg_status kbfg_split_fgt(const kbfg_dataset* d, double mu1, double mu2, uint64_t seed,
                           kbfg_dataset** train_out, kbfg_dataset** aux_out) {
    if (!d || !train_out || !aux_out) return invalid_argument("null argument");
    *train_out = nullptr;
    *aux_out = nullptr;
    return guarded([&] {
        FgtSplitSpec spec;
        spec.mu1 = mu1;
        spec.mu2 = mu2;
        spec.seed = seed;
        FgtSplit split = split_fgt(d->data, spec);
        *train_out = new kbfg_dataset{std::move(split.train)};
        *aux_out = new kbfg_dataset{std::move(split.aux)};
    });
}

namespace {

kbfg_status run_from_config(const char* config_path, const char* out_dir, int jobs,
                            bool evaluate) {
    if (!config_path || !out_dir) return invalid_argument("null argument");
    return guarded([&] {
        std::vector<std::string> errors;
        RunConfig cfg = load_run_config(config_path, errors);
        if (evaluate && errors.empty() && !cfg.protocol)
            errors.push_back("config: evaluate runs need a 'protocol' section");
        if (!errors.empty()) {
            std::string joined = "configuration invalid:";
            for (const auto& e : errors) joined += "\n  - " + e;
            fail(joined);
        }
        if (evaluate) run_evaluate(cfg, out_dir, jobs);
        else run_generate(cfg, out_dir, jobs);
    });
}

}  // namespace

kbfg_status kbfg_run_generate(const char* config_path, const char* out_dir, int jobs) {
    return run_from_config(config_path, out_dir, jobs, false);
}

kbfg_status kbfg_run_evaluate(const char* config_path, const char* out_dir, int jobs) {
    return run_from_config(config_path, out_dir, jobs, true);
}

}  // extern "C"
