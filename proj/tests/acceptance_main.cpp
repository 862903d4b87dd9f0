// Acceptance suite: six end-to-end criteria, each printing one PASS/FAIL/SKIP
// line. Run as `kbfg_acceptance <n>` for one criterion or `kbfg_acceptance all`.
// Criteria needing the fetched public datasets (2 and 3) skip with an
// explanation when the data directory is not populated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "evaluation.hpp"
#include "runconfig.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace kbfg;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

struct Check {
    bool ok;
    std::string text;
};

Outcome summarize(const std::vector<Check>& checks, double seconds, double budget_seconds) {
    Outcome o;
    std::ostringstream os;
    bool all_ok = true;
    for (const auto& c : checks) {
        if (!c.ok) all_ok = false;
        os << (c.ok ? "[ok] " : "[FAILED] ") << c.text << "; ";
    }
    os << "elapsed " << static_cast<int>(seconds) << "s (budget " << static_cast<int>(budget_seconds)
       << "s)";
    if (seconds >= budget_seconds) all_ok = false;
    o.status = all_ok ? Status::Pass : Status::Fail;
    o.detail = os.str();
    return o;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}

bool readable(const std::string& path) { return std::ifstream(path).good(); }

// ---------------------------------------------------------------------------
// 1. planted-feature recovery on the synthetic XOR task
// ---------------------------------------------------------------------------

Outcome criterion1() {
    auto start = std::chrono::steady_clock::now();
    auto fgt = synth::make_xor_fgt(500, 500, 6, 2, 0.05, 1000);

    ProtocolConfig cfg;
    cfg.folds = 10;
    cfg.alpha = 0.25;
    cfg.primary_specs = {LearnerSpec::decision_tree()};
    cfg.generation.secondary = LearnerSpec::random_forest(50, 1);
    cfg.seed = 0;
    cfg.jobs = 1;  // the runtime budget assumes a single thread

    auto report = run_protocol(fgt.train, {{fgt.aux, MatchStrategy::exact(), "aux"}}, cfg);
    const auto& l = report.learners.at(0);
    int positive = 0;
    for (const auto& f : l.folds) positive += f.enhanced > f.baseline ? 1 : 0;

    std::vector<Check> checks;
    {
        std::ostringstream t;
        t << "mean delta " << l.delta << " >= 0.15";
        checks.push_back({l.delta >= 0.15, t.str()});
    }
    {
        std::ostringstream t;
        t << "positive folds " << positive << "/10 >= 8";
        checks.push_back({positive >= 8, t.str()});
    }
    {
        std::ostringstream t;
        t << "paired-t p " << l.ttest.p << " < 0.05";
        checks.push_back({l.ttest.p < 0.05, t.str()});
    }
    return summarize(checks, elapsed_seconds(start), 60);
}

// ---------------------------------------------------------------------------
// 2. Pima / Breast Cancer directional reproduction
// ---------------------------------------------------------------------------

Outcome criterion2() {
    auto start = std::chrono::steady_clock::now();
    const std::string data_dir = env_or("KBFG_DATA_DIR", "data");
    const std::string bench_dir = env_or("KBFG_BENCH_DIR", "bench");
    const std::string pima = data_dir + "/pima.csv";
    const std::string coimbra = data_dir + "/breast_coimbra.csv";
    if (!readable(pima) || !readable(coimbra)) {
        return {Status::Skip,
                "datasets not fetched (" + pima + "); run scripts/fetch_data.sh " + data_dir};
    }

    Dataset train = parse_dataset(pima, bench_dir + "/schemas/pima.schema").normalized();
    Dataset aux =
        parse_dataset(coimbra, bench_dir + "/schemas/breast_coimbra.schema").normalized();
    MatchStrategy strategy = MatchStrategy::manual(bench_dir + "/pima_breast.match");

    std::vector<Check> sanity;
    sanity.push_back({train.row_count() == 768 && train.feature_count() == 8,
                      "pima loads as 768 rows x 8 features + outcome"});
    {
        std::vector<std::string> four{"Glucose", "Insulin", "BMI", "Age"};
        Dataset sub = train.project(four);
        sanity.push_back({sub.feature_count() == 4 && sub.row_count() == 768,
                          "projection to the 4 shared names keeps all rows"});
    }
    {
        auto matching = match_features(train, aux, strategy);
        sanity.push_back({matching.pairs.size() == 4 && matching.unmatched_aux.size() == 5,
                          "manual table yields 4 matched / 5 aux-only"});
    }

    std::vector<double> deltas;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        ProtocolConfig cfg;
        cfg.folds = 10;
        cfg.alpha = 0.25;
        cfg.primary_specs = {LearnerSpec::decision_tree(true)};
        cfg.generation.secondary = LearnerSpec::random_forest(50, 1);
        cfg.seed = seed;
        cfg.jobs = 2;
        auto report = run_protocol(train, {{aux, strategy, "breast_cancer"}}, cfg);
        deltas.push_back(report.learners.at(0).delta);
    }
    double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();

    std::vector<Check> checks = std::move(sanity);
    std::ostringstream t;
    t << "mean delta over 5 seeds " << mean
      << " > 0 (reference only: the original table reports 0.751 -> 0.828)";
    checks.push_back({mean > 0.0, t.str()});
    return summarize(checks, elapsed_seconds(start), 300);
}

// ---------------------------------------------------------------------------
// 3. SPECTF / QSAR self-split sanity
// ---------------------------------------------------------------------------

Outcome criterion3() {
    auto start = std::chrono::steady_clock::now();
    const std::string data_dir = env_or("KBFG_DATA_DIR", "data");
    const std::string bench_dir = env_or("KBFG_BENCH_DIR", "bench");

    struct Entry {
        const char* csv;
        const char* schema;
        double expected_shared;
    };
    const Entry entries[] = {
        {"spectf.csv", "spectf.schema", 18.0},
        {"qsar.csv", "qsar.schema", 17.0},
    };
    for (const auto& e : entries)
        if (!readable(data_dir + "/" + e.csv))
            return {Status::Skip, "datasets not fetched (" + data_dir + "/" + e.csv +
                                      "); run scripts/fetch_data.sh " + data_dir};

    std::vector<Check> checks;
    int datasets_with_nonneg_delta = 0;
    for (const auto& e : entries) {
        Dataset source = parse_dataset(data_dir + "/" + e.csv,
                                       bench_dir + "/schemas/" + e.schema);
        std::vector<double> deltas;
        double shared = 0, aux_rows = 0;
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            FgtSplitSpec spec;
            spec.seed = seed;
            FgtSplit split = split_fgt(source, spec);
            auto matching = match_features(split.train, split.aux, MatchStrategy::exact());
            shared += static_cast<double>(matching.pairs.size());
            aux_rows += static_cast<double>(split.aux.row_count());

            ProtocolConfig cfg;
            cfg.folds = 10;
            cfg.alpha = 0.25;
            cfg.primary_specs = {LearnerSpec::decision_tree(true)};
            cfg.generation.secondary = LearnerSpec::random_forest(50, 1);
            cfg.seed = seed;
            cfg.jobs = 2;
            auto report = run_protocol(split.train.normalized(),
                                       {{split.aux.normalized(), MatchStrategy::exact(), "self"}},
                                       cfg);
            deltas.push_back(report.learners.at(0).delta);
        }
        shared /= 5;
        aux_rows /= 5;
        double mean_delta = std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
        if (mean_delta >= 0) ++datasets_with_nonneg_delta;

        {
            std::ostringstream t;
            t << e.csv << " AVG shared " << shared << " within +/-2 of " << e.expected_shared;
            checks.push_back({std::fabs(shared - e.expected_shared) <= 2.0, t.str()});
        }
        {
            double half = static_cast<double>(source.row_count()) / 2.0;
            std::ostringstream t;
            t << e.csv << " aux rows " << aux_rows << " within +/-1 of half (" << half << ")";
            checks.push_back({std::fabs(aux_rows - half) <= 1.0, t.str()});
        }
        {
            std::ostringstream t;
            t << e.csv << " mean delta over 5 seeds " << mean_delta;
            checks.push_back({true, t.str()});  // informational; gate is the joint check below
        }
    }
    {
        std::ostringstream t;
        t << "non-negative mean delta in " << datasets_with_nonneg_delta << "/2 datasets (need >=1)";
        checks.push_back({datasets_with_nonneg_delta >= 1, t.str()});
    }
    return summarize(checks, elapsed_seconds(start), 600);
}

// ---------------------------------------------------------------------------
// 4. multi-auxiliary dominance over single-auxiliary runs
// ---------------------------------------------------------------------------

double enhanced_accuracy(const Dataset& train, const Dataset& test,
                         std::vector<GeneratedFeature> features, size_t cap) {
    if (features.size() > cap) features.resize(cap);
    Dataset enhanced_train = enhance(train, features);
    Dataset enhanced_test = enhance(test, features);
    Predictor model = fit(LearnerSpec::decision_tree(), enhanced_train);
    auto out = model.predict(enhanced_test);
    size_t correct = 0;
    for (size_t r = 0; r < enhanced_test.row_count(); ++r)
        if (out.values[r] == enhanced_test.label().values[r]) ++correct;
    return static_cast<double>(correct) / enhanced_test.row_count();
}

Outcome criterion4() {
    auto start = std::chrono::steady_clock::now();
    int wins = 0;
    std::ostringstream detail;
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto fgt = synth::make_switch_fgt(1000, 500, 8, 3000 + seed);
        std::vector<size_t> head(200), tail(800);
        std::iota(head.begin(), head.end(), 0);
        std::iota(tail.begin(), tail.end(), 200);
        Dataset train = fgt.train.take_rows(head);
        Dataset test = fgt.train.take_rows(tail);

        auto m1 = match_features(train, fgt.aux1, MatchStrategy::exact());
        auto m2 = match_features(train, fgt.aux2, MatchStrategy::exact());
        GenerationConfig cfg;
        cfg.secondary = LearnerSpec::random_forest(25, 1);
        cfg.seed = seed;

        auto single1 = run_kbfg(train, fgt.aux1, m1, cfg, "a1");
        auto single2 = run_kbfg(train, fgt.aux2, m2, cfg, "a2");
        auto star = run_kbfg_star(train, {{fgt.aux1, m1, "a1"}, {fgt.aux2, m2, "a2"}}, cfg);

        const size_t cap = 10;
        double acc1 = enhanced_accuracy(train, test, single1.features, cap);
        double acc2 = enhanced_accuracy(train, test, single2.features, cap);
        double acc_star = enhanced_accuracy(train, test, star.features, cap);
        bool win = acc_star >= acc1 && acc_star >= acc2;
        wins += win ? 1 : 0;
        detail << "seed " << seed << ": star " << acc_star << " vs " << acc1 << "/" << acc2
               << (win ? " (>=)" : " (lost)") << "; ";
    }
    std::vector<Check> checks;
    checks.push_back({wins >= 4, detail.str() + "wins " + std::to_string(wins) + "/5 >= 4"});
    return summarize(checks, elapsed_seconds(start), 120);
}

// ---------------------------------------------------------------------------
// 5. oracle equivalence suites
// ---------------------------------------------------------------------------

Outcome criterion5() {
    auto start = std::chrono::steady_clock::now();
    std::vector<Check> checks;

    {  // information gain vs exhaustive threshold enumeration
        Rng rng(42);
        size_t mismatches = 0;
        for (int iter = 0; iter < 200; ++iter) {
            size_t n = 2 + rng.uniform_index(30);
            int n_classes = 2 + static_cast<int>(rng.uniform_index(3));
            std::vector<double> v(n);
            std::vector<int> y(n);
            for (size_t i = 0; i < n; ++i) {
                v[i] = static_cast<double>(rng.uniform_index(8));
                y[i] = static_cast<int>(rng.uniform_index(static_cast<size_t>(n_classes)));
            }
            std::vector<uint8_t> miss(n, 0);
            double got = information_gain_values(v, miss, FeatureKind::continuous(), y, n_classes);
            double want = oracle::info_gain_continuous(v, y, n_classes);
            if (std::fabs(got - want) >= 1e-12) ++mismatches;
        }
        checks.push_back({mismatches == 0,
                          "information gain vs threshold enumeration on 200 tables (1e-12)"});
    }

    {  // levenshtein vs the full DP matrix
        Rng rng(17);
        size_t mismatches = 0;
        for (int i = 0; i < 500; ++i) {
            std::string a, b;
            size_t la = rng.uniform_index(12), lb = rng.uniform_index(12);
            for (size_t k = 0; k < la; ++k) a.push_back(static_cast<char>('a' + rng.uniform_index(6)));
            for (size_t k = 0; k < lb; ++k) b.push_back(static_cast<char>('a' + rng.uniform_index(6)));
            if (levenshtein(a, b) != oracle::levenshtein_full_dp(a, b)) ++mismatches;
        }
        checks.push_back({mismatches == 0, "levenshtein vs full DP matrix on 500 pairs (exact)"});
    }

    {  // paired t-test vs pre-tabulated quadrature references, df = k-1
        struct Ref {
            double df, t, p;
        };
        const Ref refs[] = {
            {1, 0.6, 0.655958260754739},   {1, 1.3, 0.417428800320305},
            {1, 2.2, 0.271599497560184},   {4, 0.6, 0.580841157751845},
            {4, 1.3, 0.263451596471224},   {4, 2.2, 0.0926526701796346},
            {9, 0.6, 0.563306071902933},   {9, 1.3, 0.225906372673049},
            {9, 2.2, 0.0553405727986116},  {29, 0.6, 0.553166162721121},
            {29, 1.3, 0.203839183662032},  {29, 2.2, 0.0359267591506853},
        };
        double worst = 0;
        for (const auto& r : refs)
            worst = std::max(worst, std::fabs(student_t_two_sided_p(r.t, r.df) - r.p));
        std::ostringstream t;
        t << "t-test p vs references at k in {2,5,10,30}: worst |dp| " << worst << " < 1e-6";
        checks.push_back({worst < 1e-6, t.str()});
    }

    {  // KS statistic vs the naive CDF-sup computation
        Rng rng(31);
        size_t mismatches = 0;
        for (int iter = 0; iter < 200; ++iter) {
            size_t na = 1 + rng.uniform_index(25), nb = 1 + rng.uniform_index(25);
            std::vector<double> a(na), b(nb);
            for (auto& x : a) x = static_cast<double>(rng.uniform_index(12));
            for (auto& x : b) x = static_cast<double>(rng.uniform_index(12));
            std::vector<uint8_t> ma(na, 0), mb(nb, 0);
            Column ca{{"a", FeatureKind::continuous(), ""}, a, ma};
            Column cb{{"b", FeatureKind::continuous(), ""}, b, mb};
            if (std::fabs(distribution_distance(ca, cb) - oracle::ks_statistic(a, b)) > 0)
                ++mismatches;
        }
        checks.push_back({mismatches == 0, "KS statistic vs direct CDF-sup (exact)"});
    }
    return summarize(checks, elapsed_seconds(start), 30);
}

// ---------------------------------------------------------------------------
// 6. invariant suites
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool dirs_equal(const fs::path& a, const fs::path& b, std::string& why) {
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
    if (names_a != names_b) {
        why = "file lists differ";
        return false;
    }
    for (const auto& n : names_a) {
        if (slurp((a / n).string()) != slurp((b / n).string())) {
            why = "byte difference in " + n;
            return false;
        }
    }
    return true;
}

Outcome criterion6() {
    auto start = std::chrono::steady_clock::now();
    std::vector<Check> checks;

    const fs::path work = fs::temp_directory_path() / "kbfg_acceptance6";
    fs::remove_all(work);
    fs::create_directories(work);

    // a synthetic run driven through the config layer
    auto fgt = synth::make_xor_fgt(200, 300, 4, 1, 0.05, 77);
    serialize_dataset(fgt.train, (work / "train.csv").string(), (work / "train.schema").string());
    serialize_dataset(fgt.aux, (work / "aux.csv").string(), (work / "aux.schema").string());
    {
        ordered_json j;
        j["train"] = {{"data", (work / "train.csv").string()},
                      {"schema", (work / "train.schema").string()}};
        j["auxiliaries"] = ordered_json::array();
        ordered_json ja;
        ja["id"] = "aux";
        ja["data"] = (work / "aux.csv").string();
        ja["schema"] = (work / "aux.schema").string();
        ja["strategy"] = {{"kind", "exact"}};
        j["auxiliaries"].push_back(ja);
        j["normalize"] = true;
        j["generation"] = {{"secondary", learner_spec_to_json(LearnerSpec::random_forest(25, 1))},
                           {"wrapper_folds", 5},
                           {"seed", 9}};
        j["output_prefix"] = "inv";
        atomic_write((work / "config.json").string(), j.dump(2));
    }

    std::vector<std::string> errors;
    RunConfig cfg = load_run_config((work / "config.json").string(), errors);
    if (!errors.empty()) {
        return {Status::Fail, "config setup failed: " + errors.front()};
    }

    // wrapper acceptance strictness: every manifest utility > 0
    run_generate(cfg, (work / "r1").string(), 1);
    {
        ordered_json features = ordered_json::parse(slurp((work / "r1/inv.features.json").string()));
        bool any = false, all_positive = true;
        for (const auto& f : features.at("features")) {
            any = true;
            if (!(f.at("utility_at_acceptance").get<double>() > 0.0)) all_positive = false;
        }
        checks.push_back({any && all_positive,
                          "wrapper strictness: accepted features exist and every utility > 0"});
    }

    // determinism: byte-identical rerun and jobs=4 vs jobs=1
    run_generate(cfg, (work / "r2").string(), 1);
    run_generate(cfg, (work / "r4").string(), 4);
    {
        std::string why;
        bool same12 = dirs_equal(work / "r1", work / "r2", why);
        checks.push_back({same12, "determinism: identical reruns byte-equal " +
                                      (same12 ? "" : ("(" + why + ")"))});
        std::string why4;
        bool same14 = dirs_equal(work / "r1", work / "r4", why4);
        checks.push_back({same14, "determinism: --jobs 4 equals --jobs 1 " +
                                      (same14 ? "" : ("(" + why4 + ")"))});
    }

    // the CLI drives the same code path; exercise it when available
    if (const char* cli = std::getenv("KBFG_CLI")) {
        std::string cmd = std::string("'") + cli + "' generate --config '" +
                          (work / "config.json").string() + "' --out-dir '" +
                          (work / "rcli").string() + "' --jobs 4 >/dev/null";
        int rc = std::system(cmd.c_str());
        std::string why;
        bool same = rc == 0 && dirs_equal(work / "r1", work / "rcli", why);
        checks.push_back({same, "determinism: CLI run equals the library run"});
    }

    // split_fgt partition properties
    {
        const size_t n = 57;
        std::vector<ColumnPtr> cols;
        for (size_t f = 0; f < 9; ++f) {
            std::vector<double> v(n);
            for (size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
            cols.push_back(synth::num_col("f" + std::to_string(f), std::move(v)));
        }
        std::vector<double> y(n);
        for (size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2);
        std::vector<uint8_t> m(n, 0);
        Dataset d = Dataset::make(std::move(cols),
                                  make_column({"cls", FeatureKind::nominal({"0", "1"}), ""}, y, m));
        bool ok = true;
        for (uint64_t seed = 0; seed < 10 && ok; ++seed) {
            FgtSplitSpec spec;
            spec.seed = seed;
            auto split = split_fgt(d, spec);
            std::multiset<double> rows;
            for (double v : split.train.column(0).values) rows.insert(v);
            for (double v : split.aux.column(0).values) rows.insert(v);
            ok = ok && rows.size() == n;
            std::multiset<double> expect;
            for (size_t i = 0; i < n; ++i) expect.insert(static_cast<double>(i));
            ok = ok && rows == expect;
            ok = ok && (split.train.row_count() == 29 && split.aux.row_count() == 28);
            std::set<std::string> aux_names;
            for (const auto& nm : split.aux.feature_names()) aux_names.insert(nm);
            size_t shared = 0;
            for (const auto& nm : split.train.feature_names()) shared += aux_names.count(nm);
            ok = ok && shared == 3;  // round-half-up(9/3)
        }
        checks.push_back({ok, "split_fgt partition properties over 10 seeds"});
    }

    // matching monotonicity under threshold tightening
    {
        Rng rng(4);
        bool ok = true;
        for (int iter = 0; iter < 10 && ok; ++iter) {
            std::vector<ColumnPtr> tcols, acols;
            for (size_t i = 0; i < 4; ++i) {
                std::string w;
                for (size_t k = 0; k < 2 + rng.uniform_index(6); ++k)
                    w.push_back(static_cast<char>('a' + rng.uniform_index(5)));
                tcols.push_back(synth::num_col(w + std::to_string(i), {1, 2}));
            }
            for (size_t i = 0; i < 4; ++i) {
                std::string w;
                for (size_t k = 0; k < 2 + rng.uniform_index(6); ++k)
                    w.push_back(static_cast<char>('a' + rng.uniform_index(5)));
                acols.push_back(synth::num_col(w + "_" + std::to_string(i), {1, 2}));
            }
            Dataset train = Dataset::make(std::move(tcols), nullptr);
            Dataset aux = Dataset::make(std::move(acols), nullptr);
            size_t prev = SIZE_MAX;
            for (double thr : {0.8, 0.5, 0.25, 0.1, 0.0}) {
                auto m = match_features(train, aux, MatchStrategy::fuzzy(thr));
                if (m.pairs.size() > prev) ok = false;
                prev = m.pairs.size();
            }
        }
        checks.push_back({ok, "matching monotonicity under threshold tightening"});
    }

    // information gain bounds: 0 <= IG <= H(y)
    {
        Rng rng(7);
        bool ok = true;
        for (int iter = 0; iter < 200 && ok; ++iter) {
            size_t n = 2 + rng.uniform_index(40);
            int n_classes = 2 + static_cast<int>(rng.uniform_index(3));
            std::vector<double> v(n);
            std::vector<int> y(n);
            std::vector<uint8_t> miss(n, 0);
            for (size_t i = 0; i < n; ++i) {
                v[i] = rng.uniform01();
                y[i] = static_cast<int>(rng.uniform_index(static_cast<size_t>(n_classes)));
                miss[i] = rng.uniform_index(8) == 0 ? 1 : 0;
            }
            double ig = information_gain_values(v, miss, FeatureKind::continuous(), y, n_classes);
            double h = oracle::entropy_bits(y, n_classes);
            if (!(ig >= 0.0 && ig <= h + 1e-12)) ok = false;
        }
        checks.push_back({ok, "0 <= IG <= H(y) on 200 random tables"});
    }

    fs::remove_all(work);
    return summarize(checks, elapsed_seconds(start), 60);
}

}  // namespace

int main(int argc, char** argv) {
    std::string which = argc > 1 ? argv[1] : "all";
    struct Entry {
        int id;
        Outcome (*fn)();
        const char* title;
    };
    const Entry entries[] = {
        {1, criterion1, "planted-feature recovery (synthetic XOR protocol)"},
        {2, criterion2, "Pima/Breast-Cancer directional reproduction"},
        {3, criterion3, "SPECTF/QSAR self-split sanity"},
        {4, criterion4, "multi-auxiliary dominance"},
        {5, criterion5, "oracle equivalence suites"},
        {6, criterion6, "invariant suites"},
    };

    bool any_fail = false;
    bool all_skipped = true;
    bool matched = false;
    for (const auto& e : entries) {
        if (which != "all" && which != std::to_string(e.id)) continue;
        matched = true;
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o = {Status::Fail, std::string("exception: ") + ex.what()};
        }
        const char* label = o.status == Status::Pass ? "PASS"
                            : o.status == Status::Fail ? "FAIL"
                                                       : "SKIP";
        std::cout << "CRITERION " << e.id << " (" << e.title << "): " << label << " — "
                  << o.detail << "\n";
        if (o.status == Status::Fail) any_fail = true;
        if (o.status != Status::Skip) all_skipped = false;
    }
    if (!matched) {
        std::cerr << "usage: kbfg_acceptance [1-6|all]\n";
        return 2;
    }
    if (any_fail) return 1;
    if (all_skipped) return 77;  // ctest skip code
    return 0;
}
