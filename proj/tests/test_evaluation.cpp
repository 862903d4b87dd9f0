#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "evaluation.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace kbfg;

TEST_CASE("paired t-test: trivial and degenerate cases") {
    std::vector<double> a{0.5, 0.6, 0.7};
    SUBCASE("equal vectors give t=0, p=1") {
        auto r = paired_t_test(a, a);
        CHECK(r.t == 0.0);
        CHECK(r.p == 1.0);
    }
    SUBCASE("zero variance, nonzero mean hits the sentinel") {
        std::vector<double> b{0.4, 0.5, 0.6};  // differences all 0.1
        auto r = paired_t_test(a, b);
        CHECK(r.t == 1e15);
        CHECK(r.p < 1e-12);
        auto rneg = paired_t_test(b, a);
        CHECK(rneg.t == -1e15);
    }
    SUBCASE("length mismatch") {
        std::vector<double> b{0.1};
        CHECK_THROWS_AS(paired_t_test(a, b), Error);
    }
    SUBCASE("antisymmetry") {
        std::vector<double> b{0.41, 0.66, 0.59};
        auto r1 = paired_t_test(a, b);
        auto r2 = paired_t_test(b, a);
        CHECK(r1.t == doctest::Approx(-r2.t));
        CHECK(r1.p == doctest::Approx(r2.p));
    }
}

TEST_CASE("paired t-test: differences 0.3/0.1/0.2/0.4/0.0 against the quadrature oracle") {
    std::vector<double> b{0.5, 0.5, 0.5, 0.5, 0.5};
    std::vector<double> a{0.8, 0.6, 0.7, 0.9, 0.5};
    auto r = paired_t_test(a, b);
    // analytic t: mean 0.2, sd sqrt(0.025), k=5
    CHECK(r.t == doctest::Approx(0.2 / std::sqrt(0.025 / 5)).epsilon(1e-12));
    double oracle_p = oracle::t_two_sided_p(r.t, 4);
    CHECK(std::fabs(r.p - oracle_p) < 1e-9);
    CHECK(r.p == doctest::Approx(0.0473414).epsilon(1e-4));
}

TEST_CASE("student t p-values match quadrature and closed forms at k in {2,5,10,30}") {
    // df = 1: p = 1 - 2*atan(t)/pi ; df = 2: p = 1 - t/sqrt(2+t^2)
    CHECK(student_t_two_sided_p(2.0, 1) ==
          doctest::Approx(1 - 2 * std::atan(2.0) / M_PI).epsilon(1e-12));
    CHECK(student_t_two_sided_p(1.5, 2) ==
          doctest::Approx(1 - 1.5 / std::sqrt(2 + 1.5 * 1.5)).epsilon(1e-12));
    for (double df : {1.0, 4.0, 9.0, 29.0}) {
        for (double t : {0.2, 0.751, 1.3, 2.05, 3.7}) {
            double got = student_t_two_sided_p(t, df);
            double want = oracle::t_two_sided_p(t, df);
            CHECK(std::fabs(got - want) < 1e-6);
            CHECK(got == doctest::Approx(student_t_two_sided_p(-t, df)));
        }
    }
}

TEST_CASE("incomplete beta sanity") {
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(1,1) = x
    CHECK(incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    // symmetry: I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(incomplete_beta(2.5, 4.0, 0.3) ==
          doctest::Approx(1 - incomplete_beta(4.0, 2.5, 0.7)).epsilon(1e-10));
}

namespace {

Dataset wide_labeled(size_t rows, size_t feats, uint64_t seed) {
    synth::Rng rng(seed);
    std::vector<kbfg::ColumnPtr> cols;
    for (size_t f = 0; f < feats; ++f) {
        std::vector<double> v(rows);
        for (auto& x : v) x = rng.uniform01();
        cols.push_back(synth::num_col("f" + std::to_string(f), std::move(v)));
    }
    std::vector<double> y(rows);
    for (size_t i = 0; i < rows; ++i) y[i] = static_cast<double>(i % 2);
    std::vector<uint8_t> m(rows, 0);
    return Dataset::make(std::move(cols),
                         make_column({"cls", FeatureKind::nominal({"0", "1"}), ""}, y, m));
}

}  // namespace

TEST_CASE("split_fgt: 12 features with defaults gives 4 shared, 5 train-only, 3 aux-only") {
    Dataset d = wide_labeled(40, 12, 5);
    FgtSplitSpec spec;
    spec.seed = 9;
    auto split = split_fgt(d, spec);
    CHECK(split.train.feature_count() == 9);  // 5 + 4 shared
    CHECK(split.aux.feature_count() == 7);    // 3 + 4 shared
    CHECK(split.train.labeled());
    CHECK(split.aux.labeled());
    CHECK(split.train.row_count() == 20);
    CHECK(split.aux.row_count() == 20);

    std::set<std::string> train_names, aux_names, shared;
    for (const auto& n : split.train.feature_names()) train_names.insert(n);
    for (const auto& n : split.aux.feature_names()) aux_names.insert(n);
    for (const auto& n : train_names)
        if (aux_names.count(n)) shared.insert(n);
    CHECK(shared.size() == 4);
}

TEST_CASE("split_fgt: rows partition exactly and deterministically") {
    // every column carries the row index so each half reveals its rows
    const size_t n = 41;
    std::vector<kbfg::ColumnPtr> cols;
    for (size_t f = 0; f < 6; ++f) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
        cols.push_back(synth::num_col("f" + std::to_string(f), std::move(v)));
    }
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2);
    std::vector<uint8_t> m(n, 0);
    Dataset d = Dataset::make(std::move(cols),
                              make_column({"cls", FeatureKind::nominal({"0", "1"}), ""}, y, m));

    FgtSplitSpec spec;
    spec.seed = 3;
    auto s1 = split_fgt(d, spec);
    auto s2 = split_fgt(d, spec);
    CHECK(s1.train.row_count() == 21);
    CHECK(s1.aux.row_count() == 20);
    CHECK(s1.train.same_content(s2.train));
    CHECK(s1.aux.same_content(s2.aux));

    std::multiset<double> seen;
    for (const auto& part : {s1.train, s1.aux})
        for (double v : part.column(0).values) seen.insert(v);
    std::multiset<double> all;
    for (size_t i = 0; i < n; ++i) all.insert(static_cast<double>(i));
    CHECK(seen == all);
}

TEST_CASE("split_fgt: 44-feature dataset shares round(44/3) = 15 features") {
    Dataset d = wide_labeled(24, 44, 13);
    FgtSplitSpec spec;
    auto split = split_fgt(d, spec);
    std::set<std::string> aux_names;
    for (const auto& n : split.aux.feature_names()) aux_names.insert(n);
    size_t shared = 0;
    for (const auto& n : split.train.feature_names()) shared += aux_names.count(n);
    CHECK(shared == 15);
    CHECK(split.train.feature_count() == 15 + round_half_up(2.0 / 3 * 29));
}

TEST_CASE("split_fgt error paths") {
    FgtSplitSpec spec;
    CHECK_THROWS_AS(split_fgt(wide_labeled(2, 6, 1), spec), Error);  // too few rows
    CHECK_THROWS_AS(split_fgt(wide_labeled(10, 2, 1), spec), Error); // too few features
    FgtSplitSpec bad;
    bad.mu1 = 1.0;
    CHECK_THROWS_AS(split_fgt(wide_labeled(10, 6, 1), bad), Error);
}

TEST_CASE("run_protocol: alpha=1, no auxiliaries -> enhanced equals baseline exactly") {
    Dataset d = wide_labeled(60, 4, 21);
    ProtocolConfig cfg;
    cfg.folds = 5;
    cfg.alpha = 1.0;
    cfg.primary_specs = {LearnerSpec::decision_tree()};
    cfg.seed = 2;
    auto report = run_protocol(d, {}, cfg);
    REQUIRE(report.learners.size() == 1);
    const auto& l = report.learners[0];
    CHECK(l.delta == 0.0);
    CHECK(l.ttest.t == 0.0);
    CHECK(l.ttest.p == 1.0);
    CHECK_FALSE(l.significant);
    for (const auto& f : l.folds) {
        CHECK(f.baseline == f.enhanced);
        CHECK(f.accepted.empty());
    }
}

TEST_CASE("run_protocol: planted XOR auxiliary lifts accuracy in most folds") {
    auto fgt = synth::make_xor_fgt(220, 300, 5, 2, 0.05, 63);
    ProtocolConfig cfg;
    cfg.folds = 5;
    cfg.alpha = 0.5;
    cfg.primary_specs = {LearnerSpec::decision_tree()};
    cfg.generation.secondary = LearnerSpec::random_forest(25, 1);
    cfg.seed = 8;
    auto report = run_protocol(fgt.train, {{fgt.aux, MatchStrategy::exact(), "aux"}}, cfg);
    REQUIRE(report.learners.size() == 1);
    const auto& l = report.learners[0];
    CHECK(l.delta > 0.0);
    int positive = 0;
    for (const auto& f : l.folds) {
        positive += f.enhanced > f.baseline ? 1 : 0;
        for (const auto& a : f.accepted) CHECK(a.utility > 0.0);
    }
    CHECK(positive >= 3);

    REQUIRE(report.aux_stats.size() == 1);
    CHECK(report.aux_stats[0].avg_intersection == 2.0);  // x1 and x2
    CHECK(report.aux_stats[0].avg_aux_only == 3.0);   // two junk targets plus h
}

TEST_CASE("run_protocol: baseline accuracies reproducible from the published row selections") {
    Dataset d = wide_labeled(80, 4, 31);
    ProtocolConfig cfg;
    cfg.folds = 4;
    cfg.alpha = 0.5;
    cfg.primary_specs = {LearnerSpec::decision_tree()};
    cfg.seed = 17;
    auto report = run_protocol(d, {}, cfg);

    auto rows = protocol_fold_rows(d, cfg.folds, cfg.alpha, cfg.seed);
    for (size_t f = 0; f < rows.size(); ++f) {
        Dataset reduced = d.take_rows(rows[f].reduced_train_rows);
        Dataset test = d.take_rows(rows[f].test_rows);
        Predictor m = fit(LearnerSpec::decision_tree(), reduced);
        auto out = m.predict(test);
        size_t correct = 0;
        for (size_t r = 0; r < test.row_count(); ++r)
            if (out.values[r] == test.label().values[r]) ++correct;
        double acc = static_cast<double>(correct) / test.row_count();
        CHECK(acc == report.learners[0].folds[f].baseline);
    }
}

TEST_CASE("run_protocol: a fold losing a whole class is a stratification failure") {
    // one singleton class: some fold's training side must lose it entirely
    std::vector<double> x(10), y(10, 0);
    for (size_t i = 0; i < 10; ++i) x[i] = static_cast<double>(i);
    y[3] = 1;
    std::vector<uint8_t> m(10, 0);
    Dataset d = Dataset::make(
        {synth::num_col("x", x)},
        make_column({"cls", FeatureKind::nominal({"0", "1"}), ""}, y, m));
    CHECK_THROWS_WITH_AS(protocol_fold_rows(d, 5, 1.0, 1),
                         doctest::Contains("stratification failure"), Error);

    // a declared-but-absent category is fine
    std::vector<double> y2(10);
    for (size_t i = 0; i < 10; ++i) y2[i] = static_cast<double>(i % 2);
    Dataset d2 = Dataset::make(
        {synth::num_col("x", x)},
        make_column({"cls", FeatureKind::nominal({"0", "1", "ghost"}), ""}, y2, m));
    CHECK(protocol_fold_rows(d2, 5, 1.0, 1).size() == 5);
}

TEST_CASE("run_protocol: fold partition covers every row exactly once") {
    Dataset d = wide_labeled(53, 3, 41);
    auto rows = protocol_fold_rows(d, 7, 0.25, 5);
    std::vector<int> seen(d.row_count(), 0);
    for (const auto& fr : rows) {
        for (size_t r : fr.test_rows) ++seen[r];
        for (size_t r : fr.reduced_train_rows) {
            bool in_test = false;
            for (size_t t : fr.test_rows) in_test |= t == r;
            CHECK_FALSE(in_test);
        }
    }
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("run_protocol: curve output starts at the baseline") {
    auto fgt = synth::make_xor_fgt(150, 200, 3, 0, 0.0, 91);
    ProtocolConfig cfg;
    cfg.folds = 3;
    cfg.alpha = 1.0;
    cfg.primary_specs = {LearnerSpec::decision_tree()};
    cfg.generation.secondary = LearnerSpec::random_forest(15, 2);
    cfg.emit_curve = true;
    cfg.curve_group = 5;
    cfg.seed = 4;
    auto report = run_protocol(fgt.train, {{fgt.aux, MatchStrategy::exact(), "aux"}}, cfg);
    for (const auto& f : report.learners[0].folds) {
        REQUIRE(!f.curve.empty());
        CHECK(f.curve.front() == f.baseline);
        if (!f.accepted.empty()) CHECK(f.curve.back() == f.enhanced);
    }
}

TEST_CASE("run_protocol is deterministic") {
    auto fgt = synth::make_xor_fgt(120, 150, 3, 1, 0.05, 101);
    ProtocolConfig cfg;
    cfg.folds = 4;
    cfg.alpha = 0.5;
    cfg.primary_specs = {LearnerSpec::decision_tree(), LearnerSpec::knn(3)};
    cfg.generation.secondary = LearnerSpec::random_forest(10, 5);
    cfg.seed = 33;
    auto r1 = run_protocol(fgt.train, {{fgt.aux, MatchStrategy::exact(), "aux"}}, cfg);
    auto r2 = run_protocol(fgt.train, {{fgt.aux, MatchStrategy::exact(), "aux"}}, cfg);
    REQUIRE(r1.learners.size() == r2.learners.size());
    for (size_t l = 0; l < r1.learners.size(); ++l) {
        CHECK(r1.learners[l].delta == r2.learners[l].delta);
        CHECK(r1.learners[l].ttest.p == r2.learners[l].ttest.p);
        for (size_t f = 0; f < r1.learners[l].folds.size(); ++f) {
            CHECK(r1.learners[l].folds[f].baseline == r2.learners[l].folds[f].baseline);
            CHECK(r1.learners[l].folds[f].enhanced == r2.learners[l].folds[f].enhanced);
        }
    }
    std::string text = report_to_text(r1);
    CHECK(text == report_to_text(r2));
    CHECK(text.find("learner results") != std::string::npos);
}
