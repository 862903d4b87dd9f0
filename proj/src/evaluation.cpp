#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace kbfg {

// --- split ---------------------------------------------------------------------

void FgtSplitSpec::validate() const {
    if (mu1 <= 0 || mu1 >= 1) fail("mu1 must be in (0,1)");
    if (mu2 <= 0 || mu2 >= 1) fail("mu2 must be in (0,1)");
}

FgtSplit split_fgt(const Dataset& d, const FgtSplitSpec& spec) {
    spec.validate();
    if (!d.labeled()) fail("split_fgt: dataset must be labeled");
    if (d.feature_count() < 3) fail("split_fgt: needs at least 3 features");
    if (d.row_count() < 4) fail("split_fgt: needs at least 4 rows");

    Rng rng(mix_seed(spec.seed, 0xF67ull));

    // disjoint near-halves; train receives the extra row when odd
    std::vector<size_t> rows(d.row_count());
    std::iota(rows.begin(), rows.end(), 0);
    rng.shuffle(rows);
    size_t train_n = (d.row_count() + 1) / 2;
    std::vector<size_t> train_rows(rows.begin(), rows.begin() + static_cast<long>(train_n));
    std::vector<size_t> aux_rows(rows.begin() + static_cast<long>(train_n), rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(aux_rows.begin(), aux_rows.end());

    // feature partition
    const size_t nf = d.feature_count();
    std::vector<size_t> feats(nf);
    std::iota(feats.begin(), feats.end(), 0);
    rng.shuffle(feats);
    size_t shared_n = std::clamp<size_t>(round_half_up(spec.mu1 * nf), 1, nf - 2);
    size_t rest = nf - shared_n;
    size_t train_only_n = std::clamp<size_t>(round_half_up(spec.mu2 * rest), 1, rest - 1);

    std::vector<bool> in_shared(nf, false), in_train(nf, false);
    for (size_t i = 0; i < shared_n; ++i) in_shared[feats[i]] = true;
    for (size_t i = shared_n; i < shared_n + train_only_n; ++i) in_train[feats[i]] = true;

    std::vector<std::string> train_names, aux_names;
    for (size_t i = 0; i < nf; ++i) {
        const auto& name = d.column(i).feature.name;
        if (in_shared[i]) {
            train_names.push_back(name);
            aux_names.push_back(name);
        } else if (in_train[i]) {
            train_names.push_back(name);
        } else {
            aux_names.push_back(name);
        }
    }

    FgtSplit out;
    out.train = d.project(train_names).take_rows(train_rows);
    out.aux = d.project(aux_names).take_rows(aux_rows);
    return out;
}

// --- incomplete beta / t-test ----------------------------------------------------

namespace {

double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0 || b <= 0) fail("incomplete_beta: a and b must be positive");
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1) / (a + b + 2))
        return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0) fail("student_t_two_sided_p: df must be positive");
    if (t == 0) return 1.0;
    double x = df / (df + t * t);
    return std::clamp(incomplete_beta(df / 2, 0.5, x), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail("paired_t_test: length mismatch");
    const size_t k = a.size();
    if (k < 2) fail("paired_t_test: needs at least 2 pairs");

    double mean = 0;
    for (size_t i = 0; i < k; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(k);
    double var = 0;
    for (size_t i = 0; i < k; ++i) {
        double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(k - 1);

    TTestResult r;
    if (var == 0.0) {
        if (mean == 0.0) return r;  // t = 0, p = 1
        r.t = mean > 0 ? 1e15 : -1e15;
        r.p = 0.0;  // reported as p < 1e-12
        return r;
    }
    r.t = mean / std::sqrt(var / static_cast<double>(k));
    r.p = student_t_two_sided_p(r.t, static_cast<double>(k - 1));
    return r;
}

// --- protocol ---------------------------------------------------------------------

void ProtocolConfig::validate() const {
    if (folds < 2) fail("protocol folds must be >= 2");
    if (alpha <= 0 || alpha > 1) fail("alpha must be in (0,1]");
    if (primary_specs.empty()) fail("protocol needs at least one primary learner");
    for (const auto& s : primary_specs) s.validate();
    generation.validate();
    if (top_k_cap < 1) fail("top_k_cap must be >= 1");
    if (curve_group < 1) fail("curve_group must be >= 1");
}

std::vector<FoldRows> protocol_fold_rows(const Dataset& train, int folds, double alpha,
                                         uint64_t seed) {
    const Column& label = train.label();
    if (!label.feature.kind.is_nominal()) fail("protocol: training label must be nominal");
    const int n_classes = static_cast<int>(label.feature.kind.categories.size());
    auto assignment = stratified_fold_assignment(label.values, n_classes, folds, seed);

    std::vector<int> full_counts(static_cast<size_t>(n_classes), 0);
    for (size_t r = 0; r < train.row_count(); ++r)
        ++full_counts[static_cast<size_t>(label.values[r])];

    std::vector<FoldRows> out(static_cast<size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        std::vector<size_t> test_rows, rest_rows;
        for (size_t r = 0; r < train.row_count(); ++r)
            (assignment[r] == f ? test_rows : rest_rows).push_back(r);
        if (test_rows.empty() || rest_rows.empty())
            fail("protocol: degenerate fold " + std::to_string(f));

        std::vector<double> rest_labels;
        rest_labels.reserve(rest_rows.size());
        for (size_t r : rest_rows) rest_labels.push_back(label.values[r]);
        // every class observed in the data must survive into the fold's
        // training side
        {
            std::vector<int> counts(static_cast<size_t>(n_classes), 0);
            for (double v : rest_labels) ++counts[static_cast<size_t>(v)];
            for (int c = 0; c < n_classes; ++c)
                if (counts[static_cast<size_t>(c)] == 0 && full_counts[static_cast<size_t>(c)] > 0)
                    fail("protocol: stratification failure, fold " + std::to_string(f) +
                         " training side lost class '" +
                         label.feature.kind.categories[static_cast<size_t>(c)] + "'");
        }
        auto keep = stratified_subset(rest_labels, n_classes, alpha,
                                      mix_seed(seed, static_cast<uint64_t>(f)));
        FoldRows fr;
        fr.test_rows = std::move(test_rows);
        fr.reduced_train_rows.reserve(keep.size());
        for (size_t i : keep) fr.reduced_train_rows.push_back(rest_rows[i]);
        out[static_cast<size_t>(f)] = std::move(fr);
    }
    return out;
}

namespace {

double accuracy_on(const Predictor& model, const Dataset& test) {
    auto out = model.predict(test);
    const Column& label = test.label();
    size_t correct = 0;
    for (size_t r = 0; r < test.row_count(); ++r)
        if (out.values[r] == label.values[r]) ++correct;
    return test.row_count() ? static_cast<double>(correct) / test.row_count() : 0.0;
}

struct FoldContext {
    Dataset reduced;  // B_i^alpha view
    Dataset test;
    std::vector<AuxiliaryInput> aux_inputs;  // matchings computed on the reduced view
    size_t eligible_targets = 0;
};

}  // namespace

ExperimentReport run_protocol(const Dataset& train, const std::vector<ProtocolAux>& auxiliaries,
                              const ProtocolConfig& cfg) {
    cfg.validate();
    if (!train.labeled()) fail("run_protocol: training dataset must be labeled");

    ExperimentReport report;
    report.folds = cfg.folds;
    report.alpha = cfg.alpha;
    report.top_k_cap = cfg.top_k_cap;
    report.seed = cfg.seed;
    report.normalization_note =
        "datasets are normalized independently (per-dataset min-max at load)";

    auto fold_rows = protocol_fold_rows(train, cfg.folds, cfg.alpha, cfg.seed);

    // fold contexts are learner-independent
    std::vector<FoldContext> ctx(fold_rows.size());
    std::vector<std::vector<std::string>> fold_notes(fold_rows.size());
    parallel_for(fold_rows.size(), cfg.jobs, [&](size_t f) {
        FoldContext c;
        c.reduced = train.take_rows(fold_rows[f].reduced_train_rows);
        c.test = train.take_rows(fold_rows[f].test_rows);
        for (const auto& aux : auxiliaries) {
            FeatureMatching m = match_features(c.reduced, aux.dataset, aux.strategy);
            for (const auto& note : m.notes)
                fold_notes[f].push_back("fold " + std::to_string(f) + ", " + aux.id + ": " + note);
            c.eligible_targets += m.unmatched_aux.size() + (aux.dataset.labeled() ? 1 : 0);
            c.aux_inputs.push_back({aux.dataset, std::move(m), aux.id});
        }
        ctx[f] = std::move(c);
    });
    for (auto& notes : fold_notes)
        for (auto& n : notes) report.notes.push_back(std::move(n));

    // Table-1-style matching statistics
    for (size_t a = 0; a < auxiliaries.size(); ++a) {
        AuxStats st;
        st.id = auxiliaries[a].id;
        for (const auto& c : ctx) {
            st.avg_intersection += static_cast<double>(c.aux_inputs[a].matching.pairs.size());
            st.avg_aux_only +=
                static_cast<double>(c.aux_inputs[a].matching.unmatched_aux.size());
        }
        st.avg_intersection /= static_cast<double>(ctx.size());
        st.avg_aux_only /= static_cast<double>(ctx.size());
        report.aux_stats.push_back(st);
    }

    for (const auto& learner : cfg.primary_specs) {
        LearnerOutcome outcome;
        outcome.spec = learner;
        outcome.folds.resize(ctx.size());
        std::vector<std::vector<std::string>> notes(ctx.size());

        parallel_for(ctx.size(), cfg.jobs, [&](size_t f) {
            const FoldContext& c = ctx[f];
            LearnerFold fold;

            Predictor base_model = fit(learner, c.reduced);
            fold.baseline = accuracy_on(base_model, c.test);

            std::vector<GeneratedFeature> accepted;
            if (!c.aux_inputs.empty()) {
                GenerationConfig gen = cfg.generation;
                gen.primary = learner;
                gen.seed = mix_seed(cfg.seed, 0xF01Dull + f);
                gen.jobs = 1;  // protocol parallelism lives at the fold level

                GenerationResult g;
                if (c.aux_inputs.size() == 1) {
                    g = run_kbfg(c.reduced, c.aux_inputs[0].dataset, c.aux_inputs[0].matching,
                                 gen, c.aux_inputs[0].id);
                } else {
                    g = run_kbfg_star(c.reduced, c.aux_inputs, gen);
                }
                for (auto& n : g.notes)
                    notes[f].push_back("fold " + std::to_string(f) + ": " + n);

                // rank by information gain on the reduced view, cap, re-filter
                std::stable_sort(g.features.begin(), g.features.end(),
                                 [](const GeneratedFeature& a, const GeneratedFeature& b) {
                                     if (a.information_gain != b.information_gain)
                                         return a.information_gain > b.information_gain;
                                     return a.name < b.name;
                                 });
                if (c.eligible_targets > cfg.top_k_cap && g.features.size() > cfg.top_k_cap)
                    g.features.resize(cfg.top_k_cap);

                const Column& rl = c.reduced.label();
                const int n_classes = static_cast<int>(rl.feature.kind.categories.size());
                auto assignment = stratified_fold_assignment(
                    rl.values, n_classes, gen.wrapper_folds, mix_seed(cfg.seed, 0x3E1Full + f));
                Dataset view = c.reduced;
                double cv_base = cross_val_accuracy_with_folds(learner, view, std::nullopt,
                                                               assignment, gen.wrapper_folds);
                std::unordered_set<std::string> names;
                for (auto& cand : g.features) {
                    bool usable = true;
                    for (const auto& in : cand.input_names())
                        if (c.reduced.index_of(in) < 0 && !names.count(in)) usable = false;
                    if (!usable) continue;
                    Dataset probe = view.append_feature(
                        {cand.name, cand.value_kind, ""}, cand.train_values,
                        std::vector<uint8_t>(cand.train_values.size(), 0));
                    double cv = cross_val_accuracy_with_folds(learner, probe, std::nullopt,
                                                              assignment, gen.wrapper_folds);
                    if (!(cv > cv_base)) continue;
                    cand.utility_at_acceptance = cv - cv_base;
                    cv_base = cv;
                    view = std::move(probe);
                    names.insert(cand.name);
                    accepted.push_back(std::move(cand));
                }
            }

            if (accepted.empty()) {
                // no harness additives: the baseline path is the plain fit
                fold.enhanced = fold.baseline;
            } else {
                Dataset enhanced_train = enhance(c.reduced, accepted);
                Dataset enhanced_test = enhance(c.test, accepted);
                Predictor enh_model = fit(learner, enhanced_train);
                fold.enhanced = accuracy_on(enh_model, enhanced_test);
            }

            for (const auto& a : accepted) {
                FoldFeature ff;
                ff.name = a.name;
                ff.source_dataset = a.source_dataset;
                ff.source_target = a.source_target;
                ff.utility = a.utility_at_acceptance;
                ff.information_gain = a.information_gain;
                ff.inputs = a.input_names();
                fold.accepted.push_back(std::move(ff));
            }

            if (cfg.emit_curve) {
                for (size_t take = 0;; take += cfg.curve_group) {
                    size_t n = std::min(take, accepted.size());
                    if (n == 0) {
                        fold.curve.push_back(fold.baseline);
                    } else {
                        std::vector<GeneratedFeature> head(accepted.begin(),
                                                           accepted.begin() + static_cast<long>(n));
                        Predictor m = fit(learner, enhance(c.reduced, head));
                        fold.curve.push_back(accuracy_on(m, enhance(c.test, head)));
                    }
                    if (take >= accepted.size()) break;
                }
            }
            outcome.folds[f] = std::move(fold);
        });

        for (auto& per_fold : notes)
            for (auto& n : per_fold) report.notes.push_back(std::move(n));

        std::vector<double> base, enh;
        for (const auto& f : outcome.folds) {
            base.push_back(f.baseline);
            enh.push_back(f.enhanced);
        }
        outcome.baseline_mean = std::accumulate(base.begin(), base.end(), 0.0) / base.size();
        outcome.enhanced_mean = std::accumulate(enh.begin(), enh.end(), 0.0) / enh.size();
        outcome.delta = outcome.enhanced_mean - outcome.baseline_mean;
        outcome.ttest = paired_t_test(enh, base);
        outcome.significant = outcome.ttest.p < 0.05 && outcome.delta > 0;
        report.learners.push_back(std::move(outcome));
    }
    return report;
}

std::string report_to_text(const ExperimentReport& r) {
    std::ostringstream os;
    os << "experiment report (folds=" << r.folds << ", alpha=" << double_to_string(r.alpha)
       << ", seed=" << r.seed << ")\n";
    os << r.normalization_note << "\n\n";
    if (!r.aux_stats.empty()) {
        os << "auxiliary matching averages over folds:\n";
        os << "  auxiliary            AVG |shared|  AVG |aux-only|\n";
        for (const auto& a : r.aux_stats) {
            os << "  " << a.id;
            for (size_t i = a.id.size(); i < 20; ++i) os << ' ';
            os << " " << double_to_string(a.avg_intersection) << "  "
               << double_to_string(a.avg_aux_only) << "\n";
        }
        os << "\n";
    }
    os << "learner results (baseline / enhanced / delta, paired t):\n";
    for (const auto& l : r.learners) {
        os << "  " << algorithm_name(l.spec.algorithm);
        if (l.spec.algorithm == Algorithm::DecisionTree && l.spec.pruning) os << "+pruning";
        os << ": " << double_to_string(l.baseline_mean) << " -> "
           << double_to_string(l.enhanced_mean) << "  (delta "
           << double_to_string(l.delta) << ", t=" << double_to_string(l.ttest.t) << ", p";
        if (l.ttest.p < 1e-12) os << " < 1e-12";
        else os << "=" << double_to_string(l.ttest.p);
        os << (l.significant ? ", significant)" : ")") << "\n";
        for (size_t f = 0; f < l.folds.size(); ++f) {
            os << "    fold " << f << ": " << double_to_string(l.folds[f].baseline) << " -> "
               << double_to_string(l.folds[f].enhanced) << ", " << l.folds[f].accepted.size()
               << " feature(s)\n";
        }
    }
    if (!r.notes.empty()) {
        os << "\nnotes:\n";
        for (const auto& n : r.notes) os << "  - " << n << "\n";
    }
    return os.str();
}

}  // namespace kbfg
