#include "generation.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "embedding.hpp"

namespace kbfg {

GenerationConfig::GenerationConfig()
    : secondary(LearnerSpec::random_forest()), primary(LearnerSpec::decision_tree()) {}

void GenerationConfig::validate() const {
    secondary.validate();
    primary.validate();
    if (wrapper_folds < 2) fail("wrapper_folds must be >= 2");
    if (max_targets && *max_targets < 1) fail("max_targets must be >= 1");
    if (intersection_cap < 1) fail("intersection_cap must be >= 1");
}

std::vector<std::string> GeneratedFeature::input_names() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    auto add = [&](const Predictor& p) {
        for (const auto& f : p.inputs)
            if (seen.insert(f.name).second) out.push_back(f.name);
    };
    if (committee.empty()) {
        add(predictor);
    } else {
        for (const auto& m : committee) add(m);
    }
    return out;
}

FeatureKind generated_value_kind(const Predictor& p) {
    if (!p.is_classifier() || p.is_binary()) return FeatureKind::continuous();
    return p.target_kind;
}

namespace {

std::vector<double> apply_predictor_feature(const Predictor& p, const Dataset& d) {
    auto out = p.predict(d);
    return p.is_binary() ? std::move(out.scores) : std::move(out.values);
}

bool predictor_applicable(const Predictor& p, const Dataset& d) {
    for (const auto& in : p.inputs) {
        const Column* c = d.find(in.name);
        if (!c || !(c->feature.kind == in.kind)) return false;
    }
    return true;
}

bool feature_applicable(const GeneratedFeature& f, const Dataset& d) {
    if (f.committee.empty()) return predictor_applicable(f.predictor, d);
    for (const auto& m : f.committee)
        if (!predictor_applicable(m, d)) return false;
    return true;
}

std::vector<uint8_t> no_missing(size_t n) { return std::vector<uint8_t>(n, 0); }

std::string unique_name(const std::string& base,
                        const std::function<bool(const std::string&)>& taken) {
    if (!taken(base)) return base;
    for (int i = 2;; ++i) {
        std::string name = base + "_" + std::to_string(i);
        if (!taken(name)) return name;
    }
}

std::vector<int> label_ints(const Column& label) {
    if (!label.feature.kind.is_nominal()) fail("training label must be nominal");
    std::vector<int> y;
    y.reserve(label.size());
    for (size_t r = 0; r < label.size(); ++r) {
        if (label.is_missing(r)) fail("training label has missing values");
        y.push_back(static_cast<int>(label.values[r]));
    }
    return y;
}

}  // namespace

std::vector<double> apply_generated(const GeneratedFeature& f, const Dataset& d) {
    if (f.committee.empty()) return apply_predictor_feature(f.predictor, d);

    std::vector<std::vector<double>> member_vals;
    member_vals.reserve(f.committee.size());
    for (const auto& m : f.committee) member_vals.push_back(apply_predictor_feature(m, d));

    const size_t n = d.row_count();
    std::vector<double> out(n, 0.0);
    if (!f.value_kind.is_nominal()) {
        for (size_t r = 0; r < n; ++r) {
            double sum = 0;
            for (const auto& mv : member_vals) sum += mv[r];
            out[r] = sum / member_vals.size();
        }
    } else {
        const size_t n_cats = f.value_kind.categories.size();
        for (size_t r = 0; r < n; ++r) {
            std::vector<int> votes(n_cats, 0);
            for (const auto& mv : member_vals) ++votes[static_cast<size_t>(mv[r])];
            int best = 0;
            for (size_t c = 1; c < n_cats; ++c)
                if (votes[c] > votes[static_cast<size_t>(best)]) best = static_cast<int>(c);
            out[r] = best;
        }
    }
    return out;
}

// --- kbfg -------------------------------------------------------------------

namespace {

struct CarryIn {
    const GeneratedFeature* feature;
    std::vector<double> aux_values;
};

struct TargetRef {
    std::string name;
    ColumnPtr column;
};

constexpr const char* kTargetAlias = "__kbfg_target__";

}  // namespace

std::vector<ColumnPtr> cap_secondary_inputs(const std::vector<ColumnPtr>& cols,
                                            const Column& target, size_t cap) {
    if (cols.size() <= cap) return cols;
    std::vector<int> y(target.size(), 0);
    int n_classes;
    if (target.feature.kind.is_nominal()) {
        n_classes = static_cast<int>(target.feature.kind.categories.size()) + 1;
        for (size_t r = 0; r < target.size(); ++r)
            y[r] = target.is_missing(r) ? n_classes - 1 : static_cast<int>(target.values[r]);
    } else {
        std::vector<double> present;
        for (size_t r = 0; r < target.size(); ++r)
            if (!target.is_missing(r)) present.push_back(target.values[r]);
        if (present.empty()) return {cols.begin(), cols.begin() + static_cast<long>(cap)};
        std::sort(present.begin(), present.end());
        double median = present[(present.size() - 1) / 2];
        n_classes = 3;  // below/above median, missing
        for (size_t r = 0; r < target.size(); ++r)
            y[r] = target.is_missing(r) ? 2 : (target.values[r] > median ? 1 : 0);
    }

    std::vector<std::pair<double, size_t>> ranked;  // (-gain, index) for stable order
    ranked.reserve(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) {
        double g = information_gain_values(cols[i]->values, cols[i]->missing,
                                           cols[i]->feature.kind, y, n_classes);
        ranked.emplace_back(-g, i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    ranked.resize(cap);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<ColumnPtr> kept;
    kept.reserve(cap);
    for (const auto& [g, i] : ranked) kept.push_back(cols[i]);
    return kept;
}

namespace {

struct Candidate {
    bool valid = false;
    std::string note;
    Predictor predictor;
    std::vector<double> train_values;
    FeatureKind kind;
    double info_gain = 0.0;
    std::string target_name;
};

GenerationResult kbfg_run(const Dataset& train, const Dataset& aux,
                          const FeatureMatching& matching, const GenerationConfig& cfg,
                          const std::string& aux_id, const std::vector<CarryIn>& carry) {
    cfg.validate();
    GenerationResult result;
    if (!train.labeled()) fail("kbfg: training dataset must be labeled");
    if (train.row_count() < static_cast<size_t>(cfg.wrapper_folds))
        fail("kbfg: training set is smaller than the wrapper fold count");

    // secondary-task base columns: auxiliary values under training-side names
    std::vector<ColumnPtr> base_cols;
    for (const auto& p : matching.pairs) {
        const Column* tc = train.find(p.train_name);
        const Column* ac = aux.find(p.aux_name);
        if (!tc) fail("kbfg: matching references unknown training feature '" + p.train_name + "'");
        if (!ac) fail("kbfg: matching references unknown auxiliary feature '" + p.aux_name + "'");
        if (!(tc->feature.kind == ac->feature.kind))
            fail("kbfg: matched kinds disagree for '" + p.train_name + "'");
        base_cols.push_back(make_column({p.train_name, ac->feature.kind, ac->feature.description},
                                        ac->values, ac->missing));
    }
    for (const auto& c : carry)
        base_cols.push_back(make_column({c.feature->name, c.feature->value_kind, ""},
                                        c.aux_values, no_missing(c.aux_values.size())));

    if (base_cols.empty()) {
        result.notes.push_back("auxiliary '" + aux_id +
                               "': empty intersection, nothing to learn from");
        return result;
    }

    // candidate targets: auxiliary-only features in schema order, then the
    // auxiliary label when present
    std::vector<TargetRef> targets;
    for (const auto& name : matching.unmatched_aux) {
        int idx = aux.index_of(name);
        if (idx < 0) fail("kbfg: matching lists unknown auxiliary feature '" + name + "'");
        targets.push_back({name, aux.columns()[static_cast<size_t>(idx)]});
    }
    if (aux.labeled()) targets.push_back({aux.label().feature.name, aux.label_ptr()});

    if (cfg.prioritization_vectors) {
        std::vector<std::string> names;
        names.reserve(targets.size());
        for (const auto& t : targets) names.push_back(t.name);
        auto ranked = prioritize_targets(names, train, *cfg.prioritization_vectors);
        std::vector<TargetRef> reordered;
        reordered.reserve(targets.size());
        for (const auto& name : ranked) {
            for (auto& t : targets)
                if (t.name == name && t.column) {
                    reordered.push_back(t);
                    t.column = nullptr;
                }
        }
        targets = std::move(reordered);
    }
    if (cfg.max_targets && targets.size() > *cfg.max_targets)
        targets.resize(*cfg.max_targets);

    const Column& label = train.label();
    std::vector<int> y = label_ints(label);
    const int n_classes = static_cast<int>(label.feature.kind.categories.size());

    const uint64_t wrapper_seed = mix_seed(cfg.seed, 0xACCE97ull);
    auto assignment =
        stratified_fold_assignment(label.values, n_classes, cfg.wrapper_folds, wrapper_seed);

    Dataset wrapper_view = train;
    double baseline = cross_val_accuracy_with_folds(cfg.primary, wrapper_view, std::nullopt,
                                                    assignment, cfg.wrapper_folds);

    // prediction context: train plus cross-auxiliary carry-in columns
    Dataset predict_view = train;
    for (const auto& c : carry)
        predict_view = predict_view.append_feature({c.feature->name, c.feature->value_kind, ""},
                                                   c.feature->train_values,
                                                   no_missing(train.row_count()));

    auto build_candidate = [&](const TargetRef& t, uint64_t sec_seed,
                               const std::vector<ColumnPtr>& cur_base,
                               const Dataset& context) -> Candidate {
        Candidate c;
        c.target_name = t.name;
        try {
            std::vector<ColumnPtr> cols =
                cap_secondary_inputs(cur_base, *t.column, cfg.intersection_cap);
            cols.push_back(make_column({kTargetAlias, t.column->feature.kind, ""},
                                       t.column->values, t.column->missing));
            Dataset secondary_task = Dataset::make(std::move(cols), nullptr);
            LearnerSpec sec = cfg.secondary;
            sec.seed = sec_seed;
            c.predictor = fit(sec, secondary_task, std::string(kTargetAlias));
            c.kind = generated_value_kind(c.predictor);
            c.train_values = apply_predictor_feature(c.predictor, context);
            c.info_gain = information_gain_values(c.train_values,
                                                  no_missing(c.train_values.size()), c.kind, y,
                                                  n_classes);
            c.valid = true;
        } catch (const Error& e) {
            c.note = "auxiliary '" + aux_id + "', target '" + t.name + "' skipped: " + e.what();
        }
        return c;
    };

    auto name_taken = [&](const std::string& n) {
        return wrapper_view.index_of(n) >= 0 || predict_view.index_of(n) >= 0 ||
               n == label.feature.name;
    };

    auto try_accept = [&](Candidate& c) -> GeneratedFeature* {
        if (!c.valid) {
            if (!c.note.empty()) result.notes.push_back(c.note);
            return nullptr;
        }
        std::string name = unique_name(aux_id + "." + c.target_name, name_taken);
        Dataset cand_view = wrapper_view.append_feature({name, c.kind, ""}, c.train_values,
                                                        no_missing(c.train_values.size()));
        double acc = cross_val_accuracy_with_folds(cfg.primary, cand_view, std::nullopt,
                                                   assignment, cfg.wrapper_folds);
        if (!(acc > baseline)) return nullptr;

        GeneratedFeature g;
        g.name = name;
        g.predictor = std::move(c.predictor);
        g.source_dataset = aux_id;
        g.source_target = c.target_name;
        g.utility_at_acceptance = acc - baseline;
        g.information_gain = c.info_gain;
        g.value_kind = c.kind;
        g.train_values = c.train_values;
        baseline = acc;
        wrapper_view = std::move(cand_view);
        result.features.push_back(std::move(g));
        return &result.features.back();
    };

    if (!cfg.recurrent) {
        // secondary fits are independent; acceptance stays sequential
        std::vector<Candidate> cands(targets.size());
        parallel_for(targets.size(), cfg.jobs, [&](size_t i) {
            cands[i] = build_candidate(targets[i], mix_seed(cfg.seed, i), base_cols, predict_view);
        });
        for (auto& c : cands) try_accept(c);
        return result;
    }

    for (size_t i = 0; i < targets.size(); ++i) {
        Candidate c = build_candidate(targets[i], mix_seed(cfg.seed, i), base_cols, predict_view);
        const TargetRef& t = targets[i];
        GeneratedFeature* accepted = try_accept(c);
        if (!accepted) continue;
        // the accepted feature joins the working intersection; its auxiliary
        // side carries the true target column (binary-score features cast the
        // category index to the exact 0/1 score)
        FeatureKind aux_kind = accepted->value_kind;
        base_cols.push_back(
            make_column({accepted->name, aux_kind, ""}, t.column->values, t.column->missing));
        predict_view = predict_view.append_feature({accepted->name, accepted->value_kind, ""},
                                                   accepted->train_values,
                                                   no_missing(train.row_count()));
    }
    return result;
}

}  // namespace

GenerationResult run_kbfg(const Dataset& train, const Dataset& aux,
                          const FeatureMatching& matching, const GenerationConfig& cfg,
                          const std::string& aux_id) {
    return kbfg_run(train, aux, matching, cfg, aux_id, {});
}

// --- kbfg* ------------------------------------------------------------------

namespace {

std::vector<CarryIn> make_carry_ins(const std::vector<GeneratedFeature>& pool,
                                    const AuxiliaryInput& entry) {
    // auxiliary view under training-side names; carried features chain
    std::vector<ColumnPtr> cols;
    for (const auto& p : entry.matching.pairs) {
        const Column* ac = entry.dataset.find(p.aux_name);
        if (!ac) fail("kbfg_star: matching references unknown auxiliary feature '" + p.aux_name + "'");
        cols.push_back(make_column({p.train_name, ac->feature.kind, ac->feature.description},
                                   ac->values, ac->missing));
    }
    Dataset aux_view = Dataset::make(std::move(cols), nullptr);
    std::vector<CarryIn> carry;
    for (const auto& g : pool) {
        if (!feature_applicable(g, aux_view)) continue;
        auto vals = apply_generated(g, aux_view);
        aux_view = aux_view.append_feature({g.name, g.value_kind, ""}, vals,
                                           no_missing(vals.size()));
        carry.push_back({&g, std::move(vals)});
    }
    return carry;
}

}  // namespace

GenerationResult run_kbfg_star(const Dataset& train,
                               const std::vector<AuxiliaryInput>& auxiliaries,
                               const GenerationConfig& cfg) {
    cfg.validate();
    if (auxiliaries.empty()) fail("kbfg_star: empty auxiliary list");
    {
        std::unordered_set<std::string> ids;
        for (const auto& a : auxiliaries)
            if (!ids.insert(a.id).second) fail("kbfg_star: duplicate auxiliary id '" + a.id + "'");
    }

    GenerationResult out;
    std::vector<GeneratedFeature> pool;
    for (const auto& entry : auxiliaries) {
        std::vector<CarryIn> carry;
        if (cfg.recurrent) carry = make_carry_ins(pool, entry);
        auto r = kbfg_run(train, entry.dataset, entry.matching, cfg, entry.id, carry);
        for (auto& n : r.notes) out.notes.push_back(std::move(n));
        for (auto& f : r.features) pool.push_back(std::move(f));
    }

    pool = resolve_duplicates(std::move(pool), train, cfg.duplicate_policy, cfg.primary,
                              cfg.wrapper_folds, mix_seed(cfg.seed, 0xD0Dull));

    std::stable_sort(pool.begin(), pool.end(), [](const GeneratedFeature& a,
                                                  const GeneratedFeature& b) {
        if (a.information_gain != b.information_gain)
            return a.information_gain > b.information_gain;
        return a.name < b.name;
    });

    // second-stage greedy wrapper filter over the pooled candidates
    const Column& label = train.label();
    const int n_classes = static_cast<int>(label.feature.kind.categories.size());
    const uint64_t wrapper_seed = mix_seed(cfg.seed, 0x57A6E2ull);
    auto assignment =
        stratified_fold_assignment(label.values, n_classes, cfg.wrapper_folds, wrapper_seed);
    Dataset view = train;
    double baseline = cross_val_accuracy_with_folds(cfg.primary, view, std::nullopt, assignment,
                                                    cfg.wrapper_folds);

    std::unordered_set<std::string> accepted_names;
    for (auto& f : pool) {
        // a feature whose generated inputs were rejected cannot be applied to
        // new data; skip it
        bool usable = true;
        for (const auto& in : f.input_names()) {
            if (train.index_of(in) >= 0 || accepted_names.count(in)) continue;
            usable = false;
            break;
        }
        if (!usable) {
            out.notes.push_back("feature '" + f.name + "' skipped: depends on a rejected feature");
            continue;
        }
        Dataset cand = view.append_feature({f.name, f.value_kind, ""}, f.train_values,
                                           no_missing(f.train_values.size()));
        double acc = cross_val_accuracy_with_folds(cfg.primary, cand, std::nullopt, assignment,
                                                   cfg.wrapper_folds);
        if (!(acc > baseline)) continue;
        f.utility_at_acceptance = acc - baseline;
        baseline = acc;
        view = std::move(cand);
        accepted_names.insert(f.name);
        out.features.push_back(std::move(f));
    }
    return out;
}

// --- target prioritization ----------------------------------------------------

std::vector<std::string> prioritize_targets(const std::vector<std::string>& candidates,
                                            const Dataset& train,
                                            const std::string& vectors_path) {
    if (!train.labeled()) fail("prioritize_targets: train must be labeled");
    const Column& label = train.label();
    if (!label.feature.kind.is_nominal() || label.feature.kind.categories.size() != 2)
        fail("prioritize_targets: train label must be binary");

    EmbeddingTable table = EmbeddingTable::load(vectors_path);

    // covered token vectors per training feature
    std::vector<std::vector<const std::vector<double>*>> feature_tokens(train.feature_count());
    for (size_t f = 0; f < train.feature_count(); ++f)
        for (const auto& tok : name_tokens(train.column(f).feature.name))
            if (const auto* v = table.find(tok)) feature_tokens[f].push_back(v);

    // class centroids, token-weighted by feature presence per example
    std::vector<std::vector<double>> centroid(2, std::vector<double>(table.dim(), 0.0));
    std::vector<size_t> weight(2, 0);
    for (size_t r = 0; r < train.row_count(); ++r) {
        if (label.is_missing(r)) continue;
        size_t cls = static_cast<size_t>(label.values[r]);
        for (size_t f = 0; f < train.feature_count(); ++f) {
            const Column& c = train.column(f);
            if (feature_tokens[f].empty() || c.is_missing(r)) continue;
            if (!c.feature.kind.is_nominal() && c.values[r] == 0.0) continue;  // absent
            for (const auto* v : feature_tokens[f]) {
                for (size_t i = 0; i < table.dim(); ++i) centroid[cls][i] += (*v)[i];
                ++weight[cls];
            }
        }
    }
    for (size_t cls = 0; cls < 2; ++cls) {
        if (weight[cls] == 0)
            fail("prioritize_targets: the vector file covers no feature present in class " +
                 label.feature.kind.categories[cls] + " examples");
        for (auto& x : centroid[cls]) x /= static_cast<double>(weight[cls]);
    }

    struct Scored {
        std::string name;
        bool covered;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& cand : candidates) {
        auto vec = table.phrase_vector(name_tokens(cand));
        if (!vec) {
            scored.push_back({cand, false, 0.0});
            continue;
        }
        double s = std::max(cosine_similarity(*vec, centroid[0]),
                            cosine_similarity(*vec, centroid[1]));
        scored.push_back({cand, true, s});
    }
    // stable: equal scores keep the input order
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.covered != b.covered) return a.covered;
        return a.score > b.score;
    });
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& s : scored) out.push_back(std::move(s.name));
    return out;
}

// --- duplicate resolution -----------------------------------------------------

std::vector<GeneratedFeature> resolve_duplicates(std::vector<GeneratedFeature> features,
                                                 const Dataset& train,
                                                 GenerationConfig::DuplicatePolicy policy,
                                                 const LearnerSpec& primary, int wrapper_folds,
                                                 uint64_t seed) {
    // group by approximated target, first-seen order
    std::vector<std::string> group_order;
    std::unordered_map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < features.size(); ++i) {
        auto& g = groups[features[i].source_target];
        if (g.empty()) group_order.push_back(features[i].source_target);
        g.push_back(i);
    }

    bool any_group = false;
    for (const auto& [k, v] : groups) any_group = any_group || v.size() > 1;
    if (!any_group) return features;

    const Column& label = train.label();
    const int n_classes = static_cast<int>(label.feature.kind.categories.size());
    auto assignment = stratified_fold_assignment(label.values, n_classes, wrapper_folds,
                                                 mix_seed(seed, 0xD7ull));
    double baseline = cross_val_accuracy_with_folds(primary, train, std::nullopt, assignment,
                                                    wrapper_folds);
    auto utility = [&](const GeneratedFeature& f) {
        Dataset cand = train.append_feature({f.name, f.value_kind, ""}, f.train_values,
                                            no_missing(f.train_values.size()));
        return cross_val_accuracy_with_folds(primary, cand, std::nullopt, assignment,
                                             wrapper_folds) -
               baseline;
    };
    std::vector<int> y = label_ints(label);

    std::vector<GeneratedFeature> out;
    out.reserve(groups.size());
    for (const auto& key : group_order) {
        auto& idx = groups[key];
        if (idx.size() == 1) {
            out.push_back(std::move(features[idx[0]]));
            continue;
        }

        for (size_t i : idx)
            if (!(features[i].value_kind == features[idx[0]].value_kind))
                fail("resolve_duplicates: mixed value kinds for target '" + key +
                     "' cannot be aggregated");

        if (policy == GenerationConfig::DuplicatePolicy::ArgmaxUtility) {
            size_t best = idx[0];
            double best_u = utility(features[best]);
            for (size_t k = 1; k < idx.size(); ++k) {
                double u = utility(features[idx[k]]);
                const GeneratedFeature& cand = features[idx[k]];
                const GeneratedFeature& cur = features[best];
                bool better = u > best_u ||
                              (u == best_u && (cand.information_gain > cur.information_gain ||
                                               (cand.information_gain == cur.information_gain &&
                                                cand.name < cur.name)));
                if (better) {
                    best = idx[k];
                    best_u = u;
                }
            }
            out.push_back(std::move(features[best]));
            continue;
        }

        // committee: one feature combining every member
        GeneratedFeature comb;
        comb.value_kind = features[idx[0]].value_kind;
        comb.source_target = key;
        std::string sources;
        for (size_t i : idx) {
            GeneratedFeature& m = features[i];
            if (!sources.empty()) sources += "+";
            sources += m.source_dataset;
            if (m.committee.empty()) {
                comb.committee.push_back(std::move(m.predictor));
            } else {
                for (auto& sub : m.committee) comb.committee.push_back(std::move(sub));
            }
        }
        comb.source_dataset = sources;
        auto taken = [&](const std::string& n) {
            if (train.index_of(n) >= 0 || n == label.feature.name) return true;
            for (const auto& f : out)
                if (f.name == n) return true;
            return false;
        };
        comb.name = unique_name(key + ".committee", taken);

        const size_t n = train.row_count();
        std::vector<double> combined(n, 0.0);
        if (!comb.value_kind.is_nominal()) {
            for (size_t r = 0; r < n; ++r) {
                double sum = 0;
                for (size_t i : idx) sum += features[i].train_values[r];
                combined[r] = sum / idx.size();
            }
        } else {
            const size_t n_cats = comb.value_kind.categories.size();
            for (size_t r = 0; r < n; ++r) {
                std::vector<int> votes(n_cats, 0);
                for (size_t i : idx) ++votes[static_cast<size_t>(features[i].train_values[r])];
                int best_cat = 0;
                for (size_t c = 1; c < n_cats; ++c)
                    if (votes[c] > votes[static_cast<size_t>(best_cat)])
                        best_cat = static_cast<int>(c);
                combined[r] = best_cat;
            }
        }
        comb.train_values = std::move(combined);
        comb.information_gain =
            information_gain_values(comb.train_values, no_missing(n), comb.value_kind, y,
                                    n_classes);
        comb.utility_at_acceptance = utility(comb);
        out.push_back(std::move(comb));
    }
    return out;
}

// --- enhancement -------------------------------------------------------------

Dataset enhance(const Dataset& train, const std::vector<GeneratedFeature>& features) {
    if (features.empty()) return train;

    Dataset work = train;
    std::vector<bool> applied(features.size(), false);
    size_t remaining = features.size();
    while (remaining > 0) {
        bool progress = false;
        for (size_t i = 0; i < features.size(); ++i) {
            if (applied[i] || !feature_applicable(features[i], work)) continue;
            auto vals = apply_generated(features[i], work);
            work = work.append_feature({features[i].name, features[i].value_kind, ""},
                                       std::move(vals), no_missing(train.row_count()));
            applied[i] = true;
            --remaining;
            progress = true;
        }
        if (!progress) {
            for (size_t i = 0; i < features.size(); ++i)
                if (!applied[i])
                    fail("enhance: missing inputs for generated feature '" + features[i].name +
                         "'");
        }
    }

    // columns in input-list order
    std::vector<std::string> order = train.feature_names();
    for (const auto& f : features) order.push_back(f.name);
    return work.project(order);
}

}  // namespace kbfg
