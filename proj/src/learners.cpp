#include "learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kbfg {

const char* algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::DecisionTree: return "decision_tree";
    case Algorithm::RandomForest: return "random_forest";
    case Algorithm::KNearestNeighbors: return "knn";
    case Algorithm::LinearClassifier: return "linear";
    }
    return "?";
}

Algorithm algorithm_from_name(std::string_view name) {
    if (name == "decision_tree") return Algorithm::DecisionTree;
    if (name == "random_forest") return Algorithm::RandomForest;
    if (name == "knn") return Algorithm::KNearestNeighbors;
    if (name == "linear") return Algorithm::LinearClassifier;
    fail("unknown learner algorithm '" + std::string(name) + "'");
}

void LearnerSpec::validate() const {
    if (max_depth < 0) fail("max_depth must be >= 0");
    if (min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
    if (tree_count < 1) fail("tree_count must be >= 1");
    if (feature_fraction < 0 || feature_fraction > 1)
        fail("feature_fraction must be in [0,1] (0 selects the sqrt default)");
    if (neighbors < 1) fail("neighbors must be >= 1");
    if (learning_rate <= 0) fail("learning_rate must be > 0");
    if (epochs < 1) fail("epochs must be >= 1");
    if (l2 < 0) fail("l2 must be >= 0");
}

LearnerSpec LearnerSpec::decision_tree(bool pruning, uint64_t seed) {
    LearnerSpec s;
    s.algorithm = Algorithm::DecisionTree;
    s.pruning = pruning;
    s.seed = seed;
    return s;
}

LearnerSpec LearnerSpec::random_forest(int trees, uint64_t seed) {
    LearnerSpec s;
    s.algorithm = Algorithm::RandomForest;
    s.tree_count = trees;
    s.seed = seed;
    return s;
}

LearnerSpec LearnerSpec::knn(int k, uint64_t seed) {
    LearnerSpec s;
    s.algorithm = Algorithm::KNearestNeighbors;
    s.neighbors = k;
    s.seed = seed;
    return s;
}

LearnerSpec LearnerSpec::linear(uint64_t seed) {
    LearnerSpec s;
    s.algorithm = Algorithm::LinearClassifier;
    s.seed = seed;
    return s;
}

// --- tree -------------------------------------------------------------------

namespace {

constexpr double kMinGain = 1e-12;

struct TreeData {
    // column-major prepared values
    const std::vector<std::vector<double>>* cols;
    const std::vector<double>* y;
    std::vector<int> feature_card;  // 0 = continuous, else #categories
    bool classification;
    int n_classes;
};

struct TreeParams {
    int max_depth;
    int min_samples_leaf;
    // draws the candidate feature set for one node; empty = all features
    std::function<std::vector<int>()> sample_features;
};

double gini_from_counts(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
        double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

int majority_class(const std::vector<int>& counts) {
    int best = 0;
    for (size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = static_cast<int>(i);
    return best;
}

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool equality = false;
};

class TreeBuilder {
public:
    TreeBuilder(const TreeData& data, const TreeParams& params)
        : d_(data), p_(params) {}

    std::vector<TreeNode> build(std::vector<size_t> rows) {
        nodes_.clear();
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    const TreeData& d_;
    const TreeParams& p_;
    std::vector<TreeNode> nodes_;

    int make_leaf(const std::vector<size_t>& rows) {
        TreeNode node;
        if (d_.classification) {
            std::vector<int> counts(d_.n_classes, 0);
            for (size_t r : rows) ++counts[static_cast<int>((*d_.y)[r])];
            node.value = majority_class(counts);
            if (d_.n_classes == 2 && !rows.empty())
                node.pos_fraction = static_cast<double>(counts[1]) / rows.size();
        } else {
            double sum = 0;
            for (size_t r : rows) sum += (*d_.y)[r];
            node.value = rows.empty() ? 0.0 : sum / rows.size();
        }
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    SplitChoice best_split(const std::vector<size_t>& rows, const std::vector<int>& feats) const {
        SplitChoice best;
        const size_t n = rows.size();
        const int min_leaf = p_.min_samples_leaf;

        std::vector<int> parent_counts;
        double parent_impurity = 0;
        double sum_all = 0, sumsq_all = 0;
        if (d_.classification) {
            parent_counts.assign(d_.n_classes, 0);
            for (size_t r : rows) ++parent_counts[static_cast<int>((*d_.y)[r])];
            parent_impurity = gini_from_counts(parent_counts, static_cast<int>(n));
        } else {
            for (size_t r : rows) {
                sum_all += (*d_.y)[r];
                sumsq_all += (*d_.y)[r] * (*d_.y)[r];
            }
            parent_impurity = sumsq_all - sum_all * sum_all / n;
        }

        std::vector<std::pair<double, double>> vy;  // (value, target)
        for (int f : feats) {
            const auto& col = (*d_.cols)[static_cast<size_t>(f)];
            const int card = d_.feature_card[static_cast<size_t>(f)];
            if (card > 0) {
                // one-vs-rest category tests, ascending category index
                if (d_.classification) {
                    std::vector<std::vector<int>> cc(card, std::vector<int>(d_.n_classes, 0));
                    std::vector<int> cn(card, 0);
                    for (size_t r : rows) {
                        int v = static_cast<int>(col[r]);
                        ++cc[v][static_cast<int>((*d_.y)[r])];
                        ++cn[v];
                    }
                    for (int c = 0; c < card; ++c) {
                        int nl = cn[c];
                        int nr = static_cast<int>(n) - nl;
                        if (nl < min_leaf || nr < min_leaf) continue;
                        std::vector<int> right(parent_counts);
                        for (int k = 0; k < d_.n_classes; ++k) right[k] -= cc[c][k];
                        double child =
                            (nl * gini_from_counts(cc[c], nl) + nr * gini_from_counts(right, nr)) / n;
                        double gain = parent_impurity - child;
                        if (gain > best.gain + kMinGain) {
                            best = {gain, f, static_cast<double>(c), true};
                        }
                    }
                } else {
                    std::vector<double> csum(card, 0), csumsq(card, 0);
                    std::vector<int> cn(card, 0);
                    for (size_t r : rows) {
                        int v = static_cast<int>(col[r]);
                        csum[v] += (*d_.y)[r];
                        csumsq[v] += (*d_.y)[r] * (*d_.y)[r];
                        ++cn[v];
                    }
                    for (int c = 0; c < card; ++c) {
                        int nl = cn[c];
                        int nr = static_cast<int>(n) - nl;
                        if (nl < min_leaf || nr < min_leaf) continue;
                        double sse_l = csumsq[c] - csum[c] * csum[c] / nl;
                        double rs = sum_all - csum[c];
                        double rss = sumsq_all - csumsq[c];
                        double sse_r = rss - rs * rs / nr;
                        double gain = parent_impurity - (sse_l + sse_r);
                        if (gain > best.gain + kMinGain) {
                            best = {gain, f, static_cast<double>(c), true};
                        }
                    }
                }
            } else {
                vy.clear();
                vy.reserve(n);
                for (size_t r : rows) vy.emplace_back(col[r], (*d_.y)[r]);
                std::sort(vy.begin(), vy.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                if (d_.classification) {
                    std::vector<int> left(d_.n_classes, 0);
                    std::vector<int> right(parent_counts);
                    for (size_t i = 0; i + 1 < n; ++i) {
                        int cls = static_cast<int>(vy[i].second);
                        ++left[cls];
                        --right[cls];
                        if (vy[i].first == vy[i + 1].first) continue;
                        int nl = static_cast<int>(i) + 1;
                        int nr = static_cast<int>(n) - nl;
                        if (nl < min_leaf || nr < min_leaf) continue;
                        double child =
                            (nl * gini_from_counts(left, nl) + nr * gini_from_counts(right, nr)) / n;
                        double gain = parent_impurity - child;
                        if (gain > best.gain + kMinGain) {
                            best = {gain, f, vy[i].first + (vy[i + 1].first - vy[i].first) / 2,
                                    false};
                        }
                    }
                } else {
                    double ls = 0, lss = 0;
                    for (size_t i = 0; i + 1 < n; ++i) {
                        ls += vy[i].second;
                        lss += vy[i].second * vy[i].second;
                        if (vy[i].first == vy[i + 1].first) continue;
                        int nl = static_cast<int>(i) + 1;
                        int nr = static_cast<int>(n) - nl;
                        if (nl < min_leaf || nr < min_leaf) continue;
                        double sse_l = lss - ls * ls / nl;
                        double rs = sum_all - ls;
                        double rss = sumsq_all - lss;
                        double sse_r = rss - rs * rs / nr;
                        double gain = parent_impurity - (sse_l + sse_r);
                        if (gain > best.gain + kMinGain) {
                            best = {gain, f, vy[i].first + (vy[i + 1].first - vy[i].first) / 2,
                                    false};
                        }
                    }
                }
            }
        }
        return best;
    }

    bool node_is_pure(const std::vector<size_t>& rows) const {
        double first = (*d_.y)[rows.front()];
        for (size_t r : rows)
            if ((*d_.y)[r] != first) return false;
        return true;
    }

    int grow(std::vector<size_t> rows, int depth) {
        if (rows.empty()) fail("tree: empty node");
        const bool depth_capped = p_.max_depth > 0 && depth >= p_.max_depth;
        if (depth_capped || rows.size() < 2 * static_cast<size_t>(p_.min_samples_leaf) ||
            node_is_pure(rows))
            return make_leaf(rows);

        std::vector<int> feats;
        if (p_.sample_features) {
            feats = p_.sample_features();
        } else {
            feats.resize(d_.cols->size());
            std::iota(feats.begin(), feats.end(), 0);
        }
        SplitChoice split = best_split(rows, feats);
        if (split.feature < 0) return make_leaf(rows);

        std::vector<size_t> left_rows, right_rows;
        const auto& col = (*d_.cols)[static_cast<size_t>(split.feature)];
        for (size_t r : rows) {
            bool go_left = split.equality ? col[r] == split.threshold : col[r] <= split.threshold;
            (go_left ? left_rows : right_rows).push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) return make_leaf(rows);

        TreeNode node;
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.equality = split.equality;
        nodes_.push_back(node);
        int self = static_cast<int>(nodes_.size() - 1);
        rows.clear();
        rows.shrink_to_fit();
        int l = grow(std::move(left_rows), depth + 1);
        int r = grow(std::move(right_rows), depth + 1);
        nodes_[static_cast<size_t>(self)].left = l;
        nodes_[static_cast<size_t>(self)].right = r;
        return self;
    }
};

// Reduced-error pruning: replace a subtree by a leaf whenever that does not
// increase error on the holdout rows routed to it.
void prune_tree(std::vector<TreeNode>& nodes, const TreeData& d,
                const std::vector<std::vector<double>>& cols,
                const std::vector<size_t>& grow_rows, const std::vector<size_t>& prune_rows) {
    if (nodes.empty()) return;
    const size_t n_nodes = nodes.size();
    std::vector<std::vector<size_t>> grow_at(n_nodes), prune_at(n_nodes);

    auto route = [&](const std::vector<size_t>& rows, std::vector<std::vector<size_t>>& at) {
        for (size_t r : rows) {
            int i = 0;
            for (;;) {
                at[static_cast<size_t>(i)].push_back(r);
                const TreeNode& nd = nodes[static_cast<size_t>(i)];
                if (nd.feature < 0) break;
                double v = cols[static_cast<size_t>(nd.feature)][r];
                bool go_left = nd.equality ? v == nd.threshold : v <= nd.threshold;
                i = go_left ? nd.left : nd.right;
            }
        }
    };
    route(grow_rows, grow_at);
    route(prune_rows, prune_at);

    // leaf replacement stats from grow rows
    std::vector<double> leaf_value(n_nodes, 0.0);
    std::vector<double> leaf_pos(n_nodes, 0.0);
    for (size_t i = 0; i < n_nodes; ++i) {
        const auto& rows = grow_at[i];
        if (rows.empty()) continue;
        if (d.classification) {
            std::vector<int> counts(d.n_classes, 0);
            for (size_t r : rows) ++counts[static_cast<int>((*d.y)[r])];
            leaf_value[i] = majority_class(counts);
            if (d.n_classes == 2)
                leaf_pos[i] = static_cast<double>(counts[1]) / rows.size();
        } else {
            double sum = 0;
            for (size_t r : rows) sum += (*d.y)[r];
            leaf_value[i] = sum / rows.size();
        }
    }

    auto leaf_error = [&](size_t i) {
        double err = 0;
        for (size_t r : prune_at[i]) {
            if (d.classification)
                err += (*d.y)[r] != leaf_value[i] ? 1.0 : 0.0;
            else {
                double delta = (*d.y)[r] - leaf_value[i];
                err += delta * delta;
            }
        }
        return err;
    };

    // post-order collapse
    std::vector<double> sub_error(n_nodes, 0.0);
    std::function<void(int)> visit = [&](int i) {
        TreeNode& nd = nodes[static_cast<size_t>(i)];
        if (nd.feature < 0) {
            double err = 0;
            for (size_t r : prune_at[static_cast<size_t>(i)]) {
                if (d.classification)
                    err += (*d.y)[r] != nd.value ? 1.0 : 0.0;
                else {
                    double delta = (*d.y)[r] - nd.value;
                    err += delta * delta;
                }
            }
            sub_error[static_cast<size_t>(i)] = err;
            return;
        }
        visit(nd.left);
        visit(nd.right);
        double children = sub_error[static_cast<size_t>(nd.left)] +
                          sub_error[static_cast<size_t>(nd.right)];
        double collapsed = leaf_error(static_cast<size_t>(i));
        if (collapsed <= children && !grow_at[static_cast<size_t>(i)].empty()) {
            nd.feature = -1;
            nd.left = nd.right = -1;
            nd.value = leaf_value[static_cast<size_t>(i)];
            nd.pos_fraction = leaf_pos[static_cast<size_t>(i)];
            sub_error[static_cast<size_t>(i)] = collapsed;
        } else {
            sub_error[static_cast<size_t>(i)] = children;
        }
    };
    visit(0);

    // drop unreachable nodes
    std::vector<TreeNode> compact;
    std::function<int(int)> copy = [&](int i) -> int {
        TreeNode nd = nodes[static_cast<size_t>(i)];
        compact.push_back(nd);
        int self = static_cast<int>(compact.size() - 1);
        if (nd.feature >= 0) {
            compact[static_cast<size_t>(self)].left = copy(nd.left);
            compact[static_cast<size_t>(self)].right = copy(nd.right);
        }
        return self;
    };
    copy(0);
    nodes = std::move(compact);
}

}  // namespace

const TreeNode& DecisionTreeModel::route(std::span<const double> row) const {
    int i = 0;
    for (;;) {
        const TreeNode& nd = nodes[static_cast<size_t>(i)];
        if (nd.feature < 0) return nd;
        double v = row[static_cast<size_t>(nd.feature)];
        bool go_left = nd.equality ? v == nd.threshold : v <= nd.threshold;
        i = go_left ? nd.left : nd.right;
    }
}

double DecisionTreeModel::predict_row(std::span<const double> row) const {
    return route(row).value;
}

double DecisionTreeModel::score_row(std::span<const double> row) const {
    return route(row).pos_fraction;
}

double RandomForestModel::predict_row(std::span<const double> row) const {
    if (classification) {
        std::vector<int> votes(static_cast<size_t>(n_classes), 0);
        for (const auto& t : trees) ++votes[static_cast<size_t>(t.predict_row(row))];
        return majority_class(votes);
    }
    double sum = 0;
    for (const auto& t : trees) sum += t.predict_row(row);
    return sum / trees.size();
}

double RandomForestModel::score_row(std::span<const double> row) const {
    int pos = 0;
    for (const auto& t : trees)
        if (t.predict_row(row) == 1.0) ++pos;
    return static_cast<double>(pos) / trees.size();
}

double KnnModel::predict_row(std::span<const double> row) const {
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        double s = 0;
        const auto& p = points[i];
        for (size_t j = 0; j < p.size(); ++j) {
            if (nominal_dim[j]) s += p[j] != row[j] ? 1.0 : 0.0;
            else {
                double delta = p[j] - row[j];
                s += delta * delta;
            }
        }
        dist.emplace_back(s, i);
    }
    size_t kk = std::min<size_t>(static_cast<size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kk), dist.end());
    if (classification) {
        std::vector<int> votes(static_cast<size_t>(n_classes), 0);
        for (size_t i = 0; i < kk; ++i)
            ++votes[static_cast<size_t>(targets[dist[i].second])];
        return majority_class(votes);
    }
    double sum = 0;
    for (size_t i = 0; i < kk; ++i) sum += targets[dist[i].second];
    return sum / kk;
}

double KnnModel::score_row(std::span<const double> row) const {
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        double s = 0;
        const auto& p = points[i];
        for (size_t j = 0; j < p.size(); ++j) {
            if (nominal_dim[j]) s += p[j] != row[j] ? 1.0 : 0.0;
            else {
                double delta = p[j] - row[j];
                s += delta * delta;
            }
        }
        dist.emplace_back(s, i);
    }
    size_t kk = std::min<size_t>(static_cast<size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kk), dist.end());
    int pos = 0;
    for (size_t i = 0; i < kk; ++i)
        if (targets[dist[i].second] == 1.0) ++pos;
    return static_cast<double>(pos) / kk;
}

double LinearModel::logit(std::span<const double> row, size_t model_idx) const {
    const auto& w = weights[model_idx];
    double z = w[expanded];  // bias
    for (size_t f = 0; f < dim_card.size(); ++f) {
        if (dim_card[f] == 0) {
            z += w[dim_offset[f]] * row[f];
        } else {
            z += w[dim_offset[f] + static_cast<size_t>(row[f])];
        }
    }
    return z;
}

double LinearModel::predict_row(std::span<const double> row) const {
    if (weights.size() == 1) return logit(row, 0) > 0 ? 1.0 : 0.0;
    size_t best = 0;
    double best_z = logit(row, 0);
    for (size_t c = 1; c < weights.size(); ++c) {
        double z = logit(row, c);
        if (z > best_z) {
            best_z = z;
            best = c;
        }
    }
    return static_cast<double>(best);
}

double LinearModel::score_row(std::span<const double> row) const {
    double z = logit(row, 0);
    return 1.0 / (1.0 + std::exp(-z));
}

// --- fitting ----------------------------------------------------------------

namespace {

struct Prepared {
    std::vector<Feature> inputs;
    std::vector<double> impute;
    std::vector<std::vector<double>> cols;  // imputed, column-major, kept rows only
    std::vector<double> y;
    bool classification = false;
    int n_classes = 0;
};

double impute_value(const Column& c, const std::vector<size_t>& rows) {
    if (c.feature.kind.is_nominal()) {
        std::vector<int> counts(c.feature.kind.categories.size(), 0);
        for (size_t r : rows)
            if (!c.is_missing(r)) ++counts[static_cast<size_t>(c.values[r])];
        return majority_class(counts);
    }
    double sum = 0;
    size_t n = 0;
    for (size_t r : rows) {
        if (c.is_missing(r)) continue;
        sum += c.values[r];
        ++n;
    }
    return n ? sum / n : 0.0;
}

Prepared prepare(const LearnerSpec& spec, const Dataset& data,
                 const std::optional<std::string>& target, const Column*& target_col) {
    target_col = nullptr;
    if (target) {
        target_col = data.find(*target);
        if (!target_col) fail("fit: unknown target feature '" + *target + "'");
    } else {
        target_col = &data.label();
    }

    Prepared p;
    for (const auto& c : data.columns())
        if (c.get() != target_col) p.inputs.push_back(c->feature);
    if (p.inputs.empty()) fail("fit: empty feature set");

    std::vector<size_t> rows;
    for (size_t r = 0; r < data.row_count(); ++r)
        if (!target_col->is_missing(r)) rows.push_back(r);
    if (rows.size() < 2) fail("fit: needs at least 2 rows with a target value");

    p.classification = target_col->feature.kind.is_nominal();
    if (!p.classification && spec.algorithm == Algorithm::LinearClassifier)
        fail("linear classifier cannot regress a continuous target");
    if (p.classification) {
        p.n_classes = static_cast<int>(target_col->feature.kind.categories.size());
        std::vector<int> counts(static_cast<size_t>(p.n_classes), 0);
        for (size_t r : rows) ++counts[static_cast<size_t>(target_col->values[r])];
        int present = 0;
        for (int c : counts) present += c > 0 ? 1 : 0;
        if (present < 2) fail("fit: classification target has a single class");
    }

    p.impute.reserve(p.inputs.size());
    p.cols.reserve(p.inputs.size());
    for (const auto& c : data.columns()) {
        if (c.get() == target_col) continue;
        double fillin = impute_value(*c, rows);
        p.impute.push_back(fillin);
        std::vector<double> col;
        col.reserve(rows.size());
        for (size_t r : rows) col.push_back(c->is_missing(r) ? fillin : c->values[r]);
        p.cols.push_back(std::move(col));
    }
    p.y.reserve(rows.size());
    for (size_t r : rows) p.y.push_back(target_col->values[r]);
    return p;
}

std::vector<TreeNode> fit_tree_nodes(const Prepared& p, const LearnerSpec& spec,
                                     const std::vector<size_t>& rows,
                                     const std::function<std::vector<int>()>& sampler) {
    TreeData data;
    data.cols = &p.cols;
    data.y = &p.y;
    data.classification = p.classification;
    data.n_classes = p.n_classes;
    data.feature_card.reserve(p.inputs.size());
    for (const auto& f : p.inputs)
        data.feature_card.push_back(
            f.kind.is_nominal() ? static_cast<int>(f.kind.categories.size()) : 0);
    TreeParams params{spec.max_depth, spec.min_samples_leaf, sampler};
    TreeBuilder builder(data, params);
    return builder.build(rows);
}

std::shared_ptr<DecisionTreeModel> fit_decision_tree(const Prepared& p, const LearnerSpec& spec) {
    auto model = std::make_shared<DecisionTreeModel>();
    model->classification = p.classification;

    const size_t n = p.y.size();
    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), 0);

    size_t holdout = spec.pruning ? n / 5 : 0;
    if (holdout == 0) {
        model->nodes = fit_tree_nodes(p, spec, all, nullptr);
        return model;
    }

    // seeded 20% holdout, stratified for classification
    Rng rng(mix_seed(spec.seed, 0x505255ull));
    std::vector<size_t> prune_rows, grow_rows;
    if (p.classification) {
        std::vector<std::vector<size_t>> per_class(static_cast<size_t>(p.n_classes));
        for (size_t r = 0; r < n; ++r)
            per_class[static_cast<size_t>(p.y[r])].push_back(r);
        for (auto& idx : per_class) {
            rng.shuffle(idx);
            size_t take = idx.size() / 5;
            for (size_t i = 0; i < idx.size(); ++i)
                (i < take ? prune_rows : grow_rows).push_back(idx[i]);
        }
    } else {
        std::vector<size_t> idx = all;
        rng.shuffle(idx);
        for (size_t i = 0; i < idx.size(); ++i)
            (i < holdout ? prune_rows : grow_rows).push_back(idx[i]);
    }
    std::sort(grow_rows.begin(), grow_rows.end());
    std::sort(prune_rows.begin(), prune_rows.end());
    if (grow_rows.size() < 2 || prune_rows.empty()) {
        model->nodes = fit_tree_nodes(p, spec, all, nullptr);
        return model;
    }
    // a holdout may lose classes entirely; fall back to an unpruned tree
    if (p.classification) {
        std::vector<int> counts(static_cast<size_t>(p.n_classes), 0);
        for (size_t r : grow_rows) ++counts[static_cast<size_t>(p.y[r])];
        int present = 0;
        for (int c : counts) present += c > 0 ? 1 : 0;
        if (present < 2) {
            model->nodes = fit_tree_nodes(p, spec, all, nullptr);
            return model;
        }
    }

    model->nodes = fit_tree_nodes(p, spec, grow_rows, nullptr);
    TreeData data;
    data.cols = &p.cols;
    data.y = &p.y;
    data.classification = p.classification;
    data.n_classes = p.n_classes;
    prune_tree(model->nodes, data, p.cols, grow_rows, prune_rows);
    return model;
}

std::shared_ptr<RandomForestModel> fit_random_forest(const Prepared& p, const LearnerSpec& spec) {
    auto model = std::make_shared<RandomForestModel>();
    model->classification = p.classification;
    model->n_classes = p.n_classes;
    const size_t n = p.y.size();
    const size_t n_feats = p.inputs.size();
    double fraction = spec.feature_fraction > 0
                          ? spec.feature_fraction
                          : std::sqrt(static_cast<double>(n_feats)) / n_feats;
    size_t m = std::clamp<size_t>(static_cast<size_t>(std::llround(fraction * n_feats)), 1,
                                  n_feats);

    model->trees.reserve(static_cast<size_t>(spec.tree_count));
    for (int t = 0; t < spec.tree_count; ++t) {
        auto rng = std::make_shared<Rng>(mix_seed(spec.seed, static_cast<uint64_t>(t)));
        std::vector<size_t> rows(n);
        if (spec.bootstrap) {
            for (size_t i = 0; i < n; ++i) rows[i] = rng->uniform_index(n);
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        std::function<std::vector<int>()> sampler;
        if (m < n_feats) {
            sampler = [rng, m, n_feats]() {
                std::vector<int> pool(n_feats);
                std::iota(pool.begin(), pool.end(), 0);
                std::vector<int> picked;
                picked.reserve(m);
                for (size_t i = 0; i < m; ++i) {
                    size_t j = rng->uniform_index(pool.size());
                    picked.push_back(pool[j]);
                    pool[j] = pool.back();
                    pool.pop_back();
                }
                std::sort(picked.begin(), picked.end());
                return picked;
            };
        }
        DecisionTreeModel tree;
        tree.classification = p.classification;
        tree.nodes = fit_tree_nodes(p, spec, rows, sampler);
        model->trees.push_back(std::move(tree));
    }
    return model;
}

std::shared_ptr<KnnModel> fit_knn(const Prepared& p, const LearnerSpec& spec) {
    auto model = std::make_shared<KnnModel>();
    model->classification = p.classification;
    model->n_classes = p.n_classes;
    model->k = spec.neighbors;
    const size_t n = p.y.size();
    model->points.assign(n, std::vector<double>(p.inputs.size(), 0.0));
    for (size_t f = 0; f < p.cols.size(); ++f)
        for (size_t r = 0; r < n; ++r) model->points[r][f] = p.cols[f][r];
    model->targets = p.y;
    model->nominal_dim.reserve(p.inputs.size());
    for (const auto& f : p.inputs)
        model->nominal_dim.push_back(f.kind.is_nominal() ? 1 : 0);
    return model;
}

std::shared_ptr<LinearModel> fit_linear(const Prepared& p, const LearnerSpec& spec) {
    auto model = std::make_shared<LinearModel>();
    model->n_classes = p.n_classes;
    size_t offset = 0;
    for (const auto& f : p.inputs) {
        int card = f.kind.is_nominal() ? static_cast<int>(f.kind.categories.size()) : 0;
        model->dim_card.push_back(card);
        model->dim_offset.push_back(offset);
        offset += card == 0 ? 1 : static_cast<size_t>(card);
    }
    model->expanded = offset;

    const size_t n = p.y.size();
    std::vector<std::vector<double>> x(n, std::vector<double>(offset, 0.0));
    for (size_t f = 0; f < p.cols.size(); ++f) {
        for (size_t r = 0; r < n; ++r) {
            if (model->dim_card[f] == 0)
                x[r][model->dim_offset[f]] = p.cols[f][r];
            else
                x[r][model->dim_offset[f] + static_cast<size_t>(p.cols[f][r])] = 1.0;
        }
    }

    size_t n_models = p.n_classes == 2 ? 1 : static_cast<size_t>(p.n_classes);
    for (size_t mi = 0; mi < n_models; ++mi) {
        double positive = n_models == 1 ? 1.0 : static_cast<double>(mi);
        std::vector<double> w(offset + 1, 0.0);
        std::vector<double> grad(offset + 1, 0.0);
        for (int e = 0; e < spec.epochs; ++e) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (size_t r = 0; r < n; ++r) {
                double z = w[offset];
                for (size_t j = 0; j < offset; ++j) z += w[j] * x[r][j];
                double prob = 1.0 / (1.0 + std::exp(-z));
                double err = prob - (p.y[r] == positive ? 1.0 : 0.0);
                for (size_t j = 0; j < offset; ++j) grad[j] += err * x[r][j];
                grad[offset] += err;
            }
            for (size_t j = 0; j < offset; ++j)
                w[j] -= spec.learning_rate * (grad[j] / n + spec.l2 * w[j]);
            w[offset] -= spec.learning_rate * grad[offset] / n;
        }
        model->weights.push_back(std::move(w));
    }
    return model;
}

}  // namespace

Predictor fit(const LearnerSpec& spec, const Dataset& data,
              const std::optional<std::string>& target) {
    spec.validate();
    const Column* target_col = nullptr;
    Prepared p = prepare(spec, data, target, target_col);

    Predictor out;
    out.spec = spec;
    out.inputs = p.inputs;
    out.target_kind = target_col->feature.kind;
    out.impute = p.impute;

    switch (spec.algorithm) {
    case Algorithm::DecisionTree:
        out.model = fit_decision_tree(p, spec);
        break;
    case Algorithm::RandomForest:
        out.model = fit_random_forest(p, spec);
        break;
    case Algorithm::KNearestNeighbors:
        out.model = fit_knn(p, spec);
        break;
    case Algorithm::LinearClassifier:
        out.model = fit_linear(p, spec);
        break;
    }
    return out;
}

Predictor::Output Predictor::predict(const Dataset& d) const {
    std::vector<const Column*> cols;
    cols.reserve(inputs.size());
    for (const auto& f : inputs) {
        const Column* c = d.find(f.name);
        if (!c) fail("predict: dataset lacks input feature '" + f.name + "'");
        if (!(c->feature.kind == f.kind))
            fail("predict: kind mismatch for feature '" + f.name + "'");
        cols.push_back(c);
    }
    Output out;
    const size_t n = d.row_count();
    out.values.reserve(n);
    const bool want_scores = is_binary();
    if (want_scores) out.scores.reserve(n);
    std::vector<double> row(inputs.size(), 0.0);
    for (size_t r = 0; r < n; ++r) {
        for (size_t f = 0; f < cols.size(); ++f)
            row[f] = cols[f]->is_missing(r) ? impute[f] : cols[f]->values[r];
        out.values.push_back(model->predict_row(row));
        if (want_scores) out.scores.push_back(model->score_row(row));
    }
    return out;
}

// --- cross-validation -------------------------------------------------------

std::vector<int> stratified_fold_assignment(std::span<const double> class_idx, int n_classes,
                                            int folds, uint64_t seed) {
    if (folds < 2) fail("cross-validation needs at least 2 folds");
    if (class_idx.size() < static_cast<size_t>(folds))
        fail("cross-validation: fewer rows than folds");
    std::vector<std::vector<size_t>> per_class(static_cast<size_t>(n_classes));
    for (size_t r = 0; r < class_idx.size(); ++r)
        per_class[static_cast<size_t>(class_idx[r])].push_back(r);
    Rng rng(mix_seed(seed, 0x464f4c44ull));
    std::vector<int> assign(class_idx.size(), 0);
    int cursor = 0;
    for (auto& rows : per_class) {
        rng.shuffle(rows);
        for (size_t r : rows) {
            assign[r] = cursor;
            cursor = (cursor + 1) % folds;
        }
    }
    return assign;
}

std::vector<size_t> stratified_subset(std::span<const double> class_idx, int n_classes,
                                      double alpha, uint64_t seed) {
    if (alpha <= 0 || alpha > 1) fail("subset fraction must be in (0,1]");
    std::vector<std::vector<size_t>> per_class(static_cast<size_t>(n_classes));
    for (size_t r = 0; r < class_idx.size(); ++r)
        per_class[static_cast<size_t>(class_idx[r])].push_back(r);
    Rng rng(mix_seed(seed, 0x414c5048ull));
    std::vector<size_t> keep;
    for (auto& rows : per_class) {
        if (rows.empty()) continue;
        size_t take = std::max<size_t>(1, round_half_up(alpha * rows.size()));
        take = std::min(take, rows.size());
        rng.shuffle(rows);
        keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<long>(take));
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

double cross_val_accuracy_with_folds(const LearnerSpec& spec, const Dataset& data,
                                     const std::optional<std::string>& target,
                                     std::span<const int> assignment, int folds) {
    const Column* tcol = target ? data.find(*target) : &data.label();
    if (!tcol) fail("cross_val_accuracy: unknown target");
    if (!tcol->feature.kind.is_nominal())
        fail("cross_val_accuracy: target must be nominal");
    for (size_t r = 0; r < data.row_count(); ++r)
        if (tcol->is_missing(r)) fail("cross_val_accuracy: missing target value");
    if (assignment.size() != data.row_count())
        fail("cross_val_accuracy: fold assignment length mismatch");

    const int n_classes = static_cast<int>(tcol->feature.kind.categories.size());
    double sum_acc = 0;
    int counted = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<size_t> train_rows, test_rows;
        for (size_t r = 0; r < data.row_count(); ++r)
            (assignment[r] == f ? test_rows : train_rows).push_back(r);
        if (test_rows.empty()) fail("cross_val_accuracy: empty fold " + std::to_string(f));
        if (train_rows.empty()) fail("cross_val_accuracy: empty training side");

        // degenerate single-class training side: predict that class
        std::vector<int> counts(static_cast<size_t>(n_classes), 0);
        for (size_t r : train_rows) ++counts[static_cast<size_t>(tcol->values[r])];
        int present = 0, only = 0;
        for (int c = 0; c < n_classes; ++c)
            if (counts[static_cast<size_t>(c)] > 0) {
                ++present;
                only = c;
            }

        size_t correct = 0;
        if (present < 2) {
            for (size_t r : test_rows)
                if (tcol->values[r] == only) ++correct;
        } else {
            Dataset train = data.take_rows(train_rows);
            Dataset test = data.take_rows(test_rows);
            Predictor m = fit(spec, train, target);
            auto preds = m.predict(test);
            const Column* test_t = target ? test.find(*target) : &test.label();
            for (size_t i = 0; i < test_rows.size(); ++i)
                if (preds.values[i] == test_t->values[i]) ++correct;
        }
        sum_acc += static_cast<double>(correct) / test_rows.size();
        ++counted;
    }
    return counted ? sum_acc / counted : 0.0;
}

double cross_val_accuracy(const LearnerSpec& spec, const Dataset& data,
                          const std::optional<std::string>& target, int folds, uint64_t seed) {
    const Column* tcol = target ? data.find(*target) : &data.label();
    if (!tcol) fail("cross_val_accuracy: unknown target");
    if (!tcol->feature.kind.is_nominal())
        fail("cross_val_accuracy: target must be nominal");
    for (size_t r = 0; r < data.row_count(); ++r)
        if (tcol->is_missing(r)) fail("cross_val_accuracy: missing target value");
    auto assign = stratified_fold_assignment(
        tcol->values, static_cast<int>(tcol->feature.kind.categories.size()), folds, seed);
    return cross_val_accuracy_with_folds(spec, data, target, assign, folds);
}

// --- entropy / information gain ---------------------------------------------

namespace {

double entropy_from_counts(const std::vector<size_t>& counts, size_t total) {
    if (total == 0) return 0.0;
    double h = 0;
    for (size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

double entropy(const Column& labels) {
    if (!labels.feature.kind.is_nominal()) fail("entropy: labels must be nominal");
    if (labels.size() == 0) fail("entropy: empty labels");
    const size_t k = labels.feature.kind.categories.size();
    std::vector<size_t> counts(k + 1, 0);  // +1: missing bucket
    for (size_t r = 0; r < labels.size(); ++r) {
        if (labels.is_missing(r)) ++counts[k];
        else ++counts[static_cast<size_t>(labels.values[r])];
    }
    return entropy_from_counts(counts, labels.size());
}

double information_gain_values(std::span<const double> values, std::span<const uint8_t> missing,
                               const FeatureKind& kind, std::span<const int> labels,
                               int n_classes) {
    const size_t n = values.size();
    if (n == 0 || labels.size() != n) fail("information_gain: length mismatch");

    if (kind.is_nominal()) {
        const size_t buckets = kind.categories.size() + 1;  // + missing bucket
        std::vector<std::vector<size_t>> table(buckets,
                                               std::vector<size_t>(static_cast<size_t>(n_classes), 0));
        std::vector<size_t> bucket_n(buckets, 0);
        std::vector<size_t> label_counts(static_cast<size_t>(n_classes), 0);
        for (size_t r = 0; r < n; ++r) {
            size_t b = missing[r] ? buckets - 1 : static_cast<size_t>(values[r]);
            ++table[b][static_cast<size_t>(labels[r])];
            ++bucket_n[b];
            ++label_counts[static_cast<size_t>(labels[r])];
        }
        double h = entropy_from_counts(label_counts, n);
        double cond = 0;
        for (size_t b = 0; b < buckets; ++b) {
            if (bucket_n[b] == 0) continue;
            cond += static_cast<double>(bucket_n[b]) / n * entropy_from_counts(table[b], bucket_n[b]);
        }
        return std::max(0.0, h - cond);
    }

    // continuous: best threshold over present rows, scaled by present fraction
    std::vector<std::pair<double, int>> vy;
    vy.reserve(n);
    for (size_t r = 0; r < n; ++r)
        if (!missing[r]) vy.emplace_back(values[r], labels[r]);
    if (vy.size() < 2) return 0.0;
    std::sort(vy.begin(), vy.end());

    const size_t m = vy.size();
    std::vector<size_t> total(static_cast<size_t>(n_classes), 0);
    for (const auto& [v, c] : vy) ++total[static_cast<size_t>(c)];
    const double h = entropy_from_counts(total, m);
    if (h == 0.0) return 0.0;

    std::vector<size_t> left(static_cast<size_t>(n_classes), 0);
    std::vector<size_t> right(total);
    double best_cond = h;
    for (size_t i = 0; i + 1 < m; ++i) {
        size_t c = static_cast<size_t>(vy[i].second);
        ++left[c];
        --right[c];
        if (vy[i].first == vy[i + 1].first) continue;
        size_t nl = i + 1, nr = m - nl;
        double cond = (nl * entropy_from_counts(left, nl) + nr * entropy_from_counts(right, nr)) /
                      static_cast<double>(m);
        if (cond < best_cond) best_cond = cond;
    }
    double fraction_present = static_cast<double>(m) / static_cast<double>(n);
    return std::max(0.0, fraction_present * (h - best_cond));
}

double information_gain(const Column& feature, const Column& labels) {
    if (!labels.feature.kind.is_nominal()) fail("information_gain: labels must be nominal");
    if (feature.size() != labels.size()) fail("information_gain: length mismatch");
    if (feature.size() == 0) fail("information_gain: empty input");
    for (size_t r = 0; r < labels.size(); ++r)
        if (labels.is_missing(r)) fail("information_gain: missing label value");
    std::vector<int> y;
    y.reserve(labels.size());
    for (size_t r = 0; r < labels.size(); ++r) y.push_back(static_cast<int>(labels.values[r]));
    return information_gain_values(feature.values, feature.missing, feature.feature.kind, y,
                                   static_cast<int>(labels.feature.kind.categories.size()));
}

}  // namespace kbfg
