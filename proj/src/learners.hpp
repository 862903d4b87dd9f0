#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabular.hpp"

namespace kbfg {

enum class Algorithm { DecisionTree, RandomForest, KNearestNeighbors, LinearClassifier };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(std::string_view name);

struct LearnerSpec {
    Algorithm algorithm = Algorithm::DecisionTree;

    // trees (DecisionTree and forest members)
    int max_depth = 0;  // 0 = unbounded
    int min_samples_leaf = 1;
    bool pruning = false;  // DecisionTree: reduced-error pruning on a 20% seeded holdout

    // forest
    int tree_count = 50;
    double feature_fraction = 0.0;  // 0 = sqrt(|F|)/|F|
    bool bootstrap = true;

    // knn
    int neighbors = 3;

    // linear classifier (logistic loss, full-batch gradient descent)
    double learning_rate = 0.1;
    int epochs = 200;
    double l2 = 1e-3;

    uint64_t seed = 0;

    void validate() const;

    static LearnerSpec decision_tree(bool pruning = false, uint64_t seed = 0);
    static LearnerSpec random_forest(int trees = 50, uint64_t seed = 0);
    static LearnerSpec knn(int k = 3, uint64_t seed = 0);
    static LearnerSpec linear(uint64_t seed = 0);
};

// --- fitted models ----------------------------------------------------------
// Models operate on prepared rows: one double per input feature, imputed,
// nominal features as category indices.

struct Model {
    virtual ~Model() = default;
    // classification: class index; regression: value
    virtual double predict_row(std::span<const double> row) const = 0;
    // positive-class (category index 1) score; meaningful for binary classifiers
    virtual double score_row(std::span<const double> row) const { return predict_row(row); }
    virtual const char* type() const = 0;
};

struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    bool equality = false;  // nominal one-vs-rest test: left iff value == threshold
    int left = -1;
    int right = -1;
    double value = 0.0;        // leaf prediction
    double pos_fraction = 0.0; // leaf class-1 fraction (classification)
};

struct DecisionTreeModel final : Model {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    bool classification = false;

    double predict_row(std::span<const double> row) const override;
    double score_row(std::span<const double> row) const override;
    const char* type() const override { return "decision_tree"; }
    size_t node_count() const { return nodes.size(); }
    const TreeNode& route(std::span<const double> row) const;
};

struct RandomForestModel final : Model {
    std::vector<DecisionTreeModel> trees;
    bool classification = false;
    int n_classes = 0;

    double predict_row(std::span<const double> row) const override;
    double score_row(std::span<const double> row) const override;  // positive vote fraction
    const char* type() const override { return "random_forest"; }
};

struct KnnModel final : Model {
    std::vector<std::vector<double>> points;
    std::vector<double> targets;
    std::vector<uint8_t> nominal_dim;  // 1 = 0/1 mismatch distance, else squared difference
    int k = 3;
    bool classification = false;
    int n_classes = 0;

    double predict_row(std::span<const double> row) const override;
    double score_row(std::span<const double> row) const override;
    const char* type() const override { return "knn"; }
};

struct LinearModel final : Model {
    // Inputs are one-hot expanded: continuous feature -> 1 slot, nominal with
    // C categories -> C slots. weights rows are per-class one-vs-rest models
    // (binary targets use a single row for class 1); bias is the last slot.
    std::vector<int> dim_card;  // 0 = continuous
    std::vector<size_t> dim_offset;
    size_t expanded = 0;
    std::vector<std::vector<double>> weights;
    int n_classes = 0;

    double predict_row(std::span<const double> row) const override;
    double score_row(std::span<const double> row) const override;
    const char* type() const override { return "linear"; }
    double logit(std::span<const double> row, size_t model_idx) const;
};

// A fitted classifier or regressor. predict() accepts any dataset containing
// the input features (matched by name, kinds must agree), in any column order.
struct Predictor {
    LearnerSpec spec;
    std::vector<Feature> inputs;
    FeatureKind target_kind;
    std::vector<double> impute;  // per input: mean (continuous) or mode index (nominal)
    std::shared_ptr<const Model> model;

    bool is_classifier() const { return target_kind.is_nominal(); }
    bool is_binary() const {
        return is_classifier() && target_kind.categories.size() == 2;
    }

    struct Output {
        std::vector<double> values;  // class indices or numbers
        std::vector<double> scores;  // binary classifiers only, in [0,1]
    };
    Output predict(const Dataset& d) const;
};

// target: feature name, or std::nullopt for the dataset label. Rows with a
// missing target value are dropped before fitting.
Predictor fit(const LearnerSpec& spec, const Dataset& data,
              const std::optional<std::string>& target = std::nullopt);

// --- cross-validation -------------------------------------------------------

// Per-row fold index in [0, folds). Rows are grouped by class, shuffled with
// the seed, and dealt round-robin so fold sizes and class ratios stay even.
std::vector<int> stratified_fold_assignment(std::span<const double> class_idx, int n_classes,
                                            int folds, uint64_t seed);

// Seeded per-class subsample of round-half-up(alpha * count), at least 1 per
// present class. Returns ascending row indices.
std::vector<size_t> stratified_subset(std::span<const double> class_idx, int n_classes,
                                      double alpha, uint64_t seed);

// Mean accuracy over stratified folds. The target must be nominal. A fold
// whose training side degenerates to a single class predicts that class.
double cross_val_accuracy(const LearnerSpec& spec, const Dataset& data,
                          const std::optional<std::string>& target, int folds, uint64_t seed);
double cross_val_accuracy_with_folds(const LearnerSpec& spec, const Dataset& data,
                                     const std::optional<std::string>& target,
                                     std::span<const int> assignment, int folds);

// --- information-theoretic scoring -------------------------------------------

// Shannon entropy in bits; 0*log0 = 0. Missing labels count as their own class.
double entropy(const Column& labels);

// Nominal feature: H(y) - sum_v p(v) H(y|v), with missing as its own bucket.
// Continuous feature: best binary threshold split at midpoints between
// consecutive sorted distinct values, computed over rows with a present value
// and scaled by the present fraction (keeps 0 <= gain <= H(y)).
double information_gain(const Column& feature, const Column& labels);
double information_gain_values(std::span<const double> values, std::span<const uint8_t> missing,
                               const FeatureKind& kind, std::span<const int> labels,
                               int n_classes);

}  // namespace kbfg
