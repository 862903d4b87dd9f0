#pragma once

#include <optional>
#include <string>
#include <vector>

#include "learners.hpp"
#include "matching.hpp"

namespace kbfg {

struct GenerationConfig {
    LearnerSpec secondary;  // fits the secondary tasks
    LearnerSpec primary;    // evaluated inside the wrapper CV
    int wrapper_folds = 5;
    bool recurrent = false;
    std::optional<size_t> max_targets;
    std::optional<std::string> prioritization_vectors;

    enum class DuplicatePolicy { ArgmaxUtility, Committee };
    DuplicatePolicy duplicate_policy = DuplicatePolicy::ArgmaxUtility;

    // very large intersections keep only the top-K features by information
    // gain with respect to the secondary target
    size_t intersection_cap = 200;
    uint64_t seed = 0;
    int jobs = 1;

    GenerationConfig();
    void validate() const;
};

// A trained predictor over matched features plus metadata. Applying it to any
// dataset containing its inputs yields one value per row: binary classifiers
// emit the positive-class score, multiclass classifiers the predicted label,
// regressors the number.
struct GeneratedFeature {
    std::string name;
    Predictor predictor;
    std::vector<Predictor> committee;  // non-empty for committee features
    std::string source_dataset;
    std::string source_target;
    double utility_at_acceptance = 0.0;
    double information_gain = 0.0;
    FeatureKind value_kind;
    std::vector<double> train_values;  // values on the generating train view

    std::vector<std::string> input_names() const;
};

struct GenerationResult {
    std::vector<GeneratedFeature> features;  // acceptance order
    std::vector<std::string> notes;
};

struct AuxiliaryInput {
    Dataset dataset;
    FeatureMatching matching;
    std::string id;
};

// The output column kind of a predictor used as a feature.
FeatureKind generated_value_kind(const Predictor& p);

// Secondary-task feature selection for very large intersections: keeps the
// top-cap columns by information gain with respect to the target (continuous
// targets are binarized at the median for the ranking), preserving column
// order. Returns the input unchanged when it is already small enough.
std::vector<ColumnPtr> cap_secondary_inputs(const std::vector<ColumnPtr>& cols,
                                            const Column& target, size_t cap);

// Values of a generated feature on a dataset containing its inputs.
std::vector<double> apply_generated(const GeneratedFeature& f, const Dataset& d);

// Basic knowledge-based feature generation against one auxiliary dataset:
// for each auxiliary-only feature (plus the auxiliary label when present) a
// secondary predictor is fitted over the matched features and accepted iff it
// strictly improves the wrapper cross-validation accuracy of the primary
// learner on the training set. In recurrent mode every accepted feature joins
// the working intersection (its auxiliary-side column is the true target).
GenerationResult run_kbfg(const Dataset& train, const Dataset& aux,
                          const FeatureMatching& matching, const GenerationConfig& cfg,
                          const std::string& aux_id = "aux");

// Multi-auxiliary variant: accumulates per-auxiliary kbfg output, resolves
// duplicate approximations, sorts by information gain and greedily re-filters
// with the wrapper.
GenerationResult run_kbfg_star(const Dataset& train,
                               const std::vector<AuxiliaryInput>& auxiliaries,
                               const GenerationConfig& cfg);

// Ranks candidate target names by max cosine similarity to the centroids of
// the positive and negative training examples' feature-name tokens. The train
// label must be binary. Candidates with no covered token rank last in their
// original order.
std::vector<std::string> prioritize_targets(const std::vector<std::string>& candidates,
                                            const Dataset& train,
                                            const std::string& vectors_path);

// Collapses features approximating the same auxiliary target across
// auxiliaries: ArgmaxUtility keeps the member with the highest wrapper-CV
// utility on train; Committee replaces the group by the member mean
// (continuous) or plurality vote (nominal).
std::vector<GeneratedFeature> resolve_duplicates(std::vector<GeneratedFeature> features,
                                                 const Dataset& train,
                                                 GenerationConfig::DuplicatePolicy policy,
                                                 const LearnerSpec& primary, int wrapper_folds,
                                                 uint64_t seed);

// Appends every generated feature to the dataset (values computed in
// dependency order, columns appended in list order).
Dataset enhance(const Dataset& train, const std::vector<GeneratedFeature>& features);

}  // namespace kbfg
