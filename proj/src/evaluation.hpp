#pragma once

#include <string>
#include <vector>

#include "generation.hpp"

namespace kbfg {

// --- FGT construction from a single dataset -----------------------------------

struct FgtSplitSpec {
    double mu1 = 1.0 / 3;  // intersection share of the features
    double mu2 = 2.0 / 3;  // train share of the residual features
    uint64_t seed = 0;

    void validate() const;
};

struct FgtSplit {
    Dataset train;
    Dataset aux;  // keeps the label: it stays eligible as a secondary target
};

// Rows are split into disjoint halves (sizes differing by at most one, train
// gets the extra row); round-half-up(mu1*|F|) features are shared, the rest
// split round-half-up(mu2*rest) to train and the remainder to aux. Feature
// order follows the source schema.
FgtSplit split_fgt(const Dataset& d, const FgtSplitSpec& spec);

// --- significance -------------------------------------------------------------

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

// Standard paired Student t on a-b with k-1 degrees of freedom; two-sided p
// via the regularized incomplete beta function. All-zero differences give
// t=0, p=1; zero variance with nonzero mean is reported with the sentinels
// t=+/-1e15, p=0 (printed as p < 1e-12).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double df);

// --- testing protocol ----------------------------------------------------------

struct ProtocolAux {
    Dataset dataset;
    MatchStrategy strategy;
    std::string id;
};

struct ProtocolConfig {
    int folds = 10;
    double alpha = 0.25;  // per-fold training reduction
    std::vector<LearnerSpec> primary_specs;
    GenerationConfig generation;
    size_t top_k_cap = 50;
    bool emit_curve = false;
    size_t curve_group = 5;
    uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
};

struct FoldFeature {
    std::string name;
    std::string source_dataset;
    std::string source_target;
    double utility = 0.0;
    double information_gain = 0.0;
    std::vector<std::string> inputs;
};

struct LearnerFold {
    double baseline = 0.0;
    double enhanced = 0.0;
    std::vector<FoldFeature> accepted;
    std::vector<double> curve;  // accuracy after each group of accepted features
};

struct LearnerOutcome {
    LearnerSpec spec;
    std::vector<LearnerFold> folds;
    double baseline_mean = 0.0;
    double enhanced_mean = 0.0;
    double delta = 0.0;
    TTestResult ttest;
    bool significant = false;  // p < 0.05 and delta > 0
};

struct AuxStats {
    std::string id;
    double avg_intersection = 0.0;  // AVG |matched pairs| over folds
    double avg_aux_only = 0.0;      // AVG |unmatched aux features| over folds
};

struct ExperimentReport {
    int folds = 0;
    double alpha = 1.0;
    size_t top_k_cap = 0;
    uint64_t seed = 0;
    std::vector<AuxStats> aux_stats;
    std::vector<LearnerOutcome> learners;
    std::vector<std::string> notes;
    std::string normalization_note;
};

// Deterministic row selections shared by the protocol and its tests: the fold
// partition is seeded by cfg.seed alone and the per-fold alpha reduction by
// mix_seed(cfg.seed, fold), so baselines can be reproduced externally.
struct FoldRows {
    std::vector<size_t> test_rows;
    std::vector<size_t> reduced_train_rows;  // B_i^alpha, ascending
};
std::vector<FoldRows> protocol_fold_rows(const Dataset& train, int folds, double alpha,
                                         uint64_t seed);

// The outer-fold evaluation protocol: per fold, generation runs against the
// auxiliaries using the reduced training view, candidates are ranked by
// information gain (capped when the eligible-target count exceeds
// top_k_cap), wrapper-filtered in ranked order, and each primary learner is
// fitted on the reduced view with and without the accepted features.
// Baseline and enhanced paths share folds and reductions.
ExperimentReport run_protocol(const Dataset& train, const std::vector<ProtocolAux>& auxiliaries,
                              const ProtocolConfig& cfg);

std::string report_to_text(const ExperimentReport& r);

}  // namespace kbfg
