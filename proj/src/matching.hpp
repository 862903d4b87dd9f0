#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabular.hpp"

namespace kbfg {

// How train/auxiliary feature correspondence is computed. Exactly one regime
// is active per matching run.
struct MatchStrategy {
    enum class Kind { ManualTable, ExactName, FuzzyName, Embedding, Distribution };
    Kind kind = Kind::ExactName;

    std::string table_path;         // ManualTable: train_name <TAB> aux_name lines
    double name_threshold = 0.2;    // FuzzyName: max normalized edit distance
    std::string vectors_path;       // Embedding
    double min_cosine = 0.5;        // Embedding
    double max_distance = 0.1;      // Distribution

    void validate() const;

    static MatchStrategy exact();
    static MatchStrategy manual(std::string path);
    static MatchStrategy fuzzy(double threshold = 0.2);
    static MatchStrategy embedding(std::string vectors, double min_cos = 0.5);
    static MatchStrategy distribution(double max_dist = 0.1);
};

struct MatchPair {
    std::string train_name;
    std::string aux_name;
    double score = 0.0;  // in [0,1]
};

// The computed correspondence. pairs is one-to-one; unmatched_aux lists every
// auxiliary feature that did not match (the auxiliary-only set).
struct FeatureMatching {
    std::vector<MatchPair> pairs;
    std::vector<std::string> unmatched_aux;
    std::vector<std::string> notes;

    const MatchPair* pair_for_aux(std::string_view aux_name) const;
    const MatchPair* pair_for_train(std::string_view train_name) const;
};

// One-to-one greedy matching: best-scoring pair first, remove both endpoints,
// repeat. Kinds must agree; ties break by train name then aux name.
FeatureMatching match_features(const Dataset& train, const Dataset& aux,
                               const MatchStrategy& strategy);

// Minimum insert/delete/substitute edits.
size_t levenshtein(std::string_view a, std::string_view b);

// Casefold, strip non-alphanumerics, then one pass of a small fixed
// suffix-stripping rule set (see matching.cpp for the exact rules).
std::string canonicalize_name(std::string_view name);

// Continuous pair: two-sample Kolmogorov-Smirnov statistic. Nominal pair:
// total-variation distance between category frequencies over the union of
// categories (by name). Missing cells are excluded.
double distribution_distance(const Column& a, const Column& b);

void save_matching(const FeatureMatching& m, const std::string& path);
FeatureMatching load_matching(const std::string& path);

}  // namespace kbfg
