#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace kbfg {

// Lowercase alphanumeric runs, split at case changes and letter/digit
// boundaries: "BloodPressure2" -> ["blood", "pressure", "2"].
std::vector<std::string> name_tokens(std::string_view name);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Word vectors from a text file, one entry per line: token v1 v2 ... vd.
class EmbeddingTable {
public:
    static EmbeddingTable load(const std::string& path);

    size_t dim() const { return dim_; }
    const std::vector<double>* find(const std::string& token) const;

    // Mean vector of the covered tokens; nullopt when none are covered.
    std::optional<std::vector<double>> phrase_vector(std::span<const std::string> tokens) const;

private:
    std::unordered_map<std::string, std::vector<double>> vectors_;
    size_t dim_ = 0;
};

}  // namespace kbfg
