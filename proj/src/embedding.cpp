#include "embedding.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kbfg {

std::vector<std::string> name_tokens(std::string_view name) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    char prev = 0;
    for (char c : name) {
        unsigned char u = static_cast<unsigned char>(c);
        if (!std::isalnum(u)) {
            flush();
            prev = c;
            continue;
        }
        bool camel = std::isupper(u) && std::islower(static_cast<unsigned char>(prev));
        bool digit_edge = prev != 0 && std::isalnum(static_cast<unsigned char>(prev)) &&
                          (std::isdigit(u) != std::isdigit(static_cast<unsigned char>(prev)));
        if (camel || digit_edge) flush();
        cur.push_back(static_cast<char>(std::tolower(u)));
        prev = c;
    }
    flush();
    return tokens;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail("cosine: dimension mismatch");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open vector file '" + path + "'");
    EmbeddingTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::istringstream ss{std::string(t)};
        std::string token;
        ss >> token;
        std::vector<double> v;
        double x;
        while (ss >> x) v.push_back(x);
        if (v.empty())
            fail(path + ":" + std::to_string(lineno) + ": no vector components");
        if (table.dim_ == 0) table.dim_ = v.size();
        if (v.size() != table.dim_)
            fail(path + ":" + std::to_string(lineno) + ": inconsistent dimension");
        table.vectors_[lower_ascii(token)] = std::move(v);
    }
    if (table.vectors_.empty()) fail(path + ": empty vector file");
    return table;
}

const std::vector<double>* EmbeddingTable::find(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

std::optional<std::vector<double>> EmbeddingTable::phrase_vector(
    std::span<const std::string> tokens) const {
    std::vector<double> sum(dim_, 0.0);
    size_t covered = 0;
    for (const auto& t : tokens) {
        const auto* v = find(t);
        if (!v) continue;
        for (size_t i = 0; i < dim_; ++i) sum[i] += (*v)[i];
        ++covered;
    }
    if (covered == 0) return std::nullopt;
    for (auto& x : sum) x /= static_cast<double>(covered);
    return sum;
}

}  // namespace kbfg
