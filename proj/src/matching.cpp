#include "matching.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "embedding.hpp"

namespace kbfg {

void MatchStrategy::validate() const {
    switch (kind) {
    case Kind::ManualTable:
        if (table_path.empty()) fail("manual matching needs a table path");
        break;
    case Kind::ExactName:
        break;
    case Kind::FuzzyName:
        if (name_threshold < 0 || name_threshold > 1)
            fail("fuzzy threshold must be in [0,1]");
        break;
    case Kind::Embedding:
        if (vectors_path.empty()) fail("embedding matching needs a vector file");
        if (min_cosine < -1 || min_cosine > 1) fail("min_cosine must be in [-1,1]");
        break;
    case Kind::Distribution:
        if (max_distance < 0 || max_distance > 1)
            fail("distribution max_distance must be in [0,1]");
        break;
    }
}

MatchStrategy MatchStrategy::exact() { return {}; }

MatchStrategy MatchStrategy::manual(std::string path) {
    MatchStrategy s;
    s.kind = Kind::ManualTable;
    s.table_path = std::move(path);
    return s;
}

MatchStrategy MatchStrategy::fuzzy(double threshold) {
    MatchStrategy s;
    s.kind = Kind::FuzzyName;
    s.name_threshold = threshold;
    return s;
}

MatchStrategy MatchStrategy::embedding(std::string vectors, double min_cos) {
    MatchStrategy s;
    s.kind = Kind::Embedding;
    s.vectors_path = std::move(vectors);
    s.min_cosine = min_cos;
    return s;
}

MatchStrategy MatchStrategy::distribution(double max_dist) {
    MatchStrategy s;
    s.kind = Kind::Distribution;
    s.max_distance = max_dist;
    return s;
}

const MatchPair* FeatureMatching::pair_for_aux(std::string_view aux_name) const {
    for (const auto& p : pairs)
        if (p.aux_name == aux_name) return &p;
    return nullptr;
}

const MatchPair* FeatureMatching::pair_for_train(std::string_view train_name) const {
    for (const auto& p : pairs)
        if (p.train_name == train_name) return &p;
    return nullptr;
}

size_t levenshtein(std::string_view a, std::string_view b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

// Fixed suffix-stripping rules, iterated to a fixpoint (capped). This is a
// deliberately small stemmer: feature names are short tokens and determinism
// matters more than linguistic fidelity.
std::string strip_suffix(std::string s) {
    struct Rule {
        std::string_view suffix;
        std::string_view replacement;
        size_t min_stem;
    };
    static const Rule rules[] = {
        {"tional", "tion", 0}, {"ation", "ate", 0}, {"sses", "ss", 0},
        {"ness", "", 0},       {"ment", "", 0},     {"ies", "y", 0},
        {"ing", "", 3},        {"ed", "", 2},       {"ly", "", 2},
        {"s", "", 2},
    };
    for (int pass = 0; pass < 4; ++pass) {
        bool changed = false;
        for (const auto& r : rules) {
            if (s.size() <= r.suffix.size()) continue;
            if (s.compare(s.size() - r.suffix.size(), r.suffix.size(), r.suffix) != 0) continue;
            size_t stem = s.size() - r.suffix.size();
            if (stem < r.min_stem) continue;
            if (r.suffix == "s" && stem >= 1 && s[stem - 1] == 's') continue;
            s.replace(stem, r.suffix.size(), r.replacement);
            changed = true;
            break;
        }
        if (!changed) break;
    }
    return s;
}

}  // namespace

std::string canonicalize_name(std::string_view name) {
    std::string flat;
    for (char c : name) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) flat.push_back(static_cast<char>(std::tolower(u)));
    }
    return strip_suffix(std::move(flat));
}

double distribution_distance(const Column& a, const Column& b) {
    if (a.feature.kind.is_nominal() != b.feature.kind.is_nominal())
        fail("distribution_distance: kind mismatch between '" + a.feature.name + "' and '" +
             b.feature.name + "'");

    if (a.feature.kind.is_nominal()) {
        auto freq = [](const Column& c) {
            std::map<std::string, double> f;
            size_t n = 0;
            for (size_t r = 0; r < c.size(); ++r) {
                if (c.is_missing(r)) continue;
                ++n;
                f[c.feature.kind.categories[static_cast<size_t>(c.values[r])]] += 1.0;
            }
            if (n == 0) fail("distribution_distance: no present values in '" + c.feature.name + "'");
            for (auto& [k, v] : f) v /= static_cast<double>(n);
            return f;
        };
        auto fa = freq(a), fb = freq(b);
        std::map<std::string, double> keys(fa);
        for (const auto& [k, v] : fb) keys.emplace(k, 0.0);
        double total = 0;
        for (const auto& [k, unused] : keys) {
            double pa = fa.count(k) ? fa[k] : 0.0;
            double pb = fb.count(k) ? fb[k] : 0.0;
            total += std::fabs(pa - pb);
        }
        return total / 2;
    }

    auto present = [](const Column& c) {
        std::vector<double> v;
        for (size_t r = 0; r < c.size(); ++r)
            if (!c.is_missing(r)) v.push_back(c.values[r]);
        if (v.empty()) fail("distribution_distance: no present values in '" + c.feature.name + "'");
        std::sort(v.begin(), v.end());
        return v;
    };
    auto va = present(a), vb = present(b);
    const double na = static_cast<double>(va.size()), nb = static_cast<double>(vb.size());
    size_t i = 0, j = 0;
    double d = 0;
    while (i < va.size() && j < vb.size()) {
        double x = std::min(va[i], vb[j]);
        while (i < va.size() && va[i] == x) ++i;
        while (j < vb.size() && vb[j] == x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    return d;
}

namespace {

struct Candidate {
    double score;
    size_t train_idx;
    size_t aux_idx;
};

FeatureMatching greedy_match(const Dataset& train, const Dataset& aux,
                             std::vector<Candidate> candidates,
                             std::vector<std::string> notes) {
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        const auto& an = train.column(a.train_idx).feature.name;
        const auto& bn = train.column(b.train_idx).feature.name;
        if (an != bn) return an < bn;
        return aux.column(a.aux_idx).feature.name < aux.column(b.aux_idx).feature.name;
    });

    std::vector<bool> train_used(train.feature_count(), false);
    std::vector<bool> aux_used(aux.feature_count(), false);
    FeatureMatching m;
    m.notes = std::move(notes);
    for (const auto& c : candidates) {
        if (train_used[c.train_idx] || aux_used[c.aux_idx]) continue;
        train_used[c.train_idx] = true;
        aux_used[c.aux_idx] = true;
        m.pairs.push_back({train.column(c.train_idx).feature.name,
                           aux.column(c.aux_idx).feature.name, c.score});
    }
    for (size_t i = 0; i < aux.feature_count(); ++i)
        if (!aux_used[i]) m.unmatched_aux.push_back(aux.column(i).feature.name);
    return m;
}

FeatureMatching match_manual(const Dataset& train, const Dataset& aux, const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open matching table '" + path + "'");
    FeatureMatching m;
    std::unordered_set<std::string> train_used, aux_used;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        size_t tab = t.find('\t');
        if (tab == std::string_view::npos)
            fail(path + ":" + std::to_string(lineno) + ": expected 'train<TAB>aux'");
        std::string tn(trim(t.substr(0, tab)));
        std::string an(trim(t.substr(tab + 1)));
        const Column* tc = train.find(tn);
        const Column* ac = aux.find(an);
        if (!tc) fail(path + ":" + std::to_string(lineno) + ": unknown training feature '" + tn + "'");
        if (!ac) fail(path + ":" + std::to_string(lineno) + ": unknown auxiliary feature '" + an + "'");
        if (!(tc->feature.kind == ac->feature.kind))
            fail(path + ":" + std::to_string(lineno) + ": kind mismatch for '" + tn + "' / '" +
                 an + "'");
        if (!train_used.insert(tn).second)
            fail(path + ":" + std::to_string(lineno) + ": training feature '" + tn +
                 "' matched twice");
        if (!aux_used.insert(an).second)
            fail(path + ":" + std::to_string(lineno) + ": auxiliary feature '" + an +
                 "' matched twice");
        m.pairs.push_back({std::move(tn), std::move(an), 1.0});
    }
    for (size_t i = 0; i < aux.feature_count(); ++i) {
        const auto& name = aux.column(i).feature.name;
        if (!aux_used.count(name)) m.unmatched_aux.push_back(name);
    }
    return m;
}

}  // namespace

FeatureMatching match_features(const Dataset& train, const Dataset& aux,
                               const MatchStrategy& strategy) {
    strategy.validate();
    using Kind = MatchStrategy::Kind;

    if (strategy.kind == Kind::ManualTable)
        return match_manual(train, aux, strategy.table_path);

    std::vector<Candidate> candidates;
    std::vector<std::string> notes;

    auto kinds_agree = [&](size_t ti, size_t ai) {
        return train.column(ti).feature.kind == aux.column(ai).feature.kind;
    };

    switch (strategy.kind) {
    case Kind::ExactName: {
        for (size_t t = 0; t < train.feature_count(); ++t) {
            std::string tn = lower_ascii(train.column(t).feature.name);
            for (size_t a = 0; a < aux.feature_count(); ++a) {
                if (!kinds_agree(t, a)) continue;
                if (tn == lower_ascii(aux.column(a).feature.name))
                    candidates.push_back({1.0, t, a});
            }
        }
        break;
    }
    case Kind::FuzzyName: {
        for (size_t t = 0; t < train.feature_count(); ++t) {
            std::string tc = canonicalize_name(train.column(t).feature.name);
            for (size_t a = 0; a < aux.feature_count(); ++a) {
                if (!kinds_agree(t, a)) continue;
                std::string ac = canonicalize_name(aux.column(a).feature.name);
                size_t longest = std::max(tc.size(), ac.size());
                double dist = longest == 0
                                  ? 0.0
                                  : static_cast<double>(levenshtein(tc, ac)) / longest;
                if (dist <= strategy.name_threshold)
                    candidates.push_back({1.0 - dist, t, a});
            }
        }
        break;
    }
    case Kind::Embedding: {
        EmbeddingTable table = EmbeddingTable::load(strategy.vectors_path);
        struct Embedded {
            std::optional<std::vector<double>> name_vec;
            std::optional<std::vector<double>> desc_vec;
        };
        auto embed = [&](const Dataset& d) {
            std::vector<Embedded> out(d.feature_count());
            for (size_t i = 0; i < d.feature_count(); ++i) {
                const Feature& f = d.column(i).feature;
                out[i].name_vec = table.phrase_vector(name_tokens(f.name));
                if (!out[i].name_vec)
                    notes.push_back("feature '" + f.name +
                                    "' skipped: no name token in the vector file");
                if (!f.description.empty())
                    out[i].desc_vec = table.phrase_vector(name_tokens(f.description));
            }
            return out;
        };
        auto te = embed(train);
        auto ae = embed(aux);
        for (size_t t = 0; t < train.feature_count(); ++t) {
            if (!te[t].name_vec) continue;
            for (size_t a = 0; a < aux.feature_count(); ++a) {
                if (!ae[a].name_vec || !kinds_agree(t, a)) continue;
                double cos = cosine_similarity(*te[t].name_vec, *ae[a].name_vec);
                // when both sides carry an embeddable description, the name
                // and description cosines are averaged
                if (te[t].desc_vec && ae[a].desc_vec)
                    cos = (cos + cosine_similarity(*te[t].desc_vec, *ae[a].desc_vec)) / 2;
                if (cos >= strategy.min_cosine)
                    candidates.push_back({(cos + 1) / 2, t, a});
            }
        }
        break;
    }
    case Kind::Distribution: {
        // columns with no present values cannot be compared; skip them
        std::vector<bool> train_ok(train.feature_count()), aux_ok(aux.feature_count());
        auto has_values = [](const Column& c) {
            for (size_t r = 0; r < c.size(); ++r)
                if (!c.is_missing(r)) return true;
            return false;
        };
        for (size_t t = 0; t < train.feature_count(); ++t) {
            train_ok[t] = has_values(train.column(t));
            if (!train_ok[t])
                notes.push_back("feature '" + train.column(t).feature.name +
                                "' skipped: no present values");
        }
        for (size_t a = 0; a < aux.feature_count(); ++a) {
            aux_ok[a] = has_values(aux.column(a));
            if (!aux_ok[a])
                notes.push_back("feature '" + aux.column(a).feature.name +
                                "' skipped: no present values");
        }
        for (size_t t = 0; t < train.feature_count(); ++t) {
            if (!train_ok[t]) continue;
            for (size_t a = 0; a < aux.feature_count(); ++a) {
                if (!aux_ok[a] || !kinds_agree(t, a)) continue;
                double dist = distribution_distance(train.column(t), aux.column(a));
                if (dist <= strategy.max_distance)
                    candidates.push_back({1.0 - dist, t, a});
            }
        }
        break;
    }
    case Kind::ManualTable:
        break;  // handled above
    }

    return greedy_match(train, aux, std::move(candidates), std::move(notes));
}

// --- matching file ----------------------------------------------------------

namespace {

std::string quoted_name(std::string_view s) {
    bool needs = s.empty();
    for (char c : s)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '#') needs = true;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::vector<std::string> line_tokens(std::string_view line, const std::string& where) {
    std::vector<std::string> raw;
    std::string cur;
    bool quotes = false, started = false;
    for (char c : line) {
        if (c == '"') quotes = !quotes;
        if (!quotes && std::isspace(static_cast<unsigned char>(c))) {
            if (started) {
                raw.push_back(std::move(cur));
                cur.clear();
                started = false;
            }
            continue;
        }
        cur.push_back(c);
        started = true;
    }
    if (quotes) fail(where + ": unterminated quote");
    if (started) raw.push_back(std::move(cur));
    for (auto& t : raw) {
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
            std::string u;
            for (size_t i = 1; i + 1 < t.size(); ++i) {
                if (t[i] == '"' && i + 2 < t.size() && t[i + 1] == '"') {
                    u.push_back('"');
                    ++i;
                } else {
                    u.push_back(t[i]);
                }
            }
            t = std::move(u);
        }
    }
    return raw;
}

}  // namespace

void save_matching(const FeatureMatching& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write matching '" + path + "'");
    out << "# feature matching\n";
    for (const auto& n : m.notes) out << "note " << quoted_name(n) << "\n";
    for (const auto& p : m.pairs)
        out << "pair " << quoted_name(p.train_name) << " " << quoted_name(p.aux_name) << " "
            << double_to_string(p.score) << "\n";
    for (const auto& a : m.unmatched_aux) out << "aux_only " << quoted_name(a) << "\n";
    if (!out) fail("write failed for '" + path + "'");
}

FeatureMatching load_matching(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open matching '" + path + "'");
    FeatureMatching m;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::string where = path + ":" + std::to_string(lineno);
        auto tokens = line_tokens(t, where);
        if (tokens.empty()) continue;
        if (tokens[0] == "pair") {
            if (tokens.size() != 4) fail(where + ": expected 'pair <train> <aux> <score>'");
            double score;
            if (!parse_double(tokens[3], score)) fail(where + ": bad score");
            m.pairs.push_back({tokens[1], tokens[2], score});
        } else if (tokens[0] == "aux_only") {
            if (tokens.size() != 2) fail(where + ": expected 'aux_only <name>'");
            m.unmatched_aux.push_back(tokens[1]);
        } else if (tokens[0] == "note") {
            if (tokens.size() != 2) fail(where + ": expected 'note <text>'");
            m.notes.push_back(tokens[1]);
        } else {
            fail(where + ": unknown directive '" + tokens[0] + "'");
        }
    }
    return m;
}

}  // namespace kbfg
