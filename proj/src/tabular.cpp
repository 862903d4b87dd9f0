#include "tabular.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace kbfg {

FeatureKind FeatureKind::nominal(std::vector<std::string> cats) {
    if (cats.empty()) fail("nominal kind requires at least one category");
    std::unordered_set<std::string_view> seen;
    for (const auto& c : cats)
        if (!seen.insert(c).second) fail("duplicate category '" + c + "' in nominal kind");
    FeatureKind k;
    k.tag = Kind::Nominal;
    k.categories = std::move(cats);
    return k;
}

int FeatureKind::category_index(std::string_view cat) const {
    for (size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == cat) return static_cast<int>(i);
    return -1;
}

std::string Column::cell_text(size_t row) const {
    if (is_missing(row)) return "";
    if (feature.kind.is_nominal())
        return feature.kind.categories[static_cast<size_t>(values[row])];
    return double_to_string(values[row]);
}

ColumnPtr make_column(Feature f, std::vector<double> values, std::vector<uint8_t> missing) {
    if (values.size() != missing.size()) fail("column value/missing length mismatch");
    if (f.name.empty()) fail("feature name must be non-empty");
    if (f.kind.is_nominal()) {
        const double n = static_cast<double>(f.kind.categories.size());
        for (size_t i = 0; i < values.size(); ++i) {
            if (missing[i]) continue;
            if (values[i] < 0 || values[i] >= n || values[i] != std::floor(values[i]))
                fail("invalid category index in column '" + f.name + "'");
        }
    }
    auto col = std::make_shared<Column>();
    col->feature = std::move(f);
    col->values = std::move(values);
    col->missing = std::move(missing);
    return col;
}

Dataset Dataset::make(std::vector<ColumnPtr> columns, ColumnPtr label, std::string missing_token) {
    Dataset d;
    size_t rows = columns.empty() ? (label ? label->size() : 0) : columns.front()->size();
    std::unordered_set<std::string_view> names;
    for (const auto& c : columns) {
        if (!c) fail("null column");
        if (c->size() != rows) fail("row count mismatch in column '" + c->feature.name + "'");
        if (!names.insert(c->feature.name).second)
            fail("duplicate feature name '" + c->feature.name + "'");
    }
    if (label) {
        if (label->size() != rows) fail("label row count mismatch");
        if (names.count(label->feature.name))
            fail("label name '" + label->feature.name + "' collides with a feature");
    }
    d.columns_ = std::move(columns);
    d.label_ = std::move(label);
    d.rows_ = rows;
    d.missing_token_ = std::move(missing_token);
    return d;
}

int Dataset::index_of(std::string_view name) const {
    for (size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i]->feature.name == name) return static_cast<int>(i);
    return -1;
}

const Column* Dataset::find(std::string_view name) const {
    int i = index_of(name);
    return i < 0 ? nullptr : columns_[static_cast<size_t>(i)].get();
}

const Column& Dataset::label() const {
    if (!label_) fail("dataset is not labeled");
    return *label_;
}

std::vector<Feature> Dataset::features() const {
    std::vector<Feature> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c->feature);
    return out;
}

std::vector<std::string> Dataset::feature_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c->feature.name);
    return out;
}

Dataset Dataset::normalized() const {
    std::vector<ColumnPtr> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) {
        if (c->feature.kind.is_nominal()) {
            cols.push_back(c);
            continue;
        }
        double lo = 0, hi = 0;
        bool any = false;
        for (size_t i = 0; i < c->size(); ++i) {
            if (c->is_missing(i)) continue;
            if (!any || c->values[i] < lo) lo = any ? std::min(lo, c->values[i]) : c->values[i];
            hi = any ? std::max(hi, c->values[i]) : c->values[i];
            any = true;
        }
        std::vector<double> v = c->values;
        if (any) {
            const double span = hi - lo;
            for (size_t i = 0; i < v.size(); ++i) {
                if (c->is_missing(i)) continue;
                v[i] = span > 0 ? (v[i] - lo) / span : 0.0;
            }
        }
        cols.push_back(make_column(c->feature, std::move(v), c->missing));
    }
    return make(std::move(cols), label_, missing_token_);
}

Dataset Dataset::project(std::span<const std::string> names) const {
    std::vector<ColumnPtr> cols;
    cols.reserve(names.size());
    for (const auto& n : names) {
        int i = index_of(n);
        if (i < 0) fail("project: unknown feature '" + n + "'");
        cols.push_back(columns_[static_cast<size_t>(i)]);
    }
    Dataset d;
    d.columns_ = std::move(cols);
    d.label_ = label_;
    d.rows_ = rows_;
    d.missing_token_ = missing_token_;
    return d;
}

Dataset Dataset::append_feature(Feature f, std::vector<double> values,
                                std::vector<uint8_t> missing) const {
    if (values.size() != rows_) fail("append_feature: value count != row count");
    if (index_of(f.name) >= 0 || (label_ && label_->feature.name == f.name))
        fail("append_feature: name '" + f.name + "' already present");
    std::vector<ColumnPtr> cols = columns_;
    cols.push_back(make_column(std::move(f), std::move(values), std::move(missing)));
    return make(std::move(cols), label_, missing_token_);
}

Dataset Dataset::take_rows(std::span<const size_t> rows) const {
    auto slice = [&](const Column& c) {
        std::vector<double> v;
        std::vector<uint8_t> m;
        v.reserve(rows.size());
        m.reserve(rows.size());
        for (size_t r : rows) {
            if (r >= rows_) fail("take_rows: index out of range");
            v.push_back(c.values[r]);
            m.push_back(c.missing[r]);
        }
        return make_column(c.feature, std::move(v), std::move(m));
    };
    std::vector<ColumnPtr> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) cols.push_back(slice(*c));
    ColumnPtr lab = label_ ? slice(*label_) : nullptr;
    return make(std::move(cols), std::move(lab), missing_token_);
}

Dataset Dataset::without_label() const {
    Dataset d = *this;
    d.label_ = nullptr;
    return d;
}

Dataset Dataset::with_label(ColumnPtr label) const {
    return make(columns_, std::move(label), missing_token_);
}

Dataset Dataset::with_missing_token(std::string token) const {
    Dataset d = *this;
    d.missing_token_ = std::move(token);
    return d;
}

static void digest_column(const Column& c, uint64_t& h) {
    h = fnv1a64_str(c.feature.name, h);
    h = fnv1a64_str(c.feature.kind.is_nominal() ? "N" : "C", h);
    for (const auto& cat : c.feature.kind.categories) h = fnv1a64_str(cat, h);
    h = fnv1a64_str(c.feature.description, h);
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.is_missing(i)) {
            h = fnv1a64_str("?m", h);
        } else {
            double v = c.values[i];
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            h = fnv1a64({bytes, sizeof(double)}, h);
        }
    }
}

uint64_t Dataset::content_digest() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& c : columns_) digest_column(*c, h);
    h = fnv1a64_str(label_ ? "L" : "U", h);
    if (label_) digest_column(*label_, h);
    return h;
}

static bool column_equal(const Column& a, const Column& b) {
    if (!(a.feature == b.feature) || a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a.missing[i] != b.missing[i]) return false;
        if (!a.missing[i] && a.values[i] != b.values[i]) return false;
    }
    return true;
}

bool Dataset::same_content(const Dataset& other) const {
    if (rows_ != other.rows_ || columns_.size() != other.columns_.size()) return false;
    for (size_t i = 0; i < columns_.size(); ++i)
        if (!column_equal(*columns_[i], *other.columns_[i])) return false;
    if (labeled() != other.labeled()) return false;
    if (labeled() && !column_equal(*label_, *other.label_)) return false;
    return true;
}

// --- CSV ------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    size_t line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field.empty() && !field_started) {
                quoted = true;
                field_started = true;
            } else {
                field.push_back(c);
            }
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') break;  // swallow CR of CRLF
            [[fallthrough]];
        case '\n':
            end_row();
            ++line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) fail(path + ": unterminated quoted field at line " + std::to_string(line));
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string csv_quote(std::string_view field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs && !field.empty() &&
        (std::isspace(static_cast<unsigned char>(field.front())) ||
         std::isspace(static_cast<unsigned char>(field.back()))))
        needs = true;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

// --- schema ---------------------------------------------------------------

namespace {

struct SchemaColumn {
    Feature feature;
    bool is_label = false;
};

struct Schema {
    std::vector<SchemaColumn> columns;  // declaration order
    std::string missing_token = "?";
    bool missing_declared = false;

    const SchemaColumn* find(std::string_view name) const {
        for (const auto& c : columns)
            if (c.feature.name == name) return &c;
        return nullptr;
    }
};

// Splits a schema line on whitespace outside quotes, keeping quote characters
// in place; unquoting happens contextually so category lists survive intact.
std::vector<std::string> schema_tokens(std::string_view line, const std::string& where) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    bool started = false;
    for (char c : line) {
        if (c == '"') in_quotes = !in_quotes;
        if (!in_quotes && std::isspace(static_cast<unsigned char>(c))) {
            if (started) {
                out.push_back(std::move(cur));
                cur.clear();
                started = false;
            }
            continue;
        }
        cur.push_back(c);
        started = true;
    }
    if (in_quotes) fail(where + ": unterminated quote");
    if (started) out.push_back(std::move(cur));
    return out;
}

// Removes one level of double quotes; "" collapses to a single quote.
std::string unquote(std::string_view raw, const std::string& where) {
    if (raw.size() < 2 || raw.front() != '"') return std::string(raw);
    std::string out;
    for (size_t i = 1; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') {
            if (i + 1 < raw.size() && raw[i + 1] == '"') {
                out.push_back('"');
                ++i;
            } else if (i + 1 == raw.size()) {
                return out;
            } else {
                fail(where + ": malformed quoting in '" + std::string(raw) + "'");
            }
        } else {
            out.push_back(c);
        }
    }
    fail(where + ": unterminated quote in '" + std::string(raw) + "'");
}

// Category lists: |-separated, categories may be individually quoted.
std::vector<std::string> split_categories(std::string_view spec, const std::string& where) {
    std::vector<std::string> cats;
    std::string cur;
    bool in_quotes = false;
    for (char c : spec) {
        if (c == '"') in_quotes = !in_quotes;
        if (!in_quotes && c == '|') {
            cats.push_back(unquote(cur, where));
            cur.clear();
            continue;
        }
        cur.push_back(c);
    }
    if (in_quotes) fail(where + ": unterminated quote in category list");
    cats.push_back(unquote(cur, where));
    for (const auto& c : cats)
        if (c.empty()) fail(where + ": empty category");
    return cats;
}

Schema parse_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open schema '" + path + "'");
    Schema schema;
    bool label_seen = false;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string where = path + ":" + std::to_string(lineno);
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto tokens = schema_tokens(t, where);
        if (tokens.empty()) continue;
        if (tokens[0] == "missing") {
            if (tokens.size() != 2) fail(where + ": expected 'missing <token>'");
            schema.missing_token = unquote(tokens[1], where);
            schema.missing_declared = true;
            continue;
        }
        if (tokens[0] != "column")
            fail(where + ": unknown directive '" + tokens[0] + "'");
        if (tokens.size() < 3) fail(where + ": expected 'column <name> <kind> ...'");
        SchemaColumn col;
        col.feature.name = unquote(tokens[1], where);
        if (col.feature.name.empty()) fail(where + ": empty column name");
        size_t next = 3;
        if (tokens[2] == "continuous") {
            col.feature.kind = FeatureKind::continuous();
        } else if (tokens[2] == "nominal") {
            if (tokens.size() < 4) fail(where + ": nominal kind needs categories");
            col.feature.kind = FeatureKind::nominal(split_categories(tokens[3], where));
            next = 4;
        } else {
            fail(where + ": unknown kind '" + tokens[2] + "'");
        }
        while (next < tokens.size()) {
            if (tokens[next] == "label") {
                if (label_seen) fail(where + ": more than one label column");
                col.is_label = true;
                label_seen = true;
                ++next;
            } else if (tokens[next] == "desc") {
                if (next + 1 >= tokens.size()) fail(where + ": desc needs text");
                col.feature.description = unquote(tokens[next + 1], where);
                next += 2;
            } else {
                fail(where + ": unexpected token '" + tokens[next] + "'");
            }
        }
        if (schema.find(col.feature.name))
            fail(where + ": duplicate column '" + col.feature.name + "'");
        schema.columns.push_back(std::move(col));
    }
    if (schema.columns.empty()) fail(path + ": schema declares no columns");
    return schema;
}

std::string quote_schema_token(std::string_view s) {
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

std::string quote_category(std::string_view s) {
    bool needs = s.empty() || s.find('|') != std::string_view::npos;
    for (char c : s)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '"') needs = true;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

Dataset parse_dataset(const std::string& data_path, const std::string& schema_path) {
    Schema schema = parse_schema(schema_path);
    auto rows = read_csv(data_path);
    if (rows.empty()) fail(data_path + ": missing header row");

    const auto& header = rows.front();
    if (header.size() != schema.columns.size())
        fail(data_path + ": header has " + std::to_string(header.size()) +
             " columns, schema declares " + std::to_string(schema.columns.size()));

    std::vector<const SchemaColumn*> decls;
    decls.reserve(header.size());
    std::unordered_set<std::string_view> seen;
    for (const auto& name : header) {
        const SchemaColumn* d = schema.find(name);
        if (!d) fail(data_path + ": column '" + name + "' not declared in schema");
        if (!seen.insert(name).second) fail(data_path + ": duplicate column '" + name + "'");
        decls.push_back(d);
    }

    const size_t n = rows.size() - 1;
    std::vector<std::vector<double>> values(header.size(), std::vector<double>(n, 0.0));
    std::vector<std::vector<uint8_t>> missing(header.size(), std::vector<uint8_t>(n, 0));

    for (size_t r = 0; r < n; ++r) {
        const auto& row = rows[r + 1];
        if (row.size() != header.size())
            fail(data_path + ": row " + std::to_string(r + 2) + " has " +
                 std::to_string(row.size()) + " fields, expected " +
                 std::to_string(header.size()));
        for (size_t c = 0; c < row.size(); ++c) {
            const std::string& cell = row[c];
            if (cell.empty() || cell == schema.missing_token) {
                missing[c][r] = 1;
                continue;
            }
            const Feature& f = decls[c]->feature;
            if (f.kind.is_nominal()) {
                int idx = f.kind.category_index(cell);
                if (idx < 0)
                    fail(data_path + ": row " + std::to_string(r + 2) + ", column '" +
                         f.name + "': unknown category '" + cell + "'");
                values[c][r] = idx;
            } else {
                double v;
                if (!parse_double(cell, v))
                    fail(data_path + ": row " + std::to_string(r + 2) + ", column '" +
                         f.name + "': '" + cell + "' is not a number");
                values[c][r] = v;
            }
        }
    }

    std::vector<ColumnPtr> cols;
    ColumnPtr label;
    for (size_t c = 0; c < header.size(); ++c) {
        auto col = make_column(decls[c]->feature, std::move(values[c]), std::move(missing[c]));
        if (decls[c]->is_label) label = std::move(col);
        else cols.push_back(std::move(col));
    }
    return Dataset::make(std::move(cols), std::move(label), schema.missing_token);
}

void serialize_dataset(const Dataset& d, const std::string& data_path,
                       const std::string& schema_path) {
    // Label column is written last.
    std::vector<const Column*> cols;
    for (const auto& c : d.columns()) cols.push_back(c.get());
    if (d.labeled()) cols.push_back(&d.label());

    {
        std::ofstream out(schema_path, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot write schema '" + schema_path + "'");
        out << "missing " << quote_schema_token(d.missing_token()) << "\n";
        for (const Column* c : cols) {
            out << "column " << quote_schema_token(c->feature.name) << " ";
            if (c->feature.kind.is_nominal()) {
                out << "nominal ";
                const auto& cats = c->feature.kind.categories;
                for (size_t i = 0; i < cats.size(); ++i)
                    out << (i ? "|" : "") << quote_category(cats[i]);
            } else {
                out << "continuous";
            }
            if (d.labeled() && c == &d.label()) out << " label";
            if (!c->feature.description.empty())
                out << " desc " << quote_schema_token(c->feature.description);
            out << "\n";
        }
        if (!out) fail("write failed for '" + schema_path + "'");
    }
    {
        std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot write '" + data_path + "'");
        for (size_t i = 0; i < cols.size(); ++i)
            out << (i ? "," : "") << csv_quote(cols[i]->feature.name);
        out << "\n";
        for (size_t r = 0; r < d.row_count(); ++r) {
            for (size_t i = 0; i < cols.size(); ++i) {
                if (i) out << ",";
                if (cols[i]->is_missing(r)) out << csv_quote(d.missing_token());
                else out << csv_quote(cols[i]->cell_text(r));
            }
            out << "\n";
        }
        if (!out) fail("write failed for '" + data_path + "'");
    }
}

}  // namespace kbfg
