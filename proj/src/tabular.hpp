#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace kbfg {

enum class Kind { Continuous, Nominal };

struct FeatureKind {
    Kind tag = Kind::Continuous;
    std::vector<std::string> categories;  // nominal only; ordered, duplicate-free

    static FeatureKind continuous() { return {}; }
    static FeatureKind nominal(std::vector<std::string> cats);

    bool is_nominal() const { return tag == Kind::Nominal; }
    // -1 when the category is unknown
    int category_index(std::string_view cat) const;
    bool operator==(const FeatureKind&) const = default;
};

struct Feature {
    std::string name;
    FeatureKind kind;
    std::string description;  // empty = none

    bool operator==(const Feature&) const = default;
};

// One column of cells. Continuous cells hold the value, nominal cells hold
// the category index. Missing cells are flagged separately; their value slot
// is 0 and must not be read.
struct Column {
    Feature feature;
    std::vector<double> values;
    std::vector<uint8_t> missing;

    size_t size() const { return values.size(); }
    bool is_missing(size_t row) const { return missing[row] != 0; }
    std::string cell_text(size_t row) const;  // category string / number; "" for missing
};

using ColumnPtr = std::shared_ptr<const Column>;

ColumnPtr make_column(Feature f, std::vector<double> values, std::vector<uint8_t> missing);

// Immutable table of rows over a typed feature schema, optionally labeled.
// All transformations return new datasets; columns are shared by pointer so
// copies are cheap and safe across threads.
class Dataset {
public:
    Dataset() = default;
    static Dataset make(std::vector<ColumnPtr> columns, ColumnPtr label,
                        std::string missing_token = "?");

    size_t row_count() const { return rows_; }
    size_t feature_count() const { return columns_.size(); }
    const std::vector<ColumnPtr>& columns() const { return columns_; }
    const Column& column(size_t i) const { return *columns_.at(i); }
    int index_of(std::string_view name) const;  // -1 when absent
    const Column* find(std::string_view name) const;
    bool labeled() const { return label_ != nullptr; }
    const Column& label() const;
    ColumnPtr label_ptr() const { return label_; }
    std::vector<Feature> features() const;
    std::vector<std::string> feature_names() const;
    const std::string& missing_token() const { return missing_token_; }

    // Continuous features min-max rescaled to [0,1] per column; constant
    // columns map to 0. Nominal features, labels and missing cells unchanged.
    Dataset normalized() const;
    Dataset project(std::span<const std::string> names) const;
    Dataset project(std::initializer_list<std::string> names) const {
        std::vector<std::string> v(names);
        return project(std::span<const std::string>(v));
    }
    Dataset append_feature(Feature f, std::vector<double> values,
                           std::vector<uint8_t> missing) const;
    Dataset take_rows(std::span<const size_t> rows) const;
    Dataset without_label() const;
    Dataset with_label(ColumnPtr label) const;
    Dataset with_missing_token(std::string token) const;

    bool same_content(const Dataset& other) const;
    uint64_t content_digest() const;

private:
    std::vector<ColumnPtr> columns_;
    ColumnPtr label_;
    size_t rows_ = 0;
    std::string missing_token_ = "?";
};

// --- file ingestion -------------------------------------------------------
//
// Data files are RFC-4180 CSV with a header row. The schema file is line
// based:
//
//   # comment
//   missing ?
//   column Glucose continuous
//   column Outcome nominal 0|1 label
//   column "Patient Age" continuous desc "age in years"
//
// Tokens containing whitespace are double-quoted ("" escapes a quote).
// Category lists are |-separated; individual categories may be quoted.
// Empty CSV cells are always missing; `missing` declares one extra token.

Dataset parse_dataset(const std::string& data_path, const std::string& schema_path);
void serialize_dataset(const Dataset& d, const std::string& data_path,
                       const std::string& schema_path);

// Parsed CSV access used by the reader and by tests.
std::vector<std::vector<std::string>> read_csv(const std::string& path);
std::string csv_quote(std::string_view field);

}  // namespace kbfg
