#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "llm4vis/tabular.hpp"

namespace llm4vis::features {

inline constexpr std::string_view kCatalogVersion = "llm4vis-cat-1";

/// A feature value: number, boolean, or missing. Non-finite numbers are
/// stored as missing.
class FeatureValue {
public:
    FeatureValue() = default;
    static FeatureValue missing() { return {}; }
    static FeatureValue boolean(bool b) { return FeatureValue{Value{b}}; }
    static FeatureValue number(double v);
    static FeatureValue number(std::optional<double> v) { return v ? number(*v) : missing(); }

    bool is_missing() const { return std::holds_alternative<std::monostate>(value_); }
    bool is_number() const { return std::holds_alternative<double>(value_); }
    bool is_boolean() const { return std::holds_alternative<bool>(value_); }
    double as_number() const { return std::get<double>(value_); }
    bool as_boolean() const { return std::get<bool>(value_); }

    friend bool operator==(const FeatureValue&, const FeatureValue&) = default;

private:
    using Value = std::variant<std::monostate, double, bool>;
    explicit FeatureValue(Value v) : value_(v) {}
    Value value_;
};

enum class FeatureKind { Numeric, Boolean };

struct FeatureEntry {
    std::string name;
    FeatureValue value;

    friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

class FeatureSchema {
public:
    FeatureSchema(std::string version, std::vector<std::pair<std::string, FeatureKind>> features);

    const std::string& version() const { return version_; }
    const std::vector<std::string>& names() const { return names_; }
    FeatureKind kind(std::size_t i) const { return kinds_[i]; }
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::size_t size() const { return names_.size(); }

private:
    std::string version_;
    std::vector<std::string> names_;
    std::vector<FeatureKind> kinds_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// The built-in catalog: per-column features for x then y (suffixed _x/_y),
/// followed by the cross-column features.
const FeatureSchema& catalog();

class FeatureMap {
public:
    FeatureMap() = default;
    /// Throws ConfigError unless entry names equal the schema's names in order.
    FeatureMap(const FeatureSchema& schema, std::vector<FeatureEntry> entries);

    const std::string& schema_version() const { return schema_version_; }
    const std::vector<FeatureEntry>& entries() const { return entries_; }
    const FeatureValue& at(std::string_view name) const;
    bool empty() const { return entries_.empty(); }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    std::string schema_version_;
    std::vector<FeatureEntry> entries_;
};

struct FeatureVector {
    std::string schema_version;
    std::vector<double> values;
    bool standardized = false;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureMoments {
    double mean = 0.0;
    double std = 0.0;

    friend bool operator==(const FeatureMoments&, const FeatureMoments&) = default;
};

/// Pool mean and population std per numeric feature name.
struct StandardizationStats {
    std::map<std::string, FeatureMoments, std::less<>> by_name;

    friend bool operator==(const StandardizationStats&, const StandardizationStats&) = default;
};

enum class ColumnRole { X, Y };

/// Per-column features with the role suffix applied, in catalog order.
std::vector<FeatureEntry> extract_single_column_features(const tabular::Column& col, ColumnRole role);

/// Cross-column features in catalog order.
std::vector<FeatureEntry> extract_cross_column_features(const tabular::Column& x, const tabular::Column& y);

/// Full catalog map for a dataset.
FeatureMap extract_features(const tabular::TabularDataset& ds);

/// Mean/std over present values of every numeric feature. A feature with no
/// present value gets mean 0 and std 0.
StandardizationStats compute_standardization(std::span<const FeatureMap> pool, const FeatureSchema& schema);

/// Booleans become 0/1; numerics are z-scored (std 0 gives 0, a numeric
/// absent from `stats` is left unscaled); missing becomes 0.
FeatureVector vectorize(const FeatureMap& features, const FeatureSchema& schema, const StandardizationStats& stats);

nlohmann::ordered_json to_json(const FeatureMap& m);
FeatureMap feature_map_from_json(const nlohmann::ordered_json& j, const FeatureSchema& schema);
nlohmann::ordered_json to_json(const StandardizationStats& s);
StandardizationStats standardization_from_json(const nlohmann::ordered_json& j);

}  // namespace llm4vis::features
