#include "llm4vis/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "llm4vis/error.hpp"
#include "llm4vis/stats.hpp"
#include "llm4vis/text.hpp"

namespace llm4vis::features {

using tabular::Cell;
using tabular::Column;
using tabular::DataType;
using tabular::GeneralType;

namespace {

constexpr double kSpacingTolerance = 1e-3;

using Spec = std::pair<const char*, FeatureKind>;
constexpr auto N = FeatureKind::Numeric;
constexpr auto B = FeatureKind::Boolean;

// Per-column features, emitted once per role.
const std::vector<Spec>& single_specs() {
    static const std::vector<Spec> specs = {
        {"data_type_is_string", B},
        {"data_type_is_integer", B},
        {"data_type_is_decimal", B},
        {"data_type_is_time", B},
        {"general_type_is_c", B},
        {"general_type_is_q", B},
        {"general_type_is_t", B},
        {"length", N},
        {"percentage_none", N},
        {"num_unique", N},
        {"percent_unique", N},
        {"is_sorted", B},
        {"is_monotonic", B},
        {"mean", N},
        {"median", N},
        {"mode", N},
        {"var", N},
        {"std", N},
        {"min", N},
        {"max", N},
        {"range", N},
        {"normalized_mean", N},
        {"normalized_median", N},
        {"normalized_range", N},
        {"coeff_var", N},
        {"skewness", N},
        {"kurtosis", N},
        {"gini", N},
        {"entropy", N},
        {"normality_statistic", N},
        {"normality_p", N},
        {"is_normal_5", B},
        {"is_normal_1", B},
        {"has_outliers_15iqr", B},
        {"percent_outliers_15iqr", N},
        {"has_outliers_1_99", B},
        {"percent_outliers_1_99", N},
        {"has_outliers_3std", B},
        {"percent_outliers_3std", N},
        {"is_lin_space", B},
        {"is_log_space", B},
        {"mean_value_length", N},
        {"min_value_length", N},
        {"max_value_length", N},
        {"name_length", N},
        {"num_words_in_name", N},
        {"has_uppercase_in_name", B},
        {"has_digit_in_name", B},
        {"has_currency_symbol_in_name", B},
    };
    return specs;
}

const std::vector<Spec>& cross_specs() {
    static const std::vector<Spec> specs = {
        {"identical", B},
        {"identical_unique", B},
        {"has_shared_elements", B},
        {"num_shared_elements", N},
        {"percent_shared_elements", N},
        {"has_shared_unique_elements", B},
        {"num_shared_unique_elements", N},
        {"percent_shared_unique_elements", N},
        {"has_shared_words", B},
        {"has_range_overlap", B},
        {"name_edit_distance", N},
        {"name_edit_distance_normalized", N},
        {"nestedness", N},
        {"correlation_value", N},
        {"correlation_p", N},
        {"correlation_significant_005", B},
        {"ks_statistic", N},
        {"ks_p", N},
        {"ks_significant_005", B},
        {"linregress_slope", N},
        {"linregress_p", N},
        {"linregress_significant_005", B},
        {"chi2_statistic", N},
        {"chi2_p", N},
        {"chi2_significant_005", B},
        {"one_way_anova_F", N},
        {"one_way_anova_p", N},
        {"one_way_anova_significant_005", B},
    };
    return specs;
}

const char* suffix(ColumnRole role) { return role == ColumnRole::X ? "_x" : "_y"; }

// Collects values by base name, then emits them in catalog order so that a
// forgotten feature surfaces as missing rather than a schema violation.
class Emitter {
public:
    void set(const std::string& name, FeatureValue v) { values_[name] = v; }
    void num(const std::string& name, double v) { set(name, FeatureValue::number(v)); }
    void num(const std::string& name, std::optional<double> v) { set(name, FeatureValue::number(v)); }
    void flag(const std::string& name, bool b) { set(name, FeatureValue::boolean(b)); }
    void flag(const std::string& name, std::optional<bool> b) {
        set(name, b ? FeatureValue::boolean(*b) : FeatureValue::missing());
    }

    std::vector<FeatureEntry> emit(const std::vector<Spec>& specs, const char* sfx) const {
        std::vector<FeatureEntry> out;
        out.reserve(specs.size());
        for (const auto& [name, kind] : specs) {
            (void)kind;
            auto it = values_.find(name);
            out.push_back({std::string(name) + sfx, it == values_.end() ? FeatureValue::missing() : it->second});
        }
        return out;
    }

private:
    std::map<std::string, FeatureValue> values_;
};

std::optional<double> safe_div(double a, double b) {
    if (b == 0.0) return std::nullopt;
    return a / b;
}

double fraction(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }

bool equally_spaced(std::span<const double> steps) {
    const double first = steps.front();
    if (first == 0.0) return false;
    return std::all_of(steps.begin(), steps.end(), [first](double s) {
        return std::fabs(s - first) <= kSpacingTolerance * std::fabs(first);
    });
}

std::optional<bool> lin_space(std::span<const double> v) {
    if (v.size() < 3) return std::nullopt;
    std::vector<double> diffs;
    diffs.reserve(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i) diffs.push_back(v[i] - v[i - 1]);
    return equally_spaced(diffs);
}

std::optional<bool> log_space(std::span<const double> v) {
    if (v.size() < 3) return std::nullopt;
    if (std::any_of(v.begin(), v.end(), [](double x) { return x <= 0.0; })) return false;
    std::vector<double> ratios;
    ratios.reserve(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i) ratios.push_back(v[i] / v[i - 1]);
    // A ratio of 1 is a constant run, not a geometric progression.
    if (ratios.front() == 1.0) return false;
    return equally_spaced(ratios);
}

template <typename T>
std::pair<bool, bool> sortedness(const std::vector<T>& v) {
    const bool ascending = std::is_sorted(v.begin(), v.end());
    const bool descending = std::is_sorted(v.begin(), v.end(), std::greater<>());
    return {ascending, ascending || descending};
}

void quantitative_features(Emitter& e, std::vector<double> v) {
    const auto m = stats::moments(v);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double median = stats::quantile_sorted(sorted, 0.5);
    const double sd = std::sqrt(m.variance);
    const double range = hi - lo;

    e.num("mean", m.mean);
    e.num("median", median);
    e.num("mode", stats::mode(v));
    e.num("var", m.variance);
    e.num("std", sd);
    e.num("min", lo);
    e.num("max", hi);
    e.num("range", range);
    e.num("normalized_mean", safe_div(m.mean, hi));
    e.num("normalized_median", safe_div(median, hi));
    e.num("normalized_range", safe_div(range, m.mean));
    e.num("coeff_var", safe_div(sd, m.mean));
    e.num("skewness", m.skewness);
    e.num("kurtosis", m.kurtosis);
    e.num("gini", stats::gini(v));
    e.num("entropy", stats::histogram_entropy(v));

    if (const auto normal = stats::dagostino_normality(v)) {
        e.num("normality_statistic", normal->statistic);
        e.num("normality_p", normal->p);
        e.flag("is_normal_5", normal->p > 0.05);
        e.flag("is_normal_1", normal->p > 0.01);
    }

    const double q1 = stats::quantile_sorted(sorted, 0.25);
    const double q3 = stats::quantile_sorted(sorted, 0.75);
    const double iqr = q3 - q1;
    const double p1 = stats::quantile_sorted(sorted, 0.01);
    const double p99 = stats::quantile_sorted(sorted, 0.99);
    std::size_t out_iqr = 0, out_pct = 0, out_std = 0;
    for (double x : v) {
        if (x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr) ++out_iqr;
        if (x < p1 || x > p99) ++out_pct;
        if (x < m.mean - 3.0 * sd || x > m.mean + 3.0 * sd) ++out_std;
    }
    e.flag("has_outliers_15iqr", out_iqr > 0);
    e.num("percent_outliers_15iqr", fraction(out_iqr, v.size()));
    e.flag("has_outliers_1_99", out_pct > 0);
    e.num("percent_outliers_1_99", fraction(out_pct, v.size()));
    e.flag("has_outliers_3std", out_std > 0);
    e.num("percent_outliers_3std", fraction(out_std, v.size()));

    e.flag("is_lin_space", lin_space(v));
    e.flag("is_log_space", log_space(v));
}

bool has_currency_symbol(std::string_view name) {
    static const std::vector<std::string_view> symbols = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5", "\xE2\x82\xB9"};
    return std::any_of(symbols.begin(), symbols.end(),
                       [&](std::string_view s) { return name.find(s) != std::string_view::npos; });
}

void name_features(Emitter& e, const std::string& name) {
    e.num("name_length", static_cast<double>(text::utf8_length(name)));
    e.num("num_words_in_name", static_cast<double>(text::words(name).size()));
    e.flag("has_uppercase_in_name",
           std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isupper(c) != 0; }));
    e.flag("has_digit_in_name",
           std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isdigit(c) != 0; }));
    e.flag("has_currency_symbol_in_name", has_currency_symbol(name));
}

std::vector<double> numeric_values(const Column& col) {
    std::vector<double> v;
    for (const auto& c : col.cells()) {
        if (c.is_number()) v.push_back(c.as_number());
        else if (c.is_timestamp()) v.push_back(static_cast<double>(c.as_timestamp().time_since_epoch().count()));
    }
    return v;
}

bool ordered_numerically(const Column& col) { return col.kind().general_type != GeneralType::C; }

}  // namespace

FeatureValue FeatureValue::number(double v) {
    if (!std::isfinite(v)) return missing();
    return FeatureValue{Value{v}};
}

FeatureSchema::FeatureSchema(std::string version, std::vector<std::pair<std::string, FeatureKind>> features)
    : version_(std::move(version)) {
    for (auto& [name, kind] : features) {
        if (!index_.emplace(name, names_.size()).second)
            throw ConfigError("duplicate feature name '" + name + "' in schema " + version_);
        names_.push_back(std::move(name));
        kinds_.push_back(kind);
    }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const FeatureSchema& catalog() {
    static const FeatureSchema schema = [] {
        std::vector<std::pair<std::string, FeatureKind>> all;
        for (const char* sfx : {"_x", "_y"}) {
            for (const auto& [name, kind] : single_specs()) all.emplace_back(std::string(name) + sfx, kind);
        }
        for (const auto& [name, kind] : cross_specs()) all.emplace_back(name, kind);
        return FeatureSchema(std::string(kCatalogVersion), std::move(all));
    }();
    return schema;
}

FeatureMap::FeatureMap(const FeatureSchema& schema, std::vector<FeatureEntry> entries)
    : schema_version_(schema.version()), entries_(std::move(entries)) {
    if (entries_.size() != schema.size())
        throw ConfigError("feature map has " + std::to_string(entries_.size()) + " entries, schema " +
                          schema.version() + " expects " + std::to_string(schema.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name != schema.names()[i])
            throw ConfigError("feature '" + entries_[i].name + "' at position " + std::to_string(i) +
                              " does not match schema name '" + schema.names()[i] + "'");
        const auto& v = entries_[i].value;
        const bool ok = v.is_missing() || (schema.kind(i) == FeatureKind::Boolean ? v.is_boolean() : v.is_number());
        if (!ok) throw ConfigError("feature '" + entries_[i].name + "' has the wrong value kind");
    }
}

const FeatureValue& FeatureMap::at(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return e.value;
    }
    throw ConfigError("unknown feature '" + std::string(name) + "'");
}

std::vector<FeatureEntry> extract_single_column_features(const Column& col, ColumnRole role) {
    Emitter e;
    const auto kind = col.kind();
    e.flag("data_type_is_string", kind.data_type == DataType::String);
    e.flag("data_type_is_integer", kind.data_type == DataType::Integer);
    e.flag("data_type_is_decimal", kind.data_type == DataType::Decimal);
    e.flag("data_type_is_time", kind.data_type == DataType::Time);
    e.flag("general_type_is_c", kind.general_type == GeneralType::C);
    e.flag("general_type_is_q", kind.general_type == GeneralType::Q);
    e.flag("general_type_is_t", kind.general_type == GeneralType::T);

    const std::size_t length = col.size();
    std::size_t missing = 0;
    std::set<std::string> unique;
    for (const auto& c : col.cells()) {
        if (c.is_missing()) ++missing;
        else unique.insert(c.render());
    }
    const std::size_t present = length - missing;
    e.num("length", static_cast<double>(length));
    e.num("percentage_none", fraction(missing, length));
    e.num("num_unique", static_cast<double>(unique.size()));
    if (present > 0) e.num("percent_unique", fraction(unique.size(), present));

    if (present > 0) {
        if (ordered_numerically(col)) {
            const auto [sorted, monotonic] = sortedness(numeric_values(col));
            e.flag("is_sorted", sorted);
            e.flag("is_monotonic", monotonic);
        } else {
            std::vector<std::string> texts;
            for (const auto& c : col.cells()) {
                if (c.is_text()) texts.push_back(c.as_text());
            }
            const auto [sorted, monotonic] = sortedness(texts);
            e.flag("is_sorted", sorted);
            e.flag("is_monotonic", monotonic);
        }
    }

    if (kind.general_type == GeneralType::Q && present > 0) {
        quantitative_features(e, numeric_values(col));
    }

    if (kind.general_type == GeneralType::C && present > 0) {
        std::map<std::string, double> freq;
        std::size_t min_len = SIZE_MAX, max_len = 0;
        double total_len = 0.0;
        for (const auto& c : col.cells()) {
            if (!c.is_text()) continue;
            freq[c.as_text()] += 1.0;
            const std::size_t len = text::utf8_length(c.as_text());
            min_len = std::min(min_len, len);
            max_len = std::max(max_len, len);
            total_len += static_cast<double>(len);
        }
        std::vector<double> weights;
        for (const auto& [_, w] : freq) weights.push_back(w);
        e.num("entropy", stats::shannon_entropy(weights));
        e.num("mean_value_length", total_len / static_cast<double>(present));
        e.num("min_value_length", static_cast<double>(min_len));
        e.num("max_value_length", static_cast<double>(max_len));
    }

    name_features(e, col.name());
    return e.emit(single_specs(), suffix(role));
}

std::vector<FeatureEntry> extract_cross_column_features(const Column& x, const Column& y) {
    Emitter e;

    // Identity on the full cell sequence (missing positions included).
    bool identical = x.size() == y.size();
    for (std::size_t i = 0; identical && i < x.size(); ++i) {
        const Cell& a = x.cells()[i];
        const Cell& b = y.cells()[i];
        identical = a.is_missing() == b.is_missing() && a.render() == b.render();
    }
    e.flag("identical", identical);

    std::map<std::string, std::size_t> count_x, count_y;
    std::size_t present_x = 0, present_y = 0;
    for (const auto& c : x.cells()) {
        if (!c.is_missing()) {
            ++count_x[c.render()];
            ++present_x;
        }
    }
    for (const auto& c : y.cells()) {
        if (!c.is_missing()) {
            ++count_y[c.render()];
            ++present_y;
        }
    }
    std::size_t shared = 0, shared_unique = 0;
    for (const auto& [v, cx] : count_x) {
        auto it = count_y.find(v);
        if (it == count_y.end()) continue;
        shared += std::min(cx, it->second);
        ++shared_unique;
    }
    const std::size_t union_unique = count_x.size() + count_y.size() - shared_unique;
    bool same_unique = count_x.size() == count_y.size() && shared_unique == count_x.size();
    e.flag("identical_unique", same_unique);
    e.flag("has_shared_elements", shared > 0);
    e.num("num_shared_elements", static_cast<double>(shared));
    e.num("percent_shared_elements", fraction(shared, std::max(present_x, present_y)));
    e.flag("has_shared_unique_elements", shared_unique > 0);
    e.num("num_shared_unique_elements", static_cast<double>(shared_unique));
    e.num("percent_shared_unique_elements", fraction(shared_unique, union_unique));

    const auto words_x = text::words(x.name());
    const auto words_y = text::words(y.name());
    const std::set<std::string> set_x(words_x.begin(), words_x.end());
    e.flag("has_shared_words",
           std::any_of(words_y.begin(), words_y.end(), [&](const std::string& w) { return set_x.count(w) > 0; }));

    const auto gx = x.kind().general_type;
    const auto gy = y.kind().general_type;
    const auto vx = numeric_values(x);
    const auto vy = numeric_values(y);
    if (gx == gy && gx != GeneralType::C && !vx.empty() && !vy.empty()) {
        const auto [xlo, xhi] = std::minmax_element(vx.begin(), vx.end());
        const auto [ylo, yhi] = std::minmax_element(vy.begin(), vy.end());
        e.flag("has_range_overlap", *xlo <= *yhi && *ylo <= *xhi);
    }

    const std::size_t dist = text::edit_distance(x.name(), y.name());
    const std::size_t longest = std::max(text::utf8_length(x.name()), text::utf8_length(y.name()));
    e.num("name_edit_distance", static_cast<double>(dist));
    e.num("name_edit_distance_normalized", longest == 0 ? 0.0 : static_cast<double>(dist) / static_cast<double>(longest));

    if (!count_x.empty() && !count_y.empty()) {
        e.num("nestedness", std::max(fraction(shared_unique, count_x.size()), fraction(shared_unique, count_y.size())));
    }

    const auto set_test = [&e](const std::string& stem, const std::optional<stats::TestResult>& r,
                               const char* stat_name) {
        if (!r) return;
        e.num(stem + stat_name, r->statistic);
        e.num(stem + "_p", r->p);
        e.flag(stem + "_significant_005", r->p < 0.05);
    };

    // Row-aligned pairs over the common prefix where both cells are present.
    const std::size_t common = std::min(x.size(), y.size());
    if (gx == GeneralType::Q && gy == GeneralType::Q) {
        std::vector<double> px, py;
        for (std::size_t i = 0; i < common; ++i) {
            const Cell& a = x.cells()[i];
            const Cell& b = y.cells()[i];
            if (a.is_number() && b.is_number()) {
                px.push_back(a.as_number());
                py.push_back(b.as_number());
            }
        }
        set_test("correlation", stats::pearson(px, py), "_value");
        set_test("ks", stats::two_sample_ks(vx, vy), "_statistic");
        if (const auto lr = stats::linregress(px, py)) {
            e.num("linregress_slope", lr->slope);
            e.num("linregress_p", lr->p);
            e.flag("linregress_significant_005", lr->p < 0.05);
        }
    } else if (gx == GeneralType::C && gy == GeneralType::C) {
        std::vector<std::string> a, b;
        for (std::size_t i = 0; i < common; ++i) {
            if (x.cells()[i].is_text() && y.cells()[i].is_text()) {
                a.push_back(x.cells()[i].as_text());
                b.push_back(y.cells()[i].as_text());
            }
        }
        set_test("chi2", stats::chi2_independence(a, b), "_statistic");
    } else if ((gx == GeneralType::C && gy == GeneralType::Q) || (gx == GeneralType::Q && gy == GeneralType::C)) {
        const Column& cat = gx == GeneralType::C ? x : y;
        const Column& num = gx == GeneralType::C ? y : x;
        std::map<std::string, std::vector<double>> groups;
        for (std::size_t i = 0; i < common; ++i) {
            if (cat.cells()[i].is_text() && num.cells()[i].is_number())
                groups[cat.cells()[i].as_text()].push_back(num.cells()[i].as_number());
        }
        std::vector<std::vector<double>> g;
        for (auto& [_, values] : groups) g.push_back(std::move(values));
        set_test("one_way_anova", stats::one_way_anova(g), "_F");
    }

    return e.emit(cross_specs(), "");
}

FeatureMap extract_features(const tabular::TabularDataset& ds) {
    std::vector<FeatureEntry> all = extract_single_column_features(ds.x, ColumnRole::X);
    auto ys = extract_single_column_features(ds.y, ColumnRole::Y);
    auto cross = extract_cross_column_features(ds.x, ds.y);
    all.insert(all.end(), std::make_move_iterator(ys.begin()), std::make_move_iterator(ys.end()));
    all.insert(all.end(), std::make_move_iterator(cross.begin()), std::make_move_iterator(cross.end()));
    return FeatureMap(catalog(), std::move(all));
}

StandardizationStats compute_standardization(std::span<const FeatureMap> pool, const FeatureSchema& schema) {
    StandardizationStats stats;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema.kind(i) != FeatureKind::Numeric) continue;
        std::vector<double> values;
        for (const auto& m : pool) {
            if (m.schema_version() != schema.version())
                throw ConfigError("feature map version " + m.schema_version() + " does not match schema " +
                                  schema.version());
            const auto& v = m.entries()[i].value;
            if (v.is_number()) values.push_back(v.as_number());
        }
        FeatureMoments fm;
        if (!values.empty()) {
            const auto mo = stats::moments(values);
            fm.mean = mo.mean;
            fm.std = std::sqrt(mo.variance);
        }
        stats.by_name.emplace(schema.names()[i], fm);
    }
    return stats;
}

FeatureVector vectorize(const FeatureMap& features, const FeatureSchema& schema, const StandardizationStats& st) {
    if (features.schema_version() != schema.version())
        throw ConfigError("schema version mismatch: features are " + features.schema_version() + ", schema is " +
                          schema.version());
    if (features.entries().size() != schema.size()) throw ConfigError("feature map does not match schema size");
    FeatureVector out{schema.version(), {}, true};
    out.values.reserve(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& v = features.entries()[i].value;
        if (v.is_missing()) {
            out.values.push_back(0.0);
        } else if (v.is_boolean()) {
            out.values.push_back(v.as_boolean() ? 1.0 : 0.0);
        } else {
            auto it = st.by_name.find(schema.names()[i]);
            if (it == st.by_name.end()) {
                out.values.push_back(v.as_number());
            } else if (it->second.std == 0.0) {
                out.values.push_back(0.0);
            } else {
                out.values.push_back((v.as_number() - it->second.mean) / it->second.std);
            }
        }
    }
    return out;
}

nlohmann::ordered_json to_json(const FeatureMap& m) {
    nlohmann::ordered_json features = nlohmann::ordered_json::object();
    for (const auto& e : m.entries()) {
        if (e.value.is_missing()) features[e.name] = nullptr;
        else if (e.value.is_boolean()) features[e.name] = e.value.as_boolean();
        else features[e.name] = e.value.as_number();
    }
    nlohmann::ordered_json j;
    j["schema_version"] = m.schema_version();
    j["features"] = std::move(features);
    return j;
}

FeatureMap feature_map_from_json(const nlohmann::ordered_json& j, const FeatureSchema& schema) {
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("features"))
        throw IngestError("feature map needs schema_version and features");
    if (j.at("schema_version").get<std::string>() != schema.version())
        throw IngestError("feature map version " + j.at("schema_version").get<std::string>() +
                          " does not match schema " + schema.version());
    const auto& f = j.at("features");
    std::vector<FeatureEntry> entries;
    entries.reserve(schema.size());
    for (const auto& name : schema.names()) {
        if (!f.contains(name)) throw IngestError("feature map is missing '" + name + "'");
        const auto& v = f.at(name);
        if (v.is_null()) entries.push_back({name, FeatureValue::missing()});
        else if (v.is_boolean()) entries.push_back({name, FeatureValue::boolean(v.get<bool>())});
        else if (v.is_number()) entries.push_back({name, FeatureValue::number(v.get<double>())});
        else throw IngestError("feature '" + name + "' has a non-scalar value");
    }
    if (f.size() != schema.size()) throw IngestError("feature map has entries outside schema " + schema.version());
    return FeatureMap(schema, std::move(entries));
}

nlohmann::ordered_json to_json(const StandardizationStats& s) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, m] : s.by_name) j[name] = {{"mean", m.mean}, {"std", m.std}};
    return j;
}

StandardizationStats standardization_from_json(const nlohmann::ordered_json& j) {
    StandardizationStats s;
    for (const auto& [name, m] : j.items()) {
        s.by_name.emplace(name, FeatureMoments{m.at("mean").get<double>(), m.at("std").get<double>()});
    }
    return s;
}

}  // namespace llm4vis::features
