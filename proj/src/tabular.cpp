#include "llm4vis/tabular.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "llm4vis/error.hpp"
#include "llm4vis/text.hpp"

namespace llm4vis::tabular {

using json = nlohmann::json;

namespace {

constexpr double kTimeShareThreshold = 0.95;

bool read_digits(std::string_view s, std::size_t& pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    pos += n;
    return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

std::optional<std::chrono::sys_days> make_date(int y, int m, int d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

// hh:mm[:ss[.fff]][Z|+hh:mm|+hhmm] starting at pos; returns seconds offset from
// midnight minus the zone offset.
std::optional<long long> parse_clock(std::string_view s, std::size_t pos) {
    int hh = 0, mm = 0, ss = 0;
    if (!read_digits(s, pos, 2, hh) || !expect(s, pos, ':') || !read_digits(s, pos, 2, mm)) return std::nullopt;
    if (expect(s, pos, ':')) {
        if (!read_digits(s, pos, 2, ss)) return std::nullopt;
        if (expect(s, pos, '.')) {
            const std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) return std::nullopt;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    long long offset = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            ++pos;
            int oh = 0, om = 0;
            if (!read_digits(s, pos, 2, oh)) return std::nullopt;
            expect(s, pos, ':');
            if (!read_digits(s, pos, 2, om)) return std::nullopt;
            if (oh > 23 || om > 59) return std::nullopt;
            offset = sign * (oh * 3600LL + om * 60LL);
        }
    }
    if (pos != s.size()) return std::nullopt;
    return hh * 3600LL + mm * 60LL + ss - offset;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view raw) {
    const std::string_view s = text::trim(raw);
    std::size_t pos = 0;
    int a = 0, m = 0, d = 0, y = 0;
    // MM/DD/YYYY
    if (s.size() == 10 && s[2] == '/') {
        if (!read_digits(s, pos, 2, m) || !expect(s, pos, '/') || !read_digits(s, pos, 2, d) ||
            !expect(s, pos, '/') || !read_digits(s, pos, 4, y))
            return std::nullopt;
        const auto day = make_date(y, m, d);
        if (!day) return std::nullopt;
        return Timestamp{*day};
    }
    if (!read_digits(s, pos, 4, a)) return std::nullopt;
    if (pos >= s.size()) return std::nullopt;
    const char sep = s[pos];
    if (sep != '-' && sep != '/') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, m) || !expect(s, pos, sep) || !read_digits(s, pos, 2, d)) return std::nullopt;
    const auto day = make_date(a, m, d);
    if (!day) return std::nullopt;
    if (pos == s.size()) return Timestamp{*day};
    // YYYY/MM/DD carries no time part.
    if (sep != '-') return std::nullopt;
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    const auto clock = parse_clock(s, pos + 1);
    if (!clock) return std::nullopt;
    return Timestamp{*day} + std::chrono::seconds{*clock};
}

std::optional<double> parse_integer(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    for (std::size_t k = i; k < s.size(); ++k) {
        if (s[k] < '0' || s[k] > '9') return std::nullopt;
    }
    return parse_decimal(s);
}

std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s[0] == '+') s.remove_prefix(1);
    if (s.empty() || s[0] == '+') return std::nullopt;
    // from_chars also accepts "inf"/"nan"; reject anything alphabetic besides an exponent.
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E') return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_timestamp(Timestamp t) {
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string Cell::render() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return {};
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, double>) {
                return text::format_shortest(v);
            } else {
                return format_timestamp(v);
            }
        },
        value_);
}

ColumnKind ColumnKind::of(DataType dt) {
    switch (dt) {
        case DataType::Integer:
        case DataType::Decimal:
            return {dt, GeneralType::Q};
        case DataType::Time:
            return {dt, GeneralType::T};
        case DataType::String:
            break;
    }
    return {DataType::String, GeneralType::C};
}

std::string_view to_string(DataType dt) {
    switch (dt) {
        case DataType::String: return "string";
        case DataType::Integer: return "integer";
        case DataType::Decimal: return "decimal";
        case DataType::Time: return "time";
    }
    return "string";
}

std::string_view to_string(GeneralType gt) {
    switch (gt) {
        case GeneralType::C: return "c";
        case GeneralType::Q: return "q";
        case GeneralType::T: return "t";
    }
    return "c";
}

ColumnKind infer_column_kind(std::span<const std::optional<std::string>> raw) {
    std::size_t present = 0, dates = 0;
    bool all_int = true, all_dec = true;
    for (const auto& v : raw) {
        if (!v) continue;
        ++present;
        if (parse_timestamp(*v)) ++dates;
        if (all_int && !parse_integer(*v)) all_int = false;
        if (all_dec && !parse_decimal(*v)) all_dec = false;
    }
    if (present == 0) return ColumnKind::of(DataType::String);
    if (static_cast<double>(dates) >= kTimeShareThreshold * static_cast<double>(present))
        return ColumnKind::of(DataType::Time);
    if (all_int) return ColumnKind::of(DataType::Integer);
    if (all_dec) return ColumnKind::of(DataType::Decimal);
    return ColumnKind::of(DataType::String);
}

ColumnKind infer_column_kind(std::span<const std::string> raw) {
    std::vector<std::optional<std::string>> opt(raw.begin(), raw.end());
    return infer_column_kind(std::span<const std::optional<std::string>>(opt));
}

namespace {

bool cell_matches(const Cell& c, DataType dt) {
    if (c.is_missing()) return true;
    switch (dt) {
        case DataType::String: return c.is_text();
        case DataType::Integer: return c.is_number() && std::trunc(c.as_number()) == c.as_number();
        case DataType::Decimal: return c.is_number();
        case DataType::Time: return c.is_timestamp();
    }
    return false;
}

}  // namespace

Column::Column(std::string name, std::vector<Cell> cells, ColumnKind kind)
    : name_(std::move(name)), cells_(std::move(cells)), kind_(kind) {
    if (cells_.empty()) throw IngestError("column '" + name_ + "' has no values");
    if (ColumnKind::of(kind_.data_type) != kind_)
        throw IngestError("column '" + name_ + "' has inconsistent data/general type");
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (!cell_matches(cells_[i], kind_.data_type))
            throw IngestError("column '" + name_ + "' cell " + std::to_string(i) + " is not " +
                              std::string(to_string(kind_.data_type)));
    }
}

Column Column::from_raw(std::string name, std::span<const std::optional<std::string>> raw) {
    const ColumnKind kind = infer_column_kind(raw);
    std::vector<Cell> cells;
    cells.reserve(raw.size());
    for (const auto& v : raw) {
        if (!v) {
            cells.push_back(Cell::missing());
            continue;
        }
        switch (kind.data_type) {
            case DataType::String:
                cells.push_back(Cell::text(*v));
                break;
            case DataType::Integer:
            case DataType::Decimal:
                cells.push_back(Cell::number(*parse_decimal(*v)));
                break;
            case DataType::Time:
                if (auto t = parse_timestamp(*v)) cells.push_back(Cell::timestamp(*t));
                else cells.push_back(Cell::missing());
                break;
        }
    }
    return Column(std::move(name), std::move(cells), kind);
}

std::string_view display_name(VisualizationType t) {
    switch (t) {
        case VisualizationType::LineChart: return "line chart";
        case VisualizationType::ScatterPlot: return "scatter plot";
        case VisualizationType::BarChart: return "bar chart";
        case VisualizationType::BoxPlot: return "box plot";
    }
    return "line chart";
}

std::string_view corpus_label(VisualizationType t) {
    switch (t) {
        case VisualizationType::LineChart: return "line";
        case VisualizationType::ScatterPlot: return "scatter";
        case VisualizationType::BarChart: return "bar";
        case VisualizationType::BoxPlot: return "box";
    }
    return "line";
}

std::optional<VisualizationType> parse_corpus_label(std::string_view label) {
    for (auto t : kAllVisualizationTypes) {
        if (corpus_label(t) == label) return t;
    }
    return std::nullopt;
}

std::optional<VisualizationType> parse_visualization_alias(std::string_view name) {
    std::string key = text::to_lower_ascii(text::trim(name));
    std::string compact;
    for (char c : key) {
        if (c != ' ' && c != '_' && c != '-') compact.push_back(c);
    }
    for (auto t : kAllVisualizationTypes) {
        std::string full;
        for (char c : display_name(t)) {
            if (c != ' ') full.push_back(c);
        }
        if (compact == full || compact == corpus_label(t)) return t;
    }
    return std::nullopt;
}

namespace {

std::string line_error(std::size_t line_no, const std::string& msg) {
    return "line " + std::to_string(line_no) + ": " + msg;
}

std::vector<std::optional<std::string>> raw_values(const json& values, std::size_t line_no, const std::string& col) {
    if (!values.is_array()) throw IngestError(line_error(line_no, "column '" + col + "' values must be an array"));
    if (values.empty()) throw IngestError(line_error(line_no, "column '" + col + "' has no values"));
    std::vector<std::optional<std::string>> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        if (v.is_null()) {
            out.emplace_back(std::nullopt);
        } else if (v.is_string()) {
            out.emplace_back(v.get<std::string>());
        } else if (v.is_number()) {
            out.emplace_back(v.dump());
        } else {
            throw IngestError(line_error(line_no, "column '" + col + "' holds a value that is not string, number or null"));
        }
    }
    return out;
}

Column parse_column(const json& obj, const char* role, std::size_t line_no) {
    if (!obj.contains(role)) throw IngestError(line_error(line_no, std::string("missing column '") + role + "'"));
    const json& c = obj.at(role);
    if (!c.is_object()) throw IngestError(line_error(line_no, std::string("column '") + role + "' must be an object"));
    if (!c.contains("name") || !c.at("name").is_string())
        throw IngestError(line_error(line_no, std::string("column '") + role + "' needs a string name"));
    if (!c.contains("values")) throw IngestError(line_error(line_no, std::string("column '") + role + "' needs values"));
    const auto raw = raw_values(c.at("values"), line_no, role);
    try {
        return Column::from_raw(c.at("name").get<std::string>(), raw);
    } catch (const IngestError& e) {
        throw IngestError(line_error(line_no, e.what()));
    }
}

}  // namespace

Corpus parse_corpus(std::string_view content, bool labeled) {
    Corpus corpus;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        ++line_no;
        std::string_view line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (text::trim(line).empty()) {
            if (end == content.size()) break;
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IngestError(line_error(line_no, std::string("malformed JSON: ") + e.what()));
        }
        if (!obj.is_object()) throw IngestError(line_error(line_no, "record must be a JSON object"));
        for (const auto& [key, _] : obj.items()) {
            if (key != "id" && key != "x" && key != "y" && key != "label")
                throw IngestError(line_error(line_no, "unexpected field '" + key +
                                                          "' (datasets must have exactly two columns, x and y)"));
        }
        if (!obj.contains("id") || !obj.at("id").is_string() || obj.at("id").get<std::string>().empty())
            throw IngestError(line_error(line_no, "record needs a nonempty string id"));
        std::string id = obj.at("id").get<std::string>();
        if (!ids.insert(id).second) throw IngestError(line_error(line_no, "duplicate dataset id '" + id + "'"));
        TabularDataset ds{id, parse_column(obj, "x", line_no), parse_column(obj, "y", line_no)};
        if (labeled) {
            if (!obj.contains("label") || !obj.at("label").is_string())
                throw IngestError(line_error(line_no, "record '" + id + "' has no label"));
            const auto label_str = obj.at("label").get<std::string>();
            const auto label = parse_corpus_label(label_str);
            if (!label)
                throw IngestError(line_error(line_no, "unknown label '" + label_str +
                                                          "' (allowed: line, scatter, bar, box)"));
            corpus.labeled.push_back({std::move(ds), *label});
        } else {
            corpus.unlabeled.push_back(std::move(ds));
        }
        if (end == content.size()) break;
    }
    if (corpus.labeled.empty() && corpus.unlabeled.empty()) throw IngestError("empty corpus");
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, bool labeled) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open corpus '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str(), labeled);
}

std::vector<LabeledCorpusRecord> load_labeled_corpus(const std::filesystem::path& path) {
    return load_corpus(path, true).labeled;
}

std::vector<TabularDataset> load_unlabeled_corpus(const std::filesystem::path& path) {
    return load_corpus(path, false).unlabeled;
}

namespace {

json column_json(const Column& col) {
    json values = json::array();
    for (const auto& c : col.cells()) {
        if (c.is_missing()) {
            values.push_back(nullptr);
        } else if (c.is_text()) {
            values.push_back(c.as_text());
        } else if (c.is_timestamp()) {
            values.push_back(format_timestamp(c.as_timestamp()));
        } else if (col.kind().data_type == DataType::Integer && std::fabs(c.as_number()) < 9.0e15) {
            values.push_back(static_cast<long long>(c.as_number()));
        } else {
            values.push_back(c.as_number());
        }
    }
    return json{{"name", col.name()}, {"values", std::move(values)}};
}

json dataset_json(const TabularDataset& ds) {
    json obj;
    obj["id"] = ds.id;
    obj["x"] = column_json(ds.x);
    obj["y"] = column_json(ds.y);
    return obj;
}

}  // namespace

std::string write_corpus(std::span<const LabeledCorpusRecord> records) {
    std::string out;
    for (const auto& r : records) {
        json obj = dataset_json(r.dataset);
        obj["label"] = std::string(corpus_label(r.label));
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::string write_corpus(std::span<const TabularDataset> datasets) {
    std::string out;
    for (const auto& d : datasets) {
        out += dataset_json(d).dump();
        out += '\n';
    }
    return out;
}

}  // namespace llm4vis::tabular
