#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace llm4vis::tabular {

using Timestamp = std::chrono::sys_seconds;

/// One table cell. Exactly one alternative is active; std::monostate is the
/// missing value (the corpus `null` token). An empty string is a text cell.
class Cell {
public:
    using Value = std::variant<std::monostate, std::string, double, Timestamp>;

    Cell() = default;
    static Cell missing() { return Cell{}; }
    static Cell text(std::string s) { return Cell{Value{std::move(s)}}; }
    static Cell number(double v) { return Cell{Value{v}}; }
    static Cell timestamp(Timestamp t) { return Cell{Value{t}}; }

    bool is_missing() const { return std::holds_alternative<std::monostate>(value_); }
    bool is_text() const { return std::holds_alternative<std::string>(value_); }
    bool is_number() const { return std::holds_alternative<double>(value_); }
    bool is_timestamp() const { return std::holds_alternative<Timestamp>(value_); }

    const std::string& as_text() const { return std::get<std::string>(value_); }
    double as_number() const { return std::get<double>(value_); }
    Timestamp as_timestamp() const { return std::get<Timestamp>(value_); }
    const Value& value() const { return value_; }

    /// Canonical string rendering used for element sharing and uniqueness:
    /// text as is, numbers in shortest round-trip form, timestamps as
    /// ISO-8601 UTC ("2020-01-01T00:00:00Z"). Missing renders empty.
    std::string render() const;

    friend bool operator==(const Cell&, const Cell&) = default;

private:
    explicit Cell(Value v) : value_(std::move(v)) {}
    Value value_;
};

enum class DataType { String, Integer, Decimal, Time };
enum class GeneralType { C, Q, T };

struct ColumnKind {
    DataType data_type = DataType::String;
    GeneralType general_type = GeneralType::C;

    static ColumnKind of(DataType dt);
    friend bool operator==(const ColumnKind&, const ColumnKind&) = default;
};

std::string_view to_string(DataType dt);
std::string_view to_string(GeneralType gt);

class Column {
public:
    /// Validates that cells are nonempty and that every non-missing cell
    /// matches `kind`. Throws IngestError otherwise.
    Column(std::string name, std::vector<Cell> cells, ColumnKind kind);

    /// Infers the kind from raw values (nullopt = missing) and coerces each
    /// value. Values that do not parse under the inferred kind become
    /// missing; this only happens for the <=5% tolerated by Time inference.
    static Column from_raw(std::string name, std::span<const std::optional<std::string>> raw);

    const std::string& name() const { return name_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const ColumnKind& kind() const { return kind_; }
    std::size_t size() const { return cells_.size(); }

    friend bool operator==(const Column&, const Column&) = default;

private:
    std::string name_;
    std::vector<Cell> cells_;
    ColumnKind kind_;
};

struct TabularDataset {
    std::string id;
    Column x;
    Column y;

    friend bool operator==(const TabularDataset&, const TabularDataset&) = default;
};

enum class VisualizationType { LineChart = 0, ScatterPlot = 1, BarChart = 2, BoxPlot = 3 };

inline constexpr std::array<VisualizationType, 4> kAllVisualizationTypes = {
    VisualizationType::LineChart, VisualizationType::ScatterPlot, VisualizationType::BarChart,
    VisualizationType::BoxPlot};

/// "line chart", "scatter plot", "bar chart", "box plot".
std::string_view display_name(VisualizationType t);
/// Corpus label: "line", "scatter", "bar", "box".
std::string_view corpus_label(VisualizationType t);
std::optional<VisualizationType> parse_corpus_label(std::string_view label);
/// Accepts the display name, the corpus label, or snake/compact variants,
/// case-insensitively ("Line Chart", "line_chart", "linechart", "line").
std::optional<VisualizationType> parse_visualization_alias(std::string_view name);

struct LabeledCorpusRecord {
    TabularDataset dataset;
    VisualizationType label;

    friend bool operator==(const LabeledCorpusRecord&, const LabeledCorpusRecord&) = default;
};

/// Infers the column kind: Time if >=95% of non-missing values parse as
/// dates, else Integer, else Decimal, else String. An all-missing column is
/// String.
ColumnKind infer_column_kind(std::span<const std::optional<std::string>> raw);
ColumnKind infer_column_kind(std::span<const std::string> raw);

/// Accepts ISO-8601 date / datetime (T or space separator, optional
/// fractional seconds, Z or +hh:mm offset), YYYY/MM/DD and MM/DD/YYYY.
std::optional<Timestamp> parse_timestamp(std::string_view s);
std::optional<double> parse_integer(std::string_view s);
std::optional<double> parse_decimal(std::string_view s);
std::string format_timestamp(Timestamp t);

struct Corpus {
    std::vector<LabeledCorpusRecord> labeled;
    std::vector<TabularDataset> unlabeled;
};

/// Reads one JSON object per line. With `labeled`, every record must carry a
/// label and the result is in `labeled`; otherwise labels are ignored and the
/// result is in `unlabeled`. Throws IngestError naming the line number.
Corpus load_corpus(const std::filesystem::path& path, bool labeled);
Corpus parse_corpus(std::string_view content, bool labeled);

std::vector<LabeledCorpusRecord> load_labeled_corpus(const std::filesystem::path& path);
std::vector<TabularDataset> load_unlabeled_corpus(const std::filesystem::path& path);

/// Serializes records in order; parse_corpus(write_corpus(r)) == r.
std::string write_corpus(std::span<const LabeledCorpusRecord> records);
std::string write_corpus(std::span<const TabularDataset> datasets);

}  // namespace llm4vis::tabular
