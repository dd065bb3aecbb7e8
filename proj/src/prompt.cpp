#include "llm4vis/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "llm4vis/error.hpp"
#include "llm4vis/log.hpp"
#include "llm4vis/retrieval.hpp"
#include "llm4vis/text.hpp"

namespace llm4vis::prompt {

using tabular::VisualizationType;

// ---------------------------------------------------------------- ScoreVector

ScoreVector::ScoreVector(std::array<double, 4> scores) : scores_(scores) {
    for (double s : scores_)
        if (!std::isfinite(s) || s < 0.0 || s > 1.0)
            throw ConfigError("score " + text::format_shortest(s) + " outside [0, 1]");
}

namespace {

// Correctly rounded sum (Shewchuk partials with the final half-way fix), so
// that decimal scores such as 0.6, 0.1, 0.1, 0.2 sum to exactly 1.
double exact_sum(const std::array<double, 4>& v) {
    std::array<double, 8> partials{};
    std::size_t n = 0;
    for (double x : v) {
        std::size_t i = 0;
        for (std::size_t j = 0; j < n; ++j) {
            double y = partials[j];
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        n = i;
        partials[n++] = x;
    }
    if (n == 0) return 0.0;
    std::size_t i = n - 1;
    double hi = partials[i];
    double lo = 0.0;
    while (i > 0) {
        const double x = hi;
        const double y = partials[--i];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) break;
    }
    if (i > 0 && ((lo < 0.0 && partials[i - 1] < 0.0) || (lo > 0.0 && partials[i - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

}  // namespace

ScoreVector ScoreVector::normalized(std::array<double, 4> raw) {
    for (auto& s : raw) {
        if (std::isnan(s)) throw ConfigError("score is NaN");
        s = std::clamp(s, 0.0, 1.0);
    }
    const double total = exact_sum(raw);
    if (total <= 0.0) throw ConfigError("scores sum to 0");
    if (total == 1.0) return ScoreVector(raw);
    for (auto& s : raw) s /= total;
    // Push the rounding residual into the largest score until the sum is exact.
    const auto largest = static_cast<std::size_t>(std::max_element(raw.begin(), raw.end()) - raw.begin());
    for (int i = 0; i < 8; ++i) {
        const double sum = exact_sum(raw);
        if (sum == 1.0) break;
        raw[largest] = std::clamp(raw[largest] + (1.0 - sum), 0.0, 1.0);
    }
    return ScoreVector(raw);
}

double ScoreVector::sum() const { return exact_sum(scores_); }

std::array<VisualizationType, 2> ScoreVector::top2() const {
    std::array<std::size_t, 4> idx{0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores_[a] > scores_[b]; });
    return {static_cast<VisualizationType>(idx[0]), static_cast<VisualizationType>(idx[1])};
}

std::string ScoreVector::render_inline() const {
    std::string out;
    for (auto t : tabular::kAllVisualizationTypes) {
        if (!out.empty()) out += ", ";
        out += tabular::display_name(t);
        out += ": ";
        out += text::format_shortest((*this)[t]);
    }
    return out;
}

std::string ScoreVector::render_json() const {
    std::string out = "{\n";
    for (std::size_t i = 0; i < 4; ++i) {
        const auto t = tabular::kAllVisualizationTypes[i];
        out += "  \"";
        out += tabular::display_name(t);
        out += "\": ";
        out += text::format_shortest(scores_[i]);
        out += i + 1 < 4 ? ",\n" : "\n";
    }
    out += "}";
    return out;
}

// ---------------------------------------------------------------- FeatureDescription

FeatureDescription::FeatureDescription(std::string text) : text_(std::move(text)) {
    single_ = text::contains_ci(text_, "Single-column perspective");
    cross_ = text::contains_ci(text_, "Cross-column perspective");
    for (auto t : tabular::kAllVisualizationTypes)
        if (text::contains_ci(text_, tabular::display_name(t))) forbidden_ = true;
}

// ---------------------------------------------------------------- templates

namespace {

const char* const kDescriptionTemplate =
    "The features of a given tabular dataset are provided in the following delimited by triple backticks. "
    "Your task is to generate a detailed text description, in 1000 characters, that focus on features that are "
    "important for visualization type selection and comprehensively analyzes this tabuar dataset based on its "
    "feature values from both single-column and cross-column perspectives. Note that the response must exclude "
    "words such as line chart, scatter plot, bar chart, and box plot, since these words will mislead further "
    "visualization recommendation. The response format can be as \"Single-column perspective: [...]\n"
    "Cross-column perspective: [...].\" Ensure that the summary maintains strong generalization ability and "
    "includes all vital information.\n"
    "\n"
    "Features for a tabular dataset: ```{feature_block}```";

const char* const kRecommendationTemplate =
    "Determine whether each visualization type in the following list of visualization types is a suitable "
    "visualization type in the text description for a tabular dataset below, which is delimited with triple "
    "backticks.\n"
    "Give your explanation and your answer at the end as json (Explanation is as below: .\n"
    "The final answer in JSON format would be:), where each element consists of a visualization type and a "
    "score ranging from 0 to 1 (1 means the most suitable).\n"
    "The scores should sum to be 1 (line + scatter + bar + box = 1.0).\n"
    "List of visualization types: [line chart, scatter plot, bar chart, and box plot].\n"
    "Text description for a tabular dataset:```{description}```";

const char* const kHintTemplate =
    "Determine whether each visualization type in the following list of visualization types is a suitable "
    "visualization type in the text description for a tabular dataset below, which is delimited with triple "
    "backticks.\n"
    "Hint: {hint_a} may be more suitable than {hint_b}, however, previous score is {hint_c}.\n"
    "With the given hint, editing your explanation and improve your answer at the end as json (Explanation is "
    "as below: .\n"
    "The final answer in JSON format would be:), where each element consists of a visualization type and a "
    "score ranging from 0 to 1 (1 means the most suitable).\n"
    "The scores should sum to be 1 (line + scatter + bar + box = 1.0).\n"
    "List of visualization types: [line chart, scatter plot, bar chart, and box plot].\n"
    "Text description for a tabular dataset: ```{description}```";

const char* const kRescoringTemplate =
    "Based only on the following explanation, assign a suitability score to each visualization type in the "
    "list [line chart, scatter plot, bar chart, and box plot]. Give your answer at the end as json, where each "
    "element consists of a visualization type and a score ranging from 0 to 1 (1 means the most suitable).\n"
    "The scores should sum to be 1 (line + scatter + bar + box = 1.0).\n"
    "Explanation: ```{explanation}```";

void require_placeholders(std::string_view name, const std::string& tmpl,
                          std::initializer_list<std::string_view> slots) {
    for (auto s : slots)
        if (tmpl.find("{" + std::string(s) + "}") == std::string::npos)
            throw ConfigError(std::string(name) + " template lacks the {" + std::string(s) + "} placeholder");
}

std::optional<std::string> read_optional(const std::filesystem::path& p) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read template " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const Templates& Templates::embedded() {
    static const Templates t{kDescriptionTemplate, kRecommendationTemplate, kHintTemplate};
    return t;
}

Templates Templates::load(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw ConfigError("templates directory not found: " + dir.string());
    Templates t = embedded();
    if (auto s = read_optional(dir / "description.txt")) t.description = *s;
    if (auto s = read_optional(dir / "recommendation.txt")) t.recommendation = *s;
    if (auto s = read_optional(dir / "hint.txt")) t.hint = *s;
    t.validate();
    return t;
}

void Templates::validate() const {
    require_placeholders("description", description, {"feature_block"});
    require_placeholders("recommendation", recommendation, {"description"});
    require_placeholders("hint", hint, {"description", "hint_a", "hint_b", "hint_c"});
}

std::string fill_template(std::string_view tmpl,
                          std::span<const std::pair<std::string_view, std::string_view>> slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const auto name = tmpl.substr(i + 1, close - i - 1);
                auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == name; });
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

HintFill make_hint(VisualizationType truth, const ScoreVector& previous) {
    std::optional<VisualizationType> best;
    for (auto t : tabular::kAllVisualizationTypes) {
        if (t == truth) continue;
        if (!best || previous[t] > previous[*best]) best = t;
    }
    return {std::string(tabular::display_name(truth)), std::string(tabular::display_name(*best)),
            previous.render_inline()};
}

std::string serialize_features(const features::FeatureMap& features) {
    std::string out;
    for (const auto& e : features.entries()) {
        if (!out.empty()) out += '\n';
        out += e.name;
        out += '=';
        if (e.value.is_missing())
            out += "NaN";
        else if (e.value.is_boolean())
            out += e.value.as_boolean() ? "True" : "False";
        else
            out += text::format_sig6(e.value.as_number());
    }
    return out;
}

std::string render_description_prompt(const features::FeatureMap& features, const Templates& t) {
    const std::string block = serialize_features(features);
    const std::pair<std::string_view, std::string_view> slots[] = {{"feature_block", block}};
    return fill_template(t.description, slots);
}

namespace {

std::string render_test_block(const std::string& description, const Templates& t) {
    const std::pair<std::string_view, std::string_view> slots[] = {{"description", description}};
    return fill_template(t.recommendation, slots);
}

}  // namespace

std::string render_recommendation_prompt(const FeatureDescription& test_desc,
                                         std::span<const DemonstrationBlock> demos, const Templates& t) {
    if (demos.size() > retrieval::kMaxDemonstrations)
        throw ConfigError(std::to_string(demos.size()) + " demonstrations exceed the maximum of " +
                          std::to_string(retrieval::kMaxDemonstrations));
    std::string out;
    for (const auto& d : demos) {
        out += d.text;
        out += "\n\n";
    }
    out += render_test_block(test_desc.text(), t);
    return out;
}

std::string render_hint_prompt(const FeatureDescription& desc, const HintFill& hint, const Templates& t) {
    if (hint.a == hint.b) throw ConfigError("hint compares '" + hint.a + "' with itself");
    const std::pair<std::string_view, std::string_view> slots[] = {
        {"hint_a", hint.a}, {"hint_b", hint.b}, {"hint_c", hint.c}, {"description", desc.text()}};
    return fill_template(t.hint, slots);
}

std::string render_rescoring_prompt(const Explanation& explanation) {
    const std::pair<std::string_view, std::string_view> slots[] = {{"explanation", explanation.full_text}};
    return fill_template(kRescoringTemplate, slots);
}

void check_prompt_length(std::string_view prompt, std::size_t max_chars) {
    if (prompt.size() > max_chars)
        throw ConfigError("prompt of " + std::to_string(prompt.size()) + " characters exceeds the limit of " +
                          std::to_string(max_chars));
}

// ---------------------------------------------------------------- parsing

namespace {

std::string normalize_quotes(std::string_view s) {
    std::string out(s);
    out = text::replace_all(std::move(out), "\xE2\x80\x9C", "\"");  // left double
    out = text::replace_all(std::move(out), "\xE2\x80\x9D", "\"");  // right double
    out = text::replace_all(std::move(out), "\xE2\x80\x98", "'");
    out = text::replace_all(std::move(out), "\xE2\x80\x99", "'");
    out = text::replace_all(std::move(out), "``", "\"");
    out = text::replace_all(std::move(out), "''", "\"");
    return out;
}

std::string strip_trailing_commas(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += s[i];
    }
    return out;
}

std::optional<nlohmann::json> try_parse_object(std::string_view candidate) {
    std::string s = strip_trailing_commas(normalize_quotes(candidate));
    auto j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded()) {
        std::replace(s.begin(), s.end(), '\'', '"');
        j = nlohmann::json::parse(s, nullptr, false);
    }
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

std::optional<double> as_score(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s(text::trim(v.get<std::string>()));
        if (s.empty()) return std::nullopt;
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str() + s.size()) return d;
    }
    return std::nullopt;
}

bool has_visualization_key(const nlohmann::json& obj) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (tabular::parse_visualization_alias(it.key())) return true;
    return false;
}

std::string explanation_before(std::string_view text) {
    std::string_view s = text::trim(text);
    for (;;) {
        const auto before = s.size();
        for (std::string_view opener : {"```json", "```JSON", "```", "json", "JSON"}) {
            if (s.size() >= opener.size() && s.substr(s.size() - opener.size()) == opener) {
                s = text::trim(s.substr(0, s.size() - opener.size()));
                break;
            }
        }
        if (s.size() == before) break;
    }
    return std::string(s);
}

}  // namespace

ParsedResponse parse_scores(std::string_view response_text, double tolerance) {
    const std::string raw(response_text);
    if (text::trim(response_text).empty()) throw ParseError("empty response", raw);

    struct Candidate {
        std::size_t start, end;
        nlohmann::json obj;
    };
    std::optional<Candidate> best;
    for (std::size_t open = 0; open < response_text.size(); ++open) {
        if (response_text[open] != '{') continue;
        int depth = 0;
        std::size_t close = std::string_view::npos;
        for (std::size_t k = open; k < response_text.size(); ++k) {
            if (response_text[k] == '{') ++depth;
            if (response_text[k] == '}' && --depth == 0) {
                close = k;
                break;
            }
        }
        if (close == std::string_view::npos) continue;
        if (best && close < best->end) continue;
        if (best && close == best->end && open > best->start) continue;
        auto obj = try_parse_object(response_text.substr(open, close - open + 1));
        if (!obj) continue;
        // Accept a wrapper object around the score object, one level deep.
        if (!has_visualization_key(*obj)) {
            bool found = false;
            for (auto& [k, v] : obj->items()) {
                if (v.is_object() && has_visualization_key(v)) {
                    obj = v;
                    found = true;
                    break;
                }
            }
            if (!found) continue;
        }
        best = Candidate{open, close, std::move(*obj)};
    }
    if (!best) throw ParseError("no JSON score object found in response", raw);

    std::array<std::optional<double>, 4> found{};
    for (auto it = best->obj.begin(); it != best->obj.end(); ++it) {
        const auto type = tabular::parse_visualization_alias(it.key());
        if (!type) continue;
        const auto i = static_cast<std::size_t>(*type);
        if (found[i]) throw ParseError("duplicate score for " + std::string(tabular::display_name(*type)), raw);
        const auto v = as_score(it.value());
        if (!v || !std::isfinite(*v))
            throw ParseError("non-numeric score for " + std::string(tabular::display_name(*type)), raw);
        found[i] = *v;
    }
    std::array<double, 4> scores{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!found[i])
            throw ParseError("score object lacks " +
                                 std::string(tabular::display_name(tabular::kAllVisualizationTypes[i])),
                             raw);
        scores[i] = std::clamp(*found[i], 0.0, 1.0);
    }
    const double sum = scores[0] + scores[1] + scores[2] + scores[3];
    if (sum <= 0.0) throw ParseError("scores sum to 0", raw);
    if (std::abs(sum - 1.0) > tolerance)
        throw ParseError("scores sum to " + text::format_shortest(sum) + ", outside tolerance " +
                             text::format_shortest(tolerance),
                         raw);

    ParsedResponse out{ScoreVector::normalized(scores), Explanation{explanation_before(response_text.substr(0, best->start))}};
    if (out.explanation.full_text.empty()) throw ParseError("response has no explanation before the scores", raw);
    return out;
}

FeatureDescription describe_dataset(const features::FeatureMap& features, llm::Gateway& gateway,
                                    const llm::ModelSettings& settings, const Templates& t) {
    const std::string prompt = render_description_prompt(features, t);
    check_prompt_length(prompt);
    const auto resp = gateway.complete(llm::ChatRequest::from_prompt(prompt, settings));
    if (text::trim(resp.text).empty()) throw ParseError("empty description", resp.text);
    FeatureDescription d(resp.text);
    if (d.contains_forbidden_chart_words()) log::warning("feature description mentions a chart type name");
    return d;
}

DemonstrationBlock build_demonstration(const retrieval::RetrievalEntry& entry, const Templates& t) {
    if (!entry.bootstrap || !entry.bootstrap->accepted() || !entry.bootstrap->final)
        throw ConfigError("entry not accepted: " + entry.id);
    if (!entry.description) throw ConfigError("entry has no description: " + entry.id);
    const auto& fin = *entry.bootstrap->final;
    DemonstrationBlock b;
    b.source_id = entry.id;
    b.text = render_test_block(entry.description->text(), t);
    b.text += '\n';
    b.text += fin.explanation.full_text;
    b.text += '\n';
    b.text += fin.scores.render_json();
    return b;
}

}  // namespace llm4vis::prompt
