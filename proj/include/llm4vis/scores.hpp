#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "llm4vis/tabular.hpp"

namespace llm4vis::prompt {

/// One suitability score per visualization type, canonical order
/// (line, scatter, bar, box). Every score lies in [0, 1].
class ScoreVector {
public:
    ScoreVector() = default;
    /// Throws ConfigError if any score is outside [0, 1] or not finite.
    explicit ScoreVector(std::array<double, 4> scores);

    /// Clamps to [0,1] and rescales so that sum() is exactly 1.
    /// Throws ConfigError when the clamped sum is 0.
    static ScoreVector normalized(std::array<double, 4> raw);

    double operator[](tabular::VisualizationType t) const { return scores_[static_cast<std::size_t>(t)]; }
    const std::array<double, 4>& values() const { return scores_; }
    /// Correctly rounded sum of the four scores.
    double sum() const;

    /// Highest and runner-up types; ties go to the earlier canonical type.
    std::array<tabular::VisualizationType, 2> top2() const;

    /// "line chart: 0.2, scatter plot: 0.4, bar chart: 0.1, box plot: 0.3"
    std::string render_inline() const;
    /// Multi-line JSON object keyed by display names in canonical order.
    std::string render_json() const;

    friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

private:
    std::array<double, 4> scores_{0.25, 0.25, 0.25, 0.25};
};

struct Explanation {
    std::string full_text;

    friend bool operator==(const Explanation&, const Explanation&) = default;
};

/// LLM-written prose summary of a dataset's features. The flags are derived
/// from the text on construction.
class FeatureDescription {
public:
    FeatureDescription() = default;
    explicit FeatureDescription(std::string text);

    const std::string& text() const { return text_; }
    bool has_single_column_section() const { return single_; }
    bool has_cross_column_section() const { return cross_; }
    bool contains_forbidden_chart_words() const { return forbidden_; }

    friend bool operator==(const FeatureDescription&, const FeatureDescription&) = default;

private:
    std::string text_;
    bool single_ = false;
    bool cross_ = false;
    bool forbidden_ = false;
};

}  // namespace llm4vis::prompt

namespace llm4vis::pipeline {

enum class BootstrapStatus { Accepted, Pruned };

/// One refinement round. A round whose response failed to parse has no
/// scores and carries the parse error instead.
struct BootstrapStep {
    std::optional<prompt::ScoreVector> scores;
    prompt::Explanation explanation;
    std::string error;

    friend bool operator==(const BootstrapStep&, const BootstrapStep&) = default;
};

struct ScoredExplanation {
    prompt::ScoreVector scores;
    prompt::Explanation explanation;

    friend bool operator==(const ScoredExplanation&, const ScoredExplanation&) = default;
};

struct BootstrapOutcome {
    BootstrapStatus status = BootstrapStatus::Pruned;
    std::vector<BootstrapStep> history;
    /// Present iff status == Accepted.
    std::optional<ScoredExplanation> final;

    std::size_t iterations() const { return history.size(); }
    bool accepted() const { return status == BootstrapStatus::Accepted; }

    friend bool operator==(const BootstrapOutcome&, const BootstrapOutcome&) = default;
};

}  // namespace llm4vis::pipeline
