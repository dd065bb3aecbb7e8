#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llm4vis/features.hpp"
#include "llm4vis/llm.hpp"
#include "llm4vis/scores.hpp"

namespace llm4vis::retrieval {
struct RetrievalEntry;
}

namespace llm4vis::prompt {

inline constexpr double kDefaultSumTolerance = 0.05;
inline constexpr std::size_t kDefaultMaxPromptChars = 60000;

/// Prompt texts with {feature_block}, {description}, {hint_a}, {hint_b} and
/// {hint_c} placeholders.
struct Templates {
    std::string description;
    std::string recommendation;
    std::string hint;

    static const Templates& embedded();
    /// Reads description.txt, recommendation.txt and hint.txt from `dir`;
    /// a file that is absent keeps the embedded text. Throws ConfigError if
    /// a template lacks a required placeholder.
    static Templates load(const std::filesystem::path& dir);
    void validate() const;
};

struct DemonstrationBlock {
    std::string text;
    std::string source_id;
};

struct HintFill {
    std::string a;  // ground truth
    std::string b;  // best-scoring wrong type
    std::string c;  // previous scores
};

/// Hint for an entry labeled `truth` whose last scores were `previous`.
HintFill make_hint(tabular::VisualizationType truth, const ScoreVector& previous);

struct ParsedResponse {
    ScoreVector scores;
    Explanation explanation;
};

/// Substitutes {name} placeholders in one pass; inserted text is not rescanned.
std::string fill_template(std::string_view tmpl, std::span<const std::pair<std::string_view, std::string_view>> slots);

/// "name=value" per line in schema order: True/False, NaN for missing,
/// numbers with up to 6 significant digits.
std::string serialize_features(const features::FeatureMap& features);

std::string render_description_prompt(const features::FeatureMap& features,
                                      const Templates& t = Templates::embedded());

/// Demonstration blocks in the given order, then the test block. Throws
/// ConfigError for more than 8 demonstrations.
std::string render_recommendation_prompt(const FeatureDescription& test_desc,
                                         std::span<const DemonstrationBlock> demos,
                                         const Templates& t = Templates::embedded());

/// Throws ConfigError when hint.a == hint.b.
std::string render_hint_prompt(const FeatureDescription& desc, const HintFill& hint,
                               const Templates& t = Templates::embedded());

/// Asks for scores justified only by an explanation (consistency check).
std::string render_rescoring_prompt(const Explanation& explanation);

/// Throws ConfigError when the prompt exceeds `max_chars` bytes.
void check_prompt_length(std::string_view prompt, std::size_t max_chars = kDefaultMaxPromptChars);

/// Extracts the last JSON score object and the prose before it. Throws
/// ParseError when no object is found, a type is missing, the explanation
/// is empty, or the clamped sum is 0 or further than `tolerance` from 1.
ParsedResponse parse_scores(std::string_view response_text, double tolerance = kDefaultSumTolerance);

/// Sends the description prompt; throws ParseError on an empty response.
FeatureDescription describe_dataset(const features::FeatureMap& features, llm::Gateway& gateway,
                                    const llm::ModelSettings& settings, const Templates& t = Templates::embedded());

/// Recommendation wording with the entry's description, then its final
/// explanation and scores. Throws ConfigError unless the entry is accepted
/// and described.
DemonstrationBlock build_demonstration(const retrieval::RetrievalEntry& entry,
                                       const Templates& t = Templates::embedded());

}  // namespace llm4vis::prompt
