#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4vis/llm.hpp"
#include "llm4vis/prompt.hpp"
#include "llm4vis/retrieval.hpp"
#include "llm4vis/scores.hpp"
#include "llm4vis/tabular.hpp"

namespace llm4vis::pipeline {

inline constexpr double kAcceptEpsilon = 1e-9;

struct BootstrapConfig {
    double margin = 0.1;
    std::size_t max_iters = 3;
    double sum_tolerance = prompt::kDefaultSumTolerance;

    /// Throws ConfigError unless margin is in (0,1), max_iters >= 1 and the
    /// tolerance is in [0,1).
    void validate() const;
};

/// Everything a model call needs besides the prompt.
struct LlmContext {
    llm::Gateway& gateway;
    llm::ModelSettings settings;
    const prompt::Templates& templates = prompt::Templates::embedded();
    std::size_t max_prompt_chars = prompt::kDefaultMaxPromptChars;
};

/// True iff `gt` has the unique top score and leads every other type by at
/// least `margin` (within 1e-9).
bool accept_scores(const prompt::ScoreVector& scores, tabular::VisualizationType gt, double margin);

/// Throws ConfigError when `prev` already satisfies acceptance.
prompt::HintFill compose_hint(const prompt::ScoreVector& prev, tabular::VisualizationType gt, double margin);

/// Zero-shot prompt, then hint-guided prompts until the scores are accepted
/// or max_iters rounds are spent. A round whose response fails to parse is
/// recorded and counts toward the cap; the next round hints from the last
/// parsed scores, or repeats the zero-shot prompt if there are none.
BootstrapOutcome bootstrap_example(const retrieval::RetrievalEntry& entry, LlmContext& ctx,
                                   const BootstrapConfig& cfg);

/// Fills missing descriptions, then bootstraps every entry.
void describe_and_bootstrap(retrieval::RetrievalSet& set, LlmContext& ctx, const BootstrapConfig& cfg,
                            std::size_t parallelism);

/// Keeps the accepted entries. Stats and config are carried over unchanged.
retrieval::RetrievalSet prune_retrieval_set(const retrieval::RetrievalSet& set);

struct Recommendation {
    std::string dataset_id;
    prompt::ScoreVector scores;
    std::array<tabular::VisualizationType, 2> top2{};
    prompt::Explanation explanation;
    std::vector<std::string> demo_ids;
    llm::CacheKey prompt_digest;

    friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

Recommendation recommend(const tabular::TabularDataset& test, const retrieval::RetrievalSet& set,
                         const retrieval::RetrievalConfig& rcfg, LlmContext& ctx, const BootstrapConfig& pcfg);

/// recommend() over many datasets; results keep the input order.
std::vector<Recommendation> recommend_all(std::span<const tabular::TabularDataset> tests,
                                          const retrieval::RetrievalSet& set,
                                          const retrieval::RetrievalConfig& rcfg, LlmContext& ctx,
                                          const BootstrapConfig& pcfg, std::size_t parallelism);

struct Metrics {
    /// Per-class Hits@2 percentage; nullopt for a class with no examples.
    std::array<std::optional<double>, 4> per_class{};
    double overall = 0.0;
    std::array<std::size_t, 4> n{};
    std::size_t total = 0;
};

/// Throws ConfigError on empty input or a length mismatch.
Metrics evaluate_hits_at_2(std::span<const Recommendation> recs, std::span<const tabular::VisualizationType> gts);

struct ConsistencyResult {
    /// Pooled Pearson r; nullopt when either series has zero variance.
    std::optional<double> pearson_r;
    std::size_t examples_used = 0;
    std::vector<std::string> excluded_ids;
};

/// Re-scores each explanation alone and correlates the re-predicted scores
/// with the original ones. Throws ConfigError with fewer than 2 usable
/// examples.
ConsistencyResult explanation_consistency(std::span<const Recommendation> recs, LlmContext& ctx,
                                          double sum_tolerance = prompt::kDefaultSumTolerance);

enum class AblationAxis { K, RetrievalSize, Ordering };
std::optional<AblationAxis> parse_ablation_axis(std::string_view s);
std::string_view to_string(AblationAxis a);

struct AblationRow {
    std::string value;
    Metrics metrics;
};

/// One Hits@2 evaluation per grid value with everything else fixed. The
/// whole grid is validated before any model call.
std::vector<AblationRow> run_ablation(AblationAxis axis, std::span<const std::string> grid,
                                      const retrieval::RetrievalSet& set, const retrieval::RetrievalConfig& rcfg,
                                      std::span<const tabular::LabeledCorpusRecord> tests, LlmContext& ctx,
                                      const BootstrapConfig& pcfg, std::size_t parallelism);

nlohmann::ordered_json to_json(const Recommendation& r);
Recommendation recommendation_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Metrics& m);
nlohmann::ordered_json scores_to_json(const prompt::ScoreVector& s);
prompt::ScoreVector scores_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const BootstrapOutcome& b);
BootstrapOutcome bootstrap_from_json(const nlohmann::ordered_json& j);

}  // namespace llm4vis::pipeline
