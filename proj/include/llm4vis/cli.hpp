#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4vis/llm.hpp"
#include "llm4vis/pipeline.hpp"
#include "llm4vis/prompt.hpp"
#include "llm4vis/retrieval.hpp"

namespace llm4vis::cli {

enum class Backend { Live, CachedLive, Mock };
std::string_view to_string(Backend b);
std::optional<Backend> parse_backend(std::string_view s);

struct Paths {
    std::filesystem::path corpus;
    std::filesystem::path test_corpus;
    std::filesystem::path store;
    std::filesystem::path recommendations;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir{"out"};
    std::filesystem::path mock_transcript;
    std::filesystem::path templates_dir;
};

struct RunConfig {
    Paths paths;
    retrieval::RetrievalConfig retrieval;
    pipeline::BootstrapConfig bootstrap;
    llm::ModelSettings model;
    std::string api_base{llm::kDefaultApiBase};
    std::size_t max_prompt_chars = prompt::kDefaultMaxPromptChars;
    Backend backend = Backend::CachedLive;
    std::size_t parallelism = 1;
    std::uint64_t seed = 0;

    /// Throws ConfigError on invalid values.
    void validate() const;
};

/// Every settable key, as dotted names ("retrieval.k", "paths.store", ...).
const std::vector<std::string>& config_keys();

/// Default configuration as a JSON document with the config_keys() layout.
nlohmann::json default_config_json();
/// Applies `value` (parsed as JSON when possible, else taken as a string)
/// at a dotted key. Throws ConfigError for unknown keys.
void set_config_value(nlohmann::json& doc, std::string_view dotted_key, std::string_view value);
/// Merges a user config document; unknown keys are rejected.
void merge_config(nlohmann::json& doc, const nlohmann::json& user);
/// Converts a full document to RunConfig; relative paths stay relative.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config_file(const std::filesystem::path& path);

/// Reads the credential from LLM4VIS_API_KEY; throws ConfigError if unset.
std::string require_credential();

/// Builds the gateway selected by cfg.backend.
std::unique_ptr<llm::Gateway> make_gateway(const RunConfig& cfg);

/// Loaded templates (embedded unless paths.templates_dir is set).
prompt::Templates load_templates(const RunConfig& cfg);

// Commands. `out` "-" means stdout.
void cmd_features(const RunConfig& cfg, const std::filesystem::path& out);
void cmd_describe(const RunConfig& cfg, llm::Gateway& gateway, const std::filesystem::path& out);
retrieval::RetrievalSet cmd_build_retrieval(const RunConfig& cfg, llm::Gateway& gateway);
std::vector<pipeline::Recommendation> cmd_recommend(const RunConfig& cfg, llm::Gateway& gateway,
                                                    const std::filesystem::path& out);
/// With a gateway, explanation consistency is computed too and written next
/// to the metrics as "<out stem>.consistency.json".
pipeline::Metrics cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& out,
                               llm::Gateway* consistency_gateway = nullptr);
std::vector<pipeline::AblationRow> cmd_ablate(const RunConfig& cfg, llm::Gateway& gateway,
                                              pipeline::AblationAxis axis, const std::vector<std::string>& grid,
                                              const std::filesystem::path& out);

using GatewayFactory = std::function<std::unique_ptr<llm::Gateway>(const RunConfig&)>;

/// Full command-line entry point. Returns the process exit code; errors are
/// written to `err` as one JSON line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const GatewayFactory& factory = make_gateway);

}  // namespace llm4vis::cli
