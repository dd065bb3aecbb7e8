#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "llm4vis/retrieval.hpp"

namespace llm4vis::store {

nlohmann::ordered_json config_to_json(const retrieval::RetrievalConfig& cfg);
retrieval::RetrievalConfig config_from_json(const nlohmann::ordered_json& j);

/// Header line {"schema_version", "stats", "config", "warnings"} followed by
/// one line per entry.
std::string write_retrieval_set(const retrieval::RetrievalSet& set);
/// Throws IngestError naming the offending line.
retrieval::RetrievalSet read_retrieval_set(std::string_view content);

void save_retrieval_set(const retrieval::RetrievalSet& set, const std::filesystem::path& path);
retrieval::RetrievalSet load_retrieval_set(const std::filesystem::path& path);

}  // namespace llm4vis::store
