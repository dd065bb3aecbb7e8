#include "llm4vis/store.hpp"

#include <fstream>
#include <sstream>

#include "llm4vis/error.hpp"
#include "llm4vis/features.hpp"
#include "llm4vis/pipeline.hpp"

namespace llm4vis::store {

using nlohmann::ordered_json;

ordered_json config_to_json(const retrieval::RetrievalConfig& cfg) {
    ordered_json j;
    j["clusters"] = cfg.clusters;
    j["representatives"] = cfg.representatives;
    j["k"] = cfg.k;
    j["seed"] = cfg.seed;
    j["ordering"] = retrieval::to_string(cfg.ordering);
    return j;
}

retrieval::RetrievalConfig config_from_json(const ordered_json& j) {
    retrieval::RetrievalConfig cfg;
    cfg.clusters = j.value("clusters", cfg.clusters);
    cfg.representatives = j.value("representatives", cfg.representatives);
    cfg.k = j.value("k", cfg.k);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("ordering")) {
        const auto s = j["ordering"].get<std::string>();
        const auto o = retrieval::parse_ordering(s);
        if (!o) throw ConfigError("unknown ordering '" + s + "' (allowed: nearest, furthest, random)");
        cfg.ordering = *o;
    }
    return cfg;
}

std::string write_retrieval_set(const retrieval::RetrievalSet& set) {
    std::string out;
    ordered_json header;
    header["schema_version"] = set.schema_version;
    header["stats"] = features::to_json(set.stats);
    header["config"] = config_to_json(set.config);
    header["warnings"] = set.warnings;
    out += header.dump();
    out += '\n';
    for (const auto& e : set.entries) {
        ordered_json j;
        j["id"] = e.id;
        j["label"] = tabular::corpus_label(e.label);
        j["cluster_id"] = e.cluster_id;
        j["centroid_distance"] = e.centroid_distance;
        j["features"] = features::to_json(e.features);
        j["vector"] = e.vector.values;
        if (e.description) j["description"] = e.description->text();
        if (e.bootstrap) j["bootstrap"] = pipeline::to_json(*e.bootstrap);
        out += j.dump();
        out += '\n';
    }
    return out;
}

retrieval::RetrievalSet read_retrieval_set(std::string_view content) {
    const auto& schema = features::catalog();
    retrieval::RetrievalSet set;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        const std::string_view line = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const std::string where = "store line " + std::to_string(line_no) + ": ";
        try {
            const auto j = ordered_json::parse(line);
            if (!have_header) {
                set.schema_version = j.at("schema_version").get<std::string>();
                if (set.schema_version != schema.version())
                    throw IngestError(where + "feature schema '" + set.schema_version + "' is not '" +
                                      schema.version() + "'");
                set.stats = features::standardization_from_json(j.at("stats"));
                set.config = config_from_json(j.at("config"));
                if (j.contains("warnings")) set.warnings = j["warnings"].get<std::vector<std::string>>();
                have_header = true;
                continue;
            }
            retrieval::RetrievalEntry e;
            e.id = j.at("id").get<std::string>();
            const auto label = j.at("label").get<std::string>();
            const auto t = tabular::parse_corpus_label(label);
            if (!t) throw IngestError(where + "unknown label '" + label + "'");
            e.label = *t;
            e.cluster_id = j.at("cluster_id").get<std::size_t>();
            e.centroid_distance = j.value("centroid_distance", 0.0);
            e.features = features::feature_map_from_json(j.at("features"), schema);
            e.vector.schema_version = set.schema_version;
            e.vector.values = j.at("vector").get<std::vector<double>>();
            e.vector.standardized = true;
            if (e.vector.values.size() != schema.size())
                throw IngestError(where + "vector has " + std::to_string(e.vector.values.size()) +
                                  " values, expected " + std::to_string(schema.size()));
            if (j.contains("description")) e.description = prompt::FeatureDescription(j["description"].get<std::string>());
            if (j.contains("bootstrap")) e.bootstrap = pipeline::bootstrap_from_json(j["bootstrap"]);
            set.entries.push_back(std::move(e));
        } catch (const IngestError& e) {
            if (std::string_view(e.what()).starts_with("store line")) throw;
            throw IngestError(where + e.what());
        } catch (const Error& e) {
            throw IngestError(where + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(where + e.what());
        }
    }
    if (!have_header) throw IngestError("empty retrieval store");
    return set;
}

void save_retrieval_set(const retrieval::RetrievalSet& set, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << write_retrieval_set(set);
    if (!out.flush()) throw ConfigError("cannot write " + path.string());
}

retrieval::RetrievalSet load_retrieval_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read retrieval store " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_retrieval_set(ss.str());
}

}  // namespace llm4vis::store
