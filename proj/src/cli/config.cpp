#include <cstdlib>
#include <fstream>
#include <sstream>

#include "llm4vis/cli.hpp"
#include "llm4vis/error.hpp"

namespace llm4vis::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::Live: return "live";
        case Backend::CachedLive: return "cached-live";
        case Backend::Mock: return "mock";
    }
    return "live";
}

std::optional<Backend> parse_backend(std::string_view s) {
    if (s == "live") return Backend::Live;
    if (s == "cached-live") return Backend::CachedLive;
    if (s == "mock") return Backend::Mock;
    return std::nullopt;
}

void RunConfig::validate() const {
    retrieval.validate();
    bootstrap.validate();
    if (model.model_id.empty()) throw ConfigError("model_id must not be empty");
    if (!(model.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (model.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
    if (max_prompt_chars == 0) throw ConfigError("max_prompt_chars must be positive");
    if (backend == Backend::Mock && paths.mock_transcript.empty())
        throw ConfigError("backend mock needs paths.mock_transcript");
    if (backend == Backend::CachedLive && paths.cache_dir.empty())
        throw ConfigError("backend cached-live needs paths.cache_dir");
}

json default_config_json() {
    const RunConfig d;
    return config_to_json(d);
}

json config_to_json(const RunConfig& c) {
    json j;
    j["paths"] = {{"corpus", c.paths.corpus.string()},
                  {"test_corpus", c.paths.test_corpus.string()},
                  {"store", c.paths.store.string()},
                  {"recommendations", c.paths.recommendations.string()},
                  {"cache_dir", c.paths.cache_dir.string()},
                  {"output_dir", c.paths.output_dir.string()},
                  {"mock_transcript", c.paths.mock_transcript.string()},
                  {"templates_dir", c.paths.templates_dir.string()}};
    j["retrieval"] = {{"clusters", c.retrieval.clusters},
                      {"representatives", c.retrieval.representatives},
                      {"k", c.retrieval.k},
                      {"ordering", retrieval::to_string(c.retrieval.ordering)}};
    j["bootstrap"] = {{"margin", c.bootstrap.margin},
                      {"max_iters", c.bootstrap.max_iters},
                      {"sum_tolerance", c.bootstrap.sum_tolerance}};
    j["model_id"] = c.model.model_id;
    j["temperature"] = c.model.temperature;
    j["max_tokens"] = c.model.max_tokens;
    j["max_prompt_chars"] = c.max_prompt_chars;
    j["api_base"] = c.api_base;
    j["backend"] = to_string(c.backend);
    j["parallelism"] = c.parallelism;
    j["seed"] = c.seed;
    return j;
}

namespace {

void flatten(const json& j, const std::string& prefix, std::vector<std::string>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            flatten(*it, key, out);
        else
            out.push_back(key);
    }
}

json::json_pointer pointer_for(std::string_view dotted) {
    std::string p;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        auto dot = dotted.find('.', start);
        if (dot == std::string_view::npos) dot = dotted.size();
        p += '/';
        p += dotted.substr(start, dot - start);
        start = dot + 1;
    }
    return json::json_pointer(p);
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

void set_leaf(json& doc, const std::string& key, json value) {
    const json defaults = default_config_json();
    const auto ptr = pointer_for(key);
    if (!defaults.contains(ptr) || defaults.at(ptr).is_object()) throw ConfigError("unknown config key '" + key + "'");
    const json& def = defaults.at(ptr);
    if (!same_kind(def, value))
        throw ConfigError("config key '" + key + "' expects a " + std::string(def.type_name()) + ", got " +
                          value.type_name());
    if (def.is_number_unsigned() || def.is_number_integer()) {
        if (!value.is_number_integer() && !value.is_number_unsigned())
            throw ConfigError("config key '" + key + "' expects an integer");
        if (def.is_number_unsigned() && value.is_number_integer() && value.get<std::int64_t>() < 0)
            throw ConfigError("config key '" + key + "' must not be negative");
    }
    doc[ptr] = std::move(value);
}

void merge_into(json& doc, const json& user, const std::string& prefix) {
    if (!user.is_object()) throw ConfigError("config " + (prefix.empty() ? "document" : "'" + prefix + "'") +
                                             " must be a JSON object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            merge_into(doc, *it, key);
        else
            set_leaf(doc, key, *it);
    }
}

template <typename T>
T get(const json& doc, std::string_view key) {
    try {
        return doc.at(pointer_for(key)).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        flatten(default_config_json(), "", out);
        return out;
    }();
    return keys;
}

void set_config_value(json& doc, std::string_view dotted_key, std::string_view value) {
    const std::string key(dotted_key);
    const json defaults = default_config_json();
    const auto ptr = pointer_for(key);
    if (!defaults.contains(ptr) || defaults.at(ptr).is_object()) throw ConfigError("unknown config key '" + key + "'");
    if (defaults.at(ptr).is_string()) {
        set_leaf(doc, key, json(std::string(value)));
        return;
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("invalid value '" + std::string(value) + "' for '" + key + "'");
    set_leaf(doc, key, std::move(parsed));
}

void merge_config(json& doc, const json& user) { merge_into(doc, user, ""); }

RunConfig config_from_json(const json& doc) {
    RunConfig c;
    c.paths.corpus = get<std::string>(doc, "paths.corpus");
    c.paths.test_corpus = get<std::string>(doc, "paths.test_corpus");
    c.paths.store = get<std::string>(doc, "paths.store");
    c.paths.recommendations = get<std::string>(doc, "paths.recommendations");
    c.paths.cache_dir = get<std::string>(doc, "paths.cache_dir");
    c.paths.output_dir = get<std::string>(doc, "paths.output_dir");
    c.paths.mock_transcript = get<std::string>(doc, "paths.mock_transcript");
    c.paths.templates_dir = get<std::string>(doc, "paths.templates_dir");
    c.retrieval.clusters = get<std::size_t>(doc, "retrieval.clusters");
    c.retrieval.representatives = get<std::size_t>(doc, "retrieval.representatives");
    c.retrieval.k = get<std::size_t>(doc, "retrieval.k");
    const auto ordering = get<std::string>(doc, "retrieval.ordering");
    const auto o = retrieval::parse_ordering(ordering);
    if (!o) throw ConfigError("unknown ordering '" + ordering + "' (allowed: nearest, furthest, random)");
    c.retrieval.ordering = *o;
    c.bootstrap.margin = get<double>(doc, "bootstrap.margin");
    c.bootstrap.max_iters = get<std::size_t>(doc, "bootstrap.max_iters");
    c.bootstrap.sum_tolerance = get<double>(doc, "bootstrap.sum_tolerance");
    c.model.model_id = get<std::string>(doc, "model_id");
    c.model.temperature = get<double>(doc, "temperature");
    c.model.max_tokens = get<int>(doc, "max_tokens");
    c.max_prompt_chars = get<std::size_t>(doc, "max_prompt_chars");
    c.api_base = get<std::string>(doc, "api_base");
    const auto backend = get<std::string>(doc, "backend");
    const auto b = parse_backend(backend);
    if (!b) throw ConfigError("unknown backend '" + backend + "' (allowed: live, cached-live, mock)");
    c.backend = *b;
    c.parallelism = get<std::size_t>(doc, "parallelism");
    c.seed = get<std::uint64_t>(doc, "seed");
    c.retrieval.seed = c.seed;
    return c;
}

RunConfig load_config_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const json user = json::parse(ss.str(), nullptr, false);
    if (user.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    json doc = default_config_json();
    merge_config(doc, user);
    return config_from_json(doc);
}

std::string require_credential() {
    const char* v = std::getenv(std::string(llm::kApiKeyEnv).c_str());
    if (v == nullptr || *v == '\0') throw ConfigError("missing credential: set " + std::string(llm::kApiKeyEnv));
    return v;
}

std::unique_ptr<llm::Gateway> make_gateway(const RunConfig& cfg) {
    cfg.validate();
    std::optional<llm::ResponseCache> cache;
    if (!cfg.paths.cache_dir.empty() && cfg.backend != Backend::Live) cache.emplace(cfg.paths.cache_dir);
    std::shared_ptr<llm::Provider> provider;
    if (cfg.backend == Backend::Mock) {
        provider = std::make_shared<llm::MockProvider>(llm::MockProvider::load_transcript(cfg.paths.mock_transcript));
    } else {
        provider = std::make_shared<llm::OpenAIProvider>(cfg.api_base, require_credential());
    }
    return std::make_unique<llm::Gateway>(std::move(provider), std::move(cache));
}

prompt::Templates load_templates(const RunConfig& cfg) {
    if (cfg.paths.templates_dir.empty()) return prompt::Templates::embedded();
    return prompt::Templates::load(cfg.paths.templates_dir);
}

}  // namespace llm4vis::cli
