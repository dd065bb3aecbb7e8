#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "llm4vis/cli.hpp"
#include "llm4vis/error.hpp"
#include "llm4vis/features.hpp"
#include "llm4vis/log.hpp"
#include "llm4vis/parallel.hpp"
#include "llm4vis/store.hpp"
#include "llm4vis/tabular.hpp"

namespace llm4vis::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_output(const fs::path& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw ConfigError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path& require_path(const fs::path& p, std::string_view key) {
    if (p.empty()) throw ConfigError("missing " + std::string(key));
    return p;
}

fs::path store_path(const RunConfig& cfg) {
    return cfg.paths.store.empty() ? cfg.paths.output_dir / "retrieval_store.jsonl" : cfg.paths.store;
}

fs::path recommendations_path(const RunConfig& cfg) {
    return cfg.paths.recommendations.empty() ? cfg.paths.output_dir / "recommendations.jsonl"
                                             : cfg.paths.recommendations;
}

pipeline::LlmContext context_for(const RunConfig& cfg, llm::Gateway& gateway, const prompt::Templates& t) {
    return pipeline::LlmContext{gateway, cfg.model, t, cfg.max_prompt_chars};
}

std::vector<tabular::TabularDataset> unlabeled(const fs::path& p) {
    return tabular::load_corpus(p, false).unlabeled;
}

}  // namespace

void cmd_features(const RunConfig& cfg, const fs::path& out) {
    const auto datasets = unlabeled(require_path(cfg.paths.corpus, "paths.corpus"));
    std::vector<std::string> lines(datasets.size());
    parallel_for(datasets.size(), cfg.parallelism, [&](std::size_t i) {
        ordered_json j;
        j["id"] = datasets[i].id;
        j["schema_version"] = features::catalog().version();
        j["features"] = features::to_json(features::extract_features(datasets[i]));
        lines[i] = j.dump() + "\n";
    });
    std::string content;
    for (const auto& l : lines) content += l;
    write_output(out, content);
}

void cmd_describe(const RunConfig& cfg, llm::Gateway& gateway, const fs::path& out) {
    const auto datasets = unlabeled(require_path(cfg.paths.corpus, "paths.corpus"));
    const auto templates = load_templates(cfg);
    std::vector<std::string> lines(datasets.size());
    parallel_for(datasets.size(), cfg.parallelism, [&](std::size_t i) {
        const auto fmap = features::extract_features(datasets[i]);
        const auto d = prompt::describe_dataset(fmap, gateway, cfg.model, templates);
        ordered_json j;
        j["id"] = datasets[i].id;
        j["description"] = d.text();
        j["has_single_column_section"] = d.has_single_column_section();
        j["has_cross_column_section"] = d.has_cross_column_section();
        j["contains_forbidden_chart_words"] = d.contains_forbidden_chart_words();
        lines[i] = j.dump() + "\n";
    });
    std::string content;
    for (const auto& l : lines) content += l;
    write_output(out, content);
}

retrieval::RetrievalSet cmd_build_retrieval(const RunConfig& cfg, llm::Gateway& gateway) {
    cfg.validate();
    const auto pool = tabular::load_labeled_corpus(require_path(cfg.paths.corpus, "paths.corpus"));
    const auto templates = load_templates(cfg);
    auto set = retrieval::build_retrieval_set(pool, cfg.retrieval);
    for (const auto& w : set.warnings) log::warning(w);
    auto ctx = context_for(cfg, gateway, templates);
    pipeline::describe_and_bootstrap(set, ctx, cfg.bootstrap, cfg.parallelism);
    auto pruned = pipeline::prune_retrieval_set(set);
    log::info("retrieval set: " + std::to_string(set.entries.size()) + " selected, " +
              std::to_string(pruned.entries.size()) + " accepted");
    store::save_retrieval_set(pruned, store_path(cfg));
    return pruned;
}

std::vector<pipeline::Recommendation> cmd_recommend(const RunConfig& cfg, llm::Gateway& gateway,
                                                    const fs::path& out) {
    cfg.validate();
    const auto tests = unlabeled(require_path(cfg.paths.test_corpus, "paths.test_corpus"));
    const auto set = store::load_retrieval_set(store_path(cfg));
    const auto templates = load_templates(cfg);
    auto ctx = context_for(cfg, gateway, templates);
    auto recs = pipeline::recommend_all(tests, set, cfg.retrieval, ctx, cfg.bootstrap, cfg.parallelism);
    std::string content;
    for (const auto& r : recs) content += pipeline::to_json(r).dump() + "\n";
    write_output(out, content);
    return recs;
}

pipeline::Metrics cmd_evaluate(const RunConfig& cfg, const fs::path& out, llm::Gateway* consistency_gateway) {
    const auto tests = tabular::load_labeled_corpus(require_path(cfg.paths.test_corpus, "paths.test_corpus"));
    const auto rec_path = recommendations_path(cfg);
    const std::string content = read_text(rec_path);

    std::map<std::string, pipeline::Recommendation> by_id;
    std::size_t line_no = 0;
    std::istringstream in(content);
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto r = pipeline::recommendation_from_json(ordered_json::parse(line));
            const auto id = r.dataset_id;
            if (!by_id.emplace(id, std::move(r)).second) throw IngestError("duplicate id '" + id + "'");
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(rec_path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw IngestError(rec_path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }

    std::vector<pipeline::Recommendation> recs;
    std::vector<tabular::VisualizationType> gts;
    for (const auto& t : tests) {
        auto it = by_id.find(t.dataset.id);
        if (it == by_id.end()) throw ConfigError("no recommendation for test dataset '" + t.dataset.id + "'");
        recs.push_back(it->second);
        gts.push_back(t.label);
    }
    if (recs.size() != by_id.size()) {
        for (const auto& [id, r] : by_id) {
            const bool known = std::any_of(tests.begin(), tests.end(),
                                           [&](const tabular::LabeledCorpusRecord& t) { return t.dataset.id == id; });
            if (!known) throw ConfigError("recommendation for unknown dataset '" + id + "'");
        }
    }
    const auto metrics = pipeline::evaluate_hits_at_2(recs, gts);
    write_output(out, pipeline::to_json(metrics).dump() + "\n");

    if (consistency_gateway) {
        const auto templates = load_templates(cfg);
        auto ctx = context_for(cfg, *consistency_gateway, templates);
        const auto c = pipeline::explanation_consistency(recs, ctx, cfg.bootstrap.sum_tolerance);
        ordered_json j;
        j["pearson_r"] = c.pearson_r ? ordered_json(*c.pearson_r) : ordered_json();
        j["examples_used"] = c.examples_used;
        j["excluded_ids"] = c.excluded_ids;
        const fs::path cpath = out == "-" ? fs::path("-")
                                          : out.parent_path() / (out.stem().string() + ".consistency.json");
        write_output(cpath, j.dump() + "\n");
    }
    return metrics;
}

std::vector<pipeline::AblationRow> cmd_ablate(const RunConfig& cfg, llm::Gateway& gateway,
                                              pipeline::AblationAxis axis, const std::vector<std::string>& grid,
                                              const fs::path& out) {
    cfg.validate();
    const auto tests = tabular::load_labeled_corpus(require_path(cfg.paths.test_corpus, "paths.test_corpus"));
    const auto set = store::load_retrieval_set(store_path(cfg));
    const auto templates = load_templates(cfg);
    auto ctx = context_for(cfg, gateway, templates);
    auto rows = pipeline::run_ablation(axis, grid, set, cfg.retrieval, tests, ctx, cfg.bootstrap, cfg.parallelism);
    ordered_json j;
    j["axis"] = pipeline::to_string(axis);
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) j["rows"].push_back({{"value", r.value}, {"metrics", pipeline::to_json(r.metrics)}});
    write_output(out, j.dump() + "\n");
    return rows;
}

// ---------------------------------------------------------------- entry point

namespace {

std::vector<std::string> split_grid(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        const auto b = cur.find_first_not_of(' ');
        const auto e = cur.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

std::string error_line(std::string_view message, std::string_view kind) {
    nlohmann::json j{{"error", message}, {"kind", kind}};
    return j.dump();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const GatewayFactory& factory) {
    CLI::App app{"Visualization type recommendation with retrieved few-shot demonstrations", "llm4vis"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::map<std::string, std::string> overrides;  // dotted key -> raw value
    std::map<std::string, std::string> raw;
    app.add_option("--config", config_file, "JSON config file");

    struct Alias {
        const char* flag;
        const char* key;
        const char* help;
    };
    static const Alias aliases[] = {
        {"--seed", "seed", "Seed for clustering, random ordering and sampling"},
        {"--backend", "backend", "live, cached-live or mock"},
        {"--cache-dir", "paths.cache_dir", "Response cache directory"},
        {"--templates-dir", "paths.templates_dir", "Directory with prompt template overrides"},
        {"--model", "model_id", "Chat model id"},
        {"--api-base", "api_base", "Provider base URL"},
        {"--parallelism", "parallelism", "Maximum concurrent model calls"},
        {"--mock-transcript", "paths.mock_transcript", "Mock transcript (backend mock)"},
        {"--output-dir", "paths.output_dir", "Default directory for outputs"},
    };
    std::map<std::string, std::string> alias_values;
    for (const auto& a : aliases) app.add_option(a.flag, alias_values[a.key], a.help);

    for (const auto& key : config_keys()) {
        const bool shadowed = std::any_of(std::begin(aliases), std::end(aliases), [&](const Alias& a) {
            return std::string_view(a.flag).substr(2) == key;
        });
        if (shadowed) continue;
        app.add_option("--" + key, raw[key], "Config override")->group("Config overrides");
    }

    std::string out_path;
    std::string corpus, test_corpus, store_file, recs_file, axis_name, grid_text;
    std::string k_flag;
    bool consistency = false;

    auto* features_cmd = app.add_subcommand("features", "Extract feature maps for a corpus");
    features_cmd->add_option("--corpus", corpus, "Corpus JSONL");
    features_cmd->add_option("--out", out_path, "Output file ('-' for stdout)");

    auto* describe_cmd = app.add_subcommand("describe", "Generate feature descriptions");
    describe_cmd->add_option("--corpus", corpus, "Corpus JSONL");
    describe_cmd->add_option("--out", out_path, "Output file ('-' for stdout)");

    auto* build_cmd = app.add_subcommand("build-retrieval", "Cluster, describe, bootstrap and prune a retrieval set");
    build_cmd->add_option("--corpus", corpus, "Labeled corpus JSONL");
    build_cmd->add_option("--store", store_file, "Retrieval store to write");

    auto* rec_cmd = app.add_subcommand("recommend", "Recommend visualization types for a test corpus");
    rec_cmd->add_option("--test-corpus", test_corpus, "Test corpus JSONL");
    rec_cmd->add_option("--store", store_file, "Retrieval store");
    rec_cmd->add_option("--k", k_flag, "Number of demonstrations (0 = zero-shot)");
    rec_cmd->add_option("--out", out_path, "Output file ('-' for stdout)");

    auto* eval_cmd = app.add_subcommand("evaluate", "Compute Hits@2 for recommendations");
    eval_cmd->add_option("--recommendations", recs_file, "Recommendations JSONL");
    eval_cmd->add_option("--test-corpus", test_corpus, "Labeled test corpus JSONL");
    eval_cmd->add_option("--out", out_path, "Metrics output file ('-' for stdout)");
    eval_cmd->add_flag("--consistency", consistency, "Also compute explanation consistency");

    auto* ablate_cmd = app.add_subcommand("ablate", "Hits@2 over a grid of one setting");
    ablate_cmd->add_option("--axis", axis_name, "K, retrieval_size or ordering")->required();
    ablate_cmd->add_option("--grid", grid_text, "Comma-separated grid values")->required();
    ablate_cmd->add_option("--store", store_file, "Retrieval store");
    ablate_cmd->add_option("--test-corpus", test_corpus, "Labeled test corpus JSONL");
    ablate_cmd->add_option("--out", out_path, "Output file ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << error_line(e.what(), "usage") << '\n';
        return 2;
    }

    try {
        nlohmann::json doc = default_config_json();
        if (!config_file.empty()) {
            std::ifstream in(config_file, std::ios::binary);
            if (!in) throw ConfigError("cannot read config " + config_file);
            std::ostringstream ss;
            ss << in.rdbuf();
            const auto user = nlohmann::json::parse(ss.str(), nullptr, false);
            if (user.is_discarded()) throw ConfigError("config " + config_file + " is not valid JSON");
            merge_config(doc, user);
        }
        for (const auto& [key, value] : raw)
            if (app.count("--" + key) > 0) set_config_value(doc, key, value);
        for (const auto& a : aliases)
            if (app.count(a.flag) > 0) set_config_value(doc, a.key, alias_values[a.key]);
        if (!corpus.empty()) set_config_value(doc, "paths.corpus", corpus);
        if (!test_corpus.empty()) set_config_value(doc, "paths.test_corpus", test_corpus);
        if (!store_file.empty()) set_config_value(doc, "paths.store", store_file);
        if (!recs_file.empty()) set_config_value(doc, "paths.recommendations", recs_file);
        if (!k_flag.empty()) set_config_value(doc, "retrieval.k", k_flag);

        RunConfig cfg = config_from_json(doc);
        const auto output = [&](const char* default_name) {
            return out_path.empty() ? cfg.paths.output_dir / default_name : fs::path(out_path);
        };

        if (features_cmd->parsed()) {
            cmd_features(cfg, output("features.jsonl"));
            return 0;
        }
        if (eval_cmd->parsed() && !consistency) {
            cmd_evaluate(cfg, output("metrics.json"));
            return 0;
        }

        std::optional<pipeline::AblationAxis> axis;
        std::vector<std::string> grid;
        if (ablate_cmd->parsed()) {
            axis = pipeline::parse_ablation_axis(axis_name);
            if (!axis) throw ConfigError("unknown ablation axis '" + axis_name + "' (allowed: K, retrieval_size, ordering)");
            grid = split_grid(grid_text);
        }

        // Everything below talks to a model; the gateway (and credential) comes first.
        cfg.validate();
        auto gateway = factory(cfg);
        if (describe_cmd->parsed()) cmd_describe(cfg, *gateway, output("descriptions.jsonl"));
        if (build_cmd->parsed()) cmd_build_retrieval(cfg, *gateway);
        if (rec_cmd->parsed()) cmd_recommend(cfg, *gateway, output("recommendations.jsonl"));
        if (eval_cmd->parsed()) cmd_evaluate(cfg, output("metrics.json"), gateway.get());
        if (ablate_cmd->parsed())
            cmd_ablate(cfg, *gateway, *axis, grid,
                       output(("ablation_" + std::string(pipeline::to_string(*axis)) + ".json").c_str()));
        return 0;
    } catch (const Error& e) {
        err << error_line(e.what(), e.kind()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << error_line(e.what(), "internal") << '\n';
        return 1;
    }
}

}  // namespace llm4vis::cli
