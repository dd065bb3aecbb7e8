#include <doctest.h>

#include "llm4vis/error.hpp"
#include "llm4vis/pipeline.hpp"
#include "llm4vis/store.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace llm4vis;

namespace {

retrieval::RetrievalSet sample_set() {
    const auto pool = tabular::load_labeled_corpus(testsupport::data_path("e2e_pool.jsonl"));
    retrieval::RetrievalConfig cfg;
    cfg.clusters = 3;
    cfg.representatives = 4;
    cfg.k = 2;
    cfg.seed = 11;
    cfg.ordering = retrieval::Ordering::FurthestFirst;
    auto set = retrieval::build_retrieval_set(pool, cfg);
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
        auto& e = set.entries[i];
        if (i % 3 == 2) continue;  // left undescribed and unbootstrapped
        e.description = prompt::FeatureDescription("Single-column perspective: \"quoted\" text.\nSecond line.");
        e.bootstrap = i % 3 == 0 ? synthetic::accepted(prompt::ScoreVector({0.1, 0.2, 0.3, 0.4}), "why")
                                 : synthetic::pruned();
    }
    set.warnings.push_back("a warning");
    return set;
}

bool same(const retrieval::RetrievalSet& a, const retrieval::RetrievalSet& b) {
    if (a.schema_version != b.schema_version || a.warnings != b.warnings || a.entries.size() != b.entries.size())
        return false;
    if (store::config_to_json(a.config) != store::config_to_json(b.config)) return false;
    if (features::to_json(a.stats) != features::to_json(b.stats)) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const auto& x = a.entries[i];
        const auto& y = b.entries[i];
        if (x.id != y.id || x.label != y.label || x.cluster_id != y.cluster_id ||
            x.centroid_distance != y.centroid_distance || !(x.features == y.features) ||
            x.vector.values != y.vector.values || x.description != y.description || x.bootstrap != y.bootstrap)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("retrieval store round trip") {
    const auto set = sample_set();
    const auto text = store::write_retrieval_set(set);
    const auto back = store::read_retrieval_set(text);
    CHECK(same(set, back));
    CHECK(store::write_retrieval_set(back) == text);

    testsupport::TempDir dir;
    store::save_retrieval_set(set, dir / "nested/store.jsonl");
    CHECK(same(set, store::load_retrieval_set(dir / "nested/store.jsonl")));
}

TEST_CASE("store layout") {
    const auto set = sample_set();
    const auto text = store::write_retrieval_set(set);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == set.entries.size() + 1);
    const auto header = nlohmann::ordered_json::parse(lines[0]);
    std::vector<std::string> keys;
    for (auto it = header.begin(); it != header.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"schema_version", "stats", "config", "warnings"});
    CHECK(header["config"]["ordering"] == "furthest");
    CHECK(header["config"]["seed"] == 11);

    const auto first = nlohmann::ordered_json::parse(lines[1]);
    CHECK(first["id"] == set.entries[0].id);
    CHECK(first["vector"].size() == features::catalog().size());
    CHECK(first["bootstrap"]["status"] == "accepted");
    const auto third = nlohmann::ordered_json::parse(lines[3]);
    CHECK_FALSE(third.contains("description"));
    CHECK_FALSE(third.contains("bootstrap"));
}

TEST_CASE("store errors name the line") {
    const auto text = store::write_retrieval_set(sample_set());
    const auto header = text.substr(0, text.find('\n') + 1);
    const auto message = [](const std::string& content) {
        try {
            store::read_retrieval_set(content);
        } catch (const IngestError& e) {
            return std::string(e.what());
        }
        return std::string("read");
    };
    CHECK(message("") == "empty retrieval store");
    CHECK(message("not json\n").rfind("store line 1: ", 0) == 0);
    CHECK(message("{\"schema_version\":\"v0\",\"stats\":{},\"config\":{}}\n").rfind("store line 1: feature schema 'v0'",
                                                                                    0) == 0);
    CHECK(message(header + "{\"id\":\"x\"}\n").rfind("store line 2: ", 0) == 0);
    CHECK(message(header + "\n{\"id\":\"x\",\"label\":\"pie\",\"cluster_id\":0}\n") ==
          "store line 3: unknown label 'pie'");

    auto entry = nlohmann::ordered_json::parse(text.substr(header.size(), text.find('\n', header.size()) - header.size()));
    entry["vector"] = {1.0, 2.0};
    CHECK(message(header + entry.dump() + "\n").find("store line 2: vector has 2 values") == 0);

    CHECK_THROWS_AS(store::load_retrieval_set("/nonexistent/store.jsonl"), IngestError);
}

TEST_CASE("store config parsing") {
    CHECK(store::config_from_json({{"ordering", "random"}}).ordering == retrieval::Ordering::Random);
    CHECK(store::config_from_json(nlohmann::ordered_json::object()).k == 8);
    CHECK_THROWS_AS(store::config_from_json({{"ordering", "sideways"}}), ConfigError);
}
