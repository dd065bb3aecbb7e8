#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "llm4vis/error.hpp"
#include "llm4vis/retrieval.hpp"
#include "llm4vis/rng.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace llm4vis;
using namespace llm4vis::retrieval;

namespace {

std::vector<std::size_t> indices(const std::vector<Neighbor>& ns) {
    std::vector<std::size_t> out;
    for (const auto& n : ns) out.push_back(n.index);
    return out;
}

double wcss(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& assign, std::size_t k) {
    double total = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> mean(pts[0].size(), 0.0);
        std::size_t n = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (assign[i] == c) {
                for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += pts[i][d];
                ++n;
            }
        if (n == 0) continue;
        for (auto& m : mean) m /= static_cast<double>(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (assign[i] == c)
                for (std::size_t d = 0; d < mean.size(); ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
    }
    return total;
}

}  // namespace

TEST_CASE("cosine similarity") {
    const features::FeatureVector a{"s", {1, 0}, true}, b{"s", {0, 2}, true}, c{"s", {-3, 0}, true},
        z{"s", {0, 0}, true};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(cosine_similarity(a, c) == doctest::Approx(-1.0));
    CHECK(cosine_similarity(a, z) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(a, features::FeatureVector{"other", {1, 0}, true}), ConfigError);
    CHECK_THROWS_AS(cosine_similarity(a, features::FeatureVector{"s", {1}, true}), ConfigError);
}

TEST_CASE("nearest demonstrations match brute-force sort and prefix") {
    DeterministicRng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t dims = 2 + rng.below(6);
        auto set = synthetic::random_tied_set(rng, n, dims);
        const std::size_t accepted = set.accepted_count();
        if (accepted == 0) continue;
        const std::size_t k = rng.below(std::min<std::size_t>(kMaxDemonstrations, accepted) + 1);
        std::vector<double> test(dims);
        for (auto& x : test) x = static_cast<double>(rng.below(7)) - 3.0;
        const features::FeatureVector tv{"test", test, true};
        CAPTURE(trial);

        const auto want = oracle::nearest_indices(test, set, k);
        const auto got = nearest_demonstrations(tv, set, k, Ordering::NearestFirst, 1);
        REQUIRE(indices(got) == want);
        for (const auto& nb : got) CHECK(nb.similarity == oracle::cosine(test, set.entries[nb.index].vector.values));

        auto reversed = want;
        std::reverse(reversed.begin(), reversed.end());
        CHECK(indices(nearest_demonstrations(tv, set, k, Ordering::FurthestFirst, 1)) == reversed);

        const auto shuffled = indices(nearest_demonstrations(tv, set, k, Ordering::Random, 5));
        CHECK(std::is_permutation(shuffled.begin(), shuffled.end(), want.begin(), want.end()));
        CHECK(shuffled == indices(nearest_demonstrations(tv, set, k, Ordering::Random, 5)));
    }
}

TEST_CASE("nearest demonstrations tie-break by ascending id") {
    const std::vector<std::vector<double>> v = {{1, 0}, {1, 0}, {2, 0}, {0, 1}};
    const auto set = synthetic::vector_set(v, {}, {"d", "b", "c", "a"});
    const auto got = nearest_demonstrations({"test", {1, 0}, true}, set, 3, Ordering::NearestFirst, 0);
    // All three collinear entries tie at similarity 1; ids b < c < d.
    CHECK(indices(got) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("nearest demonstrations skip pruned entries and validate K") {
    const std::vector<std::vector<double>> v = {{1, 0}, {0.9, 0.1}, {0, 1}};
    const auto set = synthetic::vector_set(v, {false, true, true});
    const auto got = nearest_demonstrations({"test", {1, 0}, true}, set, 2, Ordering::NearestFirst, 0);
    CHECK(indices(got) == std::vector<std::size_t>{1, 2});
    CHECK(nearest_demonstrations({"test", {1, 0}, true}, set, 0, Ordering::NearestFirst, 0).empty());
    CHECK_THROWS_AS(nearest_demonstrations({"test", {1, 0}, true}, set, 3, Ordering::NearestFirst, 0), ConfigError);
}

TEST_CASE("random ordering depends on the seed only") {
    std::vector<std::vector<double>> v;
    for (int i = 0; i < 8; ++i) v.push_back({1.0, static_cast<double>(i)});
    const auto set = synthetic::vector_set(v);
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        seen.insert(indices(nearest_demonstrations({"test", {1, 0}, true}, set, 8, Ordering::Random, seed)));
    CHECK(seen.size() > 1);
}

TEST_CASE("k-means objective never increases") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        DeterministicRng rng(seed + 1000);
        const auto pts = synthetic::random_points(rng, 20 + rng.below(80), 2 + rng.below(4));
        const std::size_t k = 1 + rng.below(6);
        const auto km = kmeans(std::span<const std::vector<double>>(pts), k, seed);
        REQUIRE_FALSE(km.objective_trace.empty());
        for (std::size_t i = 1; i < km.objective_trace.size(); ++i)
            CHECK(km.objective_trace[i] <= km.objective_trace[i - 1] * (1 + 1e-12));
        CHECK(km.objective_trace.back() == doctest::Approx(wcss(pts, km.assignments, k)));
    }
}

TEST_CASE("k-means ends at a Lloyd fixed point") {
    DeterministicRng rng(5);
    const auto pts = synthetic::random_points(rng, 60, 3);
    const auto km = kmeans(std::span<const std::vector<double>>(pts), 4, 17);
    CHECK(km.converged);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double own = squared_distance(pts[i], km.centroids[km.assignments[i]]);
        for (const auto& c : km.centroids) CHECK(own <= squared_distance(pts[i], c) + 1e-12);
    }
    // Every cluster is nonempty.
    std::set<std::size_t> used(km.assignments.begin(), km.assignments.end());
    CHECK(used.size() == 4);
}

TEST_CASE("k-means finds the optimal 2-partition of separated groups") {
    DeterministicRng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> pts;
        const std::size_t n = 4 + rng.below(7);
        for (std::size_t i = 0; i < n; ++i) {
            const double off = i < n / 2 ? 0.0 : 50.0;
            pts.push_back({off + rng.uniform(), off + rng.uniform()});
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
            std::vector<std::size_t> a(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1u;
            best = std::min(best, wcss(pts, a, 2));
        }
        const auto km = kmeans(std::span<const std::vector<double>>(pts), 2, static_cast<std::uint64_t>(trial));
        CHECK(km.objective_trace.back() == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("k-means is deterministic and validates its input") {
    DeterministicRng rng(3);
    const auto pts = synthetic::random_points(rng, 30, 2);
    const auto a = kmeans(std::span<const std::vector<double>>(pts), 3, 42);
    const auto b = kmeans(std::span<const std::vector<double>>(pts), 3, 42);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK_THROWS_AS(kmeans(std::span<const std::vector<double>>(pts), 0, 1), ConfigError);
    CHECK_THROWS_AS(kmeans(std::span<const std::vector<double>>(pts), 31, 1), ConfigError);
    // Duplicate points: more clusters than distinct points still terminates.
    const std::vector<std::vector<double>> dup(5, {1.0, 1.0});
    const auto d = kmeans(std::span<const std::vector<double>>(dup), 3, 1);
    CHECK(d.objective_trace.back() == 0.0);
}

TEST_CASE("retrieval set of 500 records keeps C x R entries") {
    const auto records = synthetic::pool(500, 77);
    RetrievalConfig cfg;
    cfg.clusters = 4;
    cfg.representatives = 15;
    cfg.seed = 3;
    const auto set = build_retrieval_set(records, cfg);
    CHECK(set.entries.size() == 60);
    CHECK(set.warnings.empty());
    CHECK(set.schema_version == features::catalog().version());
    std::set<std::string> ids;
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
        const auto& e = set.entries[i];
        ids.insert(e.id);
        if (i > 0 && set.entries[i - 1].cluster_id == e.cluster_id)
            CHECK(set.entries[i - 1].centroid_distance <= e.centroid_distance);
        if (i > 0) CHECK(set.entries[i - 1].cluster_id <= e.cluster_id);
    }
    CHECK(ids.size() == 60);
}

TEST_CASE("representatives are the members closest to their centroid") {
    const auto records = synthetic::pool(80, 12);
    RetrievalConfig cfg;
    cfg.clusters = 3;
    cfg.representatives = 5;
    cfg.seed = 9;
    const auto set = build_retrieval_set(records, cfg);
    // Recompute the clustering independently and check each cluster's prefix.
    std::vector<features::FeatureMap> maps;
    for (const auto& r : records) maps.push_back(features::extract_features(r.dataset));
    const auto stats = features::compute_standardization(maps, features::catalog());
    std::vector<features::FeatureVector> vecs;
    for (const auto& m : maps) vecs.push_back(features::vectorize(m, features::catalog(), stats));
    const auto km = kmeans(std::span<const features::FeatureVector>(vecs), 3, 9);
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<std::pair<double, std::string>> members;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (km.assignments[i] == c)
                members.push_back({std::sqrt(squared_distance(vecs[i].values, km.centroids[c])), records[i].dataset.id});
        std::sort(members.begin(), members.end());
        std::vector<std::string> want, got;
        for (std::size_t j = 0; j < std::min<std::size_t>(5, members.size()); ++j) want.push_back(members[j].second);
        for (const auto& e : set.entries)
            if (e.cluster_id == c) got.push_back(e.id);
        CHECK(got == want);
    }
}

TEST_CASE("small clusters are kept whole with a warning") {
    const auto records = synthetic::pool(12, 4);
    RetrievalConfig cfg;
    cfg.clusters = 4;
    cfg.representatives = 15;
    const auto set = build_retrieval_set(records, cfg);
    CHECK(set.entries.size() == 12);
    CHECK(set.warnings.size() == 4);
    CHECK(set.warnings[0].find("fewer than R = 15") != std::string::npos);
}

TEST_CASE("retrieval config validation") {
    RetrievalConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.retrieval_size() == 60);
    cfg.k = 9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.k = 8;
    cfg.clusters = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(parse_ordering("furthest") == Ordering::FurthestFirst);
    CHECK_FALSE(parse_ordering("sideways"));
    for (auto o : {Ordering::NearestFirst, Ordering::FurthestFirst, Ordering::Random})
        CHECK(parse_ordering(to_string(o)) == o);
    const auto records = synthetic::pool(3, 1);
    CHECK_THROWS_AS(build_retrieval_set(records, RetrievalConfig{}), ConfigError);
}

TEST_CASE("truncation takes centroid ranks round-robin") {
    // 3 clusters (i % 3) with ranks i / 3, from synthetic::vector_set.
    std::vector<std::vector<double>> v(10, std::vector<double>{1.0});
    const auto set = synthetic::vector_set(v);
    const auto t = truncate_retrieval_set(set, 4);
    std::vector<std::string> ids;
    for (const auto& e : t.entries) ids.push_back(e.id);
    // Rank 0 of clusters 0,1,2 then rank 1 of cluster 0, in original order.
    CHECK(ids == std::vector<std::string>{"e1000", "e1001", "e1002", "e1003"});
    CHECK(truncate_retrieval_set(set, 10).entries.size() == 10);
    CHECK_THROWS_AS(truncate_retrieval_set(set, 11), ConfigError);
    // Every cluster survives any truncation to at least 3 entries.
    for (std::size_t size = 3; size <= 10; ++size) {
        std::set<std::size_t> clusters;
        for (const auto& e : truncate_retrieval_set(set, size).entries) clusters.insert(e.cluster_id);
        CHECK(clusters.size() == 3);
    }
}
