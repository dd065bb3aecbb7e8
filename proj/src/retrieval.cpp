#include "llm4vis/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "llm4vis/error.hpp"
#include "llm4vis/rng.hpp"

namespace llm4vis::retrieval {

namespace {

using Points = std::span<const std::vector<double>>;

std::vector<std::vector<double>> seed_plus_plus(Points points, std::size_t clusters, DeterministicRng& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    std::vector<bool> chosen(n, false);
    std::size_t first = rng.below(n);
    centroids.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

    while (centroids.size() < clusters) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                pick = i;
                if (acc > target) break;
            }
        } else {
            // Every point coincides with a centroid: pick an unchosen index.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) free.push_back(i);
            pick = free[rng.below(free.size())];
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
    return centroids;
}

std::vector<std::size_t> assign(Points points, const std::vector<std::vector<double>>& centroids) {
    std::vector<std::size_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best) {
                best = d;
                out[i] = c;
            }
        }
    }
    return out;
}

void fill_empty_clusters(Points points, std::vector<std::size_t>& assignments,
                         std::vector<std::vector<double>>& centroids) {
    const std::size_t k = centroids.size();
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> sizes(k, 0);
        for (auto a : assignments) ++sizes[a];
        if (sizes[c] > 0) continue;
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[assignments[i]] < 2) continue;
            const double d = squared_distance(points[i], centroids[assignments[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        assignments[far] = c;
        centroids[c] = points[far];
    }
}

std::vector<std::vector<double>> means(Points points, const std::vector<std::size_t>& assignments, std::size_t k) {
    const std::size_t dim = points[0].size();
    std::vector<std::vector<double>> out(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        ++counts[assignments[i]];
        for (std::size_t d = 0; d < dim; ++d) out[assignments[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (auto& v : out[c]) v /= static_cast<double>(counts[c]);
    return out;
}

double wcss(Points points, const std::vector<std::size_t>& assignments,
            const std::vector<std::vector<double>>& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centroids[assignments[i]]);
    return s;
}

struct Ranked {
    std::size_t pool_index;
    double distance;
};

}  // namespace

std::string_view to_string(Ordering o) {
    switch (o) {
        case Ordering::NearestFirst: return "nearest";
        case Ordering::FurthestFirst: return "furthest";
        case Ordering::Random: return "random";
    }
    return "nearest";
}

std::optional<Ordering> parse_ordering(std::string_view s) {
    if (s == "nearest") return Ordering::NearestFirst;
    if (s == "furthest") return Ordering::FurthestFirst;
    if (s == "random") return Ordering::Random;
    return std::nullopt;
}

void RetrievalConfig::validate() const {
    if (clusters == 0) throw ConfigError("retrieval.clusters must be at least 1");
    if (representatives == 0) throw ConfigError("retrieval.representatives must be at least 1");
    if (k > kMaxDemonstrations)
        throw ConfigError("retrieval.k = " + std::to_string(k) + " exceeds the maximum of " +
                          std::to_string(kMaxDemonstrations));
}

std::size_t RetrievalSet::accepted_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const RetrievalEntry& e) {
        return e.bootstrap && e.bootstrap->accepted();
    }));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ConfigError("vector length mismatch in distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

KMeansResult kmeans(Points points, std::size_t clusters, std::uint64_t seed, std::size_t max_iterations) {
    if (clusters == 0) throw ConfigError("kmeans needs at least one cluster");
    if (clusters > points.size())
        throw ConfigError("cannot form " + std::to_string(clusters) + " clusters from " +
                          std::to_string(points.size()) + " vectors");
    for (const auto& p : points)
        if (p.size() != points[0].size()) throw ConfigError("kmeans vectors differ in length");
    if (max_iterations == 0) max_iterations = 1;

    DeterministicRng rng(seed);
    KMeansResult r;
    r.centroids = seed_plus_plus(points, clusters, rng);
    r.assignments = assign(points, r.centroids);
    fill_empty_clusters(points, r.assignments, r.centroids);
    r.centroids = means(points, r.assignments, clusters);
    r.objective_trace.push_back(wcss(points, r.assignments, r.centroids));
    r.iterations = 1;

    while (r.iterations < max_iterations) {
        auto next = assign(points, r.centroids);
        auto centroids = r.centroids;
        fill_empty_clusters(points, next, centroids);
        if (next == r.assignments) {
            r.converged = true;
            break;
        }
        r.assignments = std::move(next);
        r.centroids = means(points, r.assignments, clusters);
        r.objective_trace.push_back(wcss(points, r.assignments, r.centroids));
        ++r.iterations;
    }
    return r;
}

KMeansResult kmeans(std::span<const features::FeatureVector> vectors, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iterations) {
    std::vector<std::vector<double>> points;
    points.reserve(vectors.size());
    for (const auto& v : vectors) points.push_back(v.values);
    return kmeans(Points(points), clusters, seed, max_iterations);
}

RetrievalSet build_retrieval_set(std::span<const tabular::LabeledCorpusRecord> pool, const RetrievalConfig& cfg) {
    cfg.validate();
    if (pool.size() < cfg.clusters)
        throw ConfigError("pool of " + std::to_string(pool.size()) + " records is smaller than C = " +
                          std::to_string(cfg.clusters));

    const auto& schema = features::catalog();
    std::vector<features::FeatureMap> maps;
    maps.reserve(pool.size());
    for (const auto& rec : pool) maps.push_back(features::extract_features(rec.dataset));

    RetrievalSet set;
    set.schema_version = schema.version();
    set.config = cfg;
    set.stats = features::compute_standardization(maps, schema);

    std::vector<features::FeatureVector> vectors;
    vectors.reserve(maps.size());
    for (const auto& m : maps) vectors.push_back(features::vectorize(m, schema, set.stats));

    const KMeansResult km = kmeans(std::span<const features::FeatureVector>(vectors), cfg.clusters, cfg.seed);

    for (std::size_t c = 0; c < cfg.clusters; ++c) {
        std::vector<Ranked> members;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (km.assignments[i] == c)
                members.push_back({i, std::sqrt(squared_distance(vectors[i].values, km.centroids[c]))});
        std::sort(members.begin(), members.end(), [&](const Ranked& a, const Ranked& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            return pool[a.pool_index].dataset.id < pool[b.pool_index].dataset.id;
        });
        if (members.size() < cfg.representatives)
            set.warnings.push_back("cluster " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                   " members, fewer than R = " + std::to_string(cfg.representatives));
        const std::size_t take = std::min(members.size(), cfg.representatives);
        for (std::size_t j = 0; j < take; ++j) {
            const auto i = members[j].pool_index;
            RetrievalEntry e;
            e.id = pool[i].dataset.id;
            e.label = pool[i].label;
            e.features = maps[i];
            e.vector = vectors[i];
            e.cluster_id = c;
            e.centroid_distance = members[j].distance;
            set.entries.push_back(std::move(e));
        }
    }
    return set;
}

double cosine_similarity(const features::FeatureVector& u, const features::FeatureVector& v) {
    if (u.schema_version != v.schema_version)
        throw ConfigError("schema version mismatch: '" + u.schema_version + "' vs '" + v.schema_version + "'");
    if (u.values.size() != v.values.size())
        throw ConfigError("vector length mismatch: " + std::to_string(u.values.size()) + " vs " +
                          std::to_string(v.values.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<Neighbor> nearest_demonstrations(const features::FeatureVector& test, const RetrievalSet& set,
                                             std::size_t k, Ordering ordering, std::uint64_t seed) {
    std::vector<Neighbor> candidates;
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
        const auto& e = set.entries[i];
        if (e.bootstrap && e.bootstrap->accepted()) candidates.push_back({i, cosine_similarity(test, e.vector)});
    }
    if (k > candidates.size())
        throw ConfigError("K = " + std::to_string(k) + " exceeds the " + std::to_string(candidates.size()) +
                          " accepted retrieval entries");
    std::sort(candidates.begin(), candidates.end(), [&](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return set.entries[a.index].id < set.entries[b.index].id;
    });
    candidates.resize(k);
    switch (ordering) {
        case Ordering::NearestFirst: break;
        case Ordering::FurthestFirst: std::reverse(candidates.begin(), candidates.end()); break;
        case Ordering::Random: {
            DeterministicRng rng(seed);
            rng.shuffle(candidates);
            break;
        }
    }
    return candidates;
}

RetrievalSet truncate_retrieval_set(const RetrievalSet& set, std::size_t size) {
    if (size > set.entries.size())
        throw ConfigError("retrieval size " + std::to_string(size) + " exceeds the " +
                          std::to_string(set.entries.size()) + " stored entries");
    // Rank of each entry within its cluster, by centroid distance then id.
    std::vector<std::size_t> order(set.entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = set.entries[a];
        const auto& eb = set.entries[b];
        if (ea.cluster_id != eb.cluster_id) return ea.cluster_id < eb.cluster_id;
        if (ea.centroid_distance != eb.centroid_distance) return ea.centroid_distance < eb.centroid_distance;
        return ea.id < eb.id;
    });
    std::vector<std::size_t> rank(set.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const bool new_cluster =
            i == 0 || set.entries[order[i]].cluster_id != set.entries[order[i - 1]].cluster_id;
        rank[order[i]] = new_cluster ? 0 : rank[order[i - 1]] + 1;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rank[a] != rank[b]) return rank[a] < rank[b];
        return set.entries[a].cluster_id < set.entries[b].cluster_id;
    });
    order.resize(size);
    std::sort(order.begin(), order.end());

    RetrievalSet out;
    out.schema_version = set.schema_version;
    out.stats = set.stats;
    out.config = set.config;
    out.warnings = set.warnings;
    for (auto i : order) out.entries.push_back(set.entries[i]);
    return out;
}

}  // namespace llm4vis::retrieval
