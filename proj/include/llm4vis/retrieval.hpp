#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llm4vis/features.hpp"
#include "llm4vis/scores.hpp"
#include "llm4vis/tabular.hpp"

namespace llm4vis::retrieval {

inline constexpr std::size_t kMaxDemonstrations = 8;
inline constexpr std::size_t kMaxKMeansIterations = 300;

enum class Ordering { NearestFirst, FurthestFirst, Random };

std::string_view to_string(Ordering o);
/// "nearest", "furthest" or "random".
std::optional<Ordering> parse_ordering(std::string_view s);

struct RetrievalConfig {
    std::size_t clusters = 4;
    std::size_t representatives = 15;
    std::size_t k = 8;
    std::uint64_t seed = 0;
    Ordering ordering = Ordering::NearestFirst;

    std::size_t retrieval_size() const { return clusters * representatives; }
    /// Throws ConfigError on C = 0, R = 0 or K > 8.
    void validate() const;
};

struct RetrievalEntry {
    std::string id;
    tabular::VisualizationType label;
    features::FeatureMap features;
    features::FeatureVector vector;
    std::size_t cluster_id = 0;
    double centroid_distance = 0.0;
    std::optional<prompt::FeatureDescription> description;
    std::optional<pipeline::BootstrapOutcome> bootstrap;
};

struct RetrievalSet {
    std::string schema_version;
    features::StandardizationStats stats;
    RetrievalConfig config;
    std::vector<RetrievalEntry> entries;
    std::vector<std::string> warnings;

    std::size_t accepted_count() const;
};

struct KMeansResult {
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    /// Within-cluster sum of squares after every update step.
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded
/// with the point farthest from its centroid. Throws ConfigError when
/// clusters is 0 or exceeds the number of points.
KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iterations = kMaxKMeansIterations);
KMeansResult kmeans(std::span<const features::FeatureVector> vectors, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iterations = kMaxKMeansIterations);

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Extracts and standardizes features over the whole pool, clusters it, and
/// keeps the R entries nearest each centroid (fewer for small clusters,
/// with a warning). Entries are ordered by cluster, then by centroid rank.
RetrievalSet build_retrieval_set(std::span<const tabular::LabeledCorpusRecord> pool, const RetrievalConfig& cfg);

/// Cosine similarity in [-1, 1]; 0 when either vector has zero norm.
double cosine_similarity(const features::FeatureVector& u, const features::FeatureVector& v);

struct Neighbor {
    std::size_t index;  // into RetrievalSet::entries
    double similarity;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// The K accepted entries most similar to `test` (ties by ascending id),
/// arranged by `ordering`. Throws ConfigError when K exceeds the number of
/// accepted entries.
std::vector<Neighbor> nearest_demonstrations(const features::FeatureVector& test, const RetrievalSet& set,
                                             std::size_t k, Ordering ordering, std::uint64_t seed);

/// Keeps `size` entries, taking centroid ranks round-robin across clusters
/// so that every cluster stays represented.
RetrievalSet truncate_retrieval_set(const RetrievalSet& set, std::size_t size);

}  // namespace llm4vis::retrieval
