#pragma once

// Seeded synthetic corpora and retrieval sets for property tests.

#include <cmath>
#include <string>
#include <vector>

#include "llm4vis/retrieval.hpp"
#include "llm4vis/rng.hpp"
#include "llm4vis/tabular.hpp"

namespace synthetic {

using namespace llm4vis;

inline tabular::Column decimal(const std::string& name, const std::vector<double>& v) {
    std::vector<tabular::Cell> cells;
    for (double x : v) cells.push_back(tabular::Cell::number(x));
    return {name, std::move(cells), tabular::ColumnKind::of(tabular::DataType::Decimal)};
}

inline tabular::Column strings(const std::string& name, const std::vector<std::string>& v) {
    std::vector<tabular::Cell> cells;
    for (const auto& s : v) cells.push_back(tabular::Cell::text(s));
    return {name, std::move(cells), tabular::ColumnKind::of(tabular::DataType::String)};
}

inline tabular::Column times(const std::string& name, std::int64_t start, std::size_t n) {
    std::vector<tabular::Cell> cells;
    for (std::size_t i = 0; i < n; ++i)
        cells.push_back(tabular::Cell::timestamp(tabular::Timestamp(std::chrono::seconds(start + 86400 * static_cast<std::int64_t>(i)))));
    return {name, std::move(cells), tabular::ColumnKind::of(tabular::DataType::Time)};
}

/// `n` labeled records cycling through four shape families, one per label.
inline std::vector<tabular::LabeledCorpusRecord> pool(std::size_t n, std::uint64_t seed) {
    DeterministicRng rng(seed);
    std::vector<tabular::LabeledCorpusRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = tabular::kAllVisualizationTypes[i % 4];
        const std::size_t rows = 10 + rng.below(30);
        const std::string id = "syn-" + std::to_string(100000 + i);
        std::vector<double> y(rows);
        switch (label) {
            case tabular::VisualizationType::LineChart: {
                const double slope = rng.uniform() * 4 - 2;
                for (std::size_t r = 0; r < rows; ++r) y[r] = 100 + slope * static_cast<double>(r) + rng.uniform();
                out.push_back({{id, times("date", 1600000000 + 86400 * static_cast<std::int64_t>(rng.below(900)), rows),
                                decimal("value", y)},
                               label});
                break;
            }
            case tabular::VisualizationType::ScatterPlot: {
                std::vector<double> x(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    x[r] = rng.uniform() * 100;
                    y[r] = 0.5 * x[r] + 10 * rng.uniform();
                }
                out.push_back({{id, decimal("height", x), decimal("weight", y)}, label});
                break;
            }
            case tabular::VisualizationType::BarChart: {
                const std::size_t cats = 3 + rng.below(5);
                std::vector<std::string> names;
                std::vector<double> v;
                for (std::size_t c = 0; c < cats; ++c) {
                    names.push_back("cat" + std::to_string(c));
                    v.push_back(std::floor(rng.uniform() * 500));
                }
                out.push_back({{id, strings("Category", names), decimal("Count", v)}, label});
                break;
            }
            case tabular::VisualizationType::BoxPlot: {
                std::vector<double> x(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    x[r] = std::exp(2 * rng.uniform());
                    y[r] = std::exp(3 * rng.uniform());
                }
                x[0] *= 20;
                out.push_back({{id, decimal("latency", x), decimal("delay", y)}, label});
                break;
            }
        }
    }
    return out;
}

/// Bootstrap outcome accepted with the given scores.
inline pipeline::BootstrapOutcome accepted(const prompt::ScoreVector& s, const std::string& explanation) {
    pipeline::BootstrapOutcome b;
    b.status = pipeline::BootstrapStatus::Accepted;
    b.history.push_back({s, {explanation}, ""});
    b.final = pipeline::ScoredExplanation{s, {explanation}};
    return b;
}

inline pipeline::BootstrapOutcome pruned() {
    pipeline::BootstrapOutcome b;
    b.status = pipeline::BootstrapStatus::Pruned;
    return b;
}

/// A retrieval set over raw vectors. Entries are accepted unless `accept`
/// says otherwise; ids are "e<index>" zero-padded unless given.
inline retrieval::RetrievalSet vector_set(const std::vector<std::vector<double>>& vectors,
                                          const std::vector<bool>& accept = {},
                                          const std::vector<std::string>& ids = {}) {
    retrieval::RetrievalSet set;
    set.schema_version = "test";
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        retrieval::RetrievalEntry e;
        e.id = ids.empty() ? "e" + std::to_string(1000 + i) : ids[i];
        e.label = tabular::kAllVisualizationTypes[i % 4];
        e.vector = {"test", vectors[i], true};
        e.cluster_id = i % 3;
        e.centroid_distance = static_cast<double>(i / 3);
        const bool ok = accept.empty() || accept[i];
        e.bootstrap = ok ? accepted(prompt::ScoreVector({0.7, 0.1, 0.1, 0.1}), "x") : pruned();
        set.entries.push_back(std::move(e));
    }
    return set;
}

inline std::vector<std::vector<double>> random_points(DeterministicRng& rng, std::size_t n, std::size_t dims) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
    for (auto& p : pts)
        for (auto& v : p) v = rng.uniform() * 10;
    return pts;
}

/// Random vectors with deliberate exact ties: repeats, power-of-two scalings
/// and zero vectors.
inline retrieval::RetrievalSet random_tied_set(DeterministicRng& rng, std::size_t n, std::size_t dims) {
    std::vector<std::vector<double>> palette;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> v(dims);
        for (auto& x : v) x = static_cast<double>(rng.below(7)) - 3.0;
        palette.push_back(v);
    }
    std::vector<std::vector<double>> vecs;
    std::vector<bool> accept;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v;
        switch (rng.below(4)) {
            case 0: v = palette[rng.below(palette.size())]; break;
            case 1: {
                v = palette[rng.below(palette.size())];
                const double scale = std::ldexp(1.0, static_cast<int>(rng.below(5)) - 2);
                for (auto& x : v) x *= scale;
                break;
            }
            case 2: v.assign(dims, 0.0); if (rng.below(3) != 0) { for (auto& x : v) x = rng.uniform() * 2 - 1; } break;
            default: v.resize(dims); for (auto& x : v) x = rng.uniform() * 2 - 1;
        }
        vecs.push_back(v);
        accept.push_back(rng.below(5) != 0);
        ids.push_back("id-" + std::to_string(rng.below(100000)) + "-" + std::to_string(i));
    }
    return vector_set(vecs, accept, ids);
}

/// Uniform, log-uniform or small-integer sample of size n.
inline std::vector<double> random_sample(DeterministicRng& rng, std::size_t n) {
    std::vector<double> v(n);
    const int shape = static_cast<int>(rng.below(3));
    for (auto& x : v) {
        const double u = rng.uniform();
        x = shape == 0 ? 20 * u - 10 : shape == 1 ? std::exp(3 * u) : std::floor(6 * u);
    }
    return v;
}

}  // namespace synthetic
