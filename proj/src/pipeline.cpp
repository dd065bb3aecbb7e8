#include "llm4vis/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "llm4vis/error.hpp"
#include "llm4vis/features.hpp"
#include "llm4vis/log.hpp"
#include "llm4vis/parallel.hpp"
#include "llm4vis/stats.hpp"
#include "llm4vis/text.hpp"

namespace llm4vis::pipeline {

using tabular::VisualizationType;

void BootstrapConfig::validate() const {
    if (!(margin > 0.0 && margin < 1.0)) throw ConfigError("bootstrap.margin must be in (0, 1)");
    if (max_iters < 1) throw ConfigError("bootstrap.max_iters must be at least 1");
    if (!(sum_tolerance >= 0.0 && sum_tolerance < 1.0))
        throw ConfigError("bootstrap.sum_tolerance must be in [0, 1)");
}

bool accept_scores(const prompt::ScoreVector& scores, VisualizationType gt, double margin) {
    const double top = scores[gt];
    double other = -1.0;
    for (auto t : tabular::kAllVisualizationTypes)
        if (t != gt) other = std::max(other, scores[t]);
    const double gap = top - other;
    return gap > 0.0 && gap >= margin - kAcceptEpsilon;
}

prompt::HintFill compose_hint(const prompt::ScoreVector& prev, VisualizationType gt, double margin) {
    if (accept_scores(prev, gt, margin))
        throw ConfigError("no hint needed: scores already accept " + std::string(tabular::display_name(gt)));
    return prompt::make_hint(gt, prev);
}

namespace {

llm::ChatResponse send(LlmContext& ctx, const std::string& prompt_text) {
    prompt::check_prompt_length(prompt_text, ctx.max_prompt_chars);
    return ctx.gateway.complete(llm::ChatRequest::from_prompt(prompt_text, ctx.settings));
}

}  // namespace

BootstrapOutcome bootstrap_example(const retrieval::RetrievalEntry& entry, LlmContext& ctx,
                                   const BootstrapConfig& cfg) {
    cfg.validate();
    if (!entry.description) throw ConfigError("entry has no description: " + entry.id);
    BootstrapOutcome out;
    std::optional<prompt::ScoreVector> last;
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const std::string text =
            last ? prompt::render_hint_prompt(*entry.description, compose_hint(*last, entry.label, cfg.margin),
                                              ctx.templates)
                 : prompt::render_recommendation_prompt(*entry.description, {}, ctx.templates);
        const auto resp = send(ctx, text);
        BootstrapStep step;
        try {
            auto parsed = prompt::parse_scores(resp.text, cfg.sum_tolerance);
            step.scores = parsed.scores;
            step.explanation = parsed.explanation;
        } catch (const ParseError& e) {
            step.error = e.what();
            log::warning("bootstrap " + entry.id + " iteration " + std::to_string(iter + 1) + ": " + e.what());
        }
        out.history.push_back(step);
        if (!step.scores) continue;
        last = step.scores;
        if (accept_scores(*step.scores, entry.label, cfg.margin)) {
            out.status = BootstrapStatus::Accepted;
            out.final = ScoredExplanation{*step.scores, step.explanation};
            return out;
        }
    }
    out.status = BootstrapStatus::Pruned;
    return out;
}

void describe_and_bootstrap(retrieval::RetrievalSet& set, LlmContext& ctx, const BootstrapConfig& cfg,
                            std::size_t parallelism) {
    cfg.validate();
    parallel_for(set.entries.size(), parallelism, [&](std::size_t i) {
        auto& e = set.entries[i];
        if (!e.description) e.description = prompt::describe_dataset(e.features, ctx.gateway, ctx.settings, ctx.templates);
        e.bootstrap = bootstrap_example(e, ctx, cfg);
    });
}

retrieval::RetrievalSet prune_retrieval_set(const retrieval::RetrievalSet& set) {
    retrieval::RetrievalSet out;
    out.schema_version = set.schema_version;
    out.stats = set.stats;
    out.config = set.config;
    out.warnings = set.warnings;
    for (const auto& e : set.entries) {
        if (!e.bootstrap) throw ConfigError("entry " + e.id + " has not been bootstrapped");
        if (e.bootstrap->accepted()) out.entries.push_back(e);
    }
    if (out.entries.empty() && !set.entries.empty()) {
        const std::string msg = "every retrieval entry was pruned; only K = 0 is usable";
        out.warnings.push_back(msg);
        log::warning(msg);
    }
    return out;
}

Recommendation recommend(const tabular::TabularDataset& test, const retrieval::RetrievalSet& set,
                         const retrieval::RetrievalConfig& rcfg, LlmContext& ctx, const BootstrapConfig& pcfg) {
    rcfg.validate();
    pcfg.validate();
    const auto& schema = features::catalog();
    if (set.schema_version != schema.version())
        throw ConfigError("retrieval store uses feature schema '" + set.schema_version + "', expected '" +
                          schema.version() + "'");

    const auto fmap = features::extract_features(test);
    const auto desc = prompt::describe_dataset(fmap, ctx.gateway, ctx.settings, ctx.templates);
    const auto vec = features::vectorize(fmap, schema, set.stats);
    const auto neighbors = retrieval::nearest_demonstrations(vec, set, rcfg.k, rcfg.ordering, rcfg.seed);

    Recommendation r;
    r.dataset_id = test.id;
    std::vector<prompt::DemonstrationBlock> demos;
    for (const auto& n : neighbors) {
        demos.push_back(prompt::build_demonstration(set.entries[n.index], ctx.templates));
        r.demo_ids.push_back(set.entries[n.index].id);
    }
    const std::string text = prompt::render_recommendation_prompt(desc, demos, ctx.templates);
    prompt::check_prompt_length(text, ctx.max_prompt_chars);
    const auto req = llm::ChatRequest::from_prompt(text, ctx.settings);
    r.prompt_digest = llm::cache_key(req);

    auto resp = ctx.gateway.complete(req);
    prompt::ParsedResponse parsed;
    try {
        parsed = prompt::parse_scores(resp.text, pcfg.sum_tolerance);
    } catch (const ParseError&) {
        // Only an uncached live provider can answer differently the second time.
        const bool resend = !ctx.gateway.has_cache() && ctx.gateway.provider().name() != "mock";
        if (resend) resp = ctx.gateway.complete(req);
        try {
            parsed = prompt::parse_scores(resp.text, pcfg.sum_tolerance);
        } catch (const ParseError& e) {
            throw ParseError("recommendation for " + test.id + ": " + e.what(), e.raw_response());
        }
    }
    r.scores = parsed.scores;
    r.top2 = parsed.scores.top2();
    r.explanation = parsed.explanation;
    return r;
}

std::vector<Recommendation> recommend_all(std::span<const tabular::TabularDataset> tests,
                                          const retrieval::RetrievalSet& set,
                                          const retrieval::RetrievalConfig& rcfg, LlmContext& ctx,
                                          const BootstrapConfig& pcfg, std::size_t parallelism) {
    std::vector<Recommendation> out(tests.size());
    parallel_for(tests.size(), parallelism, [&](std::size_t i) { out[i] = recommend(tests[i], set, rcfg, ctx, pcfg); });
    return out;
}

Metrics evaluate_hits_at_2(std::span<const Recommendation> recs, std::span<const VisualizationType> gts) {
    if (recs.empty()) throw ConfigError("no recommendations to evaluate");
    if (recs.size() != gts.size())
        throw ConfigError(std::to_string(recs.size()) + " recommendations but " + std::to_string(gts.size()) +
                          " ground-truth labels");
    Metrics m;
    std::array<std::size_t, 4> hits{};
    std::size_t total_hits = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto c = static_cast<std::size_t>(gts[i]);
        ++m.n[c];
        const bool hit = recs[i].top2[0] == gts[i] || recs[i].top2[1] == gts[i];
        if (hit) {
            ++hits[c];
            ++total_hits;
        }
    }
    for (std::size_t c = 0; c < 4; ++c)
        if (m.n[c] > 0) m.per_class[c] = 100.0 * static_cast<double>(hits[c]) / static_cast<double>(m.n[c]);
    m.total = recs.size();
    m.overall = 100.0 * static_cast<double>(total_hits) / static_cast<double>(m.total);
    return m;
}

ConsistencyResult explanation_consistency(std::span<const Recommendation> recs, LlmContext& ctx,
                                          double sum_tolerance) {
    if (recs.size() < 2) throw ConfigError("explanation consistency needs at least 2 recommendations");
    ConsistencyResult out;
    std::vector<double> original, repredicted;
    for (const auto& r : recs) {
        const auto resp = send(ctx, prompt::render_rescoring_prompt(r.explanation));
        try {
            const auto parsed = prompt::parse_scores(resp.text, sum_tolerance);
            for (std::size_t i = 0; i < 4; ++i) {
                original.push_back(r.scores.values()[i]);
                repredicted.push_back(parsed.scores.values()[i]);
            }
            ++out.examples_used;
        } catch (const ParseError& e) {
            log::warning("re-scoring " + r.dataset_id + " excluded: " + e.what());
            out.excluded_ids.push_back(r.dataset_id);
        }
    }
    if (out.examples_used < 2)
        throw ConfigError("only " + std::to_string(out.examples_used) + " explanation(s) could be re-scored");
    if (auto p = stats::pearson(original, repredicted)) out.pearson_r = p->statistic;
    return out;
}

std::optional<AblationAxis> parse_ablation_axis(std::string_view s) {
    if (s == "K" || s == "k") return AblationAxis::K;
    if (s == "retrieval_size" || s == "retrieval-size") return AblationAxis::RetrievalSize;
    if (s == "ordering") return AblationAxis::Ordering;
    return std::nullopt;
}

std::string_view to_string(AblationAxis a) {
    switch (a) {
        case AblationAxis::K: return "K";
        case AblationAxis::RetrievalSize: return "retrieval_size";
        case AblationAxis::Ordering: return "ordering";
    }
    return "K";
}

namespace {

std::size_t parse_count(std::string_view s, std::string_view what) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ConfigError("invalid " + std::string(what) + " grid value '" + std::string(s) + "'");
    return v;
}

struct GridPoint {
    retrieval::RetrievalConfig rcfg;
    std::optional<std::size_t> size;
};

}  // namespace

std::vector<AblationRow> run_ablation(AblationAxis axis, std::span<const std::string> grid,
                                      const retrieval::RetrievalSet& set, const retrieval::RetrievalConfig& rcfg,
                                      std::span<const tabular::LabeledCorpusRecord> tests, LlmContext& ctx,
                                      const BootstrapConfig& pcfg, std::size_t parallelism) {
    if (grid.empty()) throw ConfigError("empty ablation grid");
    if (tests.empty()) throw ConfigError("empty test corpus");
    const std::size_t accepted = set.accepted_count();

    std::vector<GridPoint> points;
    for (const auto& g : grid) {
        GridPoint p{rcfg, std::nullopt};
        switch (axis) {
            case AblationAxis::K:
                p.rcfg.k = parse_count(g, "K");
                if (p.rcfg.k > retrieval::kMaxDemonstrations)
                    throw ConfigError("grid K = " + g + " exceeds the maximum of 8");
                if (p.rcfg.k > accepted)
                    throw ConfigError("grid K = " + g + " exceeds the " + std::to_string(accepted) +
                                      " accepted retrieval entries");
                break;
            case AblationAxis::RetrievalSize:
                p.size = parse_count(g, "retrieval_size");
                if (*p.size == 0 || *p.size > set.entries.size())
                    throw ConfigError("grid retrieval_size = " + g + " must be in 1.." +
                                      std::to_string(set.entries.size()));
                if (rcfg.k > *p.size)
                    throw ConfigError("grid retrieval_size = " + g + " is smaller than K = " +
                                      std::to_string(rcfg.k));
                break;
            case AblationAxis::Ordering: {
                const auto o = retrieval::parse_ordering(g);
                if (!o) throw ConfigError("unknown ordering '" + g + "' (allowed: nearest, furthest, random)");
                p.rcfg.ordering = *o;
                break;
            }
        }
        p.rcfg.validate();
        points.push_back(p);
    }

    std::vector<tabular::TabularDataset> datasets;
    std::vector<VisualizationType> gts;
    for (const auto& t : tests) {
        datasets.push_back(t.dataset);
        gts.push_back(t.label);
    }

    std::vector<AblationRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto sub = p.size ? retrieval::truncate_retrieval_set(set, *p.size) : set;
        const auto recs = recommend_all(datasets, sub, p.rcfg, ctx, pcfg, parallelism);
        rows.push_back({grid[i], evaluate_hits_at_2(recs, gts)});
    }
    return rows;
}

// ---------------------------------------------------------------- JSON

nlohmann::ordered_json scores_to_json(const prompt::ScoreVector& s) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (auto t : tabular::kAllVisualizationTypes) j[std::string(tabular::display_name(t))] = s[t];
    return j;
}

prompt::ScoreVector scores_from_json(const nlohmann::ordered_json& j) {
    std::array<double, 4> v{};
    for (auto t : tabular::kAllVisualizationTypes)
        v[static_cast<std::size_t>(t)] = j.at(std::string(tabular::display_name(t))).get<double>();
    return prompt::ScoreVector(v);
}

nlohmann::ordered_json to_json(const Recommendation& r) {
    nlohmann::ordered_json j;
    j["id"] = r.dataset_id;
    j["scores"] = scores_to_json(r.scores);
    j["top2"] = {tabular::display_name(r.top2[0]), tabular::display_name(r.top2[1])};
    j["explanation"] = r.explanation.full_text;
    j["demo_ids"] = r.demo_ids;
    j["prompt_digest"] = r.prompt_digest.digest;
    return j;
}

Recommendation recommendation_from_json(const nlohmann::ordered_json& j) {
    Recommendation r;
    r.dataset_id = j.at("id").get<std::string>();
    r.scores = scores_from_json(j.at("scores"));
    const auto& top = j.at("top2");
    if (!top.is_array() || top.size() != 2) throw IngestError("top2 must list two types");
    for (std::size_t i = 0; i < 2; ++i) {
        const auto t = tabular::parse_visualization_alias(top[i].get<std::string>());
        if (!t) throw IngestError("unknown visualization type '" + top[i].get<std::string>() + "'");
        r.top2[i] = *t;
    }
    r.explanation.full_text = j.at("explanation").get<std::string>();
    r.demo_ids = j.at("demo_ids").get<std::vector<std::string>>();
    r.prompt_digest.digest = j.at("prompt_digest").get<std::string>();
    return r;
}

nlohmann::ordered_json to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    for (auto t : tabular::kAllVisualizationTypes) {
        const auto& v = m.per_class[static_cast<std::size_t>(t)];
        j[std::string(tabular::corpus_label(t))] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
    }
    j["overall"] = m.overall;
    nlohmann::ordered_json n;
    for (auto t : tabular::kAllVisualizationTypes)
        n[std::string(tabular::corpus_label(t))] = m.n[static_cast<std::size_t>(t)];
    n["total"] = m.total;
    j["n"] = n;
    return j;
}

nlohmann::ordered_json to_json(const BootstrapOutcome& b) {
    nlohmann::ordered_json j;
    j["status"] = b.accepted() ? "accepted" : "pruned";
    j["iterations"] = b.iterations();
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (const auto& s : b.history) {
        nlohmann::ordered_json h;
        h["scores"] = s.scores ? scores_to_json(*s.scores) : nlohmann::ordered_json();
        h["explanation"] = s.explanation.full_text;
        h["error"] = s.error;
        hist.push_back(std::move(h));
    }
    j["history"] = std::move(hist);
    if (b.final) {
        j["final"] = {{"scores", scores_to_json(b.final->scores)}, {"explanation", b.final->explanation.full_text}};
    } else {
        j["final"] = nullptr;
    }
    return j;
}

BootstrapOutcome bootstrap_from_json(const nlohmann::ordered_json& j) {
    BootstrapOutcome b;
    const auto status = j.at("status").get<std::string>();
    if (status == "accepted")
        b.status = BootstrapStatus::Accepted;
    else if (status == "pruned")
        b.status = BootstrapStatus::Pruned;
    else
        throw IngestError("unknown bootstrap status '" + status + "'");
    for (const auto& h : j.at("history")) {
        BootstrapStep s;
        if (!h.at("scores").is_null()) s.scores = scores_from_json(h.at("scores"));
        s.explanation.full_text = h.at("explanation").get<std::string>();
        s.error = h.value("error", std::string{});
        b.history.push_back(std::move(s));
    }
    if (j.contains("final") && !j["final"].is_null())
        b.final = ScoredExplanation{scores_from_json(j["final"].at("scores")),
                                    {j["final"].at("explanation").get<std::string>()}};
    if (b.accepted() != b.final.has_value()) throw IngestError("bootstrap final must be present iff accepted");
    if (j.at("iterations").get<std::size_t>() != b.history.size())
        throw IngestError("bootstrap iterations disagree with history length");
    return b;
}

}  // namespace llm4vis::pipeline
