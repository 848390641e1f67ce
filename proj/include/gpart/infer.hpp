#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpart/graph.hpp"
#include "gpart/model.hpp"
#include "gpart/refine.hpp"

namespace gpart {

struct PhaseTimings {
    double feat_s = 0.0;    // random projection + feature MLP
    double ffp_s = 0.0;     // propagation + pair classification
    double init_s = 0.0;    // auxiliary graph + components + coarsening
    double refine_s = 0.0;  // refiner call + projection back
    double total_s = 0.0;
};

struct QualityMetrics {
    double ac = 0.0;
    double ari = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double modularity = 0.0;
    NodeId k_pred = 0;
    NodeId k_true = 0;
};

struct RunReport {
    std::int64_t n = 0;
    std::int64_t m = 0;
    std::int64_t n_super = 0;  // super-node count handed to the refiner
    NodeId k_init = 0;
    NodeId k_final = 0;
    std::int64_t zero_embedding_rows = 0;
    PhaseTimings timings;
    std::optional<QualityMetrics> quality;
    std::string phase = "static";
};

// Thresholds the per-edge scores (strictly greater than), keeps the surviving
// edges as an auxiliary graph and returns its connected components. Always a
// feasible partition, whatever the scores are.
inline Partition derive_partition_from_scores(const Graph& g,
                                              const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                              const std::vector<double>& scores, double threshold) {
    if (pairs.size() != scores.size()) {
        throw std::invalid_argument("edge/score length mismatch");
    }
    std::vector<std::pair<NodeId, NodeId>> kept;
    for (std::size_t s = 0; s < scores.size(); ++s) {
        if (scores[s] > threshold) kept.push_back(pairs[s]);
    }
    const Graph aux = Graph::from_edge_list(kept, g.n());
    return connected_components(aux);
}

inline Partition derive_partition(const Graph& g, const ModelCheckpoint& ckpt,
                                  double threshold = 0.5, ForwardStats* stats = nullptr) {
    if (g.num_edges() < 1) throw std::invalid_argument("derive_partition needs at least one edge");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    const std::vector<double> scores = forward_edges(g, ckpt, &pairs, stats);
    return derive_partition_from_scores(g, pairs, scores, threshold);
}

struct InferResult {
    Partition partition;
    RunReport report;
};

// Core of the pipeline given per-edge scores; also the test entry point for
// forced score patterns.
inline InferResult generalize_and_refine_with_scores(
    const Graph& g, const std::vector<std::pair<NodeId, NodeId>>& pairs,
    const std::vector<double>& scores, const RefinerConfig& cfg, double threshold = 0.5,
    const ForwardStats& forward_stats = {}) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    const Partition init = derive_partition_from_scores(g, pairs, scores, threshold);
    const SuperGraph sp = coarsen(g, init);
    const auto t1 = Clock::now();
    const Partition coarse = refine_weighted(sp.coarse, Partition::singletons(sp.coarse.n()), cfg);
    const Partition fine = project_partition(sp, coarse);
    const auto t2 = Clock::now();

    InferResult out;
    out.report.n = g.n();
    out.report.m = g.num_edges();
    out.report.n_super = init.k;
    out.report.k_init = init.k;
    out.report.k_final = fine.k;
    out.report.zero_embedding_rows = forward_stats.zero_rows;
    out.report.timings.feat_s = forward_stats.feat_s;
    out.report.timings.ffp_s = forward_stats.ffp_s;
    out.report.timings.init_s = std::chrono::duration<double>(t1 - t0).count();
    out.report.timings.refine_s = std::chrono::duration<double>(t2 - t1).count();
    out.report.timings.total_s = forward_stats.feat_s + forward_stats.ffp_s +
                                 out.report.timings.init_s + out.report.timings.refine_s;
    out.partition = std::move(fine);
    return out;
}

// Full online pipeline: one forward pass over the edges, initial partition,
// super-graph refinement. Phase timings follow the Feat/FFP/Init/Refine split.
inline InferResult generalize_and_refine(const Graph& g, const ModelCheckpoint& ckpt,
                                         const RefinerConfig& cfg, double threshold = 0.5) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    if (g.num_edges() < 1) throw std::invalid_argument("pipeline needs at least one edge");
    ForwardStats ft;
    std::vector<std::pair<NodeId, NodeId>> pairs;
    const std::vector<double> scores = forward_edges(g, ckpt, &pairs, &ft);
    InferResult out = generalize_and_refine_with_scores(g, pairs, scores, cfg, threshold, ft);
    out.report.timings.total_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

struct StreamResult {
    std::vector<InferResult> steps;
    int failed_step = -1;  // 1-based step that failed, -1 if none
    std::string error;
};

// Snowball streaming driver: the pipeline runs from scratch on every
// cumulative graph, no state is carried between steps. A step failure stops
// the run and preserves the completed steps.
inline StreamResult stream_partition(const std::vector<Graph>& step_graphs,
                                     const ModelCheckpoint& ckpt, const RefinerConfig& cfg,
                                     double threshold = 0.5) {
    StreamResult out;
    for (std::size_t t = 0; t < step_graphs.size(); ++t) {
        try {
            InferResult res = generalize_and_refine(step_graphs[t], ckpt, cfg, threshold);
            res.report.phase = "stream-step " + std::to_string(t + 1);
            out.steps.push_back(std::move(res));
        } catch (const std::exception& e) {
            out.failed_step = static_cast<int>(t + 1);
            out.error = e.what();
            break;
        }
    }
    return out;
}

}  // namespace gpart
