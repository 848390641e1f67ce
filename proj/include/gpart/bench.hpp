#pragma once

#include <chrono>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpart/infer.hpp"
#include "gpart/io.hpp"
#include "gpart/metrics.hpp"
#include "gpart/report.hpp"
#include "gpart/sbm.hpp"

namespace gpart {

inline QualityMetrics compute_quality(const Graph& g, const Partition& pred,
                                      const Partition& truth) {
    QualityMetrics q;
    q.ac = matched_accuracy(pred, truth);
    q.ari = ari(pred, truth);
    const PairwiseScores prf = pairwise_prf(pred, truth);
    q.precision = prf.precision;
    q.recall = prf.recall;
    q.f1 = prf.f1;
    q.modularity = modularity(g, pred);
    q.k_pred = pred.k;
    q.k_true = truth.k;
    return q;
}

struct BenchSettings {
    std::vector<std::int64_t> scales{10000, 50000};
    int trials = 5;
    double within_between_ratio = 2.5;  // benchmark "hardest setting"
    double size_heterogeneity = 3.0;
    double avg_degree = 85.0;
    double degree_exponent = 2.5;
    double threshold = 0.5;
    RefinerConfig refiner;
    std::uint64_t seed = 0;
    double oot_s = 10000.0;
};

namespace detail {

struct ArmAverages {
    double time = 0.0, ac = 0.0, ari_v = 0.0, f1 = 0.0, rcl = 0.0, pcn = 0.0;
    double refine_time = 0.0;
    double n_super = 0.0;
    int count = 0;

    void add(double t, const QualityMetrics& q, double refine_t, double ns) {
        time += t;
        ac += q.ac;
        ari_v += q.ari;
        f1 += q.f1;
        rcl += q.recall;
        pcn += q.precision;
        refine_time += refine_t;
        n_super += ns;
        ++count;
    }

    void finish() {
        if (count == 0) return;
        time /= count;
        ac /= count;
        ari_v /= count;
        f1 /= count;
        rcl /= count;
        pcn /= count;
        refine_time /= count;
        n_super /= count;
    }
};

inline void print_arm_line(std::ostream& os, const std::string& name, const ArmAverages& a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %10.2f %8.4f %8.4f %8.4f (%.4f, %.4f)\n", name.c_str(),
                  a.time, a.ac, a.ari_v, a.f1, a.rcl, a.pcn);
    os << buf;
}

inline void print_improv_line(std::ostream& os, const ArmAverages& scratch,
                              const ArmAverages& pipeline) {
    char buf[256];
    const double time_improv =
        scratch.time > 0.0 ? 100.0 * (scratch.time - pipeline.time) / scratch.time : 0.0;
    std::snprintf(buf, sizeof buf, "%-12s %+9.1f%% %+8.4f %+8.4f %+8.4f\n", "  Improv.",
                  time_improv, pipeline.ac - scratch.ac, pipeline.ari_v - scratch.ari_v,
                  pipeline.f1 - scratch.f1);
    os << buf;
}

}  // namespace detail

// Two-arm benchmark at each scale: the pre-trained pipeline vs the same
// refiner run from scratch on freshly generated hardest-setting graphs.
// Returns one JSON row per (scale, trial, arm); prints an averaged table.
inline std::vector<nlohmann::json> bench_static(const ModelCheckpoint& ckpt,
                                                const BenchSettings& settings, std::ostream& os) {
    using Clock = std::chrono::steady_clock;
    std::vector<nlohmann::json> rows;
    for (const std::int64_t scale : settings.scales) {
        detail::ArmAverages scratch_avg, pipeline_avg;
        for (int trial = 0; trial < settings.trials; ++trial) {
            GeneratorParams gp;
            gp.n = scale;
            gp.within_between_ratio = settings.within_between_ratio;
            gp.size_heterogeneity = settings.size_heterogeneity;
            gp.avg_degree = settings.avg_degree;
            gp.degree_exponent = settings.degree_exponent;
            gp.seed = derive_seed(settings.seed, static_cast<std::uint64_t>(scale) * 101 + trial);
            const GeneratedGraph gen = generate(gp);

            RefinerConfig rc = settings.refiner;
            rc.seed = derive_seed(settings.seed, static_cast<std::uint64_t>(scale) * 577 + trial);

            InferResult pipe = generalize_and_refine(gen.graph, ckpt, rc, settings.threshold);
            pipe.report.quality = compute_quality(gen.graph, pipe.partition, gen.truth);
            const bool pipe_oot = pipe.report.timings.total_s > settings.oot_s;

            const auto t0 = Clock::now();
            const Partition scratch = refine_from_scratch(gen.graph, rc);
            const double scratch_s = std::chrono::duration<double>(Clock::now() - t0).count();
            const QualityMetrics scratch_q = compute_quality(gen.graph, scratch, gen.truth);
            const bool scratch_oot = scratch_s > settings.oot_s;

            nlohmann::json pipe_row = {{"schema_version", kReportSchemaVersion},
                                       {"kind", "bench-static"},
                                       {"scale", scale},
                                       {"trial", trial},
                                       {"arm", "pipeline"},
                                       {"graph_seed", gp.seed},
                                       {"refiner_seed", rc.seed},
                                       {"oot", pipe_oot},
                                       {"report", to_json(pipe.report)}};
            rows.push_back(pipe_row);
            RunReport scratch_report;
            scratch_report.n = gen.graph.n();
            scratch_report.m = gen.graph.num_edges();
            scratch_report.n_super = gen.graph.n();  // scratch arm refines the full graph
            scratch_report.k_init = static_cast<NodeId>(gen.graph.n());
            scratch_report.k_final = scratch.k;
            scratch_report.timings.refine_s = scratch_s;
            scratch_report.timings.total_s = scratch_s;
            scratch_report.quality = scratch_q;
            rows.push_back({{"schema_version", kReportSchemaVersion},
                            {"kind", "bench-static"},
                            {"scale", scale},
                            {"trial", trial},
                            {"arm", "scratch"},
                            {"graph_seed", gp.seed},
                            {"refiner_seed", rc.seed},
                            {"oot", scratch_oot},
                            {"report", to_json(scratch_report)}});

            if (!pipe_oot) {
                pipeline_avg.add(pipe.report.timings.total_s, *pipe.report.quality,
                                 pipe.report.timings.refine_s,
                                 static_cast<double>(pipe.report.n_super));
            }
            if (!scratch_oot) {
                scratch_avg.add(scratch_s, scratch_q, scratch_s,
                                static_cast<double>(gen.graph.n()));
            }
        }
        scratch_avg.finish();
        pipeline_avg.finish();
        os << "== static N=" << scale << " (" << settings.trials << " trials) ==\n";
        os << "arm                time(s)       AC      ARI       F1 (RCL, PCN)\n";
        detail::print_arm_line(os, "scratch", scratch_avg);
        detail::print_arm_line(os, "pipeline", pipeline_avg);
        detail::print_improv_line(os, scratch_avg, pipeline_avg);
        char buf[128];
        std::snprintf(buf, sizeof buf, "mean super-node count fed to refiner: %.0f of %lld\n\n",
                      pipeline_avg.n_super, static_cast<long long>(scale));
        os << buf;
    }
    return rows;
}

// Snowball streaming benchmark: both arms run per cumulative step; rows carry
// step-resolved N and the super-node count.
inline std::vector<nlohmann::json> bench_stream(const ModelCheckpoint& ckpt,
                                                const BenchSettings& settings,
                                                std::int64_t n_total, int t_steps,
                                                std::ostream& os) {
    using Clock = std::chrono::steady_clock;
    std::vector<nlohmann::json> rows;
    std::vector<detail::ArmAverages> scratch_avg(static_cast<std::size_t>(t_steps));
    std::vector<detail::ArmAverages> pipeline_avg(static_cast<std::size_t>(t_steps));

    for (int trial = 0; trial < settings.trials; ++trial) {
        GeneratorParams gp;
        gp.n = n_total;
        gp.within_between_ratio = settings.within_between_ratio;
        gp.size_heterogeneity = settings.size_heterogeneity;
        gp.avg_degree = settings.avg_degree;
        gp.degree_exponent = settings.degree_exponent;
        gp.seed = derive_seed(settings.seed, 7700 + static_cast<std::uint64_t>(trial));
        const GeneratedGraph gen = generate(gp);
        const SnowballSplit split =
            snowball_split(gen.graph, gen.truth, t_steps, derive_seed(settings.seed, 8800 + trial));

        for (int t = 0; t < t_steps; ++t) {
            const Graph& step_graph = split.steps[t].graph;
            const Partition& step_truth = split.steps[t].truth;
            RefinerConfig rc = settings.refiner;
            rc.seed = derive_seed(settings.seed, 9900 + trial * 100 + t);

            InferResult pipe = generalize_and_refine(step_graph, ckpt, rc, settings.threshold);
            pipe.report.phase = "stream-step " + std::to_string(t + 1);
            pipe.report.quality = compute_quality(step_graph, pipe.partition, step_truth);

            const auto t0 = Clock::now();
            const Partition scratch = refine_from_scratch(step_graph, rc);
            const double scratch_s = std::chrono::duration<double>(Clock::now() - t0).count();
            const QualityMetrics scratch_q = compute_quality(step_graph, scratch, step_truth);

            rows.push_back({{"schema_version", kReportSchemaVersion},
                            {"kind", "bench-stream"},
                            {"n_total", n_total},
                            {"step", t + 1},
                            {"trial", trial},
                            {"arm", "pipeline"},
                            {"graph_seed", gp.seed},
                            {"refiner_seed", rc.seed},
                            {"oot", pipe.report.timings.total_s > settings.oot_s},
                            {"report", to_json(pipe.report)}});
            RunReport scratch_report;
            scratch_report.phase = pipe.report.phase;
            scratch_report.n = step_graph.n();
            scratch_report.m = step_graph.num_edges();
            scratch_report.n_super = step_graph.n();
            scratch_report.k_init = static_cast<NodeId>(step_graph.n());
            scratch_report.k_final = scratch.k;
            scratch_report.timings.refine_s = scratch_s;
            scratch_report.timings.total_s = scratch_s;
            scratch_report.quality = scratch_q;
            rows.push_back({{"schema_version", kReportSchemaVersion},
                            {"kind", "bench-stream"},
                            {"n_total", n_total},
                            {"step", t + 1},
                            {"trial", trial},
                            {"arm", "scratch"},
                            {"graph_seed", gp.seed},
                            {"refiner_seed", rc.seed},
                            {"oot", scratch_s > settings.oot_s},
                            {"report", to_json(scratch_report)}});

            pipeline_avg[t].add(pipe.report.timings.total_s, *pipe.report.quality,
                                pipe.report.timings.refine_s,
                                static_cast<double>(pipe.report.n_super));
            scratch_avg[t].add(scratch_s, scratch_q, scratch_s,
                               static_cast<double>(step_graph.n()));
        }
    }

    os << "== stream N=" << n_total << " T=" << t_steps << " (" << settings.trials
       << " trials) ==\n";
    os << "step        N     N~(mean)   t_pipe(s)  t_scratch(s)  ARI_pipe  ARI_scratch\n";
    for (int t = 0; t < t_steps; ++t) {
        pipeline_avg[t].finish();
        scratch_avg[t].finish();
        char buf[256];
        std::snprintf(buf, sizeof buf, "%4d %8lld %10.0f %11.2f %13.2f %9.4f %12.4f\n", t + 1,
                      static_cast<long long>(n_total) * (t + 1) / t_steps, pipeline_avg[t].n_super,
                      pipeline_avg[t].time, scratch_avg[t].time, pipeline_avg[t].ari_v,
                      scratch_avg[t].ari_v);
        os << buf;
    }
    os << "\n";
    return rows;
}

inline nlohmann::json eval_files(const std::string& graph_path, const std::string& pred_path,
                                 const std::string& truth_path, bool one_based) {
    const Graph g = read_edge_tsv(graph_path, one_based);
    const Partition pred = read_partition_tsv(pred_path, one_based, g.n());
    const Partition truth = read_partition_tsv(truth_path, one_based, g.n());
    return to_json(compute_quality(g, pred, truth));
}

}  // namespace gpart
