#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "gpart/infer.hpp"
#include "gpart/metrics.hpp"
#include "gpart/pretrain.hpp"
#include "gpart/report.hpp"
#include "gpart/sbm.hpp"
#include "oracles.hpp"

using namespace gpart;

namespace {

// every block of fine must sit inside one block of coarse
bool is_refinement_of(const Partition& fine, const Partition& coarse) {
    std::vector<NodeId> image(static_cast<std::size_t>(fine.k), -1);
    for (std::size_t v = 0; v < fine.assign.size(); ++v) {
        const NodeId fb = fine.assign[v];
        if (image[fb] < 0) image[fb] = coarse.assign[v];
        if (image[fb] != coarse.assign[v]) return false;
    }
    return true;
}

std::vector<std::pair<NodeId, NodeId>> edge_pairs(const Graph& g) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (const auto& e : g.edges()) pairs.emplace_back(e.u, e.v);
    return pairs;
}

}  // namespace

TEST_CASE("partition derivation from forced scores") {
    const Graph g = Graph::from_edge_list(
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {4, 5}, {4, 6}, {5, 6},
         {3, 4}, {2, 4}, {3, 5}, {6, 7}, {7, 8}},
        9);
    const auto pairs = edge_pairs(g);

    SECTION("all scores above threshold reproduce the graph's components") {
        const std::vector<double> ones(pairs.size(), 1.0);
        REQUIRE(derive_partition_from_scores(g, pairs, ones, 0.5) == connected_components(g));
    }
    SECTION("all scores below threshold give singletons") {
        const std::vector<double> zeros(pairs.size(), 0.0);
        const Partition p = derive_partition_from_scores(g, pairs, zeros, 0.5);
        REQUIRE(p.k == g.n());
    }
    SECTION("scores exactly at the threshold are excluded") {
        const std::vector<double> half(pairs.size(), 0.5);
        REQUIRE(derive_partition_from_scores(g, pairs, half, 0.5).k == g.n());
    }
    SECTION("the running-example pattern splits the two groups") {
        // high scores only on within-group edges
        std::vector<double> scores;
        for (const auto& [u, v] : pairs) {
            const bool within_a = u <= 3 && v <= 3;
            const bool within_b = u >= 4 && u <= 6 && v >= 4 && v <= 6;
            scores.push_back(within_a || within_b ? 0.9 : 0.1);
        }
        const Partition p = derive_partition_from_scores(g, pairs, scores, 0.5);
        REQUIRE(p.assign[0] == p.assign[1]);
        REQUIRE(p.assign[1] == p.assign[2]);
        REQUIRE(p.assign[2] == p.assign[3]);
        REQUIRE(p.assign[4] == p.assign[5]);
        REQUIRE(p.assign[5] == p.assign[6]);
        REQUIRE(p.assign[0] != p.assign[4]);
    }
}

TEST_CASE("raising the threshold only refines the partition") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = rng.uniform_int(5, 80);
        const Graph g = oracle::random_graph(n, rng.uniform_int(1, 4 * n), rng);
        const auto pairs = edge_pairs(g);
        std::vector<double> scores(pairs.size());
        for (auto& s : scores) s = rng.uniform();

        Partition prev = derive_partition_from_scores(g, pairs, scores, 0.1);
        for (const double t : {0.3, 0.5, 0.7, 0.9}) {
            const Partition cur = derive_partition_from_scores(g, pairs, scores, t);
            REQUIRE(is_refinement_of(cur, prev));
            REQUIRE(cur.k >= prev.k);
            prev = cur;
        }
        // feasibility: every node assigned exactly once
        REQUIRE_NOTHROW(prev.validate(g.n()));
    }
}

TEST_CASE("pipeline with forced scores") {
    GeneratorParams gp;
    gp.n = 600;
    gp.avg_degree = 14.0;
    gp.seed = 21;
    const GeneratedGraph gen = generate(gp);
    const auto pairs = edge_pairs(gen.graph);
    RefinerConfig cfg;
    cfg.seed = 17;

    SECTION("zero scores degenerate to refining from scratch") {
        const std::vector<double> zeros(pairs.size(), 0.0);
        const InferResult res =
            generalize_and_refine_with_scores(gen.graph, pairs, zeros, cfg);
        REQUIRE(res.report.n_super == gen.graph.n());
        const Partition scratch = refine_from_scratch(gen.graph, cfg);
        REQUIRE(res.partition == scratch);
    }
    SECTION("refined modularity never drops below the initialization") {
        Rng rng(5);
        std::vector<double> scores(pairs.size());
        for (auto& s : scores) s = rng.uniform();
        const Partition init = derive_partition_from_scores(gen.graph, pairs, scores, 0.5);
        const InferResult res =
            generalize_and_refine_with_scores(gen.graph, pairs, scores, cfg);
        REQUIRE(res.report.k_init == init.k);
        REQUIRE(modularity(gen.graph, res.partition) >=
                modularity(gen.graph, init) - 1e-12);
        REQUIRE(res.report.timings.init_s >= 0.0);
        REQUIRE(res.report.timings.refine_s >= 0.0);
    }
}

TEST_CASE("pipeline with a real checkpoint") {
    GeneratorParams gp;
    gp.n = 800;
    gp.avg_degree = 16.0;
    gp.seed = 9;
    const GeneratedGraph gen = generate(gp);

    ModelConfig config;
    config.k = 8;
    config.projection_seed = 31;
    const ModelCheckpoint ckpt = init_checkpoint(config, 14);
    RefinerConfig cfg;
    cfg.seed = 4;

    const InferResult res = generalize_and_refine(gen.graph, ckpt, cfg);
    REQUIRE(res.report.n == gen.graph.n());
    REQUIRE(res.report.m == gen.graph.num_edges());
    REQUIRE(res.report.n_super <= res.report.n);
    REQUIRE(res.report.k_final == res.partition.k);
    REQUIRE_NOTHROW(res.partition.validate(gen.graph.n()));
    REQUIRE(res.report.timings.total_s >=
            res.report.timings.feat_s + res.report.timings.ffp_s +
                res.report.timings.init_s + res.report.timings.refine_s - 1e-6);

    SECTION("streaming: T=1 equals the static run") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 1, 2);
        const StreamResult sr = stream_partition({split.steps[0].graph}, ckpt, cfg);
        REQUIRE(sr.failed_step == -1);
        REQUIRE(sr.steps.size() == 1);
        REQUIRE(sr.steps[0].partition == res.partition);
        REQUIRE(sr.steps[0].report.phase == "stream-step 1");
    }
    SECTION("streaming: final step matches the static run at equal seeds") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 4, 2);
        std::vector<Graph> graphs;
        for (const auto& s : split.steps) graphs.push_back(s.graph);
        const StreamResult sr = stream_partition(graphs, ckpt, cfg);
        REQUIRE(sr.failed_step == -1);
        REQUIRE(sr.steps.size() == 4);
        REQUIRE(sr.steps[3].partition == res.partition);
        for (const auto& step : sr.steps) {
            REQUIRE(step.report.n_super <= step.report.n);
        }
    }
    SECTION("a failing step preserves completed steps") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 3, 2);
        std::vector<Graph> graphs = {split.steps[0].graph, Graph::from_edge_list({}, 5),
                                     split.steps[2].graph};
        const StreamResult sr = stream_partition(graphs, ckpt, cfg);
        REQUIRE(sr.failed_step == 2);
        REQUIRE(sr.steps.size() == 1);
        REQUIRE_FALSE(sr.error.empty());
    }
}

TEST_CASE("run report JSON round-trip") {
    RunReport r;
    r.n = 1000;
    r.m = 5000;
    r.n_super = 120;
    r.k_init = 120;
    r.k_final = 24;
    r.zero_embedding_rows = 2;
    r.timings = {0.01, 0.02, 0.15, 0.25, 0.44};
    r.phase = "stream-step 3";
    QualityMetrics q;
    q.ac = 0.97;
    q.ari = 0.95;
    q.precision = 0.96;
    q.recall = 0.94;
    q.f1 = 0.9499;
    q.modularity = 0.61;
    q.k_pred = 24;
    q.k_true = 25;
    r.quality = q;

    const nlohmann::json j = to_json(r);
    REQUIRE(j.at("schema_version").get<int>() == kReportSchemaVersion);
    const RunReport back = report_from_json(j);
    REQUIRE(back.n == r.n);
    REQUIRE(back.m == r.m);
    REQUIRE(back.n_super == r.n_super);
    REQUIRE(back.k_init == r.k_init);
    REQUIRE(back.k_final == r.k_final);
    REQUIRE(back.phase == r.phase);
    REQUIRE(back.timings.total_s == r.timings.total_s);
    REQUIRE(back.quality.has_value());
    REQUIRE(back.quality->f1 == q.f1);
    REQUIRE(back.quality->k_true == q.k_true);
    REQUIRE(to_json(back) == j);
}
