#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <limits>

#include "gpart/metrics.hpp"
#include "gpart/refine.hpp"
#include "gpart/sbm.hpp"
#include "oracles.hpp"

using namespace gpart;

namespace {

Graph two_triangles() {
    return Graph::from_edge_list({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
}

Partition triangles_truth() {
    Partition p;
    p.assign = {0, 0, 0, 1, 1, 1};
    p.k = 2;
    return p;
}

}  // namespace

TEST_CASE("builtin refiner on two disjoint triangles") {
    const Graph g = two_triangles();
    RefinerConfig cfg;

    SECTION("from singletons it finds the triangles") {
        const Partition out = refine_from_scratch(g, cfg);
        REQUIRE(out.k == 2);
        REQUIRE(modularity(g, out) == Catch::Approx(0.5));
        REQUIRE(modularity(g, out) == Catch::Approx(oracle::best_modularity_exhaustive(g)));
    }
    SECTION("a locally optimal initialization comes back unchanged") {
        const Partition init = triangles_truth();
        const Partition out = refine_weighted(g, init, cfg);
        REQUIRE(out == init);
    }
    SECTION("all-in-one initialization has nothing to move") {
        const Partition out = refine_from_coarse(g, Partition::single_block(6), cfg);
        REQUIRE(out == Partition::single_block(6));
    }
}

TEST_CASE("no-move contract") {
    const Graph g = two_triangles();
    Partition init;
    init.assign = {1, 0, 0, 1, 2, 2};  // non-canonical labels on purpose
    init.k = 3;
    RefinerConfig cfg;
    cfg.max_sweeps = 1;
    cfg.min_gain = std::numeric_limits<double>::infinity();
    REQUIRE(refine_weighted(g, init, cfg) == init);

    cfg.max_sweeps = 0;
    REQUIRE_THROWS_AS(refine_weighted(g, init, cfg), std::invalid_argument);
}

TEST_CASE("refinement never decreases weighted modularity") {
    Rng rng(808);
    RefinerConfig cfg;
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = rng.uniform_int(4, 90);
        const Graph g = oracle::random_graph(n, rng.uniform_int(1, 4 * n), rng);
        const int k = static_cast<int>(rng.uniform_int(1, n));
        const Partition init = oracle::random_partition(n, k, rng);
        cfg.seed = rng.next_u64();

        const Partition out = refine_weighted(g, init, cfg);
        REQUIRE(modularity(g, out) >= modularity(g, init) - 1e-12);

        // same property on a weighted super-graph with self-loops
        const SuperGraph sp = coarsen(g, init);
        if (sp.coarse.total_weight() > 0.0 && sp.coarse.n() > 1) {
            const Partition coarse_init = Partition::singletons(sp.coarse.n());
            const Partition coarse_out = refine_weighted(sp.coarse, coarse_init, cfg);
            REQUIRE(modularity(sp.coarse, coarse_out) >=
                    modularity(sp.coarse, coarse_init) - 1e-12);
        }
    }
}

TEST_CASE("near-optimal quality on exhaustively solvable graphs") {
    Rng rng(909);
    RefinerConfig cfg;
    int solved = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = rng.uniform_int(3, 8);
        const Graph g = oracle::random_graph(n, rng.uniform_int(1, n * (n - 1) / 2), rng);
        cfg.seed = rng.next_u64();
        const double got = modularity(g, refine_from_scratch(g, cfg));
        const double best = oracle::best_modularity_exhaustive(g);
        REQUIRE(got >= 0.95 * best - 1e-12);
        ++solved;
    }
    REQUIRE(solved == 50);
}

TEST_CASE("refining from a coarse super-graph") {
    GeneratorParams p;
    p.n = 1500;
    p.within_between_ratio = 3.5;
    p.avg_degree = 20.0;
    p.seed = 5;
    const GeneratedGraph gen = generate(p);
    RefinerConfig cfg;
    cfg.seed = 3;

    SECTION("a ground-truth initialization survives refinement") {
        const double init_ari = 1.0;
        const Partition out = refine_from_coarse(gen.graph, gen.truth, cfg);
        REQUIRE(ari(out, gen.truth) >= init_ari - 0.01);
    }
    SECTION("fine modularity never drops relative to the initialization") {
        Rng rng(6);
        for (int trial = 0; trial < 5; ++trial) {
            const Partition init = oracle::random_partition(
                gen.graph.n(), static_cast<int>(rng.uniform_int(2, 50)), rng);
            const Partition out = refine_from_coarse(gen.graph, init, cfg);
            REQUIRE(modularity(gen.graph, out) >= modularity(gen.graph, init) - 1e-12);
        }
    }
}

TEST_CASE("edgeless graph rejected") {
    const Graph g = Graph::from_edge_list({}, 5);
    RefinerConfig cfg;
    REQUIRE_THROWS_AS(refine_from_scratch(g, cfg), std::domain_error);
}

TEST_CASE("scratch refinement recovers planted blocks at n=10000") {
    GeneratorParams p;
    p.n = 10000;
    p.within_between_ratio = 2.5;
    p.size_heterogeneity = 3.0;
    p.avg_degree = 85.0;
    p.seed = 77;
    const GeneratedGraph gen = generate(p);
    RefinerConfig cfg;
    cfg.seed = 8;
    const Partition out = refine_from_scratch(gen.graph, cfg);
    REQUIRE(ari(out, gen.truth) >= 0.9);
}

TEST_CASE("external refiner adapter") {
    const Graph g = two_triangles();
    const Partition init = triangles_truth();
    RefinerConfig cfg;
    cfg.kind = RefinerConfig::Kind::external;

    SECTION("identity command returns the initialization") {
        cfg.external_cmd = "cp {init} {out}";
        REQUIRE(refine_weighted(g, init, cfg) == init);
    }
    SECTION("failing command surfaces the exit code") {
        cfg.external_cmd = "echo boom >&2; exit 3";
        REQUIRE_THROWS_WITH(refine_weighted(g, init, cfg),
                            Catch::Matchers::ContainsSubstring("code 3") &&
                                Catch::Matchers::ContainsSubstring("boom"));
    }
    SECTION("timeout is enforced") {
        cfg.external_cmd = "sleep 30";
        cfg.timeout_s = 0.2;
        REQUIRE_THROWS_WITH(refine_weighted(g, init, cfg),
                            Catch::Matchers::ContainsSubstring("timed out"));
    }
    SECTION("garbage output rejected") {
        cfg.external_cmd = "echo 'not a partition' > {out}";
        REQUIRE_THROWS_AS(refine_weighted(g, init, cfg), RefinerError);
    }
    SECTION("missing command template rejected") {
        cfg.external_cmd = "";
        REQUIRE_THROWS_AS(refine_weighted(g, init, cfg), RefinerError);
    }
}
