#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "gpart/metrics.hpp"
#include "gpart/sbm.hpp"

using namespace gpart;

namespace {

// within/between edge counts of a graph against its planted truth
std::pair<std::int64_t, std::int64_t> edge_split(const Graph& g, const Partition& truth) {
    std::int64_t within = 0, between = 0;
    for (const auto& e : g.edges()) {
        (truth.assign[e.u] == truth.assign[e.v] ? within : between) += 1;
    }
    return {within, between};
}

}  // namespace

TEST_CASE("generator determinism") {
    GeneratorParams p;
    p.n = 2000;
    p.within_between_ratio = 2.5;
    p.seed = 1234;
    const GeneratedGraph a = generate(p);
    const GeneratedGraph b = generate(p);
    REQUIRE(a.graph == b.graph);
    REQUIRE(a.truth == b.truth);

    p.seed = 1235;
    const GeneratedGraph c = generate(p);
    REQUIRE_FALSE(a.graph == c.graph);
}

TEST_CASE("single-block generation keeps every edge within the block") {
    GeneratorParams p;
    p.n = 12;
    p.k_target = 1;
    p.avg_degree = 4.0;
    p.seed = 9;
    const GeneratedGraph gen = generate(p);
    REQUIRE(gen.truth.k == 1);
    const auto [within, between] = edge_split(gen.graph, gen.truth);
    REQUIRE(between == 0);
    REQUIRE(within == gen.graph.num_edges());
}

TEST_CASE("benchmark-scale statistics at n=10000") {
    GeneratorParams p;
    p.n = 10000;
    p.within_between_ratio = 2.5;
    p.size_heterogeneity = 3.0;
    p.avg_degree = 85.0;
    p.seed = 42;
    const GeneratedGraph gen = generate(p);
    REQUIRE(gen.params.k_target == 25);  // block count rule at this scale
    REQUIRE(gen.truth.k == 25);
    REQUIRE(gen.graph.num_edges() > 300000);
    REQUIRE(gen.graph.num_edges() < 500000);
    gen.truth.validate(gen.graph.n());

    // realized block-size spread stays within twice the configured ratio
    std::vector<std::int64_t> sizes(25, 0);
    for (const auto b : gen.truth.assign) ++sizes[b];
    const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
    REQUIRE(*mn >= 1);
    REQUIRE(static_cast<double>(*mx) / static_cast<double>(*mn) <= 2.0 * 3.0);
}

TEST_CASE("realized within/between ratio tracks the target") {
    for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
        GeneratorParams p;
        p.n = 1500;
        p.within_between_ratio = 2.5;
        p.avg_degree = 30.0;
        p.seed = seed;
        const GeneratedGraph gen = generate(p);
        const auto [within, between] = edge_split(gen.graph, gen.truth);
        REQUIRE(between > 0);
        const double realized = static_cast<double>(within) / static_cast<double>(between);
        REQUIRE(realized >= 0.75 * 2.5);
        REQUIRE(realized <= 1.25 * 2.5);
    }
}

TEST_CASE("infeasible density rejected") {
    GeneratorParams p;
    p.n = 10;
    p.avg_degree = 50.0;  // more than n-1
    REQUIRE_THROWS_AS(generate(p), std::invalid_argument);
}

TEST_CASE("sample_params") {
    SECTION("point intervals come back exactly") {
        ParamRanges r;
        r.n = {300, 300};
        r.within_between_ratio = {2.5, 2.5};
        r.size_heterogeneity = {3.0, 3.0};
        r.avg_degree = {20.0, 20.0};
        r.degree_exponent = {2.5, 2.5};
        const GeneratorParams p = sample_params(r, 7);
        REQUIRE(p.n == 300);
        REQUIRE(p.within_between_ratio == 2.5);
        REQUIRE(p.size_heterogeneity == 3.0);
        REQUIRE(p.avg_degree == Catch::Approx(20.0));
        REQUIRE(p.degree_exponent == 2.5);
    }
    SECTION("draws stay inside the default ranges") {
        const ParamRanges r;
        for (int i = 0; i < 100; ++i) {
            const GeneratorParams p = sample_params(r, 1000 + i);
            REQUIRE(p.n >= 200);
            REQUIRE(p.n <= 5000);
            REQUIRE(p.within_between_ratio >= r.within_between_ratio.first);
            REQUIRE(p.within_between_ratio <= r.within_between_ratio.second);
            REQUIRE(p.avg_degree >= r.avg_degree.first);
            REQUIRE(p.avg_degree <= r.avg_degree.second);
        }
    }
    SECTION("different seeds give different tuples") {
        const ParamRanges r;
        const GeneratorParams a = sample_params(r, 1);
        const GeneratorParams b = sample_params(r, 2);
        REQUIRE((a.n != b.n || a.avg_degree != b.avg_degree ||
                 a.within_between_ratio != b.within_between_ratio));
    }
    SECTION("inverted interval rejected") {
        ParamRanges r;
        r.avg_degree = {50.0, 10.0};
        REQUIRE_THROWS_AS(sample_params(r, 0), std::invalid_argument);
    }
}

TEST_CASE("snowball split") {
    GeneratorParams p;
    p.n = 1000;
    p.avg_degree = 12.0;
    p.seed = 77;
    const GeneratedGraph gen = generate(p);

    SECTION("T=1 is the full graph") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 1, 5);
        REQUIRE(split.steps.size() == 1);
        REQUIRE(split.steps[0].graph == gen.graph);
        REQUIRE(split.steps[0].truth == gen.truth);
    }
    SECTION("cumulative node counts are exact and the final step closes") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 10, 5);
        REQUIRE(split.steps.size() == 10);
        for (int t = 0; t < 10; ++t) {
            REQUIRE(split.steps[t].graph.n() == 100 * (t + 1));
        }
        REQUIRE(split.steps[9].graph == gen.graph);
        REQUIRE(split.steps[9].truth == gen.truth);
    }
    SECTION("batches are disjoint, cover V, and cumulative edges are monotone") {
        const SnowballSplit split = snowball_split(gen.graph, gen.truth, 7, 11);
        std::set<NodeId> seen;
        for (const auto& batch : split.schedule.node_batches) {
            REQUIRE_FALSE(batch.empty());
            for (const NodeId v : batch) REQUIRE(seen.insert(v).second);
        }
        REQUIRE(seen.size() == static_cast<std::size_t>(gen.graph.n()));

        // edge sets, mapped back to original ids, must be nested
        std::set<std::pair<NodeId, NodeId>> prev;
        for (const auto& step : split.steps) {
            std::set<std::pair<NodeId, NodeId>> cur;
            for (const auto& e : step.graph.edges()) {
                cur.emplace(step.nodes[e.u], step.nodes[e.v]);
            }
            for (const auto& e : prev) REQUIRE(cur.count(e) == 1);
            REQUIRE(cur.size() >= prev.size());
            prev = std::move(cur);
        }
        REQUIRE(prev.size() == static_cast<std::size_t>(gen.graph.num_edges()));
    }
    SECTION("T out of range rejected") {
        REQUIRE_THROWS_AS(snowball_split(gen.graph, gen.truth, 0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(snowball_split(gen.graph, gen.truth, 1001, 1), std::invalid_argument);
    }
}
