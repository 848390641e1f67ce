#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gpart/graph.hpp"
#include "gpart/rng.hpp"

namespace gpart {

// Degree-corrected stochastic block model with planted partition: block sizes
// from a truncated power law bounded by size_heterogeneity, per-node degree
// propensities from a truncated power law, edge mass split between
// within-block and between-block pair pools by within_between_ratio, then
// collapsed to a simple graph.
struct GeneratorParams {
    std::int64_t n = 1000;
    int k_target = 0;  // 0: choose from n (matches benchmark-style block counts)
    double within_between_ratio = 2.5;
    double size_heterogeneity = 3.0;
    double avg_degree = 20.0;
    double degree_exponent = 2.5;
    std::uint64_t seed = 0;
};

inline int auto_block_count(std::int64_t n) {
    return std::max(1, static_cast<int>(std::llround(std::pow(static_cast<double>(n), 0.35))));
}

struct GeneratedGraph {
    Graph graph;
    Partition truth;
    GeneratorParams params;  // with k_target resolved
};

namespace detail {

// Largest-remainder rounding of `total` into parts proportional to weights,
// each part at least min_part.
inline std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& weights,
                                           std::int64_t min_part) {
    const std::size_t k = weights.size();
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::int64_t> parts(k, min_part);
    std::int64_t remaining = total - min_part * static_cast<std::int64_t>(k);
    if (remaining < 0) throw std::invalid_argument("cannot apportion: total too small");
    std::vector<std::pair<double, std::size_t>> fractions(k);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double share = remaining * (wsum > 0.0 ? weights[i] / wsum : 1.0 / k);
        const auto base = static_cast<std::int64_t>(std::floor(share));
        parts[i] += base;
        assigned += base;
        fractions[i] = {share - static_cast<double>(base), i};
    }
    std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::int64_t r = 0; r < remaining - assigned; ++r) {
        parts[fractions[static_cast<std::size_t>(r) % k].second] += 1;
    }
    return parts;
}

// Weighted node sampler over a contiguous id range via cumulative sums.
class BlockSampler {
public:
    BlockSampler(NodeId first, const std::vector<double>& propensity, std::int64_t count)
        : first_(first) {
        cum_.resize(static_cast<std::size_t>(count));
        double acc = 0.0;
        for (std::int64_t i = 0; i < count; ++i) {
            acc += propensity[static_cast<std::size_t>(first + i)];
            cum_[static_cast<std::size_t>(i)] = acc;
        }
    }

    double total() const { return cum_.empty() ? 0.0 : cum_.back(); }

    NodeId draw(Rng& rng) const {
        const double x = rng.uniform() * total();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), x);
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()),
                                               cum_.size() - 1);
        return first_ + static_cast<NodeId>(idx);
    }

private:
    NodeId first_;
    std::vector<double> cum_;
};

}  // namespace detail

inline GeneratedGraph generate(const GeneratorParams& params) {
    GeneratorParams p = params;
    if (p.n < 1) throw std::invalid_argument("generator: n must be >= 1");
    if (p.k_target == 0) p.k_target = auto_block_count(p.n);
    if (p.k_target < 1 || p.k_target > p.n) {
        throw std::invalid_argument("generator: need n >= k_target >= 1");
    }
    if (p.within_between_ratio <= 0.0) {
        throw std::invalid_argument("generator: within/between ratio must be > 0");
    }
    if (p.size_heterogeneity < 1.0) {
        throw std::invalid_argument("generator: size heterogeneity must be >= 1");
    }
    const auto max_edges = static_cast<double>(p.n) * static_cast<double>(p.n - 1) / 2.0;
    const auto m_target = static_cast<std::int64_t>(std::llround(p.avg_degree * p.n / 2.0));
    if (p.avg_degree < 0.0 || static_cast<double>(m_target) > max_edges) {
        throw std::invalid_argument("generator: infeasible edge density");
    }

    Rng rng(p.seed);
    const int k = p.k_target;

    // Block sizes.
    std::vector<double> size_weight(static_cast<std::size_t>(k));
    for (auto& w : size_weight) {
        w = p.size_heterogeneity == 1.0 ? 1.0 : rng.power_law(1.0, p.size_heterogeneity, 1.75);
    }
    const std::vector<std::int64_t> sizes = detail::apportion(p.n, size_weight, 1);

    // Contiguous node ranges per block; the planted truth.
    Partition truth;
    truth.assign.resize(static_cast<std::size_t>(p.n));
    truth.k = k;
    std::vector<NodeId> block_first(static_cast<std::size_t>(k));
    {
        NodeId next = 0;
        for (int r = 0; r < k; ++r) {
            block_first[r] = next;
            for (std::int64_t i = 0; i < sizes[r]; ++i) truth.assign[next++] = r;
        }
    }

    // Degree propensities.
    std::vector<double> propensity(static_cast<std::size_t>(p.n));
    for (auto& phi : propensity) phi = rng.power_law(1.0, 8.0, p.degree_exponent);

    std::vector<detail::BlockSampler> samplers;
    samplers.reserve(static_cast<std::size_t>(k));
    std::vector<double> block_mass(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        samplers.emplace_back(block_first[r], propensity, sizes[r]);
        block_mass[r] = samplers.back().total();
    }

    // Edge budget split: within-block pools proportional to block mass,
    // between-block pools proportional to mass products.
    const double ratio = p.within_between_ratio;
    std::int64_t m_within = static_cast<std::int64_t>(
        std::llround(static_cast<double>(m_target) * ratio / (1.0 + ratio)));
    std::int64_t m_between = m_target - m_within;
    if (k == 1) {
        m_within = m_target;
        m_between = 0;
    }
    // A 1-node block cannot host within-block edges.
    std::vector<double> within_weight(block_mass);
    for (int r = 0; r < k; ++r) {
        if (sizes[r] < 2) within_weight[r] = 0.0;
    }
    const std::vector<std::int64_t> within_quota = detail::apportion(m_within, within_weight, 0);

    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(static_cast<std::size_t>(m_target));
    for (int r = 0; r < k; ++r) {
        if (sizes[r] < 2) continue;
        for (std::int64_t e = 0; e < within_quota[r]; ++e) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                const NodeId a = samplers[r].draw(rng);
                const NodeId b = samplers[r].draw(rng);
                if (a != b) {
                    pairs.emplace_back(a, b);
                    break;
                }
            }
        }
    }
    if (m_between > 0) {
        std::vector<double> pair_weight;
        std::vector<std::pair<int, int>> pair_blocks;
        for (int r = 0; r < k; ++r) {
            for (int s = r + 1; s < k; ++s) {
                pair_blocks.emplace_back(r, s);
                pair_weight.push_back(block_mass[r] * block_mass[s]);
            }
        }
        const std::vector<std::int64_t> quota = detail::apportion(m_between, pair_weight, 0);
        for (std::size_t q = 0; q < quota.size(); ++q) {
            const auto [r, s] = pair_blocks[q];
            for (std::int64_t e = 0; e < quota[q]; ++e) {
                pairs.emplace_back(samplers[r].draw(rng), samplers[s].draw(rng));
            }
        }
    }

    GeneratedGraph out;
    out.graph = Graph::from_edge_list(pairs, p.n);
    out.truth = std::move(truth);
    out.params = p;
    return out;
}

// Per-field sampling ranges for pre-training corpora. n and avg_degree are
// drawn log-uniform, the rest uniform.
struct ParamRanges {
    std::pair<std::int64_t, std::int64_t> n{200, 5000};
    std::pair<double, double> within_between_ratio{2.0, 4.0};
    std::pair<double, double> size_heterogeneity{1.5, 3.0};
    std::pair<double, double> avg_degree{20.0, 90.0};
    std::pair<double, double> degree_exponent{2.0, 3.0};
    // multiplies the n-derived block count, so corpora cover denser block
    // structure than the benchmark rule alone would give
    std::pair<double, double> block_count_scale{1.0, 2.0};
    int k_target = 0;  // > 0 fixes the block count and ignores the scale
};

inline GeneratorParams sample_params(const ParamRanges& ranges, std::uint64_t seed) {
    const auto check = [](auto lo, auto hi, const char* what) {
        if (lo > hi) throw std::invalid_argument(std::string("inverted interval for ") + what);
    };
    check(ranges.n.first, ranges.n.second, "n");
    check(ranges.within_between_ratio.first, ranges.within_between_ratio.second, "ratio");
    check(ranges.size_heterogeneity.first, ranges.size_heterogeneity.second, "heterogeneity");
    check(ranges.avg_degree.first, ranges.avg_degree.second, "avg_degree");
    check(ranges.degree_exponent.first, ranges.degree_exponent.second, "degree_exponent");
    check(ranges.block_count_scale.first, ranges.block_count_scale.second, "block_count_scale");
    if (ranges.n.first < 1) throw std::invalid_argument("n range must be positive");

    Rng rng(seed);
    GeneratorParams p;
    p.n = static_cast<std::int64_t>(std::llround(
        rng.log_uniform(static_cast<double>(ranges.n.first), static_cast<double>(ranges.n.second))));
    p.n = std::clamp(p.n, ranges.n.first, ranges.n.second);
    p.within_between_ratio =
        rng.uniform(ranges.within_between_ratio.first, ranges.within_between_ratio.second);
    p.size_heterogeneity =
        rng.uniform(ranges.size_heterogeneity.first, ranges.size_heterogeneity.second);
    p.avg_degree = rng.log_uniform(ranges.avg_degree.first, ranges.avg_degree.second);
    p.avg_degree = std::min(p.avg_degree, static_cast<double>(p.n - 1));
    p.degree_exponent = rng.uniform(ranges.degree_exponent.first, ranges.degree_exponent.second);
    if (ranges.k_target > 0) {
        p.k_target = ranges.k_target;
    } else {
        const double scale =
            rng.uniform(ranges.block_count_scale.first, ranges.block_count_scale.second);
        p.k_target = std::max(
            1, std::min<int>(static_cast<int>(p.n),
                             static_cast<int>(std::llround(scale * auto_block_count(p.n)))));
    }
    p.seed = rng.next_u64();
    return p;
}

// Snowball node-arrival schedule: BFS growth from seeded random roots,
// backfilling with a fresh random root whenever the frontier empties.
struct StreamSchedule {
    int t_steps = 0;
    std::vector<std::vector<NodeId>> node_batches;  // original ids, arrival order
};

struct SnowballStep {
    Graph graph;               // induced cumulative topology, local ids
    Partition truth;           // induced truth, labels compacted preserving order
    std::vector<NodeId> nodes; // local id -> original id (ascending)
};

struct SnowballSplit {
    StreamSchedule schedule;
    std::vector<SnowballStep> steps;
};

inline SnowballSplit snowball_split(const Graph& g, const Partition& truth, int t_steps,
                                    std::uint64_t seed) {
    truth.validate(g.n());
    const NodeId n = g.n();
    if (t_steps < 1 || t_steps > n) {
        throw std::invalid_argument("snowball: need 1 <= T <= N");
    }

    Rng rng(seed);
    std::vector<NodeId> arrival;
    arrival.reserve(static_cast<std::size_t>(n));
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::vector<NodeId> unvisited(static_cast<std::size_t>(n));
    std::vector<std::int64_t> pos(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) {
        unvisited[i] = i;
        pos[i] = i;
    }
    const auto remove_unvisited = [&](NodeId v) {
        const std::int64_t at = pos[v];
        const NodeId last = unvisited.back();
        unvisited[at] = last;
        pos[last] = at;
        unvisited.pop_back();
    };

    std::vector<NodeId> queue;
    std::size_t head = 0;
    while (arrival.size() < static_cast<std::size_t>(n)) {
        if (head >= queue.size()) {
            queue.clear();
            head = 0;
            const NodeId root =
                unvisited[rng.uniform_int(0, static_cast<std::int64_t>(unvisited.size()) - 1)];
            visited[root] = true;
            remove_unvisited(root);
            arrival.push_back(root);
            queue.push_back(root);
            continue;
        }
        const NodeId u = queue[head++];
        for (const NodeId v : g.neighbors(u)) {
            if (!visited[v]) {
                visited[v] = true;
                remove_unvisited(v);
                arrival.push_back(v);
                queue.push_back(v);
            }
        }
    }

    SnowballSplit out;
    out.schedule.t_steps = t_steps;
    out.schedule.node_batches.resize(static_cast<std::size_t>(t_steps));
    std::vector<std::int64_t> cuts(static_cast<std::size_t>(t_steps) + 1, 0);
    for (int t = 1; t <= t_steps; ++t) {
        cuts[t] = static_cast<std::int64_t>(n) * t / t_steps;
    }
    for (int t = 0; t < t_steps; ++t) {
        out.schedule.node_batches[t].assign(arrival.begin() + cuts[t], arrival.begin() + cuts[t + 1]);
    }

    std::vector<NodeId> rank(static_cast<std::size_t>(n), -1);
    for (int t = 1; t <= t_steps; ++t) {
        SnowballStep step;
        step.nodes.assign(arrival.begin(), arrival.begin() + cuts[t]);
        std::sort(step.nodes.begin(), step.nodes.end());
        std::fill(rank.begin(), rank.end(), -1);
        for (std::size_t local = 0; local < step.nodes.size(); ++local) {
            rank[step.nodes[local]] = static_cast<NodeId>(local);
        }

        std::vector<std::pair<NodeId, NodeId>> induced;
        std::vector<NodeId> labels;
        labels.reserve(step.nodes.size());
        for (const NodeId orig : step.nodes) {
            labels.push_back(truth.assign[orig]);
            for (const NodeId nbr : g.neighbors(orig)) {
                if (nbr > orig && rank[nbr] >= 0) {
                    induced.emplace_back(rank[orig], rank[nbr]);
                }
            }
        }
        step.graph = Graph::from_edge_list(induced, static_cast<std::int64_t>(step.nodes.size()));

        // Order-preserving label compaction: at the final step every block is
        // present and the truth comes back out unchanged.
        std::vector<NodeId> uniq = labels;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        step.truth.assign.resize(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            step.truth.assign[i] = static_cast<NodeId>(
                std::lower_bound(uniq.begin(), uniq.end(), labels[i]) - uniq.begin());
        }
        step.truth.k = static_cast<NodeId>(uniq.size());
        out.steps.push_back(std::move(step));
    }
    return out;
}

}  // namespace gpart
