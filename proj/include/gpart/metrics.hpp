#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gpart/graph.hpp"

namespace gpart {

// Exact modularity via per-block sums: sum_r [ in_r / W - (tot_r / 2W)^2 ]
// with in_r the within-block edge weight (self-loops once) and tot_r the
// weighted degree sum of block r. Works for weighted graphs and reduces to
// the textbook definition on simple graphs.
inline double modularity(const Graph& g, const Partition& p) {
    p.validate(g.n());
    const double w_total = g.total_weight();
    if (w_total <= 0.0) throw std::domain_error("modularity undefined on edgeless graph");

    std::vector<double> within(static_cast<std::size_t>(p.k), 0.0);
    std::vector<double> tot(static_cast<std::size_t>(p.k), 0.0);
    for (NodeId u = 0; u < g.n(); ++u) {
        tot[p.assign[u]] += g.weighted_degree(u);
        for (std::int64_t s = g.row_begin(u); s < g.row_end(u); ++s) {
            const NodeId v = g.nbr_at(s);
            if (v < u) continue;
            if (p.assign[u] == p.assign[v]) within[p.assign[u]] += g.edge_weight_at(s);
        }
    }
    double mod = 0.0;
    for (NodeId r = 0; r < p.k; ++r) {
        const double frac = tot[r] / (2.0 * w_total);
        mod += within[r] / w_total - frac * frac;
    }
    return mod;
}

namespace detail {

inline std::int64_t choose2(std::int64_t x) { return x * (x - 1) / 2; }

struct Contingency {
    std::vector<std::int64_t> pred_sizes;
    std::vector<std::int64_t> truth_sizes;
    // nonzero cells only: ((pred_block << 32) | truth_block, count)
    std::vector<std::pair<std::uint64_t, std::int64_t>> cells;
};

inline Contingency contingency_table(const Partition& pred, const Partition& truth) {
    if (pred.n() != truth.n()) {
        throw std::invalid_argument("partition size mismatch");
    }
    Contingency c;
    c.pred_sizes.assign(static_cast<std::size_t>(pred.k), 0);
    c.truth_sizes.assign(static_cast<std::size_t>(truth.k), 0);
    std::vector<std::uint64_t> keys(pred.assign.size());
    for (std::size_t i = 0; i < pred.assign.size(); ++i) {
        ++c.pred_sizes[pred.assign[i]];
        ++c.truth_sizes[truth.assign[i]];
        keys[i] = (static_cast<std::uint64_t>(pred.assign[i]) << 32) |
                  static_cast<std::uint64_t>(truth.assign[i]);
    }
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        c.cells.emplace_back(keys[i], static_cast<std::int64_t>(j - i));
        i = j;
    }
    return c;
}

// Min-cost assignment of every row (rows <= cols) with integer costs;
// standard O(rows^2 * cols) potentials algorithm. Returns the minimum total.
inline std::int64_t min_cost_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
    const int nr = static_cast<int>(cost.size());
    const int nc = nr == 0 ? 0 : static_cast<int>(cost[0].size());
    const std::int64_t kInf = INT64_MAX / 4;
    std::vector<std::int64_t> u(nr + 1, 0), v(nc + 1, 0);
    std::vector<int> match(nc + 1, 0), way(nc + 1, 0);
    for (int i = 1; i <= nr; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<std::int64_t> minv(nc + 1, kInf);
        std::vector<bool> used(nc + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            std::int64_t delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= nc; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= nc; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::int64_t total = 0;
    for (int j = 1; j <= nc; ++j) {
        if (match[j] != 0) total += cost[match[j] - 1][j - 1];
    }
    return total;
}

}  // namespace detail

struct PairwiseScores {
    double precision;
    double recall;
    double f1;
};

// Pairwise same-block precision/recall/F1 from block-intersection counts;
// no pair enumeration, exact 64-bit counts.
inline PairwiseScores pairwise_prf(const Partition& pred, const Partition& truth) {
    const auto c = detail::contingency_table(pred, truth);
    std::int64_t tp = 0, pred_pairs = 0, truth_pairs = 0;
    for (const auto& [key, cnt] : c.cells) tp += detail::choose2(cnt);
    for (const auto s : c.pred_sizes) pred_pairs += detail::choose2(s);
    for (const auto s : c.truth_sizes) truth_pairs += detail::choose2(s);
    if (truth_pairs == 0) {
        throw std::domain_error("pairwise recall undefined: ground truth has no same-block pair");
    }
    PairwiseScores s{};
    s.precision = pred_pairs == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_pairs);
    s.recall = static_cast<double>(tp) / static_cast<double>(truth_pairs);
    s.f1 = (s.precision + s.recall) == 0.0 ? 0.0
                                           : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

// Adjusted Rand index from the contingency table. Products of pair counts can
// reach ~2^78 at N = 10^6, so the cross terms use 128-bit integers.
inline double ari(const Partition& pred, const Partition& truth) {
    const auto c = detail::contingency_table(pred, truth);
    std::int64_t idx = 0, sa = 0, sb = 0;
    for (const auto& [key, cnt] : c.cells) idx += detail::choose2(cnt);
    for (const auto s : c.pred_sizes) sa += detail::choose2(s);
    for (const auto s : c.truth_sizes) sb += detail::choose2(s);
    const std::int64_t total = detail::choose2(pred.n());

    using Wide = __int128;
    const Wide num = Wide(2) * Wide(total) * Wide(idx) - Wide(2) * Wide(sa) * Wide(sb);
    const Wide den = Wide(total) * (Wide(sa) + Wide(sb)) - Wide(2) * Wide(sa) * Wide(sb);
    if (den == 0) return 1.0;  // both partitions trivial and identical
    return static_cast<double>(num) / static_cast<double>(den);
}

// Fraction of nodes whose predicted block maps onto their true block under an
// optimal one-to-one block matching (rectangular assignment; unmatched blocks
// contribute nothing). Only columns that can appear in an optimal matching are
// kept, so all-singleton predictions stay cheap.
inline double matched_accuracy(const Partition& pred, const Partition& truth) {
    auto c = detail::contingency_table(pred, truth);
    const std::int64_t n = pred.n();
    if (n == 0) return 1.0;

    // Orient so rows are the smaller side; cell key becomes (row << 32) | col.
    const bool rows_are_truth = truth.k <= pred.k;
    const int nr = rows_are_truth ? truth.k : pred.k;
    if (rows_are_truth) {
        for (auto& [key, cnt] : c.cells) key = (key << 32) | (key >> 32);
        std::sort(c.cells.begin(), c.cells.end());
    }

    // Per row, only the top-nr cells by count can be matched (exchange argument),
    // so restrict the column set to their union.
    std::vector<NodeId> cand_cols;
    for (std::size_t i = 0; i < c.cells.size();) {
        std::size_t j = i;
        while (j < c.cells.size() && (c.cells[j].first >> 32) == (c.cells[i].first >> 32)) ++j;
        std::vector<std::pair<std::int64_t, NodeId>> row;
        for (std::size_t t = i; t < j; ++t) {
            row.emplace_back(c.cells[t].second,
                             static_cast<NodeId>(c.cells[t].first & 0xffffffffu));
        }
        const std::size_t keep = std::min<std::size_t>(row.size(), static_cast<std::size_t>(nr));
        std::partial_sort(row.begin(), row.begin() + keep, row.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t t = 0; t < keep; ++t) cand_cols.push_back(row[t].second);
        i = j;
    }
    std::sort(cand_cols.begin(), cand_cols.end());
    cand_cols.erase(std::unique(cand_cols.begin(), cand_cols.end()), cand_cols.end());

    const int nc = std::max<int>(nr, static_cast<int>(cand_cols.size()));
    std::vector<std::vector<std::int64_t>> cost(
        static_cast<std::size_t>(nr), std::vector<std::int64_t>(static_cast<std::size_t>(nc), 0));
    for (const auto& [key, cnt] : c.cells) {
        const auto row = static_cast<NodeId>(key >> 32);
        const auto col = static_cast<NodeId>(key & 0xffffffffu);
        const auto it = std::lower_bound(cand_cols.begin(), cand_cols.end(), col);
        if (it != cand_cols.end() && *it == col) {
            cost[row][it - cand_cols.begin()] = -cnt;  // maximize counts
        }
    }
    const std::int64_t matched = -detail::min_cost_assignment(cost);
    return static_cast<double>(matched) / static_cast<double>(n);
}

}  // namespace gpart
