#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpart/graph.hpp"
#include "gpart/io.hpp"
#include "gpart/metrics.hpp"
#include "gpart/rng.hpp"
#include "gpart/subprocess.hpp"

namespace gpart {

class RefinerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RefinerConfig {
    enum class Kind { builtin_local_moving, external };
    Kind kind = Kind::builtin_local_moving;
    int max_sweeps = 100;
    double min_gain = 1e-7;
    int restarts = 8;  // independent seeded runs, best modularity wins
    std::uint64_t seed = 1;
    // external adapter: command with {graph}, {init}, {out} placeholders
    std::string external_cmd;
    double timeout_s = 10000.0;
    std::string work_dir;  // empty: a fresh temp dir per call
};

namespace detail {

// One level of modularity local moving. Scan order is a seeded shuffle per
// sweep; ties in the best target block break toward the lowest block id.
// Labels are only compacted when a move emptied some block, so a no-move run
// returns the initialization bit-for-bit.
inline std::pair<Partition, bool> local_moving(const Graph& g, const Partition& init,
                                               const RefinerConfig& cfg, Rng& rng,
                                               bool randomized) {
    const NodeId n = g.n();
    const double w_total = g.total_weight();
    const auto& wdeg = g.weighted_degrees();

    Partition part = init;
    std::vector<double> block_tot(static_cast<std::size_t>(part.k), 0.0);
    std::vector<std::int64_t> block_size(static_cast<std::size_t>(part.k), 0);
    for (NodeId i = 0; i < n; ++i) {
        block_tot[part.assign[i]] += wdeg[i];
        block_size[part.assign[i]] += 1;
    }
    NodeId spare_block = -1;  // reusable empty block for detach moves

    std::vector<NodeId> order(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) order[i] = i;

    std::vector<double> weight_to(static_cast<std::size_t>(part.k) + 1, 0.0);
    std::vector<NodeId> touched;
    std::vector<std::pair<double, NodeId>> candidates;

    bool any_move = false;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        rng.shuffle(order);
        std::int64_t moves = 0;
        for (const NodeId i : order) {
            const NodeId from = part.assign[i];
            touched.clear();
            for (std::int64_t s = g.row_begin(i); s < g.row_end(i); ++s) {
                const NodeId j = g.nbr_at(s);
                if (j == i) continue;  // self-loops move with the node and cancel in gains
                const NodeId b = part.assign[j];
                if (weight_to[b] == 0.0) touched.push_back(b);
                weight_to[b] += g.edge_weight_at(s);
            }
            const double tot_from_rest = block_tot[from] - wdeg[i];
            const double base = weight_to[from] / w_total -
                                wdeg[i] * tot_from_rest / (2.0 * w_total * w_total);
            NodeId best = from;
            double best_gain = 0.0;
            candidates.clear();
            for (const NodeId b : touched) {
                if (b == from) continue;
                const double gain = weight_to[b] / w_total -
                                    wdeg[i] * block_tot[b] / (2.0 * w_total * w_total) - base;
                if (gain > cfg.min_gain) candidates.emplace_back(gain, b);
                if (gain > best_gain || (gain == best_gain && best != from && b < best)) {
                    best = b;
                    best_gain = gain;
                }
            }
            // detaching into a fresh singleton block can also pay off
            const double detach_gain = -base;
            if (block_size[from] > 1 && detach_gain > cfg.min_gain) {
                if (spare_block < 0) {
                    spare_block = static_cast<NodeId>(block_tot.size());
                    block_tot.push_back(0.0);
                    block_size.push_back(0);
                    weight_to.push_back(0.0);
                }
                candidates.emplace_back(detach_gain, spare_block);
                if (detach_gain > best_gain) {
                    best = spare_block;
                    best_gain = detach_gain;
                }
            }
            // exploratory runs take a random positive-gain move instead of
            // the steepest one
            if (randomized && !candidates.empty()) {
                const auto pick = candidates[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
                best = pick.second;
                best_gain = pick.first;
            }
            for (const NodeId b : touched) weight_to[b] = 0.0;
            if (best != from && best_gain > cfg.min_gain) {
                block_tot[from] -= wdeg[i];
                block_tot[best] += wdeg[i];
                block_size[from] -= 1;
                block_size[best] += 1;
                part.assign[i] = best;
                if (best == spare_block) spare_block = -1;
                if (block_size[from] == 0 && spare_block < 0) spare_block = from;
                ++moves;
            }
        }
        if (moves == 0) break;
        any_move = true;
    }

    if (any_move) {
        part.k = static_cast<NodeId>(block_tot.size());
        part = compact_labels(part.assign);
    }
    return {std::move(part), any_move};
}

// One multi-level pass: local moving, aggregate, recurse on the super-graph,
// compose back down. Sets moved_any if any node moved at any level.
inline Partition multilevel_pass(const Graph& wg, const Partition& init, const RefinerConfig& cfg,
                                 Rng& rng, bool randomized, bool& moved_any) {
    std::vector<Partition> levels;
    const Graph* cur = &wg;
    std::optional<Graph> owned;
    Partition cur_init = init;
    moved_any = false;
    while (true) {
        auto [part, moved] = local_moving(*cur, cur_init, cfg, rng, randomized);
        moved_any = moved_any || moved;
        levels.push_back(std::move(part));
        const Partition& top = levels.back();
        if (top.k >= cur->n()) break;  // nothing merged: aggregation cannot help
        SuperGraph sp = coarsen(*cur, top);
        owned = std::move(sp.coarse);
        cur = &*owned;
        cur_init = Partition::singletons(top.k);
    }
    Partition out = levels.front();
    for (std::size_t l = 1; l < levels.size(); ++l) {
        for (auto& b : out.assign) b = levels[l].assign[b];
        out.k = levels[l].k;
    }
    return out;
}

// The multi-level cycle is repeated from its own output until a full pass
// makes no move; single-node moves on the fine graph can re-open after an
// aggregation round, so one pass alone leaves easy gains behind.
inline Partition refine_cycle(const Graph& wg, const Partition& init, const RefinerConfig& cfg,
                              Rng& rng, bool randomized, bool& moved_any_overall) {
    Partition current = init;
    moved_any_overall = false;
    while (true) {
        bool moved_any = false;
        Partition next = multilevel_pass(wg, current, cfg, rng, randomized, moved_any);
        if (!moved_any) return current;
        moved_any_overall = true;
        current = std::move(next);
    }
}

// Local moving is order-sensitive on graphs with weak structure, so a few
// independently seeded runs are kept and the best modularity wins. Ties keep
// the earliest run; a run that never moves returns the initialization.
inline Partition refine_builtin(const Graph& wg, const Partition& init, const RefinerConfig& cfg) {
    Partition best;
    double best_mod = 0.0;
    bool have_best = false;
    bool any_moved = false;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        bool moved = false;
        // run 0 is steepest-gain; later runs explore with random positive moves
        Partition cand = refine_cycle(wg, init, cfg, rng, r > 0, moved);
        any_moved = any_moved || moved;
        const double cand_mod = modularity(wg, cand);
        if (!have_best || cand_mod > best_mod) {
            best = std::move(cand);
            best_mod = cand_mod;
            have_best = true;
        }
    }
    if (!any_moved) return init;
    return best;
}


inline Partition refine_external(const Graph& wg, const Partition& init, const RefinerConfig& cfg) {
    if (cfg.external_cmd.empty()) {
        throw RefinerError("external refiner requested but no command template configured");
    }
    TempDir dir(cfg.work_dir, "gpart-refine");
    const std::string graph_path = dir.path() + "/graph.tsv";
    const std::string init_path = dir.path() + "/init.tsv";
    const std::string out_path = dir.path() + "/out.tsv";
    write_edge_tsv(graph_path, wg, /*one_based=*/true);
    write_partition_tsv(init_path, init, /*one_based=*/true);

    std::string cmd = cfg.external_cmd;
    replace_all(cmd, "{graph}", graph_path);
    replace_all(cmd, "{init}", init_path);
    replace_all(cmd, "{out}", out_path);

    const CommandResult res = run_command(cmd, cfg.timeout_s, dir.path() + "/stderr.log");
    if (res.timed_out) {
        throw RefinerError("external refiner timed out after " + std::to_string(cfg.timeout_s) +
                           " s: " + cmd);
    }
    if (res.exit_code != 0) {
        throw RefinerError("external refiner exited with code " + std::to_string(res.exit_code) +
                           (res.stderr_tail.empty() ? "" : ("; stderr: " + res.stderr_tail)));
    }
    Partition out;
    try {
        out = read_partition_tsv(out_path, /*one_based=*/true, wg.n());
    } catch (const std::exception& e) {
        throw RefinerError(std::string("cannot read external refiner output: ") + e.what());
    }
    return out;
}

}  // namespace detail

// K-agnostic refinement of a (possibly weighted) graph starting from an
// initial partition. The builtin refiner never decreases weighted modularity
// relative to the initialization.
inline Partition refine_weighted(const Graph& wg, const Partition& init, const RefinerConfig& cfg) {
    init.validate(wg.n());
    if (cfg.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
    if (cfg.min_gain < 0.0) throw std::invalid_argument("min_gain must be >= 0");
    if (wg.total_weight() <= 0.0) {
        throw std::domain_error("refinement undefined on edgeless graph (modularity needs 2|E| > 0)");
    }
    if (cfg.kind == RefinerConfig::Kind::external) {
        return detail::refine_external(wg, init, cfg);
    }
    return detail::refine_builtin(wg, init, cfg);
}

// Coarsen by the initial partition, refine the weighted super-graph from
// super-node singletons, and project the result back.
inline Partition refine_from_coarse(const Graph& g, const Partition& init,
                                    const RefinerConfig& cfg) {
    init.validate(g.n());
    const SuperGraph sp = coarsen(g, init);
    const Partition coarse = refine_weighted(sp.coarse, Partition::singletons(sp.coarse.n()), cfg);
    return project_partition(sp, coarse);
}

inline Partition refine_from_scratch(const Graph& g, const RefinerConfig& cfg) {
    return refine_weighted(g, Partition::singletons(g.n()), cfg);
}

}  // namespace gpart
