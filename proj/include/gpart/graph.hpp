#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gpart {

using NodeId = std::int32_t;

struct EdgeListStats {
    std::int64_t duplicates = 0;
    std::int64_t self_loops = 0;
};

struct Edge {
    NodeId u;
    NodeId v;
    double w;
};

// Undirected sparse graph in CSR form, neighbor lists sorted ascending.
// Unweighted graphs are simple (no self-loops, no parallel edges). Weighted
// graphs (super-graphs) may carry self-loops; a self-loop is stored once in
// its row and counts twice toward the weighted degree, so the degree sum
// always equals twice the total edge weight.
class Graph {
public:
    Graph() = default;

    static Graph from_edge_list(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                std::int64_t n_hint = -1, EdgeListStats* stats = nullptr) {
        if (pairs.empty() && n_hint < 0) {
            throw std::invalid_argument("from_edge_list: empty edge list and no node-count hint");
        }
        std::vector<std::uint64_t> keys;
        keys.reserve(pairs.size());
        std::int64_t max_id = -1;
        std::int64_t dropped_self = 0;
        for (const auto& [a, b] : pairs) {
            if (a < 0 || b < 0) {
                throw std::invalid_argument("from_edge_list: negative node id");
            }
            max_id = std::max<std::int64_t>(max_id, std::max(a, b));
            if (a == b) {
                ++dropped_self;
                continue;
            }
            const auto lo = static_cast<std::uint64_t>(std::min(a, b));
            const auto hi = static_cast<std::uint64_t>(std::max(a, b));
            keys.push_back((lo << 32) | hi);
        }
        const std::int64_t n = resolve_n(n_hint, max_id);
        std::sort(keys.begin(), keys.end());
        const auto last = std::unique(keys.begin(), keys.end());
        if (stats) {
            stats->self_loops = dropped_self;
            stats->duplicates = static_cast<std::int64_t>(keys.end() - last);
        }
        keys.erase(last, keys.end());

        Graph g;
        g.build_csr(n, keys, nullptr);
        return g;
    }

    // Weighted variant; self-loops permitted, parallel entries merged by
    // summing their weights.
    static Graph from_weighted_edge_list(const std::vector<Edge>& edges,
                                         std::int64_t n_hint = -1) {
        if (edges.empty() && n_hint < 0) {
            throw std::invalid_argument("from_weighted_edge_list: empty edge list and no node-count hint");
        }
        std::vector<std::pair<std::uint64_t, double>> items;
        items.reserve(edges.size());
        std::int64_t max_id = -1;
        for (const auto& e : edges) {
            if (e.u < 0 || e.v < 0) {
                throw std::invalid_argument("from_weighted_edge_list: negative node id");
            }
            if (e.w < 0.0) {
                throw std::invalid_argument("from_weighted_edge_list: negative edge weight");
            }
            max_id = std::max<std::int64_t>(max_id, std::max(e.u, e.v));
            const auto lo = static_cast<std::uint64_t>(std::min(e.u, e.v));
            const auto hi = static_cast<std::uint64_t>(std::max(e.u, e.v));
            items.emplace_back((lo << 32) | hi, e.w);
        }
        const std::int64_t n = resolve_n(n_hint, max_id);
        std::sort(items.begin(), items.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::uint64_t> keys;
        std::vector<double> weights;
        keys.reserve(items.size());
        weights.reserve(items.size());
        for (const auto& [key, w] : items) {
            if (!keys.empty() && keys.back() == key) {
                weights.back() += w;
            } else {
                keys.push_back(key);
                weights.push_back(w);
            }
        }
        Graph g;
        g.build_csr(n, keys, &weights);
        return g;
    }

    NodeId n() const { return n_; }
    std::int64_t num_edges() const { return m_; }
    bool weighted() const { return weighted_; }

    // Sum of per-edge weights; each undirected edge and each self-loop counted once.
    double total_weight() const { return total_weight_; }

    std::span<const NodeId> neighbors(NodeId i) const {
        return {nbrs_.data() + offsets_[i], nbrs_.data() + offsets_[i + 1]};
    }

    std::span<const double> edge_weights(NodeId i) const {
        if (!weighted_) return {};
        return {weights_.data() + offsets_[i], weights_.data() + offsets_[i + 1]};
    }

    double edge_weight_at(std::int64_t slot) const { return weighted_ ? weights_[slot] : 1.0; }

    std::int64_t row_begin(NodeId i) const { return offsets_[i]; }
    std::int64_t row_end(NodeId i) const { return offsets_[i + 1]; }
    NodeId nbr_at(std::int64_t slot) const { return nbrs_[slot]; }

    std::int64_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

    // Self-loops count twice.
    double weighted_degree(NodeId i) const { return wdeg_[i]; }
    const std::vector<double>& weighted_degrees() const { return wdeg_; }

    bool has_edge(NodeId i, NodeId j) const {
        if (degree(i) > degree(j)) std::swap(i, j);
        const auto row = neighbors(i);
        return std::binary_search(row.begin(), row.end(), j);
    }

    // Unique undirected edges with u <= v, ascending by (u, v).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(static_cast<std::size_t>(m_));
        for (NodeId u = 0; u < n_; ++u) {
            for (std::int64_t s = offsets_[u]; s < offsets_[u + 1]; ++s) {
                const NodeId v = nbrs_[s];
                if (v >= u) out.push_back({u, v, weighted_ ? weights_[s] : 1.0});
            }
        }
        return out;
    }

    bool operator==(const Graph& o) const {
        return n_ == o.n_ && offsets_ == o.offsets_ && nbrs_ == o.nbrs_ &&
               weighted_ == o.weighted_ && weights_ == o.weights_;
    }

private:
    static std::int64_t resolve_n(std::int64_t n_hint, std::int64_t max_id) {
        if (n_hint >= 0) {
            if (n_hint < max_id + 1) {
                throw std::invalid_argument("node-count hint smaller than max node id + 1");
            }
            return n_hint;
        }
        return max_id + 1;
    }

    // keys are unique packed (lo<<32)|hi pairs, sorted; weights parallel or null.
    void build_csr(std::int64_t n, const std::vector<std::uint64_t>& keys,
                   const std::vector<double>* weights) {
        if (n > INT32_MAX) throw std::invalid_argument("graph too large for 32-bit node ids");
        n_ = static_cast<NodeId>(n);
        weighted_ = weights != nullptr;
        m_ = static_cast<std::int64_t>(keys.size());

        std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
        for (const auto key : keys) {
            const auto u = static_cast<NodeId>(key >> 32);
            const auto v = static_cast<NodeId>(key & 0xffffffffu);
            ++counts[u + 1];
            if (u != v) ++counts[v + 1];
        }
        offsets_.assign(counts.begin(), counts.end());
        for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
        nbrs_.resize(static_cast<std::size_t>(offsets_.back()));
        if (weighted_) weights_.resize(nbrs_.size());

        std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t idx = 0; idx < keys.size(); ++idx) {
            const auto u = static_cast<NodeId>(keys[idx] >> 32);
            const auto v = static_cast<NodeId>(keys[idx] & 0xffffffffu);
            const double w = weighted_ ? (*weights)[idx] : 1.0;
            nbrs_[cursor[u]] = v;
            if (weighted_) weights_[cursor[u]] = w;
            ++cursor[u];
            if (u != v) {
                nbrs_[cursor[v]] = u;
                if (weighted_) weights_[cursor[v]] = w;
                ++cursor[v];
            }
        }
        // Mirrored entries interleave with forward entries, so sort each row once.
        for (NodeId i = 0; i < n_; ++i) {
            const auto b = offsets_[i], e = offsets_[i + 1];
            if (weighted_) {
                std::vector<std::pair<NodeId, double>> row(static_cast<std::size_t>(e - b));
                for (std::int64_t s = b; s < e; ++s) row[s - b] = {nbrs_[s], weights_[s]};
                std::sort(row.begin(), row.end());
                for (std::int64_t s = b; s < e; ++s) {
                    nbrs_[s] = row[s - b].first;
                    weights_[s] = row[s - b].second;
                }
            } else {
                std::sort(nbrs_.begin() + b, nbrs_.begin() + e);
            }
        }

        wdeg_.assign(static_cast<std::size_t>(n_), 0.0);
        total_weight_ = 0.0;
        for (NodeId i = 0; i < n_; ++i) {
            double d = 0.0;
            for (std::int64_t s = offsets_[i]; s < offsets_[i + 1]; ++s) {
                const double w = weighted_ ? weights_[s] : 1.0;
                d += (nbrs_[s] == i) ? 2.0 * w : w;
            }
            wdeg_[i] = d;
            total_weight_ += d;
        }
        total_weight_ /= 2.0;
    }

    NodeId n_ = 0;
    std::int64_t m_ = 0;
    bool weighted_ = false;
    double total_weight_ = 0.0;
    std::vector<std::int64_t> offsets_{0};
    std::vector<NodeId> nbrs_;
    std::vector<double> weights_;
    std::vector<double> wdeg_;
};

// Node -> block assignment with dense block ids in [0, K).
struct Partition {
    std::vector<NodeId> assign;
    NodeId k = 0;

    std::int64_t n() const { return static_cast<std::int64_t>(assign.size()); }

    static Partition singletons(std::int64_t n) {
        Partition p;
        p.assign.resize(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) p.assign[i] = static_cast<NodeId>(i);
        p.k = static_cast<NodeId>(n);
        return p;
    }

    static Partition single_block(std::int64_t n) {
        Partition p;
        p.assign.assign(static_cast<std::size_t>(n), 0);
        p.k = n > 0 ? 1 : 0;
        return p;
    }

    void validate(std::int64_t graph_n) const {
        if (n() != graph_n) {
            throw std::invalid_argument("partition size does not match graph node count");
        }
        if (k < 1) throw std::invalid_argument("partition must have K >= 1");
        std::vector<bool> seen(static_cast<std::size_t>(k), false);
        for (const NodeId b : assign) {
            if (b < 0 || b >= k) throw std::invalid_argument("partition block id out of range");
            seen[b] = true;
        }
        for (NodeId b = 0; b < k; ++b) {
            if (!seen[b]) {
                throw std::invalid_argument("partition block " + std::to_string(b) + " is empty");
            }
        }
    }

    bool operator==(const Partition& o) const = default;
};

// Relabels arbitrary block labels to dense ids in order of first appearance.
inline Partition compact_labels(const std::vector<NodeId>& raw) {
    Partition p;
    p.assign.resize(raw.size());
    std::vector<NodeId> remap;
    const NodeId max_label = raw.empty() ? -1 : *std::max_element(raw.begin(), raw.end());
    remap.assign(static_cast<std::size_t>(max_label) + 1, -1);
    NodeId next = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0) throw std::invalid_argument("negative block label");
        if (remap[raw[i]] < 0) remap[raw[i]] = next++;
        p.assign[i] = remap[raw[i]];
    }
    p.k = next;
    return p;
}

// Connected components by BFS; block ids follow first-visit order scanning
// from node 0 upward, so output labels are deterministic.
inline Partition connected_components(const Graph& g) {
    const NodeId n = g.n();
    Partition p;
    p.assign.assign(static_cast<std::size_t>(n), -1);
    NodeId next_block = 0;
    std::vector<NodeId> queue;
    queue.reserve(static_cast<std::size_t>(n));
    for (NodeId root = 0; root < n; ++root) {
        if (p.assign[root] >= 0) continue;
        const NodeId block = next_block++;
        p.assign[root] = block;
        queue.clear();
        queue.push_back(root);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const NodeId u = queue[head];
            for (const NodeId v : g.neighbors(u)) {
                if (p.assign[v] < 0) {
                    p.assign[v] = block;
                    queue.push_back(v);
                }
            }
        }
    }
    p.k = next_block;
    return p;
}

// Weighted coarse graph over the blocks of a partition. Between-block edge
// mass becomes super-edge weight; within-block mass is kept as a self-loop so
// modularity is preserved exactly under coarsening.
struct SuperGraph {
    Graph coarse;
    std::vector<NodeId> block_of;
    std::vector<double> self_loops;

    double self_loop(NodeId r) const { return self_loops[r]; }
};

inline SuperGraph coarsen(const Graph& g, const Partition& p) {
    p.validate(g.n());
    const NodeId k = p.k;

    std::vector<std::pair<std::uint64_t, double>> items;
    items.reserve(static_cast<std::size_t>(g.num_edges()));
    for (NodeId u = 0; u < g.n(); ++u) {
        for (std::int64_t s = g.row_begin(u); s < g.row_end(u); ++s) {
            const NodeId v = g.nbr_at(s);
            if (v < u) continue;
            NodeId r = p.assign[u], t = p.assign[v];
            if (r > t) std::swap(r, t);
            items.emplace_back((static_cast<std::uint64_t>(r) << 32) | static_cast<std::uint64_t>(t),
                               g.edge_weight_at(s));
        }
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SuperGraph sp;
    sp.block_of = p.assign;
    sp.self_loops.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<std::uint64_t> keys;
    std::vector<double> weights;
    for (const auto& [key, w] : items) {
        if (!keys.empty() && keys.back() == key) {
            weights.back() += w;
        } else {
            keys.push_back(key);
            weights.push_back(w);
        }
    }
    std::vector<Edge> coarse_edges;
    coarse_edges.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto r = static_cast<NodeId>(keys[i] >> 32);
        const auto t = static_cast<NodeId>(keys[i] & 0xffffffffu);
        if (r == t) sp.self_loops[r] = weights[i];
        coarse_edges.push_back({r, t, weights[i]});
    }
    sp.coarse = Graph::from_weighted_edge_list(coarse_edges, k);
    return sp;
}

inline Partition project_partition(const SuperGraph& sp, const Partition& coarse_p) {
    coarse_p.validate(sp.coarse.n());
    Partition fine;
    fine.assign.resize(sp.block_of.size());
    for (std::size_t v = 0; v < sp.block_of.size(); ++v) {
        fine.assign[v] = coarse_p.assign[sp.block_of[v]];
    }
    fine.k = coarse_p.k;
    return fine;
}

}  // namespace gpart
