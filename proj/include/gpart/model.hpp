#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpart/graph.hpp"
#include "gpart/linalg.hpp"
#include "gpart/mlp.hpp"
#include "gpart/rng.hpp"

namespace gpart {

struct ModelConfig {
    int k = 32;        // embedding dimensionality
    int l_feat = 2;    // feature MLP layers
    int l_gnn = 2;     // propagation depth
    int l_clf = 4;     // classifier MLP layers
    std::uint64_t projection_seed = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ModelCheckpoint {
    ModelConfig config;
    Mlp feature_mlp;
    Mlp g_sim;   // classifier MLP applied to the first node of a pair
    Mlp g_dis;   // classifier MLP applied to the second node of a pair
    std::uint32_t format_version = kCheckpointVersion;
};

inline ModelCheckpoint init_checkpoint(const ModelConfig& config, std::uint64_t weight_seed) {
    if (config.k < 1 || config.l_feat < 1 || config.l_gnn < 0 || config.l_clf < 1) {
        throw std::invalid_argument("invalid model configuration");
    }
    ModelCheckpoint ckpt;
    ckpt.config = config;
    Rng rng(weight_seed);
    ckpt.feature_mlp = make_mlp(config.l_feat, config.k, rng);
    ckpt.g_sim = make_mlp(config.l_clf, config.k, rng);
    ckpt.g_dis = make_mlp(config.l_clf, config.k, rng);
    return ckpt;
}

// Visits every parameter block in a stable order (serialization, Adam and
// the finite-difference checks all iterate the same way).
template <typename Ckpt, typename Fn>
void for_each_param(Ckpt& ckpt, Fn&& fn) {
    const auto visit = [&](auto& mlp, const std::string& prefix) {
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            fn(prefix + "." + std::to_string(l) + ".w", mlp.layers[l].w);
            fn(prefix + "." + std::to_string(l) + ".b", mlp.layers[l].b);
        }
    };
    visit(ckpt.feature_mlp, "feature_mlp");
    visit(ckpt.g_sim, "g_sim");
    visit(ckpt.g_dis, "g_dis");
}

inline Mat gaussian_projection_matrix(std::int64_t n, int k, std::uint64_t seed) {
    Rng rng(seed);
    Mat omega(n, k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (Eigen::Index i = 0; i < omega.rows(); ++i) {
        for (Eigen::Index j = 0; j < omega.cols(); ++j) {
            omega(i, j) = scale * rng.normal();
        }
    }
    return omega;
}

// X = Q Omega computed as A Omega - d (d^T Omega) / (2W) without ever
// materializing the dense modularity matrix Q; cost O(|E| k + N k).
inline Mat random_projection(const Graph& g, const Mat& omega) {
    if (g.total_weight() <= 0.0) {
        throw std::invalid_argument("random projection needs at least one edge");
    }
    if (omega.rows() != g.n()) {
        throw std::invalid_argument("projection matrix row count must equal node count");
    }
    const auto& deg = g.weighted_degrees();
    Mat x = Mat::Zero(omega.rows(), omega.cols());
    for (NodeId i = 0; i < g.n(); ++i) {
        for (std::int64_t s = g.row_begin(i); s < g.row_end(i); ++s) {
            const NodeId j = g.nbr_at(s);
            double w = g.edge_weight_at(s);
            if (j == i) w *= 2.0;
            x.row(i) += w * omega.row(j);
        }
    }
    Eigen::RowVectorXd dt_omega = Eigen::RowVectorXd::Zero(omega.cols());
    for (NodeId i = 0; i < g.n(); ++i) dt_omega += deg[i] * omega.row(i);
    const double inv_2w = 1.0 / (2.0 * g.total_weight());
    for (NodeId i = 0; i < g.n(); ++i) {
        x.row(i) -= (deg[i] * inv_2w) * dt_omega;
    }
    return x;
}

inline Mat random_projection(const Graph& g, int k, std::uint64_t seed) {
    return random_projection(g, gaussian_projection_matrix(g.n(), k, seed));
}

inline Mat extract_features(const Graph& g, const ModelCheckpoint& ckpt) {
    if (ckpt.feature_mlp.in_dim() != ckpt.config.k) {
        throw std::runtime_error("checkpoint feature MLP shape does not match config");
    }
    const Mat x = random_projection(g, ckpt.config.k, ckpt.config.projection_seed);
    return ckpt.feature_mlp.forward(x);
}

struct Embeddings {
    Mat z;                       // N x k, rows l2-normalized (zero rows stay zero)
    std::int64_t zero_rows = 0;  // diagnostic: rows that could not be normalized
};

inline Embeddings propagate(const Graph& g, const Mat& features, int l_gnn) {
    if (l_gnn < 0) throw std::invalid_argument("propagation depth must be >= 0");
    Embeddings emb;
    emb.z = NormAdjacency(g).apply_times(features, l_gnn);
    emb.zero_rows = l2_normalize_rows(emb.z);
    return emb;
}

namespace detail {

// Score for one pair given its embedding rows and the classifier outputs.
// tau = softplus(<g_sim(z_i), g_dis(z_j)>) keeps the score inside (0, 1].
inline double pair_score(const Mat& z, const Mat& s, const Mat& d, NodeId i, NodeId j) {
    const double u = s.row(i).dot(d.row(j));
    const double tau = softplus(u);
    const double cos_ij = z.row(i).dot(z.row(j));
    return std::exp(2.0 * tau * (cos_ij - 1.0));
}

}  // namespace detail

inline std::vector<double> classify_pairs(const Embeddings& emb,
                                          const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                          const ModelCheckpoint& ckpt) {
    const auto n = emb.z.rows();
    for (const auto& [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            throw std::invalid_argument("pair index out of range");
        }
    }
    const Mat s = ckpt.g_sim.forward(emb.z);
    const Mat d = ckpt.g_dis.forward(emb.z);
    std::vector<double> scores(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        scores[p] = detail::pair_score(emb.z, s, d, pairs[p].first, pairs[p].second);
    }
    return scores;
}

// Test hook: bypasses the classifier MLPs and uses a fixed tau.
inline std::vector<double> classify_pairs_fixed_tau(
    const Embeddings& emb, const std::vector<std::pair<NodeId, NodeId>>& pairs, double tau) {
    std::vector<double> scores(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        scores[p] = std::exp(2.0 * tau * (emb.z.row(i).dot(emb.z.row(j)) - 1.0));
    }
    return scores;
}

struct ForwardStats {
    double feat_s = 0.0;  // random projection + feature MLP
    double ffp_s = 0.0;   // propagation + pair classification
    std::int64_t zero_rows = 0;
};

// One feed-forward pass over exactly the edge set. Scores align with
// g.edges() order; the pair list is returned through edge_pairs when the
// caller needs it (thresholding, reporting).
inline std::vector<double> forward_edges(const Graph& g, const ModelCheckpoint& ckpt,
                                         std::vector<std::pair<NodeId, NodeId>>* edge_pairs = nullptr,
                                         ForwardStats* stats = nullptr) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    const Mat features = extract_features(g, ckpt);
    const auto t1 = Clock::now();
    const Embeddings emb = propagate(g, features, ckpt.config.l_gnn);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const auto& e : g.edges()) pairs.emplace_back(e.u, e.v);
    std::vector<double> scores = classify_pairs(emb, pairs, ckpt);
    const auto t2 = Clock::now();
    if (stats) {
        stats->feat_s = std::chrono::duration<double>(t1 - t0).count();
        stats->ffp_s = std::chrono::duration<double>(t2 - t1).count();
        stats->zero_rows = emb.zero_rows;
    }
    if (edge_pairs) *edge_pairs = std::move(pairs);
    return scores;
}

}  // namespace gpart
