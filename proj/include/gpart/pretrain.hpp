#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpart/graph.hpp"
#include "gpart/model.hpp"
#include "gpart/rng.hpp"

namespace gpart {

class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg, std::vector<double> trace = {})
        : std::runtime_error(msg), epoch_loss(std::move(trace)) {}
    std::vector<double> epoch_loss;
};

// Labeled pair batch for one graph. Contains every edge (labeled from the
// ground truth, so between-block edges land here as hard negatives), an equal
// number of sampled same-block non-edges, and enough sampled cross-block
// pairs to reach neg_ratio negatives per positive.
struct TrainBatch {
    const Graph* graph = nullptr;
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<std::uint8_t> labels;
    std::vector<double> q_vals;  // modularity-matrix entry per pair
    double two_w = 0.0;
};

inline constexpr double kScoreClamp = 1e-7;

inline TrainBatch sample_training_pairs(const Graph& g, const Partition& truth, double neg_ratio,
                                        std::uint64_t seed) {
    truth.validate(g.n());
    if (neg_ratio < 0.0) throw std::invalid_argument("neg_ratio must be >= 0");
    if (g.num_edges() < 1) throw std::invalid_argument("training batch needs at least one edge");
    if (truth.k < 2 && neg_ratio > 0.0) {
        throw TrainingError("cannot sample cross-block pairs: ground truth has a single block");
    }

    Rng rng(seed);
    TrainBatch batch;
    batch.graph = &g;
    batch.two_w = 2.0 * g.total_weight();
    const auto& deg = g.weighted_degrees();

    std::int64_t n_pos = 0, n_neg = 0;
    const auto push = [&](NodeId i, NodeId j, bool same, double a_ij) {
        batch.pairs.emplace_back(i, j);
        batch.labels.push_back(same ? 1 : 0);
        batch.q_vals.push_back(a_ij - deg[i] * deg[j] / batch.two_w);
        (same ? n_pos : n_neg) += 1;
    };

    for (const auto& e : g.edges()) {
        push(e.u, e.v, truth.assign[e.u] == truth.assign[e.v], e.w);
    }

    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(truth.k));
    for (NodeId i = 0; i < g.n(); ++i) members[truth.assign[i]].push_back(i);

    const std::int64_t m = g.num_edges();
    std::int64_t want_same = m;
    for (std::int64_t budget = 40 * m + 1000; want_same > 0 && budget > 0; --budget) {
        const auto u = static_cast<NodeId>(rng.uniform_int(0, g.n() - 1));
        const auto& blk = members[truth.assign[u]];
        if (blk.size() < 2) continue;
        const NodeId v = blk[rng.uniform_int(0, static_cast<std::int64_t>(blk.size()) - 1)];
        if (v == u || g.has_edge(u, v)) continue;
        push(std::min(u, v), std::max(u, v), true, 0.0);
        --want_same;
    }

    const std::int64_t target_neg = std::llround(neg_ratio * static_cast<double>(n_pos));
    std::int64_t want_cross = target_neg - n_neg;
    for (std::int64_t budget = 40 * (want_cross > 0 ? want_cross : 0) + 1000;
         want_cross > 0 && budget > 0; --budget) {
        const auto u = static_cast<NodeId>(rng.uniform_int(0, g.n() - 1));
        const auto v = static_cast<NodeId>(rng.uniform_int(0, g.n() - 1));
        if (truth.assign[u] == truth.assign[v]) continue;
        const double a_ij = g.has_edge(u, v) ? 1.0 : 0.0;
        push(std::min(u, v), std::max(u, v), false, a_ij);
        --want_cross;
    }
    return batch;
}

// Combined objective: mean binary cross-entropy against the pair labels minus
// lambda_mod / (2W) * sum_s Q_s * score_s (a pairwise relaxation of the
// modularity trace objective). Scores are clamped away from {0, 1} inside the
// logs.
inline double batch_loss(const std::vector<double>& scores, const TrainBatch& batch,
                         double lambda_mod) {
    if (scores.size() != batch.pairs.size()) {
        throw std::invalid_argument("score vector does not match batch size");
    }
    if (scores.empty()) throw std::invalid_argument("empty batch");
    double bce = 0.0, mod = 0.0;
    for (std::size_t s = 0; s < scores.size(); ++s) {
        const double p = std::min(std::max(scores[s], kScoreClamp), 1.0 - kScoreClamp);
        bce += batch.labels[s] ? -std::log(p) : -std::log1p(-p);
        mod += batch.q_vals[s] * scores[s];
    }
    return bce / static_cast<double>(scores.size()) - lambda_mod * mod / batch.two_w;
}

struct ModelGrads {
    MlpGrads feature_mlp;
    MlpGrads g_sim;
    MlpGrads g_dis;
    double loss = 0.0;
};

// Gradient blocks in the same order for_each_param visits the checkpoint.
inline std::vector<const Mat*> grad_blocks(const ModelGrads& grads) {
    std::vector<const Mat*> out;
    const auto add = [&](const MlpGrads& g) {
        for (std::size_t l = 0; l < g.dw.size(); ++l) {
            out.push_back(&g.dw[l]);
            out.push_back(&g.db[l]);
        }
    };
    add(grads.feature_mlp);
    add(grads.g_sim);
    add(grads.g_dis);
    return out;
}

// Exact analytic gradients of batch_loss w.r.t. every model parameter.
// Propagation is a fixed symmetric linear map, so its backward pass is the
// same operator; the row normalization contributes (I - zz^T)/|z| per row.
inline ModelGrads gradients_with_projection(const Mat& x, const ModelCheckpoint& ckpt,
                                            const TrainBatch& batch, double lambda_mod) {
    const Graph& g = *batch.graph;
    const auto n = g.n();

    MlpCache cache_f;
    const Mat features = ckpt.feature_mlp.forward(x, &cache_f);
    NormAdjacency adj(g);
    Mat z = adj.apply_times(features, ckpt.config.l_gnn);
    Vec norms(n);
    for (NodeId i = 0; i < n; ++i) {
        norms[i] = z.row(i).norm();
        if (norms[i] > 0.0) z.row(i) /= norms[i];
    }
    MlpCache cache_s, cache_d;
    const Mat s = ckpt.g_sim.forward(z, &cache_s);
    const Mat d = ckpt.g_dis.forward(z, &cache_d);

    const double inv_p = 1.0 / static_cast<double>(batch.pairs.size());
    double loss_bce = 0.0, loss_mod = 0.0;
    Mat g_s = Mat::Zero(s.rows(), s.cols());
    Mat g_d = Mat::Zero(d.rows(), d.cols());
    Mat g_z = Mat::Zero(z.rows(), z.cols());
    for (std::size_t idx = 0; idx < batch.pairs.size(); ++idx) {
        const auto [i, j] = batch.pairs[idx];
        const double u = s.row(i).dot(d.row(j));
        const double tau = softplus(u);
        const double cos_ij = z.row(i).dot(z.row(j));
        const double yhat = std::exp(2.0 * tau * (cos_ij - 1.0));
        const double y = batch.labels[idx];
        const double q = batch.q_vals[idx];

        const double p = std::min(std::max(yhat, kScoreClamp), 1.0 - kScoreClamp);
        loss_bce += batch.labels[idx] ? -std::log(p) : -std::log1p(-p);
        loss_mod += q * yhat;

        double dl_dy = -lambda_mod * q / batch.two_w;
        if (yhat > kScoreClamp && yhat < 1.0 - kScoreClamp) {
            dl_dy += inv_p * (p - y) / (p * (1.0 - p));
        }
        const double dl_dtau = dl_dy * yhat * 2.0 * (cos_ij - 1.0);
        const double dl_dcos = dl_dy * yhat * 2.0 * tau;
        const double dl_du = dl_dtau * sigmoid(u);
        g_s.row(i) += dl_du * d.row(j);
        g_d.row(j) += dl_du * s.row(i);
        g_z.row(i) += dl_dcos * z.row(j);
        g_z.row(j) += dl_dcos * z.row(i);
    }

    ModelGrads out;
    out.loss = loss_bce * inv_p - lambda_mod * loss_mod / batch.two_w;
    g_z += ckpt.g_sim.backward(cache_s, g_s, out.g_sim);
    g_z += ckpt.g_dis.backward(cache_d, g_d, out.g_dis);

    Mat g_z_raw = Mat::Zero(z.rows(), z.cols());
    for (NodeId i = 0; i < n; ++i) {
        if (norms[i] == 0.0) continue;  // zero rows stay zero, no gradient flows
        const double dot = g_z.row(i).dot(z.row(i));
        g_z_raw.row(i) = (g_z.row(i) - dot * z.row(i)) / norms[i];
    }
    const Mat g_features = adj.apply_times(g_z_raw, ckpt.config.l_gnn);
    ckpt.feature_mlp.backward(cache_f, g_features, out.feature_mlp);

    const auto check_finite = [](const MlpGrads& mg, const std::string& prefix) {
        for (std::size_t l = 0; l < mg.dw.size(); ++l) {
            if (!mg.dw[l].allFinite() || !mg.db[l].allFinite()) {
                throw TrainingError("non-finite gradient in " + prefix + " layer " +
                                    std::to_string(l));
            }
        }
    };
    check_finite(out.feature_mlp, "feature_mlp");
    check_finite(out.g_sim, "g_sim");
    check_finite(out.g_dis, "g_dis");
    return out;
}

inline ModelGrads gradients(const ModelCheckpoint& ckpt, const TrainBatch& batch,
                            double lambda_mod) {
    if (batch.graph == nullptr) throw std::invalid_argument("batch has no graph");
    const Mat x = random_projection(*batch.graph, ckpt.config.k, ckpt.config.projection_seed);
    return gradients_with_projection(x, ckpt, batch, lambda_mod);
}

struct TrainHyper {
    int epochs = 50;
    double learning_rate = 1e-3;
    double neg_ratio = 1.0;
    double lambda_mod = 1.0;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainResult {
    ModelCheckpoint checkpoint;
    std::vector<double> epoch_loss;
};

// Full-batch-per-graph training with Adam steps, fixed corpus order, one
// fixed batch and cached projection per graph. Deterministic given seeds.
inline TrainResult pretrain(const std::vector<std::pair<Graph, Partition>>& corpus,
                            const ModelConfig& config, const TrainHyper& hyper) {
    if (corpus.empty()) throw std::invalid_argument("pretraining corpus is empty");
    if (hyper.epochs < 1) throw std::invalid_argument("epochs must be >= 1");

    ModelCheckpoint ckpt = init_checkpoint(config, derive_seed(hyper.seed, 0));

    std::vector<TrainBatch> batches;
    std::vector<Mat> projections;
    batches.reserve(corpus.size());
    projections.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& [g, truth] = corpus[i];
        batches.push_back(sample_training_pairs(g, truth, hyper.neg_ratio,
                                                derive_seed(hyper.seed, 100 + i)));
        // fresh projection draw per graph: sharing one seed across the corpus
        // lets the model co-adapt to the specific projection rows, which then
        // breaks on graphs larger than anything in the corpus
        projections.push_back(
            random_projection(g, config.k, derive_seed(config.projection_seed, 9000 + i)));
    }

    std::vector<Mat> m_state, v_state;
    for_each_param(ckpt, [&](const std::string&, Mat& p) {
        m_state.push_back(Mat::Zero(p.rows(), p.cols()));
        v_state.push_back(Mat::Zero(p.rows(), p.cols()));
    });

    TrainResult result;
    std::int64_t step = 0;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
            ModelGrads grads;
            try {
                grads = gradients_with_projection(projections[gi], ckpt, batches[gi],
                                                  hyper.lambda_mod);
            } catch (TrainingError& e) {
                e.epoch_loss = result.epoch_loss;
                throw;
            }
            if (!std::isfinite(grads.loss)) {
                throw TrainingError("training diverged: non-finite loss", result.epoch_loss);
            }
            loss_sum += grads.loss;

            ++step;
            const double bc1 = 1.0 - std::pow(hyper.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(hyper.adam_beta2, static_cast<double>(step));
            const auto blocks = grad_blocks(grads);
            std::size_t b = 0;
            for_each_param(ckpt, [&](const std::string&, Mat& p) {
                const Mat& gmat = *blocks[b];
                m_state[b] = hyper.adam_beta1 * m_state[b] + (1.0 - hyper.adam_beta1) * gmat;
                v_state[b] = hyper.adam_beta2 * v_state[b] +
                             (1.0 - hyper.adam_beta2) * gmat.cwiseProduct(gmat);
                p.array() -= hyper.learning_rate * (m_state[b].array() / bc1) /
                             ((v_state[b].array() / bc2).sqrt() + hyper.adam_eps);
                ++b;
            });
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(corpus.size()));
    }
    result.checkpoint = std::move(ckpt);
    return result;
}

}  // namespace gpart
