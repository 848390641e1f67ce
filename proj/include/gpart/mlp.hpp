#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpart/linalg.hpp"
#include "gpart/rng.hpp"

namespace gpart {

struct DenseLayer {
    Mat w;  // in x out
    Mat b;  // 1 x out
};

struct MlpCache {
    std::vector<Mat> inputs;  // input seen by each layer
};

struct MlpGrads {
    std::vector<Mat> dw;
    std::vector<Mat> db;
};

// Small dense MLP applied row-wise: ReLU between layers, linear final layer.
// Backpropagation is explicit; no autograd anywhere in this library.
struct Mlp {
    std::vector<DenseLayer> layers;

    int in_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.rows()); }
    int out_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().w.cols()); }

    Mat forward(const Mat& x, MlpCache* cache = nullptr) const {
        Mat cur = x;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            if (cache) cache->inputs.push_back(cur);
            Mat h = cur * layers[l].w;
            h.rowwise() += layers[l].b.row(0);
            if (l + 1 < layers.size()) h = h.cwiseMax(0.0);  // ReLU on hidden layers
            cur = std::move(h);
        }
        return cur;
    }

    // g_out is the loss gradient w.r.t. the forward output; returns the
    // gradient w.r.t. the input and fills per-layer weight gradients.
    Mat backward(const MlpCache& cache, const Mat& g_out, MlpGrads& grads) const {
        grads.dw.resize(layers.size());
        grads.db.resize(layers.size());
        Mat g = g_out;
        for (std::size_t l = layers.size(); l-- > 0;) {
            if (l + 1 < layers.size()) {
                // ReLU mask; the activated output of layer l is the input of layer l+1
                const Mat& activated = cache.inputs[l + 1];
                g = g.cwiseProduct((activated.array() > 0.0).cast<double>().matrix());
            }
            grads.dw[l].noalias() = cache.inputs[l].transpose() * g;
            grads.db[l] = g.colwise().sum();
            g = g * layers[l].w.transpose();
        }
        return g;
    }
};

// Fan-in scaled uniform init, biases zero.
inline Mlp make_mlp(int num_layers, int dim, Rng& rng) {
    if (num_layers < 1) throw std::invalid_argument("MLP needs at least one layer");
    Mlp mlp;
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int l = 0; l < num_layers; ++l) {
        DenseLayer layer;
        layer.w.resize(dim, dim);
        for (Eigen::Index i = 0; i < layer.w.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
                layer.w(i, j) = rng.uniform(-bound, bound);
            }
        }
        layer.b = Mat::Zero(1, dim);
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

}  // namespace gpart
