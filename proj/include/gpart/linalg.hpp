#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "gpart/graph.hpp"

namespace gpart {

// Node-feature matrices are row-per-node; row-major keeps per-node rows
// contiguous for the CSR propagation loops.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Row-wise l2 normalization in place. All-zero rows stay zero; returns how
// many there were.
inline std::int64_t l2_normalize_rows(Mat& z) {
    std::int64_t zero_rows = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double norm = z.row(i).norm();
        if (norm == 0.0) {
            ++zero_rows;
        } else {
            z.row(i) /= norm;
        }
    }
    return zero_rows;
}

// The symmetrically normalized adjacency with self-edges,
// D^{-1/2} (A + I) D^{-1/2}, applied as a sparse operator. The operator is
// symmetric, which the training code relies on when back-propagating.
class NormAdjacency {
public:
    explicit NormAdjacency(const Graph& g) : g_(&g) {
        inv_sqrt_.resize(g.n());
        for (NodeId i = 0; i < g.n(); ++i) {
            inv_sqrt_[i] = 1.0 / std::sqrt(g.weighted_degree(i) + 1.0);
        }
    }

    Mat apply(const Mat& x) const {
        const Graph& g = *g_;
        Mat y = Mat::Zero(x.rows(), x.cols());
        for (NodeId i = 0; i < g.n(); ++i) {
            const double inv_i = inv_sqrt_[i];
            // self-edge from A + I
            y.row(i) = (inv_i * inv_i) * x.row(i);
            for (std::int64_t s = g.row_begin(i); s < g.row_end(i); ++s) {
                const NodeId j = g.nbr_at(s);
                double w = g.edge_weight_at(s);
                if (j == i) w *= 2.0;  // stored self-loops carry matrix value 2w
                y.row(i) += (inv_i * w * inv_sqrt_[j]) * x.row(j);
            }
        }
        return y;
    }

    Mat apply_times(const Mat& x, int times) const {
        Mat cur = x;
        for (int t = 0; t < times; ++t) cur = apply(cur);
        return cur;
    }

private:
    const Graph* g_;
    Vec inv_sqrt_;
};

}  // namespace gpart
