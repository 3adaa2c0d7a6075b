#pragma once

// Brute-force reference implementations used only by the test suites. They
// stay independent of the library's computation paths: plain loops, explicit
// matrices, no shared helpers beyond the public types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "i2p/attention.hpp"
#include "i2p/cloud.hpp"
#include "i2p/geom.hpp"
#include "i2p/rng.hpp"
#include "i2p/transport.hpp"

namespace oracle {

// projection through the explicit homogeneous 3x4 matrix K[R|t]
inline std::optional<i2p::Pixel> project(const i2p::CameraIntrinsics& k, const i2p::RigidTransform& t,
                                         const Eigen::Vector3d& p, double z_min = 1e-6) {
    Eigen::Matrix<double, 3, 4> rt;
    rt.leftCols<3>() = t.rotation();
    rt.col(3) = t.translation();
    const Eigen::Matrix<double, 3, 4> m = k.matrix() * rt;
    const Eigen::Vector4d homog(p.x(), p.y(), p.z(), 1.0);
    const Eigen::Vector3d q = m * homog;
    if (q.z() <= z_min) return std::nullopt;
    return i2p::Pixel{q.x() / q.z(), q.y() / q.z()};
}

// greedy max-min FPS recomputing every distance at every step
inline std::vector<Eigen::Index> fps(const i2p::PointCloud& cloud, Eigen::Index count, Eigen::Index start) {
    std::vector<Eigen::Index> sel{start};
    while (static_cast<Eigen::Index>(sel.size()) < count) {
        Eigen::Index best = 0;
        double best_d = -1.0;
        for (Eigen::Index i = 0; i < cloud.size(); ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (Eigen::Index s : sel)
                d = std::min(d, (cloud.points.row(i) - cloud.points.row(s)).squaredNorm());
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        sel.push_back(best);
    }
    return sel;
}

// exhaustive nearest-center assignment
inline std::vector<Eigen::Index> group(const i2p::PointCloud& cloud, const std::vector<Eigen::Index>& centers) {
    std::vector<Eigen::Index> assign(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        Eigen::Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < centers.size(); ++j) {
            const double d = (cloud.points.row(i) - cloud.points.row(centers[j])).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<Eigen::Index>(j);
            }
        }
        assign[i] = best;
    }
    return assign;
}

// scalar-loop MLP application
inline Eigen::MatrixXd mlp(const i2p::MlpParams& p, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        Eigen::MatrixXd next(h.rows(), p.weights[l].cols());
        for (Eigen::Index r = 0; r < h.rows(); ++r)
            for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) {
                double acc = p.biases[l](c);
                for (Eigen::Index m = 0; m < h.cols(); ++m) acc += h(r, m) * p.weights[l](m, c);
                next(r, c) = acc;
            }
        h = next;
        if (l + 1 < p.weights.size())
            for (Eigen::Index r = 0; r < h.rows(); ++r)
                for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = std::max(0.0, h(r, c));
    }
    return h;
}

// dense per-group vector attention: materializes one block per group
inline Eigen::MatrixXd attentive_aggregate(const i2p::ProxyDecomposition& decomp, const i2p::Points3& centers,
                                           const i2p::Points3& points, const Eigen::MatrixXd& f_centers,
                                           const Eigen::MatrixXd& f_points,
                                           const i2p::VectorAttentionParams& params) {
    const Eigen::Index d = mlp(params.phi, f_centers.row(0)).cols();
    Eigen::MatrixXd out(decomp.center_count(), d);
    for (Eigen::Index j = 0; j < decomp.center_count(); ++j) {
        std::vector<Eigen::Index> members;
        for (std::size_t i = 0; i < decomp.assignment.size(); ++i)
            if (decomp.assignment[i] == j) members.push_back(static_cast<Eigen::Index>(i));
        const Eigen::Index g = static_cast<Eigen::Index>(members.size());

        Eigen::MatrixXd logits(g, d), values(g, d);
        for (Eigen::Index r = 0; r < g; ++r) {
            const Eigen::RowVector3d rel = centers.row(j) - points.row(members[r]);
            const Eigen::MatrixXd delta = mlp(params.theta, rel);
            const Eigen::MatrixXd pre =
                mlp(params.phi, f_centers.row(j)) - mlp(params.psi, f_points.row(members[r])) + delta;
            logits.row(r) = mlp(params.gamma, pre);
            values.row(r) = mlp(params.alpha, f_points.row(members[r])) + delta;
        }
        // channel-wise softmax with max subtraction
        for (Eigen::Index c = 0; c < d; ++c) {
            double mx = -std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < g; ++r) mx = std::max(mx, logits(r, c));
            double sum = 0.0;
            for (Eigen::Index r = 0; r < g; ++r) sum += std::exp(logits(r, c) - mx);
            double acc = 0.0;
            for (Eigen::Index r = 0; r < g; ++r) acc += std::exp(logits(r, c) - mx) / sum * values(r, c);
            out(j, c) = acc;
        }
    }
    return out;
}

// naive triple-loop scalar attention
inline Eigen::MatrixXd scalar_attention(const i2p::AttentionParams& p, const Eigen::MatrixXd& xq,
                                        const Eigen::MatrixXd& xkv) {
    const Eigen::Index d = xq.cols();
    const Eigen::MatrixXd q = xq * p.w_q, k = xkv * p.w_k, v = xkv * p.w_v;
    Eigen::MatrixXd out = xq;
    for (Eigen::Index i = 0; i < xq.rows(); ++i) {
        Eigen::VectorXd logits(xkv.rows());
        for (Eigen::Index j = 0; j < xkv.rows(); ++j) logits(j) = q.row(i).dot(k.row(j)) / std::sqrt(double(d));
        const double mx = logits.maxCoeff();
        Eigen::VectorXd w = (logits.array() - mx).exp();
        w /= w.sum();
        for (Eigen::Index j = 0; j < xkv.rows(); ++j) out.row(i) += w(j) * v.row(j);
    }
    return out;
}

// literal Eq-by-Eq masked attention
inline Eigen::MatrixXd masked_cross_attention(const i2p::AttentionParams& p, const Eigen::MatrixXd& f_i,
                                              const Eigen::MatrixXd& f_p, const Eigen::VectorXd& m_i,
                                              const Eigen::VectorXd& m_p) {
    const Eigen::Index d = f_i.cols();
    Eigen::MatrixXd q = f_i * p.w_q, k = f_p * p.w_k, v = f_p * p.w_v;
    for (Eigen::Index i = 0; i < q.rows(); ++i) q.row(i) *= m_i(i);
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
        k.row(j) *= m_p(j);
        v.row(j) *= m_p(j);
    }
    Eigen::MatrixXd out = f_i;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        Eigen::VectorXd logits(k.rows());
        for (Eigen::Index j = 0; j < k.rows(); ++j) logits(j) = q.row(i).dot(k.row(j)) / std::sqrt(double(d));
        const double mx = logits.maxCoeff();
        Eigen::VectorXd w = (logits.array() - mx).exp();
        w /= w.sum();
        for (Eigen::Index j = 0; j < k.rows(); ++j) out.row(i) += w(j) * v.row(j);
    }
    return out;
}

// direct-domain Sinkhorn over an augmented matrix (multiplicative scalings)
inline Eigen::MatrixXd direct_sinkhorn(const Eigen::MatrixXd& d_aug, Eigen::Index iterations) {
    const Eigen::Index r = d_aug.rows() - 1, c = d_aug.cols() - 1;
    Eigen::VectorXd row_target = Eigen::VectorXd::Ones(r + 1);
    Eigen::VectorXd col_target = Eigen::VectorXd::Ones(c + 1);
    row_target(r) = double(c);
    col_target(c) = double(r);

    const Eigen::MatrixXd kmat = d_aug.array().exp();
    Eigen::VectorXd u = Eigen::VectorXd::Ones(r + 1), v = Eigen::VectorXd::Ones(c + 1);
    for (Eigen::Index t = 0; t < iterations; ++t) {
        u = row_target.array() / (kmat * v).array();
        v = col_target.array() / (kmat.transpose() * u).array();
    }
    return u.asDiagonal() * kmat * v.asDiagonal();
}

// deterministic helpers for random instances
inline Eigen::MatrixXd random_matrix(i2p::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

inline Eigen::Matrix3d random_rotation(i2p::Rng& rng) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    while (axis.norm() < 1e-6) axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix();
}

inline i2p::RigidTransform random_transform(i2p::Rng& rng, double translation_scale = 5.0) {
    return i2p::RigidTransform(random_rotation(rng),
                               translation_scale * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
}

inline i2p::PointCloud random_cloud(i2p::Rng& rng, Eigen::Index n, double scale = 10.0) {
    i2p::Points3 pts(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        pts.row(i) = scale * Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
    return i2p::PointCloud(std::move(pts));
}

}  // namespace oracle
