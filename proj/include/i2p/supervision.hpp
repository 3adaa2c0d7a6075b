#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "i2p/cloud.hpp"
#include "i2p/geom.hpp"
#include "i2p/sampling.hpp"
#include "i2p/transport.hpp"

namespace i2p {

struct CoarseWeightMatrix {
    Eigen::MatrixXd values;  // (N_I+1) x (N_q+1)
};

struct FineWeightMatrix {
    Eigen::MatrixXd values;  // (m+1) x (n+1)
};

// bidirectional projected-point ratios; one projection pass feeds both
// numerators. r_left[i][j]: fraction of group j landing in patch i.
// r_right[i][j]: group j's share of everything landing in patch i (0 when
// the patch receives nothing).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coarse_ratios(const CameraIntrinsics& k,
                                                                 const RigidTransform& gt_pose,
                                                                 const PointCloud& cloud,
                                                                 const ProxyDecomposition& decomp,
                                                                 const PatchLayout& layout,
                                                                 double z_min = kDefaultZMin) {
    const Eigen::Index n_i = layout.patch_count();
    const Eigen::Index n_q = decomp.center_count();
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_i, n_q);
    for (Eigen::Index p = 0; p < cloud.size(); ++p) {
        const auto px = project_point(k, gt_pose, cloud.point(p), z_min);
        if (!px) continue;
        if (px->u < 0.0 || px->u >= k.width || px->v < 0.0 || px->v >= k.height) continue;
        counts(layout.patch_index_of(px->u, px->v), decomp.assignment[p]) += 1.0;
    }

    Eigen::MatrixXd r_left(n_i, n_q), r_right(n_i, n_q);
    const Eigen::VectorXd patch_totals = counts.rowwise().sum();
    for (Eigen::Index i = 0; i < n_i; ++i)
        for (Eigen::Index j = 0; j < n_q; ++j) {
            r_left(i, j) = counts(i, j) / double(decomp.group_sizes[j]);
            r_right(i, j) = patch_totals(i) > 0.0 ? counts(i, j) / patch_totals(i) : 0.0;
        }
    return {std::move(r_left), std::move(r_right)};
}

// interior min of the two ratios; edge entries carry the unassigned residual
// mass, clamped to [0,1] against float drift
inline CoarseWeightMatrix coarse_weight_matrix(const Eigen::MatrixXd& r_left, const Eigen::MatrixXd& r_right) {
    if (r_left.rows() != r_right.rows() || r_left.cols() != r_right.cols())
        throw std::invalid_argument("coarse_weight_matrix: ratio shapes disagree");
    const Eigen::Index n_i = r_left.rows(), n_q = r_left.cols();
    CoarseWeightMatrix w;
    w.values.setZero(n_i + 1, n_q + 1);
    w.values.topLeftCorner(n_i, n_q) = r_left.cwiseMin(r_right);
    for (Eigen::Index i = 0; i < n_i; ++i)
        w.values(i, n_q) = std::clamp(1.0 - r_right.row(i).sum(), 0.0, 1.0);
    for (Eigen::Index j = 0; j < n_q; ++j)
        w.values(n_i, j) = std::clamp(1.0 - r_left.col(j).sum(), 0.0, 1.0);
    return w;
}

namespace detail {

constexpr double kLogFloor = 1e-30;

inline double weighted_nll(const Eigen::MatrixXd& plan, const Eigen::MatrixXd& w) {
    if (plan.rows() != w.rows() || plan.cols() != w.cols())
        throw std::invalid_argument("weighted nll: plan/weight shape mismatch");
    const double total = w.sum();
    if (total == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (w(i, j) == 0.0) continue;
            const double s = plan(i, j);
            if (!std::isfinite(s) || s < 0.0) throw std::domain_error("weighted nll: non-finite loss");
            acc -= w(i, j) * std::log(std::max(s, kLogFloor));
        }
    return acc / total;
}

}  // namespace detail

// weighted negative log-likelihood over the augmented coarse plan
inline double coarse_loss(const ScoreMatrix& plan_aug, const CoarseWeightMatrix& w) {
    if (!plan_aug.has_slack) throw std::invalid_argument("coarse_loss: expects the augmented plan");
    return detail::weighted_nll(plan_aug.values, w.values);
}

// ground-truth fine weights for one sample batch: a pixel-point pair is
// positive when the point projects within tau pixels of the pixel, masked by
// the batch validity masks; edges carry the leftover per Eq-style max(0, 1-sum)
inline FineWeightMatrix fine_weight_matrix(const SampleBatch& batch, const CameraIntrinsics& k,
                                           const RigidTransform& gt_pose, const PointCloud& cloud,
                                           double tau, double z_min = kDefaultZMin) {
    if (tau <= 0.0) throw std::invalid_argument("fine_weight_matrix: tau must be positive");
    const Eigen::Index m = static_cast<Eigen::Index>(batch.pixel_coords.size());
    const Eigen::Index n = static_cast<Eigen::Index>(batch.point_indices.size());

    FineWeightMatrix w;
    w.values.setZero(m + 1, n + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (batch.point_mask(j) == 0.0) continue;
        const auto px = project_point(k, gt_pose, cloud.point(batch.point_indices[j]), z_min);
        if (!px) continue;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (batch.pixel_mask(i) == 0.0) continue;
            const double du = batch.pixel_coords[i].u - px->u;
            const double dv = batch.pixel_coords[i].v - px->v;
            if (std::sqrt(du * du + dv * dv) <= tau) w.values(i, j) = 1.0;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j)
        w.values(m, j) = std::max(0.0, 1.0 - w.values.col(j).head(m).sum());
    for (Eigen::Index i = 0; i < m; ++i)
        w.values(i, n) = std::max(0.0, 1.0 - w.values.row(i).head(n).sum());
    return w;
}

// sum of per-proxy weighted NLLs; proxies with all-zero weights contribute 0
inline double fine_loss(const std::vector<ScoreMatrix>& plans_aug, const std::vector<FineWeightMatrix>& weights) {
    if (plans_aug.size() != weights.size()) throw std::invalid_argument("fine_loss: list length mismatch");
    double total = 0.0;
    for (std::size_t l = 0; l < plans_aug.size(); ++l) {
        if (!plans_aug[l].has_slack) throw std::invalid_argument("fine_loss: expects augmented plans");
        total += detail::weighted_nll(plans_aug[l].values, weights[l].values);
    }
    return total;
}

// analytic gradient of coarse_loss(sinkhorn(add_slack(D)), W) with respect
// to the raw (non-slack) scores D
inline Eigen::MatrixXd coarse_loss_score_gradient(const ScoreMatrix& d, double slack_value,
                                                  Eigen::Index sinkhorn_iters, const CoarseWeightMatrix& w) {
    if (d.has_slack) throw std::invalid_argument("coarse_loss_score_gradient: expects raw scores");
    const double total = w.values.sum();
    if (total == 0.0) return Eigen::MatrixXd::Zero(d.values.rows(), d.values.cols());
    const ScoreMatrix d_aug = add_slack(d, slack_value);
    const Eigen::MatrixXd grad_log_plan = -w.values / total;
    const Eigen::MatrixXd grad_aug = sinkhorn_log_plan_vjp(d_aug, sinkhorn_iters, grad_log_plan);
    return grad_aug.topLeftCorner(d.values.rows(), d.values.cols());
}

}  // namespace i2p
