#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "i2p/finematch.hpp"
#include "i2p/geom.hpp"
#include "i2p/rng.hpp"

namespace i2p {

struct PoseEstimate {
    RigidTransform transform;
    std::vector<Eigen::Index> inlier_indices;
    double mean_reprojection_error = 0.0;
};

namespace detail {

// squared distances between all control-point pairs
inline std::vector<std::pair<int, int>> control_pairs(int ncp) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < ncp; ++a)
        for (int b = a + 1; b < ncp; ++b) pairs.emplace_back(a, b);
    return pairs;
}

// residuals r_p = ||sum_k beta_k dv_k(p)||^2 - rho_p over control pairs,
// refined by fixed-iteration Gauss-Newton
inline Eigen::VectorXd refine_betas(const std::vector<std::vector<Eigen::Vector3d>>& dv,
                                    const Eigen::VectorXd& rho, Eigen::VectorXd betas, int iterations = 10) {
    const int n_pairs = static_cast<int>(dv.size());
    const int nb = static_cast<int>(betas.size());
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd jac(n_pairs, nb);
        Eigen::VectorXd res(n_pairs);
        for (int p = 0; p < n_pairs; ++p) {
            Eigen::Vector3d acc = Eigen::Vector3d::Zero();
            for (int kk = 0; kk < nb; ++kk) acc += betas(kk) * dv[p][kk];
            res(p) = acc.squaredNorm() - rho(p);
            for (int kk = 0; kk < nb; ++kk) jac(p, kk) = 2.0 * acc.dot(dv[p][kk]);
        }
        betas += jac.colPivHouseholderQr().solve(-res);
    }
    return betas;
}

}  // namespace detail

// EPnP: barycentric control-point formulation, null-space candidates N=1..4
// (planar clouds fall back to 3 control points), Gauss-Newton on the betas,
// orthogonal Procrustes for the final pose; the candidate with the lowest
// total reprojection error wins
inline RigidTransform epnp(const Points3& world, const std::vector<Pixel>& pixels, const CameraIntrinsics& k) {
    const Eigen::Index n = world.rows();
    if (n < 4 || static_cast<Eigen::Index>(pixels.size()) != n)
        throw std::invalid_argument("epnp: needs at least 4 point-pixel pairs");

    // control points from the centroid and principal directions
    const Eigen::RowVector3d centroid = world.colwise().mean();
    const Points3 centered = world.rowwise() - centroid;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> pca(centered.transpose() * centered);
    const Eigen::Vector3d evals = pca.eigenvalues();  // ascending
    const Eigen::Matrix3d evecs = pca.eigenvectors();
    if (evals(1) <= 1e-12 * std::max(evals(2), 1e-300))
        throw std::domain_error("epnp: degenerate configuration (collinear points)");
    const bool planar = evals(0) <= 1e-10 * evals(2);
    const int ncp = planar ? 3 : 4;

    std::vector<Eigen::Vector3d> cw(ncp);
    cw[0] = centroid.transpose();
    for (int i = 1; i < ncp; ++i)
        cw[i] = cw[0] + std::sqrt(evals(3 - i) / double(n)) * evecs.col(3 - i);

    // barycentric coordinates
    Eigen::MatrixXd basis(3, ncp - 1);
    for (int i = 1; i < ncp; ++i) basis.col(i - 1) = cw[i] - cw[0];
    const auto basis_qr = basis.colPivHouseholderQr();
    Eigen::MatrixXd alphas(n, ncp);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd tail = basis_qr.solve(centered.row(i).transpose());
        alphas(i, 0) = 1.0 - tail.sum();
        alphas.block(i, 1, 1, ncp - 1) = tail.transpose();
    }

    // M matrix of the projection constraints
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 3 * ncp);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < ncp; ++j) {
            m(2 * i, 3 * j) = alphas(i, j) * k.fx;
            m(2 * i, 3 * j + 2) = alphas(i, j) * (k.cx - pixels[i].u);
            m(2 * i + 1, 3 * j + 1) = alphas(i, j) * k.fy;
            m(2 * i + 1, 3 * j + 2) = alphas(i, j) * (k.cy - pixels[i].v);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mtm(m.transpose() * m);
    const int nb = planar ? 3 : 4;  // null-space candidates

    // per-pair difference vectors of each null basis column
    const auto pairs = detail::control_pairs(ncp);
    std::vector<std::vector<Eigen::Vector3d>> dv(pairs.size(), std::vector<Eigen::Vector3d>(nb));
    Eigen::VectorXd rho(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        rho(p) = (cw[a] - cw[b]).squaredNorm();
        for (int kk = 0; kk < nb; ++kk) {
            const Eigen::VectorXd vcol = mtm.eigenvectors().col(kk);
            dv[p][kk] = vcol.segment<3>(3 * a) - vcol.segment<3>(3 * b);
        }
    }

    // initial betas per candidate dimension, via least squares on the
    // distance constraints restricted to the leading quadratic terms
    std::vector<Eigen::VectorXd> candidates;
    for (int cand_n = 1; cand_n <= nb; ++cand_n) {
        // unknowns: beta_1*beta_j for j<=cand_n plus beta_2^2 when cand_n >= 2
        std::vector<std::pair<int, int>> monos;
        for (int j = 0; j < cand_n; ++j) monos.emplace_back(0, j);
        if (cand_n >= 2) monos.emplace_back(1, 1);
        Eigen::MatrixXd l(pairs.size(), monos.size());
        for (std::size_t p = 0; p < pairs.size(); ++p)
            for (std::size_t q = 0; q < monos.size(); ++q) {
                const auto [a, b] = monos[q];
                l(p, q) = (a == b ? 1.0 : 2.0) * dv[p][a].dot(dv[p][b]);
            }
        const Eigen::VectorXd x = l.colPivHouseholderQr().solve(rho);

        Eigen::VectorXd betas = Eigen::VectorXd::Zero(nb);
        betas(0) = std::sqrt(std::abs(x(0)));
        if (betas(0) > 0.0)
            for (int j = 1; j < cand_n; ++j) betas(j) = x(j) / (x(0) < 0.0 ? -betas(0) : betas(0));
        candidates.push_back(detail::refine_betas(dv, rho, betas));
    }

    // evaluate candidates by total reprojection error
    double best_err = std::numeric_limits<double>::infinity();
    Eigen::Matrix3d best_r = Eigen::Matrix3d::Identity();
    Eigen::Vector3d best_t = Eigen::Vector3d::Zero();
    for (const auto& betas : candidates) {
        std::vector<Eigen::Vector3d> cc(ncp, Eigen::Vector3d::Zero());
        for (int kk = 0; kk < nb; ++kk)
            for (int j = 0; j < ncp; ++j) cc[j] += betas(kk) * mtm.eigenvectors().col(kk).segment<3>(3 * j);

        Points3 cam(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Vector3d pc = Eigen::Vector3d::Zero();
            for (int j = 0; j < ncp; ++j) pc += alphas(i, j) * cc[j];
            cam.row(i) = pc.transpose();
        }
        if (cam.col(2).sum() < 0.0) cam = -cam;  // cheirality

        // Procrustes world -> camera
        const Eigen::RowVector3d cam_centroid = cam.colwise().mean();
        const Eigen::Matrix3d cov =
            (centered.transpose() * (cam.rowwise() - cam_centroid)).transpose();
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
        Eigen::Matrix3d r = u * v.transpose();
        if (r.determinant() < 0.0) {
            u.col(2) = -u.col(2);
            r = u * v.transpose();
        }
        const Eigen::Vector3d t = cam_centroid.transpose() - r * centroid.transpose();

        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Vector3d pc = r * world.row(i).transpose() + t;
            if (pc.z() <= 0.0) {
                err += 1e6;
                continue;
            }
            const double du = k.fx * pc.x() / pc.z() + k.cx - pixels[i].u;
            const double dvv = k.fy * pc.y() / pc.z() + k.cy - pixels[i].v;
            err += std::sqrt(du * du + dvv * dvv);
        }
        if (err < best_err) {
            best_err = err;
            best_r = r;
            best_t = t;
        }
    }
    return RigidTransform(best_r, best_t);
}

inline std::optional<double> reprojection_distance(const CameraIntrinsics& k, const RigidTransform& t,
                                                   const Eigen::Vector3d& point, const Pixel& pixel,
                                                   double z_min = kDefaultZMin) {
    const auto px = project_point(k, t, point, z_min);
    if (!px) return std::nullopt;
    const double du = px->u - pixel.u, dv = px->v - pixel.v;
    return std::sqrt(du * du + dv * dv);
}

// RANSAC loop over minimal 4-pair EPnP hypotheses; consensus refit on the
// winning inlier set, ties in inlier count broken by mean reprojection error
inline std::optional<PoseEstimate> ransac_pnp(const CorrespondenceSet& c, const CameraIntrinsics& k,
                                              Eigen::Index iterations, double inlier_gate, Rng& rng) {
    const Eigen::Index n = c.size();
    if (n < 4) throw std::invalid_argument("ransac_pnp: too few correspondences");
    if (iterations < 1) throw std::invalid_argument("ransac_pnp: iterations must be >= 1");
    const std::uint64_t base_seed = rng.next_u64();

    auto score = [&](const RigidTransform& t, std::vector<Eigen::Index>& inliers, double& mean_err) {
        inliers.clear();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto d = reprojection_distance(k, t, c.entries[i].point, c.entries[i].pixel);
            if (d && *d <= inlier_gate) {
                inliers.push_back(i);
                acc += *d;
            }
        }
        mean_err = inliers.empty() ? std::numeric_limits<double>::infinity() : acc / double(inliers.size());
    };

    std::optional<RigidTransform> best;
    std::vector<Eigen::Index> best_inliers;
    double best_mean = std::numeric_limits<double>::infinity();

    Points3 sample_pts(4, 3);
    std::vector<Pixel> sample_px(4);
    std::vector<Eigen::Index> inliers;
    for (Eigen::Index it = 0; it < iterations; ++it) {
        Rng it_rng = Rng::stream(base_seed, static_cast<std::uint64_t>(it));
        Eigen::Index idx[4];
        for (int s = 0; s < 4; ++s) {
            bool fresh;
            do {
                idx[s] = static_cast<Eigen::Index>(it_rng.uniform_index(n));
                fresh = true;
                for (int q = 0; q < s; ++q)
                    if (idx[q] == idx[s]) fresh = false;
            } while (!fresh);
            sample_pts.row(s) = c.entries[idx[s]].point.transpose();
            sample_px[s] = c.entries[idx[s]].pixel;
        }

        RigidTransform hyp;
        try {
            hyp = epnp(sample_pts, sample_px, k);
        } catch (const std::domain_error&) {
            continue;  // degenerate minimal sample
        }
        double mean_err;
        score(hyp, inliers, mean_err);
        const bool better = inliers.size() > best_inliers.size() ||
                            (inliers.size() == best_inliers.size() && mean_err < best_mean);
        if (better) {
            best = hyp;
            best_inliers = inliers;
            best_mean = mean_err;
        }
    }
    if (!best || best_inliers.size() < 4) return std::nullopt;

    // refit on the consensus set
    Points3 all_pts(best_inliers.size(), 3);
    std::vector<Pixel> all_px(best_inliers.size());
    for (std::size_t i = 0; i < best_inliers.size(); ++i) {
        all_pts.row(i) = c.entries[best_inliers[i]].point.transpose();
        all_px[i] = c.entries[best_inliers[i]].pixel;
    }
    RigidTransform final_t = *best;
    try {
        final_t = epnp(all_pts, all_px, k);
    } catch (const std::domain_error&) {
        // keep the minimal-sample hypothesis
    }

    PoseEstimate est;
    double mean_err;
    score(final_t, inliers, mean_err);
    if (inliers.size() < best_inliers.size()) {
        // refit lost consensus; fall back
        final_t = *best;
        score(final_t, inliers, mean_err);
    }
    est.transform = final_t;
    est.inlier_indices = inliers;
    est.mean_reprojection_error = mean_err;
    return est;
}

}  // namespace i2p
