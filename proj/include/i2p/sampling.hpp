#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "i2p/cloud.hpp"
#include "i2p/geom.hpp"
#include "i2p/rng.hpp"
#include "i2p/transport.hpp"

namespace i2p {

// fixed-size resample of one matched point proxy: n point slots with a
// prefix-ones validity mask, k pixel patches of w*w pixels each with a
// block-prefix validity mask
struct SampleBatch {
    Eigen::Index proxy_index = -1;
    std::vector<Eigen::Index> point_indices;  // n indices into the cloud
    Eigen::VectorXd point_mask;               // n, prefix of ones
    std::vector<Eigen::Index> patch_indices;  // k pixel-proxy indices, descending score
    std::vector<Pixel> pixel_coords;          // m = k*w*w, row-major per patch
    Eigen::VectorXd pixel_mask;               // m, whole-patch blocks
};

// columns of the stripped coarse plan with positive mass, ascending
inline std::vector<Eigen::Index> select_matched_proxies(const ScoreMatrix& s) {
    if (s.has_slack) throw std::invalid_argument("select_matched_proxies: expects stripped plan");
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < s.values.cols(); ++j)
        if (s.values.col(j).sum() > 0.0) out.push_back(j);
    return out;
}

// n point slots from group j: a uniform draw without replacement when the
// group is large enough, otherwise all members followed by cyclic repeats
// carrying mask 0
inline void sample_points(const ProxyDecomposition& decomp, Eigen::Index j, Eigen::Index n, Rng& rng,
                          std::vector<Eigen::Index>& point_indices, Eigen::VectorXd& point_mask) {
    if (n < 1) throw std::invalid_argument("sample_points: n must be >= 1");
    if (j < 0 || j >= decomp.center_count()) throw std::invalid_argument("sample_points: proxy index out of range");

    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < decomp.assignment.size(); ++i)
        if (decomp.assignment[i] == j) members.push_back(static_cast<Eigen::Index>(i));
    const Eigen::Index g = static_cast<Eigen::Index>(members.size());

    point_indices.clear();
    point_indices.reserve(n);
    point_mask = Eigen::VectorXd::Zero(n);
    if (g >= n) {
        // partial Fisher-Yates, first n slots
        for (Eigen::Index t = 0; t < n; ++t) {
            const Eigen::Index pick = t + static_cast<Eigen::Index>(rng.uniform_index(g - t));
            std::swap(members[t], members[pick]);
            point_indices.push_back(members[t]);
        }
        point_mask.setOnes();
    } else {
        for (Eigen::Index t = 0; t < n; ++t) point_indices.push_back(members[t % g]);
        point_mask.head(g).setOnes();
    }
}

// top-k patches of column j by score (ties by lowest row); short columns are
// padded with the lowest-index unselected patches, their pixel blocks masked 0
inline void sample_pixels(const ScoreMatrix& s, Eigen::Index j, Eigen::Index k, const PatchLayout& layout,
                          std::vector<Eigen::Index>& patch_indices, std::vector<Pixel>& pixel_coords,
                          Eigen::VectorXd& pixel_mask) {
    if (s.has_slack) throw std::invalid_argument("sample_pixels: expects stripped plan");
    if (k < 1 || k > s.values.rows()) throw std::invalid_argument("sample_pixels: k out of range");
    if (s.values.rows() != layout.patch_count()) throw std::invalid_argument("sample_pixels: layout mismatch");

    std::vector<Eigen::Index> order(s.values.rows());
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s.values(a, j) > s.values(b, j); });

    patch_indices.clear();
    Eigen::Index positive = 0;
    for (Eigen::Index r = 0; r < k; ++r) {
        if (s.values(order[r], j) > 0.0) {
            patch_indices.push_back(order[r]);
            ++positive;
        }
    }
    if (positive < k) {
        // fill with the next patches in plain index order
        std::vector<bool> taken(s.values.rows(), false);
        for (Eigen::Index p : patch_indices) taken[p] = true;
        for (Eigen::Index i = 0; i < s.values.rows() && static_cast<Eigen::Index>(patch_indices.size()) < k; ++i)
            if (!taken[i]) patch_indices.push_back(i);
    }

    const Eigen::Index w = layout.patch;
    const Eigen::Index m = k * w * w;
    pixel_coords.clear();
    pixel_coords.reserve(m);
    pixel_mask = Eigen::VectorXd::Zero(m);
    pixel_mask.head(positive * w * w).setOnes();
    for (Eigen::Index slot = 0; slot < k; ++slot) {
        const Pixel origin = layout.patch_origin(static_cast<int>(patch_indices[slot]));
        for (Eigen::Index vy = 0; vy < w; ++vy)
            for (Eigen::Index ux = 0; ux < w; ++ux)
                pixel_coords.push_back(Pixel{origin.u + double(ux), origin.v + double(vy)});
    }
}

inline SampleBatch make_sample_batch(const ProxyDecomposition& decomp, const ScoreMatrix& s, Eigen::Index j,
                                     Eigen::Index n, Eigen::Index k, const PatchLayout& layout, Rng& rng) {
    SampleBatch b;
    b.proxy_index = j;
    sample_points(decomp, j, n, rng, b.point_indices, b.point_mask);
    sample_pixels(s, j, k, layout, b.patch_indices, b.pixel_coords, b.pixel_mask);
    return b;
}

}  // namespace i2p
