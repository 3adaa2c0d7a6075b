#pragma once

#include <array>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "i2p/geom.hpp"

namespace i2p {

struct PointCloud {
    Points3 points;

    PointCloud() = default;
    explicit PointCloud(Points3 pts) : points(std::move(pts)) {
        if (points.rows() < 1) throw std::invalid_argument("point cloud: needs at least one point");
        if (!points.allFinite()) throw std::invalid_argument("point cloud: coordinates must be finite");
    }

    Eigen::Index size() const { return points.rows(); }
    Eigen::Vector3d point(Eigen::Index i) const { return points.row(i).transpose(); }
};

// assignment[i] is a slot into center_indices (the point's nearest center,
// ties broken by lowest slot); group_sizes sums to the parent cloud size
struct ProxyDecomposition {
    std::vector<Eigen::Index> center_indices;
    std::vector<Eigen::Index> assignment;
    std::vector<Eigen::Index> group_sizes;

    Eigen::Index center_count() const { return static_cast<Eigen::Index>(center_indices.size()); }

    // member point indices per center, increasing within each group
    std::vector<std::vector<Eigen::Index>> groups() const {
        std::vector<std::vector<Eigen::Index>> g(center_indices.size());
        for (std::size_t j = 0; j < center_indices.size(); ++j) g[j].reserve(group_sizes[j]);
        for (std::size_t i = 0; i < assignment.size(); ++i) g[assignment[i]].push_back(static_cast<Eigen::Index>(i));
        return g;
    }
};

// greedy max-min selection; first element is start_index, ties by lowest index
inline std::vector<Eigen::Index> farthest_point_sampling(const PointCloud& cloud, Eigen::Index count,
                                                         Eigen::Index start_index = 0) {
    const Eigen::Index n = cloud.size();
    if (count < 1 || count > n) throw std::invalid_argument("fps: count must be in [1, N]");
    if (start_index < 0 || start_index >= n) throw std::invalid_argument("fps: start index out of range");

    std::vector<Eigen::Index> selected;
    selected.reserve(count);
    selected.push_back(start_index);

    Eigen::VectorXd min_sq = (cloud.points.rowwise() - cloud.points.row(start_index)).rowwise().squaredNorm();
    for (Eigen::Index s = 1; s < count; ++s) {
        Eigen::Index best = 0;
        double best_sq = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (min_sq[i] > best_sq) {
                best_sq = min_sq[i];
                best = i;
            }
        }
        selected.push_back(best);
        min_sq = min_sq.cwiseMin((cloud.points.rowwise() - cloud.points.row(best)).rowwise().squaredNorm());
    }
    return selected;
}

inline ProxyDecomposition group_points(const PointCloud& cloud, const std::vector<Eigen::Index>& center_indices) {
    if (center_indices.empty()) throw std::invalid_argument("group_points: no centers");
    for (Eigen::Index c : center_indices)
        if (c < 0 || c >= cloud.size()) throw std::invalid_argument("group_points: center index out of range");

    ProxyDecomposition d;
    d.center_indices = center_indices;
    d.assignment.resize(cloud.size());
    d.group_sizes.assign(center_indices.size(), 0);

    Points3 centers(center_indices.size(), 3);
    for (std::size_t j = 0; j < center_indices.size(); ++j) centers.row(j) = cloud.points.row(center_indices[j]);

    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        Eigen::Index best = 0;
        double best_sq = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < centers.rows(); ++j) {
            const double sq = (centers.row(j) - cloud.points.row(i)).squaredNorm();
            if (sq < best_sq) {
                best_sq = sq;
                best = j;
            }
        }
        d.assignment[i] = best;
        ++d.group_sizes[best];
    }
    return d;
}

// level2 decomposes the level-1 center subcloud: its center_indices and
// assignment refer to level-1 slots
struct HierarchicalDecomposition {
    ProxyDecomposition level1;
    ProxyDecomposition level2;
};

inline HierarchicalDecomposition hierarchical_decompose(const PointCloud& cloud,
                                                        const std::array<Eigen::Index, 2>& level_counts,
                                                        Eigen::Index start_index = 0) {
    const auto [n1, n2] = level_counts;
    if (!(cloud.size() >= n1 && n1 >= n2 && n2 >= 1))
        throw std::invalid_argument("hierarchical_decompose: need N >= n1 >= n2 >= 1");

    HierarchicalDecomposition h;
    h.level1 = group_points(cloud, farthest_point_sampling(cloud, n1, start_index));

    Points3 centers(n1, 3);
    for (Eigen::Index j = 0; j < n1; ++j) centers.row(j) = cloud.points.row(h.level1.center_indices[j]);
    const PointCloud center_cloud{Points3(centers)};
    h.level2 = group_points(center_cloud, farthest_point_sampling(center_cloud, n2, 0));
    return h;
}

// raw point -> level-2 slot, through its level-1 center
inline std::vector<Eigen::Index> composed_assignment(const HierarchicalDecomposition& h) {
    std::vector<Eigen::Index> out(h.level1.assignment.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.level2.assignment[h.level1.assignment[i]];
    return out;
}

// composed grouping presented as a ProxyDecomposition over the raw cloud;
// center_indices are raw-cloud indices of the level-2 centers
inline ProxyDecomposition composed_decomposition(const HierarchicalDecomposition& h) {
    ProxyDecomposition d;
    d.center_indices.reserve(h.level2.center_indices.size());
    for (Eigen::Index slot : h.level2.center_indices) d.center_indices.push_back(h.level1.center_indices[slot]);
    d.assignment = composed_assignment(h);
    d.group_sizes.assign(d.center_indices.size(), 0);
    for (Eigen::Index a : d.assignment) ++d.group_sizes[a];
    return d;
}

inline void save_cloud(const std::string& path, const PointCloud& cloud) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os.precision(17);
    const bool ply = path.size() >= 4 && path.substr(path.size() - 4) == ".ply";
    if (ply) {
        os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
           << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
        for (Eigen::Index i = 0; i < cloud.size(); ++i)
            os << cloud.points(i, 0) << ' ' << cloud.points(i, 1) << ' ' << cloud.points(i, 2) << '\n';
    } else {
        for (Eigen::Index i = 0; i < cloud.size(); ++i)
            os << cloud.points(i, 0) << ',' << cloud.points(i, 1) << ',' << cloud.points(i, 2) << '\n';
    }
}

inline PointCloud load_cloud(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    std::vector<Eigen::Vector3d> pts;
    const bool ply = path.size() >= 4 && path.substr(path.size() - 4) == ".ply";
    if (ply) {
        std::string line;
        Eigen::Index n = -1;
        while (std::getline(is, line)) {
            if (line.rfind("element vertex", 0) == 0) n = std::stoll(line.substr(15));
            if (line == "end_header") break;
        }
        if (n < 0) throw std::runtime_error("ply: missing vertex element: " + path);
        pts.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Vector3d p;
            if (!(is >> p.x() >> p.y() >> p.z())) throw std::runtime_error("ply: truncated vertex data: " + path);
            pts.push_back(p);
        }
    } else {
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            for (char& ch : line)
                if (ch == ',') ch = ' ';
            std::istringstream ls(line);
            Eigen::Vector3d p;
            if (!(ls >> p.x() >> p.y() >> p.z())) throw std::runtime_error("csv: expected x,y,z: " + path);
            pts.push_back(p);
        }
    }
    Points3 m(pts.size(), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) m.row(i) = pts[i].transpose();
    return PointCloud(std::move(m));
}

}  // namespace i2p
