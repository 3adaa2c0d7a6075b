#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "i2p/cloud.hpp"
#include "i2p/geom.hpp"
#include "i2p/sampling.hpp"
#include "i2p/transport.hpp"

namespace i2p {

enum class ExtractionMode { Argmax, Expectation };

struct Correspondence {
    Pixel pixel;
    Eigen::Vector3d point;
    double confidence = 0.0;
    Eigen::Index proxy_index = -1;
};

struct CorrespondenceSet {
    std::vector<Correspondence> entries;

    Eigen::Index size() const { return static_cast<Eigen::Index>(entries.size()); }
};

// masked pairwise scores -> slack -> optimal transport; slack kept for the loss
inline ScoreMatrix fine_match(const FeatureMatrix& f_pixels, const FeatureMatrix& f_points,
                              const Eigen::VectorXd& mask_i, const Eigen::VectorXd& mask_p,
                              Eigen::Index sinkhorn_iters, double slack_value) {
    const ScoreMatrix d = pairwise_scores(f_pixels, f_points, f_pixels.cols(), mask_i, mask_p);
    return sinkhorn(add_slack(d, slack_value), sinkhorn_iters);
}

constexpr double kRenormEps = 1e-12;

// per-column probability readout of one fine plan; masked rows/columns are
// removed before renormalization, degenerate columns are dropped
inline std::vector<Correspondence> extract_correspondences(const ScoreMatrix& plan_aug, const SampleBatch& batch,
                                                           const PointCloud& cloud, ExtractionMode mode) {
    if (!plan_aug.has_slack) throw std::invalid_argument("extract_correspondences: expects augmented plan");
    const Eigen::Index m = static_cast<Eigen::Index>(batch.pixel_coords.size());
    const Eigen::Index n = static_cast<Eigen::Index>(batch.point_indices.size());
    if (plan_aug.values.rows() != m + 1 || plan_aug.values.cols() != n + 1)
        throw std::invalid_argument("extract_correspondences: plan/batch shape mismatch");

    std::vector<Correspondence> out;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (batch.point_mask(j) == 0.0) continue;
        Eigen::VectorXd col = plan_aug.values.col(j).head(m);
        col = (col.array() * batch.pixel_mask.array()).matrix();
        const double denom = col.sum();
        if (denom < kRenormEps) continue;
        col /= denom;

        Correspondence c;
        c.proxy_index = batch.proxy_index;
        c.point = cloud.point(batch.point_indices[j]);
        Eigen::Index best = 0;
        double best_p = -1.0;
        for (Eigen::Index i = 0; i < m; ++i)
            if (col(i) > best_p) {
                best_p = col(i);
                best = i;
            }
        if (mode == ExtractionMode::Argmax) {
            c.pixel = batch.pixel_coords[best];
        } else {
            double eu = 0.0, ev = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                eu += col(i) * batch.pixel_coords[i].u;
                ev += col(i) * batch.pixel_coords[i].v;
            }
            c.pixel = Pixel{eu, ev};
        }
        c.confidence = best_p;
        out.push_back(c);
    }
    return out;
}

// concatenation over matched proxies, filtered by the confidence floor
inline CorrespondenceSet collect(const std::vector<SampleBatch>& batches, const std::vector<ScoreMatrix>& plans,
                                 const PointCloud& cloud, ExtractionMode mode, double confidence_floor = 0.0) {
    if (batches.size() != plans.size()) throw std::invalid_argument("collect: batch/plan list mismatch");
    CorrespondenceSet set;
    for (std::size_t b = 0; b < batches.size(); ++b)
        for (auto& c : extract_correspondences(plans[b], batches[b], cloud, mode))
            if (c.confidence >= confidence_floor) set.entries.push_back(c);
    return set;
}

// CSV: u,v,x,y,z,confidence,proxy
inline void save_correspondences(const std::string& path, const CorrespondenceSet& set) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os.precision(17);
    os << "u,v,x,y,z,confidence,proxy\n";
    for (const auto& c : set.entries)
        os << c.pixel.u << ',' << c.pixel.v << ',' << c.point.x() << ',' << c.point.y() << ',' << c.point.z()
           << ',' << c.confidence << ',' << c.proxy_index << '\n';
}

inline CorrespondenceSet load_correspondences(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("correspondence csv: empty file: " + path);
    CorrespondenceSet set;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        Correspondence c;
        if (!(ls >> c.pixel.u >> c.pixel.v >> c.point.x() >> c.point.y() >> c.point.z() >> c.confidence >>
              c.proxy_index))
            throw std::runtime_error("correspondence csv: bad row: " + path);
        set.entries.push_back(c);
    }
    return set;
}

}  // namespace i2p
