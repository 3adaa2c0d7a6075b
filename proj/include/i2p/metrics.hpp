#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "i2p/finematch.hpp"
#include "i2p/geom.hpp"
#include "i2p/pose.hpp"

namespace i2p {

struct MetricsThresholds {
    double tau_d = 1.0;   // pixels, inlier distance
    double tau_m = 0.10;  // inlier-ratio gate for FMR
    double tau_r = 10.0;  // degrees
    double tau_t = 5.0;   // meters
};

// fraction of correspondences whose ground-truth reprojection lies strictly
// within tau_d pixels; empty sets count as 0
inline double inlier_ratio(const CorrespondenceSet& c, const CameraIntrinsics& k, const RigidTransform& gt_pose,
                           double tau_d, double z_min = kDefaultZMin) {
    if (c.size() == 0) return 0.0;
    Eigen::Index inliers = 0;
    for (const auto& e : c.entries) {
        const auto d = reprojection_distance(k, gt_pose, e.point, e.pixel, z_min);
        if (d && *d < tau_d) ++inliers;
    }
    return double(inliers) / double(c.size());
}

// fraction of pairs with IR strictly above tau_m
inline double feature_matching_recall(const std::vector<double>& per_pair_irs, double tau_m) {
    if (per_pair_irs.empty()) throw std::invalid_argument("feature_matching_recall: empty list");
    Eigen::Index hits = 0;
    for (double ir : per_pair_irs)
        if (ir > tau_m) ++hits;
    return double(hits) / double(per_pair_irs.size());
}

// relative rotation error: Euler-decompose R^-1 R_gt, sum of absolute angles
inline double rre(const Eigen::Matrix3d& r, const Eigen::Matrix3d& r_gt) {
    const Eigen::Matrix3d rel = r.transpose() * r_gt;
    return rotation_to_euler(rel).degrees.cwiseAbs().sum();
}

inline double rte(const Eigen::Vector3d& t, const Eigen::Vector3d& t_gt) { return (t - t_gt).norm(); }

struct PairErrors {
    double rre = std::numeric_limits<double>::infinity();
    double rte = std::numeric_limits<double>::infinity();
};

// fraction with rre < tau_r and rte < tau_t
inline double registration_recall(const std::vector<PairErrors>& pairs, double tau_r, double tau_t) {
    if (pairs.empty()) throw std::invalid_argument("registration_recall: empty list");
    Eigen::Index hits = 0;
    for (const auto& p : pairs)
        if (p.rre < tau_r && p.rte < tau_t) ++hits;
    return double(hits) / double(pairs.size());
}

struct PairRecord {
    double ir = 0.0;
    double irr = 0.0;       // on the RANSAC-retained subset
    bool has_pose = false;  // failed registrations keep infinite errors
    double rre = std::numeric_limits<double>::infinity();
    double rte = std::numeric_limits<double>::infinity();
};

struct MetricsReport {
    double ir = 0.0, irr = 0.0;
    double fmr = 0.0, fmrr = 0.0;
    double rr = 0.0;
    double rre_mean = 0.0, rte_mean = 0.0;  // successful registrations only
    MetricsThresholds thresholds;
    std::vector<PairRecord> per_pair;
};

inline MetricsReport make_report(std::vector<PairRecord> records, const MetricsThresholds& th) {
    if (records.empty()) throw std::invalid_argument("make_report: empty record list");
    MetricsReport rep;
    rep.thresholds = th;
    const double m = double(records.size());
    Eigen::Index fmr_hits = 0, fmrr_hits = 0, successes = 0;
    double rre_acc = 0.0, rte_acc = 0.0;
    for (const auto& r : records) {
        rep.ir += r.ir / m;
        rep.irr += r.irr / m;
        if (r.ir > th.tau_m) ++fmr_hits;
        if (r.irr > th.tau_m) ++fmrr_hits;
        if (r.has_pose && r.rre < th.tau_r && r.rte < th.tau_t) {
            ++successes;
            rre_acc += r.rre;
            rte_acc += r.rte;
        }
    }
    rep.fmr = double(fmr_hits) / m;
    rep.fmrr = double(fmrr_hits) / m;
    rep.rr = double(successes) / m;
    rep.rre_mean = successes > 0 ? rre_acc / double(successes) : 0.0;
    rep.rte_mean = successes > 0 ? rte_acc / double(successes) : 0.0;
    rep.per_pair = std::move(records);
    return rep;
}

// single-condition recall sweeps (the RR curves relax one threshold at a time)
inline std::vector<double> recall_sweep_rotation(const std::vector<PairRecord>& records,
                                                 const std::vector<double>& taus) {
    std::vector<double> out;
    for (double tau : taus) {
        Eigen::Index hits = 0;
        for (const auto& r : records)
            if (r.has_pose && r.rre < tau) ++hits;
        out.push_back(double(hits) / double(records.size()));
    }
    return out;
}

inline std::vector<double> recall_sweep_translation(const std::vector<PairRecord>& records,
                                                    const std::vector<double>& taus) {
    std::vector<double> out;
    for (double tau : taus) {
        Eigen::Index hits = 0;
        for (const auto& r : records)
            if (r.has_pose && r.rte < tau) ++hits;
        out.push_back(double(hits) / double(records.size()));
    }
    return out;
}

}  // namespace i2p
