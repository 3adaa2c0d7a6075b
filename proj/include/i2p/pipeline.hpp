#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "i2p/attention.hpp"
#include "i2p/cloud.hpp"
#include "i2p/finematch.hpp"
#include "i2p/geom.hpp"
#include "i2p/metrics.hpp"
#include "i2p/pose.hpp"
#include "i2p/rng.hpp"
#include "i2p/sampling.hpp"
#include "i2p/supervision.hpp"
#include "i2p/transport.hpp"

namespace i2p {

enum class FeatureMode { Oracle, Random };
enum class WeightProfile { PassThrough, Gaussian };
enum class SampleFrom { GroundTruth, Predicted };

struct PipelineConfig {
    // scene scale
    Eigen::Index cloud_size = 4096;
    std::array<Eigen::Index, 2> level_counts{128, 32};
    int image_width = 128;     // raw image width
    int image_height = 40;     // raw image height
    int image_downsample = 1;  // matching runs on the grid = raw / downsample
    int patch = 8;             // w

    // intrinsics at grid scale; negative principal point means grid center
    double fx = 64.0, fy = 64.0;
    double cx = -1.0, cy = -1.0;

    // coarse-to-fine sampling
    Eigen::Index points_per_proxy = 65;  // n
    Eigen::Index patches_per_proxy = 3;  // k

    // features and attention
    Eigen::Index channels = 64;  // d
    Eigen::Index proxy_rounds = 2;
    Eigen::Index fine_rounds = 1;
    Eigen::Index knn = 8;
    bool second_level_cross_attention = false;
    bool add_pixel_position_embeddings = false;
    FeatureMode feature_mode = FeatureMode::Oracle;
    WeightProfile weight_profile = WeightProfile::PassThrough;
    double feature_gain = 3.0;

    // transport
    Eigen::Index sinkhorn_iters = 100;
    double slack_value = 1.0;
    double tau_c = 0.01;

    // supervision
    double tau = 1.0;  // fine positive-pair threshold, pixels

    // pose solving
    Eigen::Index ransac_iters = 500;
    double inlier_gate = 1.0;

    // evaluation
    MetricsThresholds thresholds;

    // matching behavior
    ExtractionMode extraction = ExtractionMode::Argmax;
    SampleFrom sample_from = SampleFrom::Predicted;
    double confidence_floor = 0.0;

    // scene generation
    double max_translation = 10.0;
    bool randomize_rotation = true;
    UpAxis up_axis = UpAxis::Y;
    double min_frustum_fraction = 0.30;
    int max_scene_retries = 20;
    Eigen::Index fps_start = 0;
    double z_min = kDefaultZMin;
    std::uint64_t seed = 0;

    int grid_width() const { return image_width / image_downsample; }
    int grid_height() const { return image_height / image_downsample; }

    CameraIntrinsics intrinsics() const {
        const double px = cx >= 0.0 ? cx : grid_width() / 2.0;
        const double py = cy >= 0.0 ? cy : grid_height() / 2.0;
        return CameraIntrinsics(fx, fy, px, py, grid_width(), grid_height());
    }

    PatchLayout layout() const { return PatchLayout(grid_width(), grid_height(), patch); }

    void validate() const {
        if (cloud_size < 1 || level_counts[0] < 1 || level_counts[1] < 1 || patch < 1 || channels < 2 ||
            points_per_proxy < 1 || patches_per_proxy < 1 || sinkhorn_iters < 1 || ransac_iters < 1 ||
            proxy_rounds < 0 || fine_rounds < 0 || knn < 1 || image_downsample < 1)
            throw std::invalid_argument("pipeline config: counts must be positive");
        if (!(cloud_size >= level_counts[0] && level_counts[0] >= level_counts[1]))
            throw std::invalid_argument("pipeline config: need N >= n1 >= n2");
        if (image_width % image_downsample != 0 || image_height % image_downsample != 0)
            throw std::invalid_argument("pipeline config: downsample must divide image dims");
        if (grid_width() % patch != 0 || grid_height() % patch != 0)
            throw std::invalid_argument("pipeline config: patch side must divide grid dims");
        if (channels % 2 != 0) throw std::invalid_argument("pipeline config: channels must be even");
        if (knn > level_counts[1]) throw std::invalid_argument("pipeline config: knn exceeds proxy count");
        if (tau_c < 0.0 || tau <= 0.0 || inlier_gate <= 0.0)
            throw std::invalid_argument("pipeline config: thresholds must be positive");
    }

    // KITTI-shape configuration: the matching grid is the x4-downsampled image
    static PipelineConfig paper_scale() {
        PipelineConfig c;
        c.cloud_size = 40960;
        c.level_counts = {1280, 256};
        c.image_width = 512;
        c.image_height = 160;
        c.image_downsample = 4;
        c.second_level_cross_attention = true;
        return c;
    }
};

struct SyntheticScene {
    PointCloud cloud;
    CameraIntrinsics intrinsics;
    RigidTransform gt_pose;
    PatchLayout patch_layout;
    std::uint64_t seed = 0;
};

namespace detail {

inline RigidTransform make_gt_pose(Rng& rng, const PipelineConfig& cfg) {
    if (cfg.max_translation > 0.0 && cfg.randomize_rotation)
        return random_pose(rng, cfg.max_translation, cfg.up_axis);
    const double angle = cfg.randomize_rotation ? rng.uniform(-M_PI, M_PI) : 0.0;
    const int up = static_cast<int>(cfg.up_axis);
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    axis[up] = 1.0;
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    if (cfg.max_translation > 0.0) {
        const double radius = cfg.max_translation * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        t[(up + 1) % 3] = radius * std::cos(phi);
        t[(up + 2) % 3] = radius * std::sin(phi);
    }
    return RigidTransform(Eigen::AngleAxisd(angle, axis).toRotationMatrix(), t);
}

}  // namespace detail

// camera-frame layout: blobs and a far ground strip inside the frustum, a
// compact far population behind the camera; the cloud is then de-posed so the
// ground-truth pose re-aligns it
inline SyntheticScene generate_scene(const PipelineConfig& cfg, Rng& rng) {
    cfg.validate();
    const CameraIntrinsics k = cfg.intrinsics();

    for (int attempt = 0; attempt < cfg.max_scene_retries; ++attempt) {
        const Eigen::Index n = cfg.cloud_size;
        const Eigen::Index n_ground = static_cast<Eigen::Index>(0.10 * double(n));
        const Eigen::Index n_behind = static_cast<Eigen::Index>(0.30 * double(n));
        const Eigen::Index n_blob_pts = n - n_ground - n_behind;

        // blob centers: pixel-targeted, depth-spread, mutually separated
        const Eigen::Index n_blobs =
            std::max<Eigen::Index>(3, std::min<Eigen::Index>(24, (n_blob_pts + 64) / 130));
        std::vector<Eigen::Vector3d> blob_centers;
        std::vector<double> blob_sigma;
        const double margin = 8.0;
        for (Eigen::Index b = 0; b < n_blobs; ++b) {
            Eigen::Vector3d c;
            for (int tries = 0; tries < 60; ++tries) {
                const double z = rng.uniform(7.0, 32.0);
                const double u = rng.uniform(margin, double(k.width) - margin);
                const double v = rng.uniform(margin, double(k.height) - margin);
                c = Eigen::Vector3d((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
                bool separated = true;
                for (const auto& prev : blob_centers)
                    if ((prev - c).norm() < 9.0) separated = false;
                if (separated) break;
            }
            blob_centers.push_back(c);
            blob_sigma.push_back(0.8 * c.z() / (k.fx * 1.4));
        }

        Points3 cam(n, 3);
        Eigen::Index row = 0;
        for (Eigen::Index i = 0; i < n_blob_pts; ++i, ++row) {
            const Eigen::Index b = i % n_blobs;
            cam.row(row) = (blob_centers[b] +
                            blob_sigma[b] * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()))
                               .transpose();
        }
        for (Eigen::Index i = 0; i < n_ground; ++i, ++row) {
            const double z = rng.uniform(26.0, 34.0);
            const double x = rng.uniform(-10.0, 10.0);
            cam.row(row) = Eigen::RowVector3d(x, 3.0 + 0.03 * rng.normal(), z);
        }
        for (Eigen::Index i = 0; i < n_behind; ++i, ++row) {
            cam.row(row) = Eigen::RowVector3d(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0),
                                              rng.uniform(-30.0, -22.0));
        }

        const auto visible = project_cloud(k, RigidTransform::identity(), cam, cfg.z_min);
        if (double(visible.size()) < cfg.min_frustum_fraction * double(n)) continue;

        const RigidTransform gt = detail::make_gt_pose(rng, cfg);
        const RigidTransform unpose = invert(gt);
        Points3 world(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) world.row(i) = unpose.apply(cam.row(i).transpose()).transpose();

        return SyntheticScene{PointCloud(std::move(world)), k, gt, cfg.layout(), cfg.seed};
    }
    throw std::runtime_error("generate_scene: retries exhausted without hitting the frustum fraction");
}

struct SceneFeatures {
    FeatureMatrix pixel_features;  // grid pixels, row-major v*W+u
    FeatureMatrix point_features;  // per cloud point
};

namespace detail {

// two-axis embedding: u in the leading channels, v in the rest
inline Eigen::RowVectorXd embed2d(double u, double v, Eigen::Index d, double base) {
    Eigen::Index du = d / 2;
    if (du % 2 != 0) ++du;
    const Eigen::Index dv = d - du;
    Eigen::RowVectorXd row(d);
    for (Eigen::Index i = 0; i < du / 2; ++i) {
        const double freq = std::pow(base, 2.0 * double(i) / double(du));
        row(2 * i) = std::sin(u / freq);
        row(2 * i + 1) = std::cos(u / freq);
    }
    for (Eigen::Index i = 0; i < dv / 2; ++i) {
        const double freq = std::pow(base, 2.0 * double(i) / double(dv));
        row(du + 2 * i) = std::sin(v / freq);
        row(du + 2 * i + 1) = std::cos(v / freq);
    }
    return row;
}

}  // namespace detail

// oracle mode keys every feature to ground-truth projection geometry so that
// true matches maximize inner products without any training; frequencies are
// image-scaled. Unprojectable points carry a zero feature so their scores
// vanish exactly and the transport slack absorbs them.
inline SceneFeatures oracle_features(const SyntheticScene& scene, FeatureMode mode, Eigen::Index d, Rng& rng,
                                     double gain = 3.0, double z_min = kDefaultZMin) {
    if (d < 2 || d % 2 != 0) throw std::invalid_argument("oracle_features: d must be even");
    const int w = scene.intrinsics.width, h = scene.intrinsics.height;
    SceneFeatures f;
    f.pixel_features.resize(Eigen::Index(w) * h, d);
    f.point_features.resize(scene.cloud.size(), d);

    if (mode == FeatureMode::Random) {
        for (Eigen::Index i = 0; i < f.pixel_features.rows(); ++i)
            for (Eigen::Index c = 0; c < d; ++c) f.pixel_features(i, c) = rng.normal();
        for (Eigen::Index i = 0; i < f.point_features.rows(); ++i)
            for (Eigen::Index c = 0; c < d; ++c) f.point_features(i, c) = rng.normal();
        return f;
    }

    const double base = 2.0 * std::max(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            f.pixel_features.row(Eigen::Index(v) * w + u) = gain * detail::embed2d(u, v, d, base);
    for (Eigen::Index i = 0; i < scene.cloud.size(); ++i) {
        const auto px = project_point(scene.intrinsics, scene.gt_pose, scene.cloud.point(i), z_min);
        if (px)
            f.point_features.row(i) = gain * detail::embed2d(px->u, px->v, d, base);
        else
            f.point_features.row(i).setZero();
    }
    return f;
}

struct PipelineResult {
    HierarchicalDecomposition hierarchy;
    ProxyDecomposition composed;
    FeatureMatrix pixel_proxies;  // after proxy learning
    FeatureMatrix point_proxies;
    ScoreMatrix coarse_plan_aug;
    ScoreMatrix coarse_scores;  // stripped + thresholded
    CoarseWeightMatrix coarse_weights;
    double coarse_loss_value = 0.0;
    std::vector<Eigen::Index> matched_proxies;
    std::vector<SampleBatch> batches;
    std::vector<ScoreMatrix> fine_plans;  // augmented
    std::vector<FineWeightMatrix> fine_weights;
    double fine_loss_value = 0.0;
    CorrespondenceSet correspondences;
    std::optional<PoseEstimate> pose;
    PairRecord pair_record;
    MetricsReport report;
};

namespace detail {

struct StageParams {
    VectorAttentionParams aggregate_l1, aggregate_l2, point_self;
    AttentionParams pixel_self, pixel_cross, point_cross, l2_pixel_cross, l2_point_cross, fine_pixel, fine_point;
};

inline StageParams make_stage_params(const PipelineConfig& cfg) {
    const Eigen::Index d = cfg.channels;
    if (cfg.weight_profile == WeightProfile::PassThrough) {
        return StageParams{VectorAttentionParams::pass_through(d),
                           VectorAttentionParams::pass_through(d),
                           VectorAttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d),
                           AttentionParams::pass_through(d)};
    }
    Rng wrng = Rng::stream(cfg.seed, 0xA77E);
    const double scale = 1.0 / std::sqrt(double(d));
    return StageParams{VectorAttentionParams::gaussian(wrng, d, d, scale),
                       VectorAttentionParams::gaussian(wrng, d, d, scale),
                       VectorAttentionParams::gaussian(wrng, d, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale),
                       AttentionParams::gaussian(wrng, d, scale)};
}

inline FeatureMatrix gather_rows(const FeatureMatrix& src, const std::vector<Eigen::Index>& rows) {
    FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    return out;
}

inline Points3 gather_points(const Points3& src, const std::vector<Eigen::Index>& rows) {
    Points3 out(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    return out;
}

}  // namespace detail

inline PipelineResult run_pipeline(const SyntheticScene& scene, const PipelineConfig& cfg) {
    cfg.validate();
    const CameraIntrinsics& k = scene.intrinsics;
    const PatchLayout& layout = scene.patch_layout;
    const Eigen::Index d = cfg.channels;
    const int grid_w = k.width;

    PipelineResult r;

    Rng feat_rng = Rng::stream(cfg.seed, 0xFEA7);
    const SceneFeatures features = oracle_features(scene, cfg.feature_mode, d, feat_rng, cfg.feature_gain,
                                                   cfg.z_min);
    const detail::StageParams params = detail::make_stage_params(cfg);

    // proxy generation: two grouping levels on the cloud, patch pooling on the grid
    r.hierarchy = hierarchical_decompose(scene.cloud, cfg.level_counts, cfg.fps_start);
    r.composed = composed_decomposition(r.hierarchy);

    const Points3 centers1 = detail::gather_points(scene.cloud.points, r.hierarchy.level1.center_indices);
    const FeatureMatrix f_centers1 = detail::gather_rows(features.point_features, r.hierarchy.level1.center_indices);
    FeatureMatrix f_l1 = attentive_aggregate(r.hierarchy.level1, centers1, scene.cloud.points, f_centers1,
                                             features.point_features, params.aggregate_l1);

    const Points3 centers2 = detail::gather_points(centers1, r.hierarchy.level2.center_indices);
    const FeatureMatrix f_centers2 = detail::gather_rows(f_l1, r.hierarchy.level2.center_indices);
    FeatureMatrix f_q = attentive_aggregate(r.hierarchy.level2, centers2, centers1, f_centers2, f_l1,
                                            params.aggregate_l2);

    const Eigen::Index n_patches = layout.patch_count();
    FeatureMatrix f_i(n_patches, d);
    for (Eigen::Index p = 0; p < n_patches; ++p) {
        const Pixel origin = layout.patch_origin(static_cast<int>(p));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
        for (int vy = 0; vy < layout.patch; ++vy)
            for (int ux = 0; ux < layout.patch; ++ux)
                acc += features.pixel_features.row(Eigen::Index(origin.v + vy) * grid_w +
                                                   Eigen::Index(origin.u + ux));
        f_i.row(p) = acc / double(layout.patch * layout.patch);
    }
    if (cfg.add_pixel_position_embeddings) f_i += sinusoidal_pe(n_patches, d);

    // proxy learning: alternating self and cross attention
    for (Eigen::Index round = 0; round < cfg.proxy_rounds; ++round) {
        f_i = scalar_attention(params.pixel_self, f_i, f_i);
        f_q = point_transformer_layer(centers2, f_q, cfg.knn, params.point_self);
        f_i = scalar_attention(params.pixel_cross, f_i, f_q);
        f_q = scalar_attention(params.point_cross, f_q, f_i);
    }
    r.pixel_proxies = f_i;
    r.point_proxies = f_q;

    // coarse matching
    const ScoreMatrix coarse_d = pairwise_scores(f_i, f_q, d);
    r.coarse_plan_aug = sinkhorn(add_slack(coarse_d, cfg.slack_value), cfg.sinkhorn_iters);
    r.coarse_scores = strip_slack_and_threshold(r.coarse_plan_aug, cfg.tau_c);

    // coarse supervision
    const auto [r_left, r_right] = coarse_ratios(k, scene.gt_pose, scene.cloud, r.composed, layout, cfg.z_min);
    r.coarse_weights = coarse_weight_matrix(r_left, r_right);
    r.coarse_loss_value = coarse_loss(r.coarse_plan_aug, r.coarse_weights);

    // sampling reference: predicted plan or ground-truth score pattern
    ScoreMatrix sample_source;
    if (cfg.sample_from == SampleFrom::GroundTruth) {
        sample_source.has_slack = false;
        sample_source.values =
            r.coarse_weights.values.topLeftCorner(n_patches, r.composed.center_count());
    } else {
        sample_source = r.coarse_scores;
    }
    r.matched_proxies = select_matched_proxies(sample_source);

    // optional second-level exchange between mid-level point features and the grid
    FeatureMatrix pixel_map = features.pixel_features;
    if (cfg.second_level_cross_attention) {
        f_l1 = scalar_attention(params.l2_point_cross, f_l1, pixel_map);
        pixel_map = scalar_attention(params.l2_pixel_cross, pixel_map, f_l1);
    }

    // fine stage per matched proxy
    for (Eigen::Index j : r.matched_proxies) {
        Rng batch_rng = Rng::stream(cfg.seed ^ 0x5A3C17ULL, static_cast<std::uint64_t>(j));
        SampleBatch batch = make_sample_batch(r.composed, sample_source, j, cfg.points_per_proxy,
                                              cfg.patches_per_proxy, layout, batch_rng);

        FeatureMatrix f_pts = detail::gather_rows(features.point_features, batch.point_indices);
        FeatureMatrix f_pix(batch.pixel_coords.size(), d);
        for (std::size_t i = 0; i < batch.pixel_coords.size(); ++i)
            f_pix.row(static_cast<Eigen::Index>(i)) =
                pixel_map.row(Eigen::Index(batch.pixel_coords[i].v) * grid_w + Eigen::Index(batch.pixel_coords[i].u));

        for (Eigen::Index round = 0; round < cfg.fine_rounds; ++round) {
            f_pix = masked_cross_attention(params.fine_pixel, f_pix, f_pts, batch.pixel_mask, batch.point_mask);
            f_pts = masked_cross_attention(params.fine_point, f_pts, f_pix, batch.point_mask, batch.pixel_mask);
        }

        r.fine_plans.push_back(
            fine_match(f_pix, f_pts, batch.pixel_mask, batch.point_mask, cfg.sinkhorn_iters, cfg.slack_value));
        r.fine_weights.push_back(fine_weight_matrix(batch, k, scene.gt_pose, scene.cloud, cfg.tau, cfg.z_min));
        r.batches.push_back(std::move(batch));
    }
    r.fine_loss_value = fine_loss(r.fine_plans, r.fine_weights);

    r.correspondences = collect(r.batches, r.fine_plans, scene.cloud, cfg.extraction, cfg.confidence_floor);

    // registration and the per-pair record
    if (r.correspondences.size() >= 4) {
        Rng pose_rng = Rng::stream(cfg.seed ^ 0x905EULL, 0);
        r.pose = ransac_pnp(r.correspondences, k, cfg.ransac_iters, cfg.inlier_gate, pose_rng);
    }
    r.pair_record.ir = inlier_ratio(r.correspondences, k, scene.gt_pose, cfg.thresholds.tau_d, cfg.z_min);
    if (r.pose) {
        CorrespondenceSet retained;
        for (Eigen::Index idx : r.pose->inlier_indices) retained.entries.push_back(r.correspondences.entries[idx]);
        r.pair_record.irr = inlier_ratio(retained, k, scene.gt_pose, cfg.thresholds.tau_d, cfg.z_min);
        r.pair_record.has_pose = true;
        r.pair_record.rre = rre(r.pose->transform.rotation(), scene.gt_pose.rotation());
        r.pair_record.rte = rte(r.pose->transform.translation(), scene.gt_pose.translation());
    }
    r.report = make_report({r.pair_record}, cfg.thresholds);
    return r;
}

// ---- configuration and scene serialization ----

// <base>.json carries the intrinsics as a flat row-major 3x3 block plus
// width/height; the cloud and pose live in sibling files
inline void save_scene(const std::string& base, const SyntheticScene& scene) {
    save_cloud(base + "_cloud.ply", scene.cloud);
    save_pose(base + "_pose.txt", scene.gt_pose);
    nlohmann::json j;
    const Eigen::Matrix3d km = scene.intrinsics.matrix();
    std::vector<double> flat;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) flat.push_back(km(r, c));
    j["intrinsics"] = flat;
    j["width"] = scene.intrinsics.width;
    j["height"] = scene.intrinsics.height;
    j["patch"] = scene.patch_layout.patch;
    j["seed"] = scene.seed;
    j["cloud_file"] = base + "_cloud.ply";
    j["pose_file"] = base + "_pose.txt";
    std::ofstream os(base + ".json");
    if (!os) throw std::runtime_error("cannot open for write: " + base + ".json");
    os << j.dump(2) << '\n';
}

inline SyntheticScene load_scene(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw std::runtime_error("cannot open for read: " + json_path);
    const nlohmann::json j = nlohmann::json::parse(is);
    const auto flat = j.at("intrinsics").get<std::vector<double>>();
    if (flat.size() != 9) throw std::runtime_error("scene json: intrinsics must hold 9 reals");
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    CameraIntrinsics k(flat[0], flat[4], flat[2], flat[5], width, height);
    PointCloud cloud = load_cloud(j.at("cloud_file").get<std::string>());
    RigidTransform pose = load_pose(j.at("pose_file").get<std::string>());
    return SyntheticScene{std::move(cloud), k, pose, PatchLayout(width, height, j.at("patch").get<int>()),
                          j.at("seed").get<std::uint64_t>()};
}

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = nlohmann::json{{"cloud_size", c.cloud_size},
                       {"level_counts", {c.level_counts[0], c.level_counts[1]}},
                       {"image_width", c.image_width},
                       {"image_height", c.image_height},
                       {"image_downsample", c.image_downsample},
                       {"patch", c.patch},
                       {"fx", c.fx},
                       {"fy", c.fy},
                       {"cx", c.cx},
                       {"cy", c.cy},
                       {"points_per_proxy", c.points_per_proxy},
                       {"patches_per_proxy", c.patches_per_proxy},
                       {"channels", c.channels},
                       {"proxy_rounds", c.proxy_rounds},
                       {"fine_rounds", c.fine_rounds},
                       {"knn", c.knn},
                       {"second_level_cross_attention", c.second_level_cross_attention},
                       {"add_pixel_position_embeddings", c.add_pixel_position_embeddings},
                       {"feature_mode", c.feature_mode == FeatureMode::Oracle ? "oracle" : "random"},
                       {"weight_profile",
                        c.weight_profile == WeightProfile::PassThrough ? "pass_through" : "gaussian"},
                       {"feature_gain", c.feature_gain},
                       {"sinkhorn_iters", c.sinkhorn_iters},
                       {"slack_value", c.slack_value},
                       {"tau_c", c.tau_c},
                       {"tau", c.tau},
                       {"ransac_iters", c.ransac_iters},
                       {"inlier_gate", c.inlier_gate},
                       {"tau_d", c.thresholds.tau_d},
                       {"tau_m", c.thresholds.tau_m},
                       {"tau_r", c.thresholds.tau_r},
                       {"tau_t", c.thresholds.tau_t},
                       {"extraction", c.extraction == ExtractionMode::Argmax ? "argmax" : "expectation"},
                       {"sample_from", c.sample_from == SampleFrom::GroundTruth ? "ground_truth" : "predicted"},
                       {"confidence_floor", c.confidence_floor},
                       {"max_translation", c.max_translation},
                       {"randomize_rotation", c.randomize_rotation},
                       {"up_axis", static_cast<int>(c.up_axis)},
                       {"min_frustum_fraction", c.min_frustum_fraction},
                       {"max_scene_retries", c.max_scene_retries},
                       {"fps_start", c.fps_start},
                       {"z_min", c.z_min},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("cloud_size", c.cloud_size);
    if (j.contains("level_counts")) {
        c.level_counts[0] = j.at("level_counts").at(0).get<Eigen::Index>();
        c.level_counts[1] = j.at("level_counts").at(1).get<Eigen::Index>();
    }
    get("image_width", c.image_width);
    get("image_height", c.image_height);
    get("image_downsample", c.image_downsample);
    get("patch", c.patch);
    get("fx", c.fx);
    get("fy", c.fy);
    get("cx", c.cx);
    get("cy", c.cy);
    get("points_per_proxy", c.points_per_proxy);
    get("patches_per_proxy", c.patches_per_proxy);
    get("channels", c.channels);
    get("proxy_rounds", c.proxy_rounds);
    get("fine_rounds", c.fine_rounds);
    get("knn", c.knn);
    get("second_level_cross_attention", c.second_level_cross_attention);
    get("add_pixel_position_embeddings", c.add_pixel_position_embeddings);
    if (j.contains("feature_mode"))
        c.feature_mode = j.at("feature_mode") == "random" ? FeatureMode::Random : FeatureMode::Oracle;
    if (j.contains("weight_profile"))
        c.weight_profile =
            j.at("weight_profile") == "gaussian" ? WeightProfile::Gaussian : WeightProfile::PassThrough;
    get("feature_gain", c.feature_gain);
    get("sinkhorn_iters", c.sinkhorn_iters);
    get("slack_value", c.slack_value);
    get("tau_c", c.tau_c);
    get("tau", c.tau);
    get("ransac_iters", c.ransac_iters);
    get("inlier_gate", c.inlier_gate);
    get("tau_d", c.thresholds.tau_d);
    get("tau_m", c.thresholds.tau_m);
    get("tau_r", c.thresholds.tau_r);
    get("tau_t", c.thresholds.tau_t);
    if (j.contains("extraction"))
        c.extraction = j.at("extraction") == "expectation" ? ExtractionMode::Expectation : ExtractionMode::Argmax;
    if (j.contains("sample_from"))
        c.sample_from = j.at("sample_from") == "ground_truth" ? SampleFrom::GroundTruth : SampleFrom::Predicted;
    get("confidence_floor", c.confidence_floor);
    get("max_translation", c.max_translation);
    get("randomize_rotation", c.randomize_rotation);
    if (j.contains("up_axis")) c.up_axis = static_cast<UpAxis>(j.at("up_axis").get<int>());
    get("min_frustum_fraction", c.min_frustum_fraction);
    get("max_scene_retries", c.max_scene_retries);
    get("fps_start", c.fps_start);
    get("z_min", c.z_min);
    get("seed", c.seed);
}

}  // namespace i2p
