#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "i2p/rng.hpp"

namespace i2p {

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

constexpr double kDefaultZMin = 1e-6;
constexpr double kRotationTol = 1e-9;

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

struct CameraIntrinsics {
    double fx, fy;
    double cx, cy;
    int width, height;

    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
        if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image extent must be positive");
    }

    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
        k(0, 0) = fx;
        k(1, 1) = fy;
        k(0, 2) = cx;
        k(1, 2) = cy;
        return k;
    }
};

class RigidTransform {
public:
    RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

    RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
        : rotation_(rotation), translation_(translation) {
        const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        if (ortho > kRotationTol || rotation.determinant() < 0.0)
            throw std::invalid_argument("rigid transform: rotation must be orthonormal with det +1");
        if (!translation.allFinite()) throw std::invalid_argument("rigid transform: translation must be finite");
    }

    static RigidTransform identity() { return RigidTransform(); }

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

    // row-major 3x4 [R|t]
    Eigen::Matrix<double, 3, 4> matrix34() const {
        Eigen::Matrix<double, 3, 4> m;
        m.leftCols<3>() = rotation_;
        m.col(3) = translation_;
        return m;
    }

private:
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
};

// compose(a, b) applies b first: result(p) == a(b(p))
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

inline RigidTransform invert(const RigidTransform& t) {
    Eigen::Matrix3d rt = t.rotation().transpose();
    return RigidTransform(rt, -(rt * t.translation()));
}

inline std::optional<Pixel> project_point(const CameraIntrinsics& k, const RigidTransform& t,
                                          const Eigen::Vector3d& p, double z_min = kDefaultZMin) {
    if (!p.allFinite()) throw std::invalid_argument("project_point: point must be finite");
    const Eigen::Vector3d c = t.apply(p);
    if (c.z() <= z_min) return std::nullopt;
    return Pixel{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

// in-frustum points only: z > z_min and pixel in [0,width) x [0,height); indices increasing
inline std::vector<std::pair<Eigen::Index, Pixel>> project_cloud(const CameraIntrinsics& k,
                                                                 const RigidTransform& t,
                                                                 const Points3& points,
                                                                 double z_min = kDefaultZMin) {
    if (points.rows() == 0) throw std::invalid_argument("project_cloud: empty cloud");
    std::vector<std::pair<Eigen::Index, Pixel>> out;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto px = project_point(k, t, points.row(i).transpose(), z_min);
        if (!px) continue;
        if (px->u >= 0.0 && px->u < k.width && px->v >= 0.0 && px->v < k.height) out.emplace_back(i, *px);
    }
    return out;
}

struct EulerAngles {
    Eigen::Vector3d degrees;  // intrinsic X-then-Y-then-Z
    bool gimbal_lock = false;
};

// R = Rx(a) * Ry(b) * Rz(c), angles in degrees
inline Eigen::Matrix3d euler_to_rotation(const Eigen::Vector3d& degrees) {
    const double a = deg2rad(degrees.x()), b = deg2rad(degrees.y()), c = deg2rad(degrees.z());
    Eigen::Matrix3d rx, ry, rz;
    rx << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
    rz << std::cos(c), -std::sin(c), 0, std::sin(c), std::cos(c), 0, 0, 0, 1;
    return rx * ry * rz;
}

inline EulerAngles rotation_to_euler(const Eigen::Matrix3d& r) {
    EulerAngles e;
    const double sy = r(0, 2);
    if (std::abs(sy) > 1.0 - kRotationTol) {
        // degenerate branch: b = +-90 deg, split is not unique; fix c = 0
        e.gimbal_lock = true;
        const double b = sy > 0.0 ? M_PI / 2.0 : -M_PI / 2.0;
        const double a = sy > 0.0 ? std::atan2(r(1, 0), r(1, 1)) : std::atan2(-r(1, 0), r(1, 1));
        e.degrees = Eigen::Vector3d(rad2deg(a), rad2deg(b), 0.0);
        return e;
    }
    const double b = std::asin(std::clamp(sy, -1.0, 1.0));
    const double a = std::atan2(-r(1, 2), r(2, 2));
    const double c = std::atan2(-r(0, 1), r(0, 0));
    e.degrees = Eigen::Vector3d(rad2deg(a), rad2deg(b), rad2deg(c));
    return e;
}

enum class UpAxis { X = 0, Y = 1, Z = 2 };

// rotation about up_axis only, translation in the orthogonal ground plane,
// translation norm <= max_translation
inline RigidTransform random_pose(Rng& rng, double max_translation = 10.0, UpAxis up_axis = UpAxis::Y) {
    if (max_translation <= 0.0) throw std::invalid_argument("random_pose: max_translation must be positive");
    const double angle = rng.uniform(-M_PI, M_PI);
    const int up = static_cast<int>(up_axis);
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    axis[up] = 1.0;
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(angle, axis).toRotationMatrix();

    // uniform over the disk of radius max_translation in the ground plane
    const double radius = max_translation * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    t[(up + 1) % 3] = radius * std::cos(phi);
    t[(up + 2) % 3] = radius * std::sin(phi);
    return RigidTransform(rot, t);
}

struct PatchLayout {
    int width = 0;   // image width in pixels
    int height = 0;  // image height in pixels
    int patch = 8;   // w, patch side

    PatchLayout() = default;
    PatchLayout(int width_, int height_, int patch_) : width(width_), height(height_), patch(patch_) {
        if (patch <= 0 || width <= 0 || height <= 0 || width % patch != 0 || height % patch != 0)
            throw std::invalid_argument("patch layout: patch side must divide both image dims");
    }

    int patches_x() const { return width / patch; }
    int patches_y() const { return height / patch; }
    int patch_count() const { return patches_x() * patches_y(); }

    // patch owning a pixel coordinate; caller guarantees 0<=u<width, 0<=v<height
    int patch_index_of(double u, double v) const {
        const int col = static_cast<int>(std::floor(u / patch));
        const int row = static_cast<int>(std::floor(v / patch));
        return row * patches_x() + col;
    }

    // top-left corner of a patch; the patch covers [u0,u0+w) x [v0,v0+w)
    Pixel patch_origin(int index) const {
        const int row = index / patches_x();
        const int col = index % patches_x();
        return Pixel{static_cast<double>(col * patch), static_cast<double>(row * patch)};
    }

    bool patch_contains(int index, double u, double v) const {
        const Pixel o = patch_origin(index);
        return u >= o.u && u < o.u + patch && v >= o.v && v < o.v + patch;
    }
};

// KITTI-style line: 12 whitespace-separated reals, row-major 3x4 [R|t]
inline std::string format_pose_line(const RigidTransform& t) {
    const auto m = t.matrix34();
    std::ostringstream os;
    os.precision(17);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) {
            if (r != 0 || c != 0) os << ' ';
            os << m(r, c);
        }
    return os.str();
}

inline RigidTransform parse_pose_line(const std::string& line) {
    std::istringstream is(line);
    Eigen::Matrix<double, 3, 4> m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
            if (!(is >> m(r, c))) throw std::runtime_error("pose line: expected 12 reals");
    return RigidTransform(m.leftCols<3>(), m.col(3));
}

inline void save_pose(const std::string& path, const RigidTransform& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << format_pose_line(t) << '\n';
}

inline RigidTransform load_pose(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    std::string line;
    std::getline(is, line);
    return parse_pose_line(line);
}

}  // namespace i2p
