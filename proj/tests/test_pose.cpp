#include <catch2/catch_amalgamated.hpp>

#include "i2p/metrics.hpp"
#include "i2p/pose.hpp"
#include "oracles.hpp"

using namespace i2p;

namespace {

const CameraIntrinsics wide_k(64, 64, 64, 20, 1000000, 1000000);

// noise-free instance: world points that sit in front of the camera under T
struct PnpInstance {
    Points3 world;
    std::vector<Pixel> pixels;
    RigidTransform pose;
};

PnpInstance make_instance(Rng& rng, Eigen::Index n, bool planar = false) {
    PnpInstance inst;
    inst.pose = oracle::random_transform(rng, 3.0);
    const RigidTransform back = invert(inst.pose);
    inst.world.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Vector3d cam(rng.uniform(-8.0, 8.0), rng.uniform(-5.0, 5.0), rng.uniform(4.0, 30.0));
        if (planar) cam.y() = 0.3 * cam.x() + 0.1 * cam.z() + 2.0;  // a tilted plane in camera frame
        inst.world.row(i) = back.apply(cam).transpose();
        const auto px = project_point(wide_k, inst.pose, inst.world.row(i).transpose());
        REQUIRE(px);
        inst.pixels.push_back(*px);
    }
    return inst;
}

}  // namespace

TEST_CASE("epnp recovers exact poses") {
    SECTION("identity pose") {
        Rng rng(1);
        PnpInstance inst;
        inst.pose = RigidTransform::identity();
        inst.world.resize(6, 3);
        for (Eigen::Index i = 0; i < 6; ++i)
            inst.world.row(i) =
                Eigen::RowVector3d(rng.uniform(-4, 4), rng.uniform(-3, 3), rng.uniform(3, 20));
        for (Eigen::Index i = 0; i < 6; ++i)
            inst.pixels.push_back(*project_point(wide_k, inst.pose, inst.world.row(i).transpose()));
        const RigidTransform got = epnp(inst.world, inst.pixels, wide_k);
        CHECK(rre(got.rotation(), Eigen::Matrix3d::Identity()) < 1e-6);
        CHECK(got.translation().norm() < 1e-8);
    }

    SECTION("random noise-free instances") {
        Rng rng(2);
        for (int trial = 0; trial < 200; ++trial) {
            const PnpInstance inst = make_instance(rng, 6 + static_cast<Eigen::Index>(rng.uniform_index(20)));
            const RigidTransform got = epnp(inst.world, inst.pixels, wide_k);
            CHECK(rre(got.rotation(), inst.pose.rotation()) < 1e-6);
            CHECK(rte(got.translation(), inst.pose.translation()) < 1e-8);
        }
    }

    SECTION("planar clouds take the three-control-point path") {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            const PnpInstance inst = make_instance(rng, 10, true);
            const RigidTransform got = epnp(inst.world, inst.pixels, wide_k);
            CHECK(rre(got.rotation(), inst.pose.rotation()) < 1e-5);
            CHECK(rte(got.translation(), inst.pose.translation()) < 1e-6);
        }
    }

    SECTION("too few points") {
        Points3 pts(3, 3);
        pts << 0, 0, 5, 1, 0, 5, 0, 1, 5;
        CHECK_THROWS_AS(epnp(pts, {Pixel{}, Pixel{}, Pixel{}}, wide_k), std::invalid_argument);
    }

    SECTION("collinear points are degenerate") {
        Points3 pts(5, 3);
        for (Eigen::Index i = 0; i < 5; ++i) pts.row(i) = Eigen::RowVector3d(double(i), 0, 5);
        std::vector<Pixel> px(5, Pixel{});
        CHECK_THROWS_AS(epnp(pts, px, wide_k), std::domain_error);
    }

    SECTION("invariance under rigid pre-transformation of the world frame") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            const PnpInstance inst = make_instance(rng, 12);
            const RigidTransform g = oracle::random_transform(rng, 2.0);
            const RigidTransform g_inv = invert(g);
            Points3 moved(inst.world.rows(), 3);
            for (Eigen::Index i = 0; i < inst.world.rows(); ++i)
                moved.row(i) = g.apply(inst.world.row(i).transpose()).transpose();
            const RigidTransform got = epnp(moved, inst.pixels, wide_k);
            const RigidTransform want = compose(inst.pose, g_inv);
            CHECK(rre(got.rotation(), want.rotation()) < 1e-6);
            CHECK(rte(got.translation(), want.translation()) < 1e-6);
        }
    }
}

namespace {

CorrespondenceSet to_set(const PnpInstance& inst) {
    CorrespondenceSet c;
    for (Eigen::Index i = 0; i < inst.world.rows(); ++i)
        c.entries.push_back({inst.pixels[i], inst.world.row(i).transpose(), 1.0, 0});
    return c;
}

}  // namespace

TEST_CASE("ransac_pnp") {
    SECTION("all-exact correspondences keep every inlier") {
        Rng rng(5);
        const PnpInstance inst = make_instance(rng, 40);
        const CorrespondenceSet c = to_set(inst);
        Rng prng(1000);
        const auto est = ransac_pnp(c, wide_k, 100, 1.0, prng);
        REQUIRE(est);
        CHECK(est->inlier_indices.size() == 40);
        CHECK(est->mean_reprojection_error < 1e-6);
        CHECK(rre(est->transform.rotation(), inst.pose.rotation()) < 1e-6);
        CHECK(rte(est->transform.translation(), inst.pose.translation()) < 1e-8);
    }

    SECTION("half gross outliers, default settings") {
        int recovered = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(200 + seed);
            const PnpInstance inst = make_instance(rng, 100);
            CorrespondenceSet c = to_set(inst);
            for (int o = 0; o < 100; ++o) {
                // gross outliers: uniform random pixels against random scene points
                const Eigen::Index src = static_cast<Eigen::Index>(rng.uniform_index(100));
                c.entries.push_back({Pixel{rng.uniform(0.0, 128.0), rng.uniform(0.0, 40.0)},
                                     inst.world.row(src).transpose() +
                                         Eigen::Vector3d(rng.uniform(-20, 20), rng.uniform(-20, 20),
                                                         rng.uniform(-20, 20)),
                                     1.0, 0});
            }
            Rng prng(seed);
            const auto est = ransac_pnp(c, wide_k, 500, 1.0, prng);
            if (est && rre(est->transform.rotation(), inst.pose.rotation()) < 0.1) ++recovered;
        }
        CHECK(recovered >= 19);
    }

    SECTION("reported inliers satisfy the gate under the final transform") {
        Rng rng(6);
        const PnpInstance inst = make_instance(rng, 30);
        CorrespondenceSet c = to_set(inst);
        // jitter a third of the pixels beyond the gate
        for (int i = 0; i < 10; ++i) c.entries[i].pixel.u += 5.0;
        Rng prng(7);
        const auto est = ransac_pnp(c, wide_k, 200, 1.0, prng);
        REQUIRE(est);
        for (Eigen::Index idx : est->inlier_indices) {
            const auto dcheck =
                reprojection_distance(wide_k, est->transform, c.entries[idx].point, c.entries[idx].pixel);
            REQUIRE(dcheck);
            CHECK(*dcheck <= 1.0);
        }
    }

    SECTION("deterministic given input and seed") {
        Rng rng(8);
        const PnpInstance inst = make_instance(rng, 25);
        const CorrespondenceSet c = to_set(inst);
        Rng p1(42), p2(42);
        const auto a = ransac_pnp(c, wide_k, 50, 1.0, p1);
        const auto b = ransac_pnp(c, wide_k, 50, 1.0, p2);
        REQUIRE(a);
        REQUIRE(b);
        CHECK(a->transform.rotation() == b->transform.rotation());
        CHECK(a->transform.translation() == b->transform.translation());
        CHECK(a->inlier_indices == b->inlier_indices);
    }

    SECTION("too few correspondences throw") {
        CorrespondenceSet c;
        c.entries.resize(3);
        Rng prng(1);
        CHECK_THROWS_AS(ransac_pnp(c, wide_k, 10, 1.0, prng), std::invalid_argument);
    }

    SECTION("no consensus on degenerate input") {
        // collinear points: every minimal sample is degenerate
        CorrespondenceSet c;
        for (int i = 0; i < 6; ++i)
            c.entries.push_back({Pixel{double(i), 0.0}, Eigen::Vector3d(double(i), 0, 5), 1.0, 0});
        Rng prng(2);
        CHECK_FALSE(ransac_pnp(c, wide_k, 50, 1.0, prng).has_value());
    }
}
