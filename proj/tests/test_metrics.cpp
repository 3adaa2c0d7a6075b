#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "i2p/metrics.hpp"
#include "oracles.hpp"

using namespace i2p;

namespace {

const CameraIntrinsics k_test(64, 64, 64, 20, 128, 40);

CorrespondenceSet exact_set(Rng& rng, const RigidTransform& gt, Eigen::Index n) {
    CorrespondenceSet c;
    const RigidTransform back = invert(gt);
    while (c.size() < n) {
        const Eigen::Vector3d cam(rng.uniform(-6, 6), rng.uniform(-2, 2), rng.uniform(5, 25));
        const Eigen::Vector3d world = back.apply(cam);
        const auto px = project_point(k_test, gt, world);
        if (!px) continue;
        c.entries.push_back({*px, world, 1.0, 0});
    }
    return c;
}

}  // namespace

TEST_CASE("inlier_ratio") {
    Rng rng(1);
    const RigidTransform gt = oracle::random_transform(rng, 2.0);

    SECTION("exact pairs are all inliers") {
        const CorrespondenceSet c = exact_set(rng, gt, 50);
        CHECK(inlier_ratio(c, k_test, gt, 1.0) == 1.0);
    }

    SECTION("two-pixel offsets all fail a one-pixel gate") {
        CorrespondenceSet c = exact_set(rng, gt, 50);
        for (auto& e : c.entries) e.pixel.u += 2.0;
        CHECK(inlier_ratio(c, k_test, gt, 1.0) == 0.0);
    }

    SECTION("empty set counts as zero") { CHECK(inlier_ratio(CorrespondenceSet{}, k_test, gt, 1.0) == 0.0); }

    SECTION("strict inequality at the threshold") {
        CorrespondenceSet c = exact_set(rng, gt, 1);
        c.entries[0].pixel.u += 1.0;  // distance exactly tau_d
        CHECK(inlier_ratio(c, k_test, gt, 1.0) == 0.0);
    }

    SECTION("random mixed set matches the loop oracle and ignores order") {
        for (int trial = 0; trial < 20; ++trial) {
            CorrespondenceSet c = exact_set(rng, gt, 40);
            for (auto& e : c.entries)
                if (rng.uniform() < 0.5) e.pixel.v += rng.uniform(0.0, 4.0);
            Eigen::Index inliers = 0;
            for (const auto& e : c.entries) {
                const auto px = oracle::project(k_test, gt, e.point);
                if (!px) continue;
                const double du = e.pixel.u - px->u, dv = e.pixel.v - px->v;
                if (std::sqrt(du * du + dv * dv) < 1.0) ++inliers;
            }
            const double want = double(inliers) / double(c.size());
            CHECK(inlier_ratio(c, k_test, gt, 1.0) == Catch::Approx(want).margin(1e-15));

            std::reverse(c.entries.begin(), c.entries.end());
            CHECK(inlier_ratio(c, k_test, gt, 1.0) == Catch::Approx(want).margin(1e-15));
        }
    }
}

TEST_CASE("feature_matching_recall") {
    CHECK(feature_matching_recall({1.0, 1.0, 1.0}, 0.10) == 1.0);
    CHECK(feature_matching_recall({0.05, 0.15}, 0.10) == 0.5);
    CHECK(feature_matching_recall({0.10}, 0.10) == 0.0);  // strict
    CHECK_THROWS_AS(feature_matching_recall({}, 0.10), std::invalid_argument);

    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> irs;
        for (int i = 0; i < 30; ++i) irs.push_back(rng.uniform());
        Eigen::Index hits = 0;
        for (double ir : irs)
            if (ir > 0.10) ++hits;
        CHECK(feature_matching_recall(irs, 0.10) == Catch::Approx(double(hits) / 30.0).margin(1e-15));
    }
}

TEST_CASE("rre") {
    CHECK(rre(Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity()) == 0.0);

    SECTION("single-axis relatives equal the rotation angle") {
        Rng rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            const double angle = rng.uniform(-89.0, 89.0);
            const int axis = static_cast<int>(rng.uniform_index(3));
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e(axis) = 1.0;
            const Eigen::Matrix3d base = oracle::random_rotation(rng);
            const Eigen::Matrix3d rel = Eigen::AngleAxisd(deg2rad(angle), e).toRotationMatrix();
            // rre uses R^-1 * R_gt, so make gt = base * rel
            const double got = rre(base, base * rel);
            // axis-angle oracle for the single-axis case
            const Eigen::AngleAxisd aa(rel);
            CHECK(got == Catch::Approx(rad2deg(aa.angle())).margin(1e-9));
            CHECK(got == Catch::Approx(std::abs(angle)).margin(1e-9));
        }
    }

    SECTION("five degrees about one axis") {
        const Eigen::Matrix3d rel = euler_to_rotation({0, 5, 0});
        CHECK(rre(Eigen::Matrix3d::Identity(), rel) == Catch::Approx(5.0).margin(1e-12));
    }

    SECTION("shared right-composition about the relative axis leaves RRE unchanged") {
        Rng rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            const double angle = rng.uniform(-80.0, 80.0);
            const int axis = static_cast<int>(rng.uniform_index(3));
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e(axis) = 1.0;
            const Eigen::Matrix3d rel = Eigen::AngleAxisd(deg2rad(angle), e).toRotationMatrix();
            const Eigen::Matrix3d g = Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), e).toRotationMatrix();
            const Eigen::Matrix3d r = oracle::random_rotation(rng);
            // G commutes with the single-axis relative rotation
            const double lhs = rre(r, r * rel);
            const double rhs = rre(r * rel * g, r * g);
            CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
        }
    }
}

TEST_CASE("rte") {
    CHECK(rte(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)) == 0.0);
    CHECK(rte(Eigen::Vector3d(1, 2, 2), Eigen::Vector3d::Zero()) == 3.0);

    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
        const Eigen::Vector3d b(rng.normal(), rng.normal(), rng.normal());
        CHECK(rte(a, b) == Catch::Approx((a - b).norm()).margin(1e-15));
        CHECK(rte(a, b) == rte(b, a));
    }
}

TEST_CASE("registration_recall") {
    CHECK(registration_recall({{0.0, 0.0}}, 10.0, 5.0) == 1.0);
    CHECK(registration_recall({{11.0, 1.0}}, 10.0, 5.0) == 0.0);  // conjunction fails
    CHECK(registration_recall({{1.0, 6.0}}, 10.0, 5.0) == 0.0);
    CHECK_THROWS_AS(registration_recall({}, 10.0, 5.0), std::invalid_argument);

    SECTION("loop oracle on random errors") {
        Rng rng(6);
        std::vector<PairErrors> pairs;
        for (int i = 0; i < 100; ++i) pairs.push_back({rng.uniform(0.0, 20.0), rng.uniform(0.0, 10.0)});
        Eigen::Index hits = 0;
        for (const auto& p : pairs)
            if (p.rre < 10.0 && p.rte < 5.0) ++hits;
        CHECK(registration_recall(pairs, 10.0, 5.0) == Catch::Approx(double(hits) / 100.0).margin(1e-15));
    }

    SECTION("monotone nondecreasing in both thresholds") {
        Rng rng(7);
        std::vector<PairErrors> pairs;
        for (int i = 0; i < 200; ++i) pairs.push_back({rng.uniform(0.0, 25.0), rng.uniform(0.0, 12.0)});
        double prev_row = -1.0;
        for (int a = 1; a <= 10; ++a) {
            double prev = -1.0;
            for (int b = 1; b <= 10; ++b) {
                const double rr = registration_recall(pairs, 2.5 * a, 1.2 * b);
                CHECK(rr >= prev);
                prev = rr;
            }
            CHECK(registration_recall(pairs, 2.5 * a, 12.0) >= prev_row);
            prev_row = registration_recall(pairs, 2.5 * a, 12.0);
        }
    }
}

TEST_CASE("make_report aggregates per-pair records") {
    std::vector<PairRecord> records(4);
    records[0] = {1.0, 1.0, true, 0.5, 0.1};
    records[1] = {0.5, 0.6, true, 2.0, 1.0};
    records[2] = {0.05, 0.0, false, 0.0, 0.0};
    records[2].rre = std::numeric_limits<double>::infinity();
    records[2].rte = std::numeric_limits<double>::infinity();
    records[3] = {0.2, 0.3, true, 15.0, 0.5};  // rre beyond tau_r: failed registration

    const MetricsReport rep = make_report(records, MetricsThresholds{});
    CHECK(rep.ir == Catch::Approx((1.0 + 0.5 + 0.05 + 0.2) / 4.0));
    CHECK(rep.irr == Catch::Approx((1.0 + 0.6 + 0.0 + 0.3) / 4.0));
    CHECK(rep.fmr == Catch::Approx(3.0 / 4.0));   // 0.05 fails tau_m
    CHECK(rep.fmrr == Catch::Approx(3.0 / 4.0));  // 0.0 fails tau_m
    CHECK(rep.rr == Catch::Approx(2.0 / 4.0));
    CHECK(rep.rre_mean == Catch::Approx((0.5 + 2.0) / 2.0));
    CHECK(rep.rte_mean == Catch::Approx((0.1 + 1.0) / 2.0));
    CHECK(rep.per_pair.size() == 4);
    CHECK_THROWS_AS(make_report({}, MetricsThresholds{}), std::invalid_argument);
}

TEST_CASE("single-condition recall sweeps are monotone") {
    Rng rng(8);
    std::vector<PairRecord> records;
    for (int i = 0; i < 50; ++i) {
        PairRecord r;
        r.has_pose = rng.uniform() < 0.9;
        if (r.has_pose) {
            r.rre = rng.uniform(0.0, 20.0);
            r.rte = rng.uniform(0.0, 10.0);
        }
        records.push_back(r);
    }
    std::vector<double> taus;
    for (int i = 1; i <= 10; ++i) taus.push_back(2.0 * i);
    const auto rot = recall_sweep_rotation(records, taus);
    const auto trans = recall_sweep_translation(records, taus);
    for (std::size_t i = 1; i < taus.size(); ++i) {
        CHECK(rot[i] >= rot[i - 1]);
        CHECK(trans[i] >= trans[i - 1]);
    }
}
