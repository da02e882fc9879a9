#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "rops/geometry.hpp"
#include "rops/synthetic.hpp"
#include "support/test_support.hpp"

using namespace rops;

TEST_CASE("row-vector transform against explicit expansion") {
    Mat3 a;
    a.m = {{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}};
    const Vec3 p{1, -2, 0.5};
    const Vec3 q = p * a;
    CHECK(q.x == doctest::Approx(1 * 1 + -2 * 4 + 0.5 * 7));
    CHECK(q.y == doctest::Approx(1 * 2 + -2 * 5 + 0.5 * 8));
    CHECK(q.z == doctest::Approx(1 * 3 + -2 * 6 + 0.5 * 9));
}

TEST_CASE("symmetric eigendecomposition reconstructs random PSD matrices") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 a = test::random_point(rng);
        const Vec3 b = test::random_point(rng);
        const Vec3 c = test::random_point(rng);
        Mat3 m = outer(a, a) + outer(b, b) + outer(c, c);
        const SymEigen3 eig = sym_eigen3(m);

        CHECK(eig.values[0] >= eig.values[1]);
        CHECK(eig.values[1] >= eig.values[2]);
        CHECK(eig.values[2] >= -1e-12);
        CHECK(std::abs(eig.vectors.det() * eig.vectors.det() - 1.0) < 1e-9);

        // rows * m == values * rows
        for (int r = 0; r < 3; ++r) {
            const Vec3 v = eig.vectors.row(r);
            const Vec3 lhs = v * m.transposed(); // m is symmetric; v*m == m*v
            const Vec3 rhs = v * eig.values[r];
            CHECK(norm(lhs - rhs) < 1e-9 * (1.0 + std::abs(eig.values[0])));
        }
        // orthonormal rows
        const Mat3 g = eig.vectors * eig.vectors.transposed();
        CHECK(frobenius_norm(g + Mat3::identity() * -1.0) < 1e-9);
    }
}

TEST_CASE("axis rotations follow the right-hand rule in row convention") {
    const double half_pi = std::numbers::pi / 2.0;
    // x rotated about z by +90 degrees lands on y.
    const Vec3 ex{1, 0, 0};
    const Vec3 r = ex * rotation_about_axis(2, half_pi);
    CHECK(norm(r - Vec3{0, 1, 0}) < 1e-12);
    // y about x lands on z.
    const Vec3 r2 = Vec3{0, 1, 0} * rotation_about_axis(0, half_pi);
    CHECK(norm(r2 - Vec3{0, 0, 1}) < 1e-12);
    // z about y lands on x.
    const Vec3 r3 = Vec3{0, 0, 1} * rotation_about_axis(1, half_pi);
    CHECK(norm(r3 - Vec3{1, 0, 0}) < 1e-12);
}

TEST_CASE("euler zyx round trip on random rotations") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const Mat3 r = random_rotation(rng);
        const Mat3 back = rotation_from_euler_zyx(euler_zyx_from_rotation(r));
        CHECK(frobenius_norm(back + r * -1.0) < 1e-12);
    }
}

TEST_CASE("euler round trip survives gimbal lock") {
    const Mat3 r = rotation_about_axis(1, std::numbers::pi / 2.0);
    const Vec3 angles = euler_zyx_from_rotation(r);
    CHECK(frobenius_norm(rotation_from_euler_zyx(angles) + r * -1.0) < 1e-12);
}

TEST_CASE("random rotations are uniform-ish and exactly orthonormal") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat3 r = random_rotation(rng);
        CHECK(is_rotation(r, 1e-12));
    }
}

TEST_CASE("fit_rigid recovers an exact rigid motion") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat3 r0 = random_rotation(rng);
        const Vec3 t0 = test::random_point(rng, -5, 5);
        std::vector<Vec3> from, to;
        for (int i = 0; i < 20; ++i) {
            const Vec3 p = test::random_point(rng, -2, 2);
            from.push_back(p);
            to.push_back(transform_point(p, r0, t0));
        }
        const RigidTransform fit = fit_rigid(from, to);
        CHECK(frobenius_norm(fit.rotation + r0 * -1.0) < 1e-9);
        CHECK(norm(fit.translation - t0) < 1e-9);
    }
}

TEST_CASE("fit_rigid is least squares under noise") {
    std::mt19937_64 rng(19);
    const Mat3 r0 = random_rotation(rng);
    const Vec3 t0{0.5, -1.0, 2.0};
    std::vector<Vec3> from, to;
    std::normal_distribution<double> noise(0.0, 0.01);
    for (int i = 0; i < 500; ++i) {
        const Vec3 p = test::random_point(rng, -2, 2);
        from.push_back(p);
        Vec3 q = transform_point(p, r0, t0);
        q.x += noise(rng);
        q.y += noise(rng);
        q.z += noise(rng);
        to.push_back(q);
    }
    const RigidTransform fit = fit_rigid(from, to);
    CHECK(rotation_angle_between(fit.rotation, r0) < 0.01);
    CHECK(norm(fit.translation - t0) < 0.01);
    CHECK(is_rotation(fit.rotation, 1e-9));
}

TEST_CASE("rotation_angle_between of a known twist") {
    const Mat3 r = rotation_about_axis(0, 0.4);
    CHECK(rotation_angle_between(Mat3::identity(), r) == doctest::Approx(0.4));
}
