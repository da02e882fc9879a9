#pragma once

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace rops {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3 operator-() const { return {-x, -y, -z}; }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    bool operator==(const Vec3& o) const = default;
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

/// 3x3 matrix, row-major. Points are ROW vectors: a transform is `p * M`.
/// For a frame stored with axes as rows, local coordinates of an offset d
/// are `d * transpose(axes)`.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        Mat3 r;
        r.m[0] = {r0.x, r0.y, r0.z};
        r.m[1] = {r1.x, r1.y, r1.z};
        r.m[2] = {r2.x, r2.y, r2.z};
        return r;
    }

    Vec3 row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    double trace() const { return m[0][0] + m[1][1] + m[2][2]; }

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }

    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
        return *this;
    }

    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }
};

/// Row-vector transform: p' = p * M.
inline Vec3 operator*(const Vec3& p, const Mat3& a) {
    return {p.x * a.m[0][0] + p.y * a.m[1][0] + p.z * a.m[2][0],
            p.x * a.m[0][1] + p.y * a.m[1][1] + p.z * a.m[2][1],
            p.x * a.m[0][2] + p.y * a.m[1][2] + p.z * a.m[2][2]};
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    const double av[3] = {a.x, a.y, a.z};
    const double bv[3] = {b.x, b.y, b.z};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = av[i] * bv[j];
    return r;
}

double frobenius_norm(const Mat3& a);
double max_abs_entry(const Mat3& a);

/// True when a * a^T = I and det(a) = +1, both within `tol`.
bool is_rotation(const Mat3& a, double tol = 1e-9);

/// Angle of the relative rotation between two rotation matrices, radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Eigendecomposition of a symmetric 3x3 matrix (cyclic Jacobi).
/// Eigenvalues are sorted descending; eigenvectors are the ROWS of
/// `vectors`, each sign-normalized so its largest-magnitude component is
/// positive (deterministic up to that convention).
struct SymEigen3 {
    std::array<double, 3> values;
    Mat3 vectors;
};
SymEigen3 sym_eigen3(const Mat3& a);

/// Rotation about coordinate axis 0/1/2 (x/y/z) by `angle` radians,
/// row-vector convention.
Mat3 rotation_about_axis(int axis, double angle);

/// Intrinsic Z-Y-X Euler angles (yaw, pitch, roll), row-vector convention.
Vec3 euler_zyx_from_rotation(const Mat3& r);
Mat3 rotation_from_euler_zyx(const Vec3& angles);

/// Rotation matrix (row-vector convention) from a unit quaternion.
Mat3 rotation_from_unit_quaternion(double w, double x, double y, double z);

/// Least-squares rigid fit: finds (R, t) minimizing sum |a_i * R + t - b_i|^2
/// over the given point pairs (Horn's quaternion method). Requires >= 3
/// non-degenerate pairs for a unique answer; fewer pairs still return the
/// best fit of the normal equations.
struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
};
RigidTransform fit_rigid(std::span<const Vec3> from, std::span<const Vec3> to);

inline Vec3 transform_point(const Vec3& p, const Mat3& r, const Vec3& t) {
    return p * r + t;
}

} // namespace rops
