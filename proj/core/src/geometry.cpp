#include "rops/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rops {

double frobenius_norm(const Mat3& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a.m[i][j] * a.m[i][j];
    return std::sqrt(s);
}

double max_abs_entry(const Mat3& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = std::max(s, std::abs(a.m[i][j]));
    return s;
}

bool is_rotation(const Mat3& a, double tol) {
    const Mat3 g = a * a.transposed();
    const Mat3 id = Mat3::identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(g.m[i][j] - id.m[i][j]) > tol) return false;
    return std::abs(a.det() - 1.0) <= tol;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    const Mat3 rel = a * b.transposed();
    const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

namespace {

// Cyclic Jacobi for a symmetric NxN matrix. Small fixed sizes only (3, 4).
// Rotations are applied in a fixed sweep order, so the result is fully
// deterministic for a given input.
template <int N>
void jacobi_eigen(std::array<std::array<double, N>, N> a,
                  std::array<std::array<double, N>, N>& v,
                  std::array<double, N>& w) {
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) v[i][j] = (i == j) ? 1.0 : 0.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N - 1; ++p)
            for (int q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-300) break;

        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = a[p][q];
                if (apq == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < N; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                // v rows accumulate V^T: row k of v is the k-th eigenvector.
                for (int k = 0; k < N; ++k) {
                    const double vpk = v[p][k];
                    const double vqk = v[q][k];
                    v[p][k] = c * vpk - s * vqk;
                    v[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    for (int i = 0; i < N; ++i) w[i] = a[i][i];
}

template <int N>
void normalize_sign(std::array<double, N>& row) {
    int best = 0;
    for (int i = 1; i < N; ++i)
        if (std::abs(row[i]) > std::abs(row[best])) best = i;
    if (row[best] < 0.0)
        for (int i = 0; i < N; ++i) row[i] = -row[i];
}

} // namespace

SymEigen3 sym_eigen3(const Mat3& a) {
    std::array<std::array<double, 3>, 3> in;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) in[i][j] = 0.5 * (a.m[i][j] + a.m[j][i]);

    std::array<std::array<double, 3>, 3> vec;
    std::array<double, 3> val;
    jacobi_eigen<3>(in, vec, val);

    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return val[i] > val[j]; });

    SymEigen3 out;
    for (int r = 0; r < 3; ++r) {
        auto row = vec[order[r]];
        normalize_sign<3>(row);
        out.values[r] = val[order[r]];
        out.vectors.m[r] = {row[0], row[1], row[2]};
    }
    return out;
}

Mat3 rotation_about_axis(int axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r = Mat3::identity();
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    // Row-vector convention: transpose of the column-acting rotation.
    r.m[u][u] = c;
    r.m[u][v] = s;
    r.m[v][u] = -s;
    r.m[v][v] = c;
    return r;
}

Mat3 rotation_from_euler_zyx(const Vec3& angles) {
    const Mat3 rz = rotation_about_axis(2, angles.x);
    const Mat3 ry = rotation_about_axis(1, angles.y);
    const Mat3 rx = rotation_about_axis(0, angles.z);
    // Column form is Rz*Ry*Rx; in row form the factors compose reversed.
    return rx * ry * rz;
}

Vec3 euler_zyx_from_rotation(const Mat3& r) {
    // Column-matrix entry (i,j) is r.m[j][i].
    const double sin_pitch = std::clamp(-r.m[0][2], -1.0, 1.0);
    const double pitch = std::asin(sin_pitch);
    double yaw, roll;
    if (std::abs(std::cos(pitch)) > 1e-9) {
        yaw = std::atan2(r.m[0][1], r.m[0][0]);
        roll = std::atan2(r.m[1][2], r.m[2][2]);
    } else {
        // Gimbal lock: yaw and roll are coupled; fix roll = 0.
        roll = 0.0;
        yaw = std::atan2(-r.m[1][0], r.m[1][1]);
    }
    return {yaw, pitch, roll};
}

RigidTransform fit_rigid(std::span<const Vec3> from, std::span<const Vec3> to) {
    RigidTransform out;
    const size_t n = std::min(from.size(), to.size());
    if (n == 0) return out;

    Vec3 cf{}, ct{};
    for (size_t i = 0; i < n; ++i) {
        cf += from[i];
        ct += to[i];
    }
    cf = cf / double(n);
    ct = ct / double(n);

    // Cross-covariance H(i,j) = sum (from - cf)_i * (to - ct)_j.
    Mat3 h;
    for (size_t i = 0; i < n; ++i) h += outer(from[i] - cf, to[i] - ct);

    const double sxx = h.m[0][0], sxy = h.m[0][1], sxz = h.m[0][2];
    const double syx = h.m[1][0], syy = h.m[1][1], syz = h.m[1][2];
    const double szx = h.m[2][0], szy = h.m[2][1], szz = h.m[2][2];

    std::array<std::array<double, 4>, 4> nq{};
    nq[0] = {sxx + syy + szz, syz - szy, szx - sxz, sxy - syx};
    nq[1] = {syz - szy, sxx - syy - szz, sxy + syx, szx + sxz};
    nq[2] = {szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy};
    nq[3] = {sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz};

    std::array<std::array<double, 4>, 4> vec;
    std::array<double, 4> val;
    jacobi_eigen<4>(nq, vec, val);
    int best = 0;
    for (int i = 1; i < 4; ++i)
        if (val[i] > val[best]) best = i;
    auto q = vec[best];
    normalize_sign<4>(q);

    out.rotation = rotation_from_unit_quaternion(q[0], q[1], q[2], q[3]);
    out.translation = ct - cf * out.rotation;
    return out;
}

Mat3 rotation_from_unit_quaternion(double w, double x, double y, double z) {
    // Column-acting rotation, transposed for the row-vector convention.
    Mat3 rc;
    rc.m[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)};
    rc.m[1] = {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)};
    rc.m[2] = {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)};
    return rc.transposed();
}

} // namespace rops
