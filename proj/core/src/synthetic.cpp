#include "rops/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <tuple>

#include "rops/error.hpp"

namespace rops {

TriangleMesh add_gaussian_noise(const TriangleMesh& mesh, double sigma_mr, uint64_t seed) {
    if (sigma_mr < 0.0) throw MeshError("noise sigma must be non-negative");
    TriangleMesh out = mesh;
    if (sigma_mr == 0.0) return out;

    const double sigma = sigma_mr * mesh_resolution(mesh);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Vec3& v : out.vertices) {
        v.x += gauss(rng);
        v.y += gauss(rng);
        v.z += gauss(rng);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadric-error decimation.

namespace {

struct Quadric {
    Mat3 a;
    Vec3 b;
    double c = 0.0;

    void add_plane(const Vec3& n, double d, double weight) {
        a += outer(n, n) * weight;
        b += n * (d * weight);
        c += d * d * weight;
    }
    Quadric& operator+=(const Quadric& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        return *this;
    }
    double error(const Vec3& p) const { return dot(p * a, p) + 2.0 * dot(b, p) + c; }
};

struct Collapse {
    double cost;
    int va;
    int vb;
    uint32_t version_a;
    uint32_t version_b;
    Vec3 position;
};

struct CollapseOrder {
    bool operator()(const Collapse& x, const Collapse& y) const {
        return std::tie(x.cost, x.va, x.vb) > std::tie(y.cost, y.va, y.vb);
    }
};

Vec3 triangle_normal_unnormalized(const Vec3& a, const Vec3& b, const Vec3& c) {
    return cross(b - a, c - a);
}

} // namespace

TriangleMesh decimate(const TriangleMesh& mesh, double target_fraction) {
    if (!(target_fraction > 0.0) || target_fraction > 1.0)
        throw MeshError("decimation fraction must be in (0, 1]");
    validate_mesh(mesh);
    if (target_fraction == 1.0) return mesh;

    const int n = int(mesh.vertices.size());
    const long target = std::lround(target_fraction * double(n));
    if (target < 3) throw MeshError("decimation target leaves fewer than 3 vertices");

    std::vector<Vec3> pos = mesh.vertices;
    std::vector<std::array<int, 3>> tris = mesh.triangles;
    std::vector<uint8_t> vertex_alive(n, 1);
    std::vector<uint8_t> tri_alive(tris.size(), 1);
    std::vector<uint32_t> version(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (size_t t = 0; t < tris.size(); ++t)
        for (int k = 0; k < 3; ++k) adj[tris[t][k]].push_back(int(t));

    // Per-vertex quadrics: area-weighted triangle planes plus strong
    // perpendicular constraint planes along boundary edges.
    std::vector<Quadric> quadric(n);
    for (const auto& t : tris) {
        const Vec3& p0 = pos[t[0]];
        const Vec3 nn = triangle_normal_unnormalized(p0, pos[t[1]], pos[t[2]]);
        const double len = norm(nn);
        if (len <= 0.0) continue;
        const Vec3 unit = nn / len;
        const double d = -dot(unit, p0);
        const double area = 0.5 * len;
        for (int k = 0; k < 3; ++k) quadric[t[k]].add_plane(unit, d, area);
    }
    for (const auto& [ea, eb] : boundary_edges(mesh)) {
        // Find the single triangle that holds this edge to get its normal.
        Vec3 tri_n{};
        for (int t : adj[ea]) {
            const auto& tv = tris[t];
            const bool has_b = tv[0] == eb || tv[1] == eb || tv[2] == eb;
            if (!has_b) continue;
            tri_n = triangle_normal_unnormalized(pos[tv[0]], pos[tv[1]], pos[tv[2]]);
            break;
        }
        const Vec3 edge = pos[eb] - pos[ea];
        const Vec3 c = cross(edge, tri_n);
        const double len = norm(c);
        if (len <= 0.0) continue;
        const Vec3 unit = c / len;
        const double d = -dot(unit, pos[ea]);
        const double weight = 10.0 * squared_norm(edge);
        quadric[ea].add_plane(unit, d, weight);
        quadric[eb].add_plane(unit, d, weight);
    }

    std::priority_queue<Collapse, std::vector<Collapse>, CollapseOrder> heap;
    auto push_edge = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        Quadric q = quadric[a];
        q += quadric[b];
        const Vec3 mid = (pos[a] + pos[b]) * 0.5;
        const Vec3 candidates[3] = {pos[a], pos[b], mid};
        int best = 0;
        double best_err = q.error(candidates[0]);
        for (int i = 1; i < 3; ++i) {
            const double e = q.error(candidates[i]);
            if (e < best_err) {
                best_err = e;
                best = i;
            }
        }
        heap.push({best_err, a, b, version[a], version[b], candidates[best]});
    };
    for (const auto& [a, b] : unique_edges(mesh)) push_edge(a, b);

    auto vertex_neighbors = [&](int v) {
        std::vector<int> out;
        for (int t : adj[v]) {
            if (!tri_alive[t]) continue;
            for (int k = 0; k < 3; ++k)
                if (tris[t][k] != v) out.push_back(tris[t][k]);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    long alive = n;
    while (alive > target && !heap.empty()) {
        const Collapse top = heap.top();
        heap.pop();
        const int a = top.va;
        const int b = top.vb;
        if (!vertex_alive[a] || !vertex_alive[b]) continue;
        if (version[a] != top.version_a || version[b] != top.version_b) continue;

        // Link condition: every common neighbor of (a, b) must be the apex
        // of a triangle holding edge (a, b); otherwise the collapse pinches
        // the surface.
        std::vector<int> apex;
        for (int t : adj[a]) {
            if (!tri_alive[t]) continue;
            const auto& tv = tris[t];
            const bool has_b = tv[0] == b || tv[1] == b || tv[2] == b;
            if (!has_b) continue;
            for (int k = 0; k < 3; ++k)
                if (tv[k] != a && tv[k] != b) apex.push_back(tv[k]);
        }
        if (apex.empty()) continue; // edge no longer exists
        std::sort(apex.begin(), apex.end());
        apex.erase(std::unique(apex.begin(), apex.end()), apex.end());

        const auto na = vertex_neighbors(a);
        const auto nb = vertex_neighbors(b);
        std::vector<int> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                              std::back_inserter(common));
        if (common != apex) continue;

        // Normal-flip rejection over surviving incident triangles.
        bool flips = false;
        auto check_tri = [&](int t) {
            if (!tri_alive[t]) return;
            const auto& tv = tris[t];
            const bool has_a = tv[0] == a || tv[1] == a || tv[2] == a;
            const bool has_b2 = tv[0] == b || tv[1] == b || tv[2] == b;
            if (has_a && has_b2) return; // dies with the collapse
            Vec3 before[3], after[3];
            for (int k = 0; k < 3; ++k) {
                before[k] = pos[tv[k]];
                after[k] = (tv[k] == a || tv[k] == b) ? top.position : pos[tv[k]];
            }
            const Vec3 n0 = triangle_normal_unnormalized(before[0], before[1], before[2]);
            const Vec3 n1 = triangle_normal_unnormalized(after[0], after[1], after[2]);
            if (dot(n0, n1) <= 0.0) flips = true;
        };
        for (int t : adj[a]) check_tri(t);
        for (int t : adj[b]) check_tri(t);
        if (flips) continue;

        // Commit: b merges into a at the chosen position.
        pos[a] = top.position;
        quadric[a] += quadric[b];
        vertex_alive[b] = 0;
        ++version[a];
        ++version[b];
        --alive;

        for (int t : adj[b]) {
            if (!tri_alive[t]) continue;
            auto& tv = tris[t];
            const bool has_a = tv[0] == a || tv[1] == a || tv[2] == a;
            if (has_a) {
                tri_alive[t] = 0;
            } else {
                for (int k = 0; k < 3; ++k)
                    if (tv[k] == b) tv[k] = a;
                adj[a].push_back(t);
            }
        }
        adj[b].clear();
        std::sort(adj[a].begin(), adj[a].end());
        adj[a].erase(std::unique(adj[a].begin(), adj[a].end()), adj[a].end());
        std::erase_if(adj[a], [&](int t) { return !tri_alive[t]; });

        for (int neighbor : vertex_neighbors(a)) push_edge(a, neighbor);
    }

    // Compact.
    TriangleMesh out;
    std::vector<int> remap(n, -1);
    const bool tagged = !mesh.tags.empty();
    for (int v = 0; v < n; ++v) {
        if (!vertex_alive[v]) continue;
        remap[v] = int(out.vertices.size());
        out.vertices.push_back(pos[v]);
        if (tagged) out.tags.push_back(mesh.tags[v]);
    }
    for (size_t t = 0; t < tris.size(); ++t) {
        if (!tri_alive[t]) continue;
        out.triangles.push_back({remap[tris[t][0]], remap[tris[t][1]], remap[tris[t][2]]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scene composition.

Mat3 random_rotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u1 = uni(rng);
    const double u2 = uni(rng);
    const double u3 = uni(rng);
    const double two_pi = 2.0 * std::numbers::pi;
    const double w = std::sqrt(1.0 - u1) * std::sin(two_pi * u2);
    const double x = std::sqrt(1.0 - u1) * std::cos(two_pi * u2);
    const double y = std::sqrt(u1) * std::sin(two_pi * u3);
    const double z = std::sqrt(u1) * std::cos(two_pi * u3);
    return rotation_from_unit_quaternion(w, x, y, z);
}

ComposedScene compose_scene(const std::vector<TriangleMesh>& models, int k, uint64_t seed,
                            const ComposeOptions& options) {
    if (models.empty()) throw MeshError("compose_scene needs at least one model");
    if (k < 1) throw MeshError("compose_scene instance count must be >= 1");

    std::mt19937_64 rng(seed);
    std::vector<int> chosen;
    if (size_t(k) <= models.size()) {
        std::vector<int> order(models.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        std::shuffle(order.begin(), order.end(), rng);
        chosen.assign(order.begin(), order.begin() + k);
    } else {
        for (int i = 0; i < k; ++i) chosen.push_back(i % int(models.size()));
    }

    double diameter = 0.0;
    for (const TriangleMesh& m : models) diameter = std::max(diameter, mesh_diameter(m));
    const double half_side = 0.5 * options.box_factor * diameter;
    std::uniform_real_distribution<double> box(-half_side, half_side);

    ComposedScene out;
    for (int id : chosen) {
        const TriangleMesh& model = models[size_t(id)];
        GroundTruthPose pose;
        pose.model_id = id;
        pose.rotation = random_rotation(rng);
        pose.translation = {box(rng), box(rng), box(rng)};

        const int offset = int(out.scene.vertices.size());
        const TriangleMesh inst = apply_pose(model, pose.rotation, pose.translation);
        out.scene.vertices.insert(out.scene.vertices.end(), inst.vertices.begin(),
                                  inst.vertices.end());
        for (const auto& t : inst.triangles)
            out.scene.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
        if (options.tag_vertices)
            out.scene.tags.insert(out.scene.tags.end(), inst.vertices.size(), id);
        out.poses.push_back(pose);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Procedural shapes.

TriangleMesh make_icosphere(int subdivisions, double radius) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (Vec3& v : verts) v = normalized(v);
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = int(verts.size());
            verts.push_back(normalized((verts[a] + verts[b]) * 0.5));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriangleMesh mesh;
    mesh.vertices.reserve(verts.size());
    for (const Vec3& v : verts) mesh.vertices.push_back(v * radius);
    mesh.triangles = std::move(faces);
    return mesh;
}

TriangleMesh make_plane_grid(int nx, int ny, double spacing) {
    if (nx < 2 || ny < 2) throw MeshError("plane grid needs nx, ny >= 2");
    TriangleMesh mesh;
    mesh.vertices.reserve(size_t(nx) * size_t(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) mesh.vertices.push_back({i * spacing, j * spacing, 0.0});
    auto at = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return mesh;
}

TriangleMesh make_torus(int ring_segments, int tube_segments, double ring_radius,
                        double tube_radius) {
    if (ring_segments < 3 || tube_segments < 3) throw MeshError("torus needs >= 3 segments");
    TriangleMesh mesh;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < ring_segments; ++i) {
        const double u = two_pi * i / ring_segments;
        for (int j = 0; j < tube_segments; ++j) {
            const double v = two_pi * j / tube_segments;
            mesh.vertices.push_back({(ring_radius + tube_radius * std::cos(v)) * std::cos(u),
                                     (ring_radius + tube_radius * std::cos(v)) * std::sin(u),
                                     tube_radius * std::sin(v)});
        }
    }
    auto at = [&](int i, int j) {
        return (i % ring_segments) * tube_segments + (j % tube_segments);
    };
    for (int i = 0; i < ring_segments; ++i) {
        for (int j = 0; j < tube_segments; ++j) {
            mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return mesh;
}

TriangleMesh make_tube(std::span<const Vec3> path, int path_segments, int ring_segments,
                       double tube_radius) {
    const int n = int(path.size());
    if (n < 3 || path_segments < 3 || ring_segments < 3)
        throw MeshError("tube needs a closed path and >= 3 segments");

    std::vector<Vec3> tangent(n), normal(n);
    for (int i = 0; i < n; ++i)
        tangent[i] = normalized(path[size_t((i + 1) % n)] - path[size_t((i + n - 1) % n)]);

    const Vec3 ref = std::abs(tangent[0].x) < 0.8 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    normal[0] = normalized(ref - tangent[0] * dot(ref, tangent[0]));
    for (int i = 1; i < n; ++i)
        normal[i] = normalized(normal[i - 1] - tangent[i] * dot(normal[i - 1], tangent[i]));

    // Spread the holonomy of the transported frame over the loop so the
    // seam closes.
    const Vec3 wrapped = normalized(normal[n - 1] - tangent[0] * dot(normal[n - 1], tangent[0]));
    double holonomy = std::acos(std::clamp(dot(wrapped, normal[0]), -1.0, 1.0));
    if (dot(cross(wrapped, normal[0]), tangent[0]) < 0.0) holonomy = -holonomy;
    for (int i = 0; i < n; ++i) {
        const double a = holonomy * double(i + 1) / double(n);
        const Vec3 b = cross(tangent[i], normal[i]);
        normal[i] = normalized(normal[i] * std::cos(a) + b * std::sin(a));
    }

    TriangleMesh mesh;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < path_segments; ++i) {
        const int pi = int((long(i) * n) / path_segments);
        const Vec3 b = cross(tangent[pi], normal[pi]);
        for (int j = 0; j < ring_segments; ++j) {
            const double v = two_pi * j / ring_segments;
            mesh.vertices.push_back(path[size_t(pi)] +
                                    (normal[pi] * std::cos(v) + b * std::sin(v)) * tube_radius);
        }
    }
    auto at = [&](int i, int j) {
        return (i % path_segments) * ring_segments + (j % ring_segments);
    };
    for (int i = 0; i < path_segments; ++i) {
        for (int j = 0; j < ring_segments; ++j) {
            mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return mesh;
}

std::vector<Vec3> make_torus_knot_path(int p, int q, int samples, double scale) {
    std::vector<Vec3> out;
    out.reserve(size_t(samples));
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < samples; ++i) {
        const double t = two_pi * i / samples;
        const double r = 2.0 + std::cos(q * t);
        out.push_back(Vec3{r * std::cos(p * t), r * std::sin(p * t), -std::sin(q * t)} * scale);
    }
    return out;
}

TriangleMesh displace_radial(TriangleMesh mesh, uint64_t seed,
                             const SurfaceDetailOptions& options) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto random_dir = [&] {
        Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
        if (norm(d) < 1e-9) d = {1, 0, 0};
        return normalized(d);
    };

    struct Lobe {
        Vec3 dir;
        double amplitude;
        double inv_two_sigma_sq;
    };
    std::vector<Lobe> lobes;
    for (int i = 0; i < options.lobes; ++i) {
        const Vec3 d = random_dir();
        const double amp =
            options.min_lobe_amplitude +
            (options.max_lobe_amplitude - options.min_lobe_amplitude) * uni(rng);
        const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
        const double width =
            options.min_lobe_width + (options.max_lobe_width - options.min_lobe_width) * uni(rng);
        lobes.push_back({d, sign * amp, 1.0 / (2.0 * width * width)});
    }

    struct Wave {
        Vec3 dir;
        double amplitude;
        double frequency;
        double phase;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < options.waves; ++i) {
        waves.push_back({random_dir(), options.wave_amplitude * (0.6 + 0.8 * uni(rng)),
                         options.min_wave_frequency +
                             (options.max_wave_frequency - options.min_wave_frequency) * uni(rng),
                         2.0 * std::numbers::pi * uni(rng)});
    }

    for (Vec3& p : mesh.vertices) {
        const double len = norm(p);
        if (len < 1e-12) continue;
        const Vec3 dir = p / len;
        double dr = 0.0;
        for (const Lobe& lobe : lobes) {
            const double angle = std::acos(std::clamp(dot(dir, lobe.dir), -1.0, 1.0));
            dr += lobe.amplitude * std::exp(-angle * angle * lobe.inv_two_sigma_sq);
        }
        for (const Wave& w : waves)
            dr += w.amplitude * std::sin(w.frequency * dot(p, w.dir) + w.phase);
        p += dir * dr;
    }
    return mesh;
}

TriangleMesh make_blob(uint64_t seed, const BlobOptions& options) {
    TriangleMesh mesh =
        displace_radial(make_icosphere(options.subdivisions, 1.0), seed, options.detail);

    std::mt19937_64 rng(seed ^ 0xb5297a4d5c47d3b3ull);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double scales[3] = {1.0,
                        options.mid_axis_min + (options.mid_axis_max - options.mid_axis_min) * uni(rng),
                        options.small_axis_min +
                            (options.small_axis_max - options.small_axis_min) * uni(rng)};
    // Seed-chosen assignment of the three scales to x/y/z.
    const int perm = int(rng() % 6);
    const int idx[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (Vec3& v : mesh.vertices) {
        v = {v.x * scales[idx[perm][0]], v.y * scales[idx[perm][1]], v.z * scales[idx[perm][2]]};
    }
    return mesh;
}

} // namespace rops
