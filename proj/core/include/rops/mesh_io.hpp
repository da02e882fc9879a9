#pragma once

#include <string>
#include <vector>

#include "rops/mesh.hpp"

namespace rops {

/// Loads a PLY (ASCII or binary little-endian) or OBJ mesh, picked by file
/// extension. Quads and larger polygons are fan-triangulated. Non-manifold
/// input is accepted; an empty mesh (no vertices or no faces) is an error.
TriangleMesh load_mesh(const std::string& path);

TriangleMesh load_ply(const std::string& path);
TriangleMesh load_obj(const std::string& path);

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// ASCII output keeps full double precision; binary output stores float32
/// coordinates with uchar-count/int32-index faces.
void save_ply(const TriangleMesh& mesh, const std::string& path,
              PlyFormat format = PlyFormat::Ascii);

/// Ground-truth pose list as JSON: [{"model_id": i, "R": [9 row-major],
/// "t": [3]}, ...].
void save_ground_truth(const std::vector<GroundTruthPose>& poses, const std::string& path);
std::vector<GroundTruthPose> load_ground_truth(const std::string& path);

} // namespace rops
