#pragma once

#include <string>

#include "rops/recognition.hpp"

namespace rops {

/// Versioned binary container, little-endian:
///   magic "ROPSLIB1",
///   params {int32 L, int32 T, float64 r_mr, int32 combination, int32 schedule},
///   uint32 model count,
///   per model: uint32 name length + bytes, uint32 feature count,
///     features as float64 records {position[3], axes[9] row-major,
///     eigenvalues[3], descriptor[descriptor_length]}.
/// Meshes are not stored; attach_meshes() restores them after loading.
void save_library(const ModelLibrary& library, const std::string& path);
ModelLibrary load_library(const std::string& path);

/// Debug view of the same content as JSON text.
std::string library_to_json(const ModelLibrary& library);

/// Recognition result JSON: {"instances": [{"model", "R", "t",
/// "epsilon_mr", "alpha"}...], "segmentation": [per-vertex label]}.
std::string recognition_result_to_json(const RecognitionResult& result);
void save_recognition_result(const RecognitionResult& result, const std::string& path);

} // namespace rops
