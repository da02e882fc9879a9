// Regenerates the bundled model meshes under data/. The shapes are
// deterministic, so the checked-in files and this tool always agree.

#include <iostream>

#include "rops/experiments.hpp"
#include "rops/mesh_io.hpp"

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "data";
    for (const rops::NamedMesh& model : rops::experiment_model_suite()) {
        const std::string path = dir + "/" + model.name + ".ply";
        rops::save_ply(model.mesh, path, rops::PlyFormat::BinaryLittleEndian);
        std::cout << path << ": " << model.mesh.vertices.size() << " vertices, "
                  << model.mesh.triangles.size() << " triangles\n";
    }
    const std::string path = dir + "/distractor.ply";
    rops::save_ply(rops::experiment_distractor(), path, rops::PlyFormat::BinaryLittleEndian);
    std::cout << path << "\n";
    return 0;
}
