#include "rops/library_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rops/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "library container assumes a little-endian host");

namespace rops {

namespace {

constexpr char kMagic[8] = {'R', 'O', 'P', 'S', 'L', 'I', 'B', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value;
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw ParseError("library file: truncated");
    return value;
}

void write_doubles(std::ostream& out, const double* data, size_t count) {
    out.write(reinterpret_cast<const char*>(data), std::streamsize(count * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, size_t count) {
    if (!in.read(reinterpret_cast<char*>(data), std::streamsize(count * sizeof(double))))
        throw ParseError("library file: truncated");
}

} // namespace

void save_library(const ModelLibrary& library, const std::string& path) {
    library.params.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");

    out.write(kMagic, sizeof(kMagic));
    write_raw<int32_t>(out, library.params.bins);
    write_raw<int32_t>(out, library.params.rotations);
    write_raw<double>(out, library.params.support_radius_mr);
    write_raw<int32_t>(out, library.params.combination);
    write_raw<int32_t>(out, int32_t(library.params.schedule));
    write_raw<uint32_t>(out, uint32_t(library.models.size()));

    const size_t descriptor_length = size_t(library.params.descriptor_length());
    for (const LibraryModel& model : library.models) {
        write_raw<uint32_t>(out, uint32_t(model.name.size()));
        out.write(model.name.data(), std::streamsize(model.name.size()));
        write_raw<uint32_t>(out, uint32_t(model.features.size()));
        for (const ModelFeatureRecord& f : model.features) {
            if (f.descriptor.size() != descriptor_length)
                throw ConfigError("library: descriptor length inconsistent with params");
            const double pos[3] = {f.position.x, f.position.y, f.position.z};
            write_doubles(out, pos, 3);
            double axes[9];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) axes[i * 3 + j] = f.lrf.axes.m[i][j];
            write_doubles(out, axes, 9);
            write_doubles(out, f.lrf.eigenvalues.data(), 3);
            write_doubles(out, f.descriptor.data(), descriptor_length);
        }
    }
    if (!out) throw ParseError("write failed for '" + path + "'");
}

ModelLibrary load_library(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");

    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("library file: bad magic or unsupported version");

    ModelLibrary library;
    library.params.bins = read_raw<int32_t>(in);
    library.params.rotations = read_raw<int32_t>(in);
    library.params.support_radius_mr = read_raw<double>(in);
    library.params.combination = read_raw<int32_t>(in);
    library.params.schedule = RotationSchedule(read_raw<int32_t>(in));
    library.params.validate();

    const uint32_t model_count = read_raw<uint32_t>(in);
    const size_t descriptor_length = size_t(library.params.descriptor_length());
    library.models.resize(model_count);
    for (uint32_t m = 0; m < model_count; ++m) {
        LibraryModel& model = library.models[m];
        const uint32_t name_len = read_raw<uint32_t>(in);
        if (name_len > 4096) throw ParseError("library file: implausible name length");
        model.name.resize(name_len);
        if (name_len > 0 && !in.read(model.name.data(), name_len))
            throw ParseError("library file: truncated");
        const uint32_t feature_count = read_raw<uint32_t>(in);
        model.features.resize(feature_count);
        for (uint32_t f = 0; f < feature_count; ++f) {
            ModelFeatureRecord& rec = model.features[f];
            double pos[3];
            read_doubles(in, pos, 3);
            rec.position = {pos[0], pos[1], pos[2]};
            double axes[9];
            read_doubles(in, axes, 9);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) rec.lrf.axes.m[i][j] = axes[i * 3 + j];
            rec.lrf.origin = rec.position;
            read_doubles(in, rec.lrf.eigenvalues.data(), 3);
            rec.descriptor.resize(descriptor_length);
            read_doubles(in, rec.descriptor.data(), descriptor_length);
        }
    }
    char extra;
    if (in.read(&extra, 1)) throw ParseError("library file: trailing bytes");
    library.rebuild_index();
    return library;
}

std::string library_to_json(const ModelLibrary& library) {
    nlohmann::json j;
    j["params"] = {{"L", library.params.bins},
                   {"T", library.params.rotations},
                   {"r_mr", library.params.support_radius_mr},
                   {"combination", library.params.combination},
                   {"schedule", int(library.params.schedule)}};
    j["models"] = nlohmann::json::array();
    for (const LibraryModel& model : library.models) {
        nlohmann::json jm;
        jm["name"] = model.name;
        jm["feature_count"] = model.features.size();
        jm["degenerate_skipped"] = model.degenerate_skipped;
        jm["features"] = nlohmann::json::array();
        for (const ModelFeatureRecord& f : model.features) {
            nlohmann::json jf;
            jf["position"] = {f.position.x, f.position.y, f.position.z};
            std::vector<double> axes;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) axes.push_back(f.lrf.axes.m[i][k]);
            jf["axes"] = axes;
            jf["eigenvalues"] = f.lrf.eigenvalues;
            jf["descriptor"] = f.descriptor;
            jm["features"].push_back(jf);
        }
        j["models"].push_back(jm);
    }
    return j.dump(2);
}

std::string recognition_result_to_json(const RecognitionResult& result) {
    nlohmann::json j;
    j["instances"] = nlohmann::json::array();
    for (const RecognizedInstance& inst : result.instances) {
        nlohmann::json ji;
        ji["model"] = inst.model_name;
        std::vector<double> r;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) r.push_back(inst.rotation.m[i][k]);
        ji["R"] = r;
        ji["t"] = {inst.translation.x, inst.translation.y, inst.translation.z};
        ji["epsilon_mr"] = inst.epsilon_mr;
        ji["alpha"] = inst.alpha;
        j["instances"].push_back(ji);
    }
    j["segmentation"] = result.segmentation;
    return j.dump();
}

void save_recognition_result(const RecognitionResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << recognition_result_to_json(result) << "\n";
    if (!out) throw ParseError("write failed for '" + path + "'");
}

} // namespace rops
