#include "rops/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rops/error.hpp"

namespace rops {

namespace {

std::string lower_ext(const std::string& path) {
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext;
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::Int8:
        case PlyType::UInt8: return 1;
        case PlyType::Int16:
        case PlyType::UInt16: return 2;
        case PlyType::Int32:
        case PlyType::UInt32:
        case PlyType::Float32: return 4;
        case PlyType::Float64: return 8;
    }
    return 0;
}

PlyType parse_ply_type(const std::string& name) {
    if (name == "char" || name == "int8") return PlyType::Int8;
    if (name == "uchar" || name == "uint8") return PlyType::UInt8;
    if (name == "short" || name == "int16") return PlyType::Int16;
    if (name == "ushort" || name == "uint16") return PlyType::UInt16;
    if (name == "int" || name == "int32") return PlyType::Int32;
    if (name == "uint" || name == "uint32") return PlyType::UInt32;
    if (name == "float" || name == "float32") return PlyType::Float32;
    if (name == "double" || name == "float64") return PlyType::Float64;
    throw ParseError("ply: unknown property type '" + name + "'");
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
    PlyType type = PlyType::Float32;
    PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, PlyType type) {
    unsigned char buf[8];
    const size_t n = ply_type_size(type);
    if (!in.read(reinterpret_cast<char*>(buf), std::streamsize(n)))
        throw ParseError("ply: truncated binary payload");
    switch (type) {
        case PlyType::Int8: return double(static_cast<int8_t>(buf[0]));
        case PlyType::UInt8: return double(buf[0]);
        case PlyType::Int16: {
            int16_t v;
            std::memcpy(&v, buf, 2);
            return double(v);
        }
        case PlyType::UInt16: {
            uint16_t v;
            std::memcpy(&v, buf, 2);
            return double(v);
        }
        case PlyType::Int32: {
            int32_t v;
            std::memcpy(&v, buf, 4);
            return double(v);
        }
        case PlyType::UInt32: {
            uint32_t v;
            std::memcpy(&v, buf, 4);
            return double(v);
        }
        case PlyType::Float32: {
            float v;
            std::memcpy(&v, buf, 4);
            return double(v);
        }
        case PlyType::Float64: {
            double v;
            std::memcpy(&v, buf, 8);
            return v;
        }
    }
    return 0.0;
}

class AsciiTokens {
public:
    explicit AsciiTokens(std::istream& in) : in_(in) {}
    std::string next() {
        std::string tok;
        if (!(in_ >> tok)) throw ParseError("ply: unexpected end of ASCII payload");
        return tok;
    }
    double next_double() {
        const std::string tok = next();
        try {
            size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("ply: expected a number, got '" + tok + "'");
        }
    }
    long next_long() {
        const std::string tok = next();
        try {
            size_t pos = 0;
            const long v = std::stol(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("ply: expected an integer, got '" + tok + "'");
        }
    }

private:
    std::istream& in_;
};

void append_face(TriangleMesh& mesh, const std::vector<long>& face, size_t vertex_count) {
    if (face.size() < 3) throw ParseError("face with fewer than 3 vertices");
    for (long idx : face)
        if (idx < 0 || size_t(idx) >= vertex_count) throw ParseError("face index out of range");
    for (size_t k = 1; k + 1 < face.size(); ++k)
        mesh.triangles.push_back({int(face[0]), int(face[k]), int(face[k + 1])});
}

} // namespace

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("ply: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw ParseError("ply: missing magic line");

    bool binary = false;
    bool format_seen = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word.empty() || word == "comment" || word == "obj_info") continue;
        if (word == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii")
                binary = false;
            else if (fmt == "binary_little_endian")
                binary = true;
            else
                throw ParseError("ply: unsupported format '" + fmt + "'");
            if (version != "1.0") throw ParseError("ply: unsupported version '" + version + "'");
            format_seen = true;
        } else if (word == "element") {
            PlyElement el;
            ls >> el.name >> el.count;
            if (ls.fail()) throw ParseError("ply: malformed element line");
            elements.push_back(el);
        } else if (word == "property") {
            if (elements.empty()) throw ParseError("ply: property before element");
            PlyProperty prop;
            std::string type_name;
            ls >> type_name;
            if (type_name == "list") {
                std::string count_name, item_name;
                ls >> count_name >> item_name >> prop.name;
                prop.is_list = true;
                prop.count_type = parse_ply_type(count_name);
                prop.type = parse_ply_type(item_name);
            } else {
                prop.type = parse_ply_type(type_name);
                ls >> prop.name;
            }
            if (ls.fail()) throw ParseError("ply: malformed property line");
            elements.back().properties.push_back(prop);
        } else if (word == "end_header") {
            break;
        } else {
            throw ParseError("ply: unexpected header line '" + line + "'");
        }
    }
    if (!format_seen) throw ParseError("ply: missing format line");

    TriangleMesh mesh;
    AsciiTokens tokens(in);

    for (const PlyElement& el : elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        int ix = -1, iy = -1, iz = -1;
        if (is_vertex) {
            for (size_t p = 0; p < el.properties.size(); ++p) {
                if (el.properties[p].name == "x") ix = int(p);
                if (el.properties[p].name == "y") iy = int(p);
                if (el.properties[p].name == "z") iz = int(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw ParseError("ply: vertex element lacks x/y/z properties");
            mesh.vertices.reserve(el.count);
        }

        for (size_t i = 0; i < el.count; ++i) {
            Vec3 v;
            std::vector<long> face;
            for (size_t p = 0; p < el.properties.size(); ++p) {
                const PlyProperty& prop = el.properties[p];
                if (prop.is_list) {
                    const long n = binary ? long(read_binary_scalar(in, prop.count_type))
                                          : tokens.next_long();
                    if (n < 0 || n > 64) throw ParseError("ply: implausible list count");
                    for (long k = 0; k < n; ++k) {
                        const double item = binary ? read_binary_scalar(in, prop.type)
                                                   : tokens.next_double();
                        if (is_face && prop.name.find("vertex_ind") != std::string::npos)
                            face.push_back(long(item));
                    }
                } else {
                    const double val =
                        binary ? read_binary_scalar(in, prop.type) : tokens.next_double();
                    if (is_vertex) {
                        if (int(p) == ix) v.x = val;
                        if (int(p) == iy) v.y = val;
                        if (int(p) == iz) v.z = val;
                    }
                }
            }
            if (is_vertex) mesh.vertices.push_back(v);
            if (is_face) append_face(mesh, face, mesh.vertices.size());
        }
    }

    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw ParseError("ply: empty mesh in '" + path + "'");
    validate_mesh(mesh);
    return mesh;
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    TriangleMesh mesh;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw ParseError("obj: malformed vertex at line " + std::to_string(line_no));
            mesh.vertices.push_back(v);
        } else if (word == "f") {
            std::vector<long> face;
            std::string tok;
            while (ls >> tok) {
                const size_t slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                long idx = 0;
                try {
                    idx = std::stol(head);
                } catch (const std::exception&) {
                    throw ParseError("obj: malformed face index at line " + std::to_string(line_no));
                }
                if (idx < 0)
                    idx = long(mesh.vertices.size()) + idx; // relative index
                else
                    idx -= 1;
                face.push_back(idx);
            }
            append_face(mesh, face, mesh.vertices.size());
        }
        // All other record types are ignored.
    }
    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw ParseError("obj: empty mesh in '" + path + "'");
    validate_mesh(mesh);
    return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "ply") return load_ply(path);
    if (ext == "obj") return load_obj(path);
    throw ParseError("unsupported mesh format '" + ext + "' for '" + path + "'");
}

void save_ply(const TriangleMesh& mesh, const std::string& path, PlyFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");

    const bool binary = format == PlyFormat::BinaryLittleEndian;
    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << mesh.vertices.size() << "\n";
    if (binary) {
        out << "property float x\nproperty float y\nproperty float z\n";
    } else {
        out << "property double x\nproperty double y\nproperty double z\n";
    }
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";

    if (binary) {
        for (const Vec3& v : mesh.vertices) {
            const float f[3] = {float(v.x), float(v.y), float(v.z)};
            out.write(reinterpret_cast<const char*>(f), sizeof(f));
        }
        for (const auto& t : mesh.triangles) {
            const unsigned char n = 3;
            const int32_t idx[3] = {t[0], t[1], t[2]};
            out.write(reinterpret_cast<const char*>(&n), 1);
            out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
        }
    } else {
        char buf[96];
        for (const Vec3& v : mesh.vertices) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x, v.y, v.z);
            out << buf;
        }
        for (const auto& t : mesh.triangles)
            out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    }
    if (!out) throw ParseError("write failed for '" + path + "'");
}

void save_ground_truth(const std::vector<GroundTruthPose>& poses, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const GroundTruthPose& pose : poses) {
        nlohmann::json j;
        j["model_id"] = pose.model_id;
        std::vector<double> r;
        r.reserve(9);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) r.push_back(pose.rotation.m[i][k]);
        j["R"] = r;
        j["t"] = {pose.translation.x, pose.translation.y, pose.translation.z};
        arr.push_back(j);
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << arr.dump(2) << "\n";
}

std::vector<GroundTruthPose> load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("ground truth json: " + std::string(e.what()));
    }
    if (!arr.is_array()) throw ParseError("ground truth json: expected a top-level array");
    std::vector<GroundTruthPose> poses;
    for (const auto& j : arr) {
        try {
            GroundTruthPose pose;
            pose.model_id = j.at("model_id").get<int>();
            const auto r = j.at("R").get<std::vector<double>>();
            const auto t = j.at("t").get<std::vector<double>>();
            if (r.size() != 9 || t.size() != 3)
                throw ParseError("ground truth json: R must have 9 entries and t 3");
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) pose.rotation.m[i][k] = r[size_t(i * 3 + k)];
            pose.translation = {t[0], t[1], t[2]};
            poses.push_back(pose);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("ground truth json: " + std::string(e.what()));
        }
    }
    return poses;
}

} // namespace rops
