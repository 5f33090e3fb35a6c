#pragma once

#include "core.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pcflat {

enum class CloudFormat { Auto, Xyz, Ply, Obj };

namespace detail {

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline CloudFormat format_from_path(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (char& c : ext) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (ext == "xyz" || ext == "txt") {
        return CloudFormat::Xyz;
    }
    if (ext == "ply") {
        return CloudFormat::Ply;
    }
    if (ext == "obj") {
        return CloudFormat::Obj;
    }
    throw DataError("cannot infer point cloud format from '" + path + "'");
}

inline bool parse_three(const std::string& line, Vec3& out)
{
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) {
        return false;
    }
    std::string tail;
    if (ss >> tail) {
        return false;
    }
    out = Vec3(x, y, z);
    return true;
}

inline bool blank(const std::string& line)
{
    for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/**
 * @brief Loads points from XYZ, ASCII PLY or OBJ. Boundary loops live in a
 * separate file (read_boundary).
 *
 * Malformed records are rejected with the line number; nothing is guessed.
 * OBJ faces are skipped, with a note appended to @p warnings.
 */
inline PointCloud read_point_cloud(
    const std::string& path, CloudFormat format = CloudFormat::Auto,
    std::vector<std::string>* warnings = nullptr)
{
    if (format == CloudFormat::Auto) {
        format = detail::format_from_path(path);
    }
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    PointCloud pc;
    std::string line;
    std::size_t lineno = 0;

    if (format == CloudFormat::Xyz) {
        while (std::getline(in, line)) {
            ++lineno;
            if (detail::blank(line)) {
                continue;
            }
            Vec3 p;
            if (!detail::parse_three(line, p)) {
                throw DataError(path + ":" + std::to_string(lineno) + ": malformed XYZ line");
            }
            pc.points.push_back(p);
        }
        return pc;
    }

    if (format == CloudFormat::Ply) {
        if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
            throw DataError(path + ": not a PLY file");
        }
        lineno = 1;
        std::size_t vertex_count = 0;
        std::vector<std::string> vertex_props;
        bool in_vertex_element = false;
        while (std::getline(in, line)) {
            ++lineno;
            std::istringstream ss(line);
            std::string word;
            ss >> word;
            if (word == "format") {
                std::string kind;
                ss >> kind;
                if (kind != "ascii") {
                    throw DataError(path + ": ASCII PLY only");
                }
            } else if (word == "element") {
                std::string name;
                std::size_t count = 0;
                ss >> name >> count;
                in_vertex_element = (name == "vertex");
                if (in_vertex_element) {
                    vertex_count = count;
                }
            } else if (word == "property" && in_vertex_element) {
                std::string type, name;
                ss >> type >> name;
                if (type == "list") {
                    throw DataError(path + ": list property on vertex element unsupported");
                }
                vertex_props.push_back(name);
            } else if (word == "end_header") {
                break;
            }
        }
        int ix = -1, iy = -1, iz = -1;
        for (std::size_t s = 0; s < vertex_props.size(); ++s) {
            if (vertex_props[s] == "x") ix = static_cast<int>(s);
            if (vertex_props[s] == "y") iy = static_cast<int>(s);
            if (vertex_props[s] == "z") iz = static_cast<int>(s);
        }
        if (ix < 0 || iy < 0 || iz < 0) {
            throw DataError(path + ": PLY vertex element lacks x/y/z properties");
        }
        for (std::size_t v = 0; v < vertex_count; ++v) {
            if (!std::getline(in, line)) {
                throw DataError(path + ": truncated PLY vertex data");
            }
            ++lineno;
            std::istringstream ss(line);
            std::vector<double> vals(vertex_props.size());
            for (double& x : vals) {
                if (!(ss >> x)) {
                    throw DataError(
                        path + ":" + std::to_string(lineno) + ": malformed PLY vertex line");
                }
            }
            pc.points.emplace_back(
                vals[static_cast<std::size_t>(ix)], vals[static_cast<std::size_t>(iy)],
                vals[static_cast<std::size_t>(iz)]);
        }
        return pc;
    }

    // OBJ: vertices only
    std::size_t faces_skipped = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line) || line[0] == '#') {
            continue;
        }
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) {
                throw DataError(path + ":" + std::to_string(lineno) + ": malformed OBJ vertex");
            }
            pc.points.emplace_back(x, y, z);
        } else if (word == "f") {
            ++faces_skipped;
        }
        // vt/vn/usemtl/... carry no point data
    }
    if (faces_skipped > 0 && warnings != nullptr) {
        warnings->push_back(
            path + ": ignored " + std::to_string(faces_skipped) + " face records");
    }
    return pc;
}

/// Boundary loop file: 0-based indices, one per line or comma-separated.
inline std::vector<Index> read_boundary(const std::string& path, Index n)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::vector<Index> loop;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line) {
            if (c == ',') {
                c = ' ';
            }
        }
        if (detail::blank(line)) {
            continue;
        }
        std::istringstream ss(line);
        long long v;
        while (ss >> v) {
            if (v < 0 || v >= n) {
                throw DataError(
                    path + ":" + std::to_string(lineno) + ": boundary index " + std::to_string(v) +
                    " out of range");
            }
            if (seen[static_cast<std::size_t>(v)]) {
                throw DataError(
                    path + ":" + std::to_string(lineno) + ": boundary index " + std::to_string(v) +
                    " repeated");
            }
            seen[static_cast<std::size_t>(v)] = 1;
            loop.push_back(static_cast<Index>(v));
        }
        if (!ss.eof()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed boundary line");
        }
    }
    if (loop.size() < 3) {
        throw DataError(path + ": boundary loop shorter than 3");
    }
    return loop;
}

inline void write_uv(const std::string& path, const Parameterization& f)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (const Vec2& p : f.uv) {
        out << detail::fmt17(p.x()) << ' ' << detail::fmt17(p.y()) << '\n';
    }
}

inline Parameterization read_uv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    Parameterization f;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) {
            continue;
        }
        std::istringstream ss(line);
        double u, v;
        if (!(ss >> u >> v)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed UV line");
        }
        f.uv.emplace_back(u, v);
    }
    return f;
}

inline void write_xyz(const std::string& path, const PointCloud& pc)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (const Vec3& p : pc.points) {
        out << detail::fmt17(p.x()) << ' ' << detail::fmt17(p.y()) << ' ' << detail::fmt17(p.z())
            << '\n';
    }
}

inline void write_boundary(const std::string& path, const std::vector<Index>& loop)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (Index b : loop) {
        out << b << '\n';
    }
}

/// OBJ with per-vertex UVs; 1-based indices, 9 significant digits.
inline void write_obj(const std::string& path, const TriangleMesh& mesh, const Parameterization& f)
{
    if (mesh.vertices.size() != f.uv.size()) {
        throw DataError("write_obj: vertex/uv count mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (const Vec3& p : mesh.vertices) {
        out << "v " << detail::fmt9(p.x()) << ' ' << detail::fmt9(p.y()) << ' '
            << detail::fmt9(p.z()) << '\n';
    }
    for (const Vec2& p : f.uv) {
        out << "vt " << detail::fmt9(p.x()) << ' ' << detail::fmt9(p.y()) << '\n';
    }
    for (const Triangle& t : mesh.faces) {
        out << "f " << t[0] + 1 << '/' << t[0] + 1 << ' ' << t[1] + 1 << '/' << t[1] + 1 << ' '
            << t[2] + 1 << '/' << t[2] + 1 << '\n';
    }
}

}  // namespace pcflat
