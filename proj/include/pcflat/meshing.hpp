#pragma once

#include "core.hpp"
#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pcflat {

namespace detail {

/// true when segments (a,b) and (c,d) intersect or overlap
inline bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const double o1 = orient2d(a, b, c);
    const double o2 = orient2d(a, b, d);
    const double o3 = orient2d(c, d, a);
    const double o4 = orient2d(c, d, b);
    if (((o1 > 0) != (o2 > 0)) && o1 != 0.0 && o2 != 0.0 && ((o3 > 0) != (o4 > 0)) && o3 != 0.0 &&
        o4 != 0.0) {
        return true;
    }
    const auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return r.x() >= std::min(p.x(), q.x()) && r.x() <= std::max(p.x(), q.x()) &&
               r.y() >= std::min(p.y(), q.y()) && r.y() <= std::max(p.y(), q.y());
    };
    if (o1 == 0.0 && on_segment(a, b, c)) return true;
    if (o2 == 0.0 && on_segment(a, b, d)) return true;
    if (o3 == 0.0 && on_segment(c, d, a)) return true;
    if (o4 == 0.0 && on_segment(c, d, b)) return true;
    return false;
}

inline bool polygon_is_simple(const std::vector<Vec2>& poly)
{
    const std::size_t l = poly.size();
    for (std::size_t i = 0; i < l; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % l];
        for (std::size_t j = i + 1; j < l; ++j) {
            // skip segments adjacent to segment i
            if (j == i || (j + 1) % l == i || (i + 1) % l == j) {
                continue;
            }
            if (segments_cross(a, b, poly[j], poly[(j + 1) % l])) {
                return false;
            }
        }
    }
    return true;
}

/// winding number point-in-polygon (nonzero rule)
inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly)
{
    int winding = 0;
    const std::size_t l = poly.size();
    for (std::size_t i = 0; i < l; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % l];
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && orient2d(a, b, p) > 0) {
                ++winding;
            }
        } else {
            if (b.y() <= p.y() && orient2d(a, b, p) < 0) {
                --winding;
            }
        }
    }
    return winding != 0;
}

}  // namespace detail

/**
 * @brief Delaunay triangulation of the parameter plane, restricted to the
 * region bounded by the mapped boundary loop.
 *
 * Triangles whose centroid falls outside the mapped boundary polygon are
 * discarded (a concave mapped boundary would otherwise gain faces covering
 * the notch). Throws DataError when the mapped boundary self-intersects.
 */
inline std::vector<Triangle> triangulate_uv(
    const Parameterization& f, const std::vector<Index>& boundary)
{
    if (!f.all_finite()) {
        throw DataError("triangulate_uv: non-finite parameterization");
    }
    std::vector<Vec2> poly;
    poly.reserve(boundary.size());
    for (Index b : boundary) {
        poly.push_back(f.uv[static_cast<std::size_t>(b)]);
    }
    if (poly.size() < 3 || !detail::polygon_is_simple(poly)) {
        throw DataError("folded boundary -- parameterization invalid for meshing");
    }

    const std::vector<Triangle> tris = delaunay_2d(f.uv);
    std::vector<Triangle> kept;
    kept.reserve(tris.size());
    for (const Triangle& t : tris) {
        const Vec2 centroid = (f.uv[static_cast<std::size_t>(t[0])] +
                               f.uv[static_cast<std::size_t>(t[1])] +
                               f.uv[static_cast<std::size_t>(t[2])]) /
                              3.0;
        if (detail::point_in_polygon(centroid, poly)) {
            kept.push_back(t);
        }
    }
    return kept;
}

/**
 * @brief Lifts UV faces back onto the 3D points.
 *
 * Degenerate 3D faces (flat up to 1e-14 of the squared mesh diameter) are
 * kept but counted into @p degenerate_faces when provided.
 */
inline TriangleMesh lift(
    const std::vector<Triangle>& faces, const PointCloud& pc, int* degenerate_faces = nullptr)
{
    TriangleMesh mesh;
    mesh.vertices = pc.points;
    mesh.faces = faces;
    mesh.boundary = pc.boundary;

    const double diag2 = pc.bbox_diagonal() * pc.bbox_diagonal();
    int degenerate = 0;
    for (const Triangle& t : faces) {
        for (Index v : t) {
            if (v < 0 || v >= pc.size()) {
                throw DataError("lift: face index out of range");
            }
        }
        const Vec3& a = pc.points[static_cast<std::size_t>(t[0])];
        const Vec3& b = pc.points[static_cast<std::size_t>(t[1])];
        const Vec3& c = pc.points[static_cast<std::size_t>(t[2])];
        if (0.5 * (b - a).cross(c - a).norm() < 1e-14 * diag2) {
            ++degenerate;
        }
    }
    if (degenerate_faces != nullptr) {
        *degenerate_faces = degenerate;
    }
    return mesh;
}

}  // namespace pcflat
