#pragma once

#include "core.hpp"
#include "neighborhood.hpp"
#include "sparse.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace pcflat {

/** @brief Tunables for cotangent assembly; defaults match the pipeline. */
struct LaplacianOptions
{
    bool clamp_cotangents = true;
    double clamp_value = 1e8;
    bool skip_degenerate = true;
};

/**
 * @brief Cotangent stencil of one vertex's ring.
 *
 * Every ring triangle deposits weights on the 9 entries spanned by its
 * vertex pairs: -cot/2 on off-diagonals, compensating diagonal terms, so
 * each row of the stencil sums to zero and the matrix is symmetric.
 */
struct CotangentContribution
{
    Index center = -1;
    std::vector<SparseOperator::Entry> entries;
    int degenerate_skipped = 0;
};

namespace detail {

inline double clamp_cot(double c, const LaplacianOptions& opt)
{
    if (!opt.clamp_cotangents) {
        return c;
    }
    return std::clamp(c, -opt.clamp_value, opt.clamp_value);
}

inline void add_edge_weight(
    std::vector<SparseOperator::Entry>& entries, Index u, Index v, double half_cot)
{
    entries.push_back({u, v, -half_cot});
    entries.push_back({v, u, -half_cot});
    entries.push_back({u, u, half_cot});
    entries.push_back({v, v, half_cot});
}

}  // namespace detail

/**
 * @brief Cotangent contribution of a ring, with angles measured in the
 * projected plane.
 *
 * @param uv projected coordinates keyed by global vertex index; must cover
 *           every vertex referenced by the ring.
 */
inline CotangentContribution local_cotangent(
    const LocalRing& ring, const std::unordered_map<Index, Vec2>& uv,
    const LaplacianOptions& opt = {})
{
    CotangentContribution out;
    out.center = ring.center;

    double diam2 = 0.0;
    for (const Triangle& t : ring.triangles) {
        for (int e = 0; e < 3; ++e) {
            const Vec2 d = uv.at(t[static_cast<std::size_t>(e)]) -
                           uv.at(t[static_cast<std::size_t>((e + 1) % 3)]);
            diam2 = std::max(diam2, d.squaredNorm());
        }
    }

    for (const Triangle& t : ring.triangles) {
        const Vec2& p = uv.at(t[0]);
        const Vec2& q = uv.at(t[1]);
        const Vec2& r = uv.at(t[2]);
        const Vec2 pq = q - p, pr = r - p, qr = r - q;
        const double doubled_area = pq.x() * pr.y() - pq.y() * pr.x();
        if (opt.skip_degenerate && std::abs(doubled_area) * 0.5 <= 1e-14 * diam2) {
            ++out.degenerate_skipped;
            continue;
        }
        const double area = std::abs(doubled_area);
        const double cot_p = detail::clamp_cot(pq.dot(pr) / area, opt);
        const double cot_q = detail::clamp_cot((-pq).dot(qr) / area, opt);
        const double cot_r = detail::clamp_cot((-pr).dot(-qr) / area, opt);
        detail::add_edge_weight(out.entries, t[1], t[2], 0.5 * cot_p);
        detail::add_edge_weight(out.entries, t[0], t[2], 0.5 * cot_q);
        detail::add_edge_weight(out.entries, t[0], t[1], 0.5 * cot_r);
    }
    return out;
}

/**
 * @brief Accumulated point-cloud Laplacian: one third of the sum of all
 * per-vertex contributions.
 *
 * The contribution list is brought into ascending center order first, so
 * the result does not depend on how the list was produced.
 */
inline SparseOperator accumulate(std::vector<CotangentContribution> contribs, Index n)
{
    std::stable_sort(
        contribs.begin(), contribs.end(),
        [](const CotangentContribution& a, const CotangentContribution& b) {
            return a.center < b.center;
        });
    SparseOperator op(n, n);
    for (const CotangentContribution& c : contribs) {
        for (const SparseOperator::Entry& e : c.entries) {
            if (e.row >= n || e.col >= n || e.row < 0 || e.col < 0) {
                throw DataError("accumulate: entry index out of range");
            }
            op.add(e.row, e.col, e.value / 3.0);
        }
    }
    op.compress();
    return op;
}

/**
 * @brief Classical cotangent Laplacian of a triangle mesh (3D angles).
 * Used as the oracle the accumulated operator is checked against.
 */
inline SparseOperator mesh_cotangent(const TriangleMesh& mesh, const LaplacianOptions& opt = {})
{
    const Index n = static_cast<Index>(mesh.vertices.size());
    SparseOperator op(n, n);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Triangle& t = mesh.faces[f];
        const Vec3& p = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Vec3& q = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Vec3& r = mesh.vertices[static_cast<std::size_t>(t[2])];
        const Vec3 pq = q - p, pr = r - p, qr = r - q;
        const double area = pq.cross(pr).norm();
        const double scale = std::max({pq.squaredNorm(), pr.squaredNorm(), qr.squaredNorm()});
        if (area * 0.5 <= 1e-14 * scale) {
            throw DataError("mesh_cotangent: degenerate face " + std::to_string(f));
        }
        const double cot_p = detail::clamp_cot(pq.dot(pr) / area, opt);
        const double cot_q = detail::clamp_cot((-pq).dot(qr) / area, opt);
        const double cot_r = detail::clamp_cot((-pr).dot(-qr) / area, opt);
        detail::add_edge_weight(op.entries, t[1], t[2], 0.5 * cot_p);
        detail::add_edge_weight(op.entries, t[0], t[2], 0.5 * cot_q);
        detail::add_edge_weight(op.entries, t[0], t[1], 0.5 * cot_r);
    }
    op.compress();
    return op;
}

}  // namespace pcflat
