#pragma once

#include "core.hpp"
#include "delaunay.hpp"
#include "kdtree.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

namespace pcflat {

/**
 * @brief Orthonormal frame at a vertex; e3 estimates the surface normal.
 */
struct TangentFrame
{
    Vec3 origin = Vec3::Zero();
    Vec3 e1 = Vec3::UnitX();
    Vec3 e2 = Vec3::UnitY();
    Vec3 e3 = Vec3::UnitZ();
};

/**
 * @brief One-ring of a vertex: the incident triangles of its local
 * triangulation, in global indices, and the vertex set they span.
 */
struct LocalRing
{
    Index center = -1;
    std::vector<Triangle> triangles;
    std::vector<Index> neighbors;

    void rebuild_neighbors()
    {
        neighbors.clear();
        for (const Triangle& t : triangles) {
            for (Index v : t) {
                if (v != center) {
                    neighbors.push_back(v);
                }
            }
        }
        std::sort(neighbors.begin(), neighbors.end());
        neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
    }
};

/// k nearest neighbors of vertex i, ties broken by smaller index.
inline std::vector<Index> knn(const PointCloud& pc, Index i, int k)
{
    KdTree tree(pc.points);
    return tree.knn(i, k);
}

/**
 * @brief PCA frame of the neighbor set, centered at vertex i.
 *
 * e1..e3 are covariance eigenvectors in descending eigenvalue order; the
 * normal e3 spans the least-variance direction. Signs are canonicalized
 * (largest-magnitude component positive) and e2 completes a right-handed
 * frame. Throws DataError on a rank-deficient neighborhood.
 */
inline TangentFrame pca_frame(const PointCloud& pc, Index i, const std::vector<Index>& nbrs)
{
    if (nbrs.size() < 3) {
        throw DataError("degenerate neighborhood: fewer than 3 neighbors");
    }
    Vec3 mean = Vec3::Zero();
    for (Index j : nbrs) {
        mean += pc.points[static_cast<std::size_t>(j)];
    }
    mean /= static_cast<double>(nbrs.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (Index j : nbrs) {
        const Vec3 d = pc.points[static_cast<std::size_t>(j)] - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("pca_frame: eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues.
    const Vec3 evals = eig.eigenvalues();
    if (evals[2] <= 0.0 || (evals[0] < 1e-12 * evals[2] && evals[1] < 1e-12 * evals[2])) {
        throw DataError("degenerate neighborhood");
    }

    const auto canonical = [](Vec3 v) {
        int m = 0;
        for (int a = 1; a < 3; ++a) {
            if (std::abs(v[a]) > std::abs(v[m])) {
                m = a;
            }
        }
        return v[m] < 0.0 ? Vec3(-v) : v;
    };

    TangentFrame f;
    f.origin = pc.points[static_cast<std::size_t>(i)];
    f.e1 = canonical(eig.eigenvectors().col(2));
    f.e3 = canonical(eig.eigenvectors().col(0));
    f.e2 = f.e3.cross(f.e1).normalized();
    f.e1.normalize();
    f.e3.normalize();
    return f;
}

/// Tangent-plane coordinates of each listed vertex: ((v-origin)|e1, (v-origin)|e2).
inline std::vector<Vec2> project_to_tangent(
    const TangentFrame& frame, const std::vector<Index>& nbrs, const PointCloud& pc)
{
    std::vector<Vec2> out;
    out.reserve(nbrs.size());
    for (Index j : nbrs) {
        const Vec3 d = pc.points[static_cast<std::size_t>(j)] - frame.origin;
        out.emplace_back(d.dot(frame.e1), d.dot(frame.e2));
    }
    return out;
}

/**
 * @brief Delaunay triangulation of projected points.
 *
 * Coincident projections (closer than 1e-12 of the neighborhood diameter)
 * are separated by a deterministic 1e-9-scale offset keyed to the point
 * index before triangulating.
 */
inline std::vector<Triangle> local_delaunay(
    const std::vector<Vec2>& points2d, const std::vector<Index>* tie_keys = nullptr)
{
    if (points2d.size() < 3) {
        throw DataError("degenerate projection: fewer than 3 points");
    }
    Vec2 lo = points2d.front();
    Vec2 hi = points2d.front();
    for (const auto& p : points2d) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double diam = std::max((hi - lo).norm(), 1e-300);

    std::vector<Vec2> pts = points2d;
    bool touched = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if ((pts[i] - pts[j]).norm() < 1e-12 * diam) {
                const double angle = 2.399963229728653 * static_cast<double>(i + 1);
                pts[i] += 1e-9 * diam * Vec2(std::cos(angle), std::sin(angle));
                touched = true;
            }
        }
    }
    (void)touched;
    return delaunay_2d(pts, tie_keys);
}

/// Triangles of @p tris incident to vertex i. Throws if i appears nowhere.
inline LocalRing one_ring(Index i, const std::vector<Triangle>& tris)
{
    LocalRing ring;
    ring.center = i;
    for (const Triangle& t : tris) {
        if (t[0] == i || t[1] == i || t[2] == i) {
            ring.triangles.push_back(t);
        }
    }
    if (ring.triangles.empty()) {
        throw DataError("isolated vertex " + std::to_string(i));
    }
    ring.rebuild_neighbors();
    return ring;
}

namespace detail {

/// Interior angle at vertex `at` of triangle (at, u, w), in degrees.
inline double angle_deg(const Vec2& at, const Vec2& u, const Vec2& w)
{
    const Vec2 a = u - at;
    const Vec2 b = w - at;
    const double cross = a.x() * b.y() - a.y() * b.x();
    const double dot = a.dot(b);
    return std::atan2(std::abs(cross), dot) * 180.0 / std::numbers::pi;
}

}  // namespace detail

/**
 * @brief Boundary angle criterion: drop ring triangles whose angle at the
 * center vertex (measured in the projected plane) falls outside (c1, c2).
 *
 * @param uv   projected coordinate for every vertex referenced by the ring,
 *             keyed by global index
 * @param all_angles when true, test all three angles instead of only the
 *             center one (comparison variant)
 *
 * The result may be empty; callers decide how to treat emptied rings.
 */
inline LocalRing apply_angle_criterion(
    const LocalRing& ring, const std::unordered_map<Index, Vec2>& uv, double c1, double c2,
    bool all_angles = false)
{
    LocalRing out;
    out.center = ring.center;
    for (const Triangle& t : ring.triangles) {
        const Vec2& p0 = uv.at(t[0]);
        const Vec2& p1 = uv.at(t[1]);
        const Vec2& p2 = uv.at(t[2]);
        bool keep = true;
        if (all_angles) {
            const double a0 = detail::angle_deg(p0, p1, p2);
            const double a1 = detail::angle_deg(p1, p2, p0);
            const double a2 = detail::angle_deg(p2, p0, p1);
            keep = (a0 > c1 && a0 < c2) && (a1 > c1 && a1 < c2) && (a2 > c1 && a2 < c2);
        } else {
            int c = 0;
            while (t[static_cast<std::size_t>(c)] != ring.center) {
                ++c;
            }
            const Vec2& at = uv.at(t[static_cast<std::size_t>(c)]);
            const Vec2& u = uv.at(t[static_cast<std::size_t>((c + 1) % 3)]);
            const Vec2& w = uv.at(t[static_cast<std::size_t>((c + 2) % 3)]);
            const double theta = detail::angle_deg(at, u, w);
            keep = theta > c1 && theta < c2;
        }
        if (keep) {
            out.triangles.push_back(t);
        }
    }
    out.rebuild_neighbors();
    return out;
}

/// Center-vertex angle of a ring triangle in the projected plane (degrees).
inline double ring_center_angle(
    const Triangle& t, Index center, const std::unordered_map<Index, Vec2>& uv)
{
    int c = 0;
    while (t[static_cast<std::size_t>(c)] != center) {
        ++c;
    }
    return detail::angle_deg(
        uv.at(t[static_cast<std::size_t>(c)]), uv.at(t[static_cast<std::size_t>((c + 1) % 3)]),
        uv.at(t[static_cast<std::size_t>((c + 2) % 3)]));
}

}  // namespace pcflat
