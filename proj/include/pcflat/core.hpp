#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcflat {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Index = std::int32_t;
using Triangle = std::array<Index, 3>;

/** @brief Base class for all library errors. */
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/** @brief Invalid or inconsistent input data. */
class DataError : public Error
{
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/** @brief Numerical failure (singular system, non-finite result, ...). */
class NumericalError : public Error
{
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/**
 * @brief A 3D point set with an oriented boundary loop.
 *
 * The boundary is an ordered list of distinct vertex indices traversed
 * positively (surface interior on the left). Boundary detection is not
 * performed here; the loop is part of the input.
 */
struct PointCloud
{
    std::vector<Vec3> points;
    std::vector<Index> boundary;

    [[nodiscard]] Index size() const { return static_cast<Index>(points.size()); }

    /** Euclidean diameter of the axis-aligned bounding box. */
    [[nodiscard]] double bbox_diagonal() const
    {
        if (points.empty()) {
            return 0.0;
        }
        Vec3 lo = points.front();
        Vec3 hi = points.front();
        for (const auto& p : points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return (hi - lo).norm();
    }
};

/** @brief Parameters of the local approximation stage. */
struct Config
{
    int k = 25;        ///< neighborhood size
    double c1 = 15.0;  ///< lower boundary-angle bound (degrees)
    double c2 = 120.0; ///< upper boundary-angle bound (degrees)

    /// Throws DataError when outside the supported ranges (k >= 7, 0 <= c1 < c2 <= 180).
    void validate() const
    {
        if (k < 7) {
            throw DataError("config: k must be >= 7");
        }
        if (!(c1 >= 0.0 && c1 < c2 && c2 <= 180.0)) {
            throw DataError("config: require 0 <= c1 < c2 <= 180");
        }
    }
};

/** @brief Planar coordinates per vertex, indexed like PointCloud::points. */
struct Parameterization
{
    std::vector<Vec2> uv;

    [[nodiscard]] Index size() const { return static_cast<Index>(uv.size()); }

    [[nodiscard]] bool all_finite() const
    {
        for (const auto& p : uv) {
            if (!p.allFinite()) {
                return false;
            }
        }
        return true;
    }
};

/** @brief Indexed triangle mesh with an oriented boundary loop. */
struct TriangleMesh
{
    std::vector<Vec3> vertices;
    std::vector<Triangle> faces;
    std::vector<Index> boundary;
};

/** @brief Outcome of input validation. */
struct ValidationReport
{
    bool pass = true;
    std::vector<std::string> messages;

    void fail(std::string msg)
    {
        pass = false;
        messages.emplace_back(std::move(msg));
    }
};

/**
 * @brief Diagnostic check of the PointCloud invariants.
 *
 * Reports duplicate points, out-of-range or repeated boundary indices and a
 * too-short boundary loop. Never throws; all findings end up in the report.
 */
inline ValidationReport validate_point_cloud(const PointCloud& pc)
{
    ValidationReport report;
    const Index n = pc.size();

    if (n < 4) {
        report.fail("point count " + std::to_string(n) + " < 4");
    }
    if (pc.boundary.size() < 3) {
        report.fail("boundary loop length " + std::to_string(pc.boundary.size()) + " < 3");
    }

    std::vector<char> seen(static_cast<std::size_t>(std::max<Index>(n, 0)), 0);
    for (Index b : pc.boundary) {
        if (b < 0 || b >= n) {
            report.fail("boundary index " + std::to_string(b) + " out of range");
        } else if (seen[static_cast<std::size_t>(b)]) {
            report.fail("boundary index " + std::to_string(b) + " repeated");
        } else {
            seen[static_cast<std::size_t>(b)] = 1;
        }
    }

    // Exact coordinate duplicates via lexicographic sort.
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const Vec3& pa = pc.points[static_cast<std::size_t>(a)];
        const Vec3& pb = pc.points[static_cast<std::size_t>(b)];
        if (pa.x() != pb.x()) return pa.x() < pb.x();
        if (pa.y() != pb.y()) return pa.y() < pb.y();
        if (pa.z() != pb.z()) return pa.z() < pb.z();
        return a < b;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const Vec3& a = pc.points[static_cast<std::size_t>(order[i - 1])];
        const Vec3& b = pc.points[static_cast<std::size_t>(order[i])];
        if (a == b) {
            report.fail(
                "duplicate point: indices " + std::to_string(order[i - 1]) + " and " +
                std::to_string(order[i]));
        }
    }

    for (Index i = 0; i < n; ++i) {
        if (!pc.points[static_cast<std::size_t>(i)].allFinite()) {
            report.fail("non-finite coordinate at index " + std::to_string(i));
        }
    }
    return report;
}

}  // namespace pcflat
