#pragma once

#include "core.hpp"
#include "sparse.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

namespace pcflat {

/**
 * @brief Boundary area form. The nonzero block M1 is antisymmetric with
 * entries +-1/2 on positively oriented boundary edges; the full 2n x 2n
 * operator is [[0, M1], [-M1, 0]] and its quadratic form evaluates the
 * shoelace area of the mapped boundary polygon.
 */
struct AreaMatrix
{
    Index n = 0;
    SparseOperator m1;  // n x n

    /// 1/2 f^T M f = x^T M1 y, the signed mapped boundary area.
    [[nodiscard]] double quadratic_form(const std::vector<Vec2>& uv) const
    {
        double a = 0.0;
        for (const SparseOperator::Entry& e : m1.entries) {
            a += e.value * uv[static_cast<std::size_t>(e.row)].x() *
                 uv[static_cast<std::size_t>(e.col)].y();
        }
        return a;
    }

    /// Assembled 2n x 2n operator (diagnostics; the solver uses the block form).
    [[nodiscard]] SparseOperator to_full() const
    {
        SparseOperator full(2 * n, 2 * n);
        for (const SparseOperator::Entry& e : m1.entries) {
            full.add(e.row, e.col + n, e.value);
            full.add(e.row + n, e.col, -e.value);
        }
        full.compress();
        return full;
    }
};

/** @brief Two vertices pinned to (0,0) and (1,0). */
struct PinConstraint
{
    Index i0 = -1;
    Index i1 = -1;
};

/// Area matrix of an oriented boundary loop.
inline AreaMatrix area_matrix(const std::vector<Index>& boundary, Index n)
{
    if (boundary.size() < 3) {
        throw DataError("area_matrix: boundary loop shorter than 3");
    }
    AreaMatrix m;
    m.n = n;
    m.m1.rows = n;
    m.m1.cols = n;
    for (std::size_t s = 0; s < boundary.size(); ++s) {
        const Index i = boundary[s];
        const Index j = boundary[(s + 1) % boundary.size()];
        if (i < 0 || i >= n || j < 0 || j >= n) {
            throw DataError("area_matrix: boundary index out of range");
        }
        m.m1.add(i, j, 0.5);
        m.m1.add(j, i, -0.5);
    }
    m.m1.compress();
    return m;
}

namespace detail {

inline double sq_dist(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm(); }

inline bool better_pair(double d2, Index i, Index j, double bd2, Index bi, Index bj)
{
    if (d2 != bd2) {
        return d2 > bd2;
    }
    return i != bi ? i < bi : j < bj;
}

}  // namespace detail

/**
 * @brief Indices of the farthest point pair, (i, j) with i < j; ties go to
 * the lexicographically smaller index pair.
 *
 * Exact O(n^2) scan at desk scale; above 50k points the scan is pruned with
 * a uniform grid (still exact, cell pairs are skipped only when a distance
 * bound proves they cannot win).
 */
inline std::pair<Index, Index> farthest_pair(const PointCloud& pc)
{
    const Index n = pc.size();
    if (n < 2) {
        throw DataError("farthest_pair: need at least 2 points");
    }
    const auto& p = pc.points;

    if (n <= 50000) {
        double best = -1.0;
        Index bi = 0, bj = 1;
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) {
                const double d2 = detail::sq_dist(p[static_cast<std::size_t>(i)],
                                                  p[static_cast<std::size_t>(j)]);
                if (detail::better_pair(d2, i, j, best, bi, bj)) {
                    best = d2;
                    bi = i;
                    bj = j;
                }
            }
        }
        return {bi, bj};
    }

    // Grid-pruned exact scan.
    Vec3 lo = p.front(), hi = p.front();
    for (const auto& q : p) {
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }
    const int g = std::max(2, static_cast<int>(std::cbrt(static_cast<double>(n) / 32.0)));
    const Vec3 ext = (hi - lo).cwiseMax(Vec3::Constant(1e-300));
    struct Cell
    {
        std::vector<Index> members;
        Vec3 lo = Vec3::Constant(1e300);
        Vec3 hi = Vec3::Constant(-1e300);
    };
    std::vector<Cell> cells(static_cast<std::size_t>(g) * g * g);
    const auto cell_of = [&](const Vec3& q) {
        int cx = std::min(g - 1, static_cast<int>((q.x() - lo.x()) / ext.x() * g));
        int cy = std::min(g - 1, static_cast<int>((q.y() - lo.y()) / ext.y() * g));
        int cz = std::min(g - 1, static_cast<int>((q.z() - lo.z()) / ext.z() * g));
        return (static_cast<std::size_t>(cx) * g + cy) * g + cz;
    };
    for (Index i = 0; i < n; ++i) {
        Cell& c = cells[cell_of(p[static_cast<std::size_t>(i)])];
        c.members.push_back(i);
        c.lo = c.lo.cwiseMin(p[static_cast<std::size_t>(i)]);
        c.hi = c.hi.cwiseMax(p[static_cast<std::size_t>(i)]);
    }
    const auto ub2 = [](const Cell& a, const Cell& b) {
        double s = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
            const double d = std::max(std::abs(a.hi[ax] - b.lo[ax]), std::abs(b.hi[ax] - a.lo[ax]));
            s += d * d;
        }
        return s;
    };
    struct Pair
    {
        double bound;
        std::size_t a, b;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < cells.size(); ++a) {
        if (cells[a].members.empty()) {
            continue;
        }
        for (std::size_t b = a; b < cells.size(); ++b) {
            if (cells[b].members.empty()) {
                continue;
            }
            pairs.push_back({ub2(cells[a], cells[b]), a, b});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        return x.bound != y.bound ? x.bound > y.bound : std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    double best = -1.0;
    Index bi = 0, bj = 1;
    for (const Pair& pr : pairs) {
        if (pr.bound < best) {
            break;
        }
        for (Index i : cells[pr.a].members) {
            for (Index j : cells[pr.b].members) {
                if (i >= j) {
                    continue;
                }
                const double d2 = detail::sq_dist(p[static_cast<std::size_t>(i)],
                                                  p[static_cast<std::size_t>(j)]);
                if (detail::better_pair(d2, i, j, best, bi, bj)) {
                    best = d2;
                    bi = i;
                    bj = j;
                }
            }
        }
    }
    return {bi, bj};
}

/**
 * @brief Solves the free-boundary system (diag(L, L) - M) f = 0 with the
 * four pinned scalars eliminated to the right-hand side.
 *
 * The reduced system goes through a general sparse LU factorization; the
 * free-equation residual is verified against 1e-8 * |K| * |f|.
 */
inline Parameterization solve_free_boundary(
    const SparseOperator& L, const AreaMatrix& M, const PinConstraint& pins)
{
    const Index n = L.rows;
    if (pins.i0 == pins.i1 || pins.i0 < 0 || pins.i1 < 0 || pins.i0 >= n || pins.i1 >= n) {
        throw DataError("solve_free_boundary: invalid pin pair");
    }

    // System K = [[L, -M1], [M1, L]] over unknowns (x; y).
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * L.entries.size() + 2 * M.m1.entries.size());
    for (const SparseOperator::Entry& e : L.entries) {
        trip.emplace_back(e.row, e.col, e.value);
        trip.emplace_back(e.row + n, e.col + n, e.value);
    }
    for (const SparseOperator::Entry& e : M.m1.entries) {
        trip.emplace_back(e.row, e.col + n, -e.value);
        trip.emplace_back(e.row + n, e.col, e.value);
    }
    Eigen::SparseMatrix<double> K(2 * n, 2 * n);
    K.setFromTriplets(trip.begin(), trip.end());

    // dof layout: x_i at i, y_i at n+i; pinned: x,y of both pin vertices
    std::vector<double> pin_value(static_cast<std::size_t>(2 * n), 0.0);
    std::vector<char> pinned(static_cast<std::size_t>(2 * n), 0);
    pinned[static_cast<std::size_t>(pins.i0)] = 1;
    pinned[static_cast<std::size_t>(pins.i0 + n)] = 1;
    pinned[static_cast<std::size_t>(pins.i1)] = 1;
    pinned[static_cast<std::size_t>(pins.i1 + n)] = 1;
    pin_value[static_cast<std::size_t>(pins.i1)] = 1.0;

    std::vector<Index> reduced(static_cast<std::size_t>(2 * n), -1);
    Index nfree = 0;
    for (Index d = 0; d < 2 * n; ++d) {
        if (!pinned[static_cast<std::size_t>(d)]) {
            reduced[static_cast<std::size_t>(d)] = nfree++;
        }
    }

    std::vector<Eigen::Triplet<double>> rtrip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    for (int k = 0; k < K.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
            const Index r = static_cast<Index>(it.row());
            const Index c = static_cast<Index>(it.col());
            if (pinned[static_cast<std::size_t>(r)]) {
                continue;
            }
            if (pinned[static_cast<std::size_t>(c)]) {
                rhs[reduced[static_cast<std::size_t>(r)]] -=
                    it.value() * pin_value[static_cast<std::size_t>(c)];
            } else {
                rtrip.emplace_back(
                    reduced[static_cast<std::size_t>(r)], reduced[static_cast<std::size_t>(c)],
                    it.value());
            }
        }
    }
    Eigen::SparseMatrix<double> Kr(nfree, nfree);
    Kr.setFromTriplets(rtrip.begin(), rtrip.end());

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Kr);
    if (lu.info() != Eigen::Success) {
        throw NumericalError("system singular -- check point cloud connectivity/boundary");
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) {
        throw NumericalError("solve_free_boundary: non-finite solution");
    }

    Eigen::VectorXd full(2 * n);
    for (Index d = 0; d < 2 * n; ++d) {
        full[d] = pinned[static_cast<std::size_t>(d)] ? pin_value[static_cast<std::size_t>(d)]
                                                      : sol[reduced[static_cast<std::size_t>(d)]];
    }

    const Eigen::VectorXd resid = Kr * sol - rhs;
    const double tol = 1e-8 * std::max(1e-300, K.norm() * full.norm());
    if (resid.norm() > tol) {
        throw NumericalError("solve_free_boundary: residual above tolerance");
    }

    Parameterization f;
    f.uv.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        f.uv[static_cast<std::size_t>(i)] = Vec2(full[i], full[i + n]);
    }
    return f;
}

/** @brief Energy triple of a planar map: Dirichlet, area, conformal. */
struct ConformalEnergy
{
    double dirichlet = 0.0;
    double area = 0.0;
    double conformal = 0.0;
};

/// E_D = 1/2 f^T diag(L,L) f, A = 1/2 f^T M f, E_C = E_D - A.
inline ConformalEnergy conformal_energy(
    const SparseOperator& L, const AreaMatrix& M, const Parameterization& f)
{
    if (L.rows != static_cast<Index>(f.uv.size()) || M.n != L.rows) {
        throw DataError("conformal_energy: dimension mismatch");
    }
    ConformalEnergy e;
    for (const SparseOperator::Entry& en : L.entries) {
        const Vec2& a = f.uv[static_cast<std::size_t>(en.row)];
        const Vec2& b = f.uv[static_cast<std::size_t>(en.col)];
        e.dirichlet += 0.5 * en.value * (a.x() * b.x() + a.y() * b.y());
    }
    e.area = M.quadratic_form(f.uv);
    e.conformal = e.dirichlet - e.area;
    return e;
}

}  // namespace pcflat
