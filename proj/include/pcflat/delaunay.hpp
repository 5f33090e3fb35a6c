#pragma once

#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace pcflat {

namespace detail {

/// Signed doubled area of (a,b,c); positive when counterclockwise.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const double l = (b.x() - a.x()) * (c.y() - a.y());
    const double r = (b.y() - a.y()) * (c.x() - a.x());
    const double det = l - r;
    const double mag = std::abs(l) + std::abs(r);
    if (std::abs(det) > 1e-12 * mag) {
        return det;
    }
    // Shaky sign: redo in extended precision.
    const long double lx = (static_cast<long double>(b.x()) - a.x()) *
                           (static_cast<long double>(c.y()) - a.y());
    const long double rx = (static_cast<long double>(b.y()) - a.y()) *
                           (static_cast<long double>(c.x()) - a.x());
    const long double d = lx - rx;
    if (std::abs(static_cast<double>(d)) <= 1e-18 * mag) {
        return 0.0;
    }
    return static_cast<double>(d);
}

/**
 * incircle predicate: positive when d is strictly inside the circumcircle
 * of counterclockwise (a,b,c). Near-zero determinants are re-evaluated in
 * extended precision and snapped to 0 when still ambiguous (cocircular).
 */
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const auto det3 = [](auto ax, auto ay, auto aw, auto bx, auto by, auto bw, auto cx, auto cy,
                         auto cw) {
        return ax * (by * cw - bw * cy) - ay * (bx * cw - bw * cx) + aw * (bx * cy - by * cx);
    };
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double aw = adx * adx + ady * ady;
    const double bw = bdx * bdx + bdy * bdy;
    const double cw = cdx * cdx + cdy * cdy;
    const double det = det3(adx, ady, aw, bdx, bdy, bw, cdx, cdy, cw);
    const double mag = (std::abs(adx) + std::abs(ady) + aw) * (std::abs(bdx) + std::abs(bdy) + bw) *
                       (std::abs(cdx) + std::abs(cdy) + cw);
    if (std::abs(det) > 1e-11 * mag) {
        return det;
    }
    const long double ladx = static_cast<long double>(a.x()) - d.x();
    const long double lady = static_cast<long double>(a.y()) - d.y();
    const long double lbdx = static_cast<long double>(b.x()) - d.x();
    const long double lbdy = static_cast<long double>(b.y()) - d.y();
    const long double lcdx = static_cast<long double>(c.x()) - d.x();
    const long double lcdy = static_cast<long double>(c.y()) - d.y();
    const long double law = ladx * ladx + lady * lady;
    const long double lbw = lbdx * lbdx + lbdy * lbdy;
    const long double lcw = lcdx * lcdx + lcdy * lcdy;
    const long double ldet = det3(ladx, lady, law, lbdx, lbdy, lbw, lcdx, lcdy, lcw);
    if (std::abs(static_cast<double>(ldet)) <= 1e-14 * mag) {
        return 0.0;  // cocircular within precision
    }
    return static_cast<double>(ldet);
}

}  // namespace detail

/**
 * @brief 2D Delaunay triangulation (incremental Bowyer-Watson).
 *
 * Returns counterclockwise triangles over the input indices. Exactly
 * cocircular quads are resolved canonically: the kept diagonal is the one
 * containing the smallest tie key. Keys default to the point indices; a
 * caller that triangulates overlapping subsets of one global point set can
 * pass global ids so that all subsets agree on degenerate configurations.
 *
 * Throws DataError on fewer than 3 points, on all-collinear input, and on
 * exactly coincident points.
 */
class Delaunay2D
{
public:
    static std::vector<Triangle> triangulate(
        const std::vector<Vec2>& pts, const std::vector<Index>* tie_keys = nullptr)
    {
        Delaunay2D d(pts, tie_keys);
        return d.run();
    }

private:
    struct Tri
    {
        Index v[3];   // vertices, CCW
        int nbr[3];   // neighbor across edge (v[e], v[e+1]); -1 = none
        bool alive = true;
    };

    Delaunay2D(const std::vector<Vec2>& pts, const std::vector<Index>* tie_keys)
        : input_(pts), keys_(tie_keys)
    {
    }

    std::vector<Triangle> run()
    {
        const std::size_t m = input_.size();
        if (m < 3) {
            throw DataError("degenerate projection: fewer than 3 points");
        }
        normalize();
        if (all_collinear()) {
            throw DataError("degenerate projection: collinear points");
        }
        make_super();
        for (Index i = 0; i < static_cast<Index>(m); ++i) {
            insert(i);
        }
        canonical_flips();
        return collect();
    }

    void normalize()
    {
        Vec2 lo = input_.front();
        Vec2 hi = input_.front();
        for (const auto& p : input_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec2 center = 0.5 * (lo + hi);
        double ext = std::max((hi - lo).x(), (hi - lo).y());
        if (ext <= 0.0) {
            ext = 1.0;
        }
        pts_.reserve(input_.size() + 3);
        for (const auto& p : input_) {
            pts_.push_back((p - center) / ext);
        }
    }

    bool all_collinear() const
    {
        const Vec2& a = pts_[0];
        std::size_t j = 1;
        while (j < pts_.size() && (pts_[j] - a).norm() < 1e-14) {
            ++j;
        }
        if (j >= pts_.size()) {
            return true;
        }
        for (std::size_t t = j + 1; t < pts_.size(); ++t) {
            if (detail::orient2d(a, pts_[j], pts_[t]) != 0.0) {
                return false;
            }
        }
        return true;
    }

    void make_super()
    {
        const double c = 64.0;
        super_ = static_cast<Index>(pts_.size());
        pts_.push_back(Vec2(-c, -c));
        pts_.push_back(Vec2(c, -c));
        pts_.push_back(Vec2(0.0, c));
        Tri t;
        t.v[0] = super_;
        t.v[1] = super_ + 1;
        t.v[2] = super_ + 2;
        t.nbr[0] = t.nbr[1] = t.nbr[2] = -1;
        tris_.push_back(t);
        last_ = 0;
    }

    bool is_super(Index v) const { return v >= super_; }

    int locate(const Vec2& p) const
    {
        int t = last_;
        if (t < 0 || !tris_[static_cast<std::size_t>(t)].alive) {
            t = -1;
            for (std::size_t i = 0; i < tris_.size(); ++i) {
                if (tris_[i].alive) {
                    t = static_cast<int>(i);
                    break;
                }
            }
        }
        std::size_t steps = 0;
        const std::size_t budget = 4 * tris_.size() + 64;
        while (steps++ < budget) {
            const Tri& tr = tris_[static_cast<std::size_t>(t)];
            int next = -1;
            for (int e = 0; e < 3; ++e) {
                const Vec2& a = pts_[static_cast<std::size_t>(tr.v[e])];
                const Vec2& b = pts_[static_cast<std::size_t>(tr.v[(e + 1) % 3])];
                if (detail::orient2d(a, b, p) < 0.0) {
                    next = tr.nbr[e];
                    break;
                }
            }
            if (next < 0) {
                return t;
            }
            t = next;
        }
        // Walk cycled on a degenerate configuration; fall back to a scan.
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            if (!tris_[i].alive) {
                continue;
            }
            const Tri& tr = tris_[i];
            bool inside = true;
            for (int e = 0; e < 3 && inside; ++e) {
                const Vec2& a = pts_[static_cast<std::size_t>(tr.v[e])];
                const Vec2& b = pts_[static_cast<std::size_t>(tr.v[(e + 1) % 3])];
                inside = detail::orient2d(a, b, p) >= 0.0;
            }
            if (inside) {
                return static_cast<int>(i);
            }
        }
        throw NumericalError("delaunay: point location failed");
    }

    bool in_circumdisk(const Tri& t, const Vec2& p) const
    {
        return detail::incircle(
                   pts_[static_cast<std::size_t>(t.v[0])], pts_[static_cast<std::size_t>(t.v[1])],
                   pts_[static_cast<std::size_t>(t.v[2])], p) > 0.0;
    }

    void insert(Index vi)
    {
        const Vec2& p = pts_[static_cast<std::size_t>(vi)];
        for (Index j = 0; j < vi; ++j) {
            if ((pts_[static_cast<std::size_t>(j)] - p).norm() == 0.0) {
                throw DataError("delaunay: coincident points " + std::to_string(j) + " and " +
                                std::to_string(vi));
            }
        }
        const int seed = locate(p);

        // Grow the cavity of triangles whose circumdisk contains p.
        std::vector<int> cavity;
        std::vector<int> stack{seed};
        std::vector<char> in_cavity(tris_.size(), 0);
        in_cavity[static_cast<std::size_t>(seed)] = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int e = 0; e < 3; ++e) {
                const int nb = tris_[static_cast<std::size_t>(t)].nbr[e];
                if (nb >= 0 && !in_cavity[static_cast<std::size_t>(nb)] &&
                    in_circumdisk(tris_[static_cast<std::size_t>(nb)], p)) {
                    in_cavity[static_cast<std::size_t>(nb)] = 1;
                    stack.push_back(nb);
                }
            }
        }

        // Directed boundary edges of the cavity, plus the outside neighbor.
        struct BEdge
        {
            Index a, b;
            int outside;
        };
        std::vector<BEdge> border;
        for (int t : cavity) {
            const Tri& tr = tris_[static_cast<std::size_t>(t)];
            for (int e = 0; e < 3; ++e) {
                const int nb = tr.nbr[e];
                if (nb < 0 || !in_cavity[static_cast<std::size_t>(nb)]) {
                    border.push_back({tr.v[e], tr.v[(e + 1) % 3], nb});
                }
            }
        }
        for (int t : cavity) {
            tris_[static_cast<std::size_t>(t)].alive = false;
        }

        // Fan p to the border; link neighbors via shared endpoints.
        std::vector<int> fresh;
        fresh.reserve(border.size());
        for (const BEdge& e : border) {
            Tri t;
            t.v[0] = vi;
            t.v[1] = e.a;
            t.v[2] = e.b;
            t.nbr[0] = -1;  // across (vi, e.a): sibling fan triangle
            t.nbr[1] = e.outside;
            t.nbr[2] = -1;  // across (e.b, vi)
            const int id = static_cast<int>(tris_.size());
            tris_.push_back(t);
            fresh.push_back(id);
            if (e.outside >= 0) {
                Tri& o = tris_[static_cast<std::size_t>(e.outside)];
                for (int oe = 0; oe < 3; ++oe) {
                    if (o.v[oe] == e.b && o.v[(oe + 1) % 3] == e.a) {
                        o.nbr[oe] = id;
                    }
                }
            }
        }
        // stitch fan siblings: edge (vi, a) of one equals (b, vi) of another
        for (int i : fresh) {
            Tri& ti = tris_[static_cast<std::size_t>(i)];
            for (int j : fresh) {
                if (i == j) {
                    continue;
                }
                const Tri& tj = tris_[static_cast<std::size_t>(j)];
                if (ti.v[1] == tj.v[2]) {
                    ti.nbr[0] = j;
                }
                if (ti.v[2] == tj.v[1]) {
                    ti.nbr[2] = j;
                }
            }
        }
        if (!fresh.empty()) {
            last_ = fresh.back();
        }
    }

    Index key(Index v) const
    {
        return keys_ != nullptr ? (*keys_)[static_cast<std::size_t>(v)] : v;
    }

    /**
     * Flip exactly-cocircular interior quads to the canonical diagonal (the
     * one containing the smallest tie key). Subsets of one point set that
     * share a cocircular quad then always pick the same diagonal.
     */
    void canonical_flips()
    {
        bool changed = true;
        int rounds = 0;
        while (changed && rounds++ < 16) {
            changed = false;
            for (std::size_t t = 0; t < tris_.size(); ++t) {
                if (!tris_[t].alive) {
                    continue;
                }
                for (int e = 0; e < 3; ++e) {
                    if (try_canonical_flip(static_cast<int>(t), e)) {
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    bool try_canonical_flip(int t, int e)
    {
        Tri& tr = tris_[static_cast<std::size_t>(t)];
        const int nb = tr.nbr[e];
        if (nb < 0 || nb < t) {
            return false;  // visit each interior edge once per round
        }
        Tri& on = tris_[static_cast<std::size_t>(nb)];
        const Index a = tr.v[e];
        const Index b = tr.v[(e + 1) % 3];
        const Index c = tr.v[(e + 2) % 3];
        int oe = -1;
        for (int i = 0; i < 3; ++i) {
            if (on.v[i] == b && on.v[(i + 1) % 3] == a) {
                oe = i;
            }
        }
        if (oe < 0) {
            return false;
        }
        const Index d = on.v[(oe + 2) % 3];
        if (is_super(a) || is_super(b) || is_super(c) || is_super(d)) {
            return false;
        }
        const double ic = detail::incircle(
            pts_[static_cast<std::size_t>(a)], pts_[static_cast<std::size_t>(b)],
            pts_[static_cast<std::size_t>(c)], pts_[static_cast<std::size_t>(d)]);
        if (ic != 0.0) {
            return false;  // strict Delaunay decision, nothing to canonicalize
        }
        const Index kmin = std::min({key(a), key(b), key(c), key(d)});
        if (kmin == key(a) || kmin == key(b)) {
            return false;  // current diagonal already canonical
        }
        // flip (a,b) -> (c,d); cocircular quads are strictly convex
        const int t_bc = tr.nbr[(e + 1) % 3];
        const int t_ca = tr.nbr[(e + 2) % 3];
        const int t_ad = on.nbr[(oe + 1) % 3];
        const int t_db = on.nbr[(oe + 2) % 3];
        tr.v[0] = c;
        tr.v[1] = a;
        tr.v[2] = d;
        tr.nbr[0] = t_ca;
        tr.nbr[1] = t_ad;
        tr.nbr[2] = nb;
        on.v[0] = d;
        on.v[1] = b;
        on.v[2] = c;
        on.nbr[0] = t_db;
        on.nbr[1] = t_bc;
        on.nbr[2] = t;
        replace_neighbor(t_ad, nb, t);
        replace_neighbor(t_bc, t, nb);
        return true;
    }

    void replace_neighbor(int tri, int from, int to)
    {
        if (tri < 0) {
            return;
        }
        Tri& t = tris_[static_cast<std::size_t>(tri)];
        for (int e = 0; e < 3; ++e) {
            if (t.nbr[e] == from) {
                t.nbr[e] = to;
            }
        }
    }

    std::vector<Triangle> collect() const
    {
        std::vector<Triangle> out;
        for (const Tri& t : tris_) {
            if (!t.alive || is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) {
                continue;
            }
            Triangle tri{t.v[0], t.v[1], t.v[2]};
            // rotate smallest index first, orientation preserved
            int s = 0;
            for (int i = 1; i < 3; ++i) {
                if (tri[static_cast<std::size_t>(i)] < tri[static_cast<std::size_t>(s)]) {
                    s = i;
                }
            }
            out.push_back({tri[static_cast<std::size_t>(s)],
                           tri[static_cast<std::size_t>((s + 1) % 3)],
                           tri[static_cast<std::size_t>((s + 2) % 3)]});
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const std::vector<Vec2>& input_;
    const std::vector<Index>* keys_ = nullptr;
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    Index super_ = 0;
    int last_ = -1;
};

/// Convenience wrapper over Delaunay2D::triangulate.
inline std::vector<Triangle> delaunay_2d(
    const std::vector<Vec2>& pts, const std::vector<Index>* tie_keys = nullptr)
{
    return Delaunay2D::triangulate(pts, tie_keys);
}

}  // namespace pcflat
