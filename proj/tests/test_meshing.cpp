#include <catch2/catch_amalgamated.hpp>

#include <pcflat/meshing.hpp>
#include <pcflat/metrics.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

using namespace pcflat;

namespace {

/// independent crossing-number point-in-polygon oracle
bool inside_oracle(const Vec2& p, const std::vector<Vec2>& poly)
{
    bool in = false;
    const std::size_t l = poly.size();
    for (std::size_t i = 0, j = l - 1; i < l; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
            in = !in;
        }
    }
    return in;
}

std::map<std::pair<Index, Index>, int> edge_counts(const std::vector<Triangle>& faces)
{
    std::map<std::pair<Index, Index>, int> counts;
    for (const Triangle& t : faces) {
        for (int e = 0; e < 3; ++e) {
            Index u = t[static_cast<std::size_t>(e)];
            Index v = t[static_cast<std::size_t>((e + 1) % 3)];
            if (u > v) {
                std::swap(u, v);
            }
            ++counts[{u, v}];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("square of four UV points meshes into two triangles")
{
    Parameterization f;
    f.uv = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto tris = triangulate_uv(f, {0, 1, 2, 3});
    CHECK(tris.size() == 2);
}

TEST_CASE("convex cloud keeps the full Delaunay triangulation")
{
    Parameterization f;
    std::vector<Index> hull;
    for (int b = 0; b < 24; ++b) {
        const double a = 2.0 * std::numbers::pi * b / 24.0;
        hull.push_back(static_cast<Index>(f.uv.size()));
        f.uv.emplace_back(std::cos(a), std::sin(a));
    }
    for (int i = 0; i < 60; ++i) {
        const double r = 0.85 * std::sqrt((i + 0.5) / 60.0);
        const double a = 2.399963229728653 * i;
        f.uv.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    const auto all = delaunay_2d(f.uv);
    const auto kept = triangulate_uv(f, hull);
    CHECK(kept.size() == all.size());
}

TEST_CASE("concave mapped boundary discards notch triangles")
{
    // L-shaped boundary: unit square minus the top-right quadrant
    Parameterization f;
    std::vector<Index> loop;
    const std::vector<Vec2> outline{Vec2(0, 0),     Vec2(1, 0),   Vec2(1, 0.5),
                                    Vec2(0.5, 0.5), Vec2(0.5, 1), Vec2(0, 1)};
    for (const auto& p : outline) {
        loop.push_back(static_cast<Index>(f.uv.size()));
        f.uv.push_back(p);
    }
    // interior points of the L, plus none in the notch
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            const Vec2 p(0.08 + x * 0.157, 0.08 + y * 0.157);
            if (p.x() > 0.45 && p.y() > 0.45) {
                continue;
            }
            f.uv.push_back(p);
        }
    }
    const auto kept = triangulate_uv(f, loop);
    REQUIRE_FALSE(kept.empty());

    std::vector<Vec2> poly;
    for (Index b : loop) {
        poly.push_back(f.uv[static_cast<std::size_t>(b)]);
    }
    const auto all = delaunay_2d(f.uv);
    std::size_t oracle_kept = 0;
    for (const Triangle& t : all) {
        const Vec2 c = (f.uv[static_cast<std::size_t>(t[0])] +
                        f.uv[static_cast<std::size_t>(t[1])] +
                        f.uv[static_cast<std::size_t>(t[2])]) /
                       3.0;
        if (inside_oracle(c, poly)) {
            ++oracle_kept;
        }
    }
    CHECK(kept.size() == oracle_kept);
    CHECK(kept.size() < all.size());  // the notch really lost triangles

    // no kept centroid in the notch
    for (const Triangle& t : kept) {
        const Vec2 c = (f.uv[static_cast<std::size_t>(t[0])] +
                        f.uv[static_cast<std::size_t>(t[1])] +
                        f.uv[static_cast<std::size_t>(t[2])]) /
                       3.0;
        CHECK_FALSE((c.x() > 0.5 && c.y() > 0.5));
    }
}

TEST_CASE("self-intersecting mapped boundary is rejected")
{
    Parameterization f;
    f.uv = {Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)};
    CHECK_THROWS_WITH(
        triangulate_uv(f, {0, 1, 2, 3}), Catch::Matchers::ContainsSubstring("folded boundary"));
}

TEST_CASE("lift carries coordinates, boundary and face audit")
{
    // hemisphere-like cap
    PointCloud pc;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < 200; ++i) {
        const double z = 0.45 + 0.55 * (i + 0.7) / 200.0;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        pc.points.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    const double rb = std::sqrt(1.0 - 0.45 * 0.45);
    for (int b = 0; b < 40; ++b) {
        const double a = 2.0 * std::numbers::pi * b / 40.0;
        pc.boundary.push_back(static_cast<Index>(pc.points.size()));
        pc.points.emplace_back(rb * std::cos(a), rb * std::sin(a), 0.45);
    }

    Config cfg;
    const auto res = parameterize(pc, cfg);
    const auto faces = triangulate_uv(res.f, pc.boundary);
    int degenerate = 0;
    const auto mesh = lift(faces, pc, &degenerate);

    CHECK(mesh.vertices.size() == pc.points.size());
    CHECK(mesh.boundary == pc.boundary);
    CHECK(degenerate == 0);

    // disk topology: V - E + F = 1
    const auto counts = edge_counts(faces);
    const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(mesh.vertices.size());
    const std::ptrdiff_t e = static_cast<std::ptrdiff_t>(counts.size());
    const std::ptrdiff_t fc = static_cast<std::ptrdiff_t>(faces.size());
    CHECK(v - e + fc == 1);

    // every non-boundary edge has exactly two incident faces
    std::set<std::pair<Index, Index>> boundary_edges;
    for (std::size_t s = 0; s < pc.boundary.size(); ++s) {
        Index u = pc.boundary[s];
        Index w = pc.boundary[(s + 1) % pc.boundary.size()];
        if (u > w) {
            std::swap(u, w);
        }
        boundary_edges.insert({u, w});
    }
    for (const auto& [edge, count] : counts) {
        if (boundary_edges.count(edge)) {
            CHECK(count == 1);
        } else {
            CHECK(count == 2);
        }
    }

    // UV triangulation is Delaunay by construction
    TriangleMesh uvmesh;
    for (const auto& p : res.f.uv) {
        uvmesh.vertices.emplace_back(p.x(), p.y(), 0.0);
    }
    uvmesh.faces = faces;
    CHECK(delaunay_ratio(uvmesh) == 1.0);

    // faces consistently counterclockwise in UV
    for (const Triangle& t : faces) {
        const Vec2 a = res.f.uv[static_cast<std::size_t>(t[1])] -
                       res.f.uv[static_cast<std::size_t>(t[0])];
        const Vec2 b = res.f.uv[static_cast<std::size_t>(t[2])] -
                       res.f.uv[static_cast<std::size_t>(t[0])];
        CHECK(a.x() * b.y() - a.y() * b.x() > 0.0);
    }
}

TEST_CASE("flat cloud lifts to the UV triangulation itself")
{
    PointCloud pc;
    pc.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0), Vec3(0.5, 0.4, 0)};
    pc.boundary = {0, 1, 2, 3};
    Parameterization f;
    for (const auto& p : pc.points) {
        f.uv.emplace_back(p.x(), p.y());
    }
    const auto faces = triangulate_uv(f, pc.boundary);
    const auto mesh = lift(faces, pc);
    CHECK(mesh.faces.size() == 4);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        CHECK(mesh.vertices[i].head<2>().isApprox(f.uv[i]));
        CHECK(mesh.vertices[i].z() == 0.0);
    }
}
