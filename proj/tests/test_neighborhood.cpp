#include <catch2/catch_amalgamated.hpp>

#include <pcflat/neighborhood.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace pcflat;

namespace {

PointCloud line_cloud()
{
    PointCloud pc;
    for (int i = 0; i < 4; ++i) {
        pc.points.emplace_back(static_cast<double>(i), 0.0, 0.0);
    }
    return pc;
}

/// brute-force oracle: full scan ordered by (squared distance, index)
std::vector<Index> knn_oracle(const PointCloud& pc, Index i, int k)
{
    std::vector<std::pair<double, Index>> all;
    for (Index j = 0; j < pc.size(); ++j) {
        if (j != i) {
            all.emplace_back(
                (pc.points[static_cast<std::size_t>(j)] - pc.points[static_cast<std::size_t>(i)])
                    .squaredNorm(),
                j);
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<Index> out;
    for (int s = 0; s < k; ++s) {
        out.push_back(all[static_cast<std::size_t>(s)].second);
    }
    return out;
}

PointCloud random_cloud(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud pc;
    for (int i = 0; i < n; ++i) {
        pc.points.emplace_back(u(rng), u(rng), u(rng));
    }
    return pc;
}

/// independent in-circle oracle in extended precision
long double incircle_oracle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const long double ax = a.x() - d.x(), ay = a.y() - d.y();
    const long double bx = b.x() - d.x(), by = b.y() - d.y();
    const long double cx = c.x() - d.x(), cy = c.y() - d.y();
    const long double aw = ax * ax + ay * ay;
    const long double bw = bx * bx + by * by;
    const long double cw = cx * cx + cy * cy;
    return ax * (by * cw - bw * cy) - ay * (bx * cw - bw * cx) + aw * (bx * cy - by * cx);
}

}  // namespace

TEST_CASE("knn on collinear points")
{
    const auto pc = line_cloud();
    const auto got = knn(pc, 0, 2);
    CHECK(got == std::vector<Index>{1, 2});
}

TEST_CASE("knn on a 5x5 grid finds the axis neighbors")
{
    PointCloud pc;
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            pc.points.emplace_back(x, y, 0.0);
        }
    }
    const Index center = 12;  // (2,2)
    const auto got = knn(pc, center, 4);
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<Index>{7, 11, 13, 17});
}

TEST_CASE("knn matches the exhaustive scan on a random cloud")
{
    const auto pc = random_cloud(100, 17);
    for (Index i : {0, 13, 57, 99}) {
        CHECK(knn(pc, i, 25) == knn_oracle(pc, i, 25));
    }
}

TEST_CASE("knn rejects k >= n")
{
    const auto pc = line_cloud();
    CHECK_THROWS_AS(knn(pc, 0, 4), DataError);
}

TEST_CASE("knn is invariant under rigid motion")
{
    const auto pc = random_cloud(120, 5);
    Eigen::Matrix3d rot =
        Eigen::AngleAxisd(0.83, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    PointCloud moved = pc;
    for (auto& p : moved.points) {
        p = rot * p + Vec3(5.0, -3.0, 0.25);
    }
    for (Index i : {3, 44, 81}) {
        CHECK(knn(pc, i, 12) == knn(moved, i, 12));
    }
}

TEST_CASE("pca_frame on planar data returns the plane normal")
{
    PointCloud pc;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        pc.points.emplace_back(u(rng), u(rng), 0.0);
    }
    std::vector<Index> nbrs;
    for (Index i = 1; i < 30; ++i) {
        nbrs.push_back(i);
    }
    const auto f = pca_frame(pc, 0, nbrs);
    CHECK(f.e3.isApprox(Vec3(0, 0, 1), 1e-12));
    CHECK(std::abs(f.e1.dot(f.e2)) < 1e-10);
    CHECK(std::abs(f.e1.dot(f.e3)) < 1e-10);
    CHECK(std::abs(f.e1.norm() - 1.0) < 1e-10);
}

TEST_CASE("pca_frame rejects collinear neighborhoods")
{
    const auto pc = line_cloud();
    const std::vector<Index> nbrs{1, 2, 3};
    CHECK_THROWS_WITH(pca_frame(pc, 0, nbrs), Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("pca_frame normal of a noisy plane stays close to the true normal")
{
    PointCloud pc;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        pc.points.emplace_back(u(rng), u(rng), 0.01 * u(rng));
    }
    std::vector<Index> nbrs;
    for (Index i = 1; i < 200; ++i) {
        nbrs.push_back(i);
    }
    const auto f = pca_frame(pc, 0, nbrs);
    const double angle = std::acos(std::min(1.0, std::abs(f.e3.dot(Vec3(0, 0, 1)))));
    CHECK(angle < 5.0 * std::numbers::pi / 180.0);

    // eigenvector residual against the sampled covariance
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
    const double lambda = f.e3.dot(cov * f.e3);
    CHECK((cov * f.e3 - lambda * f.e3).norm() < 1e-9 * cov.norm());
    CHECK(lambda <= f.e1.dot(cov * f.e1) + 1e-15);
    CHECK(lambda <= f.e2.dot(cov * f.e2) + 1e-15);
}

TEST_CASE("project_to_tangent with the standard frame is the xy projection")
{
    PointCloud pc;
    pc.points = {Vec3(0, 0, 0), Vec3(0.5, -1.5, 0), Vec3(2, 3, 0)};
    TangentFrame f;  // canonical axes at the origin
    const auto uv = project_to_tangent(f, {1, 2}, pc);
    CHECK(uv[0].isApprox(Vec2(0.5, -1.5)));
    CHECK(uv[1].isApprox(Vec2(2, 3)));
}

TEST_CASE("projection drops the normal component and reads frame coordinates")
{
    TangentFrame f;
    f.origin = Vec3(1, 2, 3);
    f.e1 = Vec3(1, 1, 0).normalized();
    f.e3 = Vec3(0, 0, 1);
    f.e2 = f.e3.cross(f.e1);

    PointCloud pc;
    pc.points = {f.origin + f.e3, f.origin + 2.0 * f.e1 + 3.0 * f.e2 + 5.0 * f.e3};
    auto uv = project_to_tangent(f, {0, 1}, pc);
    CHECK(uv[0].norm() < 1e-14);
    CHECK(uv[1].isApprox(Vec2(2, 3), 1e-12));
}

TEST_CASE("projection followed by lifting reconstructs the neighbors")
{
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud pc;
    for (int i = 0; i < 40; ++i) {
        pc.points.emplace_back(u(rng), u(rng), 0.3 * u(rng));
    }
    std::vector<Index> nbrs;
    for (Index i = 1; i < 40; ++i) {
        nbrs.push_back(i);
    }
    const auto f = pca_frame(pc, 0, nbrs);
    const auto uv = project_to_tangent(f, nbrs, pc);
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
        const Vec3& p = pc.points[static_cast<std::size_t>(nbrs[s])];
        const double h = (p - f.origin).dot(f.e3);
        const Vec3 lifted = f.origin + uv[s].x() * f.e1 + uv[s].y() * f.e2 + h * f.e3;
        CHECK((lifted - p).norm() < 1e-12 * (1.0 + p.norm()));
    }
}

TEST_CASE("delaunay of a unit square gives the canonical diagonal")
{
    const std::vector<Vec2> pts{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const auto tris = local_delaunay(pts);
    REQUIRE(tris.size() == 2);
    // cocircular; canonical rule keeps the diagonal through index 0
    CHECK(tris[0] == Triangle{0, 1, 2});
    CHECK(tris[1] == Triangle{0, 2, 3});
}

TEST_CASE("delaunay of 3 points is that triangle")
{
    const std::vector<Vec2> pts{Vec2(0, 0), Vec2(2, 0), Vec2(1, 1)};
    const auto tris = local_delaunay(pts);
    REQUIRE(tris.size() == 1);
    CHECK(tris[0] == Triangle{0, 1, 2});
}

TEST_CASE("delaunay triangles satisfy the empty-circumcircle property")
{
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 50; ++i) {
        pts.emplace_back(u(rng), u(rng));
    }
    const auto tris = local_delaunay(pts);
    REQUIRE(tris.size() > 50);  // ~2n for interior-rich sets
    for (const Triangle& t : tris) {
        for (std::size_t d = 0; d < pts.size(); ++d) {
            if (d == static_cast<std::size_t>(t[0]) || d == static_cast<std::size_t>(t[1]) ||
                d == static_cast<std::size_t>(t[2])) {
                continue;
            }
            const long double v = incircle_oracle(
                pts[static_cast<std::size_t>(t[0])], pts[static_cast<std::size_t>(t[1])],
                pts[static_cast<std::size_t>(t[2])], pts[d]);
            CHECK(static_cast<double>(v) <= 1e-10);
        }
    }
    // all triangles counterclockwise
    for (const Triangle& t : tris) {
        const Vec2 a = pts[static_cast<std::size_t>(t[1])] - pts[static_cast<std::size_t>(t[0])];
        const Vec2 b = pts[static_cast<std::size_t>(t[2])] - pts[static_cast<std::size_t>(t[0])];
        CHECK(a.x() * b.y() - a.y() * b.x() > 0.0);
    }
}

TEST_CASE("delaunay output does not depend on input order")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 60; ++i) {
        pts.emplace_back(u(rng), u(rng));
    }
    const auto base = local_delaunay(pts);

    std::vector<Index> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        perm[i] = static_cast<Index>(i);
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec2> shuffled(pts.size());
    std::vector<Index> inv(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled[i] = pts[static_cast<std::size_t>(perm[i])];
        inv[static_cast<std::size_t>(perm[i])] = static_cast<Index>(i);
    }
    auto remapped = local_delaunay(shuffled);
    for (Triangle& t : remapped) {
        for (auto& v : t) {
            v = perm[static_cast<std::size_t>(v)];
        }
        int s = 0;
        for (int i = 1; i < 3; ++i) {
            if (t[static_cast<std::size_t>(i)] < t[static_cast<std::size_t>(s)]) {
                s = i;
            }
        }
        t = Triangle{t[static_cast<std::size_t>(s)], t[static_cast<std::size_t>((s + 1) % 3)],
                     t[static_cast<std::size_t>((s + 2) % 3)]};
    }
    std::sort(remapped.begin(), remapped.end());
    CHECK(base == remapped);
}

TEST_CASE("delaunay rejects degenerate inputs")
{
    CHECK_THROWS_AS(local_delaunay({Vec2(0, 0), Vec2(1, 0)}), DataError);
    CHECK_THROWS_WITH(
        local_delaunay({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0)}),
        Catch::Matchers::ContainsSubstring("degenerate projection"));
}

TEST_CASE("one_ring extracts incident triangles")
{
    const std::vector<Triangle> tris{{0, 1, 2}, {0, 2, 3}};
    SECTION("center vertex")
    {
        const auto ring = one_ring(0, tris);
        CHECK(ring.triangles.size() == 2);
        CHECK(ring.neighbors == std::vector<Index>{1, 2, 3});
    }
    SECTION("corner vertex")
    {
        const auto ring = one_ring(1, tris);
        CHECK(ring.triangles.size() == 1);
        CHECK(ring.neighbors == std::vector<Index>{0, 2});
    }
    SECTION("isolated vertex")
    {
        CHECK_THROWS_WITH(one_ring(9, tris), Catch::Matchers::ContainsSubstring("isolated"));
    }
}

TEST_CASE("one_ring of a hexagonal fan has six triangles")
{
    std::vector<Vec2> pts{Vec2(0, 0)};
    for (int i = 0; i < 6; ++i) {
        const double a = i * std::numbers::pi / 3.0;
        pts.emplace_back(std::cos(a), std::sin(a));
    }
    const auto tris = local_delaunay(pts);
    const auto ring = one_ring(0, tris);
    CHECK(ring.triangles.size() == 6);
    CHECK(ring.neighbors.size() == 6);
}

namespace {

std::unordered_map<Index, Vec2> uv_of(const std::vector<Vec2>& pts)
{
    std::unordered_map<Index, Vec2> uv;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        uv.emplace(static_cast<Index>(i), pts[i]);
    }
    return uv;
}

LocalRing fan_ring(const std::vector<double>& center_angles_deg, std::vector<Vec2>& pts_out)
{
    // center at 0; triangle i uses spokes at accumulated angles
    pts_out.clear();
    pts_out.emplace_back(0.0, 0.0);
    LocalRing ring;
    ring.center = 0;
    double acc = 0.0;
    Index next = 1;
    for (double a : center_angles_deg) {
        const double a0 = acc * std::numbers::pi / 180.0;
        acc += a;
        const double a1 = acc * std::numbers::pi / 180.0;
        pts_out.emplace_back(std::cos(a0), std::sin(a0));
        pts_out.emplace_back(std::cos(a1), std::sin(a1));
        ring.triangles.push_back({0, next, static_cast<Index>(next + 1)});
        next += 2;
    }
    ring.rebuild_neighbors();
    return ring;
}

}  // namespace

TEST_CASE("angle criterion keeps and removes by the center angle")
{
    std::vector<Vec2> pts;
    SECTION("90 degrees is kept")
    {
        const auto ring = fan_ring({90.0}, pts);
        const auto out = apply_angle_criterion(ring, uv_of(pts), 15.0, 120.0);
        CHECK(out.triangles.size() == 1);
    }
    SECTION("170 degrees is removed")
    {
        const auto ring = fan_ring({170.0}, pts);
        const auto out = apply_angle_criterion(ring, uv_of(pts), 15.0, 120.0);
        CHECK(out.triangles.empty());
    }
    SECTION("only the 60-degree triangle of a mixed fan survives")
    {
        const auto ring = fan_ring({10.0, 60.0, 130.0}, pts);
        const auto out = apply_angle_criterion(ring, uv_of(pts), 15.0, 120.0);
        REQUIRE(out.triangles.size() == 1);
        const double a = ring_center_angle(out.triangles[0], 0, uv_of(pts));
        CHECK_THAT(a, Catch::Matchers::WithinAbs(60.0, 1e-9));
    }
}

TEST_CASE("angle criterion with (0,180) is the identity on clean rings")
{
    std::vector<Vec2> pts;
    const auto ring = fan_ring({40.0, 75.0, 100.0, 30.0}, pts);
    const auto out = apply_angle_criterion(ring, uv_of(pts), 0.0, 180.0);
    CHECK(out.triangles == ring.triangles);
}

TEST_CASE("concave corner: filtering removes the bridging triangle")
{
    // Boundary vertex at a concave corner. The surface spans ~230 degrees;
    // the 130-degree notch around the +x axis is empty. The local Delaunay
    // fan of the center covers all directions, so some triangle bridges the
    // notch, and its center angle reaches at least the notch width.
    std::vector<Vec2> pts{Vec2(0, 0)};
    const double lo = 65.0, hi = 295.0;
    const int spokes = 7;
    for (int i = 0; i < spokes; ++i) {
        const double a = (lo + (hi - lo) * i / (spokes - 1)) * std::numbers::pi / 180.0;
        pts.emplace_back(std::cos(a), std::sin(a));
    }
    const auto tris = local_delaunay(pts);
    const auto ring = one_ring(0, tris);
    const auto uv = uv_of(pts);

    double widest = 0.0;
    for (const Triangle& t : ring.triangles) {
        widest = std::max(widest, ring_center_angle(t, 0, uv));
    }
    CHECK(widest >= 120.0);  // the bridge across the notch

    const auto filtered = apply_angle_criterion(ring, uv, 15.0, 120.0);
    REQUIRE_FALSE(filtered.triangles.empty());
    for (const Triangle& t : filtered.triangles) {
        CHECK(ring_center_angle(t, 0, uv) < 120.0);
    }
}
