#pragma once

#include "core.hpp"
#include "io.hpp"
#include "laplacian.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <map>
#include <numbers>
#include <vector>

namespace pcflat {

using Complex = std::complex<double>;

/** @brief Per-vertex complex distortion; |mu| = 0 means conformal. */
struct BeltramiField
{
    std::vector<Complex> mu;
    int folds = 0;          ///< vertices with any |mu| >= 1 triangle
    int empty_rings = 0;    ///< vertices that had no usable triangle

    [[nodiscard]] double mean_abs() const
    {
        if (mu.empty()) {
            return 0.0;
        }
        double s = 0.0;
        for (const Complex& m : mu) {
            s += std::abs(m);
        }
        return s / static_cast<double>(mu.size());
    }

    [[nodiscard]] double max_abs() const
    {
        double s = 0.0;
        for (const Complex& m : mu) {
            s = std::max(s, std::abs(m));
        }
        return s;
    }
};

struct PcbcOptions
{
    bool area_weighted = true;  ///< average ring triangles by source area
};

namespace detail {

inline double tri_signed_area(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

inline Triangle sorted_tri(Triangle t)
{
    std::sort(t.begin(), t.end());
    return t;
}

/**
 * Chart orientation pass. Each PCA chart is defined up to reflection; the
 * Beltrami coefficient is not reflection-invariant, so charts are aligned
 * to the global surface orientation given by the boundary loop: the root
 * boundary chart is oriented so its ring lies left of the outgoing loop
 * edge, and the choice is propagated across shared ring triangles.
 * Returns +1 (keep) or -1 (conjugate) per vertex.
 */
inline std::vector<int> orient_charts(const PointCloud& pc, const std::vector<VertexChart>& charts)
{
    const std::size_t n = charts.size();
    std::vector<int> sigma(n, 0);

    std::map<Triangle, std::vector<Index>> tri_owners;
    for (std::size_t i = 0; i < n; ++i) {
        for (const Triangle& t : charts[i].ring.triangles) {
            tri_owners[sorted_tri(t)].push_back(static_cast<Index>(i));
        }
    }
    const auto raw_sign = [&](Index chart, const Triangle& st) {
        const auto& proj = charts[static_cast<std::size_t>(chart)].proj;
        return tri_signed_area(proj.at(st[0]), proj.at(st[1]), proj.at(st[2])) >= 0.0 ? 1 : -1;
    };

    // root: first boundary vertex whose loop successor appears in its chart
    Index root = pc.boundary.empty() ? 0 : pc.boundary[0];
    int root_sigma = 1;
    for (std::size_t s = 0; s < pc.boundary.size(); ++s) {
        const Index b = pc.boundary[s];
        const Index next = pc.boundary[(s + 1) % pc.boundary.size()];
        const auto& chart = charts[static_cast<std::size_t>(b)];
        const auto it = chart.proj.find(next);
        if (it == chart.proj.end()) {
            continue;
        }
        const Vec2 dir = it->second;  // chart.proj[b] is the origin
        Vec2 mass = Vec2::Zero();
        double wsum = 0.0;
        for (const Triangle& t : chart.ring.triangles) {
            const Vec2 centroid = (chart.proj.at(t[0]) + chart.proj.at(t[1]) + chart.proj.at(t[2])) / 3.0;
            const double w = std::abs(
                tri_signed_area(chart.proj.at(t[0]), chart.proj.at(t[1]), chart.proj.at(t[2])));
            mass += w * centroid;
            wsum += w;
        }
        if (wsum <= 0.0) {
            continue;
        }
        mass /= wsum;
        const double side = dir.x() * mass.y() - dir.y() * mass.x();
        if (side == 0.0) {
            continue;
        }
        root = b;
        root_sigma = side > 0.0 ? 1 : -1;  // ring must sit left of the loop direction
        break;
    }

    sigma[static_cast<std::size_t>(root)] = root_sigma;
    std::deque<Index> queue{root};
    while (!queue.empty()) {
        const Index i = queue.front();
        queue.pop_front();
        const auto& chart = charts[static_cast<std::size_t>(i)];
        for (const Triangle& t : chart.ring.triangles) {
            const Triangle st = sorted_tri(t);
            const auto owners = tri_owners.find(st);
            if (owners == tri_owners.end()) {
                continue;
            }
            for (Index j : owners->second) {
                if (sigma[static_cast<std::size_t>(j)] != 0) {
                    continue;
                }
                sigma[static_cast<std::size_t>(j)] =
                    sigma[static_cast<std::size_t>(i)] * raw_sign(i, st) * raw_sign(j, st);
                queue.push_back(j);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (sigma[i] == 0) {
            sigma[i] = 1;
        }
    }
    return sigma;
}

}  // namespace detail

/**
 * @brief Point-cloud Beltrami coefficient of a planar map.
 *
 * For every ring triangle the affine map from the (orientation-aligned)
 * tangent chart to the image plane gives mu = f_zbar / f_z; the vertex
 * value averages its ring triangles, by source area unless configured
 * otherwise. Degenerate image triangles are skipped; emptied rings yield
 * mu = 0 and a warning count.
 */
inline BeltramiField pcbc(
    const PointCloud& pc, const std::vector<VertexChart>& charts, const Parameterization& f,
    const PcbcOptions& opt = {})
{
    const std::size_t n = charts.size();
    BeltramiField field;
    field.mu.assign(n, Complex(0.0, 0.0));
    const std::vector<int> sigma = detail::orient_charts(pc, charts);

    std::vector<int> fold_flags(n, 0);
    std::vector<int> empty_flags(n, 0);
    parallel_for(n, [&](std::size_t i) {
        const VertexChart& chart = charts[i];
        const double s = static_cast<double>(sigma[i]);

        // Reported mu lives in a canonical in-plane frame (the global axis
        // most orthogonal to the normal, projected): |mu| is unchanged and
        // the phase no longer depends on the arbitrary PCA chart rotation.
        int axis = 0;
        for (int a = 1; a < 3; ++a) {
            if (std::abs(chart.frame.e3[a]) < std::abs(chart.frame.e3[axis])) {
                axis = a;
            }
        }
        const Vec3 ref = Vec3::Unit(axis);
        const double phi =
            std::atan2(s * ref.dot(chart.frame.e2), ref.dot(chart.frame.e1));
        const Complex phase = std::polar(1.0, -2.0 * phi);

        Complex acc(0.0, 0.0);
        double wsum = 0.0;
        bool fold = false;
        for (const Triangle& t : chart.ring.triangles) {
            const auto src = [&](Index v) {
                const Vec2& p = chart.proj.at(v);
                return Complex(p.x(), s * p.y());
            };
            const auto dst = [&](Index v) {
                const Vec2& p = f.uv[static_cast<std::size_t>(v)];
                return Complex(p.x(), p.y());
            };
            const Complex w1 = src(t[1]) - src(t[0]);
            const Complex w2 = src(t[2]) - src(t[0]);
            const Complex z1 = dst(t[1]) - dst(t[0]);
            const Complex z2 = dst(t[2]) - dst(t[0]);
            const Complex det = w1 * std::conj(w2) - w2 * std::conj(w1);  // 2i * source area
            const double src_area = 0.5 * std::abs(det);
            if (src_area <= 1e-30) {
                continue;
            }
            const double img_cross =
                std::abs(z1.real() * z2.imag() - z1.imag() * z2.real());
            if (img_cross <= 1e-15 * std::abs(z1) * std::abs(z2)) {
                continue;  // degenerate image triangle
            }
            const Complex fz = (z1 * std::conj(w2) - z2 * std::conj(w1)) / det;
            const Complex fzb = (w1 * z2 - w2 * z1) / det;
            Complex mu;
            if (std::abs(fz) <= 1e-16 * std::abs(fzb)) {
                mu = std::polar(1e16, std::arg(fzb));  // anticonformal: report a huge finite value
            } else {
                mu = fzb / fz;
            }
            if (std::abs(mu) >= 1.0) {
                fold = true;
            }
            const double w = opt.area_weighted ? src_area : 1.0;
            acc += w * mu;
            wsum += w;
        }
        if (wsum > 0.0) {
            field.mu[i] = phase * (acc / wsum);
        } else {
            empty_flags[i] = 1;
        }
        fold_flags[i] = fold ? 1 : 0;
    });
    for (std::size_t i = 0; i < n; ++i) {
        field.folds += fold_flags[i];
        field.empty_rings += empty_flags[i];
    }
    return field;
}

/**
 * @brief Locally authalic Chi energy: sum over ring edges of
 * (cot g + cot d) / |v_i - v_j|^2 * |f_i - f_j|^2, with the two angles
 * taken at the far vertex j inside vertex i's ring.
 */
inline double chi_energy(
    const PointCloud& pc, const std::vector<VertexChart>& charts, const Parameterization& f,
    const LaplacianOptions& opt = {})
{
    std::vector<double> per_vertex(charts.size(), 0.0);
    parallel_for(charts.size(), [&](std::size_t i) {
        const VertexChart& chart = charts[i];
        const Index vi = chart.vertex;
        double e = 0.0;
        for (Index j : chart.ring.neighbors) {
            double cots = 0.0;
            for (const Triangle& t : chart.ring.triangles) {
                if (t[0] != j && t[1] != j && t[2] != j) {
                    continue;
                }
                int cj = 0;
                while (t[static_cast<std::size_t>(cj)] != j) {
                    ++cj;
                }
                const Vec2& at = chart.proj.at(j);
                const Vec2 a = chart.proj.at(t[static_cast<std::size_t>((cj + 1) % 3)]) - at;
                const Vec2 b = chart.proj.at(t[static_cast<std::size_t>((cj + 2) % 3)]) - at;
                const double cross = std::abs(a.x() * b.y() - a.y() * b.x());
                if (cross <= 0.0) {
                    continue;
                }
                cots += detail::clamp_cot(a.dot(b) / cross, opt);
            }
            const double d2 = (pc.points[static_cast<std::size_t>(vi)] -
                               pc.points[static_cast<std::size_t>(j)])
                                  .squaredNorm();
            if (d2 <= 0.0) {
                throw DataError("chi_energy: coincident ring points");
            }
            const double img2 = (f.uv[static_cast<std::size_t>(vi)] -
                                 f.uv[static_cast<std::size_t>(j)])
                                    .squaredNorm();
            e += cots / d2 * img2;
        }
        per_vertex[i] = e;
    });
    double total = 0.0;
    for (double e : per_vertex) {
        total += e;
    }
    return total;
}

/**
 * @brief Fraction of interior mesh edges whose opposite angles sum to at
 * most pi (within 1e-12), measured on the mesh's own coordinates.
 * Throws DataError on a non-manifold edge.
 */
inline double delaunay_ratio(const TriangleMesh& mesh)
{
    std::map<std::pair<Index, Index>, std::vector<Index>> edge_opposite;
    for (const Triangle& t : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            Index u = t[static_cast<std::size_t>(e)];
            Index v = t[static_cast<std::size_t>((e + 1) % 3)];
            const Index w = t[static_cast<std::size_t>((e + 2) % 3)];
            if (u > v) {
                std::swap(u, v);
            }
            edge_opposite[{u, v}].push_back(w);
        }
    }
    std::size_t interior = 0;
    std::size_t good = 0;
    for (const auto& [edge, opp] : edge_opposite) {
        if (opp.size() > 2) {
            throw DataError(
                "non-manifold edge (" + std::to_string(edge.first) + ", " +
                std::to_string(edge.second) + ")");
        }
        if (opp.size() != 2) {
            continue;
        }
        ++interior;
        double sum = 0.0;
        for (Index w : opp) {
            const Vec3 a = mesh.vertices[static_cast<std::size_t>(edge.first)] -
                           mesh.vertices[static_cast<std::size_t>(w)];
            const Vec3 b = mesh.vertices[static_cast<std::size_t>(edge.second)] -
                           mesh.vertices[static_cast<std::size_t>(w)];
            sum += std::atan2(a.cross(b).norm(), a.dot(b));
        }
        if (sum <= std::numbers::pi + 1e-12) {
            ++good;
        }
    }
    if (interior == 0) {
        return 1.0;
    }
    return static_cast<double>(good) / static_cast<double>(interior);
}

/** @brief Scalar summary of one run plus the |mu| histogram. */
struct MetricReport
{
    std::size_t n = 0;
    double mean_mu = 0.0;
    double max_mu = 0.0;
    std::vector<double> hist_centers;
    std::vector<std::size_t> hist_counts;
    ConformalEnergy energy;
    double e_chi = 0.0;
    double delaunay = 1.0;
    int folds = 0;

    void to_csv(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out) {
            throw DataError("cannot open '" + path + "' for writing");
        }
        out << "metric,value\n";
        if (n == 0) {
            return;
        }
        out << "n," << n << '\n';
        out << "mean_mu," << detail::fmt17(mean_mu) << '\n';
        out << "max_mu," << detail::fmt17(max_mu) << '\n';
        out << "folds," << folds << '\n';
        out << "e_dirichlet," << detail::fmt17(energy.dirichlet) << '\n';
        out << "e_area," << detail::fmt17(energy.area) << '\n';
        out << "e_conformal," << detail::fmt17(energy.conformal) << '\n';
        out << "e_chi," << detail::fmt17(e_chi) << '\n';
        out << "delaunay_ratio," << detail::fmt17(delaunay) << '\n';
        out << "histogram_bin_center,count\n";
        for (std::size_t b = 0; b < hist_centers.size(); ++b) {
            out << detail::fmt17(hist_centers[b]) << ',' << hist_counts[b] << '\n';
        }
    }

    [[nodiscard]] std::string to_text() const
    {
        std::ostringstream out;
        out << "vertices:        " << n << '\n';
        out << "mean |mu|:       " << detail::fmt17(mean_mu) << '\n';
        out << "max |mu|:        " << detail::fmt17(max_mu) << '\n';
        out << "fold vertices:   " << folds << '\n';
        out << "E_D (Dirichlet): " << detail::fmt17(energy.dirichlet) << '\n';
        out << "A (mapped area): " << detail::fmt17(energy.area) << '\n';
        out << "E_C (conformal): " << detail::fmt17(energy.conformal) << '\n';
        out << "E_chi:           " << detail::fmt17(e_chi) << '\n';
        out << "delaunay ratio:  " << detail::fmt17(delaunay) << '\n';
        return out.str();
    }
};

/// Fills the report; the |mu| histogram has 50 uniform bins on [0, max(1, max|mu|)].
inline MetricReport summarize(
    const BeltramiField& mu, const ConformalEnergy& energy, double e_chi, double delaunay)
{
    MetricReport rep;
    rep.n = mu.mu.size();
    rep.mean_mu = mu.mean_abs();
    rep.max_mu = mu.max_abs();
    rep.energy = energy;
    rep.e_chi = e_chi;
    rep.delaunay = delaunay;
    rep.folds = mu.folds;

    constexpr std::size_t bins = 50;
    const double hi = std::max(1.0, rep.max_mu);
    rep.hist_centers.resize(bins);
    rep.hist_counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) {
        rep.hist_centers[b] = (static_cast<double>(b) + 0.5) * hi / static_cast<double>(bins);
    }
    for (const Complex& m : mu.mu) {
        const double v = std::abs(m);
        std::size_t b = static_cast<std::size_t>(v / hi * static_cast<double>(bins));
        if (b >= bins) {
            b = bins - 1;
        }
        ++rep.hist_counts[b];
    }
    return rep;
}

}  // namespace pcflat
