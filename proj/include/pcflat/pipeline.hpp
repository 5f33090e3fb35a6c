#pragma once

#include "core.hpp"
#include "kdtree.hpp"
#include "laplacian.hpp"
#include "neighborhood.hpp"
#include "parallel.hpp"
#include "solver.hpp"

#include <atomic>
#include <unordered_map>
#include <vector>

namespace pcflat {

/**
 * @brief Everything the per-vertex stage produces for one vertex: tangent
 * frame, projected neighborhood and the (boundary-filtered) one-ring.
 */
struct VertexChart
{
    Index vertex = -1;
    TangentFrame frame;
    std::vector<Index> nbrs;                 // neighbor set actually used
    std::unordered_map<Index, Vec2> proj;    // tangent coordinates by global id
    LocalRing ring;                          // filtered ring (pipeline input)
    LocalRing ring_unfiltered;               // ring before the angle criterion
};

struct PipelineStats
{
    int degenerate_triangles = 0;
    int emptied_rings = 0;
};

/// Marks every vertex listed in the boundary loop.
inline std::vector<char> boundary_mask(const PointCloud& pc)
{
    std::vector<char> mask(static_cast<std::size_t>(pc.size()), 0);
    for (Index b : pc.boundary) {
        mask[static_cast<std::size_t>(b)] = 1;
    }
    return mask;
}

/**
 * @brief Per-vertex stage of the pipeline for a chosen vertex set.
 *
 * @param vertices     global ids to process
 * @param is_boundary  per-global-id boundary flag (decides angle filtering)
 * @param member_mask  when non-null, neighbors outside the mask are deleted
 *                     from each kNN set before the frame is built
 *
 * Runs vertex-parallel; every vertex writes only its own chart slot.
 */
inline std::vector<VertexChart> build_charts(
    const PointCloud& pc, const Config& cfg, const KdTree& tree,
    const std::vector<Index>& vertices, const std::vector<char>& is_boundary,
    const std::vector<char>* member_mask = nullptr, bool all_angles = false,
    PipelineStats* stats = nullptr)
{
    cfg.validate();
    std::vector<VertexChart> charts(vertices.size());
    std::atomic<int> emptied{0};

    parallel_for(vertices.size(), [&](std::size_t slot) {
        const Index i = vertices[slot];
        VertexChart chart;
        chart.vertex = i;

        std::vector<Index> nbrs = tree.knn(i, cfg.k);
        if (member_mask != nullptr) {
            std::erase_if(nbrs, [&](Index j) { return !(*member_mask)[static_cast<std::size_t>(j)]; });
        }
        chart.frame = pca_frame(pc, i, nbrs);
        chart.nbrs = nbrs;

        std::vector<Index> ids;
        ids.reserve(nbrs.size() + 1);
        ids.push_back(i);
        ids.insert(ids.end(), nbrs.begin(), nbrs.end());
        const std::vector<Vec2> pts2d = project_to_tangent(chart.frame, ids, pc);
        chart.proj.reserve(ids.size());
        for (std::size_t s = 0; s < ids.size(); ++s) {
            chart.proj.emplace(ids[s], pts2d[s]);
        }

        const std::vector<Triangle> local_tris = local_delaunay(pts2d, &ids);
        std::vector<Triangle> global_tris;
        global_tris.reserve(local_tris.size());
        for (const Triangle& t : local_tris) {
            global_tris.push_back({ids[static_cast<std::size_t>(t[0])],
                                   ids[static_cast<std::size_t>(t[1])],
                                   ids[static_cast<std::size_t>(t[2])]});
        }
        chart.ring_unfiltered = one_ring(i, global_tris);
        chart.ring = chart.ring_unfiltered;

        if (is_boundary[static_cast<std::size_t>(i)]) {
            LocalRing filtered =
                apply_angle_criterion(chart.ring_unfiltered, chart.proj, cfg.c1, cfg.c2, all_angles);
            if (filtered.triangles.empty()) {
                // keep the widest triangle so the vertex still has a stencil
                const LocalRing& raw = chart.ring_unfiltered;
                std::size_t best = 0;
                double best_angle = -1.0;
                for (std::size_t t = 0; t < raw.triangles.size(); ++t) {
                    const double a = ring_center_angle(raw.triangles[t], i, chart.proj);
                    if (a > best_angle) {
                        best_angle = a;
                        best = t;
                    }
                }
                filtered.triangles.push_back(raw.triangles[best]);
                filtered.rebuild_neighbors();
                emptied.fetch_add(1, std::memory_order_relaxed);
            }
            chart.ring = std::move(filtered);
        }
        charts[slot] = std::move(chart);
    });

    if (stats != nullptr) {
        stats->emptied_rings += emptied.load();
    }
    return charts;
}

/// Full-cloud convenience overload: charts for every vertex 0..n-1.
inline std::vector<VertexChart> build_charts(
    const PointCloud& pc, const Config& cfg, bool all_angles = false,
    PipelineStats* stats = nullptr)
{
    KdTree tree(pc.points);
    std::vector<Index> vertices(static_cast<std::size_t>(pc.size()));
    for (Index i = 0; i < pc.size(); ++i) {
        vertices[static_cast<std::size_t>(i)] = i;
    }
    return build_charts(pc, cfg, tree, vertices, boundary_mask(pc), nullptr, all_angles, stats);
}

/**
 * @brief Accumulated point-cloud Laplacian from charts.
 *
 * @param remap when non-null, translates global ids to output rows (for
 *              subdomain operators); identity otherwise
 */
inline SparseOperator point_cloud_laplacian(
    const std::vector<VertexChart>& charts, Index n_out, const LaplacianOptions& opt = {},
    const std::unordered_map<Index, Index>* remap = nullptr, PipelineStats* stats = nullptr)
{
    std::vector<CotangentContribution> contribs(charts.size());
    parallel_for(charts.size(), [&](std::size_t slot) {
        contribs[slot] = local_cotangent(charts[slot].ring, charts[slot].proj, opt);
    });
    int degenerate = 0;
    for (CotangentContribution& c : contribs) {
        degenerate += c.degenerate_skipped;
        if (remap != nullptr) {
            c.center = remap->at(c.center);
            for (SparseOperator::Entry& e : c.entries) {
                e.row = remap->at(e.row);
                e.col = remap->at(e.col);
            }
        }
    }
    if (stats != nullptr) {
        stats->degenerate_triangles += degenerate;
    }
    return accumulate(std::move(contribs), n_out);
}

/** @brief Output bundle of one full parameterization run. */
struct PipelineResult
{
    Parameterization f;
    SparseOperator laplacian;
    AreaMatrix area;
    PinConstraint pins;
    ConformalEnergy energy;
    std::vector<VertexChart> charts;
    PipelineStats stats;
};

/**
 * @brief End-to-end free-boundary conformal parameterization:
 * kNN -> PCA frames -> local Delaunay rings (angle-filtered on the
 * boundary) -> accumulated Laplacian -> pinned linear solve.
 */
inline PipelineResult parameterize(
    const PointCloud& pc, const Config& cfg, bool all_angles = false,
    const LaplacianOptions& lap_opt = {})
{
    const ValidationReport report = validate_point_cloud(pc);
    if (!report.pass) {
        std::string msg = "invalid point cloud";
        for (const auto& m : report.messages) {
            msg += "; " + m;
        }
        throw DataError(msg);
    }

    PipelineResult out;
    out.charts = build_charts(pc, cfg, all_angles, &out.stats);
    out.laplacian = point_cloud_laplacian(out.charts, pc.size(), lap_opt, nullptr, &out.stats);
    out.area = area_matrix(pc.boundary, pc.size());
    const auto pin_pair = farthest_pair(pc);
    out.pins = PinConstraint{pin_pair.first, pin_pair.second};
    out.f = solve_free_boundary(out.laplacian, out.area, out.pins);
    out.energy = conformal_energy(out.laplacian, out.area, out.f);
    return out;
}

}  // namespace pcflat
