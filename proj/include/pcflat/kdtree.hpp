#pragma once

#include "core.hpp"

#include <algorithm>
#include <queue>
#include <vector>

namespace pcflat {

/**
 * @brief Static 3D kd-tree for exact k-nearest-neighbor queries.
 *
 * Neighbors are ordered by (squared distance, index), so results are
 * reproducible and match a brute-force scan exactly, ties included.
 */
class KdTree
{
public:
    explicit KdTree(const std::vector<Vec3>& points) : pts_(points)
    {
        idx_.resize(pts_.size());
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            idx_[i] = static_cast<Index>(i);
        }
        nodes_.reserve(2 * pts_.size() + 1);
        if (!pts_.empty()) {
            root_ = build(0, static_cast<int>(pts_.size()), 0);
        }
    }

    /**
     * k nearest neighbors of vertex @p query, excluding the vertex itself.
     * Throws DataError when k >= point count.
     */
    [[nodiscard]] std::vector<Index> knn(Index query, int k) const
    {
        if (k <= 0) {
            throw DataError("knn: k must be positive");
        }
        if (static_cast<std::size_t>(k) >= pts_.size()) {
            throw DataError("knn: k too large");
        }
        const Vec3& q = pts_[static_cast<std::size_t>(query)];
        Heap heap;
        search(root_, q, query, k, heap);

        std::vector<Index> out(static_cast<std::size_t>(k));
        for (int i = k - 1; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = heap.top().second;
            heap.pop();
        }
        return out;
    }

private:
    // max-heap on (d2, index): top is the current worst candidate
    using Cand = std::pair<double, Index>;
    using Heap = std::priority_queue<Cand>;

    struct Node
    {
        Index point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(int lo, int hi, int depth)
    {
        if (lo >= hi) {
            return -1;
        }
        const int axis = depth % 3;
        const int mid = (lo + hi) / 2;
        std::nth_element(
            idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi, [&](Index a, Index b) {
                const double ca = pts_[static_cast<std::size_t>(a)][axis];
                const double cb = pts_[static_cast<std::size_t>(b)][axis];
                return ca != cb ? ca < cb : a < b;
            });
        Node node;
        node.point = idx_[static_cast<std::size_t>(mid)];
        node.axis = axis;
        const int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        const int l = build(lo, mid, depth + 1);
        const int r = build(mid + 1, hi, depth + 1);
        nodes_[static_cast<std::size_t>(self)].left = l;
        nodes_[static_cast<std::size_t>(self)].right = r;
        return self;
    }

    void search(int node, const Vec3& q, Index skip, int k, Heap& heap) const
    {
        if (node < 0) {
            return;
        }
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        const Vec3& p = pts_[static_cast<std::size_t>(nd.point)];
        if (nd.point != skip) {
            const Cand cand{(p - q).squaredNorm(), nd.point};
            if (static_cast<int>(heap.size()) < k) {
                heap.push(cand);
            } else if (cand < heap.top()) {
                heap.pop();
                heap.push(cand);
            }
        }
        const double delta = q[nd.axis] - p[nd.axis];
        const int near = delta < 0.0 ? nd.left : nd.right;
        const int far = delta < 0.0 ? nd.right : nd.left;
        search(near, q, skip, k, heap);
        // The far subtree can still hold ties, so use <= on the split distance.
        if (static_cast<int>(heap.size()) < k || delta * delta <= heap.top().first) {
            search(far, q, skip, k, heap);
        }
    }

    const std::vector<Vec3>& pts_;
    std::vector<Index> idx_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace pcflat
