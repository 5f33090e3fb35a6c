#pragma once

#include "core.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace pcflat {

/**
 * @brief Coordinate-format sparse matrix; duplicate (row, col) entries sum.
 *
 * Entries keep their insertion order until compress() folds duplicates.
 * Compression is stable, so identical inputs produce identical results
 * regardless of where the triplets came from.
 */
struct SparseOperator
{
    struct Entry
    {
        Index row = 0;
        Index col = 0;
        double value = 0.0;
    };

    Index rows = 0;
    Index cols = 0;
    std::vector<Entry> entries;

    SparseOperator() = default;
    SparseOperator(Index r, Index c) : rows(r), cols(c) {}

    void add(Index r, Index c, double v) { entries.push_back({r, c, v}); }

    /// Folds duplicate coordinates (stable left-to-right summation).
    void compress()
    {
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<Entry> out;
        out.reserve(entries.size());
        for (const Entry& e : entries) {
            if (!out.empty() && out.back().row == e.row && out.back().col == e.col) {
                out.back().value += e.value;
            } else {
                out.push_back(e);
            }
        }
        entries.swap(out);
    }

    [[nodiscard]] Eigen::SparseMatrix<double> to_eigen() const
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(entries.size());
        for (const Entry& e : entries) {
            trip.emplace_back(e.row, e.col, e.value);
        }
        Eigen::SparseMatrix<double> m(rows, cols);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    [[nodiscard]] std::vector<double> row_sums() const
    {
        std::vector<double> s(static_cast<std::size_t>(rows), 0.0);
        for (const Entry& e : entries) {
            s[static_cast<std::size_t>(e.row)] += e.value;
        }
        return s;
    }

    [[nodiscard]] double max_abs_row_sum_magnitude() const
    {
        std::vector<double> mag(static_cast<std::size_t>(rows), 0.0);
        for (const Entry& e : entries) {
            mag[static_cast<std::size_t>(e.row)] += std::abs(e.value);
        }
        double m = 0.0;
        for (double v : mag) {
            m = std::max(m, v);
        }
        return m;
    }

    [[nodiscard]] bool all_finite() const
    {
        for (const Entry& e : entries) {
            if (!std::isfinite(e.value)) {
                return false;
            }
        }
        return true;
    }

    /// Writes "row col value" per line, 17 significant digits (debug dump).
    void dump(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out) {
            throw DataError("cannot open '" + path + "' for writing");
        }
        char buf[64];
        for (const Entry& e : entries) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", e.row, e.col, e.value);
            out << buf;
        }
    }
};

}  // namespace pcflat
