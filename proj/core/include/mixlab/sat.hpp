#pragma once

#include <cstdint>
#include <vector>

#include "mixlab/grid.hpp"

namespace mixlab {

/// Integral image over the cells of a binary field, with per-row prefix sums
/// for O(1) horizontal span queries (the hot path of every disk scan) and the
/// full 2D cumulative table for O(1) rectangle sums (tile statistics and the
/// pruning bounds).
///
/// Row prefixes: row(j)[i] = sum of signs of cells (0..i-1, j).
/// 2D table: cum(i, j) = sum of signs over cells [0,i) x [0,j).
class SignSat {
  public:
    explicit SignSat(const TracerField& field);

    int n() const { return n_; }

    /// Sum of signs over cells [a, b) of row j; indices already clipped by
    /// the caller to 0 <= a <= b <= n.
    std::int64_t row_span(int j, int a, int b) const {
        const std::int32_t* r = rows_.data() + std::size_t(j) * (n_ + 1);
        return std::int64_t(r[b]) - std::int64_t(r[a]);
    }

    /// Sum of signs over the cell rectangle [i0, i1) x [j0, j1), clipped.
    std::int64_t rect_sum(int i0, int i1, int j0, int j1) const;

  private:
    int n_ = 0;
    std::vector<std::int32_t> rows_;  // (n) x (n+1)
    std::vector<std::int64_t> cum_;   // (n+1) x (n+1)
};

/// Same structure for real-valued fields (continuous mode); also carries the
/// |value| prefix table used for safe pruning of disk scans.
class ValueSat {
  public:
    explicit ValueSat(const TracerField& field);

    int n() const { return n_; }

    double row_span(int j, int a, int b) const {
        const double* r = rows_.data() + std::size_t(j) * (n_ + 1);
        return r[b] - r[a];
    }
    double rect_sum(int i0, int i1, int j0, int j1) const;
    double rect_abs_sum(int i0, int i1, int j0, int j1) const;

  private:
    double rect_on(const std::vector<double>& cum, int i0, int i1, int j0, int j1) const;
    int n_ = 0;
    std::vector<double> rows_;
    std::vector<double> cum_;
    std::vector<double> cum_abs_;
};

/// 0/1 cell set (the J of a characteristic-length-scale query), with the same
/// prefix structure counting member cells.
class CellSet {
  public:
    CellSet(GridSpec grid, std::vector<std::uint8_t> members);
    /// Member set {field == +1} (binary fields only).
    static CellSet positive_cells(const TracerField& field);
    /// Member set {field == -1}.
    static CellSet negative_cells(const TracerField& field);

    const GridSpec& grid() const { return grid_; }
    int n() const { return grid_.n(); }
    bool member(int i, int j) const { return members_[std::size_t(j) * n() + i] != 0; }
    std::int64_t count() const { return count_; }

    std::int64_t row_span(int j, int a, int b) const {
        const std::int32_t* r = rows_.data() + std::size_t(j) * (n() + 1);
        return std::int64_t(r[b]) - std::int64_t(r[a]);
    }
    std::int64_t rect_count(int i0, int i1, int j0, int j1) const;

  private:
    GridSpec grid_;
    std::vector<std::uint8_t> members_;
    std::vector<std::int32_t> rows_;
    std::vector<std::int64_t> cum_;
    std::int64_t count_ = 0;
};

}  // namespace mixlab
