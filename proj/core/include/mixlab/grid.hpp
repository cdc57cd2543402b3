#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace mixlab {

/// Dyadic grid over the open unit square Q = (-1/2, 1/2)^2.
///
/// The grid has 2^m x 2^m square cells of side h = 2^-m. Cell (i, j) has
/// i indexing x (column, 0 at x = -1/2) and j indexing y (row, 0 at
/// y = -1/2). All coordinates derived here are exact in double precision:
/// cell centers and nodes are integer multiples of 2^-(m+1).
struct GridSpec {
    int m = 0;

    int n() const { return 1 << m; }
    double h() const { return std::ldexp(1.0, -m); }
    std::int64_t cell_count() const { return std::int64_t(n()) * n(); }

    double cell_center_x(int i) const { return std::ldexp(double(2 * i + 1 - n()), -(m + 1)); }
    double cell_center_y(int j) const { return std::ldexp(double(2 * j + 1 - n()), -(m + 1)); }
    /// Node (cell corner) coordinates, index 0..n().
    double node_x(int i) const { return std::ldexp(double(2 * i - n()), -(m + 1)); }
    double node_y(int j) const { return std::ldexp(double(2 * j - n()), -(m + 1)); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class FieldMode { binary, continuous };

/// Scalar tracer on a dyadic grid, piecewise constant on cells and zero
/// outside Q. Binary mode holds exactly +-1 per cell with an exactly equal
/// count of each sign, so every integral used by the diagnostics reduces to
/// an exact integer sum. Immutable after construction.
class TracerField {
  public:
    /// Binary field from per-cell signs (+1/-1), row-major with j major:
    /// index = j * n + i. Throws if any entry is not +-1 or the signs are
    /// not exactly balanced.
    static TracerField binary(GridSpec grid, std::vector<std::int8_t> signs);
    /// Continuous field from per-cell values (no balance requirement).
    static TracerField continuous(GridSpec grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    FieldMode mode() const { return mode_; }
    bool is_binary() const { return mode_ == FieldMode::binary; }

    std::int64_t size() const { return grid_.cell_count(); }
    std::int64_t index(int i, int j) const { return std::int64_t(j) * grid_.n() + i; }

    int sign_at(std::int64_t idx) const { return signs_[std::size_t(idx)]; }
    double value_at(std::int64_t idx) const {
        return is_binary() ? double(signs_[std::size_t(idx)]) : values_[std::size_t(idx)];
    }
    double value(int i, int j) const { return value_at(index(i, j)); }
    int sign(int i, int j) const { return signs_[std::size_t(index(i, j))]; }

    const std::vector<std::int8_t>& signs() const { return signs_; }
    const std::vector<double>& values() const { return values_; }

    double mean() const;
    double max_abs() const;
    double l2_norm() const;

    /// Binary field lifted to continuous mode with the same values.
    TracerField to_continuous() const;

  private:
    TracerField() = default;
    GridSpec grid_;
    FieldMode mode_ = FieldMode::binary;
    std::vector<std::int8_t> signs_;  // binary mode
    std::vector<double> values_;      // continuous mode
};

/// Tiling of Q into 4^ell open squares of side lambda = 2^-ell.
/// Compatible with a grid of resolution m iff ell <= m, in which case each
/// tile is the union of a 2^(m-ell) x 2^(m-ell) block of cells.
struct Tiling {
    int ell = 0;

    double lambda() const { return std::ldexp(1.0, -ell); }
    int tiles_per_side() const { return 1 << ell; }
    std::int64_t tile_count() const { return std::int64_t(tiles_per_side()) * tiles_per_side(); }
    bool compatible_with(const GridSpec& g) const { return ell >= 0 && ell <= g.m; }
    /// Cells per tile side on grid g.
    int tile_cells(const GridSpec& g) const { return 1 << (g.m - ell); }
};

// -- Initial patterns ------------------------------------------------------

enum class PatternKind {
    left_right_halves,   // +1 for x < 0, -1 for x > 0
    top_bottom_halves,   // +1 for y > 0, -1 for y < 0
    checkerboard,        // cells of side 2^-level, signs by (I+J) parity
    stripes,             // vertical stripes of width 2^-level, +1 leftmost
    from_file,
};

struct Pattern {
    PatternKind kind = PatternKind::left_right_halves;
    int level = 0;      // checkerboard / stripes
    std::string path;   // from_file

    static Pattern left_right_halves() { return {PatternKind::left_right_halves, 0, {}}; }
    static Pattern top_bottom_halves() { return {PatternKind::top_bottom_halves, 0, {}}; }
    static Pattern checkerboard(int level) { return {PatternKind::checkerboard, level, {}}; }
    static Pattern stripes(int level) { return {PatternKind::stripes, level, {}}; }
    static Pattern from_file(std::string path) { return {PatternKind::from_file, 0, std::move(path)}; }
};

/// Builds the canonical binary initial data. Throws std::invalid_argument
/// when a pattern level exceeds the grid resolution (or is < 1 where the
/// pattern needs it for exact balance).
TracerField init_pattern(GridSpec grid, const Pattern& pattern);

// -- Tile statistics -------------------------------------------------------

/// Exact mean of cell values over tile (ti, tj); integer accumulation in
/// binary mode. Throws on an incompatible tiling.
double tile_average(const TracerField& field, const Tiling& tiling, int ti, int tj);

/// Integer sum of signs over a tile (binary mode only).
std::int64_t tile_sign_sum(const TracerField& field, const Tiling& tiling, int ti, int tj);

/// Def-style "mixed at scale lambda^k" on the dyadic ladder: every tile of
/// T at level k has exactly zero average (binary) or |avg| <= 1e-12
/// (continuous).
bool is_mixed_at_scale(const TracerField& field, int k_level);

/// Largest level k <= m with is_mixed_at_scale(field, k); -1 if the field
/// is not even mixed at level 0 (nonzero global average).
int mixed_level(const TracerField& field);

/// Constant-on-cell refinement onto a finer grid (new_m >= m). All tile
/// averages at levels <= m are unchanged.
TracerField refine(const TracerField& field, int new_m);

// -- Field file format -----------------------------------------------------
//
// Plain text: header line "mixlab-field v1 m=<m> mode=<binary|continuous>"
// followed by 2^m rows of 2^m space-separated values, row 0 at the top
// (y = +1/2 side).

void write_field(const TracerField& field, const std::string& path);
TracerField read_field(const std::string& path);

}  // namespace mixlab
