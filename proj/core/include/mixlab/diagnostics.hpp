#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mixlab/grid.hpp"
#include "mixlab/sat.hpp"

namespace mixlab {

/// Accuracy / gap / geometry constants shared by all diagnostics.
struct MixParams {
    double kappa = 0.5;      // accuracy of the geometric mixing scale, in (0,1)
    double gamma_bar = 0.5;  // un-mixedness gap, in (0,1)
    double alpha = 0.25;     // un-mixedness constant (measured or configured)

    double omega() const;  // sqrt((1 + gamma_bar)/2)
    /// Ball-fraction threshold of the characteristic length scale:
    /// 1 - ((1-kappa)/2) * gamma_bar.
    double ls_threshold() const { return 1.0 - 0.5 * (1.0 - kappa) * gamma_bar; }
    void validate() const;  // throws std::invalid_argument outside (0,1)
};

/// Geometric radius ladder with 4 steps per octave: radii h * 2^(idx/4).
/// Every 4th entry is an exact power of two times h, so dyadic targets such
/// as tile half-sides land exactly on the ladder. Scans report the bracket
/// [previous rung, found rung] instead of pretending to resolve real radii.
struct RadiusLadder {
    double h = 0.0;
    std::vector<double> radii;

    static RadiusLadder geometric(double h, double top);
    static double rung(double h, int idx);  // h * 2^(idx/4), exact dyadic at idx % 4 == 0
};

// -- Rasterized disks --------------------------------------------------------
//
// A cell belongs to B(x, r) iff its center does, with the strict test
//     dx*dx + dy*dy < r*r
// evaluated in doubles exactly in this operand order. Centers are grid
// nodes, so dx and dy are exact odd multiples of h/2 and the test is
// reproducible between the span-table fast path and any per-cell reference
// scan.

/// Per-row half-widths of the rasterized disk of radius r on a grid of cell
/// size h, centered at a node. Row k (offset (k+0.5)h above or below the
/// center) covers cell index span [c - half[k], c + half[k]) relative to the
/// center node index. total_cells is the unclipped cell count of the disk.
struct DiskSpans {
    std::vector<int> half;
    std::int64_t total_cells = 0;

    static DiskSpans build(double r, double h);
};

/// Dilation of Q by radius r in units of grid steps: admissible center nodes
/// for the geometric-mixing-scale scan are node indices in
/// [-steps, n + steps]^2 with steps = floor(r / h).
int dilation_steps(double r, double h);

// -- Geometric mixing scale (Def-style ball-average accuracy) ----------------

struct GeometricScaleResult {
    double value = 0.0;          // smallest passing ladder rung
    double lower_bracket = 0.0;  // largest failing rung below (0 if none)
    double upper_bracket = 0.0;  // == value when found
    bool found = false;          // false if even the ladder top fails
    int ladder_index = -1;
    /// Node index (gi, gj) of the first violating center at the last failing
    /// rung, scanned in deterministic row-major order; meaningful when
    /// ladder_index > 0.
    std::optional<std::array<int, 2>> binding_center;
};

/// Smallest ladder radius eps such that every ball average, exterior counted
/// as zero, satisfies |avg| / ||rho||_inf < kappa. Mean-zero input required.
GeometricScaleResult geometric_mixing_scale(const TracerField& field, const MixParams& params);

// -- Characteristic length scale ---------------------------------------------

/// Grid-aligned square region (a tile of some tiling, or all of Q).
struct GridSquare {
    int i0 = 0, j0 = 0, cells = 0;
    static GridSquare all(const GridSpec& g) { return {0, 0, g.n(), }; }
    static GridSquare tile(const GridSpec& g, const Tiling& t, int ti, int tj);
};

struct LengthScaleResult {
    double value = 0.0;          // largest qualifying rung; 0 if none qualifies
    double lower_bracket = 0.0;  // == value when found
    double upper_bracket = 0.0;  // next rung up (or the cap side/2)
    bool found = false;
    std::optional<std::array<int, 2>> witness_center;  // node index of a qualifying ball
};

/// Largest ladder radius r for which some ball B(x, r), centers on nodes of
/// E eroded by r, has |J cap B| / |B| strictly above the MixParams threshold.
LengthScaleResult characteristic_length_scale(const CellSet& J, const GridSquare& E,
                                              const MixParams& params);

// -- Un-mixedness certification (per-tile length scales) ---------------------

struct UnmixednessCertificate {
    bool certified = false;
    int level = 0;
    double min_ratio = 0.0;             // min over tiles of max(LS_A, LS_Ac) / lambda^k
    std::vector<double> tile_ratio;     // per tile, row-major (tj * tiles + ti)
    std::vector<double> tile_ls_pos;    // LS of {field=+1} within the tile
    std::vector<double> tile_ls_neg;    // LS of {field=-1} within the tile
};

/// Certifies the per-tile un-mixedness at tiling level k: every tile must
/// contain a qualifying ball for the +1 set or the -1 set with radius at
/// least alpha * lambda^k. Returns the measured per-tile ratios so alpha can
/// be read off instead of assumed.
UnmixednessCertificate unmixedness_certificate(const TracerField& field, int k_level,
                                               const MixParams& params);

// -- Sobolev norms of sampled velocities --------------------------------------

/// Velocity sampled at the cell centers of a dyadic grid over Q, zero
/// outside. Row-major with j major, as TracerField.
struct VelocitySample {
    GridSpec grid;
    std::vector<double> u, v;

    std::int64_t index(int i, int j) const { return std::int64_t(j) * grid.n() + i; }
};

/// Homogeneous W^{s,p} norm of the sampled field over Q.
/// Integer s: s-fold 4th-order centered differences, Frobenius norm over the
/// full order-s derivative tensor of both components, then the discrete L^p
/// norm (p may be infinity). Fractional s requires p = 2 and goes through
/// the spectral multiplier on the doubled even reflection.
double sobolev_norm(const VelocitySample& sample, double s, double p);

/// Spectral |xi|^s multiplier norm of one scalar component on the doubled
/// even-reflection extension (any s > 0, L^2 only).
double fractional_sobolev_l2(const GridSpec& grid, const std::vector<double>& component, double s);

// -- Functional mixing scale (spectral H^-1 on a padded torus) ----------------

/// H^-1 norm of a mean-zero field, approximated by embedding Q zero-padded in
/// a periodic square of side `padding` (>= 2) and solving the Poisson
/// equation spectrally with the zero mode dropped.
double functional_mixing_scale(const TracerField& field, int padding = 2);

/// H^-1 norm of a mean-zero sample on a full periodic square (size x size
/// cells, physical side torus_side), zero mode dropped. The backend of
/// functional_mixing_scale, exposed for direct spectral checks.
double torus_hminus1(int size, double torus_side, const std::vector<double>& values);

// -- Lusin-Lipschitz profile ---------------------------------------------------

/// Time-1 map of cell centers, as a cell permutation.
struct FlowMap {
    GridSpec grid;
    std::vector<std::uint32_t> forward;  // forward[src] = dst

    std::vector<std::uint32_t> inverse() const;
};

struct LusinProfile {
    std::vector<double> excluded_fraction;  // the probed epsilon values
    std::vector<double> lipschitz;          // L(eps), non-increasing
    std::vector<double> bound_shape;        // exp(fitted_c * cost / eps^(1/p))
    double cost = 0.0;
    double p = 2.0;
    double fitted_c = 0.0;
};

/// Empirical Lusin-Lipschitz probe: removes the eps-fraction of cells with
/// the largest sampled back-stretch statistic and reports the max surviving
/// pairwise ratio |X^-1(x) - X^-1(y)| / |x - y| at eps in {1,2,5,10,20}%.
/// Pair sampling is seeded and deterministic.
LusinProfile lusin_lipschitz_profile(const FlowMap& map, double cost, double p,
                                     std::uint64_t seed = 0, int pairs_per_scale = 4096);

}  // namespace mixlab
