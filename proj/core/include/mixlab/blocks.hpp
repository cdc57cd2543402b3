#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "mixlab/grid.hpp"

namespace mixlab {

/// Analytic, divergence-free velocity sampler on the unit cell Q = (-1/2,1/2)^2
/// for 0 <= t <= 1, zero outside Q.
class VelocityField {
  public:
    virtual ~VelocityField() = default;
    virtual std::array<double, 2> value(double t, double x, double y) const = 0;
    /// d^a_x d^b_y of component comp (0 = u, 1 = v).
    virtual double derivative(int comp, int a, int b, double t, double x, double y) const = 0;
    virtual bool time_constant() const { return true; }
};

/// Amplitude at which the time-1 map's linearized rotation at the cell center
/// is a quarter turn: 1 / (4 pi).
double default_swirl_amplitude();

/// Stream-function swirl psi = A sin^2(pi(x+1/2)) sin^2(pi(y+1/2)),
/// u = (d psi/dy, -d psi/dx). Exactly divergence-free; u and grad u vanish on
/// the boundary of Q. Constant in time. All spatial derivatives are closed
/// forms of the 1D factor derivatives.
class SwirlVelocity final : public VelocityField {
  public:
    explicit SwirlVelocity(double amplitude);
    double amplitude() const { return amplitude_; }
    std::array<double, 2> value(double t, double x, double y) const override;
    double derivative(int comp, int a, int b, double t, double x, double y) const override;

  private:
    double amplitude_;
};

// -- Unit-cell building blocks -------------------------------------------------

enum class BlockKind { interleave, baker, deep, swirl };

/// A unit-cell mixer: an exact measure-preserving cell permutation for tracer
/// transport, optionally paired with an analytic velocity sampler for the
/// Sobolev-budget side. The two representations are deliberately separate:
/// mixing-scale measurements ride the exact permutation, cost measurements
/// ride the analytic sampler.
struct Block {
    BlockKind kind = BlockKind::interleave;
    int native_q = 2;     // minimum admissible grid resolution
    int depth_gain = 0;   // extra un-mixedness levels beyond the one standard
                          // tiling refinement per stage (the sigma increment)
    int mix_gain = 1;     // dyadic mixedness levels added on aligned canonical data
    int start_level = 0;  // sub-scale (dyadic level) the permutation starts acting at
    bool approximate = false;  // permutation only approximates the velocity's flow map
    int fixed_q = 0;      // if > 0: generate at this resolution, refine by
                          // sub-square translation to finer grids
    int swirl_substeps = 64;
    std::shared_ptr<const VelocityField> velocity;  // null for baker

    bool has_velocity() const { return velocity != nullptr; }
    /// Cell permutation at resolution m >= native_q; target[src] = dst,
    /// indices row-major with j major.
    std::vector<std::uint32_t> permutation(int m) const;
};

/// Figure-1 style interleave: middle-column swap (0,2,1,3) of the four
/// width-1/4 column bands, rows fixed. Carries the default swirl sampler as
/// its analytic velocity.
Block canonical_interleave_block(double amplitude = default_swirl_amplitude());

/// Discrete baker's map (x,y) -> (2x mod 1, (y + floor(2x))/2) realized as the
/// exact digit-shift bijection on any dyadic grid. No velocity sampler: cost
/// queries on this block are a hard error.
Block baker_block();

/// Interleave applied recursively d times (level j tiles for j = start_level
/// .. start_level + d - 1). Mixes aligned canonical data d levels deep.
Block deep_block(int d, int q = 0, int start_level = 0,
                 double amplitude = default_swirl_amplitude());

/// Swirl transport block: the permutation is the grid-snapped time-1 flow map
/// of the swirl velocity (4th-order integration of cell centers, snapping
/// collisions resolved to the nearest unclaimed cell); flagged approximate.
Block swirl_block(double amplitude = default_swirl_amplitude(), int substeps = 64);

/// Transports the tracer by the block permutation at the field's resolution.
TracerField apply_block(const Block& block, const TracerField& field);

/// int_0^1 || grad^s u(t,.) ||_{L^p(Q)} dt. Integer s by quadrature of the
/// analytic derivatives; fractional s (p = 2 only) by the spectral multiplier
/// on the doubled even reflection of a fine sample. Throws
/// MissingVelocityError for velocity-less blocks.
double block_cost(const Block& block, double s, double p);

/// || |D^s u(t,.)|_F ||_{L^p(Q)} by midpoint quadrature of analytic
/// derivatives on a quad_cells^2 grid (integer s >= 1).
double analytic_wsp_norm(const VelocityField& v, double t, int s, double p, int quad_cells = 512);

// -- Permutation helpers (exposed for composition and reference tests) ---------

std::vector<std::uint32_t> perm_identity(int m);
std::vector<std::uint32_t> perm_interleave(int m);
std::vector<std::uint32_t> perm_deep(int m, int d, int start_level = 0);
std::vector<std::uint32_t> perm_baker(int m);
/// Refines a resolution-q permutation to resolution m >= q by translating
/// whole sub-squares (offsets within a native cell are preserved).
std::vector<std::uint32_t> refine_permutation(const std::vector<std::uint32_t>& perm, int q,
                                              int m);
/// first, then second: returns second(first(.)).
std::vector<std::uint32_t> compose_permutations(const std::vector<std::uint32_t>& first,
                                                const std::vector<std::uint32_t>& second);

}  // namespace mixlab
