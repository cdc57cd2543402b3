#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mixlab/blocks.hpp"
#include "mixlab/diagnostics.hpp"
#include "mixlab/grid.hpp"

namespace mixlab {

/// Nondecreasing un-mixedness depth sequence sigma(n).
struct SigmaSequence {
    enum class Kind { constant, linear, custom };
    Kind kind = Kind::constant;
    int value = 0;              // constant / linear slope
    std::vector<int> values;    // custom

    static SigmaSequence constant(int c);
    static SigmaSequence linear(int slope);
    static SigmaSequence custom(std::vector<int> values);

    int at(int n) const;
    void validate(int stages) const;
};

/// Stage switch times T_0 = 0 < T_1 < ... with tau_n = T_{n+1} - T_n.
struct Schedule {
    std::vector<double> times;

    int stages() const { return int(times.size()) - 1; }
    double tau(int n) const { return times[std::size_t(n) + 1] - times[std::size_t(n)]; }
    double window(int n, int k) const {
        return times[std::size_t(n) + std::size_t(k)] - times[std::size_t(n)];
    }
    void validate() const;  // strictly increasing, T_0 = 0

    static Schedule unit(int stages);  // T_n = n
};

struct FlowConfig {
    int lambda_exponent = 1;  // lambda = 2^-ell0, ell0 >= 1
    std::vector<Block> stage_blocks;
    Schedule schedule;
    SigmaSequence sigma = SigmaSequence::constant(0);
    /// Check at construction that exact cascade blocks realize the declared
    /// sigma (start level ell0*sigma(n), gain ell0*(1 + sigma(n+1)-sigma(n))).
    /// Baker and approximate blocks are exempt from the structural check.
    bool validate_structure = true;
};

/// Generalized cellular flow: at stage n the stage block is rescaled into
/// every tile of the level-(ell0*n) tiling in space and into [T_n, T_{n+1}]
/// in time. Stage transport is an exact per-tile permutation; the rescaled
/// velocity is exposed for budget measurements.
class CellularFlow {
  public:
    CellularFlow(FlowConfig config, TracerField initial);

    int stage_count() const { return int(config_.stage_blocks.size()); }
    int current_stage() const { return stage_; }
    int lambda_exponent() const { return config_.lambda_exponent; }
    double lambda() const { return std::ldexp(1.0, -config_.lambda_exponent); }
    const Schedule& schedule() const { return config_.schedule; }
    const SigmaSequence& sigma() const { return config_.sigma; }
    const Block& block(int n) const { return config_.stage_blocks.at(std::size_t(n)); }
    const TracerField& state() const { return state_; }

    /// Dyadic tile level of stage n, ell0 * n.
    int stage_tile_level(int n) const { return config_.lambda_exponent * n; }
    /// Declared mixed level at time T_n: ell0 * (n + sigma(n)).
    int declared_mixed_level(int n) const;

    /// Executes the next stage with the exact permutation backend.
    void compose_stage();
    /// Executes the next stage with the semi-Lagrangian backend (continuous
    /// state only).
    void advance_stage_semi_lagrangian(int substeps);

    /// Velocity of the assembled flow at (t, x): the stage block sampler
    /// rescaled by lambda^n / tau_n into the tile containing x; zero outside
    /// Q and on tile boundaries. Throws outside the schedule range or when
    /// the stage block has no sampler.
    std::array<double, 2> global_velocity(double t, double x, double y) const;
    /// Spatial derivative d^a_x d^b_y of the assembled velocity.
    double global_velocity_derivative(int comp, int a, int b, double t, double x,
                                      double y) const;
    /// Samples the assembled velocity at the cell centers of a dyadic grid.
    VelocitySample sample_velocity(double t, int sample_m) const;

    /// Composition of the executed exact stage permutations (time-1 map of
    /// cell centers). Invalid after a semi-Lagrangian stage.
    FlowMap accumulated_map() const;

  private:
    const Block& next_block() const;
    FlowConfig config_;
    TracerField state_;
    int stage_ = 0;
    std::vector<std::uint32_t> accum_;
    bool accum_valid_ = true;
};

/// Backward-characteristic transport of `field` across stage n of the flow:
/// 4th-order integration of -u with `substeps` uniform steps and bilinear
/// sampling; the mean is re-centered exactly. reverse = true transports by
/// the time-reversed velocity (the round-trip inverse).
TracerField advect_semi_lagrangian(const CellularFlow& flow, int n, const TracerField& field,
                                   int substeps, bool reverse = false);

// -- driving ----------------------------------------------------------------------

struct MeasureOptions {
    MixParams params;
    bool geometric = true;
    bool functional = true;
    bool length_scale = true;
    int padding = 2;
    bool wsp = false;        // measure ||grad^s u||_{L^p} per stage from a grid sample
    double wsp_s = 1.0;
    double wsp_p = 2.0;
    int wsp_sample_m = 0;    // 0: use the tracer grid resolution
};

struct Snapshot {
    int n = 0;
    double t = 0.0;
    TracerField field;
    int mixed_level = -1;
    std::optional<GeometricScaleResult> geometric;
    std::optional<double> hminus1;
    std::optional<LengthScaleResult> length_scale;
    std::optional<double> wsp;  // norm during stage n (absent on the final snapshot)
};

/// Runs stages 0..n_stages-1 with the permutation backend, measuring each
/// stage-boundary state eagerly. Snapshot 0 is the initial state at T_0.
std::vector<Snapshot> run_flow(CellularFlow& flow, int n_stages, const MeasureOptions& opts);

}  // namespace mixlab
