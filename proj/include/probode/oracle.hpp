/**
 * @file oracle.hpp
 * @brief Store-everything adaptive simulation, smoothing, and interpolation.
 *
 * This is the classical formulation the constant-memory solver is checked
 * against: keep every accepted step of the forward pass, run the backward
 * smoothing recursion over all of them, and interpolate off-grid points
 * through prior bridges. The stepping loop is shared logic with the
 * fixed-point driver, so both produce bitwise-identical compute grids.
 */
#pragma once

#include "probode/fixedpoint.hpp"

namespace probode {

struct AdaptiveTrace {
    std::vector<double> times;                 ///< accepted grid, t_0 .. t_N
    std::vector<GaussianState> filtered;       ///< post-update marginals
    std::vector<AffineConditional> backwards;  ///< [i]: p(x(t_i) | x(t_{i+1}))
    std::vector<double> scales;                ///< sigma^2 of step i
    SolveStats stats;

    std::size_t stored_floats() const;
};

/// Adaptive forward pass from t0 to t_end storing every accepted step.
AdaptiveTrace adaptive_simulate(const Stepper& stepper);

/// Forced steps over a prescribed grid (grid.front() == t0), storing all.
AdaptiveTrace fixed_grid_simulate(const Stepper& stepper,
                                  const std::vector<double>& grid);

/// Backward smoothing pass over a trace; [i] is the marginal at times[i].
std::vector<GaussianState> smooth(const AdaptiveTrace& trace);

/// Smoothed marginal at an off-grid (or grid) time inside the trace span.
GaussianState interpolate_marginal(const Stepper& stepper,
                                   const AdaptiveTrace& trace,
                                   const std::vector<GaussianState>& smoothed,
                                   double s);

/// Adaptive simulation + smoothing + interpolation evaluated at targets:
/// the comparison target for the constant-memory solver.
std::vector<GaussianState> oracle_marginals_at_targets(
    const Stepper& stepper, const std::vector<double>& targets);

struct TerminalRun {
    GaussianState terminal;
    SolveStats stats;
};

/// O(1)-memory terminal-value solve; counts the compute grid without
/// storing it (the memory-estimation protocol for adaptive simulation).
TerminalRun solve_terminal(const Stepper& stepper);

/// Scalars adaptive simulation stores per accepted step (marginal plus
/// backward conditional plus the step's output scale).
std::size_t per_step_floats(const Stepper& stepper);

}  // namespace probode
