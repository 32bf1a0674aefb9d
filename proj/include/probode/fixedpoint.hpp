/**
 * @file fixedpoint.hpp
 * @brief Adaptive target simulation: constant-memory accumulation of
 *        backward conditionals between user targets.
 *
 * The forward pass tracks two anchors at a time, the previous target `a`
 * and the time-stepping tip `t`, together with the single conditional
 * p(state(a) | state(t)). Every accepted step's backward conditional is
 * merged into that accumulator in place, so the live storage between two
 * targets never grows with the number of steps. Closing a target inserts
 * prior-bridge predictions only; it never feeds back into the step-size
 * controller, which keeps the compute grid identical to a plain adaptive
 * solve of the same problem.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "probode/stepping.hpp"

namespace probode {

struct SolveStats {
    long accepted = 0;
    long rejected = 0;
    double min_dt = std::numeric_limits<double>::infinity();
    double max_dt = 0.0;
    long singular_scale_steps = 0;  ///< steps whose innovation factor had zero pivots

    void record_accept(double dt, int rank_deficiency);
};

/// Loop state of the two-target recursion. `accum` is p(state(a) | state(t));
/// `prev_error` and `last_scale` carry the controller memory and the newest
/// accepted step's output scale (used for bridge predictions inside that
/// step's interval).
struct FixedPointCarry {
    double a = 0.0;
    GaussianState p_a;
    double t = 0.0;
    GaussianState p_t;
    AffineConditional accum;
    double dt = 0.0;
    double prev_error = 1.0;
    double last_scale = 1.0;
};

struct TargetBundle {
    AffineConditional cond;  ///< p(state(left time) | state(right time))
    GaussianState marginal;
};

struct TwoTargetResult {
    TargetBundle left;   ///< p(state(a) | state(b)) and the marginal at b
    TargetBundle right;  ///< p(state(b) | state(t)) and the marginal at t
    double dt;
};

/// Advance the carry to boundary b > carry.a: interpolates without stepping
/// when b < carry.t, otherwise time-steps until the tip passes b (clipping
/// only at the domain end). Updates `carry` so the next boundary can be
/// requested immediately.
TwoTargetResult solve_two_targets(const Stepper& stepper, FixedPointCarry& carry,
                                  double b, SolveStats* stats = nullptr);

/// The O(M) solution representation: one conditional per target interval
/// plus the boundary marginals. Everything else from the forward pass is
/// discarded.
struct TargetSolution {
    std::vector<double> targets;      ///< s_0 .. s_M, strictly increasing
    GaussianState initial_marginal;   ///< p(state(s_0) | u0, residual(s_0))
    GaussianState terminal_marginal;  ///< p(state(s_M) | all residuals)
    /// conditionals[m-1] = p(state(s_{m-1}) | state(s_m)), m = 1..M.
    std::vector<AffineConditional> conditionals;
    SolveStats stats;
    StateStack stack;

    std::size_t num_targets() const { return targets.size() - 1; }
    /// Exact number of stored scalars; independent of the compute grid.
    std::size_t stored_floats() const;
};

/// Full adaptive target simulation over a strictly increasing target grid
/// whose endpoints must equal the problem's time span.
TargetSolution solve_targets(const ODEProblem& problem,
                             const std::vector<double>& targets,
                             const SolverConfig& config);

/// Smoothed marginals at all targets, terminal first recursion, returned in
/// forward time order (length M + 1).
std::vector<GaussianState> marginals(const TargetSolution& sol);

/// K joint posterior trajectories of the solution values; each sample is an
/// (M + 1) x d matrix. Deterministic for a fixed seed.
std::vector<Matrix> sample_joint(const TargetSolution& sol, int num_samples,
                                 std::uint64_t seed);

}  // namespace probode
