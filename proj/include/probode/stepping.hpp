/**
 * @file stepping.hpp
 * @brief One adaptive forward step: predict, linearize, condition on the
 *        zero residual, estimate the local error, and propose the next dt.
 *
 * All covariance work happens in preconditioned coordinates (see
 * prior.hpp); states and conditionals cross the API boundary in physical
 * coordinates only. The local output scale is estimated per step from the
 * whitened innovation and, when calibration is on, the step is re-assembled
 * with the rescaled process noise before its backward conditional leaves
 * this module.
 */
#pragma once

#include <optional>

#include "probode/linearize.hpp"

namespace probode {

enum class Calibration { none, time_varying };

struct SolverConfig {
    int num_derivatives = 4;  ///< L
    Linearization linearization = Linearization::ek0;
    Factorization factorization = Factorization::isotropic;
    double abs_tol = 1e-9;
    double rel_tol = 1e-6;
    double safety = 0.95;
    double min_factor = 0.1;
    double max_factor = 10.0;
    /// PI exponents; non-positive values resolve to 0.7/(L+1), 0.4/(L+1).
    double pi_alpha = 0.0;
    double pi_beta = 0.0;
    Calibration calibration = Calibration::time_varying;
    /// Initial step size; non-positive selects the magnitude heuristic.
    double initial_dt = 0.0;

    double resolved_alpha() const
    {
        return pi_alpha > 0.0 ? pi_alpha : 0.7 / (num_derivatives + 1);
    }
    double resolved_beta() const
    {
        return pi_beta > 0.0 ? pi_beta : 0.4 / (num_derivatives + 1);
    }

    void validate() const;
};

struct StepOutcome {
    bool accepted = false;
    /// Present only on accepted steps.
    std::optional<GaussianState> new_marginal;
    /// p(state(t) | state(t + dt)); present only on accepted steps.
    std::optional<AffineConditional> backward;
    double error = 0.0;  ///< normalized local error, accepted iff <= 1
    double dt_used = 0.0;
    double dt_next = 0.0;
    double scale = 0.0;  ///< local output-scale estimate sigma^2
    int rank_deficiency = 0;
};

/// dt * clip(safety * error^(-alpha) * prev_error^(beta), min, max).
/// error == 0 grows by max_factor; prev_error <= 0 drops the history term.
double pi_control(double error, double dt, double prev_error,
                  const SolverConfig& config);

/// Quasi-maximum-likelihood output scale sigma^2 = z^T S^{-1} z / k of an
/// innovation N(z, S), evaluated through a triangular solve against the
/// stored factor. Whitening directions with zero pivots contribute nothing;
/// `rank_deficiency`, when given, counts them.
double innovation_scale(const GaussianState& innovation,
                        int* rank_deficiency = nullptr);

/// Owns the problem, the prior discretization, and the linearization mode.
/// Stateless between calls: the caller carries marginals and dt proposals.
class Stepper {
public:
    Stepper(ODEProblem problem, SolverConfig config);

    const StateStack& stack() const { return stack_; }
    const ODEProblem& problem() const { return problem_; }
    const SolverConfig& config() const { return config_; }

    /// Taylor initialization conditioned on the residual at t0.
    GaussianState initial_state() const;

    /// Hairer-style first step size from |f(u0)| and the tolerances.
    double initial_dt() const;

    /// Extrapolate over dt > 0 with process noise scaled by sqrt(scale);
    /// returns the extrapolated marginal and p(state(t) | state(t + dt)).
    std::pair<GaussianState, AffineConditional> predict(
        const GaussianState& g, double dt, double scale = 1.0) const;

    /// One trial step with error control.
    StepOutcome attempt_step(const GaussianState& g, double t, double dt,
                             double prev_error) const;

    /// Same step without the acceptance test (fixed-grid solves).
    StepOutcome forced_step(const GaussianState& g, double t, double dt) const;

private:
    StepOutcome step_core(const GaussianState& g, double t, double dt,
                          double prev_error, bool adaptive) const;

    ODEProblem problem_;
    SolverConfig config_;
    StateStack stack_;
    TransitionModel model_;
    Matrix phi_lifted_;         ///< preconditioned transition, representation space
    Matrix sigma_sqrt_lifted_;  ///< preconditioned noise factor, lifted
};

}  // namespace probode
