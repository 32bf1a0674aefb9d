/**
 * @file rk.hpp
 * @brief Embedded Runge-Kutta baselines and high-accuracy references.
 *
 * Two pairs are provided: a 3(2) pair (Bogacki-Shampine) and a 5(4) pair
 * (Tsitouras). Both run under the same proportional-integral controller as
 * the probabilistic stepper. Reference trajectories come from the 5(4) pair
 * at an extreme tolerance; the reference id is recorded in benchmark
 * metadata.
 */
#pragma once

#include <functional>
#include <vector>

#include "probode/problem.hpp"

namespace probode {

enum class RKMethod { bosh3, tsit5 };

struct FirstOrderSystem {
    int dim = 0;
    std::function<Vector(double, const Vector&)> f;
};

/// Second-order problems are stacked as y = (u, u').
FirstOrderSystem to_first_order(const ODEProblem& problem);

struct RKOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double safety = 0.95;
    double min_factor = 0.1;
    double max_factor = 10.0;
    double initial_dt = 0.0;  ///< non-positive selects the heuristic
    long max_steps = 200000000;
};

struct RKResult {
    bool diverged = false;
    long accepted = 0;
    long rejected = 0;
    /// Row r holds the system state at eval_times[r]; valid rows only up to
    /// the divergence point when `diverged` is set.
    Matrix states;
};

/// Adaptive solve reporting the state at each requested time (sorted,
/// inside [t0, t_end]); steps are clipped at the evaluation times.
RKResult rk_solve_at(const FirstOrderSystem& system, RKMethod method, double t0,
                     const Vector& y0, const std::vector<double>& eval_times,
                     const RKOptions& options);

/// Fixed-step solve with `num_steps` uniform steps; for order studies.
Vector rk_fixed(const FirstOrderSystem& system, RKMethod method, double t0,
                const Vector& y0, double t1, long num_steps);

}  // namespace probode
