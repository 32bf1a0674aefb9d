/**
 * @file problems.hpp
 * @brief Benchmark initial value problems with reference policies.
 */
#pragma once

#include <functional>
#include <string>

#include "probode/stepping.hpp"

namespace probode {

struct ReferencePolicy {
    enum class Kind { closed_form, rk_high_accuracy };
    Kind kind = Kind::rk_high_accuracy;
    /// Exact solution u(t); set when kind == closed_form.
    std::function<Vector(double)> closed_form;
    /// Tolerance of the high-accuracy embedded RK reference run.
    double rk_tolerance = 1e-13;
};

struct BenchmarkProblem {
    ODEProblem ode;
    std::string name;
    SolverConfig recommended;
    ReferencePolicy reference;
};

BenchmarkProblem logistic();
BenchmarkProblem van_der_pol();
BenchmarkProblem rigid_body();
/// Method-of-lines Brusselator on d_points spatial nodes (ODE dim 2 d_points).
BenchmarkProblem brusselator(int d_points);
BenchmarkProblem pleiades();
BenchmarkProblem three_body();

/// Look up by CLI name (logistic, van-der-pol, rigid-body, brusselator-<d>,
/// pleiades, three-body).
BenchmarkProblem problem_by_name(const std::string& name);

/// Conserved quantity of the restricted three-body problem (rotating frame),
/// used to validate reference trajectories.
double jacobi_constant(const Vector& u, const Vector& du);

}  // namespace probode
