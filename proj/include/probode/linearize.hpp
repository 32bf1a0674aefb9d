/**
 * @file linearize.hpp
 * @brief Affine observation models of the ODE residual.
 *
 * The residual u^(k) - f(u, [u']) is observed as zero at every accepted
 * step. Zeroth order freezes f at the current mean; first order expands it
 * with the user-supplied Jacobians. Either way the returned model is exact
 * at the linearization point: h * x + offset equals the true residual there.
 */
#pragma once

#include "probode/prior.hpp"

namespace probode {

enum class Linearization { ek0, ek1 };

/// residual(x) ~ h * x + offset over the state-stack representation;
/// offset has one column per representation column.
struct ResidualModel {
    Matrix h;
    Matrix offset;
};

/// h = E_k, offset = -f(mean blocks): f frozen at the linearization point.
/// Works in dense and isotropic representations.
ResidualModel linearize_ek0(const ODEProblem& problem, const StateStack& stack,
                            const Matrix& rep_mean);

/// h = E_k - J_u E_0 (- J_u' E_1 for order 2). Requires Jacobians and the
/// dense representation.
ResidualModel linearize_ek1(const ODEProblem& problem, const StateStack& stack,
                            const Matrix& rep_mean);

ResidualModel linearize(Linearization mode, const ODEProblem& problem,
                        const StateStack& stack, const Matrix& rep_mean);

}  // namespace probode
