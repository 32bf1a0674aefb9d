/**
 * @file prior.hpp
 * @brief Integrated-Wiener-process transition model, step-size
 *        preconditioning, and exact Taylor initialization.
 *
 * The state tracked by the solver stacks the solution and its first L
 * derivatives. Transitions over a step dt have the closed forms
 *   phi_ij(dt)   = dt^(j-i) / (j-i)!                      (j >= i)
 *   sigma_ij(dt) = dt^(2L+1-i-j) / ((2L+1-i-j) (L-i)! (L-j)!)
 * with zero-based indices. In the preconditioned coordinates
 * T(dt) = diag(sqrt(dt) dt^(L-i)/(L-i)!) both matrices lose their dt
 * dependence, which is how small steps stay well conditioned.
 */
#pragma once

#include "probode/gaussian.hpp"
#include "probode/problem.hpp"

namespace probode {

/// Closed-form transition of the L-times integrated Wiener process:
/// returns (phi, sigma_sqrt) with sigma_sqrt a lower-triangular factor of
/// sigma, assembled through the preconditioned coordinates to avoid
/// underflow for small dt.
std::pair<Matrix, Matrix> iwp_transition(int num_derivatives, double dt);

/// Diagonal of the step-size preconditioner T(dt), length L + 1.
Vector precondition(int num_derivatives, double dt);

/// dt-independent transitions in preconditioned coordinates.
struct TransitionModel {
    explicit TransitionModel(int num_derivatives);

    int num_derivatives;       ///< L
    Matrix phi_precond;        ///< (L+1)^2, unit upper triangular
    Matrix sigma_sqrt_precond; ///< (L+1)^2, lower triangular

    Matrix phi(double dt) const;
    Matrix sigma_sqrt(double dt) const;
};

enum class Factorization { dense, isotropic };

/// Layout of the derivative stack over d ODE coordinates. The flat state
/// vector is derivative-major: [u_1..u_d, u'_1..u'_d, ...]. The dense
/// representation keeps it as one column of length (L+1) d; the isotropic
/// representation reshapes it to an (L+1) x d mean whose columns share a
/// single small covariance factor.
struct StateStack {
    int num_derivatives = 1;
    int ode_dim = 1;
    Factorization mode = Factorization::dense;

    int rep_dim() const
    {
        return mode == Factorization::dense
                   ? (num_derivatives + 1) * ode_dim
                   : num_derivatives + 1;
    }
    int rep_width() const
    {
        return mode == Factorization::dense ? 1 : ode_dim;
    }
    int flat_dim() const { return (num_derivatives + 1) * ode_dim; }

    /// Selector of the i-th derivative block, rows x rep_dim with
    /// rows = ode_dim (dense) or 1 (isotropic).
    Matrix projection(int derivative) const;

    /// Representation -> flat state vector and back (exact round trip).
    Vector gather(const Matrix& rep) const;
    Matrix scatter(const Vector& flat) const;

    /// Derivative block i of a represented mean, as a length-d vector.
    Vector derivative_block(const Matrix& rep_mean, int derivative) const;

    /// Transition / preconditioner lifted to the representation space:
    /// dense mode applies the small matrix blockwise (kron with I_d),
    /// isotropic mode uses it unchanged.
    Matrix lift(const Matrix& small) const;
    Vector lift_diag(const Vector& small_diag) const;
};

/// Dirac state whose mean stacks the exact Taylor coefficients
/// u(t0), u'(t0), ..., u^(L)(t0), propagated through the vector field with
/// jet arithmetic (or copied from problem.init_stack when provided).
GaussianState taylor_init(const ODEProblem& problem, const StateStack& stack);

}  // namespace probode
