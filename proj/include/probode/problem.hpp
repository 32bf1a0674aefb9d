/**
 * @file problem.hpp
 * @brief Initial value problem description consumed by the solvers.
 */
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "probode/gaussian.hpp"
#include "probode/jet.hpp"

namespace probode {

/// u^(order)(t) = f(u, u') on [t0, t_end]. Autonomous; `order` is 1 or 2.
/// For order 1 the second argument of the callbacks is an empty vector.
struct ODEProblem {
    int dim = 0;    ///< d
    int order = 1;  ///< highest derivative on the left-hand side

    std::function<Vector(const Vector& u, const Vector& du)> f;

    /// d f / d u and (order 2 only) d f / d u'. Required for first-order
    /// linearization, optional otherwise.
    std::function<Matrix(const Vector& u, const Vector& du)> jac_u;
    std::function<Matrix(const Vector& u, const Vector& du)> jac_du;

    /// Same field over truncated Taylor scalars, used by the exact
    /// initializer. Problems whose field cannot be expressed this way may
    /// instead supply `init_stack` below.
    std::function<std::vector<Jet>(const std::vector<Jet>& u,
                                   const std::vector<Jet>& du)> jet_f;

    /// Optional user-supplied exact derivative stack, row i = u^(i)(t0),
    /// shape (L_max + 1) x dim. Used when `jet_f` is absent (or rows beyond
    /// its size are required).
    std::optional<Matrix> init_stack;

    double t0 = 0.0;
    double t_end = 1.0;
    Vector u0;   ///< length dim
    Vector du0;  ///< length dim when order == 2, else empty

    Vector eval_f(const Vector& u, const Vector& du) const { return f(u, du); }

    void validate() const
    {
        if (dim <= 0) throw std::invalid_argument("ODEProblem: dim must be positive");
        if (order != 1 && order != 2)
            throw std::invalid_argument("ODEProblem: order must be 1 or 2");
        if (!(t0 < t_end))
            throw std::invalid_argument("ODEProblem: t0 must precede t_end");
        if (u0.size() != dim)
            throw std::invalid_argument("ODEProblem: u0 length mismatch");
        if (order == 2 && du0.size() != dim)
            throw std::invalid_argument("ODEProblem: du0 length mismatch");
        if (!f) throw std::invalid_argument("ODEProblem: vector field missing");
    }
};

/// Raised when a trial step meets non-finite state or residual values.
class StepDivergedError : public std::runtime_error {
public:
    StepDivergedError(double t, double dt)
        : std::runtime_error("step diverged at t = " + std::to_string(t) +
                             ", dt = " + std::to_string(dt)),
          t_(t), dt_(dt) {}
    double t() const { return t_; }
    double dt() const { return dt_; }

private:
    double t_;
    double dt_;
};

}  // namespace probode
