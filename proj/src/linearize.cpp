#include "probode/linearize.hpp"

namespace probode {

ResidualModel linearize_ek0(const ODEProblem& problem, const StateStack& stack,
                            const Matrix& rep_mean)
{
    const int k = problem.order;
    const Vector u = stack.derivative_block(rep_mean, 0);
    const Vector du = problem.order == 2 ? stack.derivative_block(rep_mean, 1)
                                         : Vector();
    const Vector fval = problem.f(u, du);

    ResidualModel model;
    model.h = stack.projection(k);
    if (stack.mode == Factorization::dense) {
        model.offset = -fval;
    } else {
        model.offset = -fval.transpose();  // 1 x d, one column per coordinate
    }
    return model;
}

ResidualModel linearize_ek1(const ODEProblem& problem, const StateStack& stack,
                            const Matrix& rep_mean)
{
    if (stack.mode != Factorization::dense)
        throw std::runtime_error(
            "linearize_ek1: first-order linearization requires the dense "
            "factorization");
    if (!problem.jac_u || (problem.order == 2 && !problem.jac_du))
        throw std::runtime_error(
            "linearize_ek1: problem does not supply the required Jacobians");

    const int k = problem.order;
    const Vector u = stack.derivative_block(rep_mean, 0);
    const Vector du = problem.order == 2 ? stack.derivative_block(rep_mean, 1)
                                         : Vector();
    const Vector fval = problem.f(u, du);

    ResidualModel model;
    model.h = stack.projection(k) - problem.jac_u(u, du) * stack.projection(0);
    if (problem.order == 2)
        model.h -= problem.jac_du(u, du) * stack.projection(1);
    // Offset chosen so that h * mean + offset reproduces the exact residual
    // at the linearization point.
    const Vector residual = stack.derivative_block(rep_mean, k) - fval;
    model.offset = residual - model.h * rep_mean;
    return model;
}

ResidualModel linearize(Linearization mode, const ODEProblem& problem,
                        const StateStack& stack, const Matrix& rep_mean)
{
    return mode == Linearization::ek0
               ? linearize_ek0(problem, stack, rep_mean)
               : linearize_ek1(problem, stack, rep_mean);
}

}  // namespace probode
