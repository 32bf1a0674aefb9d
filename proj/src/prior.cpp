#include "probode/prior.hpp"

#include <cassert>
#include <cmath>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace probode {

namespace {

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= static_cast<double>(i);
    return r;
}

double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace

Vector precondition(int num_derivatives, double dt)
{
    if (dt <= 0.0) throw std::invalid_argument("precondition: dt must be positive");
    const int q = num_derivatives;
    Vector t(q + 1);
    const double root = std::sqrt(dt);
    for (int i = 0; i <= q; ++i)
        t(i) = root * std::pow(dt, q - i) / factorial(q - i);
    return t;
}

TransitionModel::TransitionModel(int L) : num_derivatives(L)
{
    if (L < 1) throw std::invalid_argument("TransitionModel: L must be >= 1");
    const int n = L + 1;
    phi_precond = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            phi_precond(i, j) = binomial(L - i, j - i);

    // Gram matrix of the monomial basis; in these coordinates it has no dt
    // dependence left.
    Matrix sigma_bar(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sigma_bar(i, j) = 1.0 / static_cast<double>(2 * L + 1 - i - j);

    Eigen::LLT<Matrix> llt(sigma_bar);
    if (llt.info() == Eigen::Success) {
        sigma_sqrt_precond = llt.matrixL();
    } else {
        // Severely ill-conditioned for large L; fall back to a clamped
        // symmetric square root re-triangularized into Cholesky shape.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_bar);
        Vector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        Matrix root = eig.eigenvectors() * vals.asDiagonal();
        sigma_sqrt_precond = triangularize(root.transpose());
    }
}

Matrix TransitionModel::phi(double dt) const
{
    const Vector t = precondition(num_derivatives, dt);
    return t.asDiagonal() * phi_precond * t.cwiseInverse().asDiagonal();
}

Matrix TransitionModel::sigma_sqrt(double dt) const
{
    const Vector t = precondition(num_derivatives, dt);
    return t.asDiagonal() * sigma_sqrt_precond;
}

std::pair<Matrix, Matrix> iwp_transition(int num_derivatives, double dt)
{
    if (num_derivatives < 1)
        throw std::invalid_argument("iwp_transition: L must be >= 1");
    if (dt <= 0.0) throw std::invalid_argument("iwp_transition: dt must be positive");
    TransitionModel model(num_derivatives);
    return {model.phi(dt), model.sigma_sqrt(dt)};
}

Matrix StateStack::projection(int derivative) const
{
    assert(derivative >= 0 && derivative <= num_derivatives);
    if (mode == Factorization::dense) {
        Matrix e = Matrix::Zero(ode_dim, rep_dim());
        e.middleCols(derivative * ode_dim, ode_dim).setIdentity();
        return e;
    }
    Matrix e = Matrix::Zero(1, num_derivatives + 1);
    e(0, derivative) = 1.0;
    return e;
}

Vector StateStack::gather(const Matrix& rep) const
{
    assert(rep.rows() == rep_dim() && rep.cols() == rep_width());
    if (mode == Factorization::dense) return rep.col(0);
    Vector flat(flat_dim());
    for (int i = 0; i <= num_derivatives; ++i)
        flat.segment(i * ode_dim, ode_dim) = rep.row(i).transpose();
    return flat;
}

Matrix StateStack::scatter(const Vector& flat) const
{
    assert(flat.size() == flat_dim());
    if (mode == Factorization::dense) return flat;
    Matrix rep(num_derivatives + 1, ode_dim);
    for (int i = 0; i <= num_derivatives; ++i)
        rep.row(i) = flat.segment(i * ode_dim, ode_dim).transpose();
    return rep;
}

Vector StateStack::derivative_block(const Matrix& rep_mean, int derivative) const
{
    if (mode == Factorization::dense)
        return rep_mean.col(0).segment(derivative * ode_dim, ode_dim);
    return rep_mean.row(derivative).transpose();
}

Matrix StateStack::lift(const Matrix& small) const
{
    if (mode == Factorization::isotropic) return small;
    const int n = num_derivatives + 1;
    assert(small.rows() == n && small.cols() == n);
    Matrix big = Matrix::Zero(n * ode_dim, n * ode_dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (small(i, j) != 0.0)
                big.block(i * ode_dim, j * ode_dim, ode_dim, ode_dim) =
                    small(i, j) * Matrix::Identity(ode_dim, ode_dim);
    return big;
}

Vector StateStack::lift_diag(const Vector& small_diag) const
{
    if (mode == Factorization::isotropic) return small_diag;
    Vector big(small_diag.size() * ode_dim);
    for (int i = 0; i < small_diag.size(); ++i)
        big.segment(i * ode_dim, ode_dim).setConstant(small_diag(i));
    return big;
}

GaussianState taylor_init(const ODEProblem& problem, const StateStack& stack)
{
    problem.validate();
    const int L = stack.num_derivatives;
    const int d = stack.ode_dim;
    if (d != problem.dim)
        throw std::invalid_argument("taylor_init: stack dimension mismatch");
    if (L < problem.order)
        throw std::invalid_argument("taylor_init: need L >= ODE order");

    Vector flat(stack.flat_dim());
    if (problem.jet_f) {
        std::vector<Jet> u;
        u.reserve(d);
        for (int p = 0; p < d; ++p)
            u.emplace_back(problem.u0(p), static_cast<std::size_t>(L));
        if (problem.order == 2)
            for (int p = 0; p < d; ++p) u[p].coeff(1) = problem.du0(p);

        if (problem.order == 1) {
            for (int j = 0; j + 1 <= L; ++j) {
                const std::vector<Jet> fj = problem.jet_f(u, {});
                for (int p = 0; p < d; ++p)
                    u[p].coeff(j + 1) = fj[p].coeff(j) / static_cast<double>(j + 1);
            }
        } else {
            for (int j = 0; j + 2 <= L; ++j) {
                std::vector<Jet> du;
                du.reserve(d);
                for (int p = 0; p < d; ++p) du.push_back(u[p].time_derivative());
                const std::vector<Jet> fj = problem.jet_f(u, du);
                for (int p = 0; p < d; ++p)
                    u[p].coeff(j + 2) =
                        fj[p].coeff(j) / static_cast<double>((j + 1) * (j + 2));
            }
        }
        for (int i = 0; i <= L; ++i)
            for (int p = 0; p < d; ++p)
                flat(i * d + p) = u[p].derivative(i);
    } else if (problem.init_stack && problem.init_stack->rows() >= L + 1 &&
               problem.init_stack->cols() == d) {
        for (int i = 0; i <= L; ++i)
            flat.segment(i * d, d) = problem.init_stack->row(i).transpose();
    } else {
        throw std::runtime_error(
            "taylor_init: problem supplies neither a jet-compatible field nor "
            "a derivative stack of sufficient order");
    }

    return GaussianState::dirac(stack.scatter(flat));
}

}  // namespace probode
