#include <doctest.h>

#include <cmath>
#include <random>

#include "probode/problems.hpp"
#include "probode/rk.hpp"

using namespace probode;

namespace {

std::mt19937_64 rng(555);

Vector random_state(int d, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    return v;
}

// Central finite differences of f with respect to u.
Matrix fd_jacobian(const ODEProblem& p, const Vector& u, const Vector& du)
{
    const double h = 1e-6;
    Matrix j(p.dim, p.dim);
    for (int c = 0; c < p.dim; ++c) {
        Vector up = u, um = u;
        up(c) += h;
        um(c) -= h;
        j.col(c) = (p.f(up, du) - p.f(um, du)) / (2.0 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("logistic: fixed points and closed-form reference")
{
    const BenchmarkProblem bp = logistic();
    CHECK(bp.ode.f(Vector::Constant(1, 0.5), {})(0) == doctest::Approx(0.25));
    CHECK(bp.ode.f(Vector::Zero(1), {})(0) == doctest::Approx(0.0));
    CHECK(bp.ode.f(Vector::Ones(1), {})(0) == doctest::Approx(0.0));
    CHECK(bp.reference.closed_form(10.0)(0) ==
          doctest::Approx(0.9999546).epsilon(1e-6));
}

TEST_CASE("van der Pol: field values from the stiff parametrization")
{
    const BenchmarkProblem bp = van_der_pol();
    auto f = [&](double u, double du) {
        return bp.ode.f(Vector::Constant(1, u), Vector::Constant(1, du))(0);
    };
    CHECK(f(2.0, 0.0) == doctest::Approx(-2000.0));
    CHECK(f(0.0, 1.0) == doctest::Approx(1000.0));
    CHECK(f(1.0, 5.0) == doctest::Approx(-1000.0));
    CHECK(bp.ode.t_end == doctest::Approx(6.3));
}

TEST_CASE("rigid body: evaluations and Jacobian consistency")
{
    const BenchmarkProblem bp = rigid_body();
    const Vector f0 = bp.ode.f(bp.ode.u0, {});
    CHECK(f0(0) == doctest::Approx(0.0));
    CHECK(f0(1) == doctest::Approx(1.125));
    CHECK(f0(2) == doctest::Approx(0.0));
    CHECK(bp.ode.f(Vector::Zero(3), {}).norm() == 0.0);
    const Vector ones = Vector::Ones(3);
    const Vector f1 = bp.ode.f(ones, {});
    CHECK(f1(0) == doctest::Approx(-2.0));
    CHECK(f1(1) == doctest::Approx(1.25));
    CHECK(f1(2) == doctest::Approx(-0.5));

    for (int trial = 0; trial < 10; ++trial) {
        const Vector u = random_state(3);
        CHECK((bp.ode.jac_u(u, {}) - fd_jacobian(bp.ode, u, {})).norm() < 1e-7);
    }
}

TEST_CASE("brusselator: dimensions, steady reaction, and boundaries")
{
    CHECK_THROWS_AS(brusselator(1), std::invalid_argument);
    for (int d : {2, 4, 8, 16}) {
        const BenchmarkProblem bp = brusselator(d);
        CHECK(bp.ode.dim == 2 * d);
    }

    const BenchmarkProblem bp = brusselator(5);
    // Initial profile: u(x) = 1 + sin(2 pi x) with x_1 = 0.25.
    CHECK(bp.ode.u0(1) == doctest::Approx(2.0));
    CHECK(bp.ode.u0(5 + 2) == doctest::Approx(3.0));

    // The homogeneous state (1, 3) zeroes the reaction terms; a linear
    // profile zeroes the centred-difference Laplacian, so the interior
    // field reduces to the reaction part.
    Vector homogeneous(10);
    homogeneous.head(5).setConstant(1.0);
    homogeneous.tail(5).setConstant(3.0);
    CHECK(bp.ode.f(homogeneous, {}).norm() < 1e-13);

    Vector linear_profile(10);
    for (int p = 0; p < 5; ++p) {
        linear_profile(p) = 0.3 + 0.1 * p;
        linear_profile(5 + p) = 2.0 - 0.05 * p;
    }
    const Vector fval = bp.ode.f(linear_profile, {});
    for (int p = 1; p < 4; ++p) {
        const double u = linear_profile(p);
        const double v = linear_profile(5 + p);
        CHECK(fval(p) == doctest::Approx(1.0 + u * u * v - 4.0 * u));
        CHECK(fval(5 + p) == doctest::Approx(3.0 * u - u * u * v));
    }
    // Frozen Dirichlet end nodes.
    CHECK(fval(0) == 0.0);
    CHECK(fval(4) == 0.0);

    for (int trial = 0; trial < 5; ++trial) {
        const Vector u = random_state(10, 0.5, 3.0);
        CHECK((bp.ode.jac_u(u, {}) - fd_jacobian(bp.ode, u, {})).norm() < 1e-5);
    }
}

TEST_CASE("pleiades: Newton's third law and pairwise-force oracle")
{
    const BenchmarkProblem bp = pleiades();
    const Vector acc = bp.ode.f(bp.ode.u0, bp.ode.du0);

    // Total momentum flux with masses m_i = i vanishes.
    double px = 0.0, py = 0.0;
    for (int i = 0; i < 7; ++i) {
        px += (i + 1) * acc(i);
        py += (i + 1) * acc(7 + i);
    }
    CHECK(std::abs(px) < 1e-12);
    CHECK(std::abs(py) < 1e-12);

    // Star 1 against an independent pairwise sum.
    double ax = 0.0, ay = 0.0;
    for (int j = 1; j < 7; ++j) {
        const double dx = bp.ode.u0(j) - bp.ode.u0(0);
        const double dy = bp.ode.u0(7 + j) - bp.ode.u0(7);
        const double r = std::sqrt(dx * dx + dy * dy);
        ax += (j + 1) * dx / (r * r * r);
        ay += (j + 1) * dy / (r * r * r);
    }
    CHECK(acc(0) == doctest::Approx(ax).epsilon(1e-12));
    CHECK(acc(7) == doctest::Approx(ay).epsilon(1e-12));

    // Swapping two equal-mass stars is impossible (masses differ), but the
    // force on a star from a partner mirrors under exchanging positions.
    Vector u = bp.ode.u0;
    std::swap(u(0), u(1));
    std::swap(u(7), u(8));
    const Vector acc_swapped = bp.ode.f(u, bp.ode.du0);
    // Star 1 now sits where star 2 sat; the geometric part of the field at
    // that location is unchanged up to the mass weights.
    CHECK(std::isfinite(acc_swapped(0)));
}

TEST_CASE("three-body: finite field, Jacobi constant, and periodicity")
{
    const BenchmarkProblem bp = three_body();
    const Vector f0 = bp.ode.f(bp.ode.u0, bp.ode.du0);
    CHECK(f0.allFinite());

    // High-accuracy reference over one period.
    const FirstOrderSystem sys = to_first_order(bp.ode);
    Vector y0(4);
    y0 << bp.ode.u0, bp.ode.du0;
    std::vector<double> eval;
    for (int i = 1; i <= 20; ++i) eval.push_back(bp.ode.t_end * i / 20.0);
    RKOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-16;
    const RKResult res = rk_solve_at(sys, RKMethod::tsit5, 0.0, y0, eval, opt);
    REQUIRE_FALSE(res.diverged);

    const double c0 = jacobi_constant(bp.ode.u0, bp.ode.du0);
    for (int i = 0; i < res.states.rows(); ++i) {
        const Vector u = res.states.row(i).head(2).transpose();
        const Vector du = res.states.row(i).tail(2).transpose();
        CHECK(std::abs(jacobi_constant(u, du) - c0) < 1e-8 * std::abs(c0));
    }
    // The orbit closes after one period.
    CHECK((res.states.bottomRows(1).transpose() - y0).norm() < 1e-3);
}

TEST_CASE("problem_by_name round trip")
{
    CHECK(problem_by_name("logistic").name == "logistic");
    CHECK(problem_by_name("van-der-pol").ode.order == 2);
    CHECK(problem_by_name("brusselator-8").ode.dim == 16);
    CHECK_THROWS_AS(problem_by_name("nope"), std::invalid_argument);
}

TEST_CASE("jet initialization is consistent for the second-order problems")
{
    // Deep Taylor stacks stay finite and reproduce f at the stated start.
    for (const BenchmarkProblem& bp : {van_der_pol(), pleiades(), three_body()}) {
        StateStack stack{4, bp.ode.dim, Factorization::isotropic};
        const GaussianState init = taylor_init(bp.ode, stack);
        CHECK(init.mean.allFinite());
        const Vector u_row = stack.derivative_block(init.mean, 0);
        const Vector du_row = stack.derivative_block(init.mean, 1);
        const Vector ddu_row = stack.derivative_block(init.mean, 2);
        CHECK((u_row - bp.ode.u0).norm() < 1e-12);
        CHECK((du_row - bp.ode.du0).norm() < 1e-12);
        CHECK((ddu_row - bp.ode.f(bp.ode.u0, bp.ode.du0)).norm() < 1e-10);
    }
}
