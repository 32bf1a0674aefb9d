#include <doctest.h>

#include <cmath>
#include <random>

#include "probode/prior.hpp"

using namespace probode;

namespace {

ODEProblem logistic_problem()
{
    ODEProblem p;
    p.dim = 1;
    p.order = 1;
    p.t0 = 0.0;
    p.t_end = 10.0;
    p.u0 = Vector::Constant(1, 0.5);
    p.f = [](const Vector& u, const Vector&) {
        return Vector::Constant(1, u(0) * (1.0 - u(0))).eval();
    };
    p.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        return std::vector<Jet>{u[0] * (1.0 - u[0])};
    };
    return p;
}

}  // namespace

TEST_CASE("iwp_transition: closed form at L = 1, dt = 1")
{
    const auto [phi, sigma_sqrt] = iwp_transition(1, 1.0);
    Matrix phi_ref(2, 2);
    phi_ref << 1.0, 1.0, 0.0, 1.0;
    CHECK((phi - phi_ref).norm() < 1e-14);

    Matrix sigma_ref(2, 2);
    sigma_ref << 1.0 / 3.0, 0.5, 0.5, 1.0;
    CHECK((sigma_sqrt * sigma_sqrt.transpose() - sigma_ref).norm() < 1e-14);
}

TEST_CASE("iwp_transition: vanishing step limit")
{
    for (int L : {1, 2, 4}) {
        const auto [phi, sigma_sqrt] = iwp_transition(L, 1e-10);
        CHECK((phi - Matrix::Identity(L + 1, L + 1)).norm() < 1e-9);
        CHECK((sigma_sqrt * sigma_sqrt.transpose()).norm() < 1e-9);
    }
}

TEST_CASE("iwp_transition: L = 2, dt = 0.5 spot values")
{
    const auto [phi, sigma_sqrt] = iwp_transition(2, 0.5);
    CHECK(phi(0, 2) == doctest::Approx(0.125));
    const Matrix sigma = sigma_sqrt * sigma_sqrt.transpose();
    CHECK(sigma(2, 2) == doctest::Approx(0.5));
}

TEST_CASE("iwp_transition rejects non-positive steps")
{
    CHECK_THROWS_AS(iwp_transition(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(iwp_transition(1, -1.0), std::invalid_argument);
}

TEST_CASE("transition semigroup property at random steps")
{
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    std::uniform_int_distribution<int> ell(1, 5);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = ell(gen);
        const double dt1 = u(gen);
        const double dt2 = u(gen);
        TransitionModel model(L);
        const Matrix phi1 = model.phi(dt1);
        const Matrix phi2 = model.phi(dt2);
        const Matrix phi12 = model.phi(dt1 + dt2);
        CHECK((phi12 - phi1 * phi2).norm() < 1e-10 * (1.0 + phi12.norm()));

        const Matrix s1 = model.sigma_sqrt(dt1) * model.sigma_sqrt(dt1).transpose();
        const Matrix s2 = model.sigma_sqrt(dt2) * model.sigma_sqrt(dt2).transpose();
        const Matrix s12 =
            model.sigma_sqrt(dt1 + dt2) * model.sigma_sqrt(dt1 + dt2).transpose();
        const Matrix chained = phi2 * s1 * phi2.transpose() + s2;
        CHECK((s12 - chained).norm() < 1e-10 * (1.0 + s12.norm()));
    }
}

TEST_CASE("precondition: worked diagonal values")
{
    const Vector t1 = precondition(1, 1.0);
    CHECK(t1(0) == doctest::Approx(1.0));
    CHECK(t1(1) == doctest::Approx(1.0));

    const Vector t4 = precondition(1, 4.0);
    CHECK(t4(0) == doctest::Approx(8.0));
    CHECK(t4(1) == doctest::Approx(2.0));
}

TEST_CASE("preconditioned noise is step-size independent")
{
    TransitionModel model(3);
    const Matrix ref = model.sigma_sqrt_precond * model.sigma_sqrt_precond.transpose();
    for (double dt : {1e-6, 1e-3, 1.0}) {
        const Vector t = precondition(3, dt);
        const Matrix sigma = model.sigma_sqrt(dt) * model.sigma_sqrt(dt).transpose();
        const Matrix back = t.cwiseInverse().asDiagonal() * sigma *
                            t.cwiseInverse().asDiagonal();
        CHECK((back - ref).norm() < 1e-12);
    }
}

TEST_CASE("transition reproduces polynomial derivative stacks exactly")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int L : {1, 2, 3, 4}) {
        Vector coeffs(L + 1);
        for (int i = 0; i <= L; ++i) coeffs(i) = u(gen);
        auto stack_at = [&](double t) {
            Vector s = Vector::Zero(L + 1);
            // k-th derivative of sum_i coeffs_i t^i.
            for (int k = 0; k <= L; ++k)
                for (int i = k; i <= L; ++i) {
                    double fall = 1.0;
                    for (int j = 0; j < k; ++j) fall *= static_cast<double>(i - j);
                    s(k) += coeffs(i) * fall * std::pow(t, i - k);
                }
            return s;
        };
        const double t0 = 0.3, dt = 0.7;
        const auto [phi, sigma_sqrt] = iwp_transition(L, dt);
        (void)sigma_sqrt;
        const Vector moved = phi * stack_at(t0);
        CHECK((moved - stack_at(t0 + dt)).norm() < 1e-12);
    }
}

TEST_CASE("taylor_init: logistic stack to second order")
{
    StateStack stack{2, 1, Factorization::dense};
    const GaussianState init = taylor_init(logistic_problem(), stack);
    CHECK(init.mean(0, 0) == doctest::Approx(0.5));
    CHECK(init.mean(1, 0) == doctest::Approx(0.25));
    CHECK(init.mean(2, 0) == doctest::Approx(0.0));
    CHECK(init.cov_sqrt.norm() == 0.0);
}

TEST_CASE("taylor_init: exponential growth derivatives")
{
    ODEProblem p;
    p.dim = 1;
    p.order = 1;
    p.t0 = 0.0;
    p.t_end = 1.0;
    p.u0 = Vector::Constant(1, 1.0);
    p.f = [](const Vector& u, const Vector&) { return (2.0 * u).eval(); };
    p.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        return std::vector<Jet>{u[0] * 2.0};
    };
    StateStack stack{3, 1, Factorization::dense};
    const GaussianState init = taylor_init(p, stack);
    for (int k = 0; k <= 3; ++k)
        CHECK(init.mean(k, 0) == doctest::Approx(std::pow(2.0, k)));
}

TEST_CASE("taylor_init: rigid-body first derivative block")
{
    ODEProblem p;
    p.dim = 3;
    p.order = 1;
    p.t0 = 0.0;
    p.t_end = 50.0;
    p.u0 = (Vector(3) << 1.0, 0.0, 0.9).finished();
    p.f = [](const Vector& u, const Vector&) {
        return (Vector(3) << -2.0 * u(1) * u(2), 1.25 * u(0) * u(2),
                -0.5 * u(0) * u(1))
            .finished();
    };
    p.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        return std::vector<Jet>{-2.0 * (u[1] * u[2]), 1.25 * (u[0] * u[2]),
                                -0.5 * (u[0] * u[1])};
    };
    StateStack stack{1, 3, Factorization::dense};
    const GaussianState init = taylor_init(p, stack);
    CHECK(init.mean(3, 0) == doctest::Approx(0.0));
    CHECK(init.mean(4, 0) == doctest::Approx(1.125));
    CHECK(init.mean(5, 0) == doctest::Approx(0.0));
}

TEST_CASE("taylor_init agrees with divided differences of the closed form")
{
    // Logistic closed form 1/(1 + e^{-t}); derivatives at t = 0 by central
    // differences are an oracle independent of the jet recursion.
    StateStack stack{3, 1, Factorization::dense};
    const GaussianState init = taylor_init(logistic_problem(), stack);

    auto closed = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    const double h = 1e-3;
    const double d1 = (closed(h) - closed(-h)) / (2.0 * h);
    const double d2 = (closed(h) - 2.0 * closed(0.0) + closed(-h)) / (h * h);
    const double d3 =
        (closed(2.0 * h) - 2.0 * closed(h) + 2.0 * closed(-h) - closed(-2.0 * h)) /
        (2.0 * h * h * h);
    CHECK(init.mean(1, 0) == doctest::Approx(d1).epsilon(1e-5));
    CHECK(init.mean(2, 0) == doctest::Approx(d2).epsilon(1e-4));
    CHECK(std::abs(init.mean(3, 0) - d3) < 1e-3);
}

TEST_CASE("taylor_init falls back to a user stack and errors without one")
{
    ODEProblem p;
    p.dim = 1;
    p.order = 1;
    p.t0 = 0.0;
    p.t_end = 1.0;
    p.u0 = Vector::Constant(1, 2.0);
    p.f = [](const Vector& u, const Vector&) { return u; };
    StateStack stack{2, 1, Factorization::dense};
    CHECK_THROWS_AS(taylor_init(p, stack), std::runtime_error);

    Matrix user(3, 1);
    user << 2.0, 2.0, 2.0;
    p.init_stack = user;
    const GaussianState init = taylor_init(p, stack);
    CHECK(init.mean(2, 0) == doctest::Approx(2.0));
}

TEST_CASE("isotropic layout round-trips")
{
    StateStack stack{3, 5, Factorization::isotropic};
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector flat(stack.flat_dim());
    for (int i = 0; i < flat.size(); ++i) flat(i) = u(gen);
    CHECK((stack.gather(stack.scatter(flat)) - flat).norm() == 0.0);

    Matrix rep(stack.rep_dim(), stack.rep_width());
    for (int i = 0; i < rep.rows(); ++i)
        for (int j = 0; j < rep.cols(); ++j) rep(i, j) = u(gen);
    CHECK((stack.scatter(stack.gather(rep)) - rep).norm() == 0.0);
}

TEST_CASE("isotropic projections select derivative rows")
{
    StateStack stack{2, 4, Factorization::isotropic};
    const Matrix e1 = stack.projection(1);
    CHECK(e1.rows() == 1);
    CHECK(e1(0, 1) == 1.0);

    StateStack dense{2, 4, Factorization::dense};
    const Matrix e2 = dense.projection(2);
    CHECK(e2.rows() == 4);
    CHECK(e2(0, 8) == 1.0);
}
