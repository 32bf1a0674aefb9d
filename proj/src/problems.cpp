#include "probode/problems.hpp"

#include <cmath>
#include <numbers>

namespace probode {

namespace {

constexpr double kThreeBodyMu = 0.012277471;

}  // namespace

BenchmarkProblem logistic()
{
    BenchmarkProblem bp;
    bp.name = "logistic";
    bp.ode.dim = 1;
    bp.ode.order = 1;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 10.0;
    bp.ode.u0 = Vector::Constant(1, 0.5);
    bp.ode.f = [](const Vector& u, const Vector&) {
        return Vector::Constant(1, u(0) * (1.0 - u(0))).eval();
    };
    bp.ode.jac_u = [](const Vector& u, const Vector&) {
        return Matrix::Constant(1, 1, 1.0 - 2.0 * u(0)).eval();
    };
    bp.ode.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        return std::vector<Jet>{u[0] * (1.0 - u[0])};
    };
    bp.recommended.num_derivatives = 3;
    bp.recommended.linearization = Linearization::ek1;
    bp.recommended.factorization = Factorization::dense;
    bp.recommended.rel_tol = 1e-6;
    bp.recommended.abs_tol = 1e-9;
    bp.reference.kind = ReferencePolicy::Kind::closed_form;
    bp.reference.closed_form = [](double t) {
        return Vector::Constant(1, 1.0 / (1.0 + std::exp(-t))).eval();
    };
    return bp;
}

BenchmarkProblem van_der_pol()
{
    constexpr double mu = 1e3;
    BenchmarkProblem bp;
    bp.name = "van-der-pol";
    bp.ode.dim = 1;
    bp.ode.order = 2;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 6.3;
    bp.ode.u0 = Vector::Constant(1, 2.0);
    bp.ode.du0 = Vector::Zero(1);
    bp.ode.f = [](const Vector& u, const Vector& du) {
        return Vector::Constant(1, mu * (du(0) * (1.0 - u(0) * u(0)) - u(0)))
            .eval();
    };
    bp.ode.jac_u = [](const Vector& u, const Vector& du) {
        return Matrix::Constant(1, 1, mu * (-2.0 * u(0) * du(0) - 1.0)).eval();
    };
    bp.ode.jac_du = [](const Vector& u, const Vector&) {
        return Matrix::Constant(1, 1, mu * (1.0 - u(0) * u(0))).eval();
    };
    bp.ode.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>& du) {
        return std::vector<Jet>{(du[0] * (1.0 - u[0] * u[0]) - u[0]) * mu};
    };
    bp.recommended.num_derivatives = 4;
    bp.recommended.linearization = Linearization::ek1;
    bp.recommended.factorization = Factorization::dense;
    bp.recommended.rel_tol = 1e-3;
    bp.recommended.abs_tol = 1e-3;  // this benchmark uses equal tolerances
    bp.reference.rk_tolerance = 1e-10;
    return bp;
}

BenchmarkProblem rigid_body()
{
    BenchmarkProblem bp;
    bp.name = "rigid-body";
    bp.ode.dim = 3;
    bp.ode.order = 1;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 50.0;
    bp.ode.u0 = (Vector(3) << 1.0, 0.0, 0.9).finished();
    bp.ode.f = [](const Vector& u, const Vector&) {
        return (Vector(3) << -2.0 * u(1) * u(2), 1.25 * u(0) * u(2),
                -0.5 * u(0) * u(1))
            .finished();
    };
    bp.ode.jac_u = [](const Vector& u, const Vector&) {
        Matrix j(3, 3);
        j << 0.0, -2.0 * u(2), -2.0 * u(1),
             1.25 * u(2), 0.0, 1.25 * u(0),
             -0.5 * u(1), -0.5 * u(0), 0.0;
        return j;
    };
    bp.ode.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        return std::vector<Jet>{-2.0 * (u[1] * u[2]), 1.25 * (u[0] * u[2]),
                                -0.5 * (u[0] * u[1])};
    };
    bp.recommended.num_derivatives = 4;
    bp.recommended.linearization = Linearization::ek0;
    bp.recommended.factorization = Factorization::isotropic;
    bp.recommended.rel_tol = 1e-6;
    bp.recommended.abs_tol = 1e-9;
    bp.reference.rk_tolerance = 1e-13;
    return bp;
}

BenchmarkProblem brusselator(int d_points)
{
    if (d_points < 2)
        throw std::invalid_argument("brusselator: need at least two grid points");

    const int d = d_points;
    const double dx = 1.0 / static_cast<double>(d - 1);
    const double alpha = 1.0 / 50.0;
    const double diffusion = alpha / (dx * dx);

    BenchmarkProblem bp;
    bp.name = "brusselator-" + std::to_string(d);
    bp.ode.dim = 2 * d;
    bp.ode.order = 1;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 10.0;
    bp.ode.u0 = Vector::Zero(2 * d);
    for (int p = 0; p < d; ++p) {
        const double x = p * dx;
        bp.ode.u0(p) = 1.0 + std::sin(2.0 * std::numbers::pi * x);
        bp.ode.u0(d + p) = 3.0;
    }

    // Dirichlet boundaries: the two end nodes stay at their initial values.
    bp.ode.f = [d, diffusion](const Vector& state, const Vector&) {
        Vector out = Vector::Zero(2 * d);
        for (int p = 1; p + 1 < d; ++p) {
            const double u = state(p);
            const double v = state(d + p);
            const double lap_u = state(p - 1) - 2.0 * u + state(p + 1);
            const double lap_v = state(d + p - 1) - 2.0 * v + state(d + p + 1);
            out(p) = 1.0 + u * u * v - 4.0 * u + diffusion * lap_u;
            out(d + p) = 3.0 * u - u * u * v + diffusion * lap_v;
        }
        return out;
    };
    bp.ode.jac_u = [d, diffusion](const Vector& state, const Vector&) {
        Matrix j = Matrix::Zero(2 * d, 2 * d);
        for (int p = 1; p + 1 < d; ++p) {
            const double u = state(p);
            const double v = state(d + p);
            j(p, p) = 2.0 * u * v - 4.0 - 2.0 * diffusion;
            j(p, p - 1) = diffusion;
            j(p, p + 1) = diffusion;
            j(p, d + p) = u * u;
            j(d + p, p) = 3.0 - 2.0 * u * v;
            j(d + p, d + p) = -u * u - 2.0 * diffusion;
            j(d + p, d + p - 1) = diffusion;
            j(d + p, d + p + 1) = diffusion;
        }
        return j;
    };
    bp.ode.jet_f = [d, diffusion](const std::vector<Jet>& state,
                                  const std::vector<Jet>&) {
        const std::size_t order = state[0].order();
        std::vector<Jet> out(2 * d, Jet(0.0, order));
        for (int p = 1; p + 1 < d; ++p) {
            const Jet& u = state[p];
            const Jet& v = state[d + p];
            const Jet lap_u = state[p - 1] - 2.0 * u + state[p + 1];
            const Jet lap_v = state[d + p - 1] - 2.0 * v + state[d + p + 1];
            out[p] = 1.0 + u * u * v - 4.0 * u + diffusion * lap_u;
            out[d + p] = 3.0 * u - u * u * v + diffusion * lap_v;
        }
        return out;
    };
    bp.recommended.num_derivatives = 4;
    bp.recommended.linearization = Linearization::ek0;
    bp.recommended.factorization = Factorization::isotropic;
    bp.recommended.rel_tol = 1e-8;
    bp.recommended.abs_tol = 1e-11;
    bp.reference.rk_tolerance = 1e-11;
    return bp;
}

BenchmarkProblem pleiades()
{
    BenchmarkProblem bp;
    bp.name = "pleiades";
    bp.ode.dim = 14;
    bp.ode.order = 2;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 3.0;
    // Positions (x_1..x_7, y_1..y_7) and velocities; star i has mass i.
    bp.ode.u0 = (Vector(14) << 3.0, 3.0, -1.0, -3.0, 2.0, -2.0, 2.0,
                 3.0, -3.0, 2.0, 0.0, 0.0, -4.0, 4.0)
                    .finished();
    bp.ode.du0 = (Vector(14) << 0.0, 0.0, 0.0, 0.0, 0.0, 1.75, -1.5,
                  0.0, 0.0, 0.0, -1.25, 1.0, 0.0, 0.0)
                     .finished();
    bp.ode.f = [](const Vector& u, const Vector&) {
        Vector out = Vector::Zero(14);
        for (int i = 0; i < 7; ++i) {
            for (int j = 0; j < 7; ++j) {
                if (i == j) continue;
                const double dxij = u(j) - u(i);
                const double dyij = u(7 + j) - u(7 + i);
                const double r2 = dxij * dxij + dyij * dyij;
                const double inv = 1.0 / (r2 * std::sqrt(r2));
                const double mass = static_cast<double>(j + 1);
                out(i) += mass * dxij * inv;
                out(7 + i) += mass * dyij * inv;
            }
        }
        return out;
    };
    bp.ode.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>&) {
        const std::size_t order = u[0].order();
        std::vector<Jet> out(14, Jet(0.0, order));
        for (int i = 0; i < 7; ++i) {
            for (int j = 0; j < 7; ++j) {
                if (i == j) continue;
                const Jet dxij = u[j] - u[i];
                const Jet dyij = u[7 + j] - u[7 + i];
                const Jet r2 = dxij * dxij + dyij * dyij;
                const Jet denom = r2 * sqrt(r2);
                const double mass = static_cast<double>(j + 1);
                out[i] = out[i] + mass * (dxij / denom);
                out[7 + i] = out[7 + i] + mass * (dyij / denom);
            }
        }
        return out;
    };
    bp.recommended.num_derivatives = 4;
    bp.recommended.linearization = Linearization::ek0;
    bp.recommended.factorization = Factorization::isotropic;
    bp.recommended.rel_tol = 1e-6;
    bp.recommended.abs_tol = 1e-9;
    bp.reference.rk_tolerance = 1e-13;
    return bp;
}

BenchmarkProblem three_body()
{
    constexpr double mu = kThreeBodyMu;
    constexpr double nu = 1.0 - kThreeBodyMu;

    BenchmarkProblem bp;
    bp.name = "three-body";
    bp.ode.dim = 2;
    bp.ode.order = 2;
    bp.ode.t0 = 0.0;
    bp.ode.t_end = 17.0652165601579625;  // one period of the orbit
    bp.ode.u0 = (Vector(2) << 0.994, 0.0).finished();
    bp.ode.du0 =
        (Vector(2) << 0.0, -2.00158510637908252240537862224).finished();
    bp.ode.f = [](const Vector& u, const Vector& du) {
        const double x = u(0), y = u(1);
        const double r1sq = (x + mu) * (x + mu) + y * y;
        const double r2sq = (x - nu) * (x - nu) + y * y;
        const double d1 = r1sq * std::sqrt(r1sq);
        const double d2 = r2sq * std::sqrt(r2sq);
        Vector out(2);
        out(0) = x + 2.0 * du(1) - nu * (x + mu) / d1 - mu * (x - nu) / d2;
        out(1) = y - 2.0 * du(0) - nu * y / d1 - mu * y / d2;
        return out;
    };
    bp.ode.jet_f = [](const std::vector<Jet>& u, const std::vector<Jet>& du) {
        const Jet& x = u[0];
        const Jet& y = u[1];
        const Jet r1sq = (x + mu) * (x + mu) + y * y;
        const Jet r2sq = (x - nu) * (x - nu) + y * y;
        const Jet d1 = r1sq * sqrt(r1sq);
        const Jet d2 = r2sq * sqrt(r2sq);
        return std::vector<Jet>{
            x + 2.0 * du[1] - nu * ((x + mu) / d1) - mu * ((x - nu) / d2),
            y - 2.0 * du[0] - nu * (y / d1) - mu * (y / d2)};
    };
    bp.recommended.num_derivatives = 4;
    bp.recommended.linearization = Linearization::ek0;
    bp.recommended.factorization = Factorization::isotropic;
    bp.recommended.rel_tol = 1e-7;
    bp.recommended.abs_tol = 1e-10;
    bp.reference.rk_tolerance = 1e-13;
    return bp;
}

double jacobi_constant(const Vector& u, const Vector& du)
{
    const double x = u(0), y = u(1);
    const double r1 = std::sqrt((x + kThreeBodyMu) * (x + kThreeBodyMu) + y * y);
    const double r2 = std::sqrt((x - (1.0 - kThreeBodyMu)) * (x - (1.0 - kThreeBodyMu)) + y * y);
    return x * x + y * y + 2.0 * (1.0 - kThreeBodyMu) / r1 +
           2.0 * kThreeBodyMu / r2 - du(0) * du(0) - du(1) * du(1);
}

BenchmarkProblem problem_by_name(const std::string& name)
{
    if (name == "logistic") return logistic();
    if (name == "van-der-pol") return van_der_pol();
    if (name == "rigid-body") return rigid_body();
    if (name == "pleiades") return pleiades();
    if (name == "three-body") return three_body();
    const std::string prefix = "brusselator-";
    if (name.rfind(prefix, 0) == 0) {
        const int d = std::stoi(name.substr(prefix.size()));
        return brusselator(d);
    }
    throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace probode
