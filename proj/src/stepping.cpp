#include "probode/stepping.hpp"

#include <algorithm>
#include <cmath>

namespace probode {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

GaussianState scale_rows(const GaussianState& g, const Vector& diag)
{
    return GaussianState(diag.asDiagonal() * g.mean,
                         diag.asDiagonal() * g.cov_sqrt);
}

// Conditional in preconditioned coordinates -> physical coordinates.
AffineConditional unprecondition(const AffineConditional& c, const Vector& t)
{
    const Vector inv = t.cwiseInverse();
    return AffineConditional{
        t.asDiagonal() * c.linear * inv.asDiagonal(),
        t.asDiagonal() * c.offset,
        t.asDiagonal() * c.noise_sqrt};
}

}  // namespace

void SolverConfig::validate() const
{
    if (num_derivatives < 1)
        throw std::invalid_argument("SolverConfig: num_derivatives must be >= 1");
    if (abs_tol <= 0.0 || rel_tol <= 0.0)
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (!(min_factor < 1.0 && 1.0 < max_factor))
        throw std::invalid_argument("SolverConfig: need min_factor < 1 < max_factor");
    if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("SolverConfig: safety must lie in (0, 1]");
}

double pi_control(double error, double dt, double prev_error,
                  const SolverConfig& config)
{
    if (error < 0.0) throw std::invalid_argument("pi_control: negative error");
    if (error == 0.0) return dt * config.max_factor;
    const double prev = prev_error > 0.0 ? prev_error : 1.0;
    double factor = config.safety * std::pow(error, -config.resolved_alpha()) *
                    std::pow(prev, config.resolved_beta());
    factor = std::clamp(factor, config.min_factor, config.max_factor);
    return dt * factor;
}

double innovation_scale(const GaussianState& innovation, int* rank_deficiency)
{
    const Matrix whitened = solve_lower_pseudo(innovation.cov_sqrt,
                                               innovation.mean, rank_deficiency);
    return whitened.squaredNorm() /
           static_cast<double>(innovation.mean.size());
}

Stepper::Stepper(ODEProblem problem, SolverConfig config)
    : problem_(std::move(problem)),
      config_(config),
      model_(config.num_derivatives)
{
    problem_.validate();
    config_.validate();
    if (config_.num_derivatives < problem_.order)
        throw std::invalid_argument("Stepper: need num_derivatives >= ODE order");
    if (config_.linearization == Linearization::ek1 &&
        config_.factorization != Factorization::dense)
        throw std::runtime_error(
            "Stepper: first-order linearization requires the dense factorization");
    stack_ = StateStack{config_.num_derivatives, problem_.dim,
                        config_.factorization};
    phi_lifted_ = stack_.lift(model_.phi_precond);
    sigma_sqrt_lifted_ = stack_.lift(model_.sigma_sqrt_precond);
}

GaussianState Stepper::initial_state() const
{
    GaussianState init = taylor_init(problem_, stack_);
    const ResidualModel rm =
        linearize(config_.linearization, problem_, stack_, init.mean);
    return condition_affine(init, rm.h, rm.offset).posterior;
}

double Stepper::initial_dt() const
{
    if (config_.initial_dt > 0.0) return config_.initial_dt;

    // First-order system view: y = u (order 1) or y = (u, u') (order 2).
    const int d = problem_.dim;
    const int sys = problem_.order * d;
    Vector y0(sys);
    y0.head(d) = problem_.u0;
    if (problem_.order == 2) y0.tail(d) = problem_.du0;
    auto sys_field = [&](const Vector& y) {
        Vector out(sys);
        if (problem_.order == 1) {
            out = problem_.f(y, Vector());
        } else {
            out.head(d) = y.tail(d);
            out.tail(d) = problem_.f(y.head(d), y.tail(d));
        }
        return out;
    };
    const Vector f0 = sys_field(y0);
    const Vector w =
        (config_.abs_tol + config_.rel_tol * y0.cwiseAbs().array()).matrix();
    auto wrms = [&](const Vector& v) {
        return std::sqrt((v.array() / w.array()).square().mean());
    };

    const double span = problem_.t_end - problem_.t0;
    const double d0 = wrms(y0);
    const double d1 = wrms(f0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    const Vector f1 = sys_field(y0 + h0 * f0);
    const double d2 = wrms(f1 - f0) / h0;
    const double p = static_cast<double>(config_.num_derivatives + 1);
    double h1;
    if (std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / p);
    }
    return std::min({100.0 * h0, h1, span});
}

std::pair<GaussianState, AffineConditional> Stepper::predict(
    const GaussianState& g, double dt, double scale) const
{
    if (dt <= 0.0) throw std::invalid_argument("predict: dt must be positive");
    const Vector t = stack_.lift_diag(precondition(config_.num_derivatives, dt));
    const GaussianState g_bar = scale_rows(g, t.cwiseInverse());
    const Matrix no_shift = Matrix::Zero(g.dim(), g.width());
    const Matrix noise = std::sqrt(scale) * sigma_sqrt_lifted_;
    Reversal rev = reverse_marginalize(g_bar, phi_lifted_, no_shift, noise);
    return {scale_rows(rev.marginal, t), unprecondition(rev.backward, t)};
}

StepOutcome Stepper::attempt_step(const GaussianState& g, double t, double dt,
                                  double prev_error) const
{
    return step_core(g, t, dt, prev_error, true);
}

StepOutcome Stepper::forced_step(const GaussianState& g, double t,
                                 double dt) const
{
    return step_core(g, t, dt, 1.0, false);
}

StepOutcome Stepper::step_core(const GaussianState& g, double t, double dt,
                               double prev_error, bool adaptive) const
{
    if (dt <= 0.0) throw std::invalid_argument("attempt_step: dt must be positive");
    if (!all_finite(g.mean)) throw StepDivergedError(t, dt);

    const Vector tp = stack_.lift_diag(precondition(config_.num_derivatives, dt));
    const GaussianState g_bar = scale_rows(g, tp.cwiseInverse());
    const Matrix no_shift = Matrix::Zero(g.dim(), g.width());

    // Mean-only prediction fixes the linearization point; covariances are
    // only propagated once the step is accepted.
    const Matrix pred_mean =
        tp.asDiagonal() * (phi_lifted_ * g_bar.mean);
    if (!all_finite(pred_mean)) throw StepDivergedError(t, dt);

    const ResidualModel rm =
        linearize(config_.linearization, problem_, stack_, pred_mean);
    if (!all_finite(rm.offset) || !all_finite(rm.h)) throw StepDivergedError(t, dt);

    // Residual whitened by the observed process noise of this step: the
    // local error estimate, with the quasi-MLE output scale as calibration.
    const Matrix zhat = rm.h * pred_mean + rm.offset;
    const Matrix h_noise =
        rm.h * (tp.asDiagonal() * sigma_sqrt_lifted_);
    const Matrix obs_noise_sqrt = triangularize(h_noise.transpose());
    const auto k = zhat.rows();
    const auto w = zhat.cols();

    int deficiency = 0;
    const double sigma2 =
        innovation_scale(GaussianState(zhat, obs_noise_sqrt), &deficiency);
    const double sigma = std::sqrt(sigma2);

    const Vector u_pred = stack_.derivative_block(pred_mean, 0);
    double sq_sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double err_i = sigma * h_noise.row(i).norm();
        for (Eigen::Index p = 0; p < w; ++p) {
            const Eigen::Index coord = (w == 1) ? i : p;
            const double tol_scale =
                config_.abs_tol + config_.rel_tol * std::abs(u_pred(coord));
            const double ratio = err_i / tol_scale;
            sq_sum += ratio * ratio;
        }
    }
    const double error = std::sqrt(sq_sum / static_cast<double>(k * w));
    if (!std::isfinite(error)) throw StepDivergedError(t, dt);

    StepOutcome out;
    out.error = error;
    out.dt_used = dt;
    out.scale = sigma2;
    out.rank_deficiency = deficiency;
    out.accepted = !adaptive || error <= 1.0;
    out.dt_next = pi_control(error, dt, prev_error, config_);

    if (out.accepted) {
        const double noise_scale =
            config_.calibration == Calibration::time_varying ? sigma : 1.0;
        Reversal rev = reverse_marginalize(g_bar, phi_lifted_, no_shift,
                                           noise_scale * sigma_sqrt_lifted_);
        const GaussianState pred = scale_rows(rev.marginal, tp);
        Conditioned cond = condition_affine(pred, rm.h, rm.offset);
        out.new_marginal = std::move(cond.posterior);
        out.backward = unprecondition(rev.backward, tp);
        out.rank_deficiency += cond.rank_deficiency;
        if (!all_finite(out.new_marginal->mean)) throw StepDivergedError(t, dt);
    }
    return out;
}

}  // namespace probode
