#include "probode/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace probode {

void SolveStats::record_accept(double dt, int rank_deficiency)
{
    ++accepted;
    min_dt = std::min(min_dt, dt);
    max_dt = std::max(max_dt, dt);
    if (rank_deficiency > 0) ++singular_scale_steps;
}

namespace {

double bridge_scale(const Stepper& stepper, const FixedPointCarry& carry)
{
    return stepper.config().calibration == Calibration::time_varying
               ? carry.last_scale
               : 1.0;
}

}  // namespace

TwoTargetResult solve_two_targets(const Stepper& stepper, FixedPointCarry& carry,
                                  double b, SolveStats* stats)
{
    if (!(b > carry.a))
        throw std::invalid_argument("solve_two_targets: boundary must exceed carry.a");
    const double t_end = stepper.problem().t_end;
    if (b > t_end)
        throw std::invalid_argument("solve_two_targets: boundary beyond the time span");

    TwoTargetResult res;

    if (b < carry.t) {
        // No time-stepping needed: bridge a -> b -> t under the prior, with
        // the output scale of the step that created the interval.
        const double scale = bridge_scale(stepper, carry);
        auto [p_b, cond_a_given_b] = stepper.predict(carry.p_a, b - carry.a, scale);
        auto [unused, cond_b_given_t] = stepper.predict(p_b, carry.t - b, scale);
        (void)unused;
        res.left = {std::move(cond_a_given_b), p_b};
        res.right = {cond_b_given_t, carry.p_t};
        carry.a = b;
        carry.p_a = std::move(p_b);
        carry.accum = std::move(cond_b_given_t);
        res.dt = carry.dt;
        return res;
    }

    // Time-stepping. `acc` stays anchored at `t_prev`; `pending` is the not
    // yet merged conditional linking t_prev to the tip. All three slots are
    // overwritten in place each iteration.
    double t_prev = carry.t;
    GaussianState p_prev = carry.p_t;
    AffineConditional acc = carry.accum;
    AffineConditional pending = AffineConditional::identity(
        carry.p_t.dim(), carry.p_t.width());
    double t_tip = carry.t;
    GaussianState p_tip = carry.p_t;
    double dt = carry.dt;

    while (t_tip < b) {
        const double gap_to_end = t_end - t_tip;
        const double step_dt = std::min(dt, gap_to_end);
        if (!(step_dt > 1e-14 * std::max(1.0, std::abs(t_tip))))
            throw StepDivergedError(t_tip, step_dt);

        StepOutcome outcome =
            stepper.attempt_step(p_tip, t_tip, step_dt, carry.prev_error);
        if (outcome.accepted) {
            acc = merge_conditionals(acc, pending);
            t_prev = t_tip;
            p_prev = std::move(p_tip);
            pending = std::move(*outcome.backward);
            t_tip = (step_dt == gap_to_end) ? t_end : t_tip + step_dt;
            p_tip = std::move(*outcome.new_marginal);
            carry.prev_error = outcome.error;
            carry.last_scale = outcome.scale;
            if (stats) stats->record_accept(step_dt, outcome.rank_deficiency);
        } else {
            if (stats) ++stats->rejected;
        }
        dt = outcome.dt_next;
    }
    carry.dt = dt;

    if (t_tip == b) {
        // Landed exactly on the boundary (always the case at the domain
        // end): the tip marginal is the updated one, keep it.
        res.left = {merge_conditionals(acc, pending), p_tip};
        res.right = {AffineConditional::identity(p_tip.dim(), p_tip.width()),
                     p_tip};
        carry.a = b;
        carry.p_a = p_tip;
        carry.t = b;
        carry.p_t = std::move(p_tip);
        carry.accum = res.right.cond;
    } else {
        // Overshoot: bridge t_prev -> b -> tip inside the final step's
        // interval, using that step's output scale.
        const double scale = bridge_scale(stepper, carry);
        auto [p_b, cond_prev_given_b] = stepper.predict(p_prev, b - t_prev, scale);
        auto [unused, cond_b_given_tip] = stepper.predict(p_b, t_tip - b, scale);
        (void)unused;
        res.left = {merge_conditionals(acc, cond_prev_given_b), p_b};
        res.right = {cond_b_given_tip, p_tip};
        carry.a = b;
        carry.p_a = std::move(p_b);
        carry.t = t_tip;
        carry.p_t = std::move(p_tip);
        carry.accum = std::move(cond_b_given_tip);
    }
    res.dt = carry.dt;
    return res;
}

std::size_t TargetSolution::stored_floats() const
{
    std::size_t total = targets.size();
    total += float_count(initial_marginal) + float_count(terminal_marginal);
    for (const auto& c : conditionals) total += float_count(c);
    total += 5;  // stats scalars
    return total;
}

TargetSolution solve_targets(const ODEProblem& problem,
                             const std::vector<double>& targets,
                             const SolverConfig& config)
{
    if (targets.size() < 2)
        throw std::invalid_argument("solve_targets: need at least two targets");
    for (std::size_t i = 1; i < targets.size(); ++i)
        if (!(targets[i] > targets[i - 1]))
            throw std::invalid_argument("solve_targets: targets must be strictly increasing");
    if (targets.front() != problem.t0 || targets.back() != problem.t_end)
        throw std::invalid_argument(
            "solve_targets: target grid must span the problem's time domain "
            "(augment the grid with the endpoints first)");

    Stepper stepper(problem, config);
    const GaussianState init = stepper.initial_state();

    FixedPointCarry carry;
    carry.a = problem.t0;
    carry.p_a = init;
    carry.t = problem.t0;
    carry.p_t = init;
    carry.accum = AffineConditional::identity(init.dim(), init.width());
    carry.dt = stepper.initial_dt();

    TargetSolution sol;
    sol.targets = targets;
    sol.initial_marginal = init;
    sol.stack = stepper.stack();
    sol.conditionals.reserve(targets.size() - 1);

    for (std::size_t m = 1; m < targets.size(); ++m) {
        TwoTargetResult res =
            solve_two_targets(stepper, carry, targets[m], &sol.stats);
        sol.conditionals.push_back(std::move(res.left.cond));
        if (m + 1 == targets.size())
            sol.terminal_marginal = std::move(res.left.marginal);
    }
    return sol;
}

std::vector<GaussianState> marginals(const TargetSolution& sol)
{
    const std::size_t m = sol.num_targets();
    std::vector<GaussianState> out(m + 1);
    out[m] = sol.terminal_marginal;
    for (std::size_t i = m; i >= 1; --i)
        out[i - 1] = marginalize(sol.conditionals[i - 1], out[i]);
    return out;
}

std::vector<Matrix> sample_joint(const TargetSolution& sol, int num_samples,
                                 std::uint64_t seed)
{
    if (num_samples < 1)
        throw std::invalid_argument("sample_joint: need at least one sample");
    const std::size_t m = sol.num_targets();
    const int d = sol.stack.ode_dim;
    const Eigen::Index n = sol.terminal_marginal.dim();
    const Eigen::Index w = sol.terminal_marginal.width();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&]() {
        Matrix noise(n, w);
        for (Eigen::Index j = 0; j < w; ++j)
            for (Eigen::Index i = 0; i < n; ++i) noise(i, j) = normal(rng);
        return noise;
    };

    std::vector<Matrix> samples;
    samples.reserve(num_samples);
    for (int k = 0; k < num_samples; ++k) {
        Matrix traj(m + 1, d);
        Matrix state = sample(sol.terminal_marginal, draw());
        traj.row(m) = sol.stack.derivative_block(state, 0).transpose();
        for (std::size_t i = m; i >= 1; --i) {
            const AffineConditional& cond = sol.conditionals[i - 1];
            state = cond.linear * state + cond.offset + cond.noise_sqrt * draw();
            traj.row(i - 1) = sol.stack.derivative_block(state, 0).transpose();
        }
        samples.push_back(std::move(traj));
    }
    return samples;
}

}  // namespace probode
