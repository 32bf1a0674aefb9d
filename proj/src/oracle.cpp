#include "probode/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace probode {

std::size_t AdaptiveTrace::stored_floats() const
{
    std::size_t total = times.size() + scales.size();
    for (const auto& g : filtered) total += float_count(g);
    for (const auto& c : backwards) total += float_count(c);
    return total;
}

AdaptiveTrace adaptive_simulate(const Stepper& stepper)
{
    const double t_end = stepper.problem().t_end;
    AdaptiveTrace trace;

    GaussianState state = stepper.initial_state();
    double t = stepper.problem().t0;
    double dt = stepper.initial_dt();
    double prev_error = 1.0;
    trace.times.push_back(t);
    trace.filtered.push_back(state);

    while (t < t_end) {
        const double gap = t_end - t;
        const double step_dt = std::min(dt, gap);
        if (!(step_dt > 1e-14 * std::max(1.0, std::abs(t))))
            throw StepDivergedError(t, step_dt);
        StepOutcome outcome = stepper.attempt_step(state, t, step_dt, prev_error);
        if (outcome.accepted) {
            trace.backwards.push_back(std::move(*outcome.backward));
            trace.scales.push_back(outcome.scale);
            t = (step_dt == gap) ? t_end : t + step_dt;
            state = std::move(*outcome.new_marginal);
            trace.times.push_back(t);
            trace.filtered.push_back(state);
            prev_error = outcome.error;
            trace.stats.record_accept(step_dt, outcome.rank_deficiency);
        } else {
            ++trace.stats.rejected;
        }
        dt = outcome.dt_next;
    }
    return trace;
}

AdaptiveTrace fixed_grid_simulate(const Stepper& stepper,
                                  const std::vector<double>& grid)
{
    if (grid.size() < 2)
        throw std::invalid_argument("fixed_grid_simulate: need at least two points");
    AdaptiveTrace trace;
    GaussianState state = stepper.initial_state();
    trace.times.push_back(grid.front());
    trace.filtered.push_back(state);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dt = grid[i] - grid[i - 1];
        if (!(dt > 0.0))
            throw std::invalid_argument("fixed_grid_simulate: grid not increasing");
        StepOutcome outcome = stepper.forced_step(state, grid[i - 1], dt);
        trace.backwards.push_back(std::move(*outcome.backward));
        trace.scales.push_back(outcome.scale);
        state = std::move(*outcome.new_marginal);
        trace.times.push_back(grid[i]);
        trace.filtered.push_back(state);
        trace.stats.record_accept(dt, outcome.rank_deficiency);
    }
    return trace;
}

std::vector<GaussianState> smooth(const AdaptiveTrace& trace)
{
    const std::size_t n = trace.backwards.size();
    std::vector<GaussianState> smoothed(n + 1);
    smoothed[n] = trace.filtered[n];
    for (std::size_t i = n; i >= 1; --i)
        smoothed[i - 1] = marginalize(trace.backwards[i - 1], smoothed[i]);
    return smoothed;
}

GaussianState interpolate_marginal(const Stepper& stepper,
                                   const AdaptiveTrace& trace,
                                   const std::vector<GaussianState>& smoothed,
                                   double s)
{
    const auto& times = trace.times;
    if (s < times.front() || s > times.back())
        throw std::invalid_argument("interpolate_marginal: time outside the trace");

    const auto it = std::lower_bound(times.begin(), times.end(), s);
    const std::size_t j_hi = static_cast<std::size_t>(it - times.begin());
    if (j_hi < times.size() && times[j_hi] == s) return smoothed[j_hi];

    const std::size_t j = j_hi - 1;
    const double scale =
        stepper.config().calibration == Calibration::time_varying
            ? trace.scales[j]
            : 1.0;
    auto [p_s, cond_j_given_s] =
        stepper.predict(trace.filtered[j], s - times[j], scale);
    (void)cond_j_given_s;
    auto [unused, cond_s_given_next] =
        stepper.predict(p_s, times[j + 1] - s, scale);
    (void)unused;
    return marginalize(cond_s_given_next, smoothed[j + 1]);
}

std::vector<GaussianState> oracle_marginals_at_targets(
    const Stepper& stepper, const std::vector<double>& targets)
{
    const AdaptiveTrace trace = adaptive_simulate(stepper);
    const std::vector<GaussianState> smoothed = smooth(trace);
    std::vector<GaussianState> out;
    out.reserve(targets.size());
    for (double s : targets)
        out.push_back(interpolate_marginal(stepper, trace, smoothed, s));
    return out;
}

TerminalRun solve_terminal(const Stepper& stepper)
{
    const double t_end = stepper.problem().t_end;
    TerminalRun run;
    GaussianState state = stepper.initial_state();
    double t = stepper.problem().t0;
    double dt = stepper.initial_dt();
    double prev_error = 1.0;
    while (t < t_end) {
        const double gap = t_end - t;
        const double step_dt = std::min(dt, gap);
        if (!(step_dt > 1e-14 * std::max(1.0, std::abs(t))))
            throw StepDivergedError(t, step_dt);
        StepOutcome outcome = stepper.attempt_step(state, t, step_dt, prev_error);
        if (outcome.accepted) {
            t = (step_dt == gap) ? t_end : t + step_dt;
            state = std::move(*outcome.new_marginal);
            prev_error = outcome.error;
            run.stats.record_accept(step_dt, outcome.rank_deficiency);
        } else {
            ++run.stats.rejected;
        }
        dt = outcome.dt_next;
    }
    run.terminal = std::move(state);
    return run;
}

std::size_t per_step_floats(const Stepper& stepper)
{
    const GaussianState init = stepper.initial_state();
    const AffineConditional cond =
        AffineConditional::identity(init.dim(), init.width());
    return float_count(init) + float_count(cond) + 1;
}

}  // namespace probode
