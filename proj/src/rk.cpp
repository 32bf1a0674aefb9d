#include "probode/rk.hpp"

#include <algorithm>
#include <cmath>

namespace probode {

namespace {

struct Tableau {
    int stages;
    int order_low;  // embedded order, sets the controller exponents
    bool fsal;
    Matrix a;
    Vector b;
    Vector btilde;  // error = h * sum_i btilde_i k_i
    Vector c;
};

const Tableau& bosh3_tableau()
{
    static const Tableau t = [] {
        Tableau tb;
        tb.stages = 4;
        tb.order_low = 2;
        tb.fsal = true;
        tb.a = Matrix::Zero(4, 4);
        tb.a(1, 0) = 0.5;
        tb.a(2, 1) = 0.75;
        tb.a(3, 0) = 2.0 / 9.0;
        tb.a(3, 1) = 1.0 / 3.0;
        tb.a(3, 2) = 4.0 / 9.0;
        tb.b = (Vector(4) << 2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0).finished();
        tb.btilde = (Vector(4) << 2.0 / 9.0 - 7.0 / 24.0, 1.0 / 3.0 - 0.25,
                     4.0 / 9.0 - 1.0 / 3.0, -0.125)
                        .finished();
        tb.c = (Vector(4) << 0.0, 0.5, 0.75, 1.0).finished();
        return tb;
    }();
    return t;
}

const Tableau& tsit5_tableau()
{
    static const Tableau t = [] {
        Tableau tb;
        tb.stages = 7;
        tb.order_low = 4;
        tb.fsal = true;
        tb.a = Matrix::Zero(7, 7);
        tb.a(1, 0) = 0.161;
        tb.a(2, 0) = -0.008480655492356989;
        tb.a(2, 1) = 0.335480655492357;
        tb.a(3, 0) = 2.8971530571054935;
        tb.a(3, 1) = -6.359448489975075;
        tb.a(3, 2) = 4.3622954328695815;
        tb.a(4, 0) = 5.325864828439257;
        tb.a(4, 1) = -11.748883564062828;
        tb.a(4, 2) = 7.4955393428898365;
        tb.a(4, 3) = -0.09249506636175525;
        tb.a(5, 0) = 5.86145544294642;
        tb.a(5, 1) = -12.92096931784711;
        tb.a(5, 2) = 8.159367898576159;
        tb.a(5, 3) = -0.071584973281401;
        tb.a(5, 4) = -0.028269050394068383;
        tb.a(6, 0) = 0.09646076681806523;
        tb.a(6, 1) = 0.01;
        tb.a(6, 2) = 0.4798896504144996;
        tb.a(6, 3) = 1.379008574103742;
        tb.a(6, 4) = -3.290069515436081;
        tb.a(6, 5) = 2.324710524099774;
        tb.b = tb.a.row(6).transpose();
        tb.btilde = (Vector(7) << -0.00178001105222577714,
                     -0.0008164344596567469, 0.007880878010261995,
                     -0.1447110071732629, 0.5823571654525552,
                     -0.45808210592918697, 1.0 / 66.0)
                        .finished();
        tb.c = (Vector(7) << 0.0, 0.161, 0.327, 0.9, 0.9800255409045097, 1.0,
                1.0)
                   .finished();
        return tb;
    }();
    return t;
}

const Tableau& tableau_for(RKMethod method)
{
    return method == RKMethod::bosh3 ? bosh3_tableau() : tsit5_tableau();
}

double weighted_rms(const Vector& v, const Vector& scale)
{
    return std::sqrt((v.array() / scale.array()).square().mean());
}

double rk_initial_dt(const FirstOrderSystem& system, double t0, const Vector& y0,
                     double span, int order, const RKOptions& opt)
{
    if (opt.initial_dt > 0.0) return opt.initial_dt;
    const Vector f0 = system.f(t0, y0);
    const Vector w = (opt.abs_tol + opt.rel_tol * y0.cwiseAbs().array()).matrix();
    const double d0 = weighted_rms(y0, w);
    const double d1 = weighted_rms(f0, w);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Vector f1 = system.f(t0 + h0, y0 + h0 * f0);
    const double d2 = weighted_rms(f1 - f0, w) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(d1, d2),
                      1.0 / static_cast<double>(order + 1));
    }
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

FirstOrderSystem to_first_order(const ODEProblem& problem)
{
    FirstOrderSystem sys;
    if (problem.order == 1) {
        sys.dim = problem.dim;
        sys.f = [f = problem.f](double, const Vector& y) {
            return f(y, Vector());
        };
    } else {
        const int d = problem.dim;
        sys.dim = 2 * d;
        sys.f = [f = problem.f, d](double, const Vector& y) {
            Vector out(2 * d);
            out.head(d) = y.tail(d);
            out.tail(d) = f(y.head(d), y.tail(d));
            return out;
        };
    }
    return sys;
}

RKResult rk_solve_at(const FirstOrderSystem& system, RKMethod method, double t0,
                     const Vector& y0, const std::vector<double>& eval_times,
                     const RKOptions& options)
{
    const Tableau& tb = tableau_for(method);
    const int n = system.dim;
    const double t_final = eval_times.empty() ? t0 : eval_times.back();

    RKResult res;
    res.states = Matrix::Zero(static_cast<Eigen::Index>(eval_times.size()), n);

    double t = t0;
    Vector y = y0;
    double dt = rk_initial_dt(system, t0, y0, std::max(t_final - t0, 1e-12),
                              tb.order_low + 1, options);
    double prev_error = 1.0;
    std::size_t next_eval = 0;
    while (next_eval < eval_times.size() && eval_times[next_eval] <= t) {
        res.states.row(next_eval) = y.transpose();
        ++next_eval;
    }

    std::vector<Vector> k(tb.stages, Vector::Zero(n));
    bool have_fsal = false;
    long total = 0;

    while (next_eval < eval_times.size()) {
        if (++total > options.max_steps) {
            res.diverged = true;
            return res;
        }
        const double t_stop = eval_times[next_eval];
        const double h = std::min(dt, t_stop - t);

        if (tb.fsal && have_fsal) {
            // stage 0 reuses the last stage of the previous accepted step
        } else {
            k[0] = system.f(t, y);
        }
        for (int s = 1; s < tb.stages; ++s) {
            Vector ys = y;
            for (int j = 0; j < s; ++j)
                if (tb.a(s, j) != 0.0) ys += (h * tb.a(s, j)) * k[j];
            k[s] = system.f(t + tb.c(s) * h, ys);
        }
        Vector y_new = y;
        for (int s = 0; s < tb.stages; ++s)
            if (tb.b(s) != 0.0) y_new += (h * tb.b(s)) * k[s];
        Vector err = Vector::Zero(n);
        for (int s = 0; s < tb.stages; ++s)
            if (tb.btilde(s) != 0.0) err += (h * tb.btilde(s)) * k[s];

        if (!y_new.allFinite() || !err.allFinite()) {
            res.diverged = true;
            return res;
        }
        const Vector scale =
            (options.abs_tol +
             options.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array())
                .matrix();
        const double error = weighted_rms(err, scale);

        const double alpha = 0.7 / (tb.order_low + 1);
        const double beta = 0.4 / (tb.order_low + 1);
        double factor;
        if (error == 0.0) {
            factor = options.max_factor;
        } else {
            factor = options.safety * std::pow(error, -alpha) *
                     std::pow(prev_error > 0.0 ? prev_error : 1.0, beta);
            factor = std::clamp(factor, options.min_factor, options.max_factor);
        }

        if (error <= 1.0) {
            t = (h == t_stop - t) ? t_stop : t + h;
            y = y_new;
            prev_error = error;
            ++res.accepted;
            if (tb.fsal) {
                k[0] = k[tb.stages - 1];
                have_fsal = true;
            }
            while (next_eval < eval_times.size() && eval_times[next_eval] <= t) {
                res.states.row(next_eval) = y.transpose();
                ++next_eval;
            }
        } else {
            ++res.rejected;
        }
        dt = h * factor;
        if (!(dt > 1e-15 * std::max(1.0, std::abs(t)))) {
            res.diverged = true;
            return res;
        }
    }
    return res;
}

Vector rk_fixed(const FirstOrderSystem& system, RKMethod method, double t0,
                const Vector& y0, double t1, long num_steps)
{
    const Tableau& tb = tableau_for(method);
    const double h = (t1 - t0) / static_cast<double>(num_steps);
    Vector y = y0;
    double t = t0;
    std::vector<Vector> k(tb.stages);
    for (long step = 0; step < num_steps; ++step) {
        k[0] = system.f(t, y);
        for (int s = 1; s < tb.stages; ++s) {
            Vector ys = y;
            for (int j = 0; j < s; ++j)
                if (tb.a(s, j) != 0.0) ys += (h * tb.a(s, j)) * k[j];
            k[s] = system.f(t + tb.c(s) * h, ys);
        }
        for (int s = 0; s < tb.stages; ++s)
            if (tb.b(s) != 0.0) y += (h * tb.b(s)) * k[s];
        t = t0 + h * static_cast<double>(step + 1);
    }
    return y;
}

}  // namespace probode
