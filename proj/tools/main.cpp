// Benchmark and solve CLI for the constant-memory probabilistic ODE solver.
//
// Subcommands:
//   solve              adaptive target simulation of one problem
//   bench workprecision | memory | stepcount | sampling
//
// Exit codes: 0 success, 1 failed --check assertion, 2 usage error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "probode/bench.hpp"
#include "probode/fixedpoint.hpp"

namespace {

using namespace probode;

std::vector<double> parse_tolerances(const std::string& spec)
{
    std::vector<double> out;
    const auto range_pos = spec.find("..");
    if (range_pos != std::string::npos) {
        // Decade range, loosest to tightest: "1e-3..1e-10".
        const double lo = std::stod(spec.substr(0, range_pos));
        const double hi = std::stod(spec.substr(range_pos + 2));
        double tol = lo;
        while (tol >= hi * 0.999) {
            out.push_back(tol);
            tol /= 10.0;
        }
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw CLI::ValidationError("--tols", "no tolerances given");
    return out;
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    file << text;
}

int emit_report(const BenchReport& report, const std::string& out,
                const std::string& format, bool check)
{
    write_output(out, format == "json" ? to_json(report).dump(2) + "\n"
                                       : to_csv(report));
    for (const std::string& msg : report.check_messages)
        std::cerr << "[check] " << msg << "\n";
    if (check && !report.checks_passed) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive probabilistic ODE solving with memory fixed by the "
                 "target grid"};
    app.require_subcommand(1);

    std::string problem_name = "logistic";
    std::string tols_spec;
    double tol = 1e-6;
    double abs_tol_ratio = 1e-3;
    int targets_m = 5;
    int num_derivatives = -1;
    std::string linearization;
    std::string factorization;
    std::string samples_spec = "10";
    std::uint64_t seed = 20240901;
    int repetitions = 3;
    double budget_bytes = 4e9;
    std::string out_path;
    std::string format = "csv";
    bool check = false;
    std::string d_spec = "2,4,8,16,32,64";

    auto add_common = [&](CLI::App* cmd, bool with_problem = true) {
        if (with_problem)
            cmd->add_option("--problem", problem_name,
                            "logistic | van-der-pol | rigid-body | "
                            "brusselator-<d> | pleiades | three-body");
        cmd->add_option("--abs-tol-ratio", abs_tol_ratio,
                        "absolute tolerance = ratio * relative tolerance");
        cmd->add_option("--targets", targets_m, "number of target intervals M");
        cmd->add_option("--num-derivatives", num_derivatives,
                        "derivatives tracked by the prior (L)");
        cmd->add_option("--linearization", linearization, "ek0 | ek1");
        cmd->add_option("--factorization", factorization, "dense | isotropic");
        cmd->add_option("--seed", seed, "RNG seed for sampling workloads");
        cmd->add_option("--repetitions", repetitions,
                        "wall-time repetitions (best-of)");
        cmd->add_option("--budget-bytes", budget_bytes,
                        "storage budget for materializing adaptive simulation");
        cmd->add_option("--out", out_path, "output file (default stdout)");
        cmd->add_option("--format", format, "csv | json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_flag("--check", check, "exit 1 when built-in assertions fail");
    };

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "solve one problem at a target grid");
    add_common(solve_cmd);
    solve_cmd->add_option("--tol", tol, "relative tolerance");

    CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark suites");
    bench_cmd->require_subcommand(1);

    CLI::App* wp_cmd = bench_cmd->add_subcommand(
        "workprecision", "error vs cost across tolerances");
    add_common(wp_cmd);
    wp_cmd->add_option("--tols", tols_spec,
                       "tolerance list 1e-4,1e-7 or decade range 1e-3..1e-10")
        ->required();
    std::string solvers_spec = "ats,as-oracle,rk-bosh3,rk-tsit5";
    wp_cmd->add_option("--solvers", solvers_spec, "comma list of solver ids");

    CLI::App* mem_cmd = bench_cmd->add_subcommand(
        "memory", "storage vs problem dimension (Brusselator sweep)");
    add_common(mem_cmd, false);
    mem_cmd->add_option("--d", d_spec, "comma list of spatial resolutions");
    mem_cmd->add_option("--tol", tol, "relative tolerance");

    CLI::App* sc_cmd = bench_cmd->add_subcommand(
        "stepcount", "adaptive grid vs derived fixed grids");
    add_common(sc_cmd);
    bool sc_tol_set = false;
    sc_cmd->add_option("--tol", tol, "relative tolerance")
        ->each([&](const std::string&) { sc_tol_set = true; });

    CLI::App* samp_cmd = bench_cmd->add_subcommand(
        "sampling", "joint posterior sampling pipelines");
    add_common(samp_cmd);
    samp_cmd->add_option("--tols", tols_spec, "tolerance list or range")
        ->required();
    samp_cmd->add_option("--samples", samples_spec, "comma list of K values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        BenchOptions options;
        options.targets_m = targets_m;
        options.repetitions = repetitions;
        options.abs_tol_ratio = abs_tol_ratio;
        options.seed = seed;
        options.budget_bytes = budget_bytes;
        options.num_derivatives = num_derivatives;
        if (linearization == "ek0") options.linearization = Linearization::ek0;
        if (linearization == "ek1") options.linearization = Linearization::ek1;
        if (factorization == "dense") options.factorization = Factorization::dense;
        if (factorization == "isotropic")
            options.factorization = Factorization::isotropic;

        if (solve_cmd->parsed()) {
            const BenchmarkProblem problem = problem_by_name(problem_name);
            const SolverConfig cfg = resolve_config(problem, options, tol);
            const std::vector<double> targets = equispaced_targets(
                problem.ode.t0, problem.ode.t_end, targets_m);
            const TargetSolution sol = solve_targets(problem.ode, targets, cfg);
            const std::vector<GaussianState> ms = marginals(sol);

            nlohmann::json j;
            j["problem"] = problem.name;
            j["rel_tol"] = cfg.rel_tol;
            j["abs_tol"] = cfg.abs_tol;
            j["num_derivatives"] = cfg.num_derivatives;
            j["steps"] = sol.stats.accepted;
            j["rejected"] = sol.stats.rejected;
            j["min_dt"] = sol.stats.min_dt;
            j["max_dt"] = sol.stats.max_dt;
            j["stored_floats"] = sol.stored_floats();
            j["targets"] = sol.targets;
            j["marginal_means"] = nlohmann::json::array();
            j["marginal_stds"] = nlohmann::json::array();
            for (const GaussianState& g : ms) {
                const Vector u = sol.stack.derivative_block(g.mean, 0);
                const Matrix cov = g.cov();
                Vector std_u(u.size());
                if (sol.stack.mode == Factorization::isotropic) {
                    std_u.setConstant(std::sqrt(std::max(0.0, cov(0, 0))));
                } else {
                    for (int i = 0; i < u.size(); ++i)
                        std_u(i) = std::sqrt(std::max(0.0, cov(i, i)));
                }
                j["marginal_means"].push_back(
                    std::vector<double>(u.data(), u.data() + u.size()));
                j["marginal_stds"].push_back(
                    std::vector<double>(std_u.data(), std_u.data() + std_u.size()));
            }
            write_output(out_path, j.dump(2) + "\n");
            return 0;
        }

        if (wp_cmd->parsed()) {
            std::vector<std::string> solvers;
            std::stringstream ss(solvers_spec);
            std::string item;
            while (std::getline(ss, item, ',')) solvers.push_back(item);
            const BenchReport report =
                run_workprecision(problem_by_name(problem_name), solvers,
                                  parse_tolerances(tols_spec), options);
            return emit_report(report, out_path, format, check);
        }

        if (mem_cmd->parsed()) {
            std::vector<int> d_grid;
            std::stringstream ss(d_spec);
            std::string item;
            while (std::getline(ss, item, ',')) d_grid.push_back(std::stoi(item));
            const BenchReport report = run_memory_scaling(d_grid, options, tol);
            return emit_report(report, out_path, format, check);
        }

        if (sc_cmd->parsed()) {
            const BenchReport report = run_stepcount(
                problem_by_name(problem_name), options,
                sc_tol_set ? std::optional<double>(tol) : std::nullopt);
            return emit_report(report, out_path, format, check);
        }

        if (samp_cmd->parsed()) {
            std::vector<long> ks;
            std::stringstream ss(samples_spec);
            std::string item;
            while (std::getline(ss, item, ',')) ks.push_back(std::stol(item));
            const BenchReport report =
                run_sampling(problem_by_name(problem_name),
                             parse_tolerances(tols_spec), ks, options);
            return emit_report(report, out_path, format, check);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
