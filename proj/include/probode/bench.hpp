/**
 * @file bench.hpp
 * @brief Benchmark runners (work-precision, memory scaling, step counts,
 *        sampling) with CSV/JSON record output.
 *
 * Wall times are reported as the best of R repetitions and never asserted
 * absolutely; memory is reported as exact scalar counts of the returned
 * representations. Every output file embeds the resolved configuration so
 * rows can be re-run bit for bit.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "probode/problems.hpp"

namespace probode {

struct BenchmarkRecord {
    std::string problem;
    std::string solver;  ///< ats | as-oracle | rk-bosh3 | rk-tsit5 | fixed-*
    int num_derivatives = 0;
    std::string linearization;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    int targets = 0;    ///< M
    long steps = -1;    ///< accepted compute-grid intervals N
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double wall_time_seconds = std::numeric_limits<double>::quiet_NaN();
    long long stored_floats = -1;
    long samples = -1;
    std::string status = "ok";  ///< ok | diverged | skipped | estimated
};

/// Field names in declared order; the CSV header row.
const std::vector<std::string>& benchmark_record_fields();

struct BenchOptions {
    int targets_m = 5;
    int repetitions = 3;
    double abs_tol_ratio = 1e-3;
    std::uint64_t seed = 20240901;
    double budget_bytes = 4e9;
    /// Overrides of the problem's recommended solver assembly.
    int num_derivatives = -1;
    std::optional<Linearization> linearization;
    std::optional<Factorization> factorization;
};

/// Problem recommendation merged with the options' overrides; tolerances
/// from rel_tol and the abs-tol ratio.
SolverConfig resolve_config(const BenchmarkProblem& problem,
                            const BenchOptions& options, double rel_tol);

/// Evaluate the reference policy at the given times; rows are times, the
/// columns the solution coordinates. `reference_id` names what was used.
Matrix reference_at(const BenchmarkProblem& problem,
                    const std::vector<double>& times,
                    std::string* reference_id = nullptr);

std::vector<double> equispaced_targets(double a, double b, int m);

struct BenchReport {
    std::vector<BenchmarkRecord> records;
    nlohmann::json config;
    bool checks_passed = true;
    std::vector<std::string> check_messages;
};

/// One row per (solver, tolerance): probabilistic solver in target mode,
/// the store-everything oracle, and the two RK baselines.
BenchReport run_workprecision(const BenchmarkProblem& problem,
                              const std::vector<std::string>& solvers,
                              const std::vector<double>& tolerances,
                              const BenchOptions& options);

/// Brusselator dimension sweep: actual target-mode storage against the
/// estimated storage of adaptive simulation (terminal-value solve times
/// per-step state size; materialized only under the byte budget).
BenchReport run_memory_scaling(const std::vector<int>& d_grid,
                               const BenchOptions& options, double rel_tol);

/// Adaptive run plus the two derived fixed grids (matched step count,
/// smallest step size); fixed-step solves on all three.
BenchReport run_stepcount(const BenchmarkProblem& problem,
                          const BenchOptions& options,
                          std::optional<double> rel_tol = std::nullopt);

/// Sampling pipelines: target-mode solve + joint samples versus
/// store-everything solve on the augmented grid + subselection.
BenchReport run_sampling(const BenchmarkProblem& problem,
                         const std::vector<double>& tolerances,
                         const std::vector<long>& sample_counts,
                         const BenchOptions& options);

std::string to_csv(const BenchReport& report);
nlohmann::json to_json(const BenchReport& report);

}  // namespace probode
