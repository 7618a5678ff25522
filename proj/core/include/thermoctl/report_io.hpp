// report_io.hpp — JSON report documents and CSV artifacts for the CLI:
// condition reports, solve reports, side-by-side comparisons, control and
// trajectory tables, scan heatmaps.

#pragma once

#include "thermoctl/bangbang_analysis.hpp"
#include "thermoctl/genericity_scanner.hpp"
#include "thermoctl/simulator.hpp"
#include "thermoctl/structural_conditions.hpp"
#include "thermoctl/toc_solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace thermoctl {

/// Everything the `check` command reports.
struct ConditionReport {
    int m = 0;
    int k = 0;
    double threshold = 0.0;
    ExistenceVerdict verdict;
    bool simple_spectrum = false;
    CouplingCheck coupling_check;
    bool first_column_nonvanishing = false;
    std::vector<bool> general_position;
    int kalman_rank = 0;
    Eigen::MatrixXd coupling;
};

ConditionReport build_condition_report(const ReducedSystem& system, const ControlRegion& region,
                                       double threshold);

/// Everything the `solve` command reports for one region variant.
struct SolveArtifacts {
    ExistenceVerdict verdict;
    std::optional<SolveReport> solve;
    std::optional<BangBangReport> bangbang;
    std::optional<double> simulated_target_distance;
    int simulated_modes = 0;
    std::optional<BruteForceReport> oracle;
};

/// Serializers.  `digits` limits floating-point precision (17 round-trips
/// exactly; comparisons use fewer digits so golden files stay stable).
std::string to_json(const ConditionReport& report, int digits = 17);
std::string to_json(const SolveArtifacts& artifacts, int digits = 17);
std::string compare_json(const SolveArtifacts& full_domain, const SolveArtifacts& proper_region,
                         int m, int k, int digits = 9);

/// Control table: columns t, alpha_1..alpha_k, sampled at every switching
/// time plus a uniform grid; doubles at full precision so reloading
/// reconstructs the trajectory exactly.
void write_control_csv(std::ostream& out, const ControlTrajectory& traj,
                       int uniform_samples = 201);
ControlTrajectory read_control_csv(std::istream& in);

/// Simulated modal trajectory: columns t, y_1..y_M.
void write_trajectory_csv(std::ostream& out, const TruncatedTrajectory& traj);

/// Scan heatmap: columns x, rho, min_abs_coupling over admissible points.
void write_scan_csv(std::ostream& out, const ScanResult& result);
std::string scan_candidates_json(const ScanResult& result, double threshold,
                                 std::size_t max_candidates = 50);

}  // namespace thermoctl
