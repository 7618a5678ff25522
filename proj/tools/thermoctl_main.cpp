// thermoctl — time-optimal control workbench for spectrally reduced heat
// equations on an interval.
//
// Subcommands:
//   check    structural conditions and the existence verdict
//   solve    minimum-time synthesis, bang-bang verification, simulation
//   scan     ball-augmentation scan repairing vanishing couplings
//   compare  the same instance under full-domain and proper-subset actuation
//
// Exit codes: 0 success, 2 spec schema violation, 3 solve on a provably
// nonexistent instance, 4 scan without a certified candidate, 1 other errors.

#include <CLI11.hpp>

#include "thermoctl/bangbang_analysis.hpp"
#include "thermoctl/errors.hpp"
#include "thermoctl/problem_spec.hpp"
#include "thermoctl/report_io.hpp"
#include "thermoctl/simulator.hpp"
#include "thermoctl/structural_conditions.hpp"
#include "thermoctl/toc_solver.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace thermoctl;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSpec = 2;
constexpr int kExitNonexistent = 3;
constexpr int kExitNoCandidate = 4;

struct CommonFlags {
    std::string spec_path;
    std::string out_dir = ".";
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<double> horizon_cap;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("spec", flags.spec_path, "problem spec JSON file")->required();
    cmd->add_option("--out-dir", flags.out_dir, "directory for report artifacts");
    cmd->add_option("--tol", flags.tol, "bisection tolerance on the optimal time");
    cmd->add_option("--seed", flags.seed, "seed for the solver's multistart descent");
    cmd->add_option("--delta", flags.delta, "nonvanishing threshold");
    cmd->add_option("--horizon-cap", flags.horizon_cap, "horizon doubling cap factor");
}

ProblemSpec load_spec(const CommonFlags& flags) {
    ProblemSpec spec = load_problem_spec_file(flags.spec_path);
    if (const char* env_seed = std::getenv("THERMOCTL_SEED")) {
        spec.solver.seed = std::strtoull(env_seed, nullptr, 10);
    }
    if (flags.seed) spec.solver.seed = *flags.seed;
    if (flags.tol) spec.solver.time_tolerance = *flags.tol;
    if (flags.delta) spec.solver.structural_threshold = *flags.delta;
    if (flags.horizon_cap) spec.solver.horizon_cap_factor = *flags.horizon_cap;
    return spec;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Solve pipeline shared by `solve` and `compare`.  Produces the verdict and,
/// when the theory admits it (or leaves it open), the synthesized control
/// with its bang-bang verification and high-truncation simulation.
SolveArtifacts run_pipeline(const ProblemSpec& spec, const ControlRegion& region,
                            bool with_oracle) {
    const EigenBasis basis = spec.make_basis();
    const ReducedSystem system =
        build_reduced(basis, region,
                      std::span<const double>(spec.y0_coefficients.data(),
                                              spec.y0_coefficients.size()),
                      spec.m, spec.k, ControlBounds{spec.bounds});

    SolveArtifacts artifacts;
    artifacts.verdict =
        classify_existence(system, region, spec.solver.structural_threshold);

    switch (artifacts.verdict.tag) {
        case ExistenceTag::kNonexistent:
            return artifacts;
        case ExistenceTag::kAlreadyInTarget: {
            SolveReport report;
            report.method = SolveMethod::kClosedForm;
            report.control.horizon = 0.0;
            report.control.channels.assign(static_cast<std::size_t>(spec.k),
                                           ChannelSchedule{{0.0}, {}});
            artifacts.solve = std::move(report);
            return artifacts;
        }
        case ExistenceTag::kExistsDiagonalReduced:
        case ExistenceTag::kExistsDiagonalFull:
            artifacts.solve = diagonal_synthesis(system);
            break;
        case ExistenceTag::kExistsProperRegion:
        case ExistenceTag::kUnknown:
            try {
                artifacts.solve = min_time_bisect(system, spec.solver);
            } catch (const InfeasibleHorizonError& err) {
                artifacts.verdict.witness += std::string("; solver: ") + err.what();
                return artifacts;
            }
            break;
    }

    if (artifacts.solve->optimal_time > 0.0) {
        artifacts.bangbang =
            verify_bangbang(artifacts.solve->control, system.bounds);
        const TruncatedTrajectory sim =
            simulate_truncated(basis, region, artifacts.solve->control,
                               std::span<const double>(spec.y0_coefficients.data(),
                                                       spec.y0_coefficients.size()),
                               129);
        artifacts.simulated_modes = basis.truncation();
        artifacts.simulated_target_distance = target_distance(
            sim.states.row(sim.states.rows() - 1).transpose(), spec.m);
    }

    if (with_oracle && spec.k <= 2) {
        const double pivot = std::max(artifacts.solve->optimal_time, 1e-3);
        std::vector<double> grid;
        for (int i = 0; i < 40; ++i) {
            grid.push_back(pivot * (0.25 + 1.75 * (i + 1) / 40.0));
        }
        artifacts.oracle = brute_force_min_time(system, 6, grid);
    }
    return artifacts;
}

int cmd_check(const CommonFlags& flags) {
    const ProblemSpec spec = load_spec(flags);
    const ControlRegion region = spec.make_region();
    const ReducedSystem system = spec.make_system();
    const ConditionReport report =
        build_condition_report(system, region, spec.solver.structural_threshold);
    const std::string doc = to_json(report);
    fs::create_directories(flags.out_dir);
    write_text(fs::path(flags.out_dir) / "check_report.json", doc);
    std::cout << doc << "\n";
    return kExitOk;
}

int cmd_solve(const CommonFlags& flags, bool with_oracle) {
    const ProblemSpec spec = load_spec(flags);
    const ControlRegion region = spec.make_region();
    const SolveArtifacts artifacts = run_pipeline(spec, region, with_oracle);

    fs::create_directories(flags.out_dir);
    const std::string doc = to_json(artifacts);
    write_text(fs::path(flags.out_dir) / "solve_report.json", doc);

    if (artifacts.verdict.tag == ExistenceTag::kNonexistent) {
        std::cout << doc << "\n";
        std::cerr << "no optimal control exists: " << artifacts.verdict.witness << "\n";
        return kExitNonexistent;
    }
    if (!artifacts.solve) {
        std::cout << doc << "\n";
        std::cerr << "solve failed: " << artifacts.verdict.witness << "\n";
        return kExitError;
    }

    {
        std::ofstream csv(fs::path(flags.out_dir) / "control.csv");
        write_control_csv(csv, artifacts.solve->control);
    }
    if (artifacts.solve->optimal_time > 0.0) {
        const EigenBasis basis = spec.make_basis();
        const TruncatedTrajectory sim =
            simulate_truncated(basis, region, artifacts.solve->control,
                               std::span<const double>(spec.y0_coefficients.data(),
                                                       spec.y0_coefficients.size()),
                               129);
        std::ofstream csv(fs::path(flags.out_dir) / "trajectory.csv");
        write_trajectory_csv(csv, sim);
    }
    std::cout << doc << "\n";
    return kExitOk;
}

int cmd_scan(const CommonFlags& flags) {
    ProblemSpec spec = load_spec(flags);
    if (!spec.scan) throw SpecError("scan", "missing scan settings in the spec");
    if (flags.delta) spec.scan->threshold = *flags.delta;
    const ScanSettings& s = *spec.scan;
    const EigenBasis basis = spec.make_basis();
    const ControlRegion region = spec.make_region();

    ScanGrid grid;
    try {
        grid = ScanGrid::uniform(basis.domain(), s.x_lo, s.x_hi, s.x_count, s.rho_lo, s.rho_hi,
                                 s.rho_count, s.threshold, spec.m, spec.k);
    } catch (const std::invalid_argument& err) {
        throw SpecError("scan", err.what());
    }

    fs::create_directories(flags.out_dir);
    ScanResult result;
    try {
        result = scan(basis, region, grid);
    } catch (const ScanError& err) {
        std::cerr << err.what() << "\n";
        return kExitNoCandidate;
    }
    {
        std::ofstream csv(fs::path(flags.out_dir) / "scan_heatmap.csv");
        write_scan_csv(csv, result);
    }
    const std::string doc = scan_candidates_json(result, s.threshold);
    write_text(fs::path(flags.out_dir) / "scan_candidates.json", doc);
    std::cout << doc << "\n";
    if (result.certified.empty()) {
        std::cerr << "no candidate cleared the threshold " << s.threshold << "\n";
        return kExitNoCandidate;
    }
    return kExitOk;
}

int cmd_compare(const CommonFlags& flags) {
    const ProblemSpec spec = load_spec(flags);
    if (spec.omega_full) {
        throw SpecError("omega", "compare requires a proper subregion in the spec");
    }
    const DomainSpec domain{spec.domain_length};
    const SolveArtifacts full_side =
        run_pipeline(spec, ControlRegion::full(domain), false);
    const SolveArtifacts proper_side = run_pipeline(spec, spec.make_region(), false);

    const std::string doc = compare_json(full_side, proper_side, spec.m, spec.k);
    fs::create_directories(flags.out_dir);
    write_text(fs::path(flags.out_dir) / "compare_report.json", doc);
    std::cout << doc << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-optimal control for spectrally reduced heat equations"};
    app.require_subcommand(1);

    CommonFlags check_flags, solve_flags, scan_flags, compare_flags;
    bool with_oracle = false;

    CLI::App* check = app.add_subcommand("check", "structural conditions and existence verdict");
    add_common(check, check_flags);
    CLI::App* solve = app.add_subcommand("solve", "minimum-time synthesis and verification");
    add_common(solve, solve_flags);
    solve->add_flag("--oracle", with_oracle, "also run the exhaustive vertex-control oracle");
    CLI::App* scan = app.add_subcommand("scan", "ball-augmentation coupling scan");
    add_common(scan, scan_flags);
    CLI::App* compare = app.add_subcommand("compare", "full-domain vs proper-region comparison");
    add_common(compare, compare_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(check_flags);
        if (solve->parsed()) return cmd_solve(solve_flags, with_oracle);
        if (scan->parsed()) return cmd_scan(scan_flags);
        if (compare->parsed()) return cmd_compare(compare_flags);
    } catch (const SpecError& err) {
        std::cerr << "spec error at " << err.path() << ": " << err.what() << "\n";
        return kExitSpec;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
