// toc_solver.hpp — minimum-time steering of the modal reduction to zero:
// closed-form synthesis for the decoupled full-domain cases, a support-
// function feasibility test with bisection plus Pontryagin sign extraction
// for coupled systems, and an exhaustive vertex-control oracle.

#pragma once

#include "thermoctl/reduced_system.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace thermoctl {

enum class SolveMethod { kClosedForm, kBisection, kOracle };

const char* to_string(SolveMethod method);

struct SolverOptions {
    /// Bisection width target on the optimal time.
    double time_tolerance = 1e-6;
    /// First horizon probed; doubled until feasible.
    double initial_horizon = 1.0;
    /// Doubling stops at initial_horizon * horizon_cap_factor.
    double horizon_cap_factor = 65536.0;  // 2^16
    /// Margin below which a coupling entry counts as structurally zero.
    double structural_threshold = 1e-9;
    /// Bisection also shrinks until the feasible-side margin is this small,
    /// which bounds the terminal miss of the extracted control.
    double margin_target = 1e-8;
    double terminal_tolerance = 1e-6;
    std::uint64_t seed = 0x7468657264ULL;
    int random_starts = 32;
    int descent_max_iterations = 400;
    /// Cells of the switching-function bracketing grid.
    int bracket_grid = 256;
};

struct SolveReport {
    double optimal_time = 0.0;
    ControlTrajectory control;
    /// Support-function margin at the reported time (0 for closed form).
    double feasibility_margin = 0.0;
    /// Minimizing unit direction of the margin; absent on the closed-form path.
    std::optional<Eigen::VectorXd> dual_direction;
    /// Norm of the propagated state at optimal_time.
    double terminal_error = 0.0;
    SolveMethod method = SolveMethod::kBisection;
};

/// Minimal time for one decoupled mode:  (1/rate) ln(1 + rate |z0| / bound).
/// Throws std::invalid_argument for nonpositive rate or bound.
double diagonal_mode_time(double rate, double bound, double z0);

/// Closed-form synthesis for full-domain instances (coupling equal to the
/// identity block): each active channel runs at -sgn(z0_i) * bound until its
/// mode hits zero and then idles; the optimal time is the largest per-mode
/// time.  Throws std::logic_error when the instance is not of this shape or
/// has an unreachable tail.
SolveReport diagonal_synthesis(const ReducedSystem& system);

struct MarginResult {
    double value = 0.0;
    Eigen::VectorXd direction;
};

/// min over unit eta of  h_T(eta) - <r(T), eta>,  where r(T) = -e^{-AT} z0
/// and h_T is the support function of the zero-initial-state reachable set;
/// nonnegative iff the origin is reachable at horizon T.  Throws
/// std::invalid_argument for T <= 0.
MarginResult feasibility_margin(const ReducedSystem& system, double horizon,
                                const SolverOptions& options = {});

/// Bisection on the feasibility margin; the report carries the extracted
/// control, the dual direction and the terminal error.  Throws
/// InfeasibleHorizonError when no horizon below the cap is feasible (and for
/// instances with an uncontrolled nonzero mode, which can never reach zero).
SolveReport min_time_bisect(const ReducedSystem& system, const SolverOptions& options = {});

/// Vertex-valued control for a feasible horizon and dual direction: each
/// channel carries bound * sign of its switching function
/// (B^T e^{-A^T (T - s)} eta)_j, with the global orientation picked by the
/// smaller terminal miss.  Channels whose switching function vanishes
/// identically and which drive exactly one private mode are synthesized
/// directly as one-switch vertex controls landing that mode on zero.
ControlTrajectory extract_bangbang(const ReducedSystem& system, double horizon,
                                   const Eigen::VectorXd& direction,
                                   const SolverOptions& options = {});

struct BruteForceReport {
    /// Smallest grid horizon whose best vertex control meets the coarse
    /// tolerance; empty when none does.
    std::optional<double> time;
    std::vector<double> horizons;
    std::vector<double> best_terminal_norms;
    std::vector<double> coarse_tolerances;
};

/// Exhaustive oracle: every (2^k)^segments vertex-valued piecewise-constant
/// control on uniform segments, propagated exactly.  Valid only for k <= 2
/// and segments <= 8; throws std::invalid_argument beyond that budget.
BruteForceReport brute_force_min_time(const ReducedSystem& system, int segments,
                                      std::span<const double> horizon_grid);

}  // namespace thermoctl
