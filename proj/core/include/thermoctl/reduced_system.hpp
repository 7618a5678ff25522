// reduced_system.hpp — the m-dimensional modal reduction z' + A z = B alpha,
// piecewise-constant control trajectories, and the exact segment propagator.

#pragma once

#include "thermoctl/spectral_domain.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace thermoctl {

/// Per-channel amplitude bounds, all positive.
struct ControlBounds {
    std::vector<double> amplitude;

    int channels() const { return static_cast<int>(amplitude.size()); }
};

/// Modal reduction of the controlled heat equation onto the first m modes:
///   z'(t) + A z(t) = B alpha(t),   A = diag(decay_rates),   z(0) = initial_state,
/// with |alpha_j| <= bounds.amplitude[j].  Steering z to 0 is reaching the
/// target subspace spanned by modes m+1, m+2, ...
struct ReducedSystem {
    int target_modes = 0;          // m
    int channels = 0;              // k
    Eigen::VectorXd decay_rates;   // diagonal of A, strictly increasing, positive
    Eigen::MatrixXd coupling;      // B, m x k
    Eigen::VectorXd initial_state; // z0
    ControlBounds bounds;

    /// Throws std::invalid_argument when any structural invariant fails.
    void validate() const;
};

/// One control channel as a right-closed step function: value values[l] on
/// (times[l], times[l+1]], with times[0] = 0 and times.back() = horizon.
struct ChannelSchedule {
    std::vector<double> times;
    std::vector<double> values;

    /// Value at t (value at an exact breakpoint belongs to the segment that
    /// ends there; t = 0 returns the first segment's value).
    double value_at(double t) const;
};

/// k-channel piecewise-constant control on [0, horizon].
struct ControlTrajectory {
    double horizon = 0.0;
    std::vector<ChannelSchedule> channels;

    int channel_count() const { return static_cast<int>(channels.size()); }
    double value_at(int channel, double t) const;
    /// Sorted union of every channel's interior switching times.
    std::vector<double> switching_times() const;
    /// Throws std::invalid_argument when times are not strictly increasing,
    /// do not span [0, horizon], or sizes disagree.
    void validate() const;
};

/// First m eigen-coefficients of the initial state; a missing tail counts
/// as zero.
Eigen::VectorXd project_initial(std::span<const double> y0_coeffs, int m);

/// Assemble the reduction from the basis, region, initial coefficients and
/// bounds.  Throws std::invalid_argument for m < 2, k < 1, or m, k beyond
/// the truncation, or bounds of the wrong arity.
ReducedSystem build_reduced(const EigenBasis& basis, const ControlRegion& region,
                            std::span<const double> y0_coeffs, int m, int k,
                            ControlBounds bounds);

/// One exact update across a constant-control segment of length h:
///   z_i <- e^{-lambda_i h} z_i + (1 - e^{-lambda_i h}) / lambda_i * drive_i,
/// where drive = B * v.
void advance_segment(const Eigen::VectorXd& decay_rates, double h,
                     const Eigen::VectorXd& drive, Eigen::VectorXd& state);

/// State at time t under the trajectory, by exact per-segment exponential
/// updates (no time-stepping error).  Throws std::invalid_argument when t is
/// outside [0, horizon].
Eigen::VectorXd propagate(const ReducedSystem& system, const ControlTrajectory& traj, double t);

}  // namespace thermoctl
