// simulator.hpp — forward simulation of the truncated heat equation (M modes,
// M >> m) under a synthesized control, and distance to the target subspace.

#pragma once

#include "thermoctl/reduced_system.hpp"
#include "thermoctl/spectral_domain.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace thermoctl {

/// Sampled modal trajectory; the sample grid contains every switching time
/// of the driving control.
struct TruncatedTrajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;  // one row per sample, M columns

    int mode_count() const { return static_cast<int>(states.cols()); }
};

/// Propagate all M basis modes under the control, with the full coupling
/// rows computed in closed form; exact per-segment exponential updates.
/// Throws std::invalid_argument when the control has more channels than the
/// truncation or the sample count is not positive.
TruncatedTrajectory simulate_truncated(const EigenBasis& basis, const ControlRegion& region,
                                       const ControlTrajectory& traj,
                                       std::span<const double> y0_coeffs, int sample_count);

/// Euclidean norm of the first m coefficients: L^2 distance to the span of
/// modes m+1, m+2, ...  Throws std::invalid_argument when m exceeds the
/// state dimension.
double target_distance(const Eigen::VectorXd& state, int m);

}  // namespace thermoctl
