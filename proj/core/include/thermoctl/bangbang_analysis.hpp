// bangbang_analysis.hpp — measures how far a control trajectory is from the
// bang-bang ideal (every channel at its amplitude bound almost everywhere).

#pragma once

#include "thermoctl/reduced_system.hpp"

#include <vector>

namespace thermoctl {

struct IdleInterval {
    int channel = 0;  // 0-based
    double begin = 0.0;
    double end = 0.0;

    double length() const { return end - begin; }
};

struct BangBangReport {
    bool is_bang_bang = false;
    /// Per channel: fraction of the horizon where |value| < bound * (1 - 1e-9).
    std::vector<double> off_vertex_fraction;
    /// Maximal contiguous stretches where a channel is exactly idle
    /// (|value| <= 1e-12 * bound).
    std::vector<IdleInterval> idle_intervals;
    std::vector<int> switching_counts;
    double tolerance_fraction = 0.0;
};

/// Verdict and measurements; is_bang_bang holds iff every channel's
/// off-vertex fraction is at most tolerance_fraction and no idle interval is
/// longer than tolerance_fraction * horizon.  Invariant under refining a
/// trajectory's segment partition without changing values.
/// Throws std::invalid_argument when the horizon is not positive or the
/// bounds arity disagrees with the trajectory.
BangBangReport verify_bangbang(const ControlTrajectory& traj, const ControlBounds& bounds,
                               double tolerance_fraction = 1e-6);

/// Sign changes between consecutive nonzero-valued segments per channel;
/// idle segments break runs and are not counted as switches.
std::vector<int> switching_count(const ControlTrajectory& traj);

}  // namespace thermoctl
