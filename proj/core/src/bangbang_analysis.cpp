#include "thermoctl/bangbang_analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace thermoctl {

namespace {

constexpr double kVertexSlack = 1e-9;   // off-vertex when |v| < a * (1 - slack)
constexpr double kIdleScale = 1e-12;    // idle when |v| <= a * scale

struct Run {
    double begin = 0.0;
    double end = 0.0;
    double value = 0.0;
};

// Merge exact-equal adjacent segments so every derived quantity depends only
// on maximal runs; this is what makes reports invariant under partition
// refinement (splitting a segment never changes any field, bit for bit).
std::vector<Run> maximal_runs(const ChannelSchedule& ch) {
    std::vector<Run> runs;
    for (std::size_t l = 0; l < ch.values.size(); ++l) {
        if (!runs.empty() && runs.back().value == ch.values[l]) {
            runs.back().end = ch.times[l + 1];
        } else {
            runs.push_back({ch.times[l], ch.times[l + 1], ch.values[l]});
        }
    }
    return runs;
}

}  // namespace

BangBangReport verify_bangbang(const ControlTrajectory& traj, const ControlBounds& bounds,
                               double tolerance_fraction) {
    if (!(traj.horizon > 0.0)) {
        throw std::invalid_argument("verify_bangbang: horizon must be positive");
    }
    if (bounds.channels() != traj.channel_count()) {
        throw std::invalid_argument("verify_bangbang: bounds arity mismatch");
    }
    traj.validate();

    BangBangReport report;
    report.tolerance_fraction = tolerance_fraction;
    report.switching_counts = switching_count(traj);

    bool ok = true;
    for (int j = 0; j < traj.channel_count(); ++j) {
        const double amp = bounds.amplitude[static_cast<std::size_t>(j)];
        const auto runs = maximal_runs(traj.channels[static_cast<std::size_t>(j)]);

        double off_vertex = 0.0;
        double longest_idle = 0.0;
        std::size_t idle_open = report.idle_intervals.size();
        bool in_idle = false;
        for (const Run& run : runs) {
            const bool off = std::abs(run.value) < amp * (1.0 - kVertexSlack);
            const bool idle = std::abs(run.value) <= amp * kIdleScale;
            if (off) off_vertex += run.end - run.begin;
            if (idle) {
                if (in_idle && report.idle_intervals.back().end == run.begin) {
                    report.idle_intervals.back().end = run.end;
                } else {
                    report.idle_intervals.push_back({j, run.begin, run.end});
                }
                in_idle = true;
            } else {
                in_idle = false;
            }
        }
        for (std::size_t q = idle_open; q < report.idle_intervals.size(); ++q) {
            longest_idle = std::max(longest_idle, report.idle_intervals[q].length());
        }

        const double fraction = off_vertex / traj.horizon;
        report.off_vertex_fraction.push_back(fraction);
        if (fraction > tolerance_fraction) ok = false;
        if (longest_idle > tolerance_fraction * traj.horizon) ok = false;
    }
    report.is_bang_bang = ok;
    return report;
}

std::vector<int> switching_count(const ControlTrajectory& traj) {
    std::vector<int> counts;
    counts.reserve(traj.channels.size());
    for (const ChannelSchedule& ch : traj.channels) {
        const auto runs = maximal_runs(ch);
        int count = 0;
        double prev = 0.0;
        bool have_prev = false;
        for (const Run& run : runs) {
            if (run.value == 0.0) {  // idle breaks the run
                have_prev = false;
                continue;
            }
            if (have_prev && std::signbit(run.value) != std::signbit(prev)) ++count;
            prev = run.value;
            have_prev = true;
        }
        counts.push_back(count);
    }
    return counts;
}

}  // namespace thermoctl
