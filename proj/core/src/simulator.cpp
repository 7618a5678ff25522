#include "thermoctl/simulator.hpp"

#include "thermoctl/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoctl {

TruncatedTrajectory simulate_truncated(const EigenBasis& basis, const ControlRegion& region,
                                       const ControlTrajectory& traj,
                                       std::span<const double> y0_coeffs, int sample_count) {
    const int M = basis.truncation();
    const int k = traj.channel_count();
    if (k > M) {
        throw std::invalid_argument("simulate_truncated: more channels than basis modes");
    }
    if (sample_count < 2) {
        throw std::invalid_argument("simulate_truncated: need at least two samples");
    }
    traj.validate();

    const Eigen::MatrixXd B = k > 0 ? coupling_matrix(basis, region, M, k)
                                    : Eigen::MatrixXd::Zero(M, 0);
    const Eigen::VectorXd rates =
        Eigen::Map<const Eigen::VectorXd>(basis.eigenvalues().data(), M);

    // sample grid: uniform nodes plus every switching time
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(sample_count) + 8);
    for (int s = 0; s < sample_count; ++s) {
        grid.push_back(traj.horizon * static_cast<double>(s) /
                       static_cast<double>(sample_count - 1));
    }
    for (double t : traj.switching_times()) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    TruncatedTrajectory out;
    out.times = grid;
    out.states.resize(static_cast<Eigen::Index>(grid.size()), M);

    Eigen::VectorXd z = Eigen::VectorXd::Zero(M);
    const int n0 = std::min<int>(M, static_cast<int>(y0_coeffs.size()));
    for (int i = 0; i < n0; ++i) z[i] = y0_coeffs[static_cast<std::size_t>(i)];

    Eigen::VectorXd v(k);
    double prev = 0.0;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const double t = grid[s];
        if (t > prev) {
            for (int j = 0; j < k; ++j) v[j] = traj.value_at(j, t);
            const Eigen::VectorXd drive = k > 0 ? Eigen::VectorXd(B * v)
                                                : Eigen::VectorXd::Zero(M);
            advance_segment(rates, t - prev, drive, z);
            prev = t;
        }
        out.states.row(static_cast<Eigen::Index>(s)) = z.transpose();
    }
    return out;
}

double target_distance(const Eigen::VectorXd& state, int m) {
    if (m < 0 || m > state.size()) {
        throw std::invalid_argument("target_distance: m outside 0..state dimension");
    }
    return state.head(m).norm();
}

}  // namespace thermoctl
