#include "thermoctl/reduced_system.hpp"

#include "thermoctl/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoctl {

void ReducedSystem::validate() const {
    if (target_modes < 2) {
        throw std::invalid_argument("ReducedSystem: at least two target modes required");
    }
    if (channels < 1) {
        throw std::invalid_argument("ReducedSystem: at least one control channel required");
    }
    if (decay_rates.size() != target_modes || initial_state.size() != target_modes ||
        coupling.rows() != target_modes || coupling.cols() != channels ||
        bounds.channels() != channels) {
        throw std::invalid_argument("ReducedSystem: inconsistent dimensions");
    }
    double prev = 0.0;
    for (int i = 0; i < target_modes; ++i) {
        if (!(decay_rates[i] > prev)) {
            throw std::invalid_argument(
                "ReducedSystem: decay rates must be positive and strictly increasing");
        }
        prev = decay_rates[i];
    }
    for (double a : bounds.amplitude) {
        if (!(a > 0.0)) {
            throw std::invalid_argument("ReducedSystem: bounds must be positive");
        }
    }
}

double ChannelSchedule::value_at(double t) const {
    if (values.empty()) return 0.0;
    if (t <= times.front()) return values.front();
    // right-closed segments: value on (times[l], times[l+1]]
    for (std::size_t l = 0; l + 1 < times.size(); ++l) {
        if (t <= times[l + 1]) return values[l];
    }
    return values.back();
}

double ControlTrajectory::value_at(int channel, double t) const {
    return channels.at(static_cast<std::size_t>(channel)).value_at(t);
}

std::vector<double> ControlTrajectory::switching_times() const {
    std::vector<double> out;
    for (const ChannelSchedule& ch : channels) {
        for (std::size_t l = 1; l + 1 < ch.times.size(); ++l) out.push_back(ch.times[l]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void ControlTrajectory::validate() const {
    if (horizon < 0.0) throw std::invalid_argument("ControlTrajectory: negative horizon");
    for (const ChannelSchedule& ch : channels) {
        if (horizon == 0.0) {
            if (!ch.values.empty()) {
                throw std::invalid_argument("ControlTrajectory: zero horizon with segments");
            }
            continue;
        }
        if (ch.times.size() != ch.values.size() + 1) {
            throw std::invalid_argument("ControlTrajectory: times/values size mismatch");
        }
        if (ch.times.front() != 0.0 || ch.times.back() != horizon) {
            throw std::invalid_argument("ControlTrajectory: times must span [0, horizon]");
        }
        for (std::size_t l = 0; l + 1 < ch.times.size(); ++l) {
            if (!(ch.times[l] < ch.times[l + 1])) {
                throw std::invalid_argument("ControlTrajectory: times must strictly increase");
            }
        }
    }
}

Eigen::VectorXd project_initial(std::span<const double> y0_coeffs, int m) {
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(m);
    const int n = std::min<int>(m, static_cast<int>(y0_coeffs.size()));
    for (int i = 0; i < n; ++i) z0[i] = y0_coeffs[static_cast<std::size_t>(i)];
    return z0;
}

ReducedSystem build_reduced(const EigenBasis& basis, const ControlRegion& region,
                            std::span<const double> y0_coeffs, int m, int k,
                            ControlBounds bounds) {
    if (m < 2) {
        throw std::invalid_argument("build_reduced: at least two target modes required");
    }
    if (k < 1) {
        throw std::invalid_argument("build_reduced: at least one channel required");
    }
    if (m > basis.truncation() || k > basis.truncation()) {
        throw std::invalid_argument("build_reduced: m and k must not exceed the truncation");
    }
    if (bounds.channels() != k) {
        throw std::invalid_argument("build_reduced: bounds arity must equal k");
    }
    ReducedSystem system;
    system.target_modes = m;
    system.channels = k;
    system.decay_rates =
        Eigen::Map<const Eigen::VectorXd>(basis.eigenvalues().data(), m);
    system.coupling = coupling_matrix(basis, region, m, k);
    system.initial_state = project_initial(y0_coeffs, m);
    system.bounds = std::move(bounds);
    system.validate();
    return system;
}

void advance_segment(const Eigen::VectorXd& decay_rates, double h,
                     const Eigen::VectorXd& drive, Eigen::VectorXd& state) {
    for (Eigen::Index i = 0; i < state.size(); ++i) {
        const double lh = decay_rates[i] * h;
        state[i] = std::exp(-lh) * state[i] + h * expm1_ratio(lh) * drive[i];
    }
}

Eigen::VectorXd propagate(const ReducedSystem& system, const ControlTrajectory& traj, double t) {
    if (t < 0.0 || t > traj.horizon) {
        throw std::invalid_argument("propagate: time outside [0, horizon]");
    }
    Eigen::VectorXd z = system.initial_state;
    if (t == 0.0) return z;

    // global breakpoints: union of channel switching times, clipped at t
    std::vector<double> cuts = traj.switching_times();
    cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());

    Eigen::VectorXd v(system.channels);
    double prev = 0.0;
    for (double cut : cuts) {
        if (cut > t) break;
        if (cut <= prev) continue;
        for (int j = 0; j < system.channels; ++j) {
            v[j] = traj.value_at(j, cut);  // constant on (prev, cut]
        }
        const Eigen::VectorXd drive = system.coupling * v;
        advance_segment(system.decay_rates, cut - prev, drive, z);
        prev = cut;
    }
    return z;
}

}  // namespace thermoctl
