#include "thermoctl/structural_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace thermoctl {

const char* to_string(ExistenceTag tag) {
    switch (tag) {
        case ExistenceTag::kNonexistent: return "NONEXISTENT";
        case ExistenceTag::kExistsDiagonalReduced: return "EXISTS_DIAGONAL_REDUCED";
        case ExistenceTag::kExistsDiagonalFull: return "EXISTS_DIAGONAL_FULL";
        case ExistenceTag::kExistsProperRegion: return "EXISTS_PROPER_REGION";
        case ExistenceTag::kAlreadyInTarget: return "ALREADY_IN_TARGET";
        case ExistenceTag::kUnknown: return "UNKNOWN_EXISTENCE";
    }
    return "UNKNOWN_EXISTENCE";
}

bool uncontrolled_tail_nonzero(const Eigen::VectorXd& z0, int channels) {
    if (channels >= z0.size()) return false;  // vacuous
    for (Eigen::Index i = channels; i < z0.size(); ++i) {
        if (z0[i] != 0.0) return true;
    }
    return false;
}

bool simple_spectrum(std::span<const double> eigenvalues) {
    constexpr double kRelGap = 1e-12;
    for (std::size_t i = 0; i + 1 < eigenvalues.size(); ++i) {
        const double lo = eigenvalues[i];
        const double hi = eigenvalues[i + 1];
        const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
        if (!(hi - lo > kRelGap * scale)) return false;
    }
    return true;
}

bool simple_spectrum(const EigenBasis& basis, int m) {
    if (m < 1 || m > basis.truncation()) {
        throw std::invalid_argument("simple_spectrum: m outside 1..M");
    }
    return simple_spectrum(std::span<const double>(basis.eigenvalues().data(),
                                                   static_cast<std::size_t>(m)));
}

CouplingCheck coupling_nonvanishing(const Eigen::MatrixXd& B, double threshold) {
    CouplingCheck check;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
            if (!(std::abs(B(i, j)) > threshold)) {
                check.failing.emplace_back(static_cast<int>(i) + 1, static_cast<int>(j) + 1);
            }
        }
    }
    check.holds = check.failing.empty();
    return check;
}

bool first_column_nonvanishing(const Eigen::MatrixXd& B, double threshold) {
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        if (!(std::abs(B(i, 0)) > threshold)) return false;
    }
    return true;
}

int kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("kalman_rank: A must be square");
    }
    if (B.rows() != A.rows()) {
        throw std::invalid_argument("kalman_rank: B row count must match A");
    }
    const Eigen::Index d = A.rows();
    const Eigen::Index l = B.cols();
    Eigen::MatrixXd ctrl(d, d * l);
    Eigen::MatrixXd block = B;
    for (Eigen::Index p = 0; p < d; ++p) {
        ctrl.middleCols(p * l, l) = block;
        block = A * block;
    }
    const double max_col_norm = ctrl.colwise().norm().maxCoeff();
    if (max_col_norm == 0.0) return 0;
    const double tau =
        static_cast<double>(d) * std::numeric_limits<double>::epsilon() * max_col_norm;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrl);
    const auto& R = qr.matrixR();
    int rank = 0;
    for (Eigen::Index i = 0; i < std::min(d, d * l); ++i) {
        if (std::abs(R(i, i)) > tau) ++rank;
    }
    return rank;
}

double vandermonde_determinant(std::span<const double> lambda, std::span<const double> col) {
    if (lambda.size() != col.size()) {
        throw std::invalid_argument("vandermonde_determinant: size mismatch");
    }
    double det = 1.0;
    for (double c : col) det *= c;
    for (std::size_t a = 0; a < lambda.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            det *= lambda[a] - lambda[b];
        }
    }
    return det;
}

std::vector<bool> general_position(const Eigen::VectorXd& decay_rates,
                                   const Eigen::MatrixXd& B, double threshold) {
    if (decay_rates.size() != B.rows()) {
        throw std::invalid_argument("general_position: rate/coupling size mismatch");
    }
    const bool rates_ok = simple_spectrum(
        std::span<const double>(decay_rates.data(), static_cast<std::size_t>(decay_rates.size())));
    std::vector<bool> verdict(static_cast<std::size_t>(B.cols()), false);
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        bool column_ok = rates_ok;
        for (Eigen::Index i = 0; i < B.rows() && column_ok; ++i) {
            column_ok = std::abs(B(i, j)) > threshold;
        }
        verdict[static_cast<std::size_t>(j)] = column_ok;
    }
    return verdict;
}

namespace {

std::string tail_witness(const Eigen::VectorXd& z0, int k) {
    std::ostringstream oss;
    oss << "nonzero coefficients beyond the controlled block:";
    for (Eigen::Index i = k; i < z0.size(); ++i) {
        if (z0[i] != 0.0) oss << " z0[" << (i + 1) << "]=" << z0[i];
    }
    return oss.str();
}

}  // namespace

ExistenceVerdict classify_existence(const ReducedSystem& system, const ControlRegion& region,
                                    double threshold) {
    system.validate();
    const int m = system.target_modes;
    const int k = system.channels;

    if (system.initial_state.isZero(0.0)) {
        return {ExistenceTag::kAlreadyInTarget, "initial state already in the target subspace"};
    }

    if (region.is_full_domain()) {
        if (k < m && uncontrolled_tail_nonzero(system.initial_state, k)) {
            return {ExistenceTag::kNonexistent, tail_witness(system.initial_state, k)};
        }
        if (k < m) {
            return {ExistenceTag::kExistsDiagonalReduced,
                    "tail coefficients vanish; problem reduces to the first k modes"};
        }
        return {ExistenceTag::kExistsDiagonalFull,
                k > m ? "channels beyond the target block are inert" : ""};
    }

    const bool rates_simple = simple_spectrum(std::span<const double>(
        system.decay_rates.data(), static_cast<std::size_t>(system.decay_rates.size())));
    const CouplingCheck full_check = coupling_nonvanishing(system.coupling, threshold);
    const bool column_check = first_column_nonvanishing(system.coupling, threshold);
    if (rates_simple && (full_check.holds || column_check)) {
        std::string witness = full_check.holds
                                  ? "all couplings exceed the threshold"
                                  : "first coupling column exceeds the threshold";
        return {ExistenceTag::kExistsProperRegion, std::move(witness)};
    }
    std::ostringstream oss;
    if (!rates_simple) {
        oss << "unknown-existence: decay rates are not resolvably simple";
    } else {
        oss << "unknown-existence: both coupling conditions fail at threshold " << threshold
            << " (" << full_check.failing.size() << " vanishing pairs)";
    }
    return {ExistenceTag::kUnknown, oss.str()};
}

}  // namespace thermoctl
