// structural_conditions.hpp — structural hypotheses behind existence and
// bang-bang synthesis: spectrum simplicity, coupling nonvanishing, Kalman
// rank, general position of the control box, and the existence classifier.

#pragma once

#include "thermoctl/reduced_system.hpp"
#include "thermoctl/spectral_domain.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thermoctl {

enum class ExistenceTag {
    kNonexistent,           // full domain, k < m, uncontrolled tail nonzero
    kExistsDiagonalReduced, // full domain, k < m, tail zero: first-k reduction
    kExistsDiagonalFull,    // full domain, k >= m: surplus channels inert
    kExistsProperRegion,    // proper region with the coupling conditions
    kAlreadyInTarget,       // z0 = 0
    kUnknown,               // proper region, both coupling conditions fail
};

const char* to_string(ExistenceTag tag);

struct ExistenceVerdict {
    ExistenceTag tag = ExistenceTag::kUnknown;
    std::string witness;  // human-readable justification / counterexample data
};

/// True iff some coefficient z0_i with channels < i <= m is nonzero (exact
/// comparison).  Vacuously false when channels >= m.
bool uncontrolled_tail_nonzero(const Eigen::VectorXd& z0, int channels);

/// Strictly increasing eigenvalues with relative gap > 1e-12.
bool simple_spectrum(std::span<const double> eigenvalues);
bool simple_spectrum(const EigenBasis& basis, int m);

struct CouplingCheck {
    bool holds = false;
    std::vector<std::pair<int, int>> failing;  // 1-based (i, j) with |B_ij| <= threshold
};

/// Every |B_ij| > threshold for i <= m, j <= k (all couplings active).
CouplingCheck coupling_nonvanishing(const Eigen::MatrixXd& B, double threshold);

/// Every |B_i1| > threshold (the weaker, first-column-only variant).
bool first_column_nonvanishing(const Eigen::MatrixXd& B, double threshold);

/// Numerical rank of the controllability matrix (B, AB, ..., A^{d-1}B) by
/// column-pivoted QR, with threshold d * eps * (largest column norm).
/// Throws std::invalid_argument on dimension mismatch.
int kalman_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// det(col, L col, ..., L^{m-1} col) for L = diag(lambda), via the scaled
/// Vandermonde product  prod_i col_i * prod_{a>b} (lambda_a - lambda_b).
double vandermonde_determinant(std::span<const double> lambda, std::span<const double> col);

/// Per-channel general position of the amplitude box with respect to
/// (diag(rates), B): channel j passes iff its column determinant
/// prod_i B_ij * prod_{a>b}(rate_a - rate_b) is nonzero at the declared
/// margin (every |B_ij| > threshold and the rate gaps resolve).
std::vector<bool> general_position(const Eigen::VectorXd& decay_rates,
                                   const Eigen::MatrixXd& B, double threshold);

/// Existence classification.  Full-domain instances follow the exact
/// dichotomy on k, m and the uncontrolled tail; proper regions are accepted
/// when either coupling condition holds at the threshold and are marked
/// kUnknown otherwise (no theory either way).
ExistenceVerdict classify_existence(const ReducedSystem& system, const ControlRegion& region,
                                    double threshold = 1e-9);

}  // namespace thermoctl
