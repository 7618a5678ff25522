// spectral_domain.hpp — 1-D interval domain, Dirichlet sine eigenbasis, control
// regions, and closed-form mode-coupling integrals <chi_omega xi_i, xi_j>.

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace thermoctl {

/// Spatial domain (0, L).
struct DomainSpec {
    double length = 1.0;
};

/// Open subinterval (a, b) of the domain.
struct Interval {
    double a = 0.0;
    double b = 0.0;

    double measure() const { return b - a; }
};

/// Truncated Dirichlet eigensystem of -d^2/dx^2 on (0, L):
///   lambda_i = (i pi / L)^2,   xi_i(x) = sqrt(2/L) sin(i pi x / L),  i = 1..M.
/// The spectrum is strictly increasing by construction, and every mode has
/// unit L^2 norm.
class EigenBasis {
public:
    /// Throws std::invalid_argument for nonpositive length or truncation < 1.
    static EigenBasis build_interval(double length, int truncation);

    const DomainSpec& domain() const { return domain_; }
    int truncation() const { return truncation_; }

    /// lambda_i, 1-based.  Throws std::invalid_argument out of range.
    double eigenvalue(int i) const;
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }

    /// xi_i(x), 1-based mode index.
    double mode(int i, double x) const;

private:
    EigenBasis() = default;

    DomainSpec domain_;
    int truncation_ = 0;
    std::vector<double> eigenvalues_;
};

/// Control region omega: a finite union of disjoint open subintervals of the
/// domain, kept in a canonical form (sorted, overlapping or touching pieces
/// merged, zero-length pieces rejected).  The full-domain flag is decided by
/// exact endpoint comparison after normalization.
class ControlRegion {
public:
    static ControlRegion full(const DomainSpec& domain);
    /// Throws std::invalid_argument for empty input, intervals outside the
    /// domain, or b <= a.
    static ControlRegion subintervals(const DomainSpec& domain, std::vector<Interval> intervals);

    bool is_full_domain() const { return full_; }
    const std::vector<Interval>& intervals() const { return intervals_; }
    double domain_length() const { return domain_length_; }

    double measure() const;
    /// x lies in the closed union [a_r, b_r].
    bool closure_contains(double x) const;

private:
    ControlRegion() = default;

    std::vector<Interval> intervals_;
    double domain_length_ = 0.0;
    bool full_ = false;
};

/// Integral of xi_i * xi_j over one interval (a, b), by the exact
/// product-to-sum antiderivative.
double mode_product_integral(const EigenBasis& basis, int i, int j, double a, double b);

/// <chi_omega xi_i, xi_j>, summed over the region's intervals.  Symmetric in
/// (i, j); equals the Kronecker delta when the region is the full domain.
/// Throws std::invalid_argument for indices outside 1..M.
double control_coupling(const EigenBasis& basis, const ControlRegion& region, int i, int j);

/// rows x cols matrix with entry (i, j) = control_coupling(i, j).
/// Throws std::invalid_argument when rows or cols exceeds the truncation.
Eigen::MatrixXd coupling_matrix(const EigenBasis& basis, const ControlRegion& region,
                                int rows, int cols);

}  // namespace thermoctl
