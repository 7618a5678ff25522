// genericity_scanner.hpp — numerical exploration of coupling genericity:
// where can a small ball be added to the control region so that every
// augmented coupling <chi_{omega ∪ B_rho(x)} xi_i, xi_j> clears a margin?

#pragma once

#include "thermoctl/spectral_domain.hpp"

#include <vector>

namespace thermoctl {

/// Rectangular (center, radius) sample grid.  Every sampled pair must keep
/// the closed ball inside the domain.
struct ScanGrid {
    std::vector<double> centers;
    std::vector<double> radii;
    double margin_threshold = 1e-6;
    int state_modes = 2;    // i ranges over 1..state_modes
    int control_modes = 1;  // j ranges over 1..max(state_modes, control_modes)

    /// Samples placed strictly inside the open ranges (midpoint spacing).
    /// Throws std::invalid_argument for empty counts, bad ranges, or pairs
    /// whose closed ball leaves the domain.
    static ScanGrid uniform(const DomainSpec& domain, double x_lo, double x_hi, int x_count,
                            double rho_lo, double rho_hi, int rho_count, double threshold,
                            int state_modes, int control_modes);
};

/// Average of xi_i xi_j over the ball B_rho(x) in unit-ball parametrization:
/// (1/rho) * integral_{x-rho}^{x+rho} xi_i xi_j.  Throws std::invalid_argument
/// when the closed ball is not inside the domain.
double ball_average_coupling(const EigenBasis& basis, int i, int j, double center, double radius);

/// Admissible ball placement: the center lies outside the region's closure,
/// the closed ball stays strictly inside the domain, and the ball misses the
/// region with positive margin (so the augmented integral splits over a
/// disjoint union).
bool ball_placement_admissible(double center, double radius, const DomainSpec& domain,
                               const ControlRegion& region);

/// <chi_omega xi_i, xi_j> plus the ball integral over B_rho(x); requires an
/// admissible placement (throws std::invalid_argument otherwise).
double augmented_coupling(const EigenBasis& basis, const ControlRegion& region, double center,
                          double radius, int i, int j);

struct ScanPoint {
    double center = 0.0;
    double radius = 0.0;
    double min_abs_coupling = 0.0;  // min over the scanned (i, j) pairs
};

struct ScanCandidate {
    double center = 0.0;
    double radius = 0.0;
    double margin = 0.0;  // min |augmented coupling| over the scanned pairs
};

struct ScanResult {
    std::vector<ScanPoint> admissible;
    /// Fraction of admissible points whose minimum magnitude is at or below
    /// the threshold (empirical stand-in for the zero variety's size).
    double below_threshold_fraction = 0.0;
    /// Admissible points clearing the threshold, best margin first.
    std::vector<ScanCandidate> certified;
};

/// Evaluate the augmented couplings over every admissible grid point.
/// Throws ScanError when no grid point is admissible.
ScanResult scan(const EigenBasis& basis, const ControlRegion& region, const ScanGrid& grid);

}  // namespace thermoctl
