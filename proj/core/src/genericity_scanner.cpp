#include "thermoctl/genericity_scanner.hpp"

#include "thermoctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thermoctl {

ScanGrid ScanGrid::uniform(const DomainSpec& domain, double x_lo, double x_hi, int x_count,
                           double rho_lo, double rho_hi, int rho_count, double threshold,
                           int state_modes, int control_modes) {
    if (x_count < 1 || rho_count < 1) {
        throw std::invalid_argument("ScanGrid: sample counts must be positive");
    }
    if (!(x_lo < x_hi) || !(rho_lo < rho_hi) || !(rho_lo > 0.0)) {
        throw std::invalid_argument("ScanGrid: ranges must be nonempty with positive radii");
    }
    if (state_modes < 1 || control_modes < 1) {
        throw std::invalid_argument("ScanGrid: mode counts must be positive");
    }
    ScanGrid grid;
    grid.margin_threshold = threshold;
    grid.state_modes = state_modes;
    grid.control_modes = control_modes;
    grid.centers.reserve((std::size_t)x_count);
    for (int i = 0; i < x_count; ++i) {
        grid.centers.push_back(x_lo + (i + 0.5) * (x_hi - x_lo) / x_count);
    }
    grid.radii.reserve((std::size_t)rho_count);
    for (int i = 0; i < rho_count; ++i) {
        grid.radii.push_back(rho_lo + (i + 0.5) * (rho_hi - rho_lo) / rho_count);
    }
    const double rho_max = grid.radii.back();
    for (double x : grid.centers) {
        if (!(x - rho_max > 0.0) || !(x + rho_max < domain.length)) {
            throw std::invalid_argument(
                "ScanGrid: a sampled ball leaves the domain; shrink the ranges");
        }
    }
    return grid;
}

double ball_average_coupling(const EigenBasis& basis, int i, int j, double center,
                             double radius) {
    const double L = basis.domain().length;
    if (!(radius > 0.0) || !(center - radius > 0.0) || !(center + radius < L)) {
        throw std::invalid_argument(
            "ball_average_coupling: closed ball must lie strictly inside the domain");
    }
    return mode_product_integral(basis, i, j, center - radius, center + radius) / radius;
}

bool ball_placement_admissible(double center, double radius, const DomainSpec& domain,
                               const ControlRegion& region) {
    if (!(radius > 0.0)) return false;
    if (region.closure_contains(center)) return false;
    if (!(center - radius > 0.0) || !(center + radius < domain.length)) return false;
    for (const Interval& iv : region.intervals()) {
        // positive distance between the ball and the region
        if (!(center + radius < iv.a || center - radius > iv.b)) return false;
    }
    return true;
}

double augmented_coupling(const EigenBasis& basis, const ControlRegion& region, double center,
                          double radius, int i, int j) {
    const DomainSpec& domain = basis.domain();
    if (!ball_placement_admissible(center, radius, domain, region)) {
        throw std::invalid_argument("augmented_coupling: ball placement is not admissible");
    }
    return control_coupling(basis, region, i, j) +
           mode_product_integral(basis, i, j, center - radius, center + radius);
}

ScanResult scan(const EigenBasis& basis, const ControlRegion& region, const ScanGrid& grid) {
    const int rows = grid.state_modes;
    const int cols = std::max(grid.state_modes, grid.control_modes);
    if (rows > basis.truncation() || cols > basis.truncation()) {
        throw std::invalid_argument("scan: mode range exceeds the basis truncation");
    }

    ScanResult result;
    std::size_t below = 0;
    for (double rho : grid.radii) {
        for (double x : grid.centers) {
            if (!ball_placement_admissible(x, rho, basis.domain(), region)) continue;
            double min_abs = std::numeric_limits<double>::infinity();
            for (int i = 1; i <= rows; ++i) {
                for (int j = 1; j <= cols; ++j) {
                    const double base = control_coupling(basis, region, i, j);
                    const double ball = mode_product_integral(basis, i, j, x - rho, x + rho);
                    min_abs = std::min(min_abs, std::abs(base + ball));
                }
            }
            result.admissible.push_back({x, rho, min_abs});
            if (min_abs <= grid.margin_threshold) {
                ++below;
            } else {
                result.certified.push_back({x, rho, min_abs});
            }
        }
    }
    if (result.admissible.empty()) {
        throw ScanError("scan: no admissible grid point (every sampled ball meets the region "
                        "or leaves the domain)");
    }
    result.below_threshold_fraction =
        static_cast<double>(below) / static_cast<double>(result.admissible.size());
    std::sort(result.certified.begin(), result.certified.end(),
              [](const ScanCandidate& a, const ScanCandidate& b) {
                  if (a.margin != b.margin) return a.margin > b.margin;
                  if (a.center != b.center) return a.center < b.center;
                  return a.radius < b.radius;
              });
    return result;
}

}  // namespace thermoctl
