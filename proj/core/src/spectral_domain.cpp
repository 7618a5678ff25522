#include "thermoctl/spectral_domain.hpp"

#include "thermoctl/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thermoctl {

EigenBasis EigenBasis::build_interval(double length, int truncation) {
    if (!(length > 0.0)) {
        throw std::invalid_argument("EigenBasis: domain length must be positive");
    }
    if (truncation < 1) {
        throw std::invalid_argument("EigenBasis: truncation must be at least 1");
    }
    EigenBasis basis;
    basis.domain_ = DomainSpec{length};
    basis.truncation_ = truncation;
    basis.eigenvalues_.resize(static_cast<std::size_t>(truncation));
    for (int i = 1; i <= truncation; ++i) {
        const double w = static_cast<double>(i) * std::numbers::pi / length;
        basis.eigenvalues_[static_cast<std::size_t>(i - 1)] = w * w;
    }
    return basis;
}

double EigenBasis::eigenvalue(int i) const {
    if (i < 1 || i > truncation_) {
        throw std::invalid_argument("EigenBasis: mode index " + std::to_string(i) +
                                    " outside 1.." + std::to_string(truncation_));
    }
    return eigenvalues_[static_cast<std::size_t>(i - 1)];
}

double EigenBasis::mode(int i, double x) const {
    if (i < 1 || i > truncation_) {
        throw std::invalid_argument("EigenBasis: mode index out of range");
    }
    const double L = domain_.length;
    return std::sqrt(2.0 / L) * sin_pi(static_cast<double>(i) * x / L);
}

ControlRegion ControlRegion::full(const DomainSpec& domain) {
    if (!(domain.length > 0.0)) {
        throw std::invalid_argument("ControlRegion: domain length must be positive");
    }
    ControlRegion region;
    region.domain_length_ = domain.length;
    region.intervals_ = {Interval{0.0, domain.length}};
    region.full_ = true;
    return region;
}

ControlRegion ControlRegion::subintervals(const DomainSpec& domain,
                                          std::vector<Interval> intervals) {
    if (!(domain.length > 0.0)) {
        throw std::invalid_argument("ControlRegion: domain length must be positive");
    }
    if (intervals.empty()) {
        throw std::invalid_argument("ControlRegion: at least one interval required");
    }
    for (const Interval& iv : intervals) {
        if (!(iv.b > iv.a)) {
            throw std::invalid_argument("ControlRegion: interval must have positive length");
        }
        if (iv.a < 0.0 || iv.b > domain.length) {
            throw std::invalid_argument("ControlRegion: interval outside the domain");
        }
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& u, const Interval& v) { return u.a < v.a; });
    // merge overlapping or touching pieces into canonical form
    std::vector<Interval> merged;
    merged.push_back(intervals.front());
    for (std::size_t r = 1; r < intervals.size(); ++r) {
        if (intervals[r].a <= merged.back().b) {
            merged.back().b = std::max(merged.back().b, intervals[r].b);
        } else {
            merged.push_back(intervals[r]);
        }
    }
    ControlRegion region;
    region.domain_length_ = domain.length;
    region.intervals_ = std::move(merged);
    region.full_ = region.intervals_.size() == 1 && region.intervals_[0].a == 0.0 &&
                   region.intervals_[0].b == domain.length;
    return region;
}

double ControlRegion::measure() const {
    double total = 0.0;
    for (const Interval& iv : intervals_) total += iv.measure();
    return total;
}

bool ControlRegion::closure_contains(double x) const {
    for (const Interval& iv : intervals_) {
        if (x >= iv.a && x <= iv.b) return true;
    }
    return false;
}

double mode_product_integral(const EigenBasis& basis, int i, int j, double a, double b) {
    const double L = basis.domain().length;
    const double ua = a / L;
    const double ub = b / L;
    if (i == j) {
        const double n = 2.0 * static_cast<double>(i);
        return (b - a) / L -
               (sin_pi(n * ub) - sin_pi(n * ua)) / (n * std::numbers::pi);
    }
    const double d = static_cast<double>(i - j);
    const double s = static_cast<double>(i + j);
    const double term_d = (sin_pi(d * ub) - sin_pi(d * ua)) / d;
    const double term_s = (sin_pi(s * ub) - sin_pi(s * ua)) / s;
    return (term_d - term_s) / std::numbers::pi;
}

double control_coupling(const EigenBasis& basis, const ControlRegion& region, int i, int j) {
    const int M = basis.truncation();
    if (i < 1 || i > M || j < 1 || j > M) {
        throw std::invalid_argument("control_coupling: mode index outside 1..M");
    }
    double total = 0.0;
    for (const Interval& iv : region.intervals()) {
        total += mode_product_integral(basis, i, j, iv.a, iv.b);
    }
    return total;
}

Eigen::MatrixXd coupling_matrix(const EigenBasis& basis, const ControlRegion& region,
                                int rows, int cols) {
    const int M = basis.truncation();
    if (rows < 1 || cols < 1 || rows > M || cols > M) {
        throw std::invalid_argument("coupling_matrix: requested block exceeds truncation");
    }
    Eigen::MatrixXd B(rows, cols);
    for (int i = 1; i <= rows; ++i) {
        for (int j = 1; j <= cols; ++j) {
            B(i - 1, j - 1) = control_coupling(basis, region, i, j);
        }
    }
    return B;
}

}  // namespace thermoctl
