#include "thermoctl/problem_spec.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace thermoctl {

namespace {

using nlohmann::json;

const json& require(const json& node, const std::string& key, const std::string& path) {
    if (!node.is_object()) throw SpecError(path, "expected an object");
    auto it = node.find(key);
    if (it == node.end()) throw SpecError(path + "." + key, "missing required field");
    return *it;
}

double number_at(const json& node, const std::string& path) {
    if (!node.is_number()) throw SpecError(path, "expected a number");
    return node.get<double>();
}

int int_at(const json& node, const std::string& path) {
    if (!node.is_number_integer()) throw SpecError(path, "expected an integer");
    return node.get<int>();
}

}  // namespace

EigenBasis ProblemSpec::make_basis() const {
    return EigenBasis::build_interval(domain_length, truncation);
}

ControlRegion ProblemSpec::make_region() const {
    const DomainSpec domain{domain_length};
    if (omega_full) return ControlRegion::full(domain);
    return ControlRegion::subintervals(domain, omega_intervals);
}

ReducedSystem ProblemSpec::make_system() const {
    return build_reduced(make_basis(), make_region(),
                         std::span<const double>(y0_coefficients.data(), y0_coefficients.size()),
                         m, k, ControlBounds{bounds});
}

ProblemSpec load_problem_spec_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw SpecError("$", std::string("malformed JSON: ") + err.what());
    }
    if (!doc.is_object()) throw SpecError("$", "top level must be an object");

    ProblemSpec spec;

    const json& domain = require(doc, "domain", "$");
    spec.domain_length = number_at(require(domain, "length", "domain"), "domain.length");
    if (!(spec.domain_length > 0.0)) throw SpecError("domain.length", "must be positive");

    const json& omega = require(doc, "omega", "$");
    if (omega.is_string()) {
        if (omega.get<std::string>() != "full") {
            throw SpecError("omega", "string form must be \"full\"");
        }
        spec.omega_full = true;
    } else if (omega.is_object()) {
        const json& ivs = require(omega, "intervals", "omega");
        if (!ivs.is_array() || ivs.empty()) {
            throw SpecError("omega.intervals", "expected a nonempty array of [a, b] pairs");
        }
        for (std::size_t r = 0; r < ivs.size(); ++r) {
            const std::string path = "omega.intervals[" + std::to_string(r) + "]";
            const json& pair = ivs[r];
            if (!pair.is_array() || pair.size() != 2) throw SpecError(path, "expected [a, b]");
            Interval iv{number_at(pair[0], path + "[0]"), number_at(pair[1], path + "[1]")};
            if (!(iv.b > iv.a)) throw SpecError(path, "requires a < b");
            if (iv.a < 0.0 || iv.b > spec.domain_length) {
                throw SpecError(path, "interval outside the domain");
            }
            spec.omega_intervals.push_back(iv);
        }
    } else {
        throw SpecError("omega", "expected \"full\" or {\"intervals\": [...]}");
    }

    const json& modes = require(doc, "modes", "$");
    spec.m = int_at(require(modes, "m", "modes"), "modes.m");
    spec.k = int_at(require(modes, "k", "modes"), "modes.k");
    if (spec.m < 2) throw SpecError("modes.m", "must be at least 2");
    if (spec.k < 1) throw SpecError("modes.k", "must be at least 1");
    if (modes.contains("M")) {
        spec.truncation = int_at(modes["M"], "modes.M");
    } else {
        spec.truncation = std::max(20, 4 * spec.m);
    }
    if (spec.truncation < std::max(spec.m, spec.k)) {
        throw SpecError("modes.M", "must be at least max(m, k)");
    }

    const json& bounds = require(doc, "bounds", "$");
    if (!bounds.is_array() || bounds.size() != static_cast<std::size_t>(spec.k)) {
        throw SpecError("bounds", "expected an array of k positive amplitudes");
    }
    for (std::size_t j = 0; j < bounds.size(); ++j) {
        const std::string path = "bounds[" + std::to_string(j) + "]";
        const double a = number_at(bounds[j], path);
        if (!(a > 0.0)) throw SpecError(path, "must be positive");
        spec.bounds.push_back(a);
    }

    const json& y0 = require(doc, "y0", "$");
    const json& coeffs = require(y0, "coefficients", "y0");
    if (!coeffs.is_array() || coeffs.empty()) {
        throw SpecError("y0.coefficients", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        spec.y0_coefficients.push_back(
            number_at(coeffs[i], "y0.coefficients[" + std::to_string(i) + "]"));
    }

    if (doc.contains("solver")) {
        const json& solver = doc["solver"];
        if (!solver.is_object()) throw SpecError("solver", "expected an object");
        if (solver.contains("tol")) {
            spec.solver.time_tolerance = number_at(solver["tol"], "solver.tol");
            if (!(spec.solver.time_tolerance > 0.0)) {
                throw SpecError("solver.tol", "must be positive");
            }
        }
        if (solver.contains("T_hi")) {
            spec.solver.initial_horizon = number_at(solver["T_hi"], "solver.T_hi");
            if (!(spec.solver.initial_horizon > 0.0)) {
                throw SpecError("solver.T_hi", "must be positive");
            }
        }
        if (solver.contains("seed")) {
            const json& seed = solver["seed"];
            if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
                throw SpecError("solver.seed", "expected an integer");
            }
            spec.solver.seed = seed.get<std::uint64_t>();
        }
        if (solver.contains("delta")) {
            spec.solver.structural_threshold = number_at(solver["delta"], "solver.delta");
            if (!(spec.solver.structural_threshold > 0.0)) {
                throw SpecError("solver.delta", "must be positive");
            }
        }
        if (solver.contains("horizon_cap")) {
            spec.solver.horizon_cap_factor =
                number_at(solver["horizon_cap"], "solver.horizon_cap");
            if (!(spec.solver.horizon_cap_factor >= 1.0)) {
                throw SpecError("solver.horizon_cap", "must be at least 1");
            }
        }
    }

    if (doc.contains("scan")) {
        const json& scan = doc["scan"];
        if (!scan.is_object()) throw SpecError("scan", "expected an object");
        ScanSettings settings;
        const json& xr = require(scan, "x_range", "scan");
        if (!xr.is_array() || xr.size() != 2) throw SpecError("scan.x_range", "expected [lo, hi]");
        settings.x_lo = number_at(xr[0], "scan.x_range[0]");
        settings.x_hi = number_at(xr[1], "scan.x_range[1]");
        const json& rr = require(scan, "rho_range", "scan");
        if (!rr.is_array() || rr.size() != 2) {
            throw SpecError("scan.rho_range", "expected [lo, hi]");
        }
        settings.rho_lo = number_at(rr[0], "scan.rho_range[0]");
        settings.rho_hi = number_at(rr[1], "scan.rho_range[1]");
        const json& grid = require(scan, "grid", "scan");
        if (!grid.is_array() || grid.size() != 2) {
            throw SpecError("scan.grid", "expected [x_count, rho_count]");
        }
        settings.x_count = int_at(grid[0], "scan.grid[0]");
        settings.rho_count = int_at(grid[1], "scan.grid[1]");
        if (settings.x_count < 1 || settings.rho_count < 1) {
            throw SpecError("scan.grid", "counts must be positive");
        }
        if (scan.contains("delta")) {
            settings.threshold = number_at(scan["delta"], "scan.delta");
            if (!(settings.threshold > 0.0)) throw SpecError("scan.delta", "must be positive");
        }
        if (!(settings.x_lo < settings.x_hi)) throw SpecError("scan.x_range", "requires lo < hi");
        if (!(settings.rho_lo > 0.0) || !(settings.rho_lo < settings.rho_hi)) {
            throw SpecError("scan.rho_range", "requires 0 < lo < hi");
        }
        spec.scan = settings;
    }

    return spec;
}

ProblemSpec load_problem_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("$", "cannot open spec file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_problem_spec_text(buffer.str());
}

}  // namespace thermoctl
