#include "thermoctl/report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace thermoctl {

namespace {

using ordered_json = nlohmann::ordered_json;

// Round through a %.Ng decimal representation so serialized reports are
// stable across runs regardless of last-ulp solver noise.
double rounded(double x, int digits) {
    if (digits >= 17 || !std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

ordered_json vector_json(const Eigen::VectorXd& v, int digits) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(rounded(v[i], digits));
    return arr;
}

ordered_json matrix_json(const Eigen::MatrixXd& m, int digits) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(rounded(m(i, j), digits));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json verdict_json(const ExistenceVerdict& verdict) {
    return ordered_json{{"tag", to_string(verdict.tag)}, {"witness", verdict.witness}};
}

ordered_json bangbang_json(const BangBangReport& report, int digits) {
    ordered_json idle = ordered_json::array();
    for (const IdleInterval& iv : report.idle_intervals) {
        idle.push_back(ordered_json{{"channel", iv.channel + 1},
                                    {"begin", rounded(iv.begin, digits)},
                                    {"end", rounded(iv.end, digits)}});
    }
    ordered_json fractions = ordered_json::array();
    for (double f : report.off_vertex_fraction) fractions.push_back(rounded(f, digits));
    return ordered_json{{"is_bang_bang", report.is_bang_bang},
                        {"off_vertex_fraction", std::move(fractions)},
                        {"idle_intervals", std::move(idle)},
                        {"switching_counts", report.switching_counts},
                        {"tolerance_fraction", rounded(report.tolerance_fraction, digits)}};
}

ordered_json solve_json(const SolveReport& report, int digits) {
    ordered_json doc{{"method", to_string(report.method)},
                     {"optimal_time", rounded(report.optimal_time, digits)},
                     {"feasibility_margin", rounded(report.feasibility_margin, digits)},
                     {"terminal_error", rounded(report.terminal_error, digits)}};
    if (report.dual_direction) {
        doc["dual_direction"] = vector_json(*report.dual_direction, digits);
    } else {
        doc["dual_direction"] = nullptr;
    }
    return doc;
}

ordered_json oracle_json(const BruteForceReport& report, int digits) {
    ordered_json doc;
    doc["method"] = to_string(SolveMethod::kOracle);
    if (report.time) {
        doc["time"] = rounded(*report.time, digits);
    } else {
        doc["time"] = nullptr;
    }
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < report.horizons.size(); ++i) {
        rows.push_back(ordered_json{{"horizon", rounded(report.horizons[i], digits)},
                                    {"best_norm", rounded(report.best_terminal_norms[i], digits)},
                                    {"tolerance", rounded(report.coarse_tolerances[i], digits)}});
    }
    doc["grid"] = std::move(rows);
    return doc;
}

ordered_json artifacts_json(const SolveArtifacts& artifacts, int digits) {
    ordered_json doc;
    doc["verdict"] = verdict_json(artifacts.verdict);
    doc["solve"] = artifacts.solve ? solve_json(*artifacts.solve, digits) : ordered_json(nullptr);
    doc["bang_bang"] =
        artifacts.bangbang ? bangbang_json(*artifacts.bangbang, digits) : ordered_json(nullptr);
    if (artifacts.simulated_target_distance) {
        doc["simulation"] =
            ordered_json{{"modes", artifacts.simulated_modes},
                         {"target_distance", rounded(*artifacts.simulated_target_distance, digits)}};
    } else {
        doc["simulation"] = nullptr;
    }
    doc["oracle"] =
        artifacts.oracle ? oracle_json(*artifacts.oracle, digits) : ordered_json(nullptr);
    return doc;
}

}  // namespace

ConditionReport build_condition_report(const ReducedSystem& system, const ControlRegion& region,
                                       double threshold) {
    ConditionReport report;
    report.m = system.target_modes;
    report.k = system.channels;
    report.threshold = threshold;
    report.verdict = classify_existence(system, region, threshold);
    report.simple_spectrum = simple_spectrum(std::span<const double>(
        system.decay_rates.data(), static_cast<std::size_t>(system.decay_rates.size())));
    report.coupling_check = coupling_nonvanishing(system.coupling, threshold);
    report.first_column_nonvanishing = first_column_nonvanishing(system.coupling, threshold);
    report.general_position = general_position(system.decay_rates, system.coupling, threshold);
    report.kalman_rank =
        kalman_rank(Eigen::MatrixXd(system.decay_rates.asDiagonal()), system.coupling);
    report.coupling = system.coupling;
    return report;
}

std::string to_json(const ConditionReport& report, int digits) {
    ordered_json failing = ordered_json::array();
    for (const auto& [i, j] : report.coupling_check.failing) {
        failing.push_back(ordered_json::array({i, j}));
    }
    ordered_json gp = ordered_json::array();
    for (bool v : report.general_position) gp.push_back(v);
    const bool gp_all =
        std::all_of(report.general_position.begin(), report.general_position.end(),
                    [](bool v) { return v; });
    ordered_json doc{
        {"modes", ordered_json{{"m", report.m}, {"k", report.k}}},
        {"verdict", verdict_json(report.verdict)},
        {"conditions",
         ordered_json{{"simple_spectrum", report.simple_spectrum},
                      {"coupling_nonvanishing",
                       ordered_json{{"holds", report.coupling_check.holds},
                                    {"failing_pairs", std::move(failing)},
                                    {"threshold", report.threshold}}},
                      {"first_column_nonvanishing", report.first_column_nonvanishing},
                      {"general_position",
                       ordered_json{{"per_channel", std::move(gp)}, {"holds", gp_all}}},
                      {"kalman_rank",
                       ordered_json{{"rank", report.kalman_rank},
                                    {"full", report.kalman_rank == report.m}}}}},
        {"coupling_matrix", matrix_json(report.coupling, digits)}};
    return doc.dump(2);
}

std::string to_json(const SolveArtifacts& artifacts, int digits) {
    return artifacts_json(artifacts, digits).dump(2);
}

std::string compare_json(const SolveArtifacts& full_domain, const SolveArtifacts& proper_region,
                         int m, int k, int digits) {
    ordered_json doc{{"modes", ordered_json{{"m", m}, {"k", k}}},
                     {"full_domain", artifacts_json(full_domain, digits)},
                     {"proper_region", artifacts_json(proper_region, digits)}};
    return doc.dump(2);
}

void write_control_csv(std::ostream& out, const ControlTrajectory& traj, int uniform_samples) {
    const int k = traj.channel_count();
    out << "t";
    for (int j = 1; j <= k; ++j) out << ",alpha_" << j;
    out << "\n";
    if (traj.horizon <= 0.0) return;

    std::vector<double> grid;
    for (int s = 0; s < uniform_samples; ++s) {
        grid.push_back(traj.horizon * static_cast<double>(s) /
                       static_cast<double>(uniform_samples - 1));
    }
    for (double t : traj.switching_times()) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    char buf[64];
    for (double t : grid) {
        std::snprintf(buf, sizeof(buf), "%.17g", t);
        out << buf;
        for (int j = 0; j < k; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", traj.value_at(j, t));
            out << ',' << buf;
        }
        out << "\n";
    }
}

ControlTrajectory read_control_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("read_control_csv: missing header");
    }
    int k = 0;
    for (char c : line) {
        if (c == ',') ++k;
    }
    if (k < 1) throw std::invalid_argument("read_control_csv: no control columns");

    std::vector<double> times;
    std::vector<std::vector<double>> values(static_cast<std::size_t>(k));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) break;
        times.push_back(std::strtod(cell.c_str(), nullptr));
        for (int j = 0; j < k; ++j) {
            if (!std::getline(row, cell, ',')) {
                throw std::invalid_argument("read_control_csv: short row");
            }
            values[static_cast<std::size_t>(j)].push_back(std::strtod(cell.c_str(), nullptr));
        }
    }

    ControlTrajectory traj;
    if (times.empty()) {
        traj.horizon = 0.0;
        traj.channels.assign(static_cast<std::size_t>(k), ChannelSchedule{{0.0}, {}});
        return traj;
    }
    traj.horizon = times.back();
    // samples carry the value of the segment that ends at their time, and
    // every switching time is a sample, so value changes between adjacent
    // samples pin the switch at the earlier sample exactly
    for (int j = 0; j < k; ++j) {
        const auto& col = values[static_cast<std::size_t>(j)];
        ChannelSchedule ch;
        ch.times.push_back(0.0);
        double current = col.front();
        for (std::size_t r = 1; r < col.size(); ++r) {
            if (col[r] != current) {
                ch.times.push_back(times[r - 1]);
                ch.values.push_back(current);
                current = col[r];
            }
        }
        ch.times.push_back(traj.horizon);
        ch.values.push_back(current);
        traj.channels.push_back(std::move(ch));
    }
    traj.validate();
    return traj;
}

void write_trajectory_csv(std::ostream& out, const TruncatedTrajectory& traj) {
    const int M = traj.mode_count();
    out << "t";
    for (int i = 1; i <= M; ++i) out << ",y_" << i;
    out << "\n";
    char buf[64];
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[s]);
        out << buf;
        for (int i = 0; i < M; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g",
                          traj.states(static_cast<Eigen::Index>(s), i));
            out << ',' << buf;
        }
        out << "\n";
    }
}

void write_scan_csv(std::ostream& out, const ScanResult& result) {
    out << "x,rho,min_abs_coupling\n";
    char buf[64];
    for (const ScanPoint& p : result.admissible) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.center);
        out << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", p.radius);
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", p.min_abs_coupling);
        out << ',' << buf << "\n";
    }
}

std::string scan_candidates_json(const ScanResult& result, double threshold,
                                 std::size_t max_candidates) {
    ordered_json candidates = ordered_json::array();
    for (std::size_t i = 0; i < result.certified.size() && i < max_candidates; ++i) {
        const ScanCandidate& c = result.certified[i];
        candidates.push_back(ordered_json{
            {"center", c.center}, {"radius", c.radius}, {"margin", c.margin}});
    }
    ordered_json doc{{"threshold", threshold},
                     {"admissible_points", result.admissible.size()},
                     {"below_threshold_fraction", result.below_threshold_fraction},
                     {"certified_count", result.certified.size()},
                     {"candidates", std::move(candidates)}};
    return doc.dump(2);
}

}  // namespace thermoctl
