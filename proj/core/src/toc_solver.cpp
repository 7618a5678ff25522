#include "thermoctl/toc_solver.hpp"

#include "thermoctl/errors.hpp"
#include "thermoctl/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace thermoctl {

const char* to_string(SolveMethod method) {
    switch (method) {
        case SolveMethod::kClosedForm: return "CLOSED_FORM";
        case SolveMethod::kBisection: return "BISECTION";
        case SolveMethod::kOracle: return "ORACLE";
    }
    return "BISECTION";
}

namespace {

// ============================================================================
// Support-function machinery.
//
// Everything below works in backward time tau = T - s on [0, T].  For a unit
// dual direction eta the per-channel switching function is the exponential
// polynomial
//     f_j(tau) = sum_i B_ij eta_i e^{-lambda_i tau},
// the support function of the zero-state reachable set is
//     h_T(eta) = sum_j a_j int_0^T |f_j(tau)| dtau,
// and its (sub)gradient is the contact point
//     x*(eta)_i = sum_j a_j B_ij int_0^T sgn(f_j) e^{-lambda_i tau} dtau.
// The margin g(eta) = h_T(eta) - <r, eta> with r = -e^{-AT} z0 is nonnegative
// for every unit eta exactly when the origin is reachable at horizon T.
//
// f_j has at most m - 1 real zeros; they are bracketed on a uniform grid of
// cells and refined, the magnitude integral is composite 16-node Gauss-
// Legendre between the located roots, and the sign-weighted kernels use the
// exact exponential antiderivative telescoped across root-free spans.
// ============================================================================

struct SupportWorkspace {
    const ReducedSystem* system = nullptr;
    double horizon = 0.0;
    int cells = 0;
    std::vector<double> node_tau;  // cells + 1 grid nodes
    Eigen::MatrixXd exp_node;      // (cells+1) x m: e^{-lambda_i tau_n}
    Eigen::MatrixXd exp_gl;        // (cells*16) x m: Gauss nodes per cell
    Eigen::VectorXd gl_weight;     // cells*16: Gauss weight times half-width
    Eigen::VectorXd target;        // r(T) = -e^{-AT} z0

    // per-evaluation scratch
    mutable Eigen::VectorXd f_node;
    mutable Eigen::VectorXd f_gl;
};

SupportWorkspace make_workspace(const ReducedSystem& system, double horizon, int cells) {
    SupportWorkspace ws;
    ws.system = &system;
    ws.horizon = horizon;
    ws.cells = cells;
    const int m = system.target_modes;
    const int gl_n = GaussLegendre16::n;

    ws.node_tau.resize(static_cast<std::size_t>(cells) + 1);
    for (int n = 0; n <= cells; ++n) {
        ws.node_tau[(std::size_t)n] = horizon * static_cast<double>(n) / cells;
    }
    ws.exp_node.resize(cells + 1, m);
    for (int n = 0; n <= cells; ++n) {
        for (int i = 0; i < m; ++i) {
            ws.exp_node(n, i) = std::exp(-system.decay_rates[i] * ws.node_tau[(std::size_t)n]);
        }
    }
    const double half = 0.5 * horizon / cells;
    ws.exp_gl.resize(cells * gl_n, m);
    ws.gl_weight.resize(cells * gl_n);
    for (int c = 0; c < cells; ++c) {
        const double mid = 0.5 * (ws.node_tau[(std::size_t)c] + ws.node_tau[(std::size_t)c + 1]);
        for (int q = 0; q < gl_n; ++q) {
            const double tq = mid + half * GaussLegendre16::node[q];
            for (int i = 0; i < m; ++i) {
                ws.exp_gl(c * gl_n + q, i) = std::exp(-system.decay_rates[i] * tq);
            }
            ws.gl_weight[c * gl_n + q] = GaussLegendre16::weight[q] * half;
        }
    }
    ws.target.resize(m);
    for (int i = 0; i < m; ++i) {
        ws.target[i] = -std::exp(-system.decay_rates[i] * horizon) * system.initial_state[i];
    }
    ws.f_node.resize(cells + 1);
    ws.f_gl.resize(cells * gl_n);
    return ws;
}

double eval_switching(const Eigen::VectorXd& rates, const Eigen::VectorXd& coeff, double tau) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
        acc += coeff[i] * std::exp(-rates[i] * tau);
    }
    return acc;
}

struct ChannelEval {
    std::vector<double> roots;      // interior sign changes of f_j, increasing tau
    double integral_abs = 0.0;      // int |f_j|
    Eigen::VectorXd signed_kernel;  // int sgn(f_j) e^{-lambda_i tau} per mode
    double scale = 0.0;             // max |f_j| over grid nodes
};

ChannelEval eval_channel(const SupportWorkspace& ws, const Eigen::VectorXd& coeff) {
    const auto& rates = ws.system->decay_rates;
    const int m = ws.system->target_modes;
    const int cells = ws.cells;
    const int gl_n = GaussLegendre16::n;

    ChannelEval ce;
    ce.signed_kernel = Eigen::VectorXd::Zero(m);

    ws.f_node.noalias() = ws.exp_node * coeff;
    ws.f_gl.noalias() = ws.exp_gl * coeff;
    ce.scale = ws.f_node.cwiseAbs().maxCoeff();
    if (ce.scale == 0.0) return ce;

    auto f = [&](double tau) { return eval_switching(rates, coeff, tau); };
    auto f_abs = [&](double tau) { return std::abs(eval_switching(rates, coeff, tau)); };

    // whole-range composite Gauss of |f|; cells containing a root get their
    // contribution replaced by root-split panels below
    ce.integral_abs = ws.gl_weight.dot(ws.f_gl.cwiseAbs());

    struct Root {
        double tau;
        int cell;
    };
    std::vector<Root> roots;
    for (int c = 0; c < cells; ++c) {
        const double fa = ws.f_node[c];
        const double fb = ws.f_node[c + 1];
        if (fa * fb < 0.0) {
            const double r =
                refine_root(f, ws.node_tau[(std::size_t)c], ws.node_tau[(std::size_t)c + 1], fa,
                            fb, 1e-15 * std::max(1.0, ws.horizon));
            roots.push_back({r, c});
        } else if (fa == 0.0 && c > 0 && ws.f_node[c - 1] * fb < 0.0) {
            roots.push_back({ws.node_tau[(std::size_t)c], c});
        }
    }
    for (const Root& root : roots) ce.roots.push_back(root.tau);

    // replace the Gauss contribution of every root cell by panels split at
    // the root, evaluated directly
    for (const Root& root : roots) {
        const int c = root.cell;
        double cell_quad = 0.0;
        for (int q = 0; q < gl_n; ++q) {
            cell_quad += ws.gl_weight[c * gl_n + q] * std::abs(ws.f_gl[c * gl_n + q]);
        }
        ce.integral_abs -= cell_quad;
        const double a = ws.node_tau[(std::size_t)c];
        const double b = ws.node_tau[(std::size_t)c + 1];
        if (root.tau > a) ce.integral_abs += gauss16(f_abs, a, root.tau);
        if (root.tau < b) ce.integral_abs += gauss16(f_abs, root.tau, b);
    }

    // sign-weighted kernels: exact antiderivative telescoped across the
    // root-free spans [0, r_1], [r_1, r_2], ..., [r_p, T]
    std::vector<double> cuts = {0.0};
    for (const Root& root : roots) {
        if (root.tau > cuts.back()) cuts.push_back(root.tau);
    }
    if (ws.horizon > cuts.back()) cuts.push_back(ws.horizon);

    for (std::size_t span = 0; span + 1 < cuts.size(); ++span) {
        const double a = cuts[span];
        const double b = cuts[span + 1];
        // span sign from the largest-magnitude grid node strictly inside,
        // falling back to a midpoint evaluation for sub-cell spans
        double sval = 0.0;
        double sbest = -1.0;
        const int n_lo = static_cast<int>(std::ceil(a / ws.horizon * cells - 1e-12)) + (span == 0 ? 0 : 1);
        for (int n = std::max(0, n_lo); n <= cells; ++n) {
            const double t = ws.node_tau[(std::size_t)n];
            if (t <= a || t >= b) {
                if (t >= b) break;
                continue;
            }
            if (std::abs(ws.f_node[n]) > sbest) {
                sbest = std::abs(ws.f_node[n]);
                sval = ws.f_node[n];
            }
        }
        if (sbest <= 0.0) sval = f(0.5 * (a + b));
        const double sigma = sval > 0.0 ? 1.0 : (sval < 0.0 ? -1.0 : 0.0);
        if (sigma == 0.0) continue;
        for (int i = 0; i < m; ++i) {
            const double ea = std::exp(-rates[i] * a);
            const double eb = std::exp(-rates[i] * b);
            ce.signed_kernel[i] += sigma * (ea - eb) / rates[i];
        }
    }
    return ce;
}

struct SupportEval {
    double value = 0.0;       // g(eta)
    double support = 0.0;     // h(eta)
    Eigen::VectorXd contact;  // x*(eta)
    Eigen::VectorXd gradient; // x*(eta) - r
};

SupportEval eval_direction(const SupportWorkspace& ws, const Eigen::VectorXd& eta) {
    const ReducedSystem& sys = *ws.system;
    SupportEval ev;
    ev.contact = Eigen::VectorXd::Zero(sys.target_modes);
    for (int j = 0; j < sys.channels; ++j) {
        const Eigen::VectorXd coeff = sys.coupling.col(j).cwiseProduct(eta);
        const ChannelEval ce = eval_channel(ws, coeff);
        const double amp = sys.bounds.amplitude[(std::size_t)j];
        ev.support += amp * ce.integral_abs;
        ev.contact += amp * sys.coupling.col(j).cwiseProduct(ce.signed_kernel);
    }
    ev.value = ev.support - ws.target.dot(eta);
    ev.gradient = ev.contact - ws.target;
    return ev;
}

struct DescentOutcome {
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd eta;
    double tangent_norm = std::numeric_limits<double>::infinity();
};

// Projected gradient descent of g on the unit sphere, Barzilai-Borwein step
// with an Armijo backtracking safeguard.  stagnation_rel stops a run whose
// value no longer improves relative to its magnitude.
DescentOutcome sphere_descent(const SupportWorkspace& ws, Eigen::VectorXd eta, int max_iter,
                              double tangent_tol, double stagnation_rel) {
    DescentOutcome out;
    if (eta.norm() < 1e-12) return out;
    eta.normalize();
    SupportEval ev = eval_direction(ws, eta);
    Eigen::VectorXd tangent(eta.size()), trial(eta.size());
    Eigen::VectorXd prev_eta = eta, prev_tangent = Eigen::VectorXd::Zero(eta.size());
    bool have_prev = false;
    int stagnant = 0;
    for (int it = 0; it < max_iter; ++it) {
        tangent = ev.gradient - ev.gradient.dot(eta) * eta;
        const double tn = tangent.norm();
        out.tangent_norm = tn;
        if (tn <= tangent_tol) break;

        double step = 1.0 / std::max(tn, 1.0);
        if (have_prev) {
            const Eigen::VectorXd ds = eta - prev_eta;
            const Eigen::VectorXd dy = tangent - prev_tangent;
            const double sy = ds.dot(dy);
            if (sy > 1e-300) step = std::clamp(ds.squaredNorm() / sy, 1e-12, 1e6);
        }
        prev_eta = eta;
        prev_tangent = tangent;

        bool accepted = false;
        const double value_before = ev.value;
        for (int bt = 0; bt < 40 && !accepted; ++bt) {
            trial = eta - step * tangent;
            const double norm = trial.norm();
            if (norm < 1e-12) {
                step *= 0.5;
                continue;
            }
            trial /= norm;
            SupportEval tev = eval_direction(ws, trial);
            if (tev.value <= ev.value - 1e-4 * step * tn * tn) {
                eta.swap(trial);
                ev = std::move(tev);
                accepted = true;
            } else {
                step *= 0.5;
                if (step < 1e-18) break;
            }
        }
        have_prev = accepted;
        if (!accepted) break;
        if (value_before - ev.value <= stagnation_rel * (1.0 + std::abs(ev.value))) {
            if (++stagnant >= 3) break;
        } else {
            stagnant = 0;
        }
    }
    out.value = ev.value;
    out.eta = eta;
    return out;
}

struct MinimizeSettings {
    bool full_starts = true;
    int max_iterations = 300;
    double tangent_tol = 1e-9;
    double stagnation_rel = 1e-13;
};

MarginResult minimize_margin(const SupportWorkspace& ws, const SolverOptions& options,
                             const Eigen::VectorXd* warm, const MinimizeSettings& settings) {
    const int m = ws.system->target_modes;
    std::vector<Eigen::VectorXd> starts;
    if (warm != nullptr && warm->size() == m && warm->norm() > 1e-12) {
        starts.push_back(warm->normalized());
    }
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[i] = 1.0;
        starts.push_back(e);
        starts.push_back(-e);
    }
    if (ws.target.norm() > 1e-300) {
        starts.push_back(ws.target.normalized());
        starts.push_back(-ws.target.normalized());
    }
    UniformSource rng(options.seed);
    const int n_random = settings.full_starts ? options.random_starts : 4;
    int produced = 0;
    while (produced < n_random) {
        Eigen::VectorXd v(m);
        for (int i = 0; i < m; ++i) v[i] = 2.0 * rng.next() - 1.0;
        if (v.norm() < 1e-3) continue;
        starts.push_back(v.normalized());
        ++produced;
    }

    // scouting pass from every start, full budget only for the leaders
    const int scout_iter = std::min(15, settings.max_iterations);
    std::vector<DescentOutcome> scouted;
    scouted.reserve(starts.size());
    int non_converged = 0;
    for (const Eigen::VectorXd& s : starts) {
        DescentOutcome run =
            sphere_descent(ws, s, scout_iter, settings.tangent_tol, settings.stagnation_rel);
        if (!std::isfinite(run.value)) {
            ++non_converged;
            continue;
        }
        scouted.push_back(std::move(run));
    }
    if (scouted.empty()) {
        std::ostringstream oss;
        oss << "sphere descent failed to produce a finite margin after " << starts.size()
            << " starts (" << non_converged << " diverged)";
        throw NumericError(oss.str());
    }
    std::stable_sort(scouted.begin(), scouted.end(),
                     [](const DescentOutcome& a, const DescentOutcome& b) {
                         return a.value < b.value;
                     });
    DescentOutcome best = scouted.front();
    const std::size_t leaders = std::min<std::size_t>(scouted.size(), 6);
    for (std::size_t s = 0; s < leaders; ++s) {
        if (scouted[s].tangent_norm <= settings.tangent_tol) {
            if (scouted[s].value < best.value) best = scouted[s];
            continue;
        }
        DescentOutcome run = sphere_descent(ws, scouted[s].eta, settings.max_iterations,
                                            settings.tangent_tol, settings.stagnation_rel);
        if (run.value < best.value) best = run;
    }
    return {best.value, best.eta};
}

// ---------------------------------------------------------------------------
// trajectory assembly helpers
// ---------------------------------------------------------------------------

// Append a segment, merging zero-length pieces and equal adjacent values.
void push_segment(ChannelSchedule& ch, double t_end, double value, double min_len) {
    if (t_end - ch.times.back() <= min_len) {
        if (!ch.values.empty() && t_end > ch.times.back()) ch.times.back() = t_end;
        return;
    }
    if (!ch.values.empty() && ch.values.back() == value) {
        ch.times.back() = t_end;
        return;
    }
    ch.times.push_back(t_end);
    ch.values.push_back(value);
}

ChannelSchedule constant_channel(double horizon, double value) {
    return ChannelSchedule{{0.0, horizon}, {value}};
}

// One-switch vertex control +amp then -amp whose decoupled-mode contribution
//   int_0^T e^{-rate (T-s)} alpha(s) ds
// equals the requested target; the switch time has a closed form.
ChannelSchedule one_switch_channel(double horizon, double amp, double rate, double target) {
    const double decay = std::exp(-rate * horizon);
    const double q = 0.5 * (target * rate / amp + decay + 1.0);
    double tau;  // forward switch time
    if (q <= 0.0) {
        tau = 0.0;
    } else if (q >= 1.0) {
        tau = horizon;
    } else {
        tau = horizon + std::log(q) / rate;
        tau = std::clamp(tau, 0.0, horizon);
    }
    const double min_len = 1e-13 * horizon;
    if (tau <= min_len) return constant_channel(horizon, -amp);
    if (tau >= horizon - min_len) return constant_channel(horizon, amp);
    return ChannelSchedule{{0.0, tau, horizon}, {amp, -amp}};
}

enum class ChannelKind { kPontryagin, kScalar, kZero };

}  // namespace

// ============================================================================
// public operations
// ============================================================================

double diagonal_mode_time(double rate, double bound, double z0) {
    if (!(rate > 0.0) || !(bound > 0.0)) {
        throw std::invalid_argument("diagonal_mode_time: rate and bound must be positive");
    }
    if (z0 == 0.0) return 0.0;
    return std::log1p(rate * std::abs(z0) / bound) / rate;
}

SolveReport diagonal_synthesis(const ReducedSystem& system) {
    system.validate();
    const int m = system.target_modes;
    const int k = system.channels;
    const int active = std::min(m, k);

    for (int i = active; i < m; ++i) {
        if (system.initial_state[i] != 0.0) {
            throw std::logic_error(
                "diagonal_synthesis: uncontrolled tail coefficient is nonzero; "
                "no optimal control exists for this instance");
        }
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(system.coupling(i, j) - expect) > 1e-12) {
                throw std::logic_error(
                    "diagonal_synthesis: coupling is not the full-domain identity block");
            }
        }
    }

    std::vector<double> mode_time(static_cast<std::size_t>(active), 0.0);
    double optimal = 0.0;
    for (int i = 0; i < active; ++i) {
        mode_time[(std::size_t)i] =
            diagonal_mode_time(system.decay_rates[i], system.bounds.amplitude[(std::size_t)i],
                               system.initial_state[i]);
        optimal = std::max(optimal, mode_time[(std::size_t)i]);
    }

    SolveReport report;
    report.method = SolveMethod::kClosedForm;
    report.optimal_time = optimal;
    report.control.horizon = optimal;
    if (optimal == 0.0) {
        report.control.channels.assign(static_cast<std::size_t>(k), ChannelSchedule{{0.0}, {}});
        return report;
    }
    for (int j = 0; j < k; ++j) {
        if (j >= active || system.initial_state[j] == 0.0) {
            report.control.channels.push_back(constant_channel(optimal, 0.0));
            continue;
        }
        const double amp = system.bounds.amplitude[(std::size_t)j];
        const double v = system.initial_state[j] > 0.0 ? -amp : amp;
        const double t_on = mode_time[(std::size_t)j];
        ChannelSchedule ch{{0.0}, {}};
        push_segment(ch, t_on, v, 0.0);
        if (t_on < optimal) push_segment(ch, optimal, 0.0, 0.0);
        report.control.channels.push_back(std::move(ch));
    }
    report.control.validate();
    report.terminal_error = propagate(system, report.control, optimal).norm();
    return report;
}

MarginResult feasibility_margin(const ReducedSystem& system, double horizon,
                                const SolverOptions& options) {
    system.validate();
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("feasibility_margin: horizon must be positive");
    }
    const SupportWorkspace ws = make_workspace(system, horizon, options.bracket_grid);
    // the margin value converges quadratically in the tangent residual, so a
    // modest residual tolerance already pins the value to ~1e-12
    MinimizeSettings settings;
    settings.full_starts = true;
    settings.max_iterations = options.descent_max_iterations;
    settings.tangent_tol = 1e-6;
    return minimize_margin(ws, options, nullptr, settings);
}

namespace {

// Core of extract_bangbang; `system` may be an internal sub-system with a
// single mode, so no structural validation here.
ControlTrajectory extract_bangbang_impl(const ReducedSystem& system, double horizon,
                                        const Eigen::VectorXd& direction,
                                        const SolverOptions& options) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("extract_bangbang: horizon must be positive");
    }
    if (direction.size() != system.target_modes) {
        throw std::invalid_argument("extract_bangbang: direction dimension mismatch");
    }
    const int m = system.target_modes;
    const int k = system.channels;
    const double thr = options.structural_threshold;
    const SupportWorkspace ws = make_workspace(system, horizon, options.bracket_grid);

    std::vector<ChannelEval> evals;
    evals.reserve((std::size_t)k);
    double max_scale = 0.0;
    for (int j = 0; j < k; ++j) {
        evals.push_back(eval_channel(ws, system.coupling.col(j).cwiseProduct(direction)));
        max_scale = std::max(max_scale, evals.back().scale);
    }

    // Channels whose switching function carries no information (identically
    // zero against this dual direction) cannot be signed by the maximum
    // principle.  When such a channel exclusively drives a single mode the
    // steering problem decouples and a one-switch vertex control lands that
    // mode exactly; this is precisely the full-domain diagonal situation.
    std::vector<ChannelKind> kind((std::size_t)k, ChannelKind::kPontryagin);
    std::vector<int> private_mode((std::size_t)k, -1);
    for (int j = 0; j < k; ++j) {
        std::vector<int> driven;
        for (int i = 0; i < m; ++i) {
            if (std::abs(system.coupling(i, j)) > thr) driven.push_back(i);
        }
        bool exclusive = driven.size() == 1;
        if (exclusive) {
            for (int other = 0; other < k && exclusive; ++other) {
                if (other != j && std::abs(system.coupling(driven[0], other)) > thr) {
                    exclusive = false;
                }
            }
        }
        const bool silent = evals[(std::size_t)j].scale <= 1e-10 * max_scale || max_scale == 0.0;
        if (exclusive) {
            kind[(std::size_t)j] = ChannelKind::kScalar;
            private_mode[(std::size_t)j] = driven[0];
        } else if (driven.empty() || silent) {
            kind[(std::size_t)j] = ChannelKind::kZero;
        }
    }

    const double min_len = 1e-13 * horizon;
    auto build = [&](double flip) {
        ControlTrajectory traj;
        traj.horizon = horizon;
        traj.channels.resize((std::size_t)k);
        for (int j = 0; j < k; ++j) {
            const double amp = system.bounds.amplitude[(std::size_t)j];
            switch (kind[(std::size_t)j]) {
                case ChannelKind::kZero:
                    traj.channels[(std::size_t)j] = constant_channel(horizon, 0.0);
                    break;
                case ChannelKind::kScalar: {
                    const int i = private_mode[(std::size_t)j];
                    const double rate = system.decay_rates[i];
                    const double needed = -std::exp(-rate * horizon) *
                                          system.initial_state[i] / system.coupling(i, j);
                    traj.channels[(std::size_t)j] =
                        one_switch_channel(horizon, amp, rate, needed);
                    break;
                }
                case ChannelKind::kPontryagin: {
                    const Eigen::VectorXd coeff =
                        system.coupling.col(j).cwiseProduct(direction);
                    const auto& roots = evals[(std::size_t)j].roots;  // increasing tau
                    // tau-panels [0,r1],...,[rp,T] map to s-segments in
                    // reverse; sample the sign strictly inside each panel
                    std::vector<double> cuts = {0.0};
                    for (double r : roots) cuts.push_back(r);
                    cuts.push_back(horizon);
                    ChannelSchedule ch{{0.0}, {}};
                    for (std::size_t p = cuts.size() - 1; p-- > 0;) {
                        const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
                        const double sgn =
                            eval_switching(system.decay_rates, coeff, mid) >= 0.0 ? 1.0 : -1.0;
                        push_segment(ch, horizon - cuts[p], flip * sgn * amp, min_len);
                    }
                    if (ch.values.empty()) {
                        traj.channels[(std::size_t)j] = constant_channel(horizon, 0.0);
                    } else {
                        ch.times.back() = horizon;
                        traj.channels[(std::size_t)j] = std::move(ch);
                    }
                    break;
                }
            }
        }
        traj.validate();
        return traj;
    };

    const bool any_pmp = std::any_of(kind.begin(), kind.end(), [](ChannelKind c) {
        return c == ChannelKind::kPontryagin;
    });
    ControlTrajectory plus = build(1.0);
    if (!any_pmp) return plus;
    ControlTrajectory minus = build(-1.0);
    const double norm_plus = propagate(system, plus, horizon).norm();
    const double norm_minus = propagate(system, minus, horizon).norm();
    return norm_minus < norm_plus ? minus : plus;
}

SolveReport min_time_bisect_impl(const ReducedSystem& system, const SolverOptions& options);

}  // namespace

ControlTrajectory extract_bangbang(const ReducedSystem& system, double horizon,
                                   const Eigen::VectorXd& direction,
                                   const SolverOptions& options) {
    system.validate();
    return extract_bangbang_impl(system, horizon, direction, options);
}

SolveReport min_time_bisect(const ReducedSystem& system, const SolverOptions& options) {
    system.validate();
    const int m = system.target_modes;
    const int k = system.channels;

    SolveReport report;
    report.method = SolveMethod::kBisection;
    if (system.initial_state.isZero(0.0)) {
        report.control.horizon = 0.0;
        report.control.channels.assign((std::size_t)k, ChannelSchedule{{0.0}, {}});
        return report;
    }

    // A mode no channel can drive never reaches zero: certify infeasibility
    // structurally instead of waiting for the doubling cap (at large
    // horizons the decayed residual underflows and would fake a feasible
    // margin).
    for (int i = 0; i < m; ++i) {
        if (system.coupling.row(i).cwiseAbs().maxCoeff() <= options.structural_threshold &&
            system.initial_state[i] != 0.0) {
            std::ostringstream oss;
            oss << "infeasible at every horizon: mode " << (i + 1)
                << " carries nonzero initial data but no channel couples to it";
            throw InfeasibleHorizonError(oss.str());
        }
    }

    // Inert modes (no actuation and no data) stay at zero under every
    // control but flatten the margin landscape: the dual sphere gains
    // directions of exact zero margin that starve the extraction of sign
    // information.  Drop them and solve the active sub-system; the control
    // is unchanged by the embedding.
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
        if (system.coupling.row(i).cwiseAbs().maxCoeff() > options.structural_threshold ||
            system.initial_state[i] != 0.0) {
            active.push_back(i);
        }
    }
    if (static_cast<int>(active.size()) < m) {
        ReducedSystem sub;
        sub.target_modes = static_cast<int>(active.size());
        sub.channels = k;
        sub.decay_rates.resize(sub.target_modes);
        sub.initial_state.resize(sub.target_modes);
        sub.coupling.resize(sub.target_modes, k);
        for (int r = 0; r < sub.target_modes; ++r) {
            sub.decay_rates[r] = system.decay_rates[active[(std::size_t)r]];
            sub.initial_state[r] = system.initial_state[active[(std::size_t)r]];
            sub.coupling.row(r) = system.coupling.row(active[(std::size_t)r]);
        }
        sub.bounds = system.bounds;
        SolveReport reduced = min_time_bisect_impl(sub, options);
        if (reduced.dual_direction) {
            Eigen::VectorXd embedded = Eigen::VectorXd::Zero(m);
            for (int r = 0; r < sub.target_modes; ++r) {
                embedded[active[(std::size_t)r]] = (*reduced.dual_direction)[r];
            }
            reduced.dual_direction = std::move(embedded);
        }
        reduced.terminal_error = propagate(system, reduced.control, reduced.optimal_time).norm();
        return reduced;
    }

    return min_time_bisect_impl(system, options);
}

namespace {

// Doubling bracket, margin bisection, dual polish, and sign extraction; the
// caller has already screened for trivial, infeasible, and inert modes.
SolveReport min_time_bisect_impl(const ReducedSystem& system, const SolverOptions& options) {
    SolveReport report;
    report.method = SolveMethod::kBisection;

    const double cap = options.initial_horizon * options.horizon_cap_factor;
    MinimizeSettings coarse;
    coarse.full_starts = false;
    coarse.max_iterations = 80;
    coarse.tangent_tol = 1e-6;
    MinimizeSettings first;
    first.full_starts = true;
    first.max_iterations = options.descent_max_iterations;
    first.tangent_tol = 1e-6;

    double t_lo = 0.0;
    double t_hi = options.initial_horizon;
    SupportWorkspace ws = make_workspace(system, t_hi, options.bracket_grid);
    MarginResult hi = minimize_margin(ws, options, nullptr, first);
    while (hi.value < 0.0) {
        t_lo = t_hi;
        t_hi *= 2.0;
        if (t_hi > cap * (1.0 + 1e-12)) {
            std::ostringstream oss;
            oss << "no feasible horizon found while doubling up to the cap " << cap
                << " (last margin " << hi.value << ")";
            throw InfeasibleHorizonError(oss.str());
        }
        ws = make_workspace(system, t_hi, options.bracket_grid);
        hi = minimize_margin(ws, options, &hi.direction, coarse);
    }

    for (int it = 0; it < 300; ++it) {
        const bool width_ok = (t_hi - t_lo) <= options.time_tolerance;
        const bool margin_ok = hi.value <= options.margin_target;
        if (width_ok && margin_ok) break;
        if ((t_hi - t_lo) <= 1e-15 * std::max(1.0, t_hi)) break;
        const double mid = 0.5 * (t_lo + t_hi);
        ws = make_workspace(system, mid, options.bracket_grid);
        const MarginResult mm = minimize_margin(ws, options, &hi.direction, coarse);
        if (mm.value >= 0.0) {
            t_hi = mid;
            hi = mm;
        } else {
            t_lo = mid;
        }
    }

    // final polish of the dual direction on the feasible side
    ws = make_workspace(system, t_hi, options.bracket_grid);
    MinimizeSettings tight;
    tight.full_starts = true;
    tight.max_iterations = 3 * options.descent_max_iterations;
    tight.tangent_tol = std::min(1e-9, options.margin_target * 0.1);
    tight.stagnation_rel = 1e-16;
    const MarginResult polished = minimize_margin(ws, options, &hi.direction, tight);

    report.optimal_time = t_hi;
    report.feasibility_margin = polished.value;
    report.dual_direction = polished.direction;
    report.control = extract_bangbang_impl(system, t_hi, polished.direction, options);
    report.terminal_error = propagate(system, report.control, t_hi).norm();
    return report;
}

}  // namespace

BruteForceReport brute_force_min_time(const ReducedSystem& system, int segments,
                                      std::span<const double> horizon_grid) {
    system.validate();
    const int m = system.target_modes;
    const int k = system.channels;
    if (segments < 1 || segments > 8 || k > 2) {
        throw std::invalid_argument(
            "brute_force_min_time: combinatorial budget is k <= 2, segments <= 8");
    }

    BruteForceReport report;
    if (system.initial_state.isZero(0.0)) {
        report.time = 0.0;
        return report;
    }

    const int vertex_count = 1 << k;
    std::vector<Eigen::VectorXd> drives((std::size_t)vertex_count);
    for (int s = 0; s < vertex_count; ++s) {
        Eigen::VectorXd v(k);
        for (int j = 0; j < k; ++j) {
            const double amp = system.bounds.amplitude[(std::size_t)j];
            v[j] = (s >> j) & 1 ? amp : -amp;
        }
        drives[(std::size_t)s] = system.coupling * v;
    }

    const long total_codes = 1L << (k * segments);
    const double max_amp =
        *std::max_element(system.bounds.amplitude.begin(), system.bounds.amplitude.end());
    const double max_col = system.coupling.colwise().norm().maxCoeff();

    std::vector<double> grid(horizon_grid.begin(), horizon_grid.end());
    std::sort(grid.begin(), grid.end());
    const int mask = vertex_count - 1;
    Eigen::VectorXd decay(m), gain(m), z(m);
    for (double horizon : grid) {
        if (!(horizon > 0.0)) {
            throw std::invalid_argument("brute_force_min_time: horizons must be positive");
        }
        const double dt = horizon / segments;
        for (int i = 0; i < m; ++i) {
            const double lh = system.decay_rates[i] * dt;
            decay[i] = std::exp(-lh);
            gain[i] = dt * expm1_ratio(lh);
        }
        double best = std::numeric_limits<double>::infinity();
        for (long code = 0; code < total_codes; ++code) {
            z = system.initial_state;
            long c = code;
            for (int seg = 0; seg < segments; ++seg) {
                const auto& drive = drives[(std::size_t)(c & mask)];
                c >>= k;
                for (int i = 0; i < m; ++i) z[i] = decay[i] * z[i] + gain[i] * drive[i];
            }
            best = std::min(best, z.norm());
        }
        const double coarse = std::max(1e-9, (m - 1) * max_amp * max_col * horizon / segments);
        report.horizons.push_back(horizon);
        report.best_terminal_norms.push_back(best);
        report.coarse_tolerances.push_back(coarse);
        if (!report.time && best <= coarse) report.time = horizon;
    }
    return report;
}

}  // namespace thermoctl
