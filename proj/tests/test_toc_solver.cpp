#include <doctest.h>

#include "thermoctl/bangbang_analysis.hpp"
#include "thermoctl/errors.hpp"
#include "thermoctl/math_util.hpp"
#include "thermoctl/structural_conditions.hpp"
#include "thermoctl/toc_solver.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace thermoctl;

namespace {

constexpr double kPiSq = std::numbers::pi * std::numbers::pi;
// frozen oracle values: log1p(rate |z0| / a) / rate
constexpr double kTimeMode1 = 0.24174933562316522;  // rate pi^2, unit data
constexpr double kTimeMode2 = 0.09374157218006694;  // rate 4 pi^2, unit data

ReducedSystem demo_diagonal() {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    const double y0[] = {1.0, 1.0};
    return build_reduced(basis, full, y0, 2, 2, ControlBounds{{1.0, 1.0}});
}

ReducedSystem scalarized(double rate, double amp, double z0) {
    ReducedSystem sys;
    sys.target_modes = 2;
    sys.channels = 1;
    sys.decay_rates = Eigen::Vector2d(rate, rate + 1.0);
    sys.coupling = Eigen::MatrixXd(2, 1);
    sys.coupling << 1.0, 0.0;
    sys.initial_state = Eigen::Vector2d(z0, 0.0);
    sys.bounds = ControlBounds{{amp}};
    sys.validate();
    return sys;
}

}  // namespace

TEST_CASE("diagonal mode time formula") {
    const double e = std::numbers::e;
    CHECK(diagonal_mode_time(1.0, 1.0, e - 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(diagonal_mode_time(1.0, 1.0, 0.0) == 0.0);
    CHECK(diagonal_mode_time(kPiSq, 1.0, 1.0) == doctest::Approx(kTimeMode1).epsilon(1e-15));
    CHECK(diagonal_mode_time(kPiSq, 1.0, -1.0) == doctest::Approx(kTimeMode1).epsilon(1e-15));

    // independent check: integrate the closed-loop ODE to its zero crossing
    CHECK(std::abs(diagonal_mode_time(kPiSq, 1.0, 1.0) -
                   oracles::zero_crossing_time(kPiSq, 1.0, 1.0)) <= 1e-9);
    CHECK(std::abs(diagonal_mode_time(0.8, 2.0, -1.3) -
                   oracles::zero_crossing_time(0.8, 2.0, -1.3)) <= 1e-9);

    CHECK_THROWS_AS(diagonal_mode_time(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(diagonal_mode_time(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("diagonal synthesis on the two-mode demo") {
    const SolveReport report = diagonal_synthesis(demo_diagonal());
    CHECK(report.method == SolveMethod::kClosedForm);
    CHECK(report.optimal_time == doctest::Approx(kTimeMode1).epsilon(1e-14));
    CHECK(report.terminal_error <= 1e-10);
    CHECK_FALSE(report.dual_direction.has_value());

    // channel 2 runs until its own mode time, then idles
    const ChannelSchedule& ch2 = report.control.channels[1];
    REQUIRE(ch2.values.size() == 2);
    CHECK(ch2.values[0] == -1.0);
    CHECK(ch2.values[1] == 0.0);
    CHECK(ch2.times[1] == doctest::Approx(kTimeMode2).epsilon(1e-14));
    // channel 1 is active throughout
    CHECK(report.control.channels[0].values == std::vector<double>{-1.0});
}

TEST_CASE("diagonal synthesis sign conventions and degenerate cases") {
    ReducedSystem sys = demo_diagonal();
    sys.initial_state = Eigen::Vector2d(-1.0, 0.0);
    const SolveReport report = diagonal_synthesis(sys);
    CHECK(report.optimal_time == doctest::Approx(kTimeMode1).epsilon(1e-14));
    CHECK(report.control.channels[0].values == std::vector<double>{1.0});  // pushes up
    CHECK(report.control.channels[1].values == std::vector<double>{0.0});  // zero data idles

    sys.initial_state.setZero();
    const SolveReport trivial = diagonal_synthesis(sys);
    CHECK(trivial.optimal_time == 0.0);
    CHECK(trivial.control.horizon == 0.0);

    // nonexistent instance: uncontrolled tail data
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    const double xi2[] = {0.0, 1.0};
    const ReducedSystem bad = build_reduced(basis, full, xi2, 2, 1, ControlBounds{{1.0}});
    CHECK_THROWS_AS(diagonal_synthesis(bad), std::logic_error);

    // coupled system: not the identity block
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    const double y0[] = {1.0, 1.0};
    const ReducedSystem coupled = build_reduced(basis, window, y0, 2, 1, ControlBounds{{1.0}});
    CHECK_THROWS_AS(diagonal_synthesis(coupled), std::logic_error);
}

TEST_CASE("surplus channels are idle when k > m") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    const double y0[] = {1.0, 1.0};
    const ReducedSystem sys =
        build_reduced(basis, full, y0, 2, 3, ControlBounds{{1.0, 1.0, 1.0}});
    const SolveReport report = diagonal_synthesis(sys);
    CHECK(report.optimal_time == doctest::Approx(kTimeMode1).epsilon(1e-14));
    CHECK(report.control.channels[2].values == std::vector<double>{0.0});
}

TEST_CASE("feasibility margin on the scalarized instance") {
    const double e = std::numbers::e;
    const ReducedSystem sys = scalarized(1.0, 1.0, e - 1.0);

    // at the exact optimal horizon the margin sits on zero
    const MarginResult at_opt = feasibility_margin(sys, 1.0);
    CHECK(std::abs(at_opt.value) <= 1e-8);

    // and below it the deficit has a closed form: (1 - 1/e) - e^{-1/2}(e - 1)
    const MarginResult early = feasibility_margin(sys, 0.5);
    const double expected =
        (1.0 - std::exp(-0.5)) - std::exp(-0.5) * (e - 1.0);
    CHECK(early.value == doctest::Approx(expected).epsilon(1e-7));
    CHECK(early.value < 0.0);

    CHECK_THROWS_AS(feasibility_margin(sys, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(feasibility_margin(sys, -1.0), std::invalid_argument);
}

TEST_CASE("margin is nonnegative for zero initial data") {
    ReducedSystem sys = demo_diagonal();
    sys.initial_state.setZero();
    CHECK(feasibility_margin(sys, 0.5).value >= 0.0);
}

TEST_CASE("bisection matches the closed form on the diagonal demo") {
    const ReducedSystem sys = demo_diagonal();
    const SolveReport closed = diagonal_synthesis(sys);
    const SolveReport bisected = min_time_bisect(sys);
    CHECK(std::abs(bisected.optimal_time - closed.optimal_time) <= 1e-4);
    CHECK(bisected.terminal_error <= 1e-6);
    CHECK(bisected.method == SolveMethod::kBisection);
    REQUIRE(bisected.dual_direction.has_value());
    CHECK(bisected.dual_direction->norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bisection agrees with the closed form on random diagonal instances") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    UniformSource rng(1618);
    for (int trial = 0; trial < 6; ++trial) {
        const int m = trial % 2 == 0 ? 2 : 3;
        const int k = 1 + trial % 3;  // includes k < m, k = m, k > m shapes
        std::vector<double> y0(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < std::min(m, k); ++i) {
            y0[(std::size_t)i] = rng.next(-1.0, 1.0);
        }
        std::vector<double> amp(static_cast<std::size_t>(k));
        for (double& v : amp) v = rng.next(0.5, 2.0);
        const ReducedSystem sys = build_reduced(basis, full, y0, m, k, ControlBounds{amp});

        const SolveReport closed = diagonal_synthesis(sys);
        if (closed.optimal_time == 0.0) continue;
        const SolveReport bisected = min_time_bisect(sys);
        CHECK(std::abs(bisected.optimal_time - closed.optimal_time) <= 1e-4);
        CHECK(bisected.terminal_error <= 1e-6);
    }
}

TEST_CASE("bisection handles the reduced diagonal case (k < m, zero tail)") {
    // the uncontrolled mode carries no data: it is inert, and the solver
    // must still locate the optimum and land exactly
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    const double y0[] = {0.8, 0.0};
    const ReducedSystem sys = build_reduced(basis, full, y0, 2, 1, ControlBounds{{1.0}});
    const SolveReport closed = diagonal_synthesis(sys);
    const SolveReport bisected = min_time_bisect(sys);
    CHECK(std::abs(bisected.optimal_time - closed.optimal_time) <= 1e-4);
    CHECK(bisected.terminal_error <= 1e-6);
}

TEST_CASE("bisection handles an inert mode on a proper region") {
    // mode 3 has a vanishing coupling row for the single channel and no
    // initial data; the active two-mode subproblem must solve cleanly
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion half = ControlRegion::subintervals(basis.domain(), {{0.0, 0.5}});
    const double y0[] = {1.0, 0.5, 0.0};
    const ReducedSystem sys = build_reduced(basis, half, y0, 3, 1, ControlBounds{{1.0}});
    CHECK(std::abs(sys.coupling(2, 0)) <= 1e-12);

    const SolveReport report = min_time_bisect(sys);
    CHECK(report.optimal_time > 0.0);
    CHECK(report.terminal_error <= 1e-6);
    REQUIRE(report.dual_direction.has_value());
    CHECK((*report.dual_direction)[2] == 0.0);  // inert coordinate
    CHECK(report.dual_direction->norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bisection on a nonexistent instance reports infeasibility") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion full = ControlRegion::full(basis.domain());
    const double xi2[] = {0.0, 1.0};
    const ReducedSystem sys = build_reduced(basis, full, xi2, 2, 1, ControlBounds{{1.0}});
    CHECK_THROWS_AS(min_time_bisect(sys), InfeasibleHorizonError);
}

TEST_CASE("bisection on a proper region lands on the target") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    const double y0[] = {1.0, 0.0};
    const ReducedSystem sys = build_reduced(basis, window, y0, 2, 1, ControlBounds{{1.0}});
    const SolveReport report = min_time_bisect(sys);
    CHECK(report.optimal_time > 0.0);
    CHECK(report.terminal_error <= 1e-6);

    // oracle bracket: the exhaustive vertex search fires within a grid step
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) {
        grid.push_back(report.optimal_time * (0.25 + 1.75 * (i + 1) / 40.0));
    }
    const BruteForceReport oracle = brute_force_min_time(sys, 6, grid);
    REQUIRE(oracle.time.has_value());
    const double step = grid[1] - grid[0];
    CHECK(*oracle.time <= report.optimal_time + step + oracle.coarse_tolerances[0]);
}

TEST_CASE("extraction on the scalar instance is the constant vertex control") {
    const double e = std::numbers::e;
    const ReducedSystem sys = scalarized(1.0, 1.0, e - 1.0);
    Eigen::VectorXd eta(2);
    eta << -1.0, 0.0;
    const ControlTrajectory traj = extract_bangbang(sys, 1.0, eta);
    REQUIRE(traj.channels.size() == 1);
    CHECK(traj.channels[0].values == std::vector<double>{-1.0});  // no switching
    CHECK(switching_count(traj)[0] == 0);
    CHECK(propagate(sys, traj, 1.0).norm() <= 1e-12);
}

TEST_CASE("extraction emits vertex values only") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    const double y0[] = {0.7, -0.4, 0.9};
    const ReducedSystem sys = build_reduced(basis, window, y0, 3, 2, ControlBounds{{1.0, 0.5}});
    const SolveReport report = min_time_bisect(sys);
    for (int j = 0; j < 2; ++j) {
        const double amp = sys.bounds.amplitude[(std::size_t)j];
        for (double v : report.control.channels[(std::size_t)j].values) {
            CHECK(std::abs(std::abs(v) - amp) <= 1e-12 * amp);
        }
        // switching bound: at most m - 1 sign changes per channel
        CHECK(switching_count(report.control)[(std::size_t)j] <= 2);
    }
    CHECK(report.terminal_error <= 1e-6);
}

TEST_CASE("brute force oracle") {
    SUBCASE("scalar self-check around the known optimum") {
        const ReducedSystem sys = scalarized(1.0, 1.0, std::numbers::e - 1.0);
        std::vector<double> grid;
        for (int i = 0; i < 41; ++i) grid.push_back(0.5 + 0.025 * i);  // step 0.025 around 1.0
        const BruteForceReport report = brute_force_min_time(sys, 6, grid);
        REQUIRE(report.time.has_value());
        CHECK(std::abs(*report.time - 1.0) <= 0.025 + 0.1);  // one step + coarse slack
    }

    SUBCASE("zero initial data needs no time") {
        ReducedSystem sys = scalarized(1.0, 1.0, 0.5);
        sys.initial_state.setZero();
        const std::vector<double> grid = {0.5, 1.0};
        CHECK(brute_force_min_time(sys, 4, grid).time == 0.0);
    }

    SUBCASE("combinatorial budget is enforced") {
        const ReducedSystem sys = demo_diagonal();
        const std::vector<double> grid = {1.0};
        CHECK_THROWS_AS(brute_force_min_time(sys, 9, grid), std::invalid_argument);
        const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
        const ControlRegion full = ControlRegion::full(basis.domain());
        const double y0[] = {1.0, 1.0, 1.0};
        const ReducedSystem wide =
            build_reduced(basis, full, y0, 3, 3, ControlBounds{{1.0, 1.0, 1.0}});
        CHECK_THROWS_AS(brute_force_min_time(wide, 6, grid), std::invalid_argument);
    }
}

TEST_CASE("margin value agrees with a dense-quadrature recomputation at its minimizer") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    UniformSource rng(8088);
    for (int trial = 0; trial < 4; ++trial) {
        const double y0[] = {rng.next(-1.0, 1.0), rng.next(-1.0, 1.0), rng.next(-1.0, 1.0)};
        const ReducedSystem sys =
            build_reduced(basis, window, y0, 3, 2, ControlBounds{{1.0, 0.7}});
        const double horizon = rng.next(0.05, 0.5);
        const MarginResult margin = feasibility_margin(sys, horizon);

        // independent route: g(eta) = int sum_j a_j |(B^T e^{-A(T-s)} eta)_j| ds
        //                           - <-e^{-AT} z0, eta>
        // (the integrand has kinks at the switching roots, so the oracle
        // quadrature runs chunked to 4096 panels)
        const Eigen::VectorXd& eta = margin.direction;
        double support = 0.0;
        for (int j = 0; j < 2; ++j) {
            auto f_abs = [&](double s) {
                double f = 0.0;
                for (int i = 0; i < 3; ++i) {
                    f += sys.coupling(i, j) * eta[i] *
                         std::exp(-sys.decay_rates[i] * (horizon - s));
                }
                return std::abs(f);
            };
            double channel = 0.0;
            for (int chunk = 0; chunk < 64; ++chunk) {
                channel += oracles::quad64(f_abs, horizon * chunk / 64.0,
                                           horizon * (chunk + 1) / 64.0);
            }
            support += sys.bounds.amplitude[(std::size_t)j] * channel;
        }
        double linear = 0.0;
        for (int i = 0; i < 3; ++i) {
            linear += -std::exp(-sys.decay_rates[i] * horizon) * sys.initial_state[i] * eta[i];
        }
        CHECK(std::abs(margin.value - (support - linear)) <= 1e-8);
    }
}

TEST_CASE("margin stays nonnegative past the first feasible horizon") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.3, 0.7}});
    const double y0[] = {0.8, 0.5};
    const ReducedSystem sys = build_reduced(basis, window, y0, 2, 1, ControlBounds{{1.0}});
    bool feasible_seen = false;
    for (int s = 1; s <= 20; ++s) {
        const double horizon = 0.02 * s * s;  // widening grid
        const double margin = feasibility_margin(sys, horizon).value;
        if (feasible_seen) {
            CHECK(margin >= -1e-9);
        } else if (margin >= 0.0) {
            feasible_seen = true;
        }
    }
    CHECK(feasible_seen);
}

TEST_CASE("scaling the initial data never shrinks the optimal time") {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    UniformSource rng(4242);
    for (int trial = 0; trial < 3; ++trial) {
        const double y0[] = {rng.next(0.3, 1.0), rng.next(0.3, 1.0)};
        const ReducedSystem sys = build_reduced(basis, window, y0, 2, 1, ControlBounds{{1.0}});
        ReducedSystem scaled = sys;
        scaled.initial_state *= rng.next(1.5, 3.0);
        SolverOptions opts;
        opts.time_tolerance = 1e-5;
        const double base = min_time_bisect(sys, opts).optimal_time;
        const double grown = min_time_bisect(scaled, opts).optimal_time;
        CHECK(grown >= base - 2e-5);
    }
}
