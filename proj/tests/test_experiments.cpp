#include <doctest.h>

#include <cmath>
#include <random>

#include "snls/errors.hpp"
#include "snls/experiments.hpp"

using namespace snls;

namespace {

RunConfig uniform_cn(double amplitude, NoiseKind kind, double eps, double half_length = 20.0, double t_end = 5.0) {
    RunConfig c;
    c.sigma = 2;
    c.initial = {InitialShape::GroundState, amplitude};
    c.half_length = half_length;
    c.t_end = t_end;
    c.noise = kind;
    c.eps = eps;
    c.seed = 1;
    c.scheme = Scheme::CN;
    c.adaptive_dt = false;
    c.refinement = false;
    c.L_stop = 1e-6;
    return c;
}

// L = c (T - t)^p sampled geometrically in T - t from gap_max down to gap_min.
// Times carry their rounding error in t_lo so gaps far below ulp(T) stay exact.
std::vector<RateSample> power_law(double T, double c, double p, double gap_max, double gap_min, std::size_t n) {
    std::vector<RateSample> s;
    for (std::size_t k = 0; k < n; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(n - 1);
        const double gap = gap_max * std::pow(gap_min / gap_max, frac);
        const double t = T - gap;
        const double t_lo = (T - t) - gap;
        s.push_back({t, c * std::pow(gap, p), t_lo});
    }
    return s;
}

}  // namespace

TEST_CASE("rate fit recovers a square-root law") {
    const auto s = power_law(1.0, std::sqrt(2.0), 0.5, 1.0, 1e-12, 400);
    std::vector<RateSample> head(s.begin(), s.end() - 1);
    const auto fit = fit_blowup_rate(head);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(fit.T_est() - 1.0) < 1e-6);
}

TEST_CASE("rate fit recovers other exponents") {
    for (double p : {0.3, 0.45, 0.6, 0.8}) {
        CAPTURE(p);
        const auto s = power_law(2.0, 1.0, p, 2.0, 1e-13, 300);
        const auto fit = fit_blowup_rate(s);
        CHECK(fit.slope == doctest::Approx(p).epsilon(1e-3));
        CHECK(std::abs(fit.T_est() - 2.0) < 1e-3);
    }
}

TEST_CASE("rate fit honours the focusing window") {
    const auto s = power_law(1.0, 1.0, 0.5, 1.0, 1e-20, 500);
    RateFitOptions opt;
    opt.L_min = 1e-8;
    opt.L_max = 1e-3;
    const auto fit = fit_blowup_rate(s, opt);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-6));
    std::size_t inside = 0;
    for (const auto& r : s) inside += r.L >= 1e-8 && r.L <= 1e-3;
    CHECK(fit.samples == inside);
}

TEST_CASE("rate fit refuses weak data") {
    std::vector<RateSample> flat;
    for (int k = 0; k < 50; ++k) flat.push_back({0.01 * k, 0.5, 0.0});
    CHECK_THROWS_AS(fit_blowup_rate(flat), FitRefused);
    const auto s = power_law(1.0, 1.0, 0.5, 1.0, 1e-12, 10);
    CHECK_THROWS_AS(fit_blowup_rate(s), FitRefused);
    CHECK_THROWS_AS(fit_blowup_rate(std::vector<RateSample>{}), FitRefused);
}

TEST_CASE("linear fit") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    const std::vector<double> c{4, 4, 4, 4};
    CHECK(linear_fit(x, c).slope == 0.0);
}

TEST_CASE("a-correction fit") {
    SUBCASE("inverse logarithm") {
        std::vector<TauA> s;
        for (double tau = 2.0; tau < 1e6; tau *= 1.05) s.push_back({tau, 0.7 / std::log(tau), 0.0});
        const auto fit = fit_a_correction(s);
        CHECK(fit.fit.slope == doctest::Approx(0.7).epsilon(1e-9));
        CHECK(std::abs(fit.fit.intercept) < 1e-3);
    }
    SUBCASE("constant") {
        std::vector<TauA> s;
        for (double tau = 2.0; tau < 1e4; tau *= 1.1) s.push_back({tau, 2.5, 0.0});
        const auto fit = fit_a_correction(s);
        CHECK(fit.fit.slope == 0.0);
        CHECK(fit.fit.intercept == doctest::Approx(2.5));
        CHECK(fit.relative_variation == 0.0);
    }
    SUBCASE("last focusing decade") {
        // Transient while L is large, flat once L is small.
        std::vector<TauA> s;
        for (int k = 0; k < 200; ++k) {
            const double L = std::pow(10.0, -0.05 * k);
            s.push_back({2.0 + k, L > 1e-4 ? 10.0 * L : 1.5, L});
        }
        CHECK(fit_a_correction(s, AWindow::FocusingDecade).relative_variation == 0.0);
        CHECK(fit_a_correction(s, AWindow::TauDecade).relative_variation > 0.0);
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(fit_a_correction(std::vector<TauA>{{2.0, 1.0, 0.0}}), FitRefused);
    }
}

TEST_CASE("supercritical rate check") {
    const int sigma = 3;
    const double a = 0.6, T = 1.0;
    std::vector<SupSample> exact, noisy;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> wiggle(-0.01, 0.01);
    for (int k = 0; k < 100; ++k) {
        const double t = T - std::pow(10.0, -0.1 * k - 1.0);
        const double sup = std::pow(2.0 * a * (T - t), -1.0 / (2.0 * sigma));
        exact.push_back({t, sup, 0.0});
        noisy.push_back({t, sup * (1.0 + wiggle(rng)), 0.0});
    }
    for (double r : supercritical_rate_check(exact, a, T, sigma)) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
    for (double r : supercritical_rate_check(noisy, a, T, sigma)) {
        CHECK(r >= 0.98);
        CHECK(r <= 1.02);
    }
    CHECK_THROWS_AS(supercritical_rate_check(exact, a, 0.5, sigma), DomainError);
}

TEST_CASE("center statistics") {
    const std::vector<double> pair{-1.0, 1.0};
    const auto m = center_statistics(pair);
    CHECK(m.mean == 0.0);
    CHECK(m.variance == 2.0);
    const std::vector<double> flat(5, 0.3);
    CHECK(center_statistics(flat).variance == 0.0);
    CHECK_THROWS_AS(center_statistics(std::vector<double>{}), DomainError);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.1, 0.05);
    std::vector<double> big(20000);
    for (auto& v : big) v = g(rng);
    const auto s = center_statistics(big);
    CHECK(s.mean == doctest::Approx(0.1).epsilon(0.01));
    CHECK(s.variance == doctest::Approx(0.0025).epsilon(0.03));
    CHECK(std::abs(s.skewness) < 0.05);
    CHECK(std::abs(s.excess_kurtosis) < 0.1);
}

TEST_CASE("deterministic trajectory completes with conserved mass") {
    auto c = uniform_cn(0.95, NoiseKind::Deterministic, 0.0, 10.0, 1.0);
    const auto d = run_trajectory(c, 0);
    CHECK(d.outcome == Outcome::Completed);
    CHECK(d.end_time + d.end_time_lo == 1.0);
    std::vector<double> m;
    for (const auto& r : d.rows) m.push_back(r.m_dis);
    CHECK(series_range(m) < 1e-10);
}

TEST_CASE("zero data stays zero") {
    auto c = uniform_cn(0.0, NoiseKind::Additive, 0.0, 5.0, 0.5);
    const auto d = run_trajectory(c, 0);
    CHECK(d.outcome == Outcome::Completed);
    REQUIRE(d.final_state);
    for (const auto& v : d.final_state->u) CHECK(v == Complex{0.0, 0.0});
}

TEST_CASE("trajectories are reproducible") {
    auto c = uniform_cn(0.9, NoiseKind::Multiplicative, 0.1, 5.0, 0.5);
    const auto a = run_trajectory(c, 3);
    const auto b = run_trajectory(c, 3);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].m_dis == b.rows[k].m_dis);
        CHECK(a.rows[k].h_dis == b.rows[k].h_dis);
        CHECK(a.rows[k].sup_norm == b.rows[k].sup_norm);
    }
}

TEST_CASE("stride, refinement and termination rows are recorded") {
    RunConfig c;
    c.initial = {InitialShape::GroundState, 1.05};
    c.half_length = 10.0;
    c.t_end = 0.3;
    c.stride = 7;
    const auto d = run_trajectory(c, 0);
    REQUIRE(!d.rows.empty());
    CHECK(d.rows.front().step == 0);
    CHECK(d.rows.back().t + d.rows.back().t_lo == doctest::Approx(0.3));
    for (const auto& r : d.rows) {
        const bool at_stride = r.step % 7 == 0;
        const bool at_refine = std::any_of(d.refinements.begin(), d.refinements.end(),
                                           [&](const RefinementEvent& e) { return e.t == r.t; });
        CHECK((at_stride || at_refine || &r == &d.rows.back()));
    }
}

TEST_CASE("snapshots are taken at the requested times") {
    auto c = uniform_cn(0.9, NoiseKind::Deterministic, 0.0, 5.0, 0.2);
    c.snapshot_times = {0.0, 0.1};
    const auto d = run_trajectory(c, 0);
    REQUIRE(d.snapshots.size() == 2);
    CHECK(d.snapshots[1].t == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("the observer can stop a run") {
    auto c = uniform_cn(0.9, NoiseKind::Deterministic, 0.0, 5.0, 1.0);
    int calls = 0;
    const auto d = run_trajectory(c, 0, [&](const State&, double) { return ++calls < 5; });
    CHECK(d.outcome == Outcome::Completed);
    CHECK(d.end_time < 0.1);
}

TEST_CASE("point cap aborts without throwing") {
    RunConfig c;
    c.initial = {InitialShape::GroundState, 1.05};
    c.half_length = 10.0;
    c.point_cap = 410;
    const auto d = run_trajectory(c, 0);
    CHECK(d.outcome == Outcome::Aborted);
    CHECK(d.cause.find("point cap") != std::string::npos);
}

TEST_CASE("invalid configurations throw") {
    RunConfig c;
    c.dx = -1.0;
    CHECK_THROWS_AS(run_trajectory(c, 0), ConfigError);
    RunConfig d;
    d.sigma = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("deterministic ensemble gives identical trials and a flat mean mass") {
    auto c = uniform_cn(0.9, NoiseKind::Deterministic, 0.0, 5.0, 0.5);
    const auto s = run_ensemble(c, {4, 2, 21, false});
    REQUIRE(s.trials.size() == 4);
    for (const auto& t : s.trials) CHECK(t.end_time == s.trials[0].end_time);
    for (double v : s.var_mass) CHECK(v == 0.0);
    const auto curves = expected_curves(s);
    CHECK(std::abs(curves.mass_fit.slope) < 1e-12);
    CHECK(s.blowup_fraction == 0.0);
}

TEST_CASE("ensemble results do not depend on the worker count") {
    auto c = uniform_cn(1.0, NoiseKind::Additive, 0.1, 5.0, 1.0);
    const auto a = run_ensemble(c, {6, 1, 11, false});
    const auto b = run_ensemble(c, {6, 4, 11, false});
    CHECK(a.mean_mass == b.mean_mass);
    CHECK(a.var_energy == b.var_energy);
    CHECK(a.alive == b.alive);
    for (std::size_t k = 0; k < a.trials.size(); ++k) {
        CHECK(a.trials[k].end_time == b.trials[k].end_time);
        CHECK(a.trials[k].cause == b.trials[k].cause);
    }
}

TEST_CASE("ensemble needs at least one trial") {
    CHECK_THROWS_AS(run_ensemble(RunConfig{}, {0, 1, 11, false}), ConfigError);
}

TEST_CASE("initial data shapes") {
    const Mesh m = build_uniform_mesh(2.0, 0.5);
    const auto g = sample_initial(m, {InitialShape::Gauss, 3.0}, 2);
    CHECK(g[4].real() == 3.0);
    CHECK(g[6].real() == doctest::Approx(3.0 * std::exp(-1.0)));
    const auto s = sample_initial(m, {InitialShape::SuperGauss, 2.0}, 2);
    CHECK(s[6].real() == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(initial_shape_from_string("Q") == InitialShape::GroundState);
    CHECK_THROWS_AS(initial_shape_from_string("square"), ConfigError);
}

TEST_CASE("additive noise drives a small soliton to blow up for most seeds" * doctest::test_suite("slow")) {
    auto c = uniform_cn(0.5, NoiseKind::Additive, 0.1, 20.0, 25.0);
    const auto s = run_ensemble(c, {7, 1, 11, false});
    std::size_t blowups = 0;
    for (const auto& t : s.trials) blowups += t.outcome == Outcome::Blowup;
    MESSAGE("blow-ups before t = 25: " << blowups << " / 7");
    CHECK(blowups >= 4);
}
