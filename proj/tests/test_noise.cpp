#include <doctest.h>

#include <cmath>
#include <numeric>

#include "snls/errors.hpp"
#include "snls/mesh.hpp"
#include "snls/noise.hpp"
#include "snls/observables.hpp"

using namespace snls;

TEST_CASE("increments are a pure function of seed, trial and step") {
    NoiseModel m{NoiseKind::Additive, 0.1, 42, 3};
    CHECK(draw_increments(m, 17, 100) == draw_increments(m, 17, 100));
    CHECK(draw_increments(m, 17, 100) != draw_increments(m, 18, 100));
    NoiseModel other = m;
    other.trial_index = 4;
    CHECK(draw_increments(m, 17, 100) != draw_increments(other, 17, 100));
}

TEST_CASE("a longer draw extends a shorter one") {
    NoiseModel m{NoiseKind::Multiplicative, 0.1, 1, 0};
    const auto a = draw_increments(m, 5, 50);
    const auto b = draw_increments(m, 5, 80);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
}

TEST_CASE("increments are standard normal") {
    NoiseModel m{NoiseKind::Additive, 1.0, 2024, 0};
    const auto x = draw_increments(m, 0, 1'000'000);
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n - 1.0;
    CHECK(std::abs(mean) < 0.005);
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("inactive models draw nothing") {
    CHECK(draw_increments({NoiseKind::Deterministic, 0.1, 1, 0}, 0, 10).empty());
    CHECK(draw_increments({NoiseKind::Additive, 0.0, 1, 0}, 0, 10).empty());
}

TEST_CASE("noise coefficient values") {
    const Mesh uniform = build_uniform_mesh(1.0, 0.05);
    const auto c = noise_coefficients(uniform, 0.005, std::vector<double>(uniform.size(), 1.0));
    for (double f : c.scale) CHECK(f == doctest::Approx(std::sqrt(3.0) / 2.0 / std::sqrt(0.00025)));
    CHECK(c.scale[5] == doctest::Approx(54.77).epsilon(1e-4));

    const Mesh mixed({0.0, 0.05, 0.15});
    const auto d = noise_coefficients(mixed, 0.005, {1.0, 1.0, 1.0});
    CHECK(d.scale[1] == doctest::Approx(44.08).epsilon(1e-3));

    const auto z = noise_coefficients(uniform, 0.005, std::vector<double>(uniform.size(), 0.0));
    for (double f : z.scale) CHECK(f == 0.0);
}

TEST_CASE("halving the spacing multiplies the noise scale by the square root of two") {
    const auto a = noise_scale(build_uniform_mesh(1.0, 0.1), 0.01);
    const auto b = noise_scale(build_uniform_mesh(1.0, 0.05), 0.01);
    CHECK(b[3] / a[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("forcing term") {
    NoiseCoeffs c{{54.77, 54.77}, {1.0, 1.0}};
    const Field u{{0.0, 1.0}, {0.0, 1.0}};
    for (const auto& g : forcing_term(NoiseKind::Deterministic, 0.1, c, u)) CHECK(g == Complex{0.0, 0.0});
    for (const auto& g : forcing_term(NoiseKind::Additive, 0.1, c, u)) CHECK(g.real() == doctest::Approx(5.477));
    NoiseCoeffs two{{2.0, 2.0}, {1.0, 1.0}};
    for (const auto& g : forcing_term(NoiseKind::Multiplicative, 1.0, two, u)) CHECK(g == Complex{0.0, 2.0});
    CHECK_THROWS_AS(forcing_term(NoiseKind::Multiplicative, 1.0, two, Field(3)), ShapeError);
}

TEST_CASE("trace and m_phi") {
    const auto t = trace_and_mphi(800, 0.05);
    CHECK(t.trace == 801.0);
    CHECK(t.m_phi == doctest::Approx(7.6896e7));
    CHECK(trace_and_mphi(0, 1.0).trace == 1.0);
    CHECK(trace_and_mphi(0, 1.0).m_phi == 12.0);
    CHECK(trace_and_mphi(build_uniform_mesh(20.0, 0.05)).trace == 801.0);
}

TEST_CASE("zero-dynamics additive mass growth is three quarters of eps squared trace dt") {
    // u^{m+1} = u^m - i Δt ε f̃ χ, with no dispersion and no potential.
    const Mesh mesh = build_uniform_mesh(0.5, 0.1);
    const double dt = 0.01, eps = 0.3;
    NoiseModel model{NoiseKind::Additive, eps, 9, 0};
    Field u(mesh.size());
    const std::size_t steps = 100'000;
    double sum = 0.0, sum2 = 0.0;
    double mass = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
        const auto coeffs = noise_coefficients(mesh, dt, draw_increments(model, m, mesh.size()));
        const Field g = forcing_term(NoiseKind::Additive, eps, coeffs, u);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] -= Complex{0.0, dt} * g[j];
        const double next = discrete_mass(mesh, u);
        sum += next - mass;
        sum2 += (next - mass) * (next - mass);
        mass = next;
    }
    const double n = static_cast<double>(steps);
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const double want = 0.75 * eps * eps * static_cast<double>(mesh.intervals() + 1) * dt;
    CHECK(std::abs(mean - want) < 3.0 * se);
}

TEST_CASE("noise kind names round trip") {
    for (auto k : {NoiseKind::Deterministic, NoiseKind::Additive, NoiseKind::Multiplicative})
        CHECK(noise_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(noise_kind_from_string("pink"), ConfigError);
}
