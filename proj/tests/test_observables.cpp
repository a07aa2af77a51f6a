#include <doctest.h>

#include <cmath>
#include <numbers>

#include "snls/errors.hpp"
#include "snls/mesh.hpp"
#include "snls/observables.hpp"

using namespace snls;

namespace {

constexpr double kQMass = std::numbers::sqrt3 * std::numbers::pi / 2.0;  // ∫Q² for σ = 2

Field constant_field(const Mesh& m, Complex c) { return Field(m.size(), c); }

}  // namespace

TEST_CASE("discrete mass") {
    const Mesh m = build_uniform_mesh(20.0, 0.05);
    const Complex c{0.6, -0.8};
    CHECK(discrete_mass(m, constant_field(m, c)) == doctest::Approx(std::norm(c) * (40.0 + 0.05)).epsilon(1e-13));
    CHECK(discrete_mass(m, Field(m.size())) == 0.0);
    CHECK(std::abs(discrete_mass(m, ground_state_field(m, 2)) - kQMass) < 5e-4);
}

TEST_CASE("discrete energy") {
    const Mesh m = build_uniform_mesh(20.0, 0.05);
    CHECK(discrete_energy(m, Field(m.size()), 2) == 0.0);
    CHECK(std::abs(discrete_energy(m, ground_state_field(m, 2), 2)) < 5e-3);
    const double c = 1.1;
    const auto parts = discrete_energy_parts(m, constant_field(m, {c, 0.0}), 2);
    CHECK(parts.kinetic == 0.0);
    CHECK(parts.total() == doctest::Approx(-std::pow(c, 6) / 6.0 * 40.05).epsilon(1e-12));
}

TEST_CASE("energy parts scale separately") {
    const Mesh m = build_uniform_mesh(10.0, 0.05);
    const Field u = ground_state_field(m, 2);
    Field v = u;
    const double lambda = 1.3;
    for (auto& x : v) x *= lambda;
    const auto a = discrete_energy_parts(m, u, 2);
    const auto b = discrete_energy_parts(m, v, 2);
    CHECK(b.kinetic == doctest::Approx(lambda * lambda * a.kinetic).epsilon(1e-13));
    CHECK(b.potential == doctest::Approx(std::pow(lambda, 6) * a.potential).epsilon(1e-13));
}

TEST_CASE("trapezoid mass") {
    const Mesh m = build_uniform_mesh(20.0, 0.05);
    CHECK(approx_mass_trapezoid(m, Field(m.size())) == 0.0);
    CHECK(approx_mass_trapezoid(m, constant_field(m, {2.0, 0.0})) == doctest::Approx(4.0 * 40.0).epsilon(1e-13));
    CHECK(std::abs(approx_mass_trapezoid(m, ground_state_field(m, 2)) - kQMass) < 5e-4);
}

TEST_CASE("both mass quadratures agree to second order") {
    for (double dx : {0.1, 0.05}) {
        const Mesh m = build_uniform_mesh(10.0, dx);
        const Field u = ground_state_field(m, 2);
        CHECK(std::abs(discrete_mass(m, u) - approx_mass_trapezoid(m, u)) <= dx * dx * kQMass);
    }
}

TEST_CASE("error ranges") {
    const std::vector<double> flat{2.0, 2.0, 2.0};
    const std::vector<double> wiggle{1.0, 3.0, 2.0};
    CHECK(series_range(flat) == 0.0);
    CHECK(series_range(wiggle) == 2.0);
    const auto e = error_ranges(flat, wiggle, flat);
    CHECK(e.discrete_mass == 0.0);
    CHECK(e.approx_mass == 2.0);
    CHECK_THROWS_AS(series_range(std::vector<double>{}), DomainError);
}

TEST_CASE("focusing factor") {
    const Mesh m = build_uniform_mesh(10.0, 0.05);
    Field u(m.size());
    u[100] = {1.0, 0.0};
    CHECK(focusing_L(m, u, 2, FocusingMode::SupNorm) == 1.0);
    const Field q = ground_state_field(m, 2);
    CHECK(focusing_L(m, q, 2, FocusingMode::SupNorm) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(focusing_L(m, q, 2, FocusingMode::Gradient) * gradient_norm(m, q) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("contraction rate vanishes on real and phase-rotated fields") {
    const Mesh m = build_uniform_mesh(10.0, 0.05);
    const Field q = ground_state_field(m, 2);
    CHECK(a_parameter(m, q, 2) == 0.0);
    Field r = q;
    for (auto& v : r) v *= std::polar(1.0, 0.7);
    CHECK(std::abs(a_parameter(m, r, 2)) < 1e-12);
}

TEST_CASE("contraction rate converges under grid refinement") {
    auto value = [](double dx) {
        const Mesh m = build_uniform_mesh(10.0, dx);
        Field u = ground_state_field(m, 2);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::exp(Complex{0.0, -m.point(j) * m.point(j) / 4.0});
        return a_parameter(m, u, 2);
    };
    const double coarse = value(0.005);
    const double fine = value(0.0005);
    CHECK(fine > 0.0);
    CHECK(std::abs(coarse - fine) / std::abs(fine) < 1e-4);
}

TEST_CASE("contraction rate is invariant under whole-cell shifts") {
    const Mesh m = build_uniform_mesh(20.0, 0.05);
    auto chirped = [&](double shift) {
        Field u(m.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double y = m.point(j) - shift;
            u[j] = ground_state(2, y) * std::exp(Complex{0.0, -y * y / 4.0});
        }
        return u;
    };
    CHECK(a_parameter(m, chirped(0.5), 2) == doctest::Approx(a_parameter(m, chirped(0.0), 2)).epsilon(1e-9));
}

TEST_CASE("rescaled time") {
    std::vector<TauSample> unit(10, {0.1, 1.0});
    const auto tau = rescaled_tau(unit);
    REQUIRE(tau.size() == 11);
    for (std::size_t m = 0; m < tau.size(); ++m) CHECK(tau[m] == doctest::Approx(0.1 * m));

    std::vector<TauSample> adaptive;
    for (int k = 0; k < 50; ++k) {
        const double L = std::exp(-0.1 * k);
        adaptive.push_back({0.01 * L * L, L});
    }
    const auto t2 = rescaled_tau(adaptive);
    CHECK(t2.back() == doctest::Approx(0.5).epsilon(1e-12));

    // L = 1/(1+t) on [0, 1]: τ = ∫(1+t)² dt = 7/3.
    std::vector<TauSample> mixed;
    const int n = 1000;
    for (int k = 0; k < n; ++k) mixed.push_back({1.0 / n, 1.0 / (1.0 + static_cast<double>(k) / n)});
    const auto t3 = rescaled_tau(mixed);
    CHECK(t3.back() == doctest::Approx(7.0 / 3.0).epsilon(0.01));
    for (std::size_t k = 1; k < t3.size(); ++k) CHECK(t3[k] > t3[k - 1]);

    CHECK_THROWS_AS(rescaled_tau(std::vector<TauSample>{{0.1, 0.0}}), DomainError);
}

TEST_CASE("ground state") {
    CHECK(ground_state(2, 0.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-15));
    CHECK(ground_state(1, 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    for (int sigma = 1; sigma <= 3; ++sigma) {
        double prev = ground_state(sigma, 0.0);
        for (double x = 0.5; x < 40.0; x += 0.5) {
            const double q = ground_state(sigma, x);
            CHECK(q < prev);
            CHECK(q == ground_state(sigma, -x));
            prev = q;
        }
        CHECK(prev < 1e-8);
    }
}

TEST_CASE("rescaled profile distance") {
    const Mesh m = build_uniform_mesh(10.0, 0.005);
    CHECK(rescaled_profile_distance(m, ground_state_field(m, 2), 2, 0.0, 1.0) < 1e-12);

    Field two = ground_state_field(m, 2, 2.0);
    CHECK(rescaled_profile_distance(m, two, 2, 0.0, 1.0) == doctest::Approx(ground_state(2, 0.0)).epsilon(1e-12));

    const double L = 1.0, xc = 0.123;
    Field shifted(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) shifted[j] = ground_state(2, (m.point(j) - xc) / L) / std::sqrt(L);
    CHECK(rescaled_profile_distance(m, shifted, 2, xc, L) < 1e-3);

    CHECK_THROWS_AS(rescaled_profile_distance(m, two, 2, 0.0, 0.0), DomainError);
}

TEST_CASE("blow-up center") {
    SUBCASE("symmetric peak on a grid point") {
        const Mesh m = build_uniform_mesh(10.0, 0.05);
        const auto c = blowup_center(m, ground_state_field(m, 2));
        CHECK(std::abs(c.x) < 1e-12);
        CHECK_FALSE(c.degenerate);
    }
    SUBCASE("parabola recovery") {
        const Mesh m = build_uniform_mesh(1.0, 0.2);
        Field u(m.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double y = 1.0 - (m.point(j) - 0.3) * (m.point(j) - 0.3);
            u[j] = std::sqrt(std::max(y, 0.0));
        }
        CHECK(blowup_center(m, u).x == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("non-uniform neighbours") {
        const Mesh m({-1.0, -0.3, 0.0, 0.5, 1.0});
        Field u(m.size());
        for (std::size_t j = 0; j < u.size(); ++j) u[j] = std::sqrt(2.0 - (m.point(j) - 0.1) * (m.point(j) - 0.1));
        CHECK(blowup_center(m, u).x == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("constant field") {
        const Mesh m = build_uniform_mesh(1.0, 0.2);
        const auto c = blowup_center(m, Field(m.size(), Complex{1.0, 0.0}));
        CHECK(c.x == -1.0);
        CHECK(c.degenerate);
    }
}
