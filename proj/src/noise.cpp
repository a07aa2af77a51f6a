#include "snls/noise.hpp"

#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "snls/errors.hpp"

namespace snls {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Deterministic: return "det";
        case NoiseKind::Additive: return "add";
        case NoiseKind::Multiplicative: return "mult";
    }
    return "det";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "det" || name == "deterministic") return NoiseKind::Deterministic;
    if (name == "add" || name == "additive") return NoiseKind::Additive;
    if (name == "mult" || name == "multiplicative") return NoiseKind::Multiplicative;
    throw ConfigError("unknown noise kind '" + name + "' (expected det, add or mult)");
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t step)
    : key_(mix64(mix64(mix64(seed) ^ (trial * kGolden + 0x632be59bd9b4e019ULL)) ^ (step + 0x8cb92ba72f3d8dd7ULL))) {}

CounterRng::result_type CounterRng::operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

std::vector<double> draw_increments(const NoiseModel& model, std::uint64_t step_index, std::size_t n_points) {
    if (!model.active()) return {};
    CounterRng rng(model.seed, model.trial_index, step_index);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(n_points);
    for (auto& v : out) v = normal(rng);
    return out;
}

std::vector<double> noise_scale(const Mesh& mesh, double dt) {
    if (!(dt > 0.0)) throw DomainError("noise coefficients need a positive time step");
    const std::size_t n = mesh.size();
    const double half_sqrt3 = 0.5 * std::sqrt(3.0);
    const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    std::vector<double> out(n);
    out.front() = half_sqrt3 * inv_sqrt_dt / std::sqrt(mesh.spacings().front());
    out.back() = half_sqrt3 * inv_sqrt_dt / std::sqrt(mesh.spacings().back());
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double a = mesh.spacings()[j - 1];
        const double b = mesh.spacings()[j];
        out[j] = half_sqrt3 * inv_sqrt_dt * (std::sqrt(a) + std::sqrt(b)) / (a + b);
    }
    return out;
}

NoiseCoeffs noise_coefficients(const Mesh& mesh, double dt, std::vector<double> chi) {
    check_shape(mesh, chi.size(), "noise_coefficients");
    NoiseCoeffs c{noise_scale(mesh, dt), std::move(chi)};
    for (std::size_t j = 0; j < c.scale.size(); ++j) c.scale[j] *= c.increments[j];
    return c;
}

Field forcing_term(NoiseKind kind, double eps, const NoiseCoeffs& coeffs, std::span<const Complex> u_mid) {
    const std::size_t n = coeffs.scale.size();
    Field g(n, Complex{0.0, 0.0});
    switch (kind) {
        case NoiseKind::Deterministic: break;
        case NoiseKind::Additive:
            for (std::size_t j = 0; j < n; ++j) g[j] = eps * coeffs.scale[j];
            break;
        case NoiseKind::Multiplicative:
            if (u_mid.size() != n) throw ShapeError("forcing_term: midpoint field length mismatch");
            for (std::size_t j = 0; j < n; ++j) g[j] = eps * coeffs.scale[j] * u_mid[j];
            break;
    }
    return g;
}

TraceInfo trace_and_mphi(std::size_t intervals, double dx) {
    const double trace = static_cast<double>(intervals) + 1.0;
    return {trace, 12.0 * trace / (dx * dx * dx)};
}

TraceInfo trace_and_mphi(const Mesh& mesh) { return trace_and_mphi(mesh.intervals(), mesh.min_spacing()); }

}  // namespace snls
