#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "snls/mesh.hpp"

namespace snls {

enum class NoiseKind { Deterministic, Additive, Multiplicative };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseModel {
    NoiseKind kind = NoiseKind::Deterministic;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trial_index = 0;

    /// False for deterministic runs and for ε = 0; inactive models draw nothing.
    bool active() const { return kind != NoiseKind::Deterministic && eps != 0.0; }
};

/// Counter-based 64-bit generator. The stream is a pure function of
/// (seed, trial, step) and the position within it, so draws never depend on
/// what other trajectories or earlier refinements did.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t step);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// n i.i.d. standard normal values for one time step of one trial.
std::vector<double> draw_increments(const NoiseModel& model, std::uint64_t step_index, std::size_t n_points);

/// Hat-function noise coefficients f̃_j together with the increments χ_j they scale.
struct NoiseCoeffs {
    std::vector<double> scale;       ///< f̃_j
    std::vector<double> increments;  ///< χ_j
};

/// Per-point factor (√3/2)(√Δx_{j-1}+√Δx_j)/(√Δt (Δx_{j-1}+Δx_j)), with the
/// one-sided end values (√3/2)/√(Δt Δx_0) and (√3/2)/√(Δt Δx_{N-1}).
std::vector<double> noise_scale(const Mesh& mesh, double dt);

NoiseCoeffs noise_coefficients(const Mesh& mesh, double dt, std::vector<double> chi);

/// g = ε u_mid f̃ (multiplicative), ε f̃ (additive) or 0 (deterministic).
Field forcing_term(NoiseKind kind, double eps, const NoiseCoeffs& coeffs, std::span<const Complex> u_mid);

struct TraceInfo {
    double trace = 0.0;  ///< N + 1
    double m_phi = 0.0;  ///< 12 (N + 1) / Δx³
};

TraceInfo trace_and_mphi(std::size_t intervals, double dx);
/// Uses the smallest spacing on non-uniform meshes; diagnostic only there.
TraceInfo trace_and_mphi(const Mesh& mesh);

}  // namespace snls
