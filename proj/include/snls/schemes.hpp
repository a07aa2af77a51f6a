#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snls/mesh.hpp"
#include "snls/noise.hpp"

namespace snls {

/// Mass-energy conservative, Crank-Nicolson, linearized extrapolation.
enum class Scheme { MEC, CN, LE };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// How the end points are closed. Ghost keeps the Neumann ghost values
/// inside the stencil; Pinned additionally copies u_1 -> u_0 and
/// u_{N-1} -> u_N after each step.
enum class BoundaryMode { Ghost, Pinned };

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

struct SolverConfig {
    Scheme scheme = Scheme::LE;
    Scheme le_bootstrap = Scheme::CN;
    int sigma = 2;
    double fp_tol = 1e-10;
    int fp_max_iter = 2000;
    double dt_floor = 1e-30;
    double L_stop = 1e-12;
    std::size_t point_cap = kDefaultPointCap;
    BoundaryMode boundary = BoundaryMode::Ghost;
};

/// Solution on the current mesh together with the time-stepping memory.
struct State {
    Mesh mesh;
    Field u;
    double t = 0.0;
    double t_lo = 0.0;        ///< compensation term: exact time is t + t_lo
    double dt_prev = 0.0;     ///< step size of the last accepted step (Δt0 before the first)
    double dt0 = 0.0;
    std::vector<double> v_prev;  ///< |u^{m-1}|^{2σ}; empty before the first step
    std::uint64_t step_index = 0;

    static State initial(Mesh mesh, Field u, double dt0);

    /// Advances t + t_lo by dt with a compensated (two-sum) update.
    void advance_time(double dt);
};

struct StepReport {
    int iterations = 0;
    double residual = 0.0;
    Scheme scheme_used = Scheme::LE;
};

struct TimeStepChoice {
    double dt = 0.0;
    bool at_floor = false;  ///< the rule asked for less than the floor: blow-up is imminent
};

/// min{Δt_prev, Δt0 / ‖u‖_∞^{2σ}}, floored at cfg.dt_floor.
TimeStepChoice adapt_dt(const State& state, const SolverConfig& cfg);

/// (a^{σ+1} - b^{σ+1}) / ((σ+1)(a - b)) written as (1/(σ+1)) Σ_k a^k b^{σ-k}.
double mec_ratio(double a, double b, int sigma);

/// Extrapolated potential ½((2Δt_{m-1}+Δt_m)/Δt_{m-1} V^m - Δt_m/Δt_{m-1} V^{m-1}).
double le_potential(double v_now, double v_prev, double dt_prev, double dt);

/// Thomas elimination for a complex tridiagonal system. lower[0] and
/// upper[n-1] are ignored. Throws NumericalBreakdown on a zero, denormal or
/// non-finite pivot.
Field tridiagonal_solve(std::span<const Complex> lower, std::span<const Complex> diag,
                        std::span<const Complex> upper, std::span<const Complex> rhs);

/// Advances one step of length dt with the configured scheme. LE delegates
/// its first step to cfg.le_bootstrap. NonConvergence is thrown when the
/// fixed-point iteration of MEC/CN misses cfg.fp_tol after cfg.fp_max_iter
/// iterations.
StepReport step(State& state, double dt, const SolverConfig& cfg, const NoiseModel& noise);

/// Refines the state's mesh by flags: the field uses the mass-conservative
/// midpoint rule and the stored previous potential is refined consistently.
std::size_t refine_state(State& state, const std::vector<bool>& flags, int sigma, std::size_t point_cap);

}  // namespace snls
