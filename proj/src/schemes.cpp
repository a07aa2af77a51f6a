#include "snls/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snls/errors.hpp"

namespace snls {

namespace {

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

void thomas(std::span<const Complex> lower, std::span<const Complex> diag, std::span<const Complex> upper,
            std::span<const Complex> rhs, std::vector<Complex>& scratch, std::span<Complex> out) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    auto check = [](Complex pivot, std::size_t row) {
        const double m = std::abs(pivot);
        if (!(m >= std::numeric_limits<double>::min()) || !std::isfinite(m))
            throw NumericalBreakdown("tridiagonal solve: zero pivot at row " + std::to_string(row));
    };
    Complex pivot = diag[0];
    check(pivot, 0);
    scratch[0] = n > 1 ? upper[0] / pivot : Complex{};
    out[0] = rhs[0] / pivot;
    for (std::size_t j = 1; j < n; ++j) {
        pivot = diag[j] - lower[j] * scratch[j - 1];
        check(pivot, j);
        scratch[j] = j + 1 < n ? upper[j] / pivot : Complex{};
        out[j] = (rhs[j] - lower[j] * out[j - 1]) / pivot;
    }
    for (std::size_t j = n - 1; j-- > 0;) out[j] -= scratch[j] * out[j + 1];
}

}  // namespace

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::MEC: return "mec";
        case Scheme::CN: return "cn";
        case Scheme::LE: return "le";
    }
    return "le";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "mec") return Scheme::MEC;
    if (name == "cn") return Scheme::CN;
    if (name == "le") return Scheme::LE;
    throw ConfigError("unknown scheme '" + name + "' (expected mec, cn or le)");
}

std::string to_string(BoundaryMode mode) { return mode == BoundaryMode::Ghost ? "ghost" : "pinned"; }

BoundaryMode boundary_mode_from_string(const std::string& name) {
    if (name == "ghost") return BoundaryMode::Ghost;
    if (name == "pinned") return BoundaryMode::Pinned;
    throw ConfigError("unknown boundary mode '" + name + "' (expected ghost or pinned)");
}

State State::initial(Mesh mesh, Field u, double dt0) {
    check_shape(mesh, u.size(), "State::initial");
    if (!(dt0 > 0.0)) throw ConfigError("initial time step must be positive");
    State s{std::move(mesh), std::move(u), 0.0, 0.0, dt0, dt0, {}, 0};
    return s;
}

void State::advance_time(double dt) {
    const double sum = t + dt;
    const double bb = sum - t;
    const double err = (t - (sum - bb)) + (dt - bb);
    t = sum;
    t_lo += err;
    const double renorm = t + t_lo;
    t_lo -= renorm - t;
    t = renorm;
}

TimeStepChoice adapt_dt(const State& state, const SolverConfig& cfg) {
    double sup = 0.0;
    for (const auto& v : state.u) sup = std::max(sup, std::abs(v));
    double dt = state.dt_prev;
    if (sup > 0.0) dt = std::min(dt, state.dt0 / std::pow(sup, 2.0 * cfg.sigma));
    if (dt < cfg.dt_floor) return {cfg.dt_floor, true};
    return {dt, false};
}

double mec_ratio(double a, double b, int sigma) {
    double sum = 0.0;
    double a_pow = 1.0;
    for (int k = 0; k <= sigma; ++k) {
        sum += a_pow * ipow(b, sigma - k);
        a_pow *= a;
    }
    return sum / (sigma + 1);
}

double le_potential(double v_now, double v_prev, double dt_prev, double dt) {
    return 0.5 * ((2.0 * dt_prev + dt) / dt_prev * v_now - dt / dt_prev * v_prev);
}

Field tridiagonal_solve(std::span<const Complex> lower, std::span<const Complex> diag,
                        std::span<const Complex> upper, std::span<const Complex> rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
        throw ShapeError("tridiagonal_solve: inconsistent lengths");
    std::vector<Complex> scratch;
    Field out(n);
    thomas(lower, diag, upper, rhs, scratch, out);
    return out;
}

StepReport step(State& state, double dt, const SolverConfig& cfg, const NoiseModel& noise) {
    if (!(dt > 0.0)) throw DomainError("step needs a positive time step");
    const Mesh& mesh = state.mesh;
    const std::size_t n = mesh.size();
    check_shape(mesh, state.u.size(), "step");

    Scheme scheme = cfg.scheme;
    if (scheme == Scheme::LE && state.v_prev.empty())
        scheme = cfg.le_bootstrap == Scheme::LE ? Scheme::CN : cfg.le_bootstrap;

    const Stencil d2 = second_derivative_stencil(mesh);
    std::vector<double> forcing;
    if (noise.active()) {
        forcing = noise_scale(mesh, dt);
        const auto chi = draw_increments(noise, state.step_index, n);
        for (std::size_t j = 0; j < n; ++j) forcing[j] *= noise.eps * chi[j];
    }
    const bool additive = noise.active() && noise.kind == NoiseKind::Additive;
    const bool multiplicative = noise.active() && noise.kind == NoiseKind::Multiplicative;

    // Unknown is the midpoint w = ½(u^m + u^{m+1}):
    //   (2i/Δt + D2 + P - ε f̃_mult) w = (2i/Δt) u^m + ε f̃_add
    const Complex two_i_dt{0.0, 2.0 / dt};
    const Field& u = state.u;
    Field lower(n), upper(n), diag_base(n), diag(n), rhs(n), w(n);
    std::vector<double> v_now(n);
    for (std::size_t j = 0; j < n; ++j) {
        lower[j] = d2.lower[j];
        upper[j] = d2.upper[j];
        diag_base[j] = two_i_dt + d2.center[j];
        if (multiplicative) diag_base[j] -= forcing[j];
        rhs[j] = two_i_dt * u[j];
        if (additive) rhs[j] += forcing[j];
        v_now[j] = ipow(std::norm(u[j]), cfg.sigma);
    }

    std::vector<Complex> scratch;
    Field next(u);
    StepReport report{0, 0.0, scheme};

    if (scheme == Scheme::LE) {
        for (std::size_t j = 0; j < n; ++j)
            diag[j] = diag_base[j] + le_potential(v_now[j], state.v_prev[j], state.dt_prev, dt);
        thomas(lower, diag, upper, rhs, scratch, w);
        for (std::size_t j = 0; j < n; ++j) next[j] = 2.0 * w[j] - u[j];
        report.iterations = 1;
    } else {
        bool converged = false;
        for (int k = 1; k <= cfg.fp_max_iter; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                double potential;
                if (scheme == Scheme::CN) {
                    potential = ipow(std::norm(0.5 * (u[j] + next[j])), cfg.sigma);
                } else {
                    potential = mec_ratio(std::norm(next[j]), std::norm(u[j]), cfg.sigma);
                }
                diag[j] = diag_base[j] + potential;
            }
            thomas(lower, diag, upper, rhs, scratch, w);
            double residual = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const Complex candidate = 2.0 * w[j] - u[j];
                residual = std::max(residual, std::abs(candidate - next[j]));
                next[j] = candidate;
            }
            report.iterations = k;
            report.residual = residual;
            if (!std::isfinite(residual)) break;
            if (residual < cfg.fp_tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NonConvergence("fixed-point iteration did not converge", report.iterations, report.residual);
    }

    if (cfg.boundary == BoundaryMode::Pinned && n >= 3) {
        next.front() = next[1];
        next.back() = next[n - 2];
    }

    state.u = std::move(next);
    state.v_prev = std::move(v_now);
    state.dt_prev = dt;
    state.advance_time(dt);
    ++state.step_index;
    return report;
}

std::size_t refine_state(State& state, const std::vector<bool>& flags, int sigma, std::size_t point_cap) {
    auto result = refine(state.mesh, state.u, flags, point_cap);
    if (result.inserted == 0) return 0;
    if (!state.v_prev.empty()) {
        const double root = 1.0 / sigma;
        state.v_prev = insert_midpoints<double>(state.v_prev, flags, [&](double a, double b) {
            return ipow(0.5 * (std::pow(a, root) + std::pow(b, root)), sigma);
        });
    }
    state.mesh = std::move(result.mesh);
    state.u = std::move(result.u);
    return result.inserted;
}

}  // namespace snls
