#include "snls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "snls/errors.hpp"

namespace snls {

namespace {

bool field_is_finite(const Field& u) {
    return std::all_of(u.begin(), u.end(), [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double supnorm_L(double sup, int sigma) {
    return sup > 0.0 ? std::pow(sup, -static_cast<double>(sigma)) : std::numeric_limits<double>::infinity();
}

/// Linear interpolation of a recorded column at time g; false past the last row.
bool interpolate_column(const std::vector<DiagnosticRow>& rows, double g, double DiagnosticRow::*column,
                        double& out) {
    if (rows.empty() || g > rows.back().t) return false;
    auto it = std::lower_bound(rows.begin(), rows.end(), g,
                               [](const DiagnosticRow& r, double value) { return r.t < value; });
    if (it == rows.begin()) {
        out = rows.front().*column;
        return true;
    }
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double span = hi.t - lo.t;
    const double theta = span > 0.0 ? (g - lo.t) / span : 1.0;
    out = (1.0 - theta) * (lo.*column) + theta * (hi.*column);
    return true;
}

struct TrialCurves {
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<bool> alive;
};

}  // namespace

std::string to_string(InitialShape shape) {
    switch (shape) {
        case InitialShape::GroundState: return "ground_state";
        case InitialShape::Gauss: return "gauss";
        case InitialShape::SuperGauss: return "supergauss";
    }
    return "ground_state";
}

InitialShape initial_shape_from_string(const std::string& name) {
    if (name == "ground_state" || name == "Q") return InitialShape::GroundState;
    if (name == "gauss") return InitialShape::Gauss;
    if (name == "supergauss") return InitialShape::SuperGauss;
    throw ConfigError("unknown initial shape '" + name + "' (expected ground_state, gauss or supergauss)");
}

std::string to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Completed: return "completed";
        case Outcome::Blowup: return "blowup";
        case Outcome::Aborted: return "aborted";
    }
    return "completed";
}

Field sample_initial(const Mesh& mesh, const InitialData& data, int sigma) {
    Field u(mesh.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = mesh.point(j);
        double v = 0.0;
        switch (data.shape) {
            case InitialShape::GroundState: v = ground_state(sigma, x); break;
            case InitialShape::Gauss: v = std::exp(-x * x); break;
            case InitialShape::SuperGauss: v = std::exp(-x * x * x * x); break;
        }
        u[j] = data.amplitude * v;
    }
    return u;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    require(sigma >= 1, "sigma must be a positive integer");
    require(half_length > 0.0, "half_length must be positive");
    require(dx > 0.0, "dx must be positive");
    require(dt0 > 0.0, "dt0 must be positive");
    require(t_end >= 0.0, "t_end must be non-negative");
    require(eps >= 0.0, "eps must be non-negative");
    require(tol1 > 0.0 && tol2 > 0.0, "refinement tolerances must be positive");
    require(min_spacing_ratio >= 0.0, "min_spacing_ratio must be non-negative");
    require(L_stop >= 0.0, "L_stop must be non-negative");
    require(dt_floor > 0.0, "dt_floor must be positive");
    require(fp_tol > 0.0, "fp_tol must be positive");
    require(fp_max_iter >= 1, "fp_max_iter must be at least 1");
    require(stride >= 1, "stride must be at least 1");
    require(point_cap >= 2, "point_cap must allow at least two points");
}

SolverConfig RunConfig::solver() const {
    SolverConfig s;
    s.scheme = scheme;
    s.le_bootstrap = le_bootstrap;
    s.sigma = sigma;
    s.fp_tol = fp_tol;
    s.fp_max_iter = fp_max_iter;
    s.dt_floor = dt_floor;
    s.L_stop = L_stop;
    s.point_cap = point_cap;
    s.boundary = boundary;
    return s;
}

TrajectoryDiagnostics run_trajectory(const RunConfig& cfg, std::uint64_t trial, const StepObserver& observer) {
    cfg.validate();
    Mesh mesh = build_uniform_mesh(cfg.half_length, cfg.dx);
    Field u0 = sample_initial(mesh, cfg.initial, cfg.sigma);
    std::optional<RefinementConfig> refinement;
    if (cfg.refinement) refinement = RefinementConfig::freeze(mesh, u0, cfg.tol1, cfg.tol2, cfg.sigma);

    State state = State::initial(std::move(mesh), std::move(u0), cfg.dt0);
    const SolverConfig solver = cfg.solver();
    const NoiseModel noise{cfg.noise, cfg.eps, cfg.seed, trial};

    std::vector<double> snapshot_times = cfg.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
    std::size_t next_snapshot = 0;

    TrajectoryDiagnostics diag;
    double tau = 0.0;
    double sup = sup_norm(state.u);
    double L = supnorm_L(sup, cfg.sigma);

    auto record = [&](double dt) {
        DiagnosticRow row;
        row.step = state.step_index;
        row.t = state.t;
        row.t_lo = state.t_lo;
        row.dt = dt;
        row.m_dis = discrete_mass(state.mesh, state.u);
        row.h_dis = discrete_energy(state.mesh, state.u, cfg.sigma);
        row.m_app = approx_mass_trapezoid(state.mesh, state.u);
        row.sup_norm = sup;
        row.grad_norm = gradient_norm(state.mesh, state.u);
        row.L = L;
        row.a = a_parameter(state.mesh, state.u, cfg.sigma);
        row.tau = tau;
        row.n_points = state.mesh.size();
        diag.rows.push_back(row);
    };
    auto take_snapshots = [&]() {
        const double now = state.t + state.t_lo;
        while (next_snapshot < snapshot_times.size() && snapshot_times[next_snapshot] <= now) {
            diag.snapshots.push_back({now, state.mesh, state.u});
            ++next_snapshot;
        }
    };
    auto finish = [&](Outcome outcome, std::string cause) {
        diag.outcome = outcome;
        diag.cause = std::move(cause);
    };

    record(0.0);
    take_snapshots();
    const double end_slack = 1e-12 * std::max(1.0, cfg.t_end);
    bool done = false;
    double last_dt = 0.0;

    while (!done) {
        const double remaining = (cfg.t_end - state.t) - state.t_lo;
        if (remaining <= end_slack) {
            finish(Outcome::Completed, "t_end");
            break;
        }
        double dt = cfg.dt0;
        if (cfg.adaptive_dt) {
            const TimeStepChoice choice = adapt_dt(state, solver);
            if (choice.at_floor) {
                finish(Outcome::Blowup, "dt_floor");
                break;
            }
            dt = choice.dt;
        }
        dt = std::min(dt, remaining);

        const double L_before = L;
        try {
            step(state, dt, solver, noise);
        } catch (const NonConvergence&) {
            finish(Outcome::Blowup, "nonconvergence");
            break;
        } catch (const NumericalBreakdown& e) {
            finish(Outcome::Aborted, std::string("numerical breakdown: ") + e.what());
            break;
        }
        last_dt = dt;
        tau += dt / (L_before * L_before);
        if (!field_is_finite(state.u)) {
            finish(Outcome::Aborted, "non-finite field");
            break;
        }

        bool refined = false;
        if (refinement) {
            auto flags = compute_refinement_flags(state.mesh, state.u, *refinement);
            if (cfg.min_spacing_ratio > 0.0) {
                const double smallest = cfg.min_spacing_ratio * supnorm_L(sup_norm(state.u), cfg.sigma);
                for (std::size_t j = 0; j < flags.size(); ++j)
                    if (flags[j] && 0.5 * state.mesh.spacings()[j] < smallest) flags[j] = false;
            }
            if (std::find(flags.begin(), flags.end(), true) != flags.end()) {
                try {
                    refine_state(state, flags, cfg.sigma, cfg.point_cap);
                } catch (const PointCapExceeded& e) {
                    finish(Outcome::Aborted, std::string("point cap: ") + e.what());
                    break;
                } catch (const NumericalBreakdown& e) {
                    finish(Outcome::Aborted, std::string("refinement: ") + e.what());
                    break;
                }
                refined = true;
                diag.refinements.push_back({state.t, state.mesh.size(), trace_and_mphi(state.mesh).trace});
            }
        }

        sup = sup_norm(state.u);
        L = supnorm_L(sup, cfg.sigma);
        if (L <= cfg.L_stop) {
            finish(Outcome::Blowup, "L_stop");
            break;
        }
        if (refined || state.step_index % cfg.stride == 0) record(dt);
        take_snapshots();
        if (observer && !observer(state, L)) {
            finish(Outcome::Completed, "observer");
            done = true;
        }
    }

    if (diag.rows.empty() || diag.rows.back().step != state.step_index) record(last_dt);
    diag.end_time = state.t;
    diag.end_time_lo = state.t_lo;
    const Center c = blowup_center(state.mesh, state.u);
    diag.center = c.x;
    diag.center_degenerate = c.degenerate;
    diag.final_state = Snapshot{state.t, std::move(state.mesh), std::move(state.u)};
    return diag;
}

EnsembleSummary run_ensemble(const RunConfig& cfg, const EnsembleOptions& options) {
    cfg.validate();
    if (options.trials < 1) throw ConfigError("an ensemble needs at least one trial");
    if (options.grid_points < 2) throw ConfigError("an ensemble needs at least two grid points");
    if (cfg.refinement) {
        const Mesh mesh = build_uniform_mesh(cfg.half_length, cfg.dx);
        RefinementConfig::freeze(mesh, sample_initial(mesh, cfg.initial, cfg.sigma), cfg.tol1, cfg.tol2, cfg.sigma);
    }

    const std::size_t n = options.trials;
    EnsembleSummary summary;
    summary.grid.resize(options.grid_points);
    for (std::size_t k = 0; k < options.grid_points; ++k)
        summary.grid[k] = cfg.t_end * static_cast<double>(k) / static_cast<double>(options.grid_points - 1);

    summary.trials.resize(n);
    std::vector<TrialCurves> curves(n);
    if (options.keep_trajectories) summary.trajectories.resize(n);

    auto run_one = [&](std::size_t i) {
        TrajectoryDiagnostics diag = run_trajectory(cfg, i);
        TrialResult& r = summary.trials[i];
        r.trial = i;
        r.outcome = diag.outcome;
        r.cause = diag.cause;
        r.end_time = diag.end_time + diag.end_time_lo;
        r.center = diag.center;
        r.center_degenerate = diag.center_degenerate;
        r.steps = diag.rows.empty() ? 0 : diag.rows.back().step;
        r.final_points = diag.rows.empty() ? 0 : diag.rows.back().n_points;

        TrialCurves& c = curves[i];
        c.mass.assign(summary.grid.size(), 0.0);
        c.energy.assign(summary.grid.size(), 0.0);
        c.alive.assign(summary.grid.size(), false);
        for (std::size_t k = 0; k < summary.grid.size(); ++k) {
            double m = 0.0, h = 0.0;
            if (interpolate_column(diag.rows, summary.grid[k], &DiagnosticRow::m_dis, m) &&
                interpolate_column(diag.rows, summary.grid[k], &DiagnosticRow::h_dis, h)) {
                c.mass[k] = m;
                c.energy[k] = h;
                c.alive[k] = true;
            }
        }
        if (options.keep_trajectories) summary.trajectories[i] = std::move(diag);
    };

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (std::size_t i = next++; i < n; i = next++) run_one(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    const std::size_t g = summary.grid.size();
    summary.mean_mass.assign(g, 0.0);
    summary.var_mass.assign(g, 0.0);
    summary.mean_energy.assign(g, 0.0);
    summary.var_energy.assign(g, 0.0);
    summary.alive.assign(g, 0);
    for (std::size_t k = 0; k < g; ++k) {
        std::size_t count = 0;
        double sm = 0.0, sh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!curves[i].alive[k]) continue;
            ++count;
            sm += curves[i].mass[k];
            sh += curves[i].energy[k];
        }
        summary.alive[k] = count;
        if (count == 0) continue;
        const double mm = sm / static_cast<double>(count);
        const double mh = sh / static_cast<double>(count);
        double vm = 0.0, vh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!curves[i].alive[k]) continue;
            vm += (curves[i].mass[k] - mm) * (curves[i].mass[k] - mm);
            vh += (curves[i].energy[k] - mh) * (curves[i].energy[k] - mh);
        }
        summary.mean_mass[k] = mm;
        summary.mean_energy[k] = mh;
        if (count > 1) {
            summary.var_mass[k] = vm / static_cast<double>(count - 1);
            summary.var_energy[k] = vh / static_cast<double>(count - 1);
        }
    }

    std::size_t blowups = 0;
    std::vector<double> centers;
    for (const auto& r : summary.trials) {
        if (r.outcome == Outcome::Aborted) ++summary.aborted;
        if (r.outcome != Outcome::Blowup) continue;
        ++blowups;
        if (!r.center_degenerate) centers.push_back(r.center);
    }
    summary.blowup_fraction = static_cast<double>(blowups) / static_cast<double>(n);
    if (!centers.empty()) summary.centers = center_statistics(centers);
    return summary;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("linear_fit: x and y lengths differ");
    if (x.size() < 2) throw FitRefused("linear_fit needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw FitRefused("linear_fit: abscissae have no spread");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.samples = x.size();
    double ssr = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (fit.intercept + fit.slope * x[k]);
        ssr += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return fit;
}

RateFit fit_blowup_rate(std::span<const RateSample> series, const RateFitOptions& options) {
    std::vector<RateSample> sel;
    for (const auto& s : series)
        if (s.L > 0.0 && s.L >= options.L_min && s.L <= options.L_max && std::isfinite(s.L)) sel.push_back(s);
    if (sel.size() < std::max<std::size_t>(options.min_samples, 3))
        throw FitRefused("rate fit: " + std::to_string(sel.size()) + " samples in the focusing window");
    const auto [lmin, lmax] = std::minmax_element(sel.begin(), sel.end(),
                                                  [](const RateSample& a, const RateSample& b) { return a.L < b.L; });
    const double decades = std::log10(lmax->L / lmin->L);
    if (!(decades >= options.min_decades))
        throw FitRefused("rate fit: L spans only " + std::to_string(decades) + " decades");

    const RateSample& ref = sel.back();
    std::vector<double> d(sel.size()), y(sel.size());
    for (std::size_t m = 0; m < sel.size(); ++m) {
        d[m] = (ref.t - sel[m].t) + (ref.t_lo - sel[m].t_lo);
        y[m] = std::log(sel[m].L);
    }
    for (std::size_t m = 0; m + 1 < sel.size(); ++m)
        if (!(d[m] > d[m + 1])) throw FitRefused("rate fit: sample times are not increasing");
    const double dt_last = d[d.size() - 2];
    const double span = d.front();

    std::vector<double> x(sel.size());
    auto evaluate = [&](double log_delta, LinearFit* out) {
        const double delta = std::exp(log_delta);
        for (std::size_t m = 0; m < d.size(); ++m) x[m] = std::log(d[m] + delta);
        const LinearFit f = linear_fit(x, y);
        if (out) *out = f;
        double ssr = 0.0;
        for (std::size_t m = 0; m < d.size(); ++m) {
            const double r = y[m] - (f.intercept + f.slope * x[m]);
            ssr += r * r;
        }
        return ssr;
    };

    const double lo = std::log(1e-3 * dt_last);
    const double hi = std::log(10.0 * std::max(span, dt_last));
    constexpr int kScan = 400;
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k <= kScan; ++k) {
        const double v = evaluate(lo + (hi - lo) * k / kScan, nullptr);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    double a = lo + (hi - lo) * std::max(best_k - 1, 0) / kScan;
    double b = lo + (hi - lo) * std::min(best_k + 1, kScan) / kScan;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - ratio * (b - a);
    double c2 = a + ratio * (b - a);
    double f1 = evaluate(c1, nullptr);
    double f2 = evaluate(c2, nullptr);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - ratio * (b - a);
            f1 = evaluate(c1, nullptr);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + ratio * (b - a);
            f2 = evaluate(c2, nullptr);
        }
    }
    const double log_delta = 0.5 * (a + b);
    LinearFit f;
    const double ssr = evaluate(log_delta, &f);

    RateFit fit;
    fit.slope = f.slope;
    fit.intercept = f.intercept;
    fit.residual = std::sqrt(ssr / static_cast<double>(sel.size()));
    fit.t_ref = ref.t;
    fit.t_ref_lo = ref.t_lo;
    fit.delta = std::exp(log_delta);
    fit.samples = sel.size();
    return fit;
}

ACorrection fit_a_correction(std::span<const TauA> series, AWindow window) {
    if (series.empty()) throw FitRefused("a-correction fit: empty series");
    double tau_max = 0.0;
    double L_min = std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        tau_max = std::max(tau_max, s.tau);
        if (s.L > 0.0) L_min = std::min(L_min, s.L);
    }
    const double tau_min = std::max(tau_max / 10.0, 1.0);
    if (window == AWindow::FocusingDecade && !std::isfinite(L_min))
        throw FitRefused("a-correction fit: no positive L in the series");
    auto in_window = [&](const TauA& s) {
        if (window == AWindow::FocusingDecade) return s.tau > 1.0 && s.L > 0.0 && s.L <= 10.0 * L_min;
        return s.tau > tau_min && s.tau <= tau_max;
    };
    std::vector<double> x, y;
    for (const auto& s : series) {
        if (in_window(s) && std::isfinite(s.a)) {
            x.push_back(1.0 / std::log(s.tau));
            y.push_back(s.a);
        }
    }
    if (x.size() < 3) throw FitRefused("a-correction fit: fewer than three samples in the final decade");
    ACorrection out;
    out.fit = linear_fit(x, y);
    const auto [amin, amax] = std::minmax_element(y.begin(), y.end());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    out.relative_variation = mean != 0.0 ? (*amax - *amin) / std::abs(mean) : std::numeric_limits<double>::infinity();
    return out;
}

std::vector<double> supercritical_rate_check(std::span<const SupSample> series, double a_limit, const RateFit& fit,
                                             int sigma) {
    std::vector<double> r;
    r.reserve(series.size());
    for (const auto& s : series) {
        const double remaining = ((fit.t_ref - s.t) + (fit.t_ref_lo - s.t_lo)) + fit.delta;
        if (!(remaining > 0.0)) throw DomainError("supercritical check: sample lies beyond the blow-up time");
        r.push_back(s.sup_norm * std::pow(2.0 * a_limit * remaining, 1.0 / (2.0 * sigma)));
    }
    return r;
}

std::vector<double> supercritical_rate_check(std::span<const SupSample> series, double a_limit, double T_est,
                                             int sigma) {
    RateFit fit;
    fit.t_ref = T_est;
    return supercritical_rate_check(series, a_limit, fit, sigma);
}

MomentSummary center_statistics(std::span<const double> centers) {
    if (centers.empty()) throw DomainError("center statistics of an empty sample");
    MomentSummary m;
    m.n = centers.size();
    const double n = static_cast<double>(m.n);
    m.mean = std::accumulate(centers.begin(), centers.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double c : centers) {
        const double d = c - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.variance = m.n > 1 ? m2 / (n - 1.0) : 0.0;
    if (m2 == 0.0) return m;
    const double g1 = (m3 / n) / std::pow(m2 / n, 1.5);
    const double g2 = (m4 / n) / ((m2 / n) * (m2 / n)) - 3.0;
    m.skewness = m.n > 2 ? g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0) : nan;
    m.excess_kurtosis = m.n > 3 ? ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)) : nan;
    return m;
}

ExpectedCurves expected_curves(const EnsembleSummary& summary) {
    ExpectedCurves out;
    for (std::size_t k = 0; k < summary.grid.size(); ++k) {
        if (summary.alive[k] == 0) continue;
        out.t.push_back(summary.grid[k]);
        out.mass.push_back(summary.mean_mass[k]);
        out.energy.push_back(summary.mean_energy[k]);
    }
    out.mass_fit = linear_fit(out.t, out.mass);
    out.energy_fit = linear_fit(out.t, out.energy);
    return out;
}

std::vector<RateSample> rate_samples(const TrajectoryDiagnostics& diag, int sigma, FocusingMode mode) {
    std::vector<RateSample> out;
    out.reserve(diag.rows.size());
    const double alpha = 1.0 + 2.0 / sigma;
    for (const auto& r : diag.rows) {
        const double L = mode == FocusingMode::SupNorm ? r.L : std::pow(r.grad_norm, -2.0 / alpha);
        out.push_back({r.t, L, r.t_lo});
    }
    return out;
}

std::vector<TauA> tau_a_samples(const TrajectoryDiagnostics& diag) {
    std::vector<TauA> out;
    out.reserve(diag.rows.size());
    for (const auto& r : diag.rows) out.push_back({r.tau, r.a, r.L});
    return out;
}

}  // namespace snls
