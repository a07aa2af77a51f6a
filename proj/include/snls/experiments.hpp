#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snls/mesh.hpp"
#include "snls/noise.hpp"
#include "snls/observables.hpp"
#include "snls/schemes.hpp"

namespace snls {

enum class InitialShape { GroundState, Gauss, SuperGauss };

std::string to_string(InitialShape shape);
InitialShape initial_shape_from_string(const std::string& name);

/// A·Q(x), A·e^{-x²} or A·e^{-x⁴}.
struct InitialData {
    InitialShape shape = InitialShape::GroundState;
    double amplitude = 1.0;
};

Field sample_initial(const Mesh& mesh, const InitialData& data, int sigma);

struct RunConfig {
    int sigma = 2;
    InitialData initial;
    double half_length = 20.0;  ///< Lc
    double dx = 0.05;
    double dt0 = 0.005;
    double t_end = 5.0;

    NoiseKind noise = NoiseKind::Deterministic;
    double eps = 0.0;
    std::uint64_t seed = 0;

    Scheme scheme = Scheme::LE;
    Scheme le_bootstrap = Scheme::CN;
    BoundaryMode boundary = BoundaryMode::Ghost;
    bool adaptive_dt = true;

    bool refinement = true;
    double tol1 = 2.0;
    double tol2 = 0.5;
    /// Flagged intervals are not split below this fraction of L = 1/‖u‖_∞^σ.
    /// 0 disables the guard.
    double min_spacing_ratio = 0.005;

    double L_stop = 1e-12;
    double dt_floor = 1e-30;
    double fp_tol = 1e-10;
    int fp_max_iter = 2000;
    std::size_t point_cap = kDefaultPointCap;

    std::size_t stride = 10;            ///< record every K steps
    std::vector<double> snapshot_times;  ///< full-field copies at these times

    /// Throws ConfigError on non-positive sizes, tolerances or counts.
    void validate() const;
    SolverConfig solver() const;
};

/// One recorded row of the time series.
struct DiagnosticRow {
    std::uint64_t step = 0;
    double t = 0.0;
    double t_lo = 0.0;  ///< compensation term of t
    double dt = 0.0;    ///< step that produced this state (0 for the initial row)
    double m_dis = 0.0;
    double h_dis = 0.0;
    double m_app = 0.0;
    double sup_norm = 0.0;
    double grad_norm = 0.0;
    double L = 0.0;  ///< supnorm mode
    double a = 0.0;
    double tau = 0.0;
    std::size_t n_points = 0;
};

enum class Outcome { Completed, Blowup, Aborted };

std::string to_string(Outcome outcome);

struct RefinementEvent {
    double t = 0.0;
    std::size_t n_points = 0;
    double trace = 0.0;
};

struct Snapshot {
    double t = 0.0;
    Mesh mesh;
    Field u;
};

struct TrajectoryDiagnostics {
    std::vector<DiagnosticRow> rows;
    std::vector<RefinementEvent> refinements;
    std::vector<Snapshot> snapshots;

    Outcome outcome = Outcome::Completed;
    std::string cause;  ///< "L_stop", "dt_floor", "nonconvergence" or the abort reason
    double end_time = 0.0;
    double end_time_lo = 0.0;
    double center = 0.0;  ///< blow-up center, meaningful for Outcome::Blowup
    bool center_degenerate = false;

    std::optional<Snapshot> final_state;

    bool blew_up() const { return outcome == Outcome::Blowup; }
};

/// Called after every accepted step (and refinement) with the current state and
/// its freshly computed supnorm L. Returning false stops the run as completed.
using StepObserver = std::function<bool(const State&, double L)>;

/// Runs one trajectory. Errors inside the loop are caught and reported through
/// the outcome; only an invalid configuration throws.
TrajectoryDiagnostics run_trajectory(const RunConfig& cfg, std::uint64_t trial,
                                     const StepObserver& observer = {});

struct TrialResult {
    std::uint64_t trial = 0;
    Outcome outcome = Outcome::Completed;
    std::string cause;
    double end_time = 0.0;
    double center = 0.0;
    bool center_degenerate = false;
    std::size_t steps = 0;
    std::size_t final_points = 0;
};

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct EnsembleSummary {
    std::vector<TrialResult> trials;
    std::vector<double> grid;  ///< common output times
    std::vector<double> mean_mass, var_mass;
    std::vector<double> mean_energy, var_energy;
    std::vector<std::size_t> alive;  ///< trials contributing at each grid time
    double blowup_fraction = 0.0;
    std::size_t aborted = 0;
    MomentSummary centers;  ///< over non-degenerate blow-up centers

    /// Per-trial diagnostics, kept only when requested.
    std::vector<TrajectoryDiagnostics> trajectories;
};

struct EnsembleOptions {
    std::size_t trials = 1;
    std::size_t workers = 1;
    std::size_t grid_points = 101;
    bool keep_trajectories = false;
};

/// Runs trials 0..N_t-1 on a worker pool. The summary depends only on the
/// configuration and N_t, never on the worker count.
EnsembleSummary run_ensemble(const RunConfig& cfg, const EnsembleOptions& options);

struct RateSample {
    double t = 0.0;
    double L = 0.0;
    double t_lo = 0.0;
};

struct RateFitOptions {
    double L_min = 0.0;  ///< only samples with L_min <= L <= L_max enter the fit
    double L_max = std::numeric_limits<double>::infinity();
    std::size_t min_samples = 20;
    double min_decades = 3.0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;  ///< log L = intercept + slope log(T - t)
    double residual = 0.0;   ///< root-mean-square residual of the log-log fit
    double t_ref = 0.0;      ///< last fitted time; T_est = t_ref + t_ref_lo + delta
    double t_ref_lo = 0.0;
    double delta = 0.0;
    std::size_t samples = 0;

    double T_est() const { return t_ref + (t_ref_lo + delta); }
};

/// Fits log L against log(T - t), choosing T beyond the last sample by a
/// logarithmic scan followed by golden-section refinement. Throws FitRefused
/// on too few samples or too little focusing.
RateFit fit_blowup_rate(std::span<const RateSample> series, const RateFitOptions& options = {});

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 1.0;
    std::size_t samples = 0;
};

/// Ordinary least squares y = intercept + slope x. R² is 1 for a flat series.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct TauA {
    double tau = 0.0;
    double a = 0.0;
    double L = 0.0;
};

/// Which samples count as the final decade: τ ∈ [τ_max/10, τ_max], or
/// L ∈ [L_min, 10 L_min] (the last decade of focusing).
enum class AWindow { TauDecade, FocusingDecade };

struct ACorrection {
    LinearFit fit;                  ///< a against 1/ln τ
    double relative_variation = 0.0;  ///< (max a - min a)/|mean a| over the window
};

/// Regression of a on 1/ln τ over the final decade, τ > 1.
ACorrection fit_a_correction(std::span<const TauA> series, AWindow window = AWindow::TauDecade);

struct SupSample {
    double t = 0.0;
    double sup_norm = 0.0;
    double t_lo = 0.0;
};

/// r(t) = ‖u‖_∞ (2 a_limit (T - t))^{1/(2σ)}, with T - t taken from the fit's
/// compensated reference time.
std::vector<double> supercritical_rate_check(std::span<const SupSample> series, double a_limit,
                                             const RateFit& fit, int sigma);
/// Same with a plain blow-up time.
std::vector<double> supercritical_rate_check(std::span<const SupSample> series, double a_limit, double T_est,
                                             int sigma);

/// Mean, unbiased variance, adjusted skewness and unbiased excess kurtosis.
/// Higher moments are 0 for a sample without spread and NaN when too small.
MomentSummary center_statistics(std::span<const double> centers);

struct ExpectedCurves {
    std::vector<double> t;
    std::vector<double> mass;
    std::vector<double> energy;
    LinearFit mass_fit;
    LinearFit energy_fit;
};

ExpectedCurves expected_curves(const EnsembleSummary& summary);

/// (t, L, t_lo) from the recorded rows; gradient mode converts ‖∇u‖ with α = 1 + 2/σ.
std::vector<RateSample> rate_samples(const TrajectoryDiagnostics& diag, int sigma,
                                     FocusingMode mode = FocusingMode::SupNorm);
std::vector<TauA> tau_a_samples(const TrajectoryDiagnostics& diag);

}  // namespace snls
