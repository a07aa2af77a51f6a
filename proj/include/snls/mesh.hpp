#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace snls {

using Complex = std::complex<double>;
using Field = std::vector<Complex>;

/// Non-uniform 1D grid x_0 < ... < x_N.
///
/// Spacings are stored alongside the points and are the values every
/// operator uses. Splitting an interval halves its spacing exactly, so the
/// quadrature weights of a refined mesh are exact binary fractions of the
/// original ones. Points are only used for geometry (centers, profiles, output).
///
/// Ghost spacings follow the Neumann closure: Δx_{-1} = Δx_0, Δx_N = Δx_{N-1}.
class Mesh {
public:
    /// Builds a mesh from explicit points; spacings are their differences.
    explicit Mesh(std::vector<double> points);

    /// Builds a mesh from points and matching spacings (used by refinement).
    Mesh(std::vector<double> points, std::vector<double> spacings);

    std::size_t size() const { return points_.size(); }
    std::size_t intervals() const { return spacings_.size(); }

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& spacings() const { return spacings_; }

    double point(std::size_t j) const { return points_[j]; }

    /// Δx_{j-1}, with the ghost value at j = 0.
    double spacing_left(std::size_t j) const { return j == 0 ? spacings_.front() : spacings_[j - 1]; }
    /// Δx_j, with the ghost value at j = N.
    double spacing_right(std::size_t j) const { return j == spacings_.size() ? spacings_.back() : spacings_[j]; }

    /// ½(Δx_{j-1} + Δx_j) including ghosts; the weight of the discrete mass.
    double weight(std::size_t j) const { return 0.5 * (spacing_left(j) + spacing_right(j)); }

    double min_spacing() const;
    double max_spacing() const;
    bool is_uniform(double rel_tol = 1e-12) const;

private:
    void validate() const;

    std::vector<double> points_;
    std::vector<double> spacings_;
};

/// Uniform mesh on [-Lc, Lc] with N = round(2 Lc / Δx) intervals.
Mesh build_uniform_mesh(double half_length, double dx);

/// Three-point stencil coefficients for one operator, per grid point.
struct Stencil {
    std::vector<double> lower;   ///< multiplies f_{j-1} (ghost f_0 at j = 0)
    std::vector<double> center;  ///< multiplies f_j
    std::vector<double> upper;   ///< multiplies f_{j+1} (ghost f_N at j = N)
};

/// Second-difference stencil on a non-uniform mesh, ghost closure folded in.
Stencil second_derivative_stencil(const Mesh& mesh);
/// First-difference stencil on a non-uniform mesh, ghost closure folded in.
Stencil first_derivative_stencil(const Mesh& mesh);

Field apply_stencil(const Stencil& stencil, std::span<const Complex> f);

Field d2_apply(const Mesh& mesh, std::span<const Complex> f);
Field d1_apply(const Mesh& mesh, std::span<const Complex> f);

/// Throws ShapeError when the field does not have one value per mesh point.
void check_shape(const Mesh& mesh, std::size_t field_size, const char* what);

struct RefinementConfig {
    double tol1 = 2.0;
    double tol2 = 0.5;
    int sigma = 2;
    double m_tol1 = 0.0;  ///< frozen jump threshold
    double m_tol2 = 0.0;  ///< frozen amplitude threshold

    /// Computes both thresholds from the initial state. They are never
    /// recomputed afterwards. Throws ConfigError when both vanish.
    static RefinementConfig freeze(const Mesh& mesh, std::span<const Complex> u0,
                                   double tol1, double tol2, int sigma);
};

/// γ_j = (Δx_j)^{1/σ} |u_{j+1} - u_j| per interval.
std::vector<double> jump_indicator(const Mesh& mesh, std::span<const Complex> u, int sigma);
/// η_j = (Δx_j)^{1/σ} |u_{j+1} + u_j| per interval.
std::vector<double> amplitude_indicator(const Mesh& mesh, std::span<const Complex> u, int sigma);

/// Interval j is flagged iff γ_j > M_tol1 or η_j > M_tol2.
std::vector<bool> compute_refinement_flags(const Mesh& mesh, std::span<const Complex> u,
                                           const RefinementConfig& cfg);

/// Midpoint value with |w|² = ½(|a|² + |b|²); real and imaginary parts are
/// interpolated in quadrature and carry the sign of their sum (sgn 0 = +1).
Complex midpoint_interpolate(Complex a, Complex b);

/// Same rule applied to a single real component.
double midpoint_component(double a, double b);

struct RefineResult {
    Mesh mesh;
    Field u;
    std::size_t inserted = 0;
};

inline constexpr std::size_t kDefaultPointCap = 2'000'000;

/// Splits every flagged interval at its midpoint and fills the new value by
/// midpoint_interpolate. Throws PointCapExceeded if the result would exceed
/// point_cap points.
RefineResult refine(const Mesh& mesh, std::span<const Complex> u, const std::vector<bool>& flags,
                    std::size_t point_cap = kDefaultPointCap);

/// Inserts a value after every flagged interval using a caller-supplied rule.
/// Keeps auxiliary per-point data aligned with a mesh refined by the same flags.
template <typename T, typename Rule>
std::vector<T> insert_midpoints(std::span<const T> values, const std::vector<bool>& flags, Rule rule) {
    std::vector<T> out;
    out.reserve(values.size() + flags.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        out.push_back(values[j]);
        if (j < flags.size() && flags[j]) out.push_back(rule(values[j], values[j + 1]));
    }
    return out;
}

}  // namespace snls
