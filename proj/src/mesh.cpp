#include "snls/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snls/errors.hpp"

namespace snls {

Mesh::Mesh(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw ConfigError("mesh needs at least two points");
    spacings_.resize(points_.size() - 1);
    for (std::size_t j = 0; j + 1 < points_.size(); ++j) spacings_[j] = points_[j + 1] - points_[j];
    validate();
}

Mesh::Mesh(std::vector<double> points, std::vector<double> spacings)
    : points_(std::move(points)), spacings_(std::move(spacings)) {
    if (points_.size() < 2) throw ConfigError("mesh needs at least two points");
    if (spacings_.size() + 1 != points_.size())
        throw ConfigError("mesh spacings must number one less than points");
    validate();
}

void Mesh::validate() const {
    for (std::size_t j = 0; j < spacings_.size(); ++j) {
        if (!(spacings_[j] > 0.0) || !std::isfinite(spacings_[j]))
            throw ConfigError("mesh spacing " + std::to_string(j) + " is not positive");
        if (!(points_[j + 1] > points_[j]))
            throw ConfigError("mesh points are not strictly increasing at " + std::to_string(j));
    }
}

double Mesh::min_spacing() const { return *std::min_element(spacings_.begin(), spacings_.end()); }
double Mesh::max_spacing() const { return *std::max_element(spacings_.begin(), spacings_.end()); }

bool Mesh::is_uniform(double rel_tol) const {
    const double lo = min_spacing();
    const double hi = max_spacing();
    return hi - lo <= rel_tol * hi;
}

Mesh build_uniform_mesh(double half_length, double dx) {
    if (!(half_length > 0.0) || !(dx > 0.0) || dx > 2.0 * half_length)
        throw ConfigError("uniform mesh needs Lc > 0 and 0 < dx <= 2 Lc");
    const double ratio = 2.0 * half_length / dx;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
        throw ConfigError("2 Lc / dx = " + std::to_string(ratio) + " is not an integer");
    const auto intervals = static_cast<std::size_t>(n);
    std::vector<double> points(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) points[j] = -half_length + static_cast<double>(j) * dx;
    points.back() = half_length;
    return Mesh(std::move(points), std::vector<double>(intervals, dx));
}

void check_shape(const Mesh& mesh, std::size_t field_size, const char* what) {
    if (field_size != mesh.size())
        throw ShapeError(std::string(what) + ": field has " + std::to_string(field_size) +
                         " values, mesh has " + std::to_string(mesh.size()) + " points");
}

Stencil second_derivative_stencil(const Mesh& mesh) {
    const std::size_t n = mesh.size();
    Stencil s{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double a = mesh.spacing_left(j);
        const double b = mesh.spacing_right(j);
        double lower = 2.0 / (a * (a + b));
        double center = -2.0 / (a * b);
        double upper = 2.0 / ((a + b) * b);
        // Neumann ghosts f_{-1} = f_0 and f_{N+1} = f_N fold into the diagonal.
        if (j == 0) {
            center += lower;
            lower = 0.0;
        }
        if (j == n - 1) {
            center += upper;
            upper = 0.0;
        }
        s.lower[j] = lower;
        s.center[j] = center;
        s.upper[j] = upper;
    }
    return s;
}

Stencil first_derivative_stencil(const Mesh& mesh) {
    const std::size_t n = mesh.size();
    Stencil s{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double a = mesh.spacing_left(j);
        const double b = mesh.spacing_right(j);
        double lower = -b / (a * (a + b));
        double center = (b - a) / (a * b);
        double upper = a / ((a + b) * b);
        if (j == 0) {
            center += lower;
            lower = 0.0;
        }
        if (j == n - 1) {
            center += upper;
            upper = 0.0;
        }
        s.lower[j] = lower;
        s.center[j] = center;
        s.upper[j] = upper;
    }
    return s;
}

Field apply_stencil(const Stencil& s, std::span<const Complex> f) {
    const std::size_t n = f.size();
    if (s.center.size() != n) throw ShapeError("stencil and field sizes differ");
    Field out(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex v = s.center[j] * f[j];
        if (j > 0) v += s.lower[j] * f[j - 1];
        if (j + 1 < n) v += s.upper[j] * f[j + 1];
        out[j] = v;
    }
    return out;
}

Field d2_apply(const Mesh& mesh, std::span<const Complex> f) {
    check_shape(mesh, f.size(), "d2_apply");
    return apply_stencil(second_derivative_stencil(mesh), f);
}

Field d1_apply(const Mesh& mesh, std::span<const Complex> f) {
    check_shape(mesh, f.size(), "d1_apply");
    return apply_stencil(first_derivative_stencil(mesh), f);
}

std::vector<double> jump_indicator(const Mesh& mesh, std::span<const Complex> u, int sigma) {
    check_shape(mesh, u.size(), "jump_indicator");
    std::vector<double> out(mesh.intervals());
    const double p = 1.0 / sigma;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::pow(mesh.spacings()[j], p) * std::abs(u[j + 1] - u[j]);
    return out;
}

std::vector<double> amplitude_indicator(const Mesh& mesh, std::span<const Complex> u, int sigma) {
    check_shape(mesh, u.size(), "amplitude_indicator");
    std::vector<double> out(mesh.intervals());
    const double p = 1.0 / sigma;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::pow(mesh.spacings()[j], p) * std::abs(u[j + 1] + u[j]);
    return out;
}

RefinementConfig RefinementConfig::freeze(const Mesh& mesh, std::span<const Complex> u0, double tol1,
                                          double tol2, int sigma) {
    if (!(tol1 > 0.0) || !(tol2 > 0.0)) throw ConfigError("refinement tolerances must be positive");
    if (sigma < 1) throw ConfigError("sigma must be a positive integer");
    const auto gamma = jump_indicator(mesh, u0, sigma);
    const auto eta = amplitude_indicator(mesh, u0, sigma);
    RefinementConfig cfg;
    cfg.tol1 = tol1;
    cfg.tol2 = tol2;
    cfg.sigma = sigma;
    cfg.m_tol1 = tol1 * *std::max_element(gamma.begin(), gamma.end());
    cfg.m_tol2 = tol2 * *std::max_element(eta.begin(), eta.end());
    if (cfg.m_tol1 == 0.0 && cfg.m_tol2 == 0.0)
        throw ConfigError("refinement thresholds are degenerate (initial field is zero)");
    return cfg;
}

std::vector<bool> compute_refinement_flags(const Mesh& mesh, std::span<const Complex> u,
                                           const RefinementConfig& cfg) {
    check_shape(mesh, u.size(), "compute_refinement_flags");
    std::vector<bool> flags(mesh.intervals(), false);
    const double p = 1.0 / cfg.sigma;
    for (std::size_t j = 0; j < flags.size(); ++j) {
        const double scale = std::pow(mesh.spacings()[j], p);
        const double gamma = scale * std::abs(u[j + 1] - u[j]);
        const double eta = scale * std::abs(u[j + 1] + u[j]);
        flags[j] = gamma > cfg.m_tol1 || eta > cfg.m_tol2;
    }
    return flags;
}

double midpoint_component(double a, double b) {
    const double magnitude = std::sqrt(0.5 * (a * a + b * b));
    return (a + b) < 0.0 ? -magnitude : magnitude;
}

Complex midpoint_interpolate(Complex a, Complex b) {
    return {midpoint_component(a.real(), b.real()), midpoint_component(a.imag(), b.imag())};
}

namespace {

// Splitting an end interval also halves the ghost spacing of the end point, so
// that point gives up its whole mass share instead of a quarter; the inserted
// value absorbs the difference.
Complex refined_value(Complex left, Complex right, bool left_is_end, bool right_is_end) {
    Complex w = midpoint_interpolate(left, right);
    if (!left_is_end && !right_is_end) return w;
    const double target = (left_is_end ? 1.0 : 0.5) * std::norm(left) + (right_is_end ? 1.0 : 0.5) * std::norm(right);
    const double current = std::norm(w);
    if (current > 0.0) w *= std::sqrt(target / current);
    return w;
}

}  // namespace

RefineResult refine(const Mesh& mesh, std::span<const Complex> u, const std::vector<bool>& flags,
                    std::size_t point_cap) {
    check_shape(mesh, u.size(), "refine");
    if (flags.size() != mesh.intervals()) throw ShapeError("refine: one flag per interval required");
    const auto inserted = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    if (inserted == 0) return {mesh, Field(u.begin(), u.end()), 0};
    if (mesh.size() + inserted > point_cap)
        throw PointCapExceeded("refinement would exceed the point cap of " + std::to_string(point_cap));

    std::vector<double> points;
    std::vector<double> spacings;
    Field values;
    points.reserve(mesh.size() + inserted);
    spacings.reserve(mesh.intervals() + inserted);
    values.reserve(mesh.size() + inserted);
    for (std::size_t j = 0; j < mesh.size(); ++j) {
        points.push_back(mesh.point(j));
        values.push_back(u[j]);
        if (j == mesh.intervals()) break;
        const double dx = mesh.spacings()[j];
        if (flags[j]) {
            const double mid = mesh.point(j) + 0.5 * dx;
            if (!(mid > mesh.point(j) && mid < mesh.point(j + 1)))
                throw NumericalBreakdown("mesh resolution exhausted near x = " + std::to_string(mid));
            points.push_back(mid);
            values.push_back(refined_value(u[j], u[j + 1], j == 0, j + 1 == mesh.intervals()));
            spacings.push_back(0.5 * dx);
            spacings.push_back(0.5 * dx);
        } else {
            spacings.push_back(dx);
        }
    }
    return {Mesh(std::move(points), std::move(spacings)), std::move(values), inserted};
}

}  // namespace snls
