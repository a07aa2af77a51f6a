#include "snls/observables.hpp"

#include <algorithm>
#include <cmath>

#include "snls/errors.hpp"

namespace snls {

double discrete_mass(const Mesh& mesh, std::span<const Complex> u) {
    check_shape(mesh, u.size(), "discrete_mass");
    double m = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) m += std::norm(u[j]) * mesh.weight(j);
    return m;
}

EnergyParts discrete_energy_parts(const Mesh& mesh, std::span<const Complex> u, int sigma) {
    check_shape(mesh, u.size(), "discrete_energy");
    EnergyParts e;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) e.kinetic += std::norm(u[j + 1] - u[j]) / mesh.spacings()[j];
    e.kinetic *= 0.5;
    for (std::size_t j = 0; j < u.size(); ++j) e.potential += mesh.weight(j) * std::pow(std::norm(u[j]), sigma + 1);
    e.potential /= 2.0 * sigma + 2.0;
    return e;
}

double discrete_energy(const Mesh& mesh, std::span<const Complex> u, int sigma) {
    return discrete_energy_parts(mesh, u, sigma).total();
}

std::vector<double> trapezoid_weights(const Mesh& mesh) {
    std::vector<double> w(mesh.size());
    const auto& dx = mesh.spacings();
    w.front() = 0.5 * dx.front();
    w.back() = 0.5 * dx.back();
    for (std::size_t j = 1; j + 1 < w.size(); ++j) w[j] = 0.5 * (dx[j - 1] + dx[j]);
    return w;
}

double approx_mass_trapezoid(const Mesh& mesh, std::span<const Complex> u) {
    check_shape(mesh, u.size(), "approx_mass_trapezoid");
    const auto w = trapezoid_weights(mesh);
    double m = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) m += w[j] * std::norm(u[j]);
    return m;
}

double series_range(std::span<const double> series) {
    if (series.empty()) throw DomainError("range of an empty series");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    return *hi - *lo;
}

ErrorRanges error_ranges(std::span<const double> m_dis, std::span<const double> m_app,
                         std::span<const double> h_dis) {
    return {series_range(m_dis), series_range(m_app), series_range(h_dis)};
}

double sup_norm(std::span<const Complex> u) {
    double s = 0.0;
    for (const auto& v : u) s = std::max(s, std::abs(v));
    return s;
}

double gradient_norm(const Mesh& mesh, std::span<const Complex> u) {
    const Field du = d1_apply(mesh, u);
    const auto w = trapezoid_weights(mesh);
    double g = 0.0;
    for (std::size_t j = 0; j < du.size(); ++j) g += w[j] * std::norm(du[j]);
    return std::sqrt(g);
}

double focusing_L(const Mesh& mesh, std::span<const Complex> u, int sigma, FocusingMode mode) {
    if (mode == FocusingMode::SupNorm) return 1.0 / std::pow(sup_norm(u), sigma);
    const double alpha = 1.0 + 2.0 / sigma;
    return std::pow(1.0 / gradient_norm(mesh, u), 2.0 / alpha);
}

double a_parameter(const Mesh& mesh, std::span<const Complex> u, int sigma) {
    const Field uxx = d2_apply(mesh, u);
    const auto w = trapezoid_weights(mesh);
    double integral = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        integral += w[j] * std::pow(std::norm(u[j]), sigma) * std::imag(uxx[j] * std::conj(u[j]));
    if (integral == 0.0) return 0.0;
    const double g = std::pow(gradient_norm(mesh, u), 2);
    const double p = 2.0 / (1.0 + 2.0 / sigma);
    return -p * std::pow(g, -(p + 1.0)) * integral;
}

std::vector<double> rescaled_tau(std::span<const TauSample> series) {
    std::vector<double> tau(series.size() + 1, 0.0);
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!(series[k].L > 0.0)) throw DomainError("rescaled_tau needs L > 0");
        tau[k + 1] = tau[k] + series[k].dt / (series[k].L * series[k].L);
    }
    return tau;
}

double ground_state(int sigma, double x) {
    const double s = static_cast<double>(sigma);
    return std::pow(1.0 + s, 1.0 / (2.0 * s)) * std::pow(1.0 / std::cosh(s * x), 1.0 / s);
}

Field ground_state_field(const Mesh& mesh, int sigma, double amplitude) {
    Field u(mesh.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = amplitude * ground_state(sigma, mesh.point(j));
    return u;
}

double rescaled_profile_distance(const Mesh& mesh, std::span<const Complex> u, int sigma, double x_center,
                                 double L, double window, std::size_t samples) {
    check_shape(mesh, u.size(), "rescaled_profile_distance");
    if (!(L > 0.0)) throw DomainError("profile distance needs L > 0");
    if (samples < 2) throw DomainError("profile distance needs at least two samples");
    const auto& x = mesh.points();
    const double amplitude_scale = std::pow(L, 1.0 / sigma);
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double xi = -window + 2.0 * window * static_cast<double>(k) / static_cast<double>(samples - 1);
        const double pos = x_center + L * xi;
        double modulus;
        if (pos <= x.front()) {
            modulus = std::abs(u.front());
        } else if (pos >= x.back()) {
            modulus = std::abs(u.back());
        } else {
            const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), pos) - x.begin());
            const std::size_t lo = hi - 1;
            const double theta = (pos - x[lo]) / mesh.spacings()[lo];
            modulus = (1.0 - theta) * std::abs(u[lo]) + theta * std::abs(u[hi]);
        }
        worst = std::max(worst, std::abs(amplitude_scale * modulus - ground_state(sigma, xi)));
    }
    return worst;
}

Center blowup_center(const Mesh& mesh, std::span<const Complex> u) {
    check_shape(mesh, u.size(), "blowup_center");
    std::size_t j = 0;
    double best = std::norm(u[0]);
    for (std::size_t k = 1; k < u.size(); ++k) {
        const double v = std::norm(u[k]);
        if (v > best) {
            best = v;
            j = k;
        }
    }
    const std::size_t last = u.size() - 1;
    if (j == 0 || j == last) {
        const std::size_t nb = j == 0 ? 1 : last - 1;
        return {mesh.point(j), std::norm(u[nb]) == best};
    }
    const double y0 = std::norm(u[j - 1]);
    const double y1 = best;
    const double y2 = std::norm(u[j + 1]);
    const double h0 = -mesh.spacings()[j - 1];
    const double h2 = mesh.spacings()[j];
    const double denom = h2 * (y1 - y0) - h0 * (y1 - y2);
    if (denom == 0.0 || (y0 == y1 && y2 == y1)) return {mesh.point(j), true};
    const double offset = -0.5 * (h0 * h0 * (y1 - y2) - h2 * h2 * (y1 - y0)) / denom;
    return {mesh.point(j) + offset, false};
}

}  // namespace snls
