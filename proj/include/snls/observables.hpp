#pragma once

#include <span>
#include <string>
#include <vector>

#include "snls/mesh.hpp"

namespace snls {

/// ½ Σ_j |u_j|² (Δx_j + Δx_{j-1}) with ghost spacings.
double discrete_mass(const Mesh& mesh, std::span<const Complex> u);

struct EnergyParts {
    double kinetic = 0.0;    ///< ½ Σ_j |u_{j+1} - u_j|² / Δx_j
    double potential = 0.0;  ///< (1/(2σ+2)) Σ_j w_j |u_j|^{2σ+2}
    double total() const { return kinetic - potential; }
};

EnergyParts discrete_energy_parts(const Mesh& mesh, std::span<const Complex> u, int sigma);
double discrete_energy(const Mesh& mesh, std::span<const Complex> u, int sigma);

/// Composite trapezoid rule for ∫|u|².
double approx_mass_trapezoid(const Mesh& mesh, std::span<const Complex> u);

/// Composite trapezoid weights ½Δx_0, ½(Δx_{j-1}+Δx_j), ½Δx_{N-1}.
std::vector<double> trapezoid_weights(const Mesh& mesh);

struct ErrorRanges {
    double discrete_mass = 0.0;  ///< ℰ₁[M]
    double approx_mass = 0.0;    ///< ℰ₂[M]
    double energy = 0.0;         ///< ℰ[H]
};

/// max - min of a series; DomainError on an empty series.
double series_range(std::span<const double> series);
ErrorRanges error_ranges(std::span<const double> m_dis, std::span<const double> m_app,
                         std::span<const double> h_dis);

double sup_norm(std::span<const Complex> u);
/// ‖∇u‖_{L²} from the first-difference stencil and trapezoid weights.
double gradient_norm(const Mesh& mesh, std::span<const Complex> u);

enum class FocusingMode { SupNorm, Gradient };

/// L = 1/‖u‖_∞^σ (SupNorm) or (1/‖∇u‖)^{2/α} with α = 1 + 2/σ (Gradient).
double focusing_L(const Mesh& mesh, std::span<const Complex> u, int sigma, FocusingMode mode);

/// Contraction rate a = -(2/α) (‖∇u‖²)^{-(2/α+1)} ∫ |u|^{2σ} Im(u_xx ū) dx.
double a_parameter(const Mesh& mesh, std::span<const Complex> u, int sigma);

struct TauSample {
    double dt = 0.0;
    double L = 0.0;
};

/// τ_m = Σ_{k<m} Δt_k / L_k²; output has one more entry than the input (τ_0 = 0).
std::vector<double> rescaled_tau(std::span<const TauSample> series);

/// Q(x) = (1+σ)^{1/(2σ)} sech^{1/σ}(σ x).
double ground_state(int sigma, double x);
Field ground_state_field(const Mesh& mesh, int sigma, double amplitude = 1.0);

/// sup over ξ ∈ [-window, window] of | L^{1/σ}|u(x_c + Lξ)| - Q(ξ) |, with u
/// interpolated linearly in |u|.
double rescaled_profile_distance(const Mesh& mesh, std::span<const Complex> u, int sigma, double x_center,
                                 double L, double window = 2.0, std::size_t samples = 801);

struct Center {
    double x = 0.0;
    bool degenerate = false;  ///< flat maximum: no interior peak to interpolate
};

/// Vertex of the parabola through |u|² at the discrete argmax and its two neighbours.
Center blowup_center(const Mesh& mesh, std::span<const Complex> u);

}  // namespace snls
