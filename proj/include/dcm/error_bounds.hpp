#pragma once

#include "dcm/mesh.hpp"
#include "dcm/param_surface.hpp"
#include "dcm/types.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

namespace dcm {

struct BoundsConfig {
    double C_M = 0.0;
    double C_L = 0.0;
    double sigma_min = 1.0;
    double sigma_max = 1.0;
    double total_area = 0.0;

    void validate() const;
};

// C_M * d(Omega)^2.
[[nodiscard]] double tau_bound(const BoundsConfig& cfg, double d_omega);

// |[w_jk, w_ki, w_ij]|_2 / (2T): the largest pseudoinverse norm over the parameter triangle.
[[nodiscard]] double omega_dagger_norm(const std::array<Vec2, 3>& omega);
// Spectral norm of the pseudoinverse of [w_i - w, w_j - w, w_k - w], computed by SVD.
[[nodiscard]] double omega_dagger_norm_at(const std::array<Vec2, 3>& omega, const Vec2& w);

struct EigGridReport {
    std::array<double, 2> grid_min{};           // per eigenvalue (ascending)
    std::array<double, 2> at_centroid{};        // lambda(c*)
    std::array<double, 2> reference{};          // eig(C C^T - 3 c* c*^T)
    std::array<int, 2> nearest_min_cells{};     // Chebyshev distance (cells) of the closest minimizer
    std::array<int, 2> minimizer_count{};       // grid nodes attaining the minimum
    bool passed = false;
};

// Grid of resolution x resolution nodes over c* +- half_width. The minimum of each eigenvalue must
// be attained within `cells` grid cells of c*.
[[nodiscard]] EigGridReport verify_eig_centroid(const Eigen::Matrix<double, 2, 3>& points, int resolution,
                                                double half_width, int cells = 1);

// 3 C_M d^3 / (sigma_min T); +inf when sigma_min is zero.
[[nodiscard]] double nQ_bound(const BoundsConfig& cfg, double d_omega, double T);

struct ParamGeom {
    double d_omega = 0.0;
    double theta_min_omega = 0.0;
    double T = 0.0;  // area of the parameter triangle
};
[[nodiscard]] ParamGeom param_triangle_metrics(const std::array<Vec2, 3>& omega);

struct PsiBounds {
    double psi_prime = 0.0;  // +inf when the local sigma_min vanishes
    double psi_double_prime = 0.0;
    // psi' with the tangent-error factor capped at 1, the trivial bound on |n^T Q|.
    double psi_prime_capped = 0.0;
    // Coarser bounds in terms of d/sin(theta) only.
    double psi_prime_simple = 0.0;
    double psi_double_prime_simple = 0.0;
};

[[nodiscard]] PsiBounds psi_bounds(const BoundsConfig& cfg, const TriangleGeom& geom, const ParamGeom& omega);

// Bound on the integral of psi^2: 2 (sqrt(E_D) psi'_max + sqrt(area / 2) psi''_max)^2.
[[nodiscard]] double int_psi_sq_bound(double dirichlet, double psi_prime_max, double total_area,
                                      double psi_double_prime_max);
// 1/2 int psi^2 + sqrt(2 E_D^h int psi^2).
[[nodiscard]] double discretization_error_bound(double dirichlet_h, double int_psi_sq);

struct TriangleQuality {
    double d_V = 0.0;
    double theta_min_V = 0.0;
    double ratio_dsin = 0.0;
    double ratio_dr = 0.0;
    double d_Omega = 0.0;
    double theta_min_Omega = 0.0;
    double T = 0.0;
};

struct QualityReport {
    std::vector<TriangleQuality> faces;
    double max_dsin = 0.0;
    double max_dr = 0.0;
    double h_V = 0.0;
    double h_Omega = 0.0;
};

// params may be null (parameter columns stay zero).
[[nodiscard]] QualityReport quality_report(const TriMesh& mesh, const std::vector<ParamTriangle>* params);
[[nodiscard]] bool strictly_decreasing(const std::vector<double>& values);

struct DegradationFlag {
    int face = 0;
    double short_ratio = 0.0;  // a / c
    double mid_ratio = 0.0;    // b / c
};

// Sorted edges a <= b <= c flagged when a/c <= eps_short and |b/c - 1| <= eps_mid.
[[nodiscard]] std::vector<DegradationFlag> delaunay_degradation_scan(const TriMesh& mesh, double eps_short = 0.1,
                                                                     double eps_mid = 0.1);

struct FaceBound {
    int face = 0;
    double tau_bound = 0.0;
    double omega_dagger_norm = 0.0;
    double nQ_bound = 0.0;
    double psi_prime = 0.0;  // capped, see PsiBounds
    double psi_double_prime = 0.0;
    double d_V = 0.0;
    double ratio_dsin = 0.0;
    double ratio_dr = 0.0;
    // Largest sampled |tau| and |n^T Q|; NaN when not sampled.
    double tau_measured = std::numeric_limits<double>::quiet_NaN();
    double nQ_measured = std::numeric_limits<double>::quiet_NaN();
};

struct BoundReport {
    std::vector<FaceBound> faces;
    double psi_prime_max = 0.0;
    double psi_double_prime_max = 0.0;
    double int_psi_sq_bound = 0.0;
    double dirichlet_h = 0.0;
    double eps_Dh = 0.0;
    double max_dsin = 0.0;
    double max_dr = 0.0;
    bool sampled = false;
    bool sound = true;  // every sample within its bound (1e-9 slack)
};

inline constexpr double kSoundnessSlack = 1e-9;

// |<n, x(omega) - v_i>| for the covering face.
[[nodiscard]] double measured_tau(const ParamSurface& s, const std::array<Vec3, 3>& v, const Vec2& omega);
// |n^T Q| with Q an orthonormal basis of the tangent plane at x(omega).
[[nodiscard]] double measured_nQ(const ParamSurface& s, const std::array<Vec3, 3>& v, const Vec2& omega);

// samples_per_face > 0 requires the surface and adds measured columns (deterministic sample points).
[[nodiscard]] BoundReport bound_report(const TriMesh& mesh, const std::vector<ParamTriangle>& params,
                                       const BoundsConfig& cfg, double dirichlet_h,
                                       const ParamSurface* surface = nullptr, int samples_per_face = 0);

void write_bound_report_csv(std::ostream& out, const BoundReport& report);
void write_quality_csv(std::ostream& out, const QualityReport& report,
                       const std::vector<DegradationFlag>& flags);

using SurfaceGradient = std::function<Eigen::Matrix<double, 2, 3>(const Vec3&)>;

// max over edges of |grad f(v_a) - grad f(v_b)|_F / |v_a - v_b|.
[[nodiscard]] double estimate_C_L(const TriMesh& mesh, const SurfaceGradient& grad);
// 1/2 integral of |grad f|_F^2 over the surface, by quadrature on every parameter patch.
[[nodiscard]] double continuous_dirichlet(const ParamSurface& s, const std::vector<ParamTriangle>& params,
                                          const SurfaceGradient& grad, int degree);

}  // namespace dcm
