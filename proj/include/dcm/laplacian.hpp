#pragma once

#include "dcm/mesh.hpp"
#include "dcm/param_surface.hpp"
#include "dcm/types.hpp"

#include <Eigen/SparseCore>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcm {

enum class RhoKind { unit, analytic, quadrature };

struct RhoMode {
    RhoKind kind = RhoKind::unit;
    int order = 3;  // quadrature degree

    [[nodiscard]] static RhoMode unit() { return {RhoKind::unit, 0}; }
    // Spherical excess of the face's vertices on the sphere through them (centered at the origin).
    [[nodiscard]] static RhoMode analytic() { return {RhoKind::analytic, 0}; }
    [[nodiscard]] static RhoMode quadrature(int order) { return {RhoKind::quadrature, order}; }

    [[nodiscard]] std::string name() const;
    [[nodiscard]] static RhoMode parse(const std::string& text);
};

struct EdgeWeight {
    int i = 0;
    int j = 0;
    double weight = 0.0;
    // Opposite-angle cotangent and area ratio of each adjacent face (second unused on boundary).
    double cot_left = 0.0;
    double cot_right = 0.0;
    double rho_left = 1.0;
    double rho_right = 1.0;
    bool boundary = false;
};

struct CotanLaplacian {
    int dimension = 0;
    Eigen::SparseMatrix<double> matrix;
    std::vector<EdgeWeight> edges;  // sorted by (i, j), i < j
    std::vector<double> rho;        // per face
};

struct EnergyBreakdown {
    double dirichlet = 0.0;
    double area = 0.0;
    double conformal = 0.0;
};

// Per-face area ratios. Non-unit modes need the parameterization and per-face parameter triangles.
[[nodiscard]] std::vector<double> compute_rho(const TriMesh& mesh, RhoMode mode,
                                              const ParamSurface* surface = nullptr,
                                              const std::vector<ParamTriangle>* params = nullptr);

[[nodiscard]] CotanLaplacian assemble_laplacian(const TriMesh& mesh, const std::vector<double>& rho);
[[nodiscard]] CotanLaplacian assemble_laplacian(const TriMesh& mesh, RhoMode mode,
                                                const ParamSurface* surface = nullptr,
                                                const std::vector<ParamTriangle>* params = nullptr);

// 1/2 <Lf, f>.
[[nodiscard]] double dirichlet_energy(const CotanLaplacian& lap, const VertexMap& f);
// 1/2 sum over edges of w * |f_i - f_j|^2.
[[nodiscard]] double dirichlet_energy_edges(const CotanLaplacian& lap, const VertexMap& f);

// Face share of the discrete Dirichlet energy, two equivalent formulas:
// rho / (8A) * |f s^T|_F^2 and (rho / 4) * sum |f_l - f_m|^2 cot(opposite angle).
[[nodiscard]] double per_triangle_dirichlet(const std::array<Vec3, 3>& v, const std::array<Vec2, 3>& f,
                                            double rho);
[[nodiscard]] double per_triangle_dirichlet_cot(const TriangleGeom& geom, const std::array<Vec2, 3>& f,
                                                double rho);

// Signed area of the image, summed per face.
[[nodiscard]] double mapped_area(const TriMesh& mesh, const VertexMap& f);
// Shoelace area of the image of the boundary loop(s).
[[nodiscard]] double boundary_shoelace_area(const TriMesh& mesh, const VertexMap& f);
[[nodiscard]] EnergyBreakdown conformal_energy(const TriMesh& mesh, const CotanLaplacian& lap,
                                               const VertexMap& f);
// Faces whose image has negative signed area.
[[nodiscard]] int fold_count(const TriMesh& mesh, const VertexMap& f);

// "i j value" lines for every stored entry, row-major order.
void write_triplets(std::ostream& out, const CotanLaplacian& lap);

}  // namespace dcm
