#pragma once

#include "dcm/mesh.hpp"
#include "dcm/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace dcm {

// Parameter-domain triangle of one face. When a corner sits on a chart singularity the true
// preimage of the face is a quadrilateral; `region` then holds its four corners (ccw).
struct ParamTriangle {
    std::array<Vec2, 3> corners{};
    std::optional<std::array<Vec2, 4>> region;
};

struct ParamSurface {
    std::function<Vec3(const Vec2&)> eval;
    std::function<Mat32(const Vec2&)> grad;
    double lipschitz_C_M = 0.0;
    double sigma_min = 1.0;  // lower bound on the smallest singular value of grad
    double sigma_max = 1.0;  // upper bound on the Frobenius norm of grad
    // Optional tighter lower bound of sigma_min over one parameter triangle.
    std::function<double(const ParamTriangle&)> local_sigma_min;
    // Point used to place default sources (e.g. the pole).
    Vec3 distinguished_point = Vec3::Zero();

    [[nodiscard]] double sigma_min_on(const ParamTriangle& t) const {
        return local_sigma_min ? local_sigma_min(t) : sigma_min;
    }
};

// Smallest singular value of a 3x2 Jacobian.
[[nodiscard]] double smallest_singular_value(const Mat32& j);
// sqrt(det(J^T J)).
[[nodiscard]] double area_element(const Mat32& j);

// Integral of g(omega) * area_element over the preimage of the triangle.
[[nodiscard]] double integrate_on_surface(const ParamSurface& s, const ParamTriangle& t, int degree,
                                          const std::function<double(const Vec2&)>& g);
// Area of x(Omega_ijk).
[[nodiscard]] double patch_area(const ParamSurface& s, const ParamTriangle& t, int degree);

// x(omega) = (omega, 0): the trivial parameterization of a planar mesh.
[[nodiscard]] ParamSurface planar_surface();
[[nodiscard]] std::vector<ParamTriangle> planar_param_triangles(const TriMesh& mesh);

// ---- hemisphere ----

struct HemisphereSpec {
    int n = 8;   // rings along psi
    int m = 27;  // points along phi

    [[nodiscard]] static HemisphereSpec from_exponent(int n, double r);
    [[nodiscard]] int vertex_count() const { return m * n + 1; }
    [[nodiscard]] int face_count() const { return m * (2 * n - 1); }
    void validate() const;
};

struct HemisphereMesh {
    HemisphereSpec spec;
    TriMesh mesh;
    ParamSurface surface;
    std::vector<ParamTriangle> params;  // one per face
    // 0 for Type I (pole), 2 for Type II, 3 for Type III.
    std::vector<int> face_type;

    [[nodiscard]] static int ring_vertex(const HemisphereSpec& s, int i, int j) {
        return 1 + j * s.m + ((i % s.m) + s.m) % s.m;
    }
};

inline constexpr int kPoleVertex = 0;

// x(phi, psi) = (cos phi sin psi, sin phi sin psi, cos psi) on psi in [pi/2, pi].
[[nodiscard]] ParamSurface hemisphere_surface(int n);
[[nodiscard]] HemisphereMesh gen_hemisphere(const HemisphereSpec& spec);

// Projection from the north pole; throws NearPole when 1 - z is tiny.
[[nodiscard]] Vec2 stereographic_project(const Vec3& v);
[[nodiscard]] VertexMap stereographic_map(const TriMesh& mesh);
// Surface gradient of the stereographic map at a point of the unit sphere (2x3, tangent rows).
[[nodiscard]] Eigen::Matrix<double, 2, 3> stereographic_surface_gradient(const Vec3& x);

}  // namespace dcm
