#include "dcm/param_surface.hpp"

#include "dcm/errors.hpp"
#include "dcm/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace dcm {

double smallest_singular_value(const Mat32& j) {
    const Mat2 gram = j.transpose() * j;
    Eigen::SelfAdjointEigenSolver<Mat2> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
}

double area_element(const Mat32& j) {
    return std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
}

double integrate_on_surface(const ParamSurface& s, const ParamTriangle& t, int degree,
                            const std::function<double(const Vec2&)>& g) {
    const auto rule = triangle_rule(degree);
    auto over = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double param_area = 0.5 * std::abs(cross2(b - a, c - a));
        double sum = 0.0;
        for (const auto& node : rule) {
            const Vec2 w = node.bary[0] * a + node.bary[1] * b + node.bary[2] * c;
            sum += node.weight * g(w) * area_element(s.grad(w));
        }
        return sum * param_area;
    };
    if (t.region) {
        const auto& q = *t.region;
        return over(q[0], q[1], q[2]) + over(q[0], q[2], q[3]);
    }
    return over(t.corners[0], t.corners[1], t.corners[2]);
}

double patch_area(const ParamSurface& s, const ParamTriangle& t, int degree) {
    return integrate_on_surface(s, t, degree, [](const Vec2&) { return 1.0; });
}

ParamSurface planar_surface() {
    ParamSurface s;
    s.eval = [](const Vec2& w) { return Vec3(w.x(), w.y(), 0.0); };
    s.grad = [](const Vec2&) {
        Mat32 j = Mat32::Zero();
        j(0, 0) = 1.0;
        j(1, 1) = 1.0;
        return j;
    };
    s.lipschitz_C_M = 0.0;
    s.sigma_min = 1.0;
    s.sigma_max = std::sqrt(2.0);
    return s;
}

std::vector<ParamTriangle> planar_param_triangles(const TriMesh& mesh) {
    std::vector<ParamTriangle> out;
    out.reserve(static_cast<std::size_t>(mesh.num_faces()));
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto p = mesh.face_points(f);
        out.push_back({{p[0].head<2>(), p[1].head<2>(), p[2].head<2>()}, std::nullopt});
    }
    return out;
}

// ---- hemisphere ----

HemisphereSpec HemisphereSpec::from_exponent(int n, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidInput("exponent r must lie in (0, 1]");
    if (n < 2) throw InvalidInput("n must be >= 2");
    const int m = static_cast<int>(std::floor(std::pow(static_cast<double>(n), r) + 1e-9));
    HemisphereSpec s{n, m};
    s.validate();
    return s;
}

void HemisphereSpec::validate() const {
    if (n < 2) throw InvalidInput("hemisphere: n must be >= 2");
    if (m < 3) throw InvalidInput("hemisphere: m must be >= 3 (got " + std::to_string(m) + ")");
}

ParamSurface hemisphere_surface(int n) {
    ParamSurface s;
    s.eval = [](const Vec2& w) {
        const double sp = std::sin(w.y());
        return Vec3(std::cos(w.x()) * sp, std::sin(w.x()) * sp, std::cos(w.y()));
    };
    s.grad = [](const Vec2& w) {
        const double cf = std::cos(w.x());
        const double sf = std::sin(w.x());
        const double cp = std::cos(w.y());
        const double sp = std::sin(w.y());
        Mat32 j;
        j << -sf * sp, cf * cp,
              cf * sp, sf * cp,
              0.0,     -sp;
        return j;
    };
    // |D(grad x)[u]|_F^2 = u1^2 + u2^2 (1 + cos^2 psi) <= 2 |u|^2
    s.lipschitz_C_M = std::sqrt(2.0);
    s.sigma_max = std::sqrt(2.0);
    // smallest singular value is sin(psi); infimum over the band psi <= psi_(n-1)
    s.sigma_min = std::sin(std::numbers::pi / (2.0 * n));
    s.local_sigma_min = [](const ParamTriangle& t) {
        double psi_max = std::max({t.corners[0].y(), t.corners[1].y(), t.corners[2].y()});
        if (t.region)
            for (const auto& q : *t.region) psi_max = std::max(psi_max, q.y());
        return std::max(0.0, std::sin(std::min(psi_max, std::numbers::pi)));
    };
    s.distinguished_point = Vec3(0.0, 0.0, -1.0);
    return s;
}

HemisphereMesh gen_hemisphere(const HemisphereSpec& spec) {
    spec.validate();
    const int m = spec.m;
    const int n = spec.n;
    const double pi = std::numbers::pi;
    auto phi = [&](int i) { return 2.0 * pi * i / m; };
    auto psi = [&](int j) { return j * pi / (2.0 * n) + pi / 2.0; };

    HemisphereMesh out;
    out.spec = spec;
    out.surface = hemisphere_surface(n);

    std::vector<Vec3> vertices(static_cast<std::size_t>(spec.vertex_count()));
    vertices[kPoleVertex] = Vec3(0.0, 0.0, -1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            vertices[static_cast<std::size_t>(HemisphereMesh::ring_vertex(spec, i, j))] =
                out.surface.eval(Vec2(phi(i), psi(j)));

    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(spec.face_count()));
    auto v = [&](int i, int j) { return HemisphereMesh::ring_vertex(spec, i, j); };
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i < m; ++i) {
            faces.push_back({v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)});
            out.params.push_back({{Vec2(phi(i + 1), psi(j)), Vec2(phi(i + 1), psi(j + 1)), Vec2(phi(i), psi(j + 1))},
                                  std::nullopt});
            out.face_type.push_back(2);
            faces.push_back({v(i + 1, j), v(i, j + 1), v(i, j)});
            out.params.push_back({{Vec2(phi(i + 1), psi(j)), Vec2(phi(i), psi(j + 1)), Vec2(phi(i), psi(j))},
                                  std::nullopt});
            out.face_type.push_back(3);
        }
    }
    for (int i = 0; i < m; ++i) {
        faces.push_back({kPoleVertex, v(i, n - 1), v(i + 1, n - 1)});
        const double mid = 0.5 * (phi(i) + phi(i + 1));
        ParamTriangle t{{Vec2(mid, pi), Vec2(phi(i), psi(n - 1)), Vec2(phi(i + 1), psi(n - 1))},
                        std::array<Vec2, 4>{Vec2(phi(i), psi(n - 1)), Vec2(phi(i + 1), psi(n - 1)),
                                            Vec2(phi(i + 1), pi), Vec2(phi(i), pi)}};
        out.params.push_back(t);
        out.face_type.push_back(0);
    }
    out.mesh = TriMesh(std::move(vertices), std::move(faces), 3);
    return out;
}

Vec2 stereographic_project(const Vec3& v) {
    if (std::abs(v.norm() - 1.0) > 1e-9) throw InvalidInput("stereographic_project: point not on the unit sphere");
    const double d = 1.0 - v.z();
    if (d < 1e-12) throw NearPole("stereographic_project: point too close to the north pole");
    return {v.x() / d, v.y() / d};
}

VertexMap stereographic_map(const TriMesh& mesh) {
    VertexMap f(mesh.num_vertices(), 2);
    for (int i = 0; i < mesh.num_vertices(); ++i) f.row(i) = stereographic_project(mesh.vertex(i)).transpose();
    return f;
}

Eigen::Matrix<double, 2, 3> stereographic_surface_gradient(const Vec3& x) {
    const double d = 1.0 - x.z();
    if (d < 1e-12) throw NearPole("stereographic gradient too close to the north pole");
    Eigen::Matrix<double, 2, 3> jac;
    jac << 1.0 / d, 0.0, x.x() / (d * d),
           0.0, 1.0 / d, x.y() / (d * d);
    const Eigen::Matrix3d tangent = Eigen::Matrix3d::Identity() - x * x.transpose();
    return jac * tangent;
}

}  // namespace dcm
