#include "dcm/laplacian.hpp"

#include "dcm/barycentric.hpp"
#include "dcm/csv.hpp"
#include "dcm/errors.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace dcm {

std::string RhoMode::name() const {
    switch (kind) {
        case RhoKind::unit: return "unit";
        case RhoKind::analytic: return "analytic";
        case RhoKind::quadrature: return "quadrature" + std::to_string(order);
    }
    return "unit";
}

RhoMode RhoMode::parse(const std::string& text) {
    if (text == "unit") return unit();
    if (text == "analytic") return analytic();
    if (text.rfind("quadrature", 0) == 0) {
        const std::string digits = text.substr(10);
        if (digits.empty()) return quadrature(3);
        try {
            std::size_t used = 0;
            const int order = std::stoi(digits, &used);
            if (used == digits.size() && order >= 1 && order <= 40) return quadrature(order);
        } catch (const std::exception&) {
        }
    }
    throw InvalidInput("unknown rho mode: " + text);
}

namespace {

double spherical_patch_area(const std::array<Vec3, 3>& p) {
    const double radius = (p[0].norm() + p[1].norm() + p[2].norm()) / 3.0;
    const Vec3 a = p[0].normalized();
    const Vec3 b = p[1].normalized();
    const Vec3 c = p[2].normalized();
    // spherical excess (Van Oosterom-Strackee)
    const double excess = 2.0 * std::atan2(std::abs(a.dot(b.cross(c))), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
    return radius * radius * excess;
}

}  // namespace

std::vector<double> compute_rho(const TriMesh& mesh, RhoMode mode, const ParamSurface* surface,
                                const std::vector<ParamTriangle>* params) {
    std::vector<double> rho(static_cast<std::size_t>(mesh.num_faces()), 1.0);
    if (mode.kind == RhoKind::unit) return rho;
    if (mode.kind == RhoKind::quadrature) {
        if (surface == nullptr || params == nullptr)
            throw InvalidInput("quadrature rho needs a parameterization and parameter triangles");
        if (static_cast<int>(params->size()) != mesh.num_faces())
            throw DimensionMismatch("one parameter triangle per face required");
    }
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const double flat = mesh.face_geom(f).area;
        const double curved = mode.kind == RhoKind::analytic
                                  ? spherical_patch_area(mesh.face_points(f))
                                  : patch_area(*surface, (*params)[static_cast<std::size_t>(f)], mode.order);
        rho[static_cast<std::size_t>(f)] = curved / flat;
    }
    return rho;
}

CotanLaplacian assemble_laplacian(const TriMesh& mesh, const std::vector<double>& rho) {
    if (static_cast<int>(rho.size()) != mesh.num_faces()) throw DimensionMismatch("one rho per face required");
    std::map<std::pair<int, int>, EdgeWeight> acc;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.face(f);
        const TriangleGeom g = mesh.face_geom(f);
        const double r = rho[static_cast<std::size_t>(f)];
        for (int c = 0; c < 3; ++c) {
            const int a = t[static_cast<std::size_t>((c + 1) % 3)];
            const int b = t[static_cast<std::size_t>((c + 2) % 3)];
            const double cot = g.cotangents[static_cast<std::size_t>(c)];
            if (!std::isfinite(cot) || !std::isfinite(r)) throw NonFiniteWeight("non-finite cotangent or area ratio");
            auto& e = acc[{std::min(a, b), std::max(a, b)}];
            e.i = std::min(a, b);
            e.j = std::max(a, b);
            if (a < b) {
                e.cot_left = cot;
                e.rho_left = r;
            } else {
                e.cot_right = cot;
                e.rho_right = r;
            }
        }
    }
    CotanLaplacian lap;
    lap.dimension = mesh.num_vertices();
    lap.rho = rho;
    lap.edges.reserve(acc.size());
    const auto& boundary = mesh.boundary_edges();
    for (auto& [key, e] : acc) {
        e.boundary = std::binary_search(boundary.begin(), boundary.end(), key);
        // the missing side of a boundary edge keeps cot = 0
        e.weight = 0.5 * (e.rho_left * e.cot_left + e.rho_right * e.cot_right);
        if (!std::isfinite(e.weight)) throw NonFiniteWeight("non-finite edge weight");
        lap.edges.push_back(e);
    }
    std::vector<double> diag(static_cast<std::size_t>(lap.dimension), 0.0);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * lap.edges.size() + diag.size());
    for (const auto& e : lap.edges) {
        trips.emplace_back(e.i, e.j, -e.weight);
        trips.emplace_back(e.j, e.i, -e.weight);
        diag[static_cast<std::size_t>(e.i)] += e.weight;
        diag[static_cast<std::size_t>(e.j)] += e.weight;
    }
    for (int v = 0; v < lap.dimension; ++v) trips.emplace_back(v, v, diag[static_cast<std::size_t>(v)]);
    lap.matrix.resize(lap.dimension, lap.dimension);
    lap.matrix.setFromTriplets(trips.begin(), trips.end());
    return lap;
}

CotanLaplacian assemble_laplacian(const TriMesh& mesh, RhoMode mode, const ParamSurface* surface,
                                  const std::vector<ParamTriangle>* params) {
    return assemble_laplacian(mesh, compute_rho(mesh, mode, surface, params));
}

namespace {

void check_map(int n, const VertexMap& f) {
    if (f.rows() != n) throw DimensionMismatch("map has " + std::to_string(f.rows()) + " rows, mesh has " + std::to_string(n));
}

Vec2 at(const VertexMap& f, int v) { return f.row(v).transpose(); }

}  // namespace

double dirichlet_energy(const CotanLaplacian& lap, const VertexMap& f) {
    check_map(lap.dimension, f);
    const VertexMap lf = lap.matrix * f;
    return 0.5 * (lf.array() * f.array()).sum();
}

double dirichlet_energy_edges(const CotanLaplacian& lap, const VertexMap& f) {
    check_map(lap.dimension, f);
    double sum = 0.0;
    for (const auto& e : lap.edges) sum += e.weight * (f.row(e.i) - f.row(e.j)).squaredNorm();
    return 0.5 * sum;
}

double per_triangle_dirichlet(const std::array<Vec3, 3>& v, const std::array<Vec2, 3>& f, double rho) {
    const ProjectionFrame fr = projection_frame(v[0], v[1], v[2]);
    Eigen::Matrix<double, 2, 3> fs = Eigen::Matrix<double, 2, 3>::Zero();
    for (std::size_t l = 0; l < 3; ++l) fs += f[l] * fr.s[l].transpose();
    return rho / (8.0 * fr.area) * fs.squaredNorm();
}

double per_triangle_dirichlet_cot(const TriangleGeom& geom, const std::array<Vec2, 3>& f, double rho) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += geom.cotangents[c] * (f[(c + 1) % 3] - f[(c + 2) % 3]).squaredNorm();
    return 0.25 * rho * sum;
}

double mapped_area(const TriMesh& mesh, const VertexMap& f) {
    check_map(mesh.num_vertices(), f);
    double area = 0.0;
    for (const auto& t : mesh.faces()) {
        const Vec2 a = at(f, t[0]);
        area += 0.5 * cross2(at(f, t[1]) - a, at(f, t[2]) - a);
    }
    return area;
}

double boundary_shoelace_area(const TriMesh& mesh, const VertexMap& f) {
    check_map(mesh.num_vertices(), f);
    const auto& boundary = mesh.boundary_edges();
    double area = 0.0;
    for (const auto& t : mesh.faces()) {
        for (std::size_t c = 0; c < 3; ++c) {
            const int a = t[c];
            const int b = t[(c + 1) % 3];
            if (std::binary_search(boundary.begin(), boundary.end(), std::pair{std::min(a, b), std::max(a, b)}))
                area += 0.5 * cross2(at(f, a), at(f, b));
        }
    }
    return area;
}

EnergyBreakdown conformal_energy(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& f) {
    EnergyBreakdown e;
    e.dirichlet = dirichlet_energy(lap, f);
    e.area = mapped_area(mesh, f);
    e.conformal = e.dirichlet - e.area;
    return e;
}

int fold_count(const TriMesh& mesh, const VertexMap& f) {
    check_map(mesh.num_vertices(), f);
    int folds = 0;
    for (const auto& t : mesh.faces()) {
        const Vec2 a = at(f, t[0]);
        if (cross2(at(f, t[1]) - a, at(f, t[2]) - a) < 0.0) ++folds;
    }
    return folds;
}

void write_triplets(std::ostream& out, const CotanLaplacian& lap) {
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = lap.matrix;
    for (int r = 0; r < rows.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

}  // namespace dcm
