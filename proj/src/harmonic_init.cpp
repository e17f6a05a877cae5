#include "dcm/harmonic_init.hpp"

#include "dcm/barycentric.hpp"
#include "dcm/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

namespace dcm {

std::array<std::pair<double, double>, 3> source_rows(const Vec3& vi, const Vec3& vj, const Vec3& vk) {
    const double area = triangle_metrics(vi, vj, vk).area;
    const std::array<Vec3, 3> v{vi, vj, vk};
    std::array<std::pair<double, double>, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        const Vec3& p = v[c];
        const Vec3& q = v[(c + 1) % 3];
        const Vec3& r = v[(c + 2) % 3];
        // first row of the square root of [v_qr, v_qp]^T [v_qr, v_qp]
        const double denom = std::sqrt((p - q).squaredNorm() + (q - r).squaredNorm() + 4.0 * area);
        out[c] = {((q - r).squaredNorm() + 2.0 * area) / denom, (q - r).dot(q - p) / denom};
    }
    return out;
}

VertexMap SourceTerm::rhs(int num_vertices) const {
    VertexMap b = VertexMap::Zero(num_vertices, 2);
    for (std::size_t c = 0; c < 3; ++c) b.row(vertices[c]) += rows[c].transpose();
    return b;
}

SourceTerm make_source(const TriMesh& mesh, int face) {
    if (face < 0 || face >= mesh.num_faces()) throw InvalidInput("source face out of range");
    const auto p = mesh.face_points(face);
    const ProjectionFrame fr = projection_frame(p[0], p[1], p[2]);
    Mat32 edges;
    edges.col(0) = p[0] - p[1];
    edges.col(1) = p[1] - p[2];
    const Mat2 gram = edges.transpose() * edges;
    const Mat32 frame = edges * Eigen::SelfAdjointEigenSolver<Mat2>(gram).operatorInverseSqrt();
    SourceTerm s;
    s.face = face;
    s.vertices = mesh.face(face);
    for (std::size_t c = 0; c < 3; ++c) {
        const Vec2 local = frame.transpose() * fr.b[c];
        s.rows[c] = Vec2(local.x(), -local.y());
        if (!s.rows[c].allFinite()) throw NonFiniteWeight("non-finite source row");
    }
    return s;
}

int nearest_face(const TriMesh& mesh, const Vec3& point) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto p = mesh.face_points(f);
        const double d = ((p[0] + p[1] + p[2]) / 3.0 - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = f;
        }
    }
    return best;
}

HarmonicSolution solve_weak_lb(const CotanLaplacian& lap, const SourceTerm& source, int pinned_vertex) {
    const int n = lap.dimension;
    if (pinned_vertex < 0 || pinned_vertex >= n) throw InvalidInput("pinned vertex out of range");
    auto reduced_index = [&](int v) { return v < pinned_vertex ? v : v - 1; };

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(lap.matrix.nonZeros()));
    for (int c = 0; c < lap.matrix.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(lap.matrix, c); it; ++it)
            if (it.row() != pinned_vertex && it.col() != pinned_vertex)
                trips.emplace_back(reduced_index(static_cast<int>(it.row())), reduced_index(static_cast<int>(it.col())),
                                   it.value());
    Eigen::SparseMatrix<double> reduced(n - 1, n - 1);
    reduced.setFromTriplets(trips.begin(), trips.end());

    const VertexMap full_rhs = source.rhs(n);
    VertexMap rhs(n - 1, 2);
    for (int v = 0; v < n; ++v)
        if (v != pinned_vertex) rhs.row(reduced_index(v)) = full_rhs.row(v);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(reduced);
    if (solver.info() != Eigen::Success) throw SingularSystem("factorization of the pinned Laplacian failed");
    const Eigen::VectorXd pivots = solver.vectorD();
    if (pivots.minCoeff() <= 1e-14 * pivots.cwiseAbs().maxCoeff())
        throw SingularSystem("pinned Laplacian is singular (disconnected mesh?)");
    const VertexMap x = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !x.allFinite()) throw SolverFailure("weak Laplace-Beltrami solve failed");

    HarmonicSolution out;
    out.pinned_vertex = pinned_vertex;
    out.values = VertexMap::Zero(n, 2);
    for (int v = 0; v < n; ++v)
        if (v != pinned_vertex) out.values.row(v) = x.row(reduced_index(v));
    const double scale = rhs.norm();
    out.residual_norm = (reduced * x - rhs).norm() / (scale > 0.0 ? scale : 1.0);
    return out;
}

VertexMap to_disk(const TriMesh& mesh, const VertexMap& f) {
    const auto& boundary = mesh.boundary_vertices();
    if (boundary.empty()) throw InvalidTopology("mesh has no boundary");
    if (f.rows() != mesh.num_vertices()) throw DimensionMismatch("map size differs from mesh");
    Vec2 center = Vec2::Zero();
    for (int v : boundary) center += f.row(v).transpose();
    center /= static_cast<double>(boundary.size());

    VertexMap g(f.rows(), 2);
    for (int v = 0; v < f.rows(); ++v) {
        const Vec2 d = f.row(v).transpose() - center;
        const double r2 = d.squaredNorm();
        if (!(r2 > 0.0)) throw SolverFailure("harmonic solution hits the inversion center");
        g.row(v) = Vec2(d.x() / r2, -d.y() / r2).transpose();
    }
    double mean_radius = 0.0;
    for (int v : boundary) mean_radius += g.row(v).norm();
    mean_radius /= static_cast<double>(boundary.size());
    g /= mean_radius;
    for (int v : boundary) g.row(v).normalize();
    if (mapped_area(mesh, g) < 0.0) g.col(1) *= -1.0;
    return g;
}

VertexMap harmonic_init(const TriMesh& mesh, const CotanLaplacian& lap, int face) {
    return to_disk(mesh, solve_weak_lb(lap, make_source(mesh, face), 0).values);
}

}  // namespace dcm
