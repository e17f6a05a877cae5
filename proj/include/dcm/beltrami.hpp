#pragma once

#include "dcm/mesh.hpp"
#include "dcm/types.hpp"

#include <Eigen/SparseCore>
#include <iosfwd>
#include <vector>

namespace dcm {

struct BeltramiCoefficient {
    double mu1 = 0.0;
    double mu2 = 0.0;
};

[[nodiscard]] Mat2 b_matrix(const BeltramiCoefficient& mu);

// Contributions of one face to row `corner` (0, 1, 2 for i, j, k): entries for the corner itself
// and the next two corners in cyclic order.
[[nodiscard]] std::array<double, 3> face_weights(const std::array<Vec2, 3>& v, const BeltramiCoefficient& mu,
                                                 int corner);

struct BeltramiSystem {
    std::vector<int> interior;               // vertex ids of the unknowns
    std::vector<int> boundary;               // vertex ids with prescribed values
    Eigen::SparseMatrix<double> rows;        // interior rows x all vertices
    Eigen::SparseMatrix<double> interior_block;
    Eigen::SparseMatrix<double> boundary_block;
};

// Planar mesh, one coefficient per face.
[[nodiscard]] BeltramiSystem assemble_beltrami(const TriMesh& mesh, const std::vector<BeltramiCoefficient>& mu);

// boundary_values has one row per entry of mesh.boundary_vertices() (same order).
[[nodiscard]] VertexMap solve_beltrami(const TriMesh& mesh, const std::vector<BeltramiCoefficient>& mu,
                                       const VertexMap& boundary_values);

// CSV readers: "face,mu1,mu2" and "vertex,x,y" (header line optional).
[[nodiscard]] std::vector<BeltramiCoefficient> read_mu_csv(std::istream& in, int num_faces);
[[nodiscard]] VertexMap read_boundary_csv(std::istream& in, const TriMesh& mesh);

}  // namespace dcm
