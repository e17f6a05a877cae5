#pragma once

#include "dcm/types.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dcm {

// Metric data of one triangle. Index 0/1/2 of edge_lengths is |v_ij|, |v_jk|, |v_ki|;
// angles/cotangents are stored per corner i, j, k (the angle at j is opposite edge ki).
struct TriangleGeom {
    std::array<double, 3> edge_lengths{};
    std::array<double, 3> angles{};
    std::array<double, 3> cotangents{};
    double area = 0.0;
    double diameter = 0.0;
    double inradius = 0.0;
    double min_angle = 0.0;
    Vec3 unit_normal = Vec3::UnitZ();

    [[nodiscard]] double d_over_sin() const;
    [[nodiscard]] double d_over_r() const { return diameter / inradius; }
};

// Faces with area below this fraction of d^2 are rejected.
inline constexpr double kDegenerateAreaRatio = 1e-14;

[[nodiscard]] TriangleGeom triangle_metrics(const Vec3& vi, const Vec3& vj, const Vec3& vk);

class TriMesh {
public:
    TriMesh() = default;

    // Validates indices, manifoldness and orientation; throws InvalidTopology.
    // `dim` is the ambient dimension (2 means every z coordinate is ignored and zero).
    TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces, int dim = 3);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_faces() const noexcept { return static_cast<int>(faces_.size()); }
    [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }
    [[nodiscard]] const Vec3& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const Face& face(int f) const { return faces_[static_cast<std::size_t>(f)]; }

    // Undirected edges (i < j), sorted.
    [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<std::pair<int, int>>& boundary_edges() const noexcept {
        return boundary_edges_;
    }
    // Sorted ascending.
    [[nodiscard]] const std::vector<int>& boundary_vertices() const noexcept { return boundary_vertices_; }
    [[nodiscard]] bool is_boundary(int v) const { return is_boundary_[static_cast<std::size_t>(v)] != 0; }

    [[nodiscard]] TriangleGeom face_geom(int f) const;
    [[nodiscard]] std::array<Vec3, 3> face_points(int f) const;

    // Maximum edge length h_V.
    [[nodiscard]] double max_edge_length() const;
    [[nodiscard]] double total_area() const;

    // Number of connected components of the vertex graph (isolated vertices count).
    [[nodiscard]] int connected_components() const;

private:
    int dim_ = 3;
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::pair<int, int>> boundary_edges_;
    std::vector<int> boundary_vertices_;
    std::vector<char> is_boundary_;
};

// OFF I/O. Vertices are written with 17 significant digits.
[[nodiscard]] TriMesh read_off(std::istream& in);
void write_off(std::ostream& out, const TriMesh& mesh);
[[nodiscard]] TriMesh load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

// Concentric-ring disk mesh: ring k (1..rings) has 6k vertices at radius k/rings.
[[nodiscard]] TriMesh gen_disk(int rings);

// The planar coordinates of a mesh as a map (x, y).
[[nodiscard]] VertexMap planar_coordinates(const TriMesh& mesh);

}  // namespace dcm
