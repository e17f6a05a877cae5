#pragma once

#include "dcm/laplacian.hpp"
#include "dcm/mesh.hpp"

#include <optional>
#include <utility>

namespace dcm {

// Closed-form (a, b) pairs of the source face, each computed in the frame starting at that corner.
[[nodiscard]] std::array<std::pair<double, double>, 3> source_rows(const Vec3& vi, const Vec3& vj,
                                                                   const Vec3& vk);

struct SourceTerm {
    int face = -1;
    Face vertices{};
    // Rows (a, -b) / (2A) for corners i, j, k, all expressed in one tangent frame of the face.
    std::array<Vec2, 3> rows{};

    [[nodiscard]] VertexMap rhs(int num_vertices) const;
};

[[nodiscard]] SourceTerm make_source(const TriMesh& mesh, int face);
// Face whose centroid is nearest to `point`.
[[nodiscard]] int nearest_face(const TriMesh& mesh, const Vec3& point);

struct HarmonicSolution {
    VertexMap values;
    double residual_norm = 0.0;  // relative, in the pinned system
    int pinned_vertex = 0;
};

// Solves L f = b with f(pinned) = 0.
[[nodiscard]] HarmonicSolution solve_weak_lb(const CotanLaplacian& lap, const SourceTerm& source,
                                             int pinned_vertex = 0);

// Places a weak solution on the unit disk: center, invert, rescale, project the boundary to the
// circle and fix the orientation.
[[nodiscard]] VertexMap to_disk(const TriMesh& mesh, const VertexMap& f);

// Harmonic initialization: source at `face` (default nearest to `anchor`), solve, map to the disk.
[[nodiscard]] VertexMap harmonic_init(const TriMesh& mesh, const CotanLaplacian& lap, int face);

}  // namespace dcm
