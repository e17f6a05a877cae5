#pragma once

#include "dcm/types.hpp"

namespace dcm {

struct BaryCoords {
    double a_i = 0.0;
    double a_j = 0.0;
    double a_k = 0.0;
};

// s_l = v_(next next) - v_(next) rotated into the plane, b_l = s_l / (2A): the gradients of the
// barycentric coordinates.
struct ProjectionFrame {
    std::array<Vec3, 3> s{};
    std::array<Vec3, 3> b{};
    Vec3 normal = Vec3::UnitZ();
    double area = 0.0;
    double diameter = 0.0;
};

struct ProjectionResult {
    Vec3 p = Vec3::Zero();
    double tau = 0.0;
    BaryCoords bary;
};

[[nodiscard]] ProjectionFrame projection_frame(const Vec3& vi, const Vec3& vj, const Vec3& vk);

// p must lie on the triangle's plane (OffPlane otherwise).
[[nodiscard]] BaryCoords barycentric_coords(const Vec3& p, const ProjectionFrame& frame, const Vec3& vi,
                                            const Vec3& vj, const Vec3& vk);

[[nodiscard]] ProjectionResult project_to_plane(const Vec3& x, const Vec3& vi, const Vec3& vj,
                                                const Vec3& vk);

}  // namespace dcm
