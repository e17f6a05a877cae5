#pragma once

#include <Eigen/Core>
#include <array>

namespace dcm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// One row per vertex: the image f(v) in the target plane.
using VertexMap = Eigen::Matrix<double, Eigen::Dynamic, 2>;

using Face = std::array<int, 3>;

[[nodiscard]] inline double cross2(const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

// Counterclockwise quarter turn.
[[nodiscard]] inline Vec2 rot90(const Vec2& a) { return {-a.y(), a.x()}; }

}  // namespace dcm
