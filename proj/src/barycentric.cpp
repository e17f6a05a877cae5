#include "dcm/barycentric.hpp"

#include "dcm/errors.hpp"
#include "dcm/mesh.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace dcm {

ProjectionFrame projection_frame(const Vec3& vi, const Vec3& vj, const Vec3& vk) {
    const TriangleGeom g = triangle_metrics(vi, vj, vk);
    ProjectionFrame fr;
    fr.normal = g.unit_normal;
    fr.area = g.area;
    fr.diameter = g.diameter;
    fr.s = {(vj - vk).cross(fr.normal), (vk - vi).cross(fr.normal), (vi - vj).cross(fr.normal)};
    for (std::size_t l = 0; l < 3; ++l) fr.b[l] = fr.s[l] / (2.0 * g.area);
    return fr;
}

BaryCoords barycentric_coords(const Vec3& p, const ProjectionFrame& frame, const Vec3& vi, const Vec3& vj,
                              const Vec3& vk) {
    if (std::abs(frame.normal.dot(p - vi)) > 1e-8 * frame.diameter)
        throw OffPlane("barycentric_coords: point is off the triangle plane");
    return {frame.b[0].dot(p - vj), frame.b[1].dot(p - vk), frame.b[2].dot(p - vi)};
}

ProjectionResult project_to_plane(const Vec3& x, const Vec3& vi, const Vec3& vj, const Vec3& vk) {
    const ProjectionFrame fr = projection_frame(vi, vj, vk);
    ProjectionResult r;
    r.tau = fr.normal.dot(x - vi);
    r.p = x - r.tau * fr.normal;
    r.bary = barycentric_coords(r.p, fr, vi, vj, vk);
    return r;
}

}  // namespace dcm
