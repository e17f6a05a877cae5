#include "dcm/mesh.hpp"

#include "dcm/errors.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace dcm {

double TriangleGeom::d_over_sin() const { return diameter / std::sin(min_angle); }

TriangleGeom triangle_metrics(const Vec3& vi, const Vec3& vj, const Vec3& vk) {
    const std::array<Vec3, 3> p{vi, vj, vk};
    TriangleGeom g;
    g.edge_lengths = {(vi - vj).norm(), (vj - vk).norm(), (vk - vi).norm()};
    g.diameter = std::max({g.edge_lengths[0], g.edge_lengths[1], g.edge_lengths[2]});
    const Vec3 cr = (vj - vi).cross(vk - vi);
    const double twice_area = cr.norm();
    g.area = 0.5 * twice_area;
    if (!(g.area >= kDegenerateAreaRatio * g.diameter * g.diameter) || g.diameter == 0.0)
        throw DegenerateTriangle("triangle area below threshold");
    g.unit_normal = cr / twice_area;
    for (int c = 0; c < 3; ++c) {
        const Vec3 a = p[static_cast<std::size_t>((c + 1) % 3)] - p[static_cast<std::size_t>(c)];
        const Vec3 b = p[static_cast<std::size_t>((c + 2) % 3)] - p[static_cast<std::size_t>(c)];
        const double dot = a.dot(b);
        g.cotangents[static_cast<std::size_t>(c)] = dot / twice_area;
        g.angles[static_cast<std::size_t>(c)] = std::atan2(twice_area, dot);
    }
    g.min_angle = std::min({g.angles[0], g.angles[1], g.angles[2]});
    g.inradius = twice_area / (g.edge_lengths[0] + g.edge_lengths[1] + g.edge_lengths[2]);
    return g;
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces, int dim)
    : dim_(dim), vertices_(std::move(vertices)), faces_(std::move(faces)) {
    if (dim_ != 2 && dim_ != 3) throw InvalidTopology("ambient dimension must be 2 or 3");
    if (faces_.empty()) throw InvalidTopology("mesh has no faces");
    const int nv = num_vertices();
    if (dim_ == 2)
        for (auto& v : vertices_) v.z() = 0.0;

    // directed edge -> owning face count; an undirected edge may be traversed once each way
    std::map<std::pair<int, int>, int> directed;
    for (const auto& f : faces_) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[static_cast<std::size_t>(c)];
            if (a < 0 || a >= nv) throw InvalidTopology("face index out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0]) throw InvalidTopology("face repeats a vertex");
        for (int c = 0; c < 3; ++c) {
            const int a = f[static_cast<std::size_t>(c)];
            const int b = f[static_cast<std::size_t>((c + 1) % 3)];
            if (++directed[{a, b}] > 1)
                throw InvalidTopology("edge traversed twice in the same direction (orientation or manifoldness)");
        }
    }
    is_boundary_.assign(static_cast<std::size_t>(nv), 0);
    for (const auto& [e, count] : directed) {
        const auto [a, b] = e;
        const bool has_twin = directed.count({b, a}) != 0;
        if (a < b || !has_twin) {
            const std::pair<int, int> u{std::min(a, b), std::max(a, b)};
            edges_.push_back(u);
            if (!has_twin) {
                boundary_edges_.push_back(u);
                is_boundary_[static_cast<std::size_t>(a)] = 1;
                is_boundary_[static_cast<std::size_t>(b)] = 1;
            }
        }
    }
    std::sort(edges_.begin(), edges_.end());
    std::sort(boundary_edges_.begin(), boundary_edges_.end());
    for (int v = 0; v < nv; ++v)
        if (is_boundary_[static_cast<std::size_t>(v)]) boundary_vertices_.push_back(v);

    if (dim_ == 2) {
        int positive = 0;
        int negative = 0;
        for (const auto& f : faces_) {
            const Vec3& a = vertex(f[0]);
            const double s = (vertex(f[1]) - a).cross(vertex(f[2]) - a).z();
            if (s > 0) ++positive;
            if (s < 0) ++negative;
        }
        if (positive > 0 && negative > 0) throw InvalidTopology("planar faces have mixed orientation");
    }
}

std::array<Vec3, 3> TriMesh::face_points(int f) const {
    const auto& t = face(f);
    return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
}

TriangleGeom TriMesh::face_geom(int f) const {
    const auto p = face_points(f);
    return triangle_metrics(p[0], p[1], p[2]);
}

double TriMesh::max_edge_length() const {
    double h = 0.0;
    for (const auto& [a, b] : edges_) h = std::max(h, (vertex(a) - vertex(b)).norm());
    return h;
}

double TriMesh::total_area() const {
    double total = 0.0;
    for (int f = 0; f < num_faces(); ++f) {
        const auto p = face_points(f);
        total += 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    }
    return total;
}

int TriMesh::connected_components() const {
    std::vector<int> parent(static_cast<std::size_t>(num_vertices()));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& [a, b] : edges_) parent[static_cast<std::size_t>(find(a))] = find(b);
    int count = 0;
    for (int v = 0; v < num_vertices(); ++v)
        if (find(v) == v) ++count;
    return count;
}

// ---- OFF ----

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;

    // Next non-blank line with comments stripped; false at EOF.
    bool next(std::string& out) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            out = line;
            return true;
        }
        return false;
    }
};

}  // namespace

TriMesh read_off(std::istream& in) {
    LineReader reader{in};
    std::string line;
    if (!reader.next(line)) throw ParseError("empty file", reader.line_no);
    {
        std::istringstream ls(line);
        std::string header;
        ls >> header;
        if (header != "OFF") throw ParseError("expected OFF header", reader.line_no);
        std::string rest;
        if (ls >> rest) throw ParseError("unexpected text after OFF header", reader.line_no);
    }
    if (!reader.next(line)) throw ParseError("missing counts line", reader.line_no);
    long nv = -1;
    long nf = -1;
    long ne = 0;
    {
        std::istringstream ls(line);
        if (!(ls >> nv >> nf) || nv < 0 || nf < 0) throw ParseError("bad counts line", reader.line_no);
        ls >> ne;
    }
    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<std::size_t>(nv));
    bool planar = true;
    for (long v = 0; v < nv; ++v) {
        if (!reader.next(line)) throw ParseError("missing vertex line", reader.line_no);
        std::istringstream ls(line);
        Vec3 p;
        std::string extra;
        if (!(ls >> p.x() >> p.y() >> p.z()) || (ls >> extra)) throw ParseError("bad vertex line", reader.line_no);
        if (!p.allFinite()) throw ParseError("non-finite coordinate", reader.line_no);
        planar = planar && p.z() == 0.0;
        vertices.push_back(p);
    }
    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(nf));
    for (long f = 0; f < nf; ++f) {
        if (!reader.next(line)) throw ParseError("missing face line", reader.line_no);
        std::istringstream ls(line);
        int count = 0;
        Face t{};
        std::string extra;
        if (!(ls >> count) || count != 3) throw ParseError("only triangles are supported", reader.line_no);
        if (!(ls >> t[0] >> t[1] >> t[2]) || (ls >> extra)) throw ParseError("bad face line", reader.line_no);
        faces.push_back(t);
    }
    if (reader.next(line)) throw ParseError("trailing data", reader.line_no);
    return TriMesh(std::move(vertices), std::move(faces), planar ? 2 : 3);
}

void write_off(std::ostream& out, const TriMesh& mesh) {
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return read_off(in);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    write_off(out, mesh);
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

// ---- planar disk ----

TriMesh gen_disk(int rings) {
    if (rings < 1) throw InvalidInput("gen_disk: rings must be >= 1");
    auto offset = [](int k) { return k == 0 ? 0 : 1 + 3 * k * (k - 1); };
    auto ring_size = [](int k) { return k == 0 ? 1 : 6 * k; };
    std::vector<Vec3> vertices;
    vertices.emplace_back(0.0, 0.0, 0.0);
    for (int k = 1; k <= rings; ++k) {
        const double radius = static_cast<double>(k) / rings;
        for (int t = 0; t < 6 * k; ++t) {
            const double angle = 2.0 * std::numbers::pi * t / (6.0 * k);
            vertices.emplace_back(radius * std::cos(angle), radius * std::sin(angle), 0.0);
        }
    }
    std::vector<Face> faces;
    for (int k = 1; k <= rings; ++k) {
        const int p = ring_size(k - 1);
        const int q = ring_size(k);
        auto inner = [&](int a) { return offset(k - 1) + a % p; };
        auto outer = [&](int b) { return offset(k) + b % q; };
        int a = 0;
        int b = 0;
        while (a < p || b < q) {
            const bool advance_outer = a == p || (b < q && static_cast<long>(b + 1) * p <= static_cast<long>(a + 1) * q);
            if (k == 1 || advance_outer) {
                faces.push_back({inner(a), outer(b), outer(b + 1)});
                ++b;
                if (k == 1 && b == q) a = p;
            } else {
                faces.push_back({inner(a), outer(b), inner(a + 1)});
                ++a;
            }
        }
    }
    return TriMesh(std::move(vertices), std::move(faces), 2);
}

VertexMap planar_coordinates(const TriMesh& mesh) {
    VertexMap f(mesh.num_vertices(), 2);
    for (int v = 0; v < mesh.num_vertices(); ++v) f.row(v) = mesh.vertex(v).head<2>().transpose();
    return f;
}

}  // namespace dcm
