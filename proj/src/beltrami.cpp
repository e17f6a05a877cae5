#include "dcm/beltrami.hpp"

#include "dcm/csv.hpp"
#include "dcm/errors.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <istream>
#include <string>

namespace dcm {

Mat2 b_matrix(const BeltramiCoefficient& mu) {
    const double denom = 1.0 - mu.mu1 * mu.mu1 - mu.mu2 * mu.mu2;
    if (!(denom >= 1e-12)) throw DegenerateCoefficient("Beltrami coefficient must satisfy |mu| < 1");
    Mat2 b;
    b << 2.0 * mu.mu2, (1.0 - mu.mu1) * (1.0 - mu.mu1) + mu.mu2 * mu.mu2,
        -(1.0 + mu.mu1) * (1.0 + mu.mu1) - mu.mu2 * mu.mu2, -2.0 * mu.mu2;
    return b / denom;
}

std::array<double, 3> face_weights(const std::array<Vec2, 3>& v, const BeltramiCoefficient& mu, int corner) {
    if (corner < 0 || corner > 2) throw InvalidInput("face_weights: corner must be 0, 1 or 2");
    const Vec2& vi = v[static_cast<std::size_t>(corner)];
    const Vec2& vj = v[static_cast<std::size_t>((corner + 1) % 3)];
    const Vec2& vk = v[static_cast<std::size_t>((corner + 2) % 3)];
    const Vec2 v_ij = vi - vj;
    const Vec2 v_jk = vj - vk;
    const Vec2 v_ki = vk - vi;
    const double twice_area = cross2(v_ij, v_jk);
    const double d = std::max({v_ij.norm(), v_jk.norm(), v_ki.norm()});
    if (!(std::abs(twice_area) >= 2.0 * kDegenerateAreaRatio * d * d)) throw DegenerateTriangle("degenerate planar face");
    Mat2 j;
    j << 0.0, 1.0, -1.0, 0.0;
    const Vec2 hat = -j * b_matrix(mu) * v_jk;
    return {v_jk.dot(hat) / twice_area, v_ki.dot(hat) / twice_area, v_ij.dot(hat) / twice_area};
}

BeltramiSystem assemble_beltrami(const TriMesh& mesh, const std::vector<BeltramiCoefficient>& mu) {
    if (mesh.dim() != 2) throw InvalidInput("Beltrami solver needs a planar mesh");
    if (static_cast<int>(mu.size()) != mesh.num_faces()) throw DimensionMismatch("one Beltrami coefficient per face");
    BeltramiSystem sys;
    std::vector<int> slot(static_cast<std::size_t>(mesh.num_vertices()), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.is_boundary(v)) {
            sys.boundary.push_back(v);
        } else {
            slot[static_cast<std::size_t>(v)] = static_cast<int>(sys.interior.size());
            sys.interior.push_back(v);
        }
    }
    const int ni = static_cast<int>(sys.interior.size());
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> off_sum(static_cast<std::size_t>(ni), 0.0);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.face(f);
        const auto p = mesh.face_points(f);
        const std::array<Vec2, 3> v{p[0].head<2>(), p[1].head<2>(), p[2].head<2>()};
        for (int c = 0; c < 3; ++c) {
            const int row = slot[static_cast<std::size_t>(t[static_cast<std::size_t>(c)])];
            if (row < 0) continue;
            const auto w = face_weights(v, mu[static_cast<std::size_t>(f)], c);
            for (int o = 1; o <= 2; ++o) {
                const double val = 0.5 * w[static_cast<std::size_t>(o)];
                trips.emplace_back(row, t[static_cast<std::size_t>((c + o) % 3)], val);
                off_sum[static_cast<std::size_t>(row)] += val;
            }
        }
    }
    for (int r = 0; r < ni; ++r) trips.emplace_back(r, sys.interior[static_cast<std::size_t>(r)], -off_sum[static_cast<std::size_t>(r)]);
    sys.rows.resize(ni, mesh.num_vertices());
    sys.rows.setFromTriplets(trips.begin(), trips.end());

    std::vector<int> bslot(static_cast<std::size_t>(mesh.num_vertices()), -1);
    for (std::size_t b = 0; b < sys.boundary.size(); ++b) bslot[static_cast<std::size_t>(sys.boundary[b])] = static_cast<int>(b);
    std::vector<Eigen::Triplet<double>> ti;
    std::vector<Eigen::Triplet<double>> tb;
    for (int c = 0; c < sys.rows.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.rows, c); it; ++it) {
            const auto col = static_cast<std::size_t>(it.col());
            if (slot[col] >= 0)
                ti.emplace_back(static_cast<int>(it.row()), slot[col], it.value());
            else
                tb.emplace_back(static_cast<int>(it.row()), bslot[col], it.value());
        }
    sys.interior_block.resize(ni, ni);
    sys.interior_block.setFromTriplets(ti.begin(), ti.end());
    sys.boundary_block.resize(ni, static_cast<int>(sys.boundary.size()));
    sys.boundary_block.setFromTriplets(tb.begin(), tb.end());
    return sys;
}

VertexMap solve_beltrami(const TriMesh& mesh, const std::vector<BeltramiCoefficient>& mu, const VertexMap& boundary_values) {
    const BeltramiSystem sys = assemble_beltrami(mesh, mu);
    if (boundary_values.rows() != static_cast<int>(sys.boundary.size()))
        throw DimensionMismatch("one boundary value per boundary vertex required");
    if (mesh.connected_components() != 1) throw SingularSystem("mesh is not connected");
    VertexMap out = VertexMap::Zero(mesh.num_vertices(), 2);
    for (std::size_t b = 0; b < sys.boundary.size(); ++b) out.row(sys.boundary[b]) = boundary_values.row(static_cast<int>(b));
    if (sys.interior.empty()) return out;

    const VertexMap rhs = -(sys.boundary_block * boundary_values);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.interior_block);
    if (lu.info() != Eigen::Success) throw SingularSystem("Beltrami interior system is singular");
    const VertexMap x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularSystem("Beltrami solve failed");
    const double scale = std::max(rhs.norm(), sys.interior_block.norm() * x.norm());
    if (scale > 0.0 && (sys.interior_block * x - rhs).norm() > 1e-10 * scale)
        throw SolverFailure("Beltrami residual above tolerance");
    for (std::size_t a = 0; a < sys.interior.size(); ++a) out.row(sys.interior[a]) = x.row(static_cast<int>(a));
    return out;
}

namespace {

bool is_header(const std::vector<std::string>& cells) {
    if (cells.empty()) return false;
    try {
        std::size_t used = 0;
        (void)std::stod(cells[0], &used);
        return used != cells[0].size();
    } catch (const std::exception&) {
        return true;
    }
}

template <typename Fn>
void for_each_row(std::istream& in, std::size_t columns, Fn&& fn) {
    std::string line;
    int line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (first && is_header(cells)) {
            first = false;
            continue;
        }
        first = false;
        if (cells.size() != columns) throw ParseError("expected " + std::to_string(columns) + " columns", line_no);
        long index = 0;
        double a = 0.0;
        double b = 0.0;
        try {
            std::size_t u0 = 0;
            std::size_t u1 = 0;
            std::size_t u2 = 0;
            index = std::stol(cells[0], &u0);
            a = std::stod(cells[1], &u1);
            b = std::stod(cells[2], &u2);
            if (u0 != cells[0].size() || u1 != cells[1].size() || u2 != cells[2].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError("malformed number", line_no);
        }
        if (!std::isfinite(a) || !std::isfinite(b)) throw ParseError("non-finite value", line_no);
        fn(index, a, b, line_no);
    }
}

}  // namespace

std::vector<BeltramiCoefficient> read_mu_csv(std::istream& in, int num_faces) {
    std::vector<BeltramiCoefficient> mu(static_cast<std::size_t>(num_faces));
    std::vector<char> seen(static_cast<std::size_t>(num_faces), 0);
    for_each_row(in, 3, [&](long face, double m1, double m2, int line) {
        if (face < 0 || face >= num_faces) throw ParseError("face index out of range", line);
        if (seen[static_cast<std::size_t>(face)]++) throw ParseError("duplicate face", line);
        if (!(m1 * m1 + m2 * m2 < 1.0)) throw DegenerateCoefficient("line " + std::to_string(line) + ": |mu| >= 1");
        mu[static_cast<std::size_t>(face)] = {m1, m2};
    });
    return mu;
}

VertexMap read_boundary_csv(std::istream& in, const TriMesh& mesh) {
    const auto& boundary = mesh.boundary_vertices();
    VertexMap values(static_cast<int>(boundary.size()), 2);
    std::vector<char> seen(boundary.size(), 0);
    for_each_row(in, 3, [&](long vertex, double x, double y, int line) {
        const auto it = std::lower_bound(boundary.begin(), boundary.end(), static_cast<int>(vertex));
        if (vertex < 0 || it == boundary.end() || *it != vertex) throw ParseError("not a boundary vertex", line);
        const auto k = static_cast<std::size_t>(it - boundary.begin());
        if (seen[k]++) throw ParseError("duplicate vertex", line);
        values.row(static_cast<int>(k)) = Vec2(x, y).transpose();
    });
    for (char s : seen)
        if (!s) throw InvalidInput("boundary CSV does not cover every boundary vertex");
    return values;
}

}  // namespace dcm
