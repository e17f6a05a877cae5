#include "dcm/errors.hpp"
#include "dcm/harmonic_init.hpp"
#include "dcm/laplacian.hpp"
#include "dcm/minimizer.hpp"
#include "dcm/param_surface.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <numbers>
#include <sstream>

using namespace dcm;

namespace {

VertexMap perturbed(const VertexMap& f, const TriMesh& m, double amount, unsigned seed, bool boundary_too = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amount, amount);
    VertexMap g = f;
    for (int v = 0; v < m.num_vertices(); ++v)
        if (boundary_too || !m.is_boundary(v)) g.row(v) += Eigen::RowVector2d(u(rng), u(rng));
    return g;
}

double fd_relative_error(const TriMesh& m, const CotanLaplacian& lap, const VertexMap& f) {
    const VertexMap g = energy_gradient(m, lap, f);
    VertexMap fd(f.rows(), 2);
    const double h = 1e-6;
    for (int v = 0; v < f.rows(); ++v)
        for (int c = 0; c < 2; ++c) {
            VertexMap a = f, b = f;
            a(v, c) += h;
            b(v, c) -= h;
            fd(v, c) = (conformal_energy(m, lap, a).conformal - conformal_energy(m, lap, b).conformal) / (2 * h);
        }
    return (g - fd).norm() / std::max(g.norm(), 1e-12);
}

}  // namespace

TEST_CASE("gradient of simple maps") {
    const TriMesh m = dcm::testing::grid_mesh(4, 0.2);
    const CotanLaplacian lap = assemble_laplacian(m, RhoMode::unit());
    CHECK(energy_gradient(m, lap, VertexMap::Constant(m.num_vertices(), 2, 0.3)).norm() < 1e-14);
    const VertexMap g = energy_gradient(m, lap, planar_coordinates(m));
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!m.is_boundary(v)) CHECK(g.row(v).norm() < 1e-12);
}

TEST_CASE("gradient matches central differences") {
    const TriMesh planar = dcm::testing::grid_mesh(3, 0.2);
    const CotanLaplacian lp = assemble_laplacian(planar, RhoMode::unit());
    const HemisphereMesh hm = gen_hemisphere({4, 6});
    const CotanLaplacian lh = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
    for (unsigned s = 0; s < 5; ++s) {
        CHECK(fd_relative_error(planar, lp, perturbed(planar_coordinates(planar), planar, 0.3, s, true)) < 1e-5);
        CHECK(fd_relative_error(hm.mesh, lh, perturbed(stereographic_map(hm.mesh), hm.mesh, 0.2, s, true)) < 1e-5);
    }
}

TEST_CASE("planar identity on a disk is already optimal") {
    const TriMesh d = gen_disk(4);
    const CotanLaplacian lap = assemble_laplacian(d, RhoMode::unit());
    const SolveReport rep = minimize(d, lap, planar_coordinates(d));
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
    CHECK(std::abs(rep.trace.back().energy.conformal) < 1e-10);
}

TEST_CASE("minimizer invariants on a perturbed disk") {
    const TriMesh d = gen_disk(5);
    const CotanLaplacian lap = assemble_laplacian(d, RhoMode::unit());
    VertexMap init = perturbed(planar_coordinates(d), d, 0.04, 7);
    // slide boundary vertices along the circle
    for (int v : d.boundary_vertices()) {
        const double t = std::atan2(init(v, 1), init(v, 0)) + 0.05 * std::sin(3.0 * v);
        init.row(v) << std::cos(t), std::sin(t);
    }
    for (const bool precondition : {true, false}) {
        MinimizerOptions opts;
        opts.precondition = precondition;
        opts.max_iterations = 5000;
        const SolveReport rep = minimize(d, lap, init, opts);
        CHECK(rep.converged);
        for (std::size_t k = 1; k < rep.trace.size(); ++k)
            CHECK(rep.trace[k].energy.conformal <= rep.trace[k - 1].energy.conformal + 1e-12 * (1 + rep.trace[k - 1].energy.dirichlet));
        CHECK(rep.trace.back().energy.conformal <= conformal_energy(d, lap, init).conformal + 1e-12);
        for (int v : d.boundary_vertices()) CHECK(std::abs(rep.map.row(v).norm() - 1) <= 1e-12);
        CHECK(rep.trace.back().energy.conformal < 1e-8);
    }
}

TEST_CASE("plain projected descent still decreases the energy") {
    const TriMesh d = gen_disk(3);
    const CotanLaplacian lap = assemble_laplacian(d, RhoMode::unit());
    const VertexMap init = perturbed(planar_coordinates(d), d, 0.05, 8);
    MinimizerOptions opts;
    opts.memory = 0;
    opts.precondition = false;
    opts.max_iterations = 200;
    const SolveReport rep = minimize(d, lap, init, opts);
    CHECK(rep.trace.back().energy.conformal < 0.5 * rep.trace.front().energy.conformal);
}

TEST_CASE("fixed boundary mode keeps boundary vertices") {
    const TriMesh d = gen_disk(3);
    const CotanLaplacian lap = assemble_laplacian(d, RhoMode::unit());
    VertexMap init = perturbed(planar_coordinates(d), d, 0.05, 9);
    for (int v : d.boundary_vertices()) init.row(v) *= 1.2;
    MinimizerOptions opts;
    opts.boundary = BoundaryMode::fixed;
    const SolveReport rep = minimize(d, lap, init, opts);
    CHECK(rep.converged);
    for (int v : d.boundary_vertices()) CHECK(rep.map.row(v) == init.row(v));
    opts.boundary = BoundaryMode::angle;
    CHECK_THROWS_AS((void)minimize(d, lap, init, opts), InvalidInput);
}

TEST_CASE("minimizer cannot do worse than the stereographic samples") {
    const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(16, 11.0 / 12));
    const CotanLaplacian lap = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
    const VertexMap f_star = stereographic_map(hm.mesh);
    const SolveReport rep = minimize(hm.mesh, lap, f_star);
    CHECK(rep.converged);
    CHECK(rep.trace.back().energy.conformal <= conformal_energy(hm.mesh, lap, f_star).conformal + 1e-10);
    CHECK(relative_error(normalize_map(rep.map, f_star), f_star) < 0.01);

    const SolveReport from_harmonic =
        minimize(hm.mesh, lap, harmonic_init(hm.mesh, lap, nearest_face(hm.mesh, hm.surface.distinguished_point)));
    CHECK(from_harmonic.converged);
    CHECK(from_harmonic.trace.back().energy.conformal == doctest::Approx(rep.trace.back().energy.conformal).epsilon(1e-6));
}

TEST_CASE("options validation") {
    MinimizerOptions o;
    o.backtrack_factor = 1.0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    o = {};
    o.gradient_tolerance = 0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    o = {};
    o.memory = -1;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
}

TEST_CASE("procrustes alignment") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VertexMap ref(30, 2);
    for (int v = 0; v < 30; ++v) ref.row(v) << u(rng), u(rng);
    Mat2 rot;
    rot << std::cos(0.9), -std::sin(0.9), std::sin(0.9), std::cos(0.9);
    CHECK((normalize_map(ref * rot, ref) - ref).norm() < 1e-12);
    Mat2 refl;
    refl << 1, 0, 0, -1;
    CHECK((normalize_map(ref * refl * rot, ref) - ref).norm() < 1e-12);

    VertexMap noisy = ref * rot;
    for (int v = 0; v < 30; ++v) noisy.row(v) += 0.1 * Eigen::RowVector2d(u(rng), u(rng));
    const double aligned = (normalize_map(noisy, ref) - ref).norm();
    CHECK(aligned <= (noisy - ref).norm());
    double best = 1e300;
    for (double t = 0; t < 2 * std::numbers::pi; t += 1e-4) {
        Mat2 r;
        r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        best = std::min({best, (noisy * r - ref).norm(), (noisy * refl * r - ref).norm()});
    }
    CHECK(aligned <= best + 1e-12);
}

TEST_CASE("relative error") {
    VertexMap f(3, 2);
    f << 1, 2, 3, 4, 5, 6;
    CHECK(relative_error(f, f) == 0.0);
    CHECK(relative_error(2 * f, f) == doctest::Approx(1.0));
    VertexMap g = f;
    g(1, 0) += 1.0;
    CHECK(relative_error(g, f) == doctest::Approx(1 / f.norm()));
    CHECK_THROWS_AS((void)relative_error(f, VertexMap::Zero(3, 2)), ZeroReference);
    CHECK_THROWS_AS((void)relative_error(f, VertexMap::Zero(2, 2)), DimensionMismatch);
}

TEST_CASE("trace and map csv") {
    const TriMesh d = gen_disk(2);
    const CotanLaplacian lap = assemble_laplacian(d, RhoMode::unit());
    const SolveReport rep = minimize(d, lap, perturbed(planar_coordinates(d), d, 0.05, 3));
    std::ostringstream trace, map;
    write_trace_csv(trace, rep);
    write_map_csv(map, rep.map);
    const std::string t = trace.str();
    const std::string m = map.str();
    CHECK(t.rfind("iteration,E_D,A,E_C,grad_norm,folds\n", 0) == 0);
    CHECK(std::count(t.begin(), t.end(), '\n') == static_cast<long>(rep.trace.size()) + 1);
    CHECK(std::count(m.begin(), m.end(), '\n') == d.num_vertices() + 1);
}
