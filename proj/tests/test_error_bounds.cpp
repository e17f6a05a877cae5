#include "dcm/errors.hpp"
#include "dcm/error_bounds.hpp"
#include "dcm/laplacian.hpp"
#include "dcm/param_surface.hpp"
#include "test_util.hpp"

#include <doctest.h>
#include <numbers>
#include <sstream>

using namespace dcm;
using dcm::testing::rel_diff;

namespace {

constexpr double pi = std::numbers::pi;

template <class Rng>
std::array<Vec2, 3> random_param_triangle(Rng& rng) {
    const auto t = dcm::testing::random_triangle(rng, 2);
    return {Vec2(t[0].x(), t[0].y()), Vec2(t[1].x(), t[1].y()), Vec2(t[2].x(), t[2].y())};
}

BoundsConfig hemisphere_config(const HemisphereMesh& hm, double C_L) {
    return {hm.surface.lipschitz_C_M, C_L, hm.surface.sigma_min, hm.surface.sigma_max, 2 * pi};
}

}  // namespace

TEST_CASE("tau bound") {
    BoundsConfig flat{0.0, 0.0, 1.0, std::sqrt(2.0), 1.0};
    CHECK(tau_bound(flat, 0.7) == 0.0);
    BoundsConfig curved{std::sqrt(2.0), 1.0, 0.5, std::sqrt(2.0), 1.0};
    CHECK(tau_bound(curved, 0.2) == doctest::Approx(4 * tau_bound(curved, 0.1)).epsilon(1e-14));
}

TEST_CASE("pseudoinverse norm: closed form") {
    const double s = 0.37;
    const std::array<Vec2, 3> eq{Vec2(0, 0), Vec2(s, 0), Vec2(s / 2, s * std::sqrt(3.0) / 2)};
    const Vec2 c = (eq[0] + eq[1] + eq[2]) / 3.0;
    CHECK(rel_diff(omega_dagger_norm(eq), omega_dagger_norm_at(eq, c)) < 1e-10);

    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const auto w = random_param_triangle(rng);
        const double closed = omega_dagger_norm(w);
        CHECK(rel_diff(closed, omega_dagger_norm_at(w, (w[0] + w[1] + w[2]) / 3.0)) < 1e-10);
        for (int k = 0; k < 200; ++k) {
            double a = u(rng), b = u(rng);
            if (a + b > 1) {
                a = 1 - a;
                b = 1 - b;
            }
            const Vec2 x = (1 - a - b) * w[0] + a * w[1] + b * w[2];
            CHECK(omega_dagger_norm_at(w, x) <= closed + 1e-10);
        }
        const std::array<Vec2, 3> big{3 * w[0], 3 * w[1], 3 * w[2]};
        CHECK(rel_diff(omega_dagger_norm(big), closed / 3) < 1e-12);
    }
}

TEST_CASE("eigenvalue grid verifier") {
    Eigen::Matrix<double, 2, 3> centered;
    centered << 1, -0.5, -0.5, 0, 0.8, -0.8;
    const EigGridReport r = verify_eig_centroid(centered, 101, 1.0, 1);
    CHECK(r.passed);
    CHECK(r.nearest_min_cells[0] == 0);
    CHECK(r.nearest_min_cells[1] == 0);

    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 20; ++t) {
        Eigen::Matrix<double, 2, 3> p;
        for (int c = 0; c < 3; ++c) p.col(c) << u(rng), u(rng);
        const EigGridReport rep = verify_eig_centroid(p, 101, 1.0, 2);
        CHECK(rep.passed);
        for (int l = 0; l < 2; ++l) CHECK(rep.at_centroid[l] == doctest::Approx(rep.reference[l]).epsilon(1e-10));
    }
    CHECK_THROWS_AS((void)verify_eig_centroid(centered, 1, 1.0), InvalidInput);
}

TEST_CASE("nQ bound scaling and limits") {
    BoundsConfig cfg{std::sqrt(2.0), 1.0, 0.5, std::sqrt(2.0), 1.0};
    const std::array<Vec2, 3> w{Vec2(0, 0), Vec2(0.2, 0), Vec2(0.05, 0.15)};
    const ParamGeom g = param_triangle_metrics(w);
    const ParamGeom h = param_triangle_metrics({w[0] / 2, w[1] / 2, w[2] / 2});
    CHECK(nQ_bound(cfg, h.d_omega, h.T) == doctest::Approx(0.5 * nQ_bound(cfg, g.d_omega, g.T)).epsilon(1e-13));
    BoundsConfig flat = cfg;
    flat.C_M = 0.0;
    CHECK(nQ_bound(flat, g.d_omega, g.T) == 0.0);
    BoundsConfig singular = cfg;
    singular.sigma_min = 0.0;
    CHECK(std::isinf(nQ_bound(singular, g.d_omega, g.T)));
}

TEST_CASE("psi bounds: flat plane and scaling") {
    const double C_L = 0.8;
    BoundsConfig flat{0.0, C_L, 1.0, std::sqrt(2.0), 1.0};
    const auto v = std::array<Vec3, 3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.2, 0.9, 0)};
    const TriangleGeom tg = triangle_metrics(v[0], v[1], v[2]);
    const std::array<Vec2, 3> w{Vec2(0, 0), Vec2(1, 0), Vec2(0.2, 0.9)};
    const ParamGeom pg = param_triangle_metrics(w);
    const PsiBounds p = psi_bounds(flat, tg, pg);
    CHECK(p.psi_prime == 0.0);
    CHECK(p.psi_double_prime == doctest::Approx(3 * C_L * 2 * tg.diameter * pg.d_omega * pg.d_omega / (2 * tg.area)));
    // d(V) d(Omega)^2 / A: scaling V by t scales by 1/t, Omega by t scales by t^2
    const TriangleGeom tg2 = triangle_metrics(2 * v[0], 2 * v[1], 2 * v[2]);
    CHECK(psi_bounds(flat, tg2, pg).psi_double_prime == doctest::Approx(p.psi_double_prime / 2).epsilon(1e-13));
    const ParamGeom pg2 = param_triangle_metrics({2 * w[0], 2 * w[1], 2 * w[2]});
    CHECK(psi_bounds(flat, tg, pg2).psi_double_prime == doctest::Approx(4 * p.psi_double_prime).epsilon(1e-13));
}

TEST_CASE("inequality chain d/sin <= (d/r)(r/sin) with r <= d sin / 2") {
    std::mt19937_64 rng(53);
    for (int t = 0; t < 300; ++t) {
        const auto v = dcm::testing::random_triangle(rng);
        const TriangleGeom g = triangle_metrics(v[0], v[1], v[2]);
        const double s = std::sin(g.min_angle);
        CHECK(g.inradius <= 0.5 * g.diameter * s * (1 + 1e-14));
        CHECK(g.d_over_sin() <= 0.5 * g.d_over_r() * g.diameter * (1 + 1e-12));
    }
}

TEST_CASE("simplified psi' dominates on hemisphere faces") {
    int checked = 0;
    for (int n : {8, 16, 32}) {
        const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(n, 11.0 / 12));
        const BoundsConfig base = hemisphere_config(hm, 1.0);
        for (int f = 0; f < hm.mesh.num_faces() && checked < 500; f += 3) {
            if (hm.face_type[static_cast<std::size_t>(f)] == 0) continue;
            BoundsConfig local = base;
            local.sigma_min = hm.surface.sigma_min_on(hm.params[static_cast<std::size_t>(f)]);
            const PsiBounds p = psi_bounds(local, hm.mesh.face_geom(f), param_triangle_metrics(hm.params[static_cast<std::size_t>(f)].corners));
            CHECK(p.psi_prime <= p.psi_prime_simple * (1 + 1e-12));
            CHECK(p.psi_double_prime <= p.psi_double_prime_simple * (1 + 1e-12));
            ++checked;
        }
    }
    CHECK(checked == 500);
}

TEST_CASE("psi maxima: decreasing at r = 11/12, growing at r = 1/4") {
    auto maxima = [](int n, double r) {
        const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(n, r));
        const BoundReport rep = bound_report(hm.mesh, hm.params, hemisphere_config(hm, 1.0), 1.0, &hm.surface, 0);
        double off_pole = 0.0;
        for (const auto& fb : rep.faces)
            if (hm.face_type[static_cast<std::size_t>(fb.face)] != 0) off_pole = std::max(off_pole, fb.psi_prime);
        return std::pair{off_pole, rep.psi_double_prime_max};
    };
    std::vector<double> p1, p2, q1, q2;
    for (int n : {8, 16, 32, 64}) {
        const auto [a, b] = maxima(n, 11.0 / 12);
        p1.push_back(a);
        p2.push_back(b);
    }
    for (int n : {81, 256, 625, 1296}) {
        const auto [a, b] = maxima(n, 0.25);
        q1.push_back(a);
        q2.push_back(b);
    }
    CHECK(strictly_decreasing(p1));
    CHECK(strictly_decreasing(p2));
    CHECK(q1.back() > q1.front());
    CHECK(q2.back() > q2.front());
}

TEST_CASE("sampled bounds are sound on the hemisphere") {
    for (int n : {8, 16}) {
        const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(n, 11.0 / 12));
        const CotanLaplacian lap = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
        const VertexMap f = stereographic_map(hm.mesh);
        const double C_L = estimate_C_L(hm.mesh, stereographic_surface_gradient);
        const double e_h = dirichlet_energy(lap, f);
        const BoundReport rep = bound_report(hm.mesh, hm.params, hemisphere_config(hm, C_L), e_h, &hm.surface, 32);
        CHECK(rep.sampled);
        CHECK(rep.sound);
        const double e = continuous_dirichlet(hm.surface, hm.params, stereographic_surface_gradient, 12);
        CHECK(e == doctest::Approx(pi).epsilon(1e-4));
        CHECK(std::abs(e - e_h) <= rep.eps_Dh);
    }
}

TEST_CASE("flat plane gives zero tau and nQ columns") {
    const TriMesh m = dcm::testing::grid_mesh(3, 0.1);
    const ParamSurface plane = planar_surface();
    const auto params = planar_param_triangles(m);
    const BoundReport rep = bound_report(m, params, {0.0, 0.0, 1.0, std::sqrt(2.0), 1.0}, 1.0, &plane, 8);
    for (const auto& f : rep.faces) {
        CHECK(f.tau_bound == 0.0);
        CHECK(f.nQ_bound == 0.0);
        CHECK(f.tau_measured <= 1e-15);
        CHECK(f.nQ_measured <= 1e-15);
        CHECK(f.psi_prime == 0.0);
    }
    CHECK(rep.sound);
    CHECK(rep.eps_Dh == 0.0);
    CHECK(discretization_error_bound(3.0, 0.0) == 0.0);
    CHECK(int_psi_sq_bound(2.0, 0.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("error bound shrinks with n at r = 11/12") {
    std::vector<double> eps;
    for (int n : {8, 16, 32}) {
        const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(n, 11.0 / 12));
        const CotanLaplacian lap = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
        const double C_L = estimate_C_L(hm.mesh, stereographic_surface_gradient);
        eps.push_back(bound_report(hm.mesh, hm.params, hemisphere_config(hm, C_L),
                                   dirichlet_energy(lap, stereographic_map(hm.mesh)))
                          .eps_Dh);
    }
    CHECK(strictly_decreasing(eps));
}

TEST_CASE("quality metrics") {
    const TriMesh eq = dcm::testing::equilateral_patch(0.5);
    const QualityReport q = quality_report(eq, nullptr);
    CHECK(q.max_dsin == doctest::Approx(2 * 0.5 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(delaunay_degradation_scan(eq).empty());

    const TriMesh needle({{0, 0, 0}, {0.01, 0, 0}, {0.005, std::sqrt(1 - 0.005 * 0.005), 0}}, {{0, 1, 2}}, 2);
    const auto flags = delaunay_degradation_scan(needle);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].short_ratio == doctest::Approx(0.01));
    CHECK(flags[0].mid_ratio == doctest::Approx(1.0));

    for (int n : {8, 16, 32, 64}) {
        const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(n, 11.0 / 12));
        const QualityReport r = quality_report(hm.mesh, &hm.params);
        for (const auto& f : r.faces) CHECK(f.ratio_dsin <= 0.5 * f.ratio_dr * f.d_V * (1 + 1e-12));
    }
    CHECK(strictly_decreasing({3.0, 2.0, 1.0}));
    CHECK_FALSE(strictly_decreasing({3.0, 3.0, 1.0}));
}

TEST_CASE("degradation flags at r = 1/4 sit on the ring slivers, not the pole") {
    const HemisphereMesh hm = gen_hemisphere(HemisphereSpec::from_exponent(1296, 0.25));
    const auto flags = delaunay_degradation_scan(hm.mesh);
    CHECK_FALSE(flags.empty());
    for (const auto& fl : flags) {
        CHECK(hm.face_type[static_cast<std::size_t>(fl.face)] != 0);
    }
    // pole triangles: base at least as long as the legs for m <= 6, not needles
    const int n = hm.spec.n;
    for (int m = 3; m <= 6; ++m) CHECK(2 * std::sin(pi / m) * std::sin(pi / (2 * n)) > 0.99 * 2 * std::sin(pi / (4 * n)));
}

TEST_CASE("csv exports") {
    const HemisphereMesh hm = gen_hemisphere({4, 6});
    const BoundReport rep = bound_report(hm.mesh, hm.params, hemisphere_config(hm, 1.0), 3.0, &hm.surface, 4);
    std::ostringstream out;
    write_bound_report_csv(out, rep);
    const std::string s = out.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == hm.mesh.num_faces() + 2);
    CHECK(s.find("\nsummary,") != std::string::npos);

    std::ostringstream q;
    write_quality_csv(q, quality_report(hm.mesh, &hm.params), delaunay_degradation_scan(hm.mesh));
    const std::string t = q.str();
    CHECK(std::count(t.begin(), t.end(), '\n') == hm.mesh.num_faces() + 2);
}

TEST_CASE("bounds config validation") {
    CHECK_THROWS_AS((BoundsConfig{-1, 0, 1, 1, 1}.validate()), InvalidInput);
    CHECK_THROWS_AS((BoundsConfig{0, 0, 2, 1, 1}.validate()), InvalidInput);
    CHECK_NOTHROW((BoundsConfig{0, 0, 0, 1, 1}.validate()));
}
