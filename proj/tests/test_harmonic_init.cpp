#include "dcm/errors.hpp"
#include "dcm/harmonic_init.hpp"
#include "dcm/laplacian.hpp"
#include "dcm/minimizer.hpp"
#include "dcm/param_surface.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

using namespace dcm;

TEST_CASE("source rows: equilateral closed form") {
    const auto rows = source_rows({0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0});
    const double a = (1 + std::sqrt(3.0) / 2) / std::sqrt(2 + std::sqrt(3.0));
    for (const auto& [ra, rb] : rows) {
        CHECK(ra == doctest::Approx(a).epsilon(1e-14));
        CHECK(rb == doctest::Approx(0.5 / std::sqrt(2 + std::sqrt(3.0))).epsilon(1e-14));
    }
}

TEST_CASE("source rows: right angle zeroes the matching b") {
    // right angle at the second corner
    const auto rows = source_rows({1, 0, 0}, {0, 0, 0}, {0, 1, 0});
    CHECK(std::abs(rows[0].second) < 1e-15);
    CHECK(std::abs(rows[1].second) > 0.1);
}

TEST_CASE("source rows: cyclic relabeling permutes the pairs") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 50; ++t) {
        const auto v = dcm::testing::random_triangle(rng);
        const auto a = source_rows(v[0], v[1], v[2]);
        const auto b = source_rows(v[1], v[2], v[0]);
        for (int c = 0; c < 3; ++c) {
            CHECK(a[(c + 1) % 3].first == doctest::Approx(b[c].first).epsilon(1e-13));
            CHECK(a[(c + 1) % 3].second == doctest::Approx(b[c].second).epsilon(1e-13));
        }
    }
}

TEST_CASE("source rows equal the first row of a numeric matrix square root") {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 100; ++t) {
        const auto v = dcm::testing::random_triangle(rng);
        const auto rows = source_rows(v[0], v[1], v[2]);
        Mat32 e;
        e.col(0) = v[1] - v[2];
        e.col(1) = v[1] - v[0];
        const Mat2 root = Eigen::SelfAdjointEigenSolver<Mat2>(e.transpose() * e).operatorSqrt();
        CHECK(rows[0].first == doctest::Approx(root(0, 0)).epsilon(1e-12));
        CHECK(rows[0].second == doctest::Approx(root(0, 1)).epsilon(1e-12));
    }
}

TEST_CASE("source term rows") {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 50; ++t) {
        const auto v = dcm::testing::random_triangle(rng);
        const TriMesh m({v[0], v[1], v[2]}, {{0, 1, 2}});
        const SourceTerm s = make_source(m, 0);
        CHECK((s.rows[0] + s.rows[1] + s.rows[2]).norm() < 1e-12 * s.rows[0].norm());
        // row i is the closed-form pair scaled by 1/(2A)
        const auto closed = source_rows(v[0], v[1], v[2]);
        const double two_a = 2 * m.face_geom(0).area;
        CHECK(s.rows[0].x() == doctest::Approx(closed[0].first / two_a).epsilon(1e-11));
        CHECK(s.rows[0].y() == doctest::Approx(-closed[0].second / two_a).epsilon(1e-11));
        // only edge geometry matters
        const Vec3 shift(5, -1, 2);
        const TriMesh moved({v[0] + shift, v[1] + shift, v[2] + shift}, {{0, 1, 2}});
        const SourceTerm s2 = make_source(moved, 0);
        for (int c = 0; c < 3; ++c) CHECK((s.rows[c] - s2.rows[c]).norm() < 1e-11 * s.rows[0].norm());
    }
}

TEST_CASE("weak Laplace-Beltrami solve on the hemisphere") {
    const HemisphereMesh hm = gen_hemisphere({8, 27});
    const CotanLaplacian lap = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
    const int face = nearest_face(hm.mesh, hm.surface.distinguished_point);
    CHECK(hm.face_type[static_cast<std::size_t>(face)] == 0);
    const SourceTerm src = make_source(hm.mesh, face);

    const VertexMap b = src.rhs(hm.mesh.num_vertices());
    int nonzero = 0;
    for (int v = 0; v < b.rows(); ++v) nonzero += b.row(v).norm() > 0;
    CHECK(nonzero == 3);

    const HarmonicSolution a = solve_weak_lb(lap, src, 0);
    CHECK(a.residual_norm <= 1e-10);
    const HarmonicSolution c = solve_weak_lb(lap, src, 100);
    const Eigen::RowVector2d offset = c.values.row(0) - a.values.row(0);
    CHECK(((c.values.rowwise() - offset) - a.values).lpNorm<Eigen::Infinity>() < 1e-9);

    SourceTerm scaled = src;
    for (auto& r : scaled.rows) r *= 3.0;
    const HarmonicSolution s = solve_weak_lb(lap, scaled, 0);
    CHECK((s.values - 3.0 * a.values).lpNorm<Eigen::Infinity>() < 1e-9 * a.values.lpNorm<Eigen::Infinity>());

    CHECK_THROWS_AS((void)solve_weak_lb(lap, src, -1), InvalidInput);
}

TEST_CASE("disconnected mesh makes the pinned system singular") {
    const TriMesh two({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}}, {{0, 1, 2}, {3, 4, 5}}, 2);
    const CotanLaplacian lap = assemble_laplacian(two, RhoMode::unit());
    CHECK_THROWS_AS((void)solve_weak_lb(lap, make_source(two, 0), 0), SingularSystem);
}

TEST_CASE("harmonic initialization lands on the disk") {
    const HemisphereMesh hm = gen_hemisphere({16, 12});
    const CotanLaplacian lap = assemble_laplacian(hm.mesh, RhoMode::quadrature(3), &hm.surface, &hm.params);
    const VertexMap init = harmonic_init(hm.mesh, lap, nearest_face(hm.mesh, hm.surface.distinguished_point));
    for (int v : hm.mesh.boundary_vertices()) CHECK(init.row(v).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mapped_area(hm.mesh, init) > 0);
    CHECK(fold_count(hm.mesh, init) < hm.mesh.num_faces() / 10);

    const SolveReport rep = minimize(hm.mesh, lap, init);
    const double before = conformal_energy(hm.mesh, lap, init).conformal;
    MESSAGE("E_C(init) = " << before << ", E_C(final) = " << rep.trace.back().energy.conformal);
    CHECK(rep.converged);
}
