#include "dcm/error_bounds.hpp"

#include "dcm/csv.hpp"
#include "dcm/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <numbers>
#include <random>

namespace dcm {

void BoundsConfig::validate() const {
    if (!(C_M >= 0.0) || !(C_L >= 0.0)) throw InvalidInput("C_M and C_L must be non-negative");
    if (!(sigma_min >= 0.0) || !(sigma_max > 0.0) || sigma_min > sigma_max)
        throw InvalidInput("need 0 <= sigma_min <= sigma_max");
    if (!(total_area >= 0.0)) throw InvalidInput("total area must be non-negative");
}

double tau_bound(const BoundsConfig& cfg, double d_omega) { return cfg.C_M * d_omega * d_omega; }

ParamGeom param_triangle_metrics(const std::array<Vec2, 3>& w) {
    ParamGeom g;
    const double twice_area = std::abs(cross2(w[1] - w[0], w[2] - w[0]));
    g.T = 0.5 * twice_area;
    g.d_omega = std::max({(w[0] - w[1]).norm(), (w[1] - w[2]).norm(), (w[2] - w[0]).norm()});
    if (!(g.T >= kDegenerateAreaRatio * g.d_omega * g.d_omega) || g.d_omega == 0.0)
        throw DegenerateTriangle("parameter triangle is degenerate");
    g.theta_min_omega = std::numbers::pi;
    for (std::size_t c = 0; c < 3; ++c) {
        const Vec2 a = w[(c + 1) % 3] - w[c];
        const Vec2 b = w[(c + 2) % 3] - w[c];
        g.theta_min_omega = std::min(g.theta_min_omega, std::atan2(twice_area, a.dot(b)));
    }
    return g;
}

double omega_dagger_norm(const std::array<Vec2, 3>& w) {
    const ParamGeom g = param_triangle_metrics(w);
    Eigen::Matrix<double, 2, 3> edges;
    edges.col(0) = w[1] - w[2];
    edges.col(1) = w[2] - w[0];
    edges.col(2) = w[0] - w[1];
    const double norm = Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>>(edges).singularValues()(0);
    return norm / (2.0 * g.T);
}

double omega_dagger_norm_at(const std::array<Vec2, 3>& w, const Vec2& x) {
    Eigen::MatrixXd hat(2, 3);
    for (int c = 0; c < 3; ++c) hat.col(c) = w[static_cast<std::size_t>(c)] - x;
    const Eigen::MatrixXd pinv = hat.completeOrthogonalDecomposition().pseudoInverse();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(pinv).singularValues()(0);
}

namespace {

std::array<double, 2> sym_eigenvalues(const Mat2& b) {
    const double mean = 0.5 * (b(0, 0) + b(1, 1));
    const double half = 0.5 * (b(0, 0) - b(1, 1));
    const double rad = std::hypot(half, 0.5 * (b(0, 1) + b(1, 0)));
    return {mean - rad, mean + rad};
}

}  // namespace

EigGridReport verify_eig_centroid(const Eigen::Matrix<double, 2, 3>& points, int resolution, double half_width,
                                  int cells) {
    if (resolution < 2 || !(half_width > 0.0)) throw InvalidInput("verify_eig_centroid: bad grid");
    const Vec2 c = points.rowwise().mean();
    auto eig_at = [&](const Vec2& x) {
        const Eigen::Matrix<double, 2, 3> d = points.colwise() - x;
        return sym_eigenvalues(d * d.transpose());
    };
    EigGridReport rep;
    const auto at_c = eig_at(c);
    rep.at_centroid = at_c;
    {
        const Mat2 ref = points * points.transpose() - 3.0 * c * c.transpose();
        Eigen::SelfAdjointEigenSolver<Mat2> es(ref, Eigen::EigenvaluesOnly);
        rep.reference = {es.eigenvalues()(0), es.eigenvalues()(1)};
    }
    const double step = 2.0 * half_width / (resolution - 1);
    std::vector<std::array<double, 2>> values(static_cast<std::size_t>(resolution * resolution));
    std::array<double, 2> best{INFINITY, INFINITY};
    for (int a = 0; a < resolution; ++a)
        for (int b = 0; b < resolution; ++b) {
            const Vec2 x = c + Vec2(-half_width + a * step, -half_width + b * step);
            const auto ev = eig_at(x);
            values[static_cast<std::size_t>(a * resolution + b)] = ev;
            for (std::size_t l = 0; l < 2; ++l) best[l] = std::min(best[l], ev[l]);
        }
    rep.grid_min = best;
    const double scale = std::max(1e-300, std::abs(at_c[0]) + std::abs(at_c[1]));
    const double tol = 1e-12 * scale;
    rep.passed = true;
    for (std::size_t l = 0; l < 2; ++l) {
        int nearest = resolution;
        int count = 0;
        for (int a = 0; a < resolution; ++a)
            for (int b = 0; b < resolution; ++b) {
                if (values[static_cast<std::size_t>(a * resolution + b)][l] > best[l] + tol) continue;
                ++count;
                const double off = std::max(std::abs(-half_width + a * step), std::abs(-half_width + b * step));
                nearest = std::min(nearest, static_cast<int>(std::ceil(off / step - 1e-9)));
            }
        rep.nearest_min_cells[l] = nearest;
        rep.minimizer_count[l] = count;
        rep.passed = rep.passed && nearest <= cells && std::abs(best[l] - at_c[l]) <= tol &&
                     std::abs(at_c[l] - rep.reference[l]) <= 1e-10 * scale;
    }
    return rep;
}

double nQ_bound(const BoundsConfig& cfg, double d_omega, double T) {
    if (!(T > 0.0)) throw DegenerateTriangle("nQ_bound: parameter triangle area must be positive");
    if (cfg.C_M == 0.0) return 0.0;
    if (cfg.sigma_min == 0.0) return INFINITY;
    return 3.0 * cfg.C_M * d_omega * d_omega * d_omega / (cfg.sigma_min * T);
}

PsiBounds psi_bounds(const BoundsConfig& cfg, const TriangleGeom& geom, const ParamGeom& omega) {
    if (!(geom.area > 0.0) || !(omega.T > 0.0)) throw DegenerateTriangle("psi_bounds: degenerate triangle");
    PsiBounds p;
    const double dv = geom.diameter;
    const double d2 = omega.d_omega * omega.d_omega;
    const double first = 3.0 * cfg.C_M * dv * d2 / geom.area;
    const double nq = nQ_bound(cfg, omega.d_omega, omega.T);
    p.psi_prime = first + nq * nq;
    p.psi_prime_capped = first + std::min(1.0, nq * nq);
    p.psi_double_prime = 3.0 * cfg.C_L * cfg.sigma_max * cfg.sigma_max * dv * d2 / (2.0 * geom.area);

    const double dsin_v = dv / std::sin(geom.min_angle);
    const double dsin_o = omega.d_omega / std::sin(omega.theta_min_omega);
    const double s2 = cfg.sigma_min * cfg.sigma_min;
    if (cfg.C_M == 0.0) {
        p.psi_prime_simple = 0.0;
    } else if (cfg.sigma_min == 0.0) {
        p.psi_prime_simple = INFINITY;
    } else {
        const double tangent = 12.0 * cfg.C_M / cfg.sigma_min * dsin_o;
        p.psi_prime_simple = 12.0 * cfg.C_M / s2 * dsin_v + tangent * tangent;
    }
    p.psi_double_prime_simple = cfg.C_L == 0.0 ? 0.0
                                : cfg.sigma_min == 0.0
                                    ? INFINITY
                                    : 6.0 * cfg.C_L * cfg.sigma_max * cfg.sigma_max / s2 * dsin_v;
    return p;
}

double int_psi_sq_bound(double dirichlet, double psi_prime_max, double total_area, double psi_double_prime_max) {
    const double root = std::sqrt(std::max(0.0, dirichlet)) * psi_prime_max +
                        std::sqrt(0.5 * total_area) * psi_double_prime_max;
    return 2.0 * root * root;
}

double discretization_error_bound(double dirichlet_h, double int_psi_sq) {
    if (int_psi_sq == 0.0) return 0.0;
    return 0.5 * int_psi_sq + std::sqrt(2.0 * std::max(0.0, dirichlet_h) * int_psi_sq);
}

QualityReport quality_report(const TriMesh& mesh, const std::vector<ParamTriangle>* params) {
    if (params != nullptr && static_cast<int>(params->size()) != mesh.num_faces())
        throw DimensionMismatch("quality_report: one parameter triangle per face required");
    QualityReport rep;
    rep.faces.reserve(static_cast<std::size_t>(mesh.num_faces()));
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const TriangleGeom g = mesh.face_geom(f);
        TriangleQuality q;
        q.d_V = g.diameter;
        q.theta_min_V = g.min_angle;
        q.ratio_dsin = g.d_over_sin();
        q.ratio_dr = g.d_over_r();
        if (params != nullptr) {
            const ParamGeom pg = param_triangle_metrics((*params)[static_cast<std::size_t>(f)].corners);
            q.d_Omega = pg.d_omega;
            q.theta_min_Omega = pg.theta_min_omega;
            q.T = pg.T;
        }
        rep.max_dsin = std::max(rep.max_dsin, q.ratio_dsin);
        rep.max_dr = std::max(rep.max_dr, q.ratio_dr);
        rep.h_V = std::max(rep.h_V, q.d_V);
        rep.h_Omega = std::max(rep.h_Omega, q.d_Omega);
        rep.faces.push_back(q);
    }
    return rep;
}

bool strictly_decreasing(const std::vector<double>& values) {
    for (std::size_t k = 1; k < values.size(); ++k)
        if (!(values[k] < values[k - 1])) return false;
    return true;
}

std::vector<DegradationFlag> delaunay_degradation_scan(const TriMesh& mesh, double eps_short, double eps_mid) {
    std::vector<DegradationFlag> flags;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto p = mesh.face_points(f);
        std::array<double, 3> e{(p[0] - p[1]).norm(), (p[1] - p[2]).norm(), (p[2] - p[0]).norm()};
        std::sort(e.begin(), e.end());
        if (e[2] == 0.0) continue;
        const double a = e[0] / e[2];
        const double b = e[1] / e[2];
        if (a <= eps_short && std::abs(b - 1.0) <= eps_mid) flags.push_back({f, a, b});
    }
    return flags;
}

double measured_tau(const ParamSurface& s, const std::array<Vec3, 3>& v, const Vec2& omega) {
    const Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]).normalized();
    return std::abs(n.dot(s.eval(omega) - v[0]));
}

double measured_nQ(const ParamSurface& s, const std::array<Vec3, 3>& v, const Vec2& omega) {
    const Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]).normalized();
    const Mat32 j = s.grad(omega);
    const Mat2 gram = j.transpose() * j;
    const Mat32 q = j * Eigen::SelfAdjointEigenSolver<Mat2>(gram).operatorInverseSqrt();
    return (n.transpose() * q).norm();
}

BoundReport bound_report(const TriMesh& mesh, const std::vector<ParamTriangle>& params, const BoundsConfig& cfg,
                         double dirichlet_h, const ParamSurface* surface, int samples_per_face) {
    cfg.validate();
    if (static_cast<int>(params.size()) != mesh.num_faces())
        throw DimensionMismatch("bound_report: one parameter triangle per face required");
    if (samples_per_face > 0 && surface == nullptr) throw InvalidInput("sampling needs a parameterization");
    BoundReport rep;
    rep.dirichlet_h = dirichlet_h;
    rep.sampled = samples_per_face > 0;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const auto& pt = params[static_cast<std::size_t>(f)];
        const TriangleGeom g = mesh.face_geom(f);
        const ParamGeom pg = param_triangle_metrics(pt.corners);
        BoundsConfig local = cfg;
        if (surface != nullptr && surface->local_sigma_min) local.sigma_min = surface->sigma_min_on(pt);
        FaceBound fb;
        fb.face = f;
        fb.tau_bound = tau_bound(local, pg.d_omega);
        fb.omega_dagger_norm = omega_dagger_norm(pt.corners);
        fb.nQ_bound = nQ_bound(local, pg.d_omega, pg.T);
        const PsiBounds psi = psi_bounds(local, g, pg);
        fb.psi_prime = psi.psi_prime_capped;
        fb.psi_double_prime = psi.psi_double_prime;
        fb.d_V = g.diameter;
        fb.ratio_dsin = g.d_over_sin();
        fb.ratio_dr = g.d_over_r();
        if (rep.sampled) {
            std::mt19937_64 rng(0x5eed0000ULL + static_cast<unsigned long long>(f));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const auto v = mesh.face_points(f);
            fb.tau_measured = 0.0;
            fb.nQ_measured = 0.0;
            for (int k = 0; k < samples_per_face; ++k) {
                double a = unit(rng);
                double b = unit(rng);
                if (a + b > 1.0) {
                    a = 1.0 - a;
                    b = 1.0 - b;
                }
                const Vec2 w = (1.0 - a - b) * pt.corners[0] + a * pt.corners[1] + b * pt.corners[2];
                fb.tau_measured = std::max(fb.tau_measured, measured_tau(*surface, v, w));
                fb.nQ_measured = std::max(fb.nQ_measured, measured_nQ(*surface, v, w));
            }
            rep.sound = rep.sound && fb.tau_measured <= fb.tau_bound + kSoundnessSlack &&
                        fb.nQ_measured <= fb.nQ_bound + kSoundnessSlack;
        }
        rep.psi_prime_max = std::max(rep.psi_prime_max, fb.psi_prime);
        rep.psi_double_prime_max = std::max(rep.psi_double_prime_max, fb.psi_double_prime);
        rep.max_dsin = std::max(rep.max_dsin, fb.ratio_dsin);
        rep.max_dr = std::max(rep.max_dr, fb.ratio_dr);
        rep.faces.push_back(fb);
    }
    rep.int_psi_sq_bound = int_psi_sq_bound(dirichlet_h, rep.psi_prime_max, cfg.total_area, rep.psi_double_prime_max);
    rep.eps_Dh = discretization_error_bound(dirichlet_h, rep.int_psi_sq_bound);
    return rep;
}

namespace {

std::string cell(double x) { return std::isnan(x) ? std::string{} : format_double(x); }

}  // namespace

void write_bound_report_csv(std::ostream& out, const BoundReport& rep) {
    out << "face,tau_bound,omega_dagger_norm,nQ_bound,psi_prime,psi_double_prime,d_V,d_over_sin,d_over_r,"
           "tau_measured,nQ_measured,tau_ok,nQ_ok,int_psi_sq_bound,E_Dh,eps_Dh\n";
    FaceBound mx;
    double tau_m = NAN;
    double nq_m = NAN;
    for (const auto& f : rep.faces) {
        const bool tau_ok = std::isnan(f.tau_measured) || f.tau_measured <= f.tau_bound + kSoundnessSlack;
        const bool nq_ok = std::isnan(f.nQ_measured) || f.nQ_measured <= f.nQ_bound + kSoundnessSlack;
        out << f.face << ',' << cell(f.tau_bound) << ',' << cell(f.omega_dagger_norm) << ',' << cell(f.nQ_bound) << ','
            << cell(f.psi_prime) << ',' << cell(f.psi_double_prime) << ',' << cell(f.d_V) << ','
            << cell(f.ratio_dsin) << ',' << cell(f.ratio_dr) << ',' << cell(f.tau_measured) << ','
            << cell(f.nQ_measured) << ',' << (tau_ok ? 1 : 0) << ',' << (nq_ok ? 1 : 0) << ",,,\n";
        mx.tau_bound = std::max(mx.tau_bound, f.tau_bound);
        mx.omega_dagger_norm = std::max(mx.omega_dagger_norm, f.omega_dagger_norm);
        mx.nQ_bound = std::max(mx.nQ_bound, f.nQ_bound);
        mx.d_V = std::max(mx.d_V, f.d_V);
        if (!std::isnan(f.tau_measured)) tau_m = std::isnan(tau_m) ? f.tau_measured : std::max(tau_m, f.tau_measured);
        if (!std::isnan(f.nQ_measured)) nq_m = std::isnan(nq_m) ? f.nQ_measured : std::max(nq_m, f.nQ_measured);
    }
    out << "summary," << cell(mx.tau_bound) << ',' << cell(mx.omega_dagger_norm) << ',' << cell(mx.nQ_bound) << ','
        << cell(rep.psi_prime_max) << ',' << cell(rep.psi_double_prime_max) << ',' << cell(mx.d_V) << ','
        << cell(rep.max_dsin) << ',' << cell(rep.max_dr) << ',' << cell(tau_m) << ',' << cell(nq_m) << ','
        << (rep.sound ? 1 : 0) << ',' << (rep.sound ? 1 : 0) << ',' << cell(rep.int_psi_sq_bound) << ','
        << cell(rep.dirichlet_h) << ',' << cell(rep.eps_Dh) << '\n';
}

void write_quality_csv(std::ostream& out, const QualityReport& rep, const std::vector<DegradationFlag>& flags) {
    out << "face,d_V,theta_min_V,d_over_sin,d_over_r,d_Omega,theta_min_Omega,T,flagged,short_ratio,mid_ratio\n";
    std::vector<const DegradationFlag*> by_face(rep.faces.size(), nullptr);
    for (const auto& fl : flags)
        if (fl.face >= 0 && static_cast<std::size_t>(fl.face) < by_face.size()) by_face[static_cast<std::size_t>(fl.face)] = &fl;
    for (std::size_t f = 0; f < rep.faces.size(); ++f) {
        const auto& q = rep.faces[f];
        out << f << ',' << format_double(q.d_V) << ',' << format_double(q.theta_min_V) << ','
            << format_double(q.ratio_dsin) << ',' << format_double(q.ratio_dr) << ',' << format_double(q.d_Omega) << ','
            << format_double(q.theta_min_Omega) << ',' << format_double(q.T) << ',';
        if (by_face[f] != nullptr)
            out << "1," << format_double(by_face[f]->short_ratio) << ',' << format_double(by_face[f]->mid_ratio) << '\n';
        else
            out << "0,,\n";
    }
    out << "summary," << format_double(rep.h_V) << ",," << format_double(rep.max_dsin) << ','
        << format_double(rep.max_dr) << ',' << format_double(rep.h_Omega) << ",,," << flags.size() << ",,\n";
}

double estimate_C_L(const TriMesh& mesh, const SurfaceGradient& grad) {
    std::vector<Eigen::Matrix<double, 2, 3>> at(static_cast<std::size_t>(mesh.num_vertices()));
    for (int v = 0; v < mesh.num_vertices(); ++v) at[static_cast<std::size_t>(v)] = grad(mesh.vertex(v));
    double c = 0.0;
    for (const auto& [a, b] : mesh.edges()) {
        const double len = (mesh.vertex(a) - mesh.vertex(b)).norm();
        c = std::max(c, (at[static_cast<std::size_t>(a)] - at[static_cast<std::size_t>(b)]).norm() / len);
    }
    return c;
}

double continuous_dirichlet(const ParamSurface& s, const std::vector<ParamTriangle>& params,
                            const SurfaceGradient& grad, int degree) {
    double total = 0.0;
    for (const auto& t : params)
        total += integrate_on_surface(s, t, degree, [&](const Vec2& w) { return 0.5 * grad(s.eval(w)).squaredNorm(); });
    return total;
}

}  // namespace dcm
