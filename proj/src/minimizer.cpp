#include "dcm/minimizer.hpp"

#include "dcm/csv.hpp"
#include "dcm/errors.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <deque>
#include <ostream>

namespace dcm {

void MinimizerOptions::validate() const {
    if (max_iterations < 0) throw InvalidInput("max_iterations must be >= 0");
    if (!(gradient_tolerance > 0.0)) throw InvalidInput("gradient_tolerance must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw InvalidInput("backtrack_factor must lie in (0, 1)");
    if (!(initial_step > 0.0)) throw InvalidInput("initial_step must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidInput("armijo must lie in (0, 1)");
    if (max_backtracks < 1) throw InvalidInput("max_backtracks must be >= 1");
    if (memory < 0) throw InvalidInput("memory must be >= 0");
}

VertexMap energy_gradient(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& f) {
    if (f.rows() != mesh.num_vertices() || lap.dimension != mesh.num_vertices())
        throw DimensionMismatch("energy_gradient: sizes disagree");
    VertexMap g = lap.matrix * f;
    for (const auto& t : mesh.faces()) {
        for (std::size_t c = 0; c < 3; ++c) {
            const int i = t[c];
            const Vec2 fj = f.row(t[(c + 1) % 3]).transpose();
            const Vec2 fk = f.row(t[(c + 2) % 3]).transpose();
            g.row(i) -= 0.5 * rot90(fk - fj).transpose();
        }
    }
    return g;
}

namespace {

// Unknowns: interior x, interior y, then one angle per boundary vertex (angle mode only).
class Problem {
public:
    Problem(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& init, const MinimizerOptions& opts)
        : mesh_(mesh), lap_(lap), base_(init), angles_(opts.boundary == BoundaryMode::angle) {
        for (int v = 0; v < mesh.num_vertices(); ++v) (mesh.is_boundary(v) ? boundary_ : interior_).push_back(v);
        slot_.assign(static_cast<std::size_t>(mesh.num_vertices()), -1);
        for (std::size_t a = 0; a < interior_.size(); ++a) slot_[static_cast<std::size_t>(interior_[a])] = static_cast<int>(a);
        if (opts.precondition) build_preconditioner();
    }

    [[nodiscard]] int size() const {
        return 2 * static_cast<int>(interior_.size()) + (angles_ ? static_cast<int>(boundary_.size()) : 0);
    }
    [[nodiscard]] int ni() const { return static_cast<int>(interior_.size()); }

    [[nodiscard]] Eigen::VectorXd pack(const VertexMap& f) const {
        Eigen::VectorXd x(size());
        for (int a = 0; a < ni(); ++a) {
            x(a) = f(interior_[static_cast<std::size_t>(a)], 0);
            x(ni() + a) = f(interior_[static_cast<std::size_t>(a)], 1);
        }
        if (angles_)
            for (std::size_t b = 0; b < boundary_.size(); ++b)
                x(2 * ni() + static_cast<int>(b)) = std::atan2(f(boundary_[b], 1), f(boundary_[b], 0));
        return x;
    }

    [[nodiscard]] VertexMap unpack(const Eigen::VectorXd& x) const {
        VertexMap f = base_;
        for (int a = 0; a < ni(); ++a) {
            f(interior_[static_cast<std::size_t>(a)], 0) = x(a);
            f(interior_[static_cast<std::size_t>(a)], 1) = x(ni() + a);
        }
        if (angles_) {
            for (std::size_t b = 0; b < boundary_.size(); ++b) {
                const double t = x(2 * ni() + static_cast<int>(b));
                f(boundary_[b], 0) = std::cos(t);
                f(boundary_[b], 1) = std::sin(t);
            }
        }
        return f;
    }

    [[nodiscard]] Eigen::VectorXd reduce(const VertexMap& f, const VertexMap& g) const {
        Eigen::VectorXd r(size());
        for (int a = 0; a < ni(); ++a) {
            r(a) = g(interior_[static_cast<std::size_t>(a)], 0);
            r(ni() + a) = g(interior_[static_cast<std::size_t>(a)], 1);
        }
        if (angles_) {
            for (std::size_t b = 0; b < boundary_.size(); ++b) {
                const int v = boundary_[b];
                r(2 * ni() + static_cast<int>(b)) = -f(v, 1) * g(v, 0) + f(v, 0) * g(v, 1);
            }
        }
        return r;
    }

    [[nodiscard]] EnergyBreakdown energy(const VertexMap& f) const { return conformal_energy(mesh_, lap_, f); }
    [[nodiscard]] VertexMap gradient(const VertexMap& f) const { return energy_gradient(mesh_, lap_, f); }

    [[nodiscard]] bool preconditioned() const { return has_precond_; }

    // Applies the inverse of the base metric.
    [[nodiscard]] Eigen::VectorXd apply_base(const Eigen::VectorXd& r) const {
        Eigen::VectorXd out = r;
        if (!has_precond_) return out;
        if (ni() > 0) {
            Eigen::Matrix<double, Eigen::Dynamic, 2> rhs(ni(), 2);
            rhs.col(0) = r.head(ni());
            rhs.col(1) = r.segment(ni(), ni());
            const Eigen::Matrix<double, Eigen::Dynamic, 2> sol = interior_solver_.solve(rhs);
            out.head(ni()) = sol.col(0);
            out.segment(ni(), ni()) = sol.col(1);
        }
        if (angles_)
            for (std::size_t b = 0; b < boundary_.size(); ++b)
                out(2 * ni() + static_cast<int>(b)) /= angle_scale_[b];
        return out;
    }

private:
    void build_preconditioner() {
        std::vector<Eigen::Triplet<double>> trips;
        for (int c = 0; c < lap_.matrix.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(lap_.matrix, c); it; ++it) {
                const int r = slot_[static_cast<std::size_t>(it.row())];
                const int q = slot_[static_cast<std::size_t>(it.col())];
                if (r >= 0 && q >= 0) trips.emplace_back(r, q, it.value());
            }
        Eigen::SparseMatrix<double> block(ni(), ni());
        block.setFromTriplets(trips.begin(), trips.end());
        if (ni() > 0) {
            interior_solver_.compute(block);
            if (interior_solver_.info() != Eigen::Success || interior_solver_.vectorD().minCoeff() <= 0.0) return;
        }
        angle_scale_.clear();
        for (int v : boundary_) {
            const double d = lap_.matrix.coeff(v, v);
            angle_scale_.push_back(d > 1e-12 ? d : 1.0);
        }
        has_precond_ = true;
    }

    const TriMesh& mesh_;
    const CotanLaplacian& lap_;
    VertexMap base_;
    bool angles_;
    std::vector<int> interior_;
    std::vector<int> boundary_;
    std::vector<int> slot_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> interior_solver_;
    std::vector<double> angle_scale_;
    bool has_precond_ = false;
};

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho = 0.0;
};

Eigen::VectorXd lbfgs_direction(const Problem& prob, const std::deque<CurvaturePair>& pairs,
                                const Eigen::VectorXd& g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
        alpha[k] = pairs[k].rho * pairs[k].s.dot(q);
        q -= alpha[k] * pairs[k].y;
    }
    Eigen::VectorXd r = prob.apply_base(q);
    if (!prob.preconditioned() && !pairs.empty()) {
        const auto& last = pairs.back();
        r *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double beta = pairs[k].rho * pairs[k].y.dot(r);
        r += (alpha[k] - beta) * pairs[k].s;
    }
    return -r;
}

}  // namespace

SolveReport minimize(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& init,
                     const MinimizerOptions& opts) {
    opts.validate();
    if (init.rows() != mesh.num_vertices() || lap.dimension != mesh.num_vertices())
        throw DimensionMismatch("minimize: sizes disagree");
    if (!init.allFinite()) throw InvalidInput("minimize: initial map is not finite");

    VertexMap start = init;
    if (opts.boundary == BoundaryMode::angle) {
        for (int v : mesh.boundary_vertices()) {
            const double r = start.row(v).norm();
            if (std::abs(r - 1.0) > 0.1) throw InvalidInput("initial boundary vertex is not within 0.1 of the unit circle");
            start.row(v) /= r;
        }
    }

    const Problem prob(mesh, lap, start, opts);
    Eigen::VectorXd x = prob.pack(start);
    VertexMap f = prob.unpack(x);
    EnergyBreakdown e = prob.energy(f);
    Eigen::VectorXd g = prob.reduce(f, prob.gradient(f));

    SolveReport rep;
    auto record = [&](int iteration) {
        rep.trace.push_back({iteration, e, g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0, fold_count(mesh, f)});
    };
    record(0);

    std::deque<CurvaturePair> pairs;
    rep.status = SolveStatus::max_iterations;
    for (int it = 0;; ++it) {
        if (g.size() == 0 || g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
            rep.status = SolveStatus::converged;
            break;
        }
        if (it >= opts.max_iterations) break;

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) pairs.clear();
            Eigen::VectorXd d = opts.memory > 0 ? lbfgs_direction(prob, pairs, g) : Eigen::VectorXd(-prob.apply_base(g));
            double slope = g.dot(d);
            if (!(slope < 0.0)) {
                pairs.clear();
                d = -prob.apply_base(g);
                slope = g.dot(d);
                if (!(slope < 0.0)) break;
            }
            // Near the optimum E_C differences drop below round-off; there the decrease test is replaced by
            // the approximate Wolfe test on the directional derivative.
            const double noise = 1e-12 * (std::abs(e.dirichlet) + std::abs(e.area) + 1.0);
            double step = opts.initial_step;
            for (int k = 0; k < opts.max_backtracks; ++k, step *= opts.backtrack_factor) {
                const Eigen::VectorXd xn = x + step * d;
                const VertexMap fn = prob.unpack(xn);
                const EnergyBreakdown en = prob.energy(fn);
                if (!std::isfinite(en.conformal)) continue;
                const bool armijo_ok =
                    en.conformal <= e.conformal + opts.armijo * step * slope && en.conformal < e.conformal - noise;
                if (!armijo_ok && en.conformal > e.conformal + noise) continue;
                const Eigen::VectorXd gn = prob.reduce(fn, prob.gradient(fn));
                if (!armijo_ok && !(gn.dot(d) <= (1.0 - 2.0 * opts.armijo) * -slope)) continue;
                CurvaturePair cp{xn - x, gn - g, 0.0};
                const double sy = cp.s.dot(cp.y);
                if (opts.memory > 0 && sy > 1e-16 * cp.s.norm() * cp.y.norm()) {
                    cp.rho = 1.0 / sy;
                    pairs.push_back(std::move(cp));
                    while (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
                }
                x = xn;
                f = fn;
                e = en;
                g = gn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            rep.status = SolveStatus::line_search_failed;
            break;
        }
        ++rep.iterations;
        record(rep.iterations);
    }
    rep.converged = rep.status == SolveStatus::converged;
    rep.map = f;
    rep.folds = fold_count(mesh, f);
    return rep;
}

void write_trace_csv(std::ostream& out, const SolveReport& report) {
    out << "iteration,E_D,A,E_C,grad_norm,folds\n";
    for (const auto& t : report.trace)
        out << t.iteration << ',' << format_double(t.energy.dirichlet) << ',' << format_double(t.energy.area) << ','
            << format_double(t.energy.conformal) << ',' << format_double(t.gradient_norm) << ',' << t.folds << '\n';
}

void write_map_csv(std::ostream& out, const VertexMap& f) {
    out << "vertex,x,y\n";
    for (int v = 0; v < f.rows(); ++v) out << v << ',' << format_double(f(v, 0)) << ',' << format_double(f(v, 1)) << '\n';
}

VertexMap normalize_map(const VertexMap& f, const VertexMap& reference) {
    if (f.rows() != reference.rows()) throw DimensionMismatch("normalize_map: sizes disagree");
    const Mat2 cross = f.transpose() * reference;
    Eigen::JacobiSVD<Mat2> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat2 rot = svd.matrixU() * svd.matrixV().transpose();
    return f * rot;
}

double relative_error(const VertexMap& f, const VertexMap& f_star) {
    if (f.rows() != f_star.rows()) throw DimensionMismatch("relative_error: sizes disagree");
    const double ref = f_star.norm();
    if (ref == 0.0) throw ZeroReference("relative_error: reference map is zero");
    return (f - f_star).norm() / ref;
}

}  // namespace dcm
