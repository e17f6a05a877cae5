#include "dcm/experiments.hpp"

#include "dcm/csv.hpp"
#include "dcm/error_bounds.hpp"
#include "dcm/errors.hpp"
#include "dcm/harmonic_init.hpp"
#include "dcm/param_surface.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

namespace dcm {

namespace {

int ring_count(int n, double r) { return static_cast<int>(std::floor(std::pow(static_cast<double>(n), r) + 1e-9)); }

}  // namespace

int min_valid_n(double r) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidInput("exponent r must lie in (0, 1]");
    int n = std::max(2, static_cast<int>(std::floor(std::pow(3.0, 1.0 / r))) - 1);
    while (ring_count(n, r) < 3) ++n;
    return n;
}

std::vector<int> default_n_grid(double r) {
    if (min_valid_n(r) <= 8) return {8, 12, 16, 24, 32, 48, 64};
    std::vector<int> grid;
    for (int k = 3; k <= 6; ++k) {
        int n = std::max(2, static_cast<int>(std::ceil(std::pow(static_cast<double>(k), 1.0 / r) - 1e-6)) - 1);
        while (ring_count(n, r) < k) ++n;
        grid.push_back(n);
    }
    return grid;
}

ConvergenceRow run_row(double r, int n, const SweepOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const HemisphereSpec spec = HemisphereSpec::from_exponent(n, r);
    ConvergenceRow row;
    row.n = n;
    row.m = spec.m;
    const HemisphereMesh hm = gen_hemisphere(spec);
    row.h_V = hm.mesh.max_edge_length();
    row.max_dsin = quality_report(hm.mesh, nullptr).max_dsin;
    try {
        const CotanLaplacian lap = assemble_laplacian(hm.mesh, opts.rho, &hm.surface, &hm.params);
        const VertexMap f_star = stereographic_map(hm.mesh);
        row.ec_star = conformal_energy(hm.mesh, lap, f_star).conformal;
        const int face = nearest_face(hm.mesh, hm.surface.distinguished_point);
        const VertexMap init = harmonic_init(hm.mesh, lap, face);
        const SolveReport rep = minimize(hm.mesh, lap, init, opts.minimizer);
        row.ec_h = rep.trace.back().energy.conformal;
        row.rel_error = relative_error(normalize_map(rep.map, f_star), f_star);
        row.iterations = rep.iterations;
        row.folds = rep.folds;
        row.converged = rep.converged;
    } catch (const Error&) {
        row.converged = false;
        row.ec_h = std::numeric_limits<double>::quiet_NaN();
        row.rel_error = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

std::vector<ConvergenceRow> run_sweep(double r, const std::vector<int>& ns, const SweepOptions& opts) {
    opts.minimizer.validate();
    for (std::size_t k = 0; k < ns.size(); ++k) {
        if (ns[k] < 4) throw InvalidInput("sweep n values must be >= 4");
        if (k > 0 && ns[k] <= ns[k - 1]) throw InvalidInput("sweep n values must be increasing");
        (void)HemisphereSpec::from_exponent(ns[k], r);
    }
    std::vector<ConvergenceRow> rows(ns.size());
    const int workers = std::max(1, std::min(opts.threads, static_cast<int>(ns.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < ns.size(); k = next++) rows[k] = run_row(r, ns[k], opts);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return rows;
}

FitResult fit_exponent(const std::vector<ConvergenceRow>& rows, double h_min, double h_max) {
    FitResult fit;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (!r.converged || r.folds > 0 || !(r.rel_error > 0.0) || !(r.h_V > 0.0)) continue;
        if (r.h_V < h_min || r.h_V > h_max) continue;
        xs.push_back(std::log(r.h_V));
        ys.push_back(std::log(r.rel_error));
        fit.rows_used.push_back(static_cast<int>(k));
    }
    if (xs.size() < 3) throw InsufficientData("fit_exponent needs at least 3 usable rows");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("fit_exponent needs distinct h values");
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.coefficient = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double e = ys[k] - (intercept + fit.exponent * xs[k]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows, bool include_timing) {
    out << "n,m,h_V,max_d_over_sin,E_C_h,E_C_star,rel_error,iterations,folds,converged";
    if (include_timing) out << ",wall_seconds";
    out << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << r.m << ',' << format_double(r.h_V) << ',' << format_double(r.max_dsin) << ','
            << format_double(r.ec_h) << ',' << format_double(r.ec_star) << ',' << format_double(r.rel_error) << ','
            << r.iterations << ',' << r.folds << ',' << (r.converged ? 1 : 0);
        if (include_timing) out << ',' << format_double(r.wall_seconds);
        out << '\n';
    }
}

void emit_report(const std::vector<ConvergenceRow>& rows, const FitResult* fit, const std::string& dir,
                 bool include_timing) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw std::ios_base::failure("cannot write " + (fs::path(dir) / name).string());
        return out;
    };
    {
        auto out = open("convergence.csv");
        write_convergence_csv(out, rows, include_timing);
    }
    {
        auto out = open("plot.dat");
        auto series = [&](const char* name, auto x, auto y) {
            out << "# " << name << '\n';
            for (const auto& r : rows) out << format_double(x(r)) << ' ' << format_double(y(r)) << '\n';
            out << "\n\n";
        };
        series("h_V rel_error", [](const ConvergenceRow& r) { return r.h_V; },
               [](const ConvergenceRow& r) { return r.rel_error; });
        series("h_V E_C_h", [](const ConvergenceRow& r) { return r.h_V; }, [](const ConvergenceRow& r) { return r.ec_h; });
        series("h_V E_C_star", [](const ConvergenceRow& r) { return r.h_V; },
               [](const ConvergenceRow& r) { return r.ec_star; });
        series("n max_d_over_sin", [](const ConvergenceRow& r) { return static_cast<double>(r.n); },
               [](const ConvergenceRow& r) { return r.max_dsin; });
    }
    if (fit != nullptr) {
        auto out = open("fit.csv");
        out << "exponent,coefficient,residual,rows_used\n"
            << format_double(fit->exponent) << ',' << format_double(fit->coefficient) << ','
            << format_double(fit->residual) << ',' << fit->rows_used.size() << '\n';
    }
}

}  // namespace dcm
