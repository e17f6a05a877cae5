#pragma once

#include "dcm/laplacian.hpp"
#include "dcm/minimizer.hpp"

#include <string>
#include <vector>

namespace dcm {

struct ConvergenceRow {
    int n = 0;
    int m = 0;
    double h_V = 0.0;
    double max_dsin = 0.0;
    double ec_h = 0.0;     // E_C of the minimizer
    double ec_star = 0.0;  // E_C of the stereographic samples
    double rel_error = 0.0;
    int iterations = 0;
    int folds = 0;
    bool converged = false;
    double wall_seconds = 0.0;
};

struct SweepOptions {
    MinimizerOptions minimizer;
    RhoMode rho = RhoMode::quadrature(3);
    int threads = 1;
};

// Smallest n with floor(n^r) >= 3.
[[nodiscard]] int min_valid_n(double r);
// {8, 12, 16, 24, 32, 48, 64} when valid for r, else n = ceil(k^(1/r)) for k = 3..6.
[[nodiscard]] std::vector<int> default_n_grid(double r);

[[nodiscard]] ConvergenceRow run_row(double r, int n, const SweepOptions& opts);
[[nodiscard]] std::vector<ConvergenceRow> run_sweep(double r, const std::vector<int>& ns, const SweepOptions& opts);

struct FitResult {
    double exponent = 0.0;
    double coefficient = 0.0;
    double residual = 0.0;  // RMS of the log-log residuals
    std::vector<int> rows_used;
};

// Least squares on (log h, log eps) over rows with h in [h_min, h_max], converged and fold-free.
[[nodiscard]] FitResult fit_exponent(const std::vector<ConvergenceRow>& rows, double h_min = 0.0,
                                     double h_max = 1e300);

// Writes <dir>/convergence.csv and <dir>/plot.dat (h, eps, E_C^h, E_C^*), plus fit.csv when fitted.
void emit_report(const std::vector<ConvergenceRow>& rows, const FitResult* fit, const std::string& dir,
                 bool include_timing = false);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows, bool include_timing = false);

}  // namespace dcm
