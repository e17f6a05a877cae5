#include "cli.hpp"

#include "dcm/beltrami.hpp"
#include "dcm/csv.hpp"
#include "dcm/error_bounds.hpp"
#include "dcm/errors.hpp"
#include "dcm/experiments.hpp"
#include "dcm/harmonic_init.hpp"
#include "dcm/laplacian.hpp"
#include "dcm/mesh.hpp"
#include "dcm/minimizer.hpp"
#include "dcm/param_surface.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace dcm::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::string output_path(const std::string& path) {
    const fs::path p(path);
    if (p.is_absolute()) return path;
    const char* root = std::getenv(kOutputRootEnv);
    if (root != nullptr && *root != '\0') return (fs::path(root) / p).string();
    return path;
}

std::ofstream open_output(const std::string& path) {
    const fs::path p(output_path(path));
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::ios_base::failure("cannot write " + p.string());
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return in;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Moves --config FILE out of the argument list and appends its key = value pairs as long options,
// so they are parsed last and win over flags.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
    std::vector<std::string> args;
    std::optional<std::string> config;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "--config") {
            if (k + 1 >= argc) throw UsageError("--config needs a file");
            config = argv[++k];
        } else if (a.rfind("--config=", 0) == 0) {
            config = a.substr(9);
        } else {
            args.push_back(a);
        }
    }
    if (!config) return args;
    std::ifstream in(*config);
    if (!in) throw UsageError("cannot open config file " + *config);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos || key == "config" || key.front() == '-')
            throw UsageError("config line " + std::to_string(line_no) + ": bad key '" + key + "'");
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

struct HemisphereArgs {
    int n = 0;
    int m = 0;
    double r = kUnset;

    void add(CLI::App* app) {
        app->add_option("--hemisphere-n", n, "Mesh was generated as a hemisphere with this n");
        app->add_option("--hemisphere-m", m, "... and this m");
        app->add_option("--hemisphere-r", r, "... or with m = floor(n^r)");
    }

    [[nodiscard]] std::optional<HemisphereMesh> build(const TriMesh& mesh) const {
        if (n == 0) return std::nullopt;
        const HemisphereSpec spec = m > 0 ? HemisphereSpec{n, m} : HemisphereSpec::from_exponent(n, std::isnan(r) ? -1.0 : r);
        HemisphereMesh hm = gen_hemisphere(spec);
        bool same = hm.mesh.num_vertices() == mesh.num_vertices() && hm.mesh.faces() == mesh.faces();
        for (int v = 0; same && v < mesh.num_vertices(); ++v)
            same = (hm.mesh.vertex(v) - mesh.vertex(v)).norm() <= 1e-12;
        if (!same) throw UsageError("mesh does not match the hemisphere parameters");
        return hm;
    }
};

struct MinimizerArgs {
    MinimizerOptions opts;
    std::string boundary = "angle";
    bool no_precondition = false;

    void add(CLI::App* app) {
        app->add_option("--max-iterations", opts.max_iterations, "Iteration cap");
        app->add_option("--tolerance", opts.gradient_tolerance, "Gradient max-norm tolerance");
        app->add_option("--memory", opts.memory, "Curvature pairs kept (0: plain descent)");
        app->add_option("--backtrack", opts.backtrack_factor, "Backtracking factor in (0,1)");
        app->add_option("--boundary", boundary, "angle | fixed")->check(CLI::IsMember({"angle", "fixed"}));
        app->add_flag("--no-precondition", no_precondition, "Use the identity as base metric");
    }

    [[nodiscard]] MinimizerOptions build() const {
        MinimizerOptions o = opts;
        o.boundary = boundary == "fixed" ? BoundaryMode::fixed : BoundaryMode::angle;
        o.precondition = !no_precondition;
        o.validate();
        return o;
    }
};

CotanLaplacian laplacian_for(const TriMesh& mesh, const std::string& rho_text, const std::optional<HemisphereMesh>& hm) {
    const RhoMode rho = RhoMode::parse(rho_text);
    if (rho.kind != RhoKind::quadrature) return assemble_laplacian(mesh, rho);
    if (hm) return assemble_laplacian(mesh, rho, &hm->surface, &hm->params);
    if (mesh.dim() == 2) {
        const ParamSurface plane = planar_surface();
        const auto params = planar_param_triangles(mesh);
        return assemble_laplacian(mesh, rho, &plane, &params);
    }
    throw UsageError("quadrature rho on a curved mesh needs --hemisphere-n and --hemisphere-m/-r");
}

Vec3 vertex_centroid(const TriMesh& mesh) {
    Vec3 c = Vec3::Zero();
    for (const auto& v : mesh.vertices()) c += v;
    return c / static_cast<double>(mesh.num_vertices());
}

// ---- subcommands ----

struct GenArgs {
    std::string shape = "hemisphere";
    int n = 8;
    int m = 0;
    double r = kUnset;
    int rings = 8;
    std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    TriMesh mesh;
    if (a.shape == "disk") {
        mesh = gen_disk(a.rings);
    } else {
        if (a.m > 0 && !std::isnan(a.r)) throw UsageError("give either --m or --r, not both");
        if (a.m <= 0 && std::isnan(a.r)) throw UsageError("hemisphere needs --m or --r");
        const HemisphereSpec spec = a.m > 0 ? HemisphereSpec{a.n, a.m} : HemisphereSpec::from_exponent(a.n, a.r);
        mesh = gen_hemisphere(spec).mesh;
    }
    auto file = open_output(a.out);
    write_off(file, mesh);
    out << "vertices " << mesh.num_vertices() << " faces " << mesh.num_faces() << '\n';
    return kExitOk;
}

struct SolveArgs {
    std::string mesh;
    std::string out_dir = "solve";
    std::string rho = "unit";
    std::string init = "harmonic";
    int face = -1;
    HemisphereArgs hemi;
    MinimizerArgs min;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
    const TriMesh mesh = load_mesh(a.mesh);
    const auto hm = a.hemi.build(mesh);
    const CotanLaplacian lap = laplacian_for(mesh, a.rho, hm);
    VertexMap init;
    if (a.init == "harmonic") {
        const int face = a.face >= 0 ? a.face
                                     : nearest_face(mesh, hm ? hm->surface.distinguished_point : vertex_centroid(mesh));
        init = harmonic_init(mesh, lap, face);
    } else if (a.init == "identity") {
        init = planar_coordinates(mesh);
    } else {
        init = stereographic_map(mesh);
    }
    const SolveReport rep = minimize(mesh, lap, init, a.min.build());
    {
        auto f = open_output((fs::path(a.out_dir) / "map.csv").string());
        write_map_csv(f, rep.map);
    }
    {
        auto f = open_output((fs::path(a.out_dir) / "trace.csv").string());
        write_trace_csv(f, rep);
    }
    const auto& e = rep.trace.back().energy;
    out << "converged " << (rep.converged ? 1 : 0) << " iterations " << rep.iterations << " E_D "
        << format_double(e.dirichlet) << " A " << format_double(e.area) << " E_C " << format_double(e.conformal)
        << " folds " << rep.folds << '\n';
    if (hm) {
        const VertexMap f_star = stereographic_map(mesh);
        out << "rel_error " << format_double(relative_error(normalize_map(rep.map, f_star), f_star)) << '\n';
    }
    return rep.converged ? kExitOk : kExitNumerical;
}

struct QualityArgs {
    std::string mesh;
    std::string out = "quality.csv";
    double eps_short = 0.1;
    double eps_mid = 0.1;
    HemisphereArgs hemi;
};

int cmd_quality(const QualityArgs& a, std::ostream& out) {
    const TriMesh mesh = load_mesh(a.mesh);
    const auto hm = a.hemi.build(mesh);
    std::optional<std::vector<ParamTriangle>> planar;
    const std::vector<ParamTriangle>* params = nullptr;
    if (hm) {
        params = &hm->params;
    } else if (mesh.dim() == 2) {
        planar = planar_param_triangles(mesh);
        params = &*planar;
    }
    const QualityReport rep = quality_report(mesh, params);
    const auto flags = delaunay_degradation_scan(mesh, a.eps_short, a.eps_mid);
    auto f = open_output(a.out);
    write_quality_csv(f, rep, flags);
    out << "max_d_over_sin " << format_double(rep.max_dsin) << " max_d_over_r " << format_double(rep.max_dr)
        << " h_V " << format_double(rep.h_V) << " flagged " << flags.size() << '\n';
    return kExitOk;
}

struct BoundsArgs {
    std::string mesh;
    std::string out = "bounds.csv";
    double C_M = kUnset;
    double C_L = kUnset;
    double sigma_min = kUnset;
    double sigma_max = kUnset;
    double area = kUnset;
    int samples = 16;
    HemisphereArgs hemi;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
    const TriMesh mesh = load_mesh(a.mesh);
    const auto hm = a.hemi.build(mesh);
    if (!hm && mesh.dim() != 2) throw UsageError("bounds on a curved mesh need --hemisphere-n and --hemisphere-m/-r");
    if (a.samples < 0) throw UsageError("--samples must be >= 0");
    const ParamSurface surface = hm ? hm->surface : planar_surface();
    const std::vector<ParamTriangle> params = hm ? hm->params : planar_param_triangles(mesh);

    BoundsConfig cfg;
    double dirichlet_h = 0.0;
    if (hm) {
        const CotanLaplacian lap = assemble_laplacian(mesh, RhoMode::quadrature(3), &surface, &params);
        dirichlet_h = dirichlet_energy(lap, stereographic_map(mesh));
        cfg = {surface.lipschitz_C_M, estimate_C_L(mesh, stereographic_surface_gradient), surface.sigma_min,
               surface.sigma_max, 2.0 * std::numbers::pi};
    } else {
        const CotanLaplacian lap = assemble_laplacian(mesh, RhoMode::unit());
        dirichlet_h = dirichlet_energy(lap, planar_coordinates(mesh));
        cfg = {0.0, 0.0, surface.sigma_min, surface.sigma_max, mesh.total_area()};
    }
    if (!std::isnan(a.C_M)) cfg.C_M = a.C_M;
    if (!std::isnan(a.C_L)) cfg.C_L = a.C_L;
    if (!std::isnan(a.sigma_min)) cfg.sigma_min = a.sigma_min;
    if (!std::isnan(a.sigma_max)) cfg.sigma_max = a.sigma_max;
    if (!std::isnan(a.area)) cfg.total_area = a.area;
    cfg.validate();

    const BoundReport rep = bound_report(mesh, params, cfg, dirichlet_h, &surface, a.samples);
    auto f = open_output(a.out);
    write_bound_report_csv(f, rep);
    out << "E_Dh " << format_double(rep.dirichlet_h) << " eps_Dh " << format_double(rep.eps_Dh) << " sound "
        << (rep.sound ? 1 : 0) << '\n';
    return rep.sound ? kExitOk : kExitNumerical;
}

struct ConvergeArgs {
    double r = kUnset;
    std::vector<int> ns;
    std::string out_dir;
    std::string rho = "quadrature3";
    bool timing = false;
    MinimizerArgs min;
};

int cmd_converge(const ConvergeArgs& a, int threads, std::ostream& out) {
    if (std::isnan(a.r)) throw UsageError("--r is required");
    SweepOptions opts;
    opts.minimizer = a.min.build();
    opts.rho = RhoMode::parse(a.rho);
    opts.threads = threads;
    const std::vector<int> ns = a.ns.empty() ? default_n_grid(a.r) : a.ns;
    const auto rows = run_sweep(a.r, ns, opts);
    std::optional<FitResult> fit;
    try {
        fit = fit_exponent(rows);
    } catch (const InsufficientData&) {
    }
    std::string dir = a.out_dir;
    if (dir.empty()) {
        std::ostringstream name;
        name << "converge_r" << format_double(a.r) << '_' << opts.rho.name();
        dir = name.str();
    }
    emit_report(rows, fit ? &*fit : nullptr, output_path(dir), a.timing);
    write_convergence_csv(out, rows, false);
    bool all_converged = true;
    for (const auto& r : rows) all_converged = all_converged && r.converged;
    if (fit) out << "exponent " << format_double(fit->exponent) << '\n';
    return all_converged ? kExitOk : kExitNumerical;
}

struct BeltramiArgs {
    std::string mesh;
    std::string mu;
    std::string boundary;
    std::string out = "beltrami.csv";
};

int cmd_beltrami(const BeltramiArgs& a, std::ostream& out) {
    const TriMesh mesh = load_mesh(a.mesh);
    if (mesh.dim() != 2) throw UsageError("beltrami needs a planar mesh (all z = 0)");
    std::vector<BeltramiCoefficient> mu(static_cast<std::size_t>(mesh.num_faces()));
    if (!a.mu.empty()) {
        auto in = open_input(a.mu);
        mu = read_mu_csv(in, mesh.num_faces());
    }
    auto in = open_input(a.boundary);
    const VertexMap g_b = read_boundary_csv(in, mesh);
    const VertexMap g = solve_beltrami(mesh, mu, g_b);
    auto f = open_output(a.out);
    write_map_csv(f, g);
    out << "vertices " << mesh.num_vertices() << " interior " << mesh.num_vertices() - static_cast<int>(g_b.rows()) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete conformal maps to the unit disk"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
    app.set_config();  // disable CLI11's own config handling; see expand_config
    app.add_option("--config", "key = value file; its entries override flags");

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a mesh (OFF)");
    g->add_option("--shape", gen.shape, "hemisphere | disk")->check(CLI::IsMember({"hemisphere", "disk"}));
    g->add_option("--n", gen.n, "Rings along psi");
    g->add_option("--m", gen.m, "Points along phi");
    g->add_option("--r", gen.r, "Exponent: m = floor(n^r)");
    g->add_option("--rings", gen.rings, "Disk rings");
    g->add_option("--out", gen.out, "Output OFF path")->required();

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Harmonic initialization then conformal-energy minimization");
    s->add_option("--mesh", solve.mesh, "Input OFF")->required()->check(CLI::ExistingFile);
    s->add_option("--out-dir", solve.out_dir, "Directory for map.csv and trace.csv");
    s->add_option("--rho", solve.rho, "unit | analytic | quadratureK");
    s->add_option("--init", solve.init, "harmonic | identity | stereographic")
        ->check(CLI::IsMember({"harmonic", "identity", "stereographic"}));
    s->add_option("--face", solve.face, "Source face for the harmonic initialization");
    solve.hemi.add(s);
    solve.min.add(s);

    QualityArgs quality;
    auto* q = app.add_subcommand("quality", "Triangle quality and degradation scan");
    q->add_option("--mesh", quality.mesh, "Input OFF")->required()->check(CLI::ExistingFile);
    q->add_option("--out", quality.out, "Output CSV");
    q->add_option("--eps-short", quality.eps_short, "Short-edge ratio threshold");
    q->add_option("--eps-mid", quality.eps_mid, "Middle-edge closeness threshold");
    quality.hemi.add(q);

    BoundsArgs bounds;
    auto* b = app.add_subcommand("bounds", "Error-bound report");
    b->add_option("--mesh", bounds.mesh, "Input OFF")->required()->check(CLI::ExistingFile);
    b->add_option("--out", bounds.out, "Output CSV");
    b->add_option("--C_M", bounds.C_M, "Lipschitz constant of grad x");
    b->add_option("--C_L", bounds.C_L, "Lipschitz bound of the map gradient");
    b->add_option("--sigma-min", bounds.sigma_min, "Lower singular-value bound");
    b->add_option("--sigma-max", bounds.sigma_max, "Upper Frobenius bound");
    b->add_option("--area", bounds.area, "Total surface area");
    b->add_option("--samples", bounds.samples, "Soundness samples per face");
    bounds.hemi.add(b);

    ConvergeArgs conv;
    auto* c = app.add_subcommand("converge", "Hemisphere convergence sweep");
    c->add_option("--r", conv.r, "Exponent r in m = floor(n^r)");
    c->add_option("--n", conv.ns, "n values (increasing)")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    c->add_option("--out-dir", conv.out_dir, "Run directory (default named by parameters)");
    c->add_option("--rho", conv.rho, "unit | analytic | quadratureK");
    c->add_flag("--timing", conv.timing, "Add wall-time column (breaks byte-stability)");
    conv.min.add(c);

    BeltramiArgs bel;
    auto* be = app.add_subcommand("beltrami", "Discrete Beltrami solve on a planar mesh");
    be->add_option("--mesh", bel.mesh, "Input OFF (planar)")->required()->check(CLI::ExistingFile);
    be->add_option("--mu", bel.mu, "CSV face,mu1,mu2 (missing faces: 0)")->check(CLI::ExistingFile);
    be->add_option("--boundary", bel.boundary, "CSV vertex,x,y")->required()->check(CLI::ExistingFile);
    be->add_option("--out", bel.out, "Output CSV");

    try {
        std::vector<std::string> args;
        try {
            args = expand_config(argc, argv);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        std::vector<const char*> ptrs{argc > 0 ? argv[0] : "dcm_cli"};
        for (const auto& a : args) ptrs.push_back(a.c_str());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (g->parsed()) return cmd_gen(gen, out);
        if (s->parsed()) return cmd_solve(solve, out);
        if (q->parsed()) return cmd_quality(quality, out);
        if (b->parsed()) return cmd_bounds(bounds, out);
        if (c->parsed()) return cmd_converge(conv, threads, out);
        if (be->parsed()) return cmd_beltrami(bel, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidTopology& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DegenerateCoefficient& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace dcm::cli
