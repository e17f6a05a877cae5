#pragma once

#include "dcm/laplacian.hpp"
#include "dcm/mesh.hpp"

#include <iosfwd>
#include <vector>

namespace dcm {

enum class BoundaryMode {
    angle,  // boundary vertices slide on the unit circle
    fixed   // boundary vertices stay where the initial map puts them
};

struct MinimizerOptions {
    int max_iterations = 2000;
    double gradient_tolerance = 1e-9;  // max-norm of the reduced gradient
    double backtrack_factor = 0.5;
    double initial_step = 1.0;
    double armijo = 1e-4;
    int max_backtracks = 50;
    int memory = 8;                  // curvature pairs; 0 gives plain descent
    bool precondition = true;        // interior Laplacian block as the base metric
    BoundaryMode boundary = BoundaryMode::angle;

    void validate() const;
};

struct TraceEntry {
    int iteration = 0;
    EnergyBreakdown energy;
    double gradient_norm = 0.0;
    int folds = 0;
};

enum class SolveStatus { converged, max_iterations, line_search_failed };

struct SolveReport {
    VertexMap map;
    std::vector<TraceEntry> trace;  // one entry per accepted iterate, starting with the initial map
    int iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::max_iterations;
    int folds = 0;
};

// Gradient of E_C with respect to every vertex position.
[[nodiscard]] VertexMap energy_gradient(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& f);

[[nodiscard]] SolveReport minimize(const TriMesh& mesh, const CotanLaplacian& lap, const VertexMap& init,
                                   const MinimizerOptions& opts = {});

void write_trace_csv(std::ostream& out, const SolveReport& report);
void write_map_csv(std::ostream& out, const VertexMap& f);

// Best rotation or reflection about the origin taking f onto reference.
[[nodiscard]] VertexMap normalize_map(const VertexMap& f, const VertexMap& reference);
// |f - f*|_F / |f*|_F.
[[nodiscard]] double relative_error(const VertexMap& f, const VertexMap& f_star);

}  // namespace dcm
