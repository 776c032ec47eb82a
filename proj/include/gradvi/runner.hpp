#pragma once

// Experiment runner behind the command-line tool.

#include "gradvi/config.hpp"
#include "gradvi/gradient_solver.hpp"
#include "gradvi/obstacle_solver.hpp"
#include "gradvi/regularity.hpp"
#include "gradvi/vector_reduction.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gradvi {

struct ScalarRun {
    GridPtr grid;
    ScalarField dist;  // gauge distance in the polar of the constraint body
    ObstacleProblem problem;
    std::optional<PsorResult> psor;
    std::optional<AdmmResult> admm;
    double psor_seconds = 0.0;
    double admm_seconds = 0.0;
};

/// Builds grid, distance and obstacles for `spec` and runs the requested solvers.
ScalarRun solve_scalar(const ProblemSpec& spec, bool obstacle, bool gradient);

struct VectorRun {
    GridPtr grid;
    ScalarRun reduced;                        // scalar solve of the reduced problem
    VectorField assembled;                    // u eta
    std::optional<VectorSolveResult> direct;  // only for ball-shaped K
    double direct_seconds = 0.0;
};

VectorRun solve_vector(const ProblemSpec& spec, bool direct);

/// max |a - b| over non-Exterior nodes.
double sup_difference(const ScalarField& a, const ScalarField& b);
double sup_difference(const VectorField& a, const VectorField& b);

struct RegularityInputs {
    BoundParams params;
    double region_threshold = 0.0;
};

/// A and B from the polar of spec.body, and the region d > 0.1 diam.
RegularityInputs regularity_inputs(const ProblemSpec& spec);

/// Solves at each h (obstacle formulation unless spec asks for the gradient one)
/// and reports the region maxima.
std::vector<RefinementRow> refinement_study(const ProblemSpec& spec, const std::vector<double>& hs);

enum class Command { Solve, Equivalence, Vector, Regularity, Distance };

const char* command_name(Command c);

struct RunOptions {
    std::string out_dir = "runs";
    std::vector<double> h_list;  // overrides spec.h_list when nonempty
    bool write_files = true;
};

struct RunOutcome {
    nlohmann::json report;
    bool passed = false;
    std::string run_dir;
    std::vector<std::string> failures;
};

/// Runs a subcommand, writes fields (CSV), report.json and timing.txt under
/// <out_dir>/<command>-<spec hash>, and evaluates every contracted tolerance.
RunOutcome run(Command command, ProblemSpec spec, const RunOptions& options);

}  // namespace gradvi
