#pragma once

// Gradient-constrained formulation: minimize 1/2 |grad_h v|^2 + g(v) - eta v
// over gamma_K(grad_h v) <= k per cell, v = c on the boundary, by ADMM.

#include "gradvi/discretization.hpp"
#include "gradvi/gauge.hpp"
#include "gradvi/obstacle_solver.hpp"

#include <array>
#include <vector>

namespace gradvi {

/// One n-vector per cell. Cell i holds the forward differences leaving node i;
/// components[axis][i].
struct GradientField {
    GridPtr grid;
    std::vector<std::vector<double>> components;
    std::vector<bool> cell;  // false where node i has no outgoing edge
};

/// Forward differences of v on cut-cell edges; Boundary values are taken to sit
/// on the boundary crossing.
GradientField discrete_gradient(const ScalarField& v);

/// Negative adjoint of discrete_gradient for fields vanishing off Interior nodes:
/// sum_cells grad v . q = -sum_nodes v div q.
ScalarField discrete_divergence(const GradientField& q);

struct GradientProblem {
    GridPtr grid;
    ConvexBody body;
    double k = 1.0;
    double c = 0.0;
    ZeroOrderTerm term;
};

struct AdmmOptions {
    double rho = 10.0;
    double tol = 1e-8;
    std::size_t max_iters = 50000;
    bool log_residuals = true;
    /// Residual balancing: every 25 iterations up to adapt_until, rho is doubled
    /// (halved) while the primal residual exceeds ten times the dual one (or the
    /// reverse), and the system is refactored.
    bool adapt_rho = true;
    std::size_t adapt_until = 250;
    /// Anderson memory on the (z, lambda) iteration; 0 runs plain ADMM.
    std::size_t anderson = 10;
    /// For the ball and p-balls with p >= 2, start the iteration from a
    /// primal-dual interior-point solution of the same discrete problem. The
    /// ADMM stopping test still decides convergence; if the interior-point
    /// solve fails the iteration starts from zero.
    bool interior_start = true;
};

struct ResidualSample {
    std::size_t iteration;
    double primal;
    double dual;
};

struct AdmmResult {
    ScalarField u;
    SolveStats stats;
    double primal = 0.0;
    double dual = 0.0;
    /// max over cells of |M w - rhs| / |rhs| in the last linear solve.
    double linear_residual = 0.0;
    bool projection_ok = true;
    std::size_t interior_iterations = 0;  // 0 when no interior-point start was used
    std::vector<ResidualSample> log;
};

AdmmResult admm_solve(const GradientProblem& problem, const AdmmOptions& options = {});

struct FeasibilityProfile {
    double max_ratio = 0.0;  // max gamma_K(grad_h v) / k
    std::array<std::size_t, 12> histogram{};  // bins of width 0.1 on [0, 1.1), last bin >= 1.1
    std::size_t cells = 0;
};

FeasibilityProfile feasibility_profile(const ScalarField& v, const ConvexBody& body, double k);

}  // namespace gradvi
