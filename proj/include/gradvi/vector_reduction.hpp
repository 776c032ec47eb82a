#pragma once

// Vector-valued problem: minimize I(v) = sum_l |grad v_l|^2 - eta . v over
// ||Dv||_{2,K} <= 1, and its reduction to a scalar double-obstacle problem.

#include "gradvi/gradient_solver.hpp"
#include "gradvi/obstacle_solver.hpp"
#include "gradvi/problem.hpp"

#include <cstdint>
#include <vector>

namespace gradvi {

struct VectorProblem {
    GridPtr grid;
    ConvexBody body;
    std::vector<double> eta;

    void validate() const;
    double eta_norm() const;
};

/// Scalar problem whose minimizer u gives the vector minimizer u eta: body
/// polar(K), bound k = 1/|eta|, c = 0 and source 1/2 (the energy without the
/// factor 1/2 has the same minimizer as 1/2|Dv|^2 - v/2).
ProblemSpec reduce_to_scalar(const ProblemSpec& vector_spec);

/// Obstacles +-d_K(x)/|eta| on the grid of `vp`, c = 0, source 1/2.
ObstacleProblem reduced_obstacle_problem(const VectorProblem& vp);

VectorField assemble_vector(const ScalarField& u, const std::vector<double>& eta);

/// I_h(v) = sum_l [2 E_h(v_l) - sum_a m_a eta_l v_l(a)], E_h the Dirichlet energy.
double vector_energy(const VectorField& v, const std::vector<double>& eta);
/// J_1,h(u) = 2 E_h(u) - sum_a m_a u(a).
double j1_energy(const ScalarField& u);

struct K1Report {
    double max_norm = 0.0;  // max over cells of ||Dv||_{2,K}
    std::size_t cells = 0;
};

K1Report k1_feasibility(const VectorField& v, const ConvexBody& body);

/// |I_h(T v) - I_h(v)| for orthogonal T (row-major N x N) with T eta = eta.
double invariance_check(const VectorField& v, const std::vector<double>& eta, const MatrixNn& t);

/// Uniformly random orthogonal matrix fixing eta.
MatrixNn random_orthogonal_fixing(const std::vector<double>& eta, std::uint64_t seed);

/// Largest angle (radians) between v(x) and eta over nodes with |v(x)| >= threshold * max |v|.
double collinearity_angle(const VectorField& v, const std::vector<double>& eta, double threshold = 0.01);

struct VectorSolveResult {
    VectorField v;
    SolveStats stats;
    double primal = 0.0;
    double dual = 0.0;
    std::vector<ResidualSample> log;
};

/// Splitting solver on the vector problem directly; K must be a Euclidean ball
/// (or the p = 2 ball), where projecting onto ||A||_{2,K} <= 1 is singular-value clipping.
VectorSolveResult direct_vector_solve(const VectorProblem& vp, const AdmmOptions& options = {});

}  // namespace gradvi
