#pragma once

// Double-obstacle problem: minimize 1/2 |grad_h v|^2 + g(v) - eta v over
// phi <= v <= psi with v = c on the boundary, by projected SOR.

#include "gradvi/discretization.hpp"
#include "gradvi/grid.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gradvi {

/// Convex g added to the linear -eta v term.
struct ConvexTerm {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// Optional; estimated by central differences of `derivative` when absent.
    std::function<double(double)> curvature;
};

struct ZeroOrderTerm {
    double eta = 0.0;
    std::optional<ConvexTerm> g;

    static ZeroOrderTerm linear(double eta) { return {eta, std::nullopt}; }
    static ZeroOrderTerm pluggable(double eta, ConvexTerm g) { return {eta, std::move(g)}; }

    double value(double v) const { return (g ? g->value(v) : 0.0) - eta * v; }
    double derivative(double v) const { return (g ? g->derivative(v) : 0.0) - eta; }
    double curvature(double v) const;
};

/// Checks that g' is nondecreasing on 1000 equally spaced points of [lo, hi].
/// Throws Error naming the first decreasing pair otherwise.
void certify_convexity(const ZeroOrderTerm& term, double lo, double hi);

struct ObstacleProblem {
    GridPtr grid;
    ScalarField lower;  // phi
    ScalarField upper;  // psi
    double c = 0.0;
    ZeroOrderTerm term;

    /// Throws if phi > psi somewhere or the obstacles disagree with c on Boundary nodes.
    void validate() const;
};

struct SolveStats {
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0;  // final stopping quantity
    std::string method;
    std::vector<double> energy_history;  // filled when requested
};

struct PsorOptions {
    double omega = 1.8;
    double tol = 1e-10;
    std::size_t max_sweeps = 500000;
    bool record_energy = false;
};

struct PsorResult {
    ScalarField u;
    SolveStats stats;
};

PsorResult psor_solve(const ObstacleProblem& problem, const PsorOptions& options = {});

/// Discrete energy 1/2 |grad_h u|^2 + sum_a m_a [g(u_a) - eta u_a].
double discrete_energy(const Discretization& disc, const ScalarField& u, double c, const ZeroOrderTerm& term);

/// max_a |clip(GS(u)_a, phi_a, psi_a) - u_a| over Interior nodes, without updating u.
double fixed_point_residual(const ObstacleProblem& problem, const ScalarField& u);

struct ActiveSets {
    std::vector<bool> lower;    // Lambda_1
    std::vector<bool> upper;    // Lambda_2
    std::vector<bool> elastic;  // N
    std::size_t lower_count = 0, upper_count = 0, elastic_count = 0;
};

/// Lower contact wins when both obstacles are within tol_act of u.
ActiveSets active_sets(const ScalarField& u, const ObstacleProblem& problem, double tol_act);

struct KktReport {
    double elastic_residual = 0.0;  // max over N of |-Delta_h u + g'(u) - eta|
    double lower_sign = 0.0;        // min over Lambda_1 of (-Delta_h u + g'(u) - eta), should be >= 0
    double upper_sign = 0.0;        // max over Lambda_2 of the same, should be <= 0
};

KktReport kkt_residuals(const ScalarField& u, const ObstacleProblem& problem, const ActiveSets& sets);

}  // namespace gradvi
