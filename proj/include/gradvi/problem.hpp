#pragma once

// Full description of one variational problem, as read from a config file.

#include "gradvi/gauge.hpp"
#include "gradvi/grid.hpp"
#include "gradvi/obstacle_solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gradvi {

enum class Formulation { Obstacle, Gradient, Vector, Both };

const char* formulation_name(Formulation f);

/// g(v) added to -eta v: none, a v^2 + b v, or a v^4 + b v (a >= 0).
struct ZeroOrderSpec {
    enum class Kind { Linear, Quadratic, Quartic };
    Kind kind = Kind::Linear;
    double a = 0.0;
    double b = 0.0;
};

ZeroOrderTerm make_term(const ZeroOrderSpec& spec, double eta);

struct SolverKnobs {
    double omega = 1.8;
    double tol = 1e-10;
    std::size_t max_sweeps = 500000;
    double tol_act = 1e-9;
    double rho = 10.0;
    double admm_tol = 1e-8;
    std::size_t max_iters = 50000;
};

struct ProblemSpec {
    ProblemSpec(DomainShape domain_, ConvexBody body_) : domain(std::move(domain_)), body(std::move(body_)) {}

    DomainShape domain;
    ConvexBody body;
    Formulation formulation = Formulation::Both;
    double c = 0.0;
    double k = 1.0;
    std::vector<double> eta{0.0};  // one entry unless the formulation is Vector
    ZeroOrderSpec zero_order;
    double h = 0.0;
    std::string h_text;  // as written, e.g. "1/128"
    SolverKnobs solver;
    std::uint64_t seed = 0;
    std::vector<double> h_list;

    double scalar_eta() const { return eta.front(); }
};

}  // namespace gradvi
