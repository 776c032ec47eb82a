#include "gradvi/distance.hpp"
#include "gradvi/discretization.hpp"
#include "gradvi/error.hpp"
#include "gradvi/obstacle_solver.hpp"

#include "doctest.h"

#include <Eigen/SparseCholesky>
#include <cmath>

using namespace gradvi;

namespace {

ObstacleProblem torsion(const DomainShape& shape, double h, double eta, double k = 1.0,
                        const ConvexBody* metric = nullptr) {
    const auto g = build_grid(shape, h);
    const ConvexBody ball = ConvexBody::euclidean_ball(shape.dimension(), 1.0);
    const auto d = gauge_distance_map(g, metric ? *metric : ball);
    auto [lo, hi] = build_obstacles(d, 0.0, k);
    return {g, std::move(lo), std::move(hi), 0.0, ZeroOrderTerm::linear(eta)};
}

// Free-boundary solution of -u'' = eta on (-1, 1) with |u'| <= 1.
double torsion_exact(double x, double eta) {
    const double xs = 1.0 / eta;
    if (std::abs(x) >= xs) return 1.0 - std::abs(x);
    return 1.0 - xs + 0.5 * eta * (xs * xs - x * x);
}

}  // namespace

TEST_CASE("1-D torsion matches the free-boundary solution") {
    const double h = 1.0 / 512.0;
    const auto p = torsion(DomainShape::interval(-1, 1), h, 4.0);
    const auto r = psor_solve(p);
    REQUIRE(r.stats.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < p.grid->node_count(); ++i) {
        err = std::max(err, std::abs(r.u[i] - torsion_exact(p.grid->coord(i)[0], 4.0)));
    }
    CHECK(err <= 2e-3);
    CHECK(std::abs(r.u[512] - 0.875) <= 2e-3);
    const auto sets = active_sets(r.u, p, 1e-9);
    for (std::size_t i : p.grid->interior_nodes()) {
        const double x = std::abs(p.grid->coord(i)[0]);
        if (x >= 0.25 + 2 * h) CHECK(sets.upper[i]);
        if (x <= 0.25 - 2 * h) CHECK(sets.elastic[i]);
        CHECK(!sets.lower[i]);
    }
    const auto kkt = kkt_residuals(r.u, p, sets);
    CHECK(kkt.elastic_residual <= 1e-6 / (h * h));
    CHECK(kkt.upper_sign <= 1e-6 / (h * h));
}

TEST_CASE("fully elastic case reproduces the Poisson solution") {
    const auto p = torsion(DomainShape::interval(-1, 1), 1.0 / 64.0, 1.0);
    const auto r = psor_solve(p);
    REQUIRE(r.stats.converged);
    for (std::size_t i = 0; i < p.grid->node_count(); ++i) {
        const double x = p.grid->coord(i)[0];
        // The three-point scheme is exact on quadratics.
        CHECK(std::abs(r.u[i] - 0.5 * (1.0 - x * x)) <= 1e-7);
    }
    const auto sets = active_sets(r.u, p, 1e-9);
    CHECK(sets.elastic_count == p.grid->interior_nodes().size());
    CHECK(sets.lower_count + sets.upper_count == 0);
}

TEST_CASE("zero obstacle gap pins the solution to c") {
    auto p = torsion(DomainShape::rectangle(0, 0, 1, 1), 1.0 / 16.0, 4.0, 0.0);
    p.c = 0.0;
    const auto r = psor_solve(p);
    CHECK(r.stats.converged);
    for (std::size_t i : p.grid->interior_nodes()) CHECK(r.u[i] == 0.0);
    CHECK(active_sets(r.u, p, 1e-9).lower_count == p.grid->interior_nodes().size());
}

TEST_CASE("large source saturates the upper obstacle") {
    const auto p = torsion(DomainShape::rectangle(0, 0, 1, 1), 1.0 / 16.0, 1e6);
    const auto r = psor_solve(p);
    REQUIRE(r.stats.converged);
    CHECK(active_sets(r.u, p, 1e-9).upper_count == p.grid->interior_nodes().size());
}

TEST_CASE("energy is nonincreasing and iterates stay feasible") {
    const auto p = torsion(DomainShape::disk(0, 0, 1), 1.0 / 24.0, 6.0);
    PsorOptions opt;
    opt.record_energy = true;
    const auto r = psor_solve(p, opt);
    REQUIRE(r.stats.converged);
    const auto& e = r.stats.energy_history;
    REQUIRE(e.size() > 2);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] <= e[i - 1] + 1e-12 * (1.0 + std::abs(e[i - 1])));
    for (std::size_t i : p.grid->interior_nodes()) {
        CHECK(r.u[i] >= p.lower[i] - 1e-12);
        CHECK(r.u[i] <= p.upper[i] + 1e-12);
    }
    CHECK(fixed_point_residual(p, r.u) <= opt.tol);
}

TEST_CASE("comparison: a larger source gives a larger solution") {
    const auto p1 = torsion(DomainShape::disk(0, 0, 1), 1.0 / 24.0, 1.0);
    const auto p4 = torsion(DomainShape::disk(0, 0, 1), 1.0 / 24.0, 4.0);
    const auto u1 = psor_solve(p1).u, u4 = psor_solve(p4).u;
    for (std::size_t i : p1.grid->interior_nodes()) CHECK(u4[i] >= u1[i] - 1e-9);
}

TEST_CASE("neighbor values respect the polar gauge") {
    const double h = 1.0 / 32.0;
    for (const auto& body : {ConvexBody::box({1.0, 1.0}), ConvexBody::pnorm_ball(2, 3.0, 1.0)}) {
        const auto kp = polar(body);
        const auto p = torsion(DomainShape::rectangle(0, 0, 1, 1), h, 8.0, 1.0, &kp);
        const auto r = psor_solve(p);
        REQUIRE(r.stats.converged);
        CHECK(lipschitz_excess(r.u, kp, 1.0) <= 5 * h * h);
    }
}

TEST_CASE("pluggable quadratic term against a direct sparse solve") {
    // eta = 3, g(v) = v^2 on a square small enough to stay elastic: (K + 2M) w = 3 m.
    const double h = 1.0 / 16.0;
    const auto g = build_grid(DomainShape::rectangle(0, 0, 0.5, 0.5), h);
    const auto d = gauge_distance_map(g, ConvexBody::euclidean_ball(2, 1.0));
    auto [lo, hi] = build_obstacles(d, 0.0, 1.0);
    const ConvexTerm quad{[](double v) { return v * v; }, [](double v) { return 2.0 * v; }, nullptr};
    const ObstacleProblem p{g, lo, hi, 0.0, ZeroOrderTerm::pluggable(3.0, quad)};
    const auto r = psor_solve(p);
    REQUIRE(r.stats.converged);

    const Discretization disc(g);
    Eigen::SparseMatrix<double> a = disc.stiffness();
    const auto& nodes = g->interior_nodes();
    Eigen::VectorXd b(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        a.coeffRef(kk, kk) += 2.0 * disc.mass()[nodes[k]];
        b[kk] = 3.0 * disc.mass()[nodes[k]];
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    const Eigen::VectorXd w = solver.solve(b);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        CHECK(std::abs(r.u[nodes[k]] - w[static_cast<Eigen::Index>(k)]) <= 1e-7);
    }
    const auto sets = active_sets(r.u, p, 1e-9);
    CHECK(sets.elastic_count == nodes.size());
    CHECK(kkt_residuals(r.u, p, sets).elastic_residual <= 1e-6 / (h * h));
}

TEST_CASE("convexity certificate rejects a concave term") {
    const ConvexTerm concave{[](double v) { return -v * v; }, [](double v) { return -2.0 * v; }, nullptr};
    CHECK_THROWS_AS(certify_convexity(ZeroOrderTerm::pluggable(0.0, concave), -1.0, 1.0), Error);
    const ConvexTerm quartic{[](double v) { return v * v * v * v; }, [](double v) { return 4.0 * v * v * v; }, nullptr};
    CHECK_NOTHROW(certify_convexity(ZeroOrderTerm::pluggable(0.0, quartic), -1.0, 1.0));
}

TEST_CASE("inconsistent obstacles are rejected") {
    auto p = torsion(DomainShape::interval(-1, 1), 0.25, 1.0);
    std::swap(p.lower, p.upper);
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK_THROWS_AS(psor_solve(p), Error);
}

TEST_CASE("non-convergence is flagged, not thrown") {
    const auto p = torsion(DomainShape::disk(0, 0, 1), 1.0 / 32.0, 4.0);
    PsorOptions opt;
    opt.max_sweeps = 3;
    const auto r = psor_solve(p, opt);
    CHECK(!r.stats.converged);
    CHECK(r.stats.iterations == 3);
}

TEST_CASE("mesh refinement in 1-D") {
    const auto pc = torsion(DomainShape::interval(-1, 1), 1.0 / 64.0, 4.0);
    const auto pf = torsion(DomainShape::interval(-1, 1), 1.0 / 128.0, 4.0);
    const auto uc = psor_solve(pc).u, uf = psor_solve(pf).u;
    double diff = 0.0;
    for (std::size_t i = 0; i < pc.grid->node_count(); ++i) diff = std::max(diff, std::abs(uc[i] - uf[2 * i]));
    // The continuous solution is C^{1,1}; nodal error is at most O(h).
    CHECK(diff <= 1.0 / 64.0);
}
