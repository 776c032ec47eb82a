#include "gradvi/distance.hpp"
#include "gradvi/error.hpp"
#include "gradvi/obstacle_solver.hpp"
#include "gradvi/regularity.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace gradvi;

namespace {

double dense_max_gauge(const ConvexBody& body, std::size_t n) {
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const Point x{std::cos(t), std::sin(t)};
        best = std::max(best, gauge_eval(body, x));
    }
    return best;
}

}  // namespace

TEST_CASE("A in closed form") {
    CHECK(estimate_A(ConvexBody::euclidean_ball(2, 1.0)) == 1.0);
    CHECK(estimate_A(ConvexBody::euclidean_ball(2, 0.5)) == 2.0);
    CHECK(estimate_A(ConvexBody::pnorm_ball(2, 1.0, 1.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(estimate_A(ConvexBody::pnorm_ball(2, 1.5, 1.0)) == doctest::Approx(std::pow(2.0, 1.0 / 1.5 - 0.5)).epsilon(1e-12));
    CHECK(estimate_A(ConvexBody::pnorm_ball(2, 4.0, 2.0)) == 0.5);
    CHECK(estimate_A(ConvexBody::euclidean_ball(1, 1.0)) == 1.0);
}

TEST_CASE("A matches a dense direction sample") {
    const std::vector<Halfspace> hex{{{1, 0}, 1}, {{-1, 0}, 1}, {{0.5, 0.866}, 1}, {{-0.5, -0.866}, 1},
                                     {{-0.5, 0.866}, 1}, {{0.5, -0.866}, 1}};
    for (const auto& body : {ConvexBody::box({1.0, 0.5}), ConvexBody::cross_polytope(2, 1.0),
                             ConvexBody::pnorm_ball(2, 1.3, 1.0), ConvexBody::pnorm_ball(2, 3.0, 1.0),
                             ConvexBody::polytope(hex)}) {
        CAPTURE(body.family_name());
        const double dense = dense_max_gauge(body, 1000000);
        const double a = estimate_A(body);
        CHECK(a >= dense - 1e-12);
        CHECK(a <= dense * (1.0 + 1e-3));
    }
}

TEST_CASE("B is consistent with the p-norm constant") {
    for (double p : {2.0, 3.0, 4.0, 6.0}) {
        CAPTURE(p);
        const auto b = estimate_B(ConvexBody::pnorm_ball(2, p, 1.0), 10000, 17);
        CHECK(b.consistent);
        CHECK(b.value >= 1.0);
        CHECK(b.value <= pnorm_b_constant(p) + 1e-6);
        CHECK(b.sampled <= pnorm_b_constant(p) + 1e-6);
        CHECK(b.samples == 10000);
    }
    const auto e = estimate_B(ConvexBody::euclidean_ball(2, 1.0), 10000, 1);
    CHECK(e.value <= 2.0 + 1e-6);
    const auto box = estimate_B(ConvexBody::box({1.0, 1.0}), 2000, 1);
    CHECK(box.value >= 1.0);
    CHECK(std::isfinite(box.value));
    CHECK_THROWS_AS(estimate_B(ConvexBody::euclidean_ball(2, 1.0), 10), Error);
}

TEST_CASE("second differences are exact on quadratics") {
    const auto g = build_grid(DomainShape::rectangle(-1, -1, 2, 2), 1.0 / 16.0);
    ScalarField half = ScalarField::zeros(g), affine = ScalarField::zeros(g);
    for (std::size_t i : g->interior_nodes()) {
        const auto x = g->coord(i);
        half.values[i] = 0.5 * (x[0] * x[0] + x[1] * x[1]);
        affine.values[i] = 2.0 - 3.0 * x[0] + 0.25 * x[1];
    }
    for (std::size_t dirs : {4u, 8u}) {
        const auto d2 = second_difference_field(half, dirs);
        const auto d0 = second_difference_field(affine, dirs);
        std::size_t defined = 0;
        for (std::size_t i = 0; i < g->node_count(); ++i) {
            if (std::isnan(d2[i])) continue;
            ++defined;
            CHECK(d2[i] == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(d0[i] <= 1e-9);
        }
        CHECK(defined > 0);
    }
    // Anisotropic quadratic: the largest second derivative is along x.
    ScalarField q = ScalarField::zeros(g);
    for (std::size_t i : g->interior_nodes()) {
        const auto x = g->coord(i);
        q.values[i] = 3.0 * x[0] * x[0] + x[1] * x[1];
    }
    const auto dq = second_difference_field(q);
    for (double v : dq.values) {
        if (!std::isnan(v)) CHECK(v == doctest::Approx(6.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(second_difference_field(q, 5), Error);
}

TEST_CASE("1-D torsion: elastic core, plastic band and the free-boundary spike") {
    const double h = 1.0 / 256.0;
    const auto g = build_grid(DomainShape::interval(-1, 1), h);
    const auto ball = ConvexBody::euclidean_ball(1, 1.0);
    const auto d = gauge_distance_map(g, polar(ball));
    auto [lo, hi] = build_obstacles(d, 0.0, 1.0);
    const auto r = psor_solve({g, lo, hi, 0.0, ZeroOrderTerm::linear(4.0)});
    REQUIRE(r.stats.converged);
    const auto d2 = second_difference_field(r.u);
    for (std::size_t i : g->interior_nodes()) {
        if (std::isnan(d2[i])) continue;
        const double x = g->coord(i)[0];
        if (std::abs(x) < 0.2) CHECK(d2[i] == doctest::Approx(4.0).epsilon(1e-6));
        if (std::abs(x) > 0.3 && std::abs(x) < 0.95) CHECK(d2[i] <= 1e-6);
    }
    const auto report = bound_profile(r.u, d, {1.0, 1.0, 1.0, 0.0, 4.0}, 0.2);
    CHECK(report.max_ratio > 0.0);
    CHECK(std::isfinite(report.max_ratio));
    CHECK(report.region_nodes > 0);
    for (std::size_t i : g->interior_nodes()) {
        if (!std::isnan(report.ratio[i])) {
            CHECK(report.ratio[i] >= 0.0);
            CHECK(d[i] > 2.0 * h);
        }
    }
}

TEST_CASE("constant field has zero ratio") {
    const auto g = build_grid(DomainShape::disk(0, 0, 1), 1.0 / 16.0);
    const auto d = gauge_distance_map(g, ConvexBody::euclidean_ball(2, 1.0));
    ScalarField c = ScalarField::zeros(g);
    for (std::size_t i : g->interior_nodes()) c.values[i] = 0.3;
    const auto r = bound_profile(c, d, {1.0, 1.0, 1.0, 0.3, 0.0}, 0.1);
    CHECK(r.max_ratio == 0.0);
    CHECK(r.region_nodes > 0);
    CHECK_THROWS_AS(bound_profile(c, d, {1.0, 0.5, 1.0, 0.0, 0.0}, 0.1), Error);
}
