#include "gradvi/error.hpp"
#include "gradvi/gauge.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace gradvi;

namespace {

std::vector<ConvexBody> families2d() {
    return {
        ConvexBody::euclidean_ball(2, 1.5),
        ConvexBody::pnorm_ball(2, 3.0, 0.8),
        ConvexBody::pnorm_ball(2, 1.5, 1.2),
        ConvexBody::pnorm_ball(2, 1.0, 1.0),
        ConvexBody::box({1.0, 0.5}),
        ConvexBody::cross_polytope(2, 2.0),
        ConvexBody::polytope({{{1, 0}, 1}, {{-1, 0}, 1}, {{1, 1}, 1.2}, {{-1, -1}, 1.2}, {{0, 1}, 1}, {{0, -1}, 1}}),
    };
}

Point random_point(std::mt19937_64& rng, std::size_t dim, double scale = 2.0) {
    std::normal_distribution<double> n(0.0, scale);
    Point p(dim);
    for (auto& v : p) v = n(rng);
    return p;
}

double dotp(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("gauge reference values") {
    const Point x{2.0, 1.0};
    CHECK(gauge_eval(ConvexBody::box({1.0, 1.0}), x) == 2.0);
    CHECK(gauge_eval(ConvexBody::euclidean_ball(2, 1.0), Point{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
    for (const auto& k : families2d()) CHECK(gauge_eval(k, Point{0.0, 0.0}) == 0.0);
    CHECK(gauge_eval(ConvexBody::pnorm_ball(2, 3.0, 2.0), Point{1.0, 1.0}) == doctest::Approx(std::cbrt(2.0) / 2.0));
    CHECK(gauge_eval(ConvexBody::cross_polytope(3, 2.0), Point{1.0, -2.0, 3.0}) == doctest::Approx(3.0));
}

TEST_CASE("gauge is homogeneous, balanced and subadditive") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    for (const auto& k : families2d()) {
        CAPTURE(k.family_name());
        for (int i = 0; i < 500; ++i) {
            const Point x = random_point(rng, 2), y = random_point(rng, 2);
            const double t = ut(rng);
            Point tx = x, mx = x, s = x;
            for (std::size_t j = 0; j < 2; ++j) {
                tx[j] *= t;
                mx[j] = -x[j];
                s[j] += y[j];
            }
            const double g = gauge_eval(k, x);
            CHECK(std::abs(gauge_eval(k, tx) - t * g) <= 1e-12 * (1.0 + t * g));
            CHECK(gauge_eval(k, mx) == g);
            CHECK(gauge_eval(k, s) <= g + gauge_eval(k, y) + 1e-12);
        }
    }
}

TEST_CASE("polar reference cases") {
    const auto p = polar(ConvexBody::euclidean_ball(2, 2.0));
    REQUIRE(p.is<EuclideanBall>());
    CHECK(p.as<EuclideanBall>().radius == 0.5);

    const auto q = polar(ConvexBody::pnorm_ball(2, 1.5, 1.0));
    REQUIRE(q.is<PNormBall>());
    CHECK(q.as<PNormBall>().p == doctest::Approx(3.0));
    CHECK(q.as<PNormBall>().radius == 1.0);

    const auto c = polar(ConvexBody::box({1.0, 1.0}));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Point y = random_point(rng, 2);
        CHECK(gauge_eval(c, y) == doctest::Approx(std::abs(y[0]) + std::abs(y[1])).epsilon(1e-13));
    }
    const auto b = polar(ConvexBody::cross_polytope(2, 4.0));
    REQUIRE(b.is<Box>());
    CHECK(b.as<Box>().half_widths == std::vector<double>{0.25, 0.25});
}

TEST_CASE("bipolar identity") {
    std::mt19937_64 rng(11);
    for (const auto& k : families2d()) {
        CAPTURE(k.family_name());
        const auto kk = polar(polar(k));
        for (int i = 0; i < 1000; ++i) {
            const Point x = random_point(rng, 2);
            CHECK(std::abs(gauge_eval(kk, x) - gauge_eval(k, x)) <= 1e-10 * (1.0 + gauge_eval(k, x)));
        }
    }
    const auto b3 = ConvexBody::box({1.0, 2.0, 0.5});
    const auto bb = polar(polar(b3));
    for (int i = 0; i < 200; ++i) {
        const Point x = random_point(rng, 3);
        CHECK(gauge_eval(bb, x) == doctest::Approx(gauge_eval(b3, x)).epsilon(1e-10));
    }
}

TEST_CASE("polar gauge is the support function over sampled boundary points") {
    // Independent route: sample boundary points k/gauge(k) and maximise y . k.
    std::mt19937_64 rng(5);
    const auto dirs = sphere_directions(2, 20000);
    for (const auto& k : families2d()) {
        CAPTURE(k.family_name());
        for (int i = 0; i < 20; ++i) {
            const Point y = random_point(rng, 2);
            double best = 0.0;
            for (const auto& d : dirs) best = std::max(best, dotp(y, d) / gauge_eval(k, d));
            const double exact = polar_gauge(k, y);
            CHECK(best <= exact + 1e-12);
            CHECK(best >= exact * (1.0 - 1e-3));
            CHECK(gauge_eval(polar(k), y) == doctest::Approx(exact).epsilon(1e-12));
        }
    }
}

TEST_CASE("duality inequality") {
    std::mt19937_64 rng(13);
    for (const auto& k : families2d()) {
        for (int i = 0; i < 2000; ++i) {
            const Point x = random_point(rng, 2), y = random_point(rng, 2);
            CHECK(duality_gap(k, x, y) >= -1e-12);
        }
    }
    const auto ball = ConvexBody::euclidean_ball(2, 1.0);
    CHECK(duality_gap(ball, Point{1.0, 0.0}, Point{1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(duality_gap(ConvexBody::box({1.0, 1.0}), Point{1.0, 1.0}, Point{1.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("operator norm reference values") {
    MatrixNn a(2, 2, {2.0, 0.0, 0.0, 3.0});
    CHECK(operator_norm_2k(a, ConvexBody::euclidean_ball(2, 1.0)) == doctest::Approx(3.0));
    CHECK(operator_norm_2k(MatrixNn(2, 2), ConvexBody::euclidean_ball(2, 1.0)) == 0.0);
    CHECK(operator_norm_2k(MatrixNn(1, 2, {1.0, 1.0}), ConvexBody::box({1.0, 1.0})) == doctest::Approx(2.0));
    CHECK_THROWS_AS(operator_norm_2k(MatrixNn(1, 3), ConvexBody::box({1.0, 1.0})), Error);
}

TEST_CASE("operator norm against dense direction sampling") {
    std::mt19937_64 rng(17);
    const auto dirs = sphere_directions(2, 100000);
    for (const auto& k : families2d()) {
        CAPTURE(k.family_name());
        for (int t = 0; t < 5; ++t) {
            const Point e = random_point(rng, 6, 1.0);
            const MatrixNn a(3, 2, e);
            double brute = 0.0;
            for (const auto& d : dirs) {
                double s = 0.0;
                for (std::size_t r = 0; r < 3; ++r) {
                    const double v = a(r, 0) * d[0] + a(r, 1) * d[1];
                    s += v * v;
                }
                brute = std::max(brute, std::sqrt(s) / gauge_eval(k, d));
            }
            const double got = operator_norm_2k(a, k);
            CHECK(got <= brute * (1.0 + 1e-4) + 1e-12);
            CHECK(got >= brute * (1.0 - 1e-3));
        }
    }
}

TEST_CASE("second difference of a gauge") {
    const auto ball = ConvexBody::euclidean_ball(2, 1.0);
    const double v = second_difference_gauge(ball, Point{1.0, 0.0}, Point{0.0, 1.0}, 0.5);
    CHECK(v == doctest::Approx((2.0 * std::sqrt(1.25) - 2.0) / 0.25).epsilon(1e-13));
    CHECK(v == doctest::Approx(0.94427).epsilon(1e-5));
    for (const auto& k : families2d()) {
        const Point x{0.7, -1.3};
        const double gx = gauge_eval(k, x);
        const Point z{x[0] / gx, x[1] / gx};
        CHECK(std::abs(second_difference_gauge(k, x, z, 0.25 * gx)) <= 1e-12);
    }
    CHECK_THROWS_AS(second_difference_gauge(ball, Point{1.0, 0.0}, Point{0.0, 2.0}, 0.5), Error);
    CHECK_THROWS_AS(second_difference_gauge(ball, Point{1.0, 0.0}, Point{0.0, 1.0}, 1.5), Error);
}

TEST_CASE("p-norm second-difference constant and bound") {
    CHECK(pnorm_b_constant(2.0) == 2.0);
    CHECK(pnorm_b_constant(3.0) == 4.0);
    CHECK(pnorm_b_constant(6.0) == 10.0);
    CHECK_THROWS_AS(pnorm_b_constant(1.5), Error);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto k = ConvexBody::pnorm_ball(2, 4.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        Point x = random_point(rng, 2), z = random_point(rng, 2);
        const double gz = gauge_eval(k, z);
        for (auto& c : z) c /= gz;
        const double gx = gauge_eval(k, x);
        const double h = u(rng) * gx * 0.999;
        if (!(h > 0.0)) continue;
        CHECK(second_difference_gauge(k, x, z, h) <= 6.0 / (gx - h) + 1e-9);
    }
}

TEST_CASE("constructors reject malformed bodies") {
    CHECK_THROWS_AS(ConvexBody::euclidean_ball(2, -1.0), Error);
    CHECK_THROWS_AS(ConvexBody::pnorm_ball(2, 0.5, 1.0), Error);
    CHECK_THROWS_AS(ConvexBody::box({1.0, 0.0}), Error);
    CHECK_THROWS_AS(ConvexBody::polytope({{{1, 0}, 1}, {{0, 1}, 1}}), Error);
    CHECK_THROWS_AS(ConvexBody::polytope({{{1, 0}, 1}, {{-1, 0}, 1}}), Error);  // unbounded
    CHECK_THROWS_AS(ConvexBody::polytope({{{1, 0}, 1}, {{-1, 0}, 2}, {{0, 1}, 1}, {{0, -1}, 1}}), Error);
    CHECK_THROWS_AS(gauge_eval(ConvexBody::euclidean_ball(2, 1.0), Point{1.0}), Error);
}

TEST_CASE("polytope vertices of a box-shaped polytope") {
    const auto p = ConvexBody::polytope({{{2, 0}, 2}, {{-2, 0}, 2}, {{0, 1}, 0.5}, {{0, -1}, 0.5}});
    const auto& v = p.as<Polytope>().vertices;
    CHECK(v.size() == 4);
    for (const auto& x : v) CHECK(gauge_eval(p, x) == doctest::Approx(1.0));
    CHECK(gauge_eval(p, Point{0.5, 0.25}) == doctest::Approx(0.5));
}

TEST_CASE("sphere directions are unit and deterministic") {
    for (std::size_t dim : {1u, 2u, 3u, 5u}) {
        const auto a = sphere_directions(dim, 64), b = sphere_directions(dim, 64);
        CHECK(a == b);
        for (const auto& d : a) CHECK(std::sqrt(dotp(d, d)) == doctest::Approx(1.0).epsilon(1e-14));
    }
}
