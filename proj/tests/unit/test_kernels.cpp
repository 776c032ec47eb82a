#include "gradvi/kernels.hpp"

#include "doctest.h"

#include <cstring>
#include <random>
#include <vector>

namespace k = gradvi::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Odd sizes exercise the tail loops.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 17, 64, 129, 1000, 4099};

}  // namespace

TEST_CASE("scalar forward difference against a direct loop") {
    const auto w = random_vec(37, 1), inv = random_vec(37, 2);
    std::vector<double> out(37, 99.0);
    k::scalar::forward_difference(w.data(), inv.data(), 5, out.data(), 37);
    for (std::size_t i = 0; i < 37; ++i) {
        const double want = i + 5 < 37 ? (w[i + 5] - w[i]) * inv[i] : 0.0;
        CHECK(out[i] == want);
    }
}

TEST_CASE("accumulate_transpose is the adjoint of forward_difference") {
    const std::size_t n = 200, stride = 13;
    const auto w = random_vec(n, 3), q = random_vec(n, 4);
    auto inv = random_vec(n, 5);
    // No edge leaves the last `stride` nodes.
    for (std::size_t i = n - stride; i < n; ++i) inv[i] = 0.0;
    std::vector<double> gw(n), gtq(n, 0.0);
    k::scalar::forward_difference(w.data(), inv.data(), stride, gw.data(), n);
    k::scalar::accumulate_transpose(q.data(), inv.data(), stride, gtq.data(), n);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lhs += gw[i] * q[i];
        rhs += w[i] * gtq[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("scalar clip kernels") {
    std::vector<double> a{3.0, 0.1, -2.0}, b{4.0, 0.1, 0.0};
    double* comps[] = {a.data(), b.data()};
    k::scalar::clip_ball(comps, 2, 3, 1.0);
    CHECK(a[0] == doctest::Approx(0.6));
    CHECK(b[0] == doctest::Approx(0.8));
    CHECK(a[1] == 0.1);
    CHECK(a[2] == doctest::Approx(-1.0));
    std::vector<double> x{-3.0, 0.5, 2.0};
    k::scalar::clip_box(x.data(), 3, 1.5);
    CHECK(x == std::vector<double>{-1.5, 0.5, 1.5});
}

TEST_CASE("dispatch honours availability") {
    CHECK(k::isa_available(k::Isa::Scalar));
    CHECK(k::isa_available(k::active_isa()));
    CHECK(std::string(k::isa_name(k::Isa::Scalar)) == "scalar");
}

#if defined(GRADVI_HAVE_AVX2)
TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
    if (!k::isa_available(k::Isa::Avx2)) {
        MESSAGE("AVX2 not available; skipped");
        return;
    }
    for (std::size_t n : kSizes) {
        CAPTURE(n);
        const auto w = random_vec(n, 10 + n), inv = random_vec(n, 20 + n, 64.0);
        for (std::size_t stride : {std::size_t{1}, std::size_t{3}, std::size_t{65}}) {
            std::vector<double> s(n, 7.0), v(n, 7.0);
            k::scalar::forward_difference(w.data(), inv.data(), stride, s.data(), n);
            k::avx2::forward_difference(w.data(), inv.data(), stride, v.data(), n);
            CHECK(same_bits(s, v));
            std::vector<double> ts = random_vec(n, 30 + n), tv = ts;
            k::scalar::accumulate_transpose(w.data(), inv.data(), stride, ts.data(), n);
            k::avx2::accumulate_transpose(w.data(), inv.data(), stride, tv.data(), n);
            CHECK(same_bits(ts, tv));
        }
        for (std::size_t ncomp : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
            std::vector<std::vector<double>> cs, cv;
            for (std::size_t c = 0; c < ncomp; ++c) cs.push_back(random_vec(n, 40 + 7 * c + n, 2.0));
            cv = cs;
            std::vector<double*> ps, pv;
            for (std::size_t c = 0; c < ncomp; ++c) {
                ps.push_back(cs[c].data());
                pv.push_back(cv[c].data());
            }
            k::scalar::clip_ball(ps.data(), ncomp, n, 1.25);
            k::avx2::clip_ball(pv.data(), ncomp, n, 1.25);
            for (std::size_t c = 0; c < ncomp; ++c) CHECK(same_bits(cs[c], cv[c]));
        }
        std::vector<double> xs = random_vec(n, 50 + n, 3.0), xv = xs;
        k::scalar::clip_box(xs.data(), n, 1.1);
        k::avx2::clip_box(xv.data(), n, 1.1);
        CHECK(same_bits(xs, xv));

        const auto g = random_vec(n, 60 + n), z = random_vec(n, 70 + n);
        std::vector<double> ls = random_vec(n, 80 + n), lv = ls;
        k::scalar::multiplier_update(ls.data(), g.data(), z.data(), n);
        k::avx2::multiplier_update(lv.data(), g.data(), z.data(), n);
        CHECK(same_bits(ls, lv));

        CHECK(same_bits(k::scalar::max_abs_diff(g.data(), z.data(), n), k::avx2::max_abs_diff(g.data(), z.data(), n)));
        CHECK(same_bits(k::scalar::dot(g.data(), z.data(), n), k::avx2::dot(g.data(), z.data(), n)));
    }
}
#endif

TEST_CASE("max_abs_diff and dot reference values") {
    const std::vector<double> a{1.0, -2.0, 3.0, 4.0, 5.0}, b{1.5, 2.0, 3.0, 4.0, -5.0};
    CHECK(k::scalar::max_abs_diff(a.data(), b.data(), 5) == 10.0);
    CHECK(k::dot(a.data(), b.data(), 5) == doctest::Approx(1.5 - 4.0 + 9.0 + 16.0 - 25.0));
    CHECK(k::max_abs_diff(a.data(), b.data(), 0) == 0.0);
}
