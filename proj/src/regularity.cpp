#include "gradvi/regularity.hpp"

#include "gradvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gradvi {

double estimate_A(const ConvexBody& metric) {
    const auto n = static_cast<double>(metric.dimension());
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return 1.0 / f.radius;
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                // |x|_p <= n^(1/p - 1/2) |x| for p < 2, <= |x| for p >= 2
                return (f.p < 2.0 ? std::pow(n, 1.0 / f.p - 0.5) : 1.0) / f.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                return 1.0 / *std::min_element(f.half_widths.begin(), f.half_widths.end());
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                return std::sqrt(n) / f.scale;
            } else {
                double b = std::numeric_limits<double>::infinity();
                for (const auto& h : f.halfspaces) b = std::min(b, h.offset);
                return 1.0 / b;
            }
        },
        metric.family());
}

BEstimate estimate_B(const ConvexBody& metric, std::size_t samples, std::uint64_t seed) {
    if (samples < 1000) throw Error("estimate_B: need at least 1000 samples");
    const std::size_t dim = metric.dimension();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto on_sphere = [&] {
        Point v(dim);
        double g = 0.0;
        while (!(g > 0.0)) {
            for (double& c : v) c = normal(rng);
            g = gauge_eval(metric, v);
        }
        for (double& c : v) c /= g;
        return v;
    };
    BEstimate b;
    b.samples = samples;
    double worst = 1.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Point x = on_sphere();
        const Point z = on_sphere();
        double h = unit(rng);
        if (!(h > 0.0) || !(h < 1.0)) h = 0.5;
        worst = std::max(worst, second_difference_gauge(metric, x, z, h) * (1.0 - h));
    }
    b.sampled = worst;
    b.value = worst;
    if (const auto* p = std::get_if<PNormBall>(&metric.family()); p && p->p >= 2.0) {
        const double lemma = pnorm_b_constant(p->p);
        b.consistent = worst <= lemma + 1e-6;
        b.value = std::min(worst, lemma);
    }
    return b;
}

ScalarField second_difference_field(const ScalarField& u, std::size_t directions) {
    if (!u.grid) throw Error("second_difference_field: field without grid");
    const auto& g = *u.grid;
    if (g.dimension() == 2 && directions != 4 && directions != 8) {
        throw Error("second_difference_field: directions must be 4 or 8");
    }
    std::vector<std::array<long, 2>> steps;
    if (g.dimension() == 1) {
        steps = {{1, 0}};
    } else {
        steps = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
        if (directions == 8) steps.insert(steps.end(), {{2, 1}, {1, 2}, {2, -1}, {1, -2}});
    }
    const double h = g.h();
    ScalarField out{u.grid, std::vector<double>(g.node_count(), std::numeric_limits<double>::quiet_NaN())};
    const long nx = static_cast<long>(g.nx()), ny = static_cast<long>(g.ny());
    for (std::size_t i : g.interior_nodes()) {
        const long x = static_cast<long>(g.ix(i)), y = static_cast<long>(g.iy(i));
        double best = 0.0;
        bool ok = true;
        for (const auto& s : steps) {
            const long xp = x + s[0], yp = y + s[1], xm = x - s[0], ym = y - s[1];
            if (xp < 0 || xp >= nx || xm < 0 || xm >= nx || yp < 0 || yp >= ny || ym < 0 || ym >= ny) {
                ok = false;
                break;
            }
            const std::size_t ip = g.index(static_cast<std::size_t>(xp), static_cast<std::size_t>(yp));
            const std::size_t im = g.index(static_cast<std::size_t>(xm), static_cast<std::size_t>(ym));
            if (!g.interior(ip) || !g.interior(im)) {
                ok = false;
                break;
            }
            const double len2 = static_cast<double>(s[0] * s[0] + s[1] * s[1]) * h * h;
            best = std::max(best, std::abs(u.values[ip] + u.values[im] - 2.0 * u.values[i]) / len2);
        }
        if (ok) out.values[i] = best;
    }
    return out;
}

RegularityReport bound_profile(const ScalarField& u, const ScalarField& dist, const BoundParams& p,
                               double region_threshold) {
    if (!u.grid || dist.values.size() != u.values.size()) throw Error("bound_profile: field size mismatch");
    if (!(p.A > 0.0) || !(p.B >= 1.0)) throw Error("bound_profile: need A > 0 and B >= 1");
    const auto d2 = second_difference_field(u);
    const auto& g = *u.grid;
    RegularityReport r;
    r.ratio = ScalarField{u.grid, std::vector<double>(g.node_count(), std::numeric_limits<double>::quiet_NaN())};
    r.region_threshold = region_threshold;
    const double band = 2.0 * p.A * g.h();
    for (std::size_t i : g.interior_nodes()) {
        const double d = dist.values[i];
        if (std::isnan(d2.values[i]) || !(d > band)) continue;
        const double rhs = std::abs(p.eta) + p.k * p.A * p.A * p.B / d + p.A * p.A * std::abs(p.c) / (d * d);
        const double ratio = d2.values[i] / rhs;
        r.ratio.values[i] = ratio;
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (d > region_threshold) {
            r.region_max_ratio = std::max(r.region_max_ratio, ratio);
            r.region_max_second_difference = std::max(r.region_max_second_difference, d2.values[i]);
            ++r.region_nodes;
        }
    }
    return r;
}

}  // namespace gradvi
