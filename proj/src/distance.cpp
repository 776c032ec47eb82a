#include "gradvi/distance.hpp"

#include "gradvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gradvi {

namespace {

constexpr double kInvPhi = 0.61803398874989484820;
constexpr int kGoldenCap = 200;

// Minimum of a unimodal f on [lo, hi], endpoints included.
template <class F>
double golden_min(F&& f, double lo, double hi, double tol) {
    double best = std::min(f(lo), f(hi));
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < kGoldenCap && b - a > tol; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    return std::min({best, f1, f2, f(0.5 * (a + b))});
}

double segment_distance(const ConvexBody& metric, std::span<const double> x, const std::array<double, 2>& p,
                        const std::array<double, 2>& q) {
    auto f = [&](double t) {
        const double v[2] = {x[0] - (p[0] + t * (q[0] - p[0])), x[1] - (p[1] + t * (q[1] - p[1]))};
        return gauge_eval(metric, v);
    };
    // parameter t is relative to the edge length
    return golden_min(f, 0.0, 1.0, 1e-12);
}

double disk_distance(const ConvexBody& metric, std::span<const double> x, const Disk& d) {
    constexpr int kStarts = 64;
    const double step = 2.0 * std::numbers::pi / kStarts;
    auto f = [&](double t) {
        const double v[2] = {x[0] - (d.cx + d.radius * std::cos(t)), x[1] - (d.cy + d.radius * std::sin(t))};
        return gauge_eval(metric, v);
    };
    double vals[kStarts];
    for (int k = 0; k < kStarts; ++k) vals[k] = f(step * k);
    double best = *std::min_element(vals, vals + kStarts);
    for (int k = 0; k < kStarts; ++k) {
        const double l = vals[(k + kStarts - 1) % kStarts], r = vals[(k + 1) % kStarts];
        if (vals[k] <= l && vals[k] <= r) {
            best = std::min(best, golden_min(f, step * (k - 1), step * (k + 1), 1e-12 * step));
        }
    }
    return best;
}

}  // namespace

double gauge_distance(const DomainShape& shape, const ConvexBody& metric, std::span<const double> x) {
    if (metric.dimension() != shape.dimension() || x.size() != shape.dimension()) {
        throw Error("gauge_distance: dimension mismatch");
    }
    if (const auto* iv = std::get_if<Interval>(&shape.kind())) {
        const double l = x[0] - iv->a, r = x[0] - iv->b;
        return std::min(gauge_eval(metric, std::span<const double>(&l, 1)),
                        gauge_eval(metric, std::span<const double>(&r, 1)));
    }
    if (const auto* dk = std::get_if<Disk>(&shape.kind())) return disk_distance(metric, x, *dk);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : shape.edges()) best = std::min(best, segment_distance(metric, x, e[0], e[1]));
    return best;
}

ScalarField gauge_distance_map(const GridDomain& grid, const ConvexBody& metric) {
    if (metric.dimension() != grid.dimension()) throw Error("gauge_distance_map: dimension mismatch");
    ScalarField out{nullptr, std::vector<double>(grid.node_count(), std::numeric_limits<double>::quiet_NaN())};
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (grid.kind(i) == NodeKind::Boundary) out.values[i] = 0.0;
    }
    for (std::size_t i : grid.interior_nodes()) {
        const auto c = grid.coord(i);
        out.values[i] = gauge_distance(grid.shape(), metric, std::span<const double>(c.data(), grid.dimension()));
    }
    return out;
}

ScalarField gauge_distance_map(const GridPtr& grid, const ConvexBody& metric) {
    auto f = gauge_distance_map(*grid, metric);
    f.grid = grid;
    return f;
}

double lipschitz_excess(const ScalarField& u, const ConvexBody& metric, double k) {
    if (!u.grid) throw Error("lipschitz_excess: field without grid");
    const auto& g = *u.grid;
    if (metric.dimension() != g.dimension()) throw Error("lipschitz_excess: dimension mismatch");
    const double h = g.h();
    double worst = -std::numeric_limits<double>::infinity();
    auto pair = [&](std::size_t i, std::size_t j, double dx, double dy) {
        const double v[2] = {dx, dy};
        const double bound = k * gauge_eval(metric, std::span<const double>(v, g.dimension()));
        worst = std::max(worst, std::abs(u.values[i] - u.values[j]) - bound);
    };
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (g.kind(i) == NodeKind::Exterior) continue;
        const std::size_t px = g.neighbor(i, kPlusX);
        if (px < g.node_count() && g.kind(px) != NodeKind::Exterior && (g.interior(i) || g.interior(px))) {
            pair(i, px, h, 0.0);
        }
        if (g.dimension() == 1) continue;
        const std::size_t py = g.neighbor(i, kPlusY);
        if (py < g.node_count() && g.kind(py) != NodeKind::Exterior && (g.interior(i) || g.interior(py))) {
            pair(i, py, 0.0, h);
        }
        if (px < g.node_count() && py < g.node_count()) {
            const std::size_t d = py + 1;
            if (g.interior(i) && g.interior(d)) pair(i, d, h, h);
            if (g.interior(px) && g.interior(py)) pair(px, py, -h, h);
        }
    }
    return worst;
}

std::pair<ScalarField, ScalarField> build_obstacles(const ScalarField& dist, double c, double k) {
    if (!std::isfinite(c) || !(k >= 0.0) || !std::isfinite(k)) throw Error("build_obstacles: need finite c and k >= 0");
    ScalarField lo = dist, hi = dist;
    for (std::size_t i = 0; i < dist.values.size(); ++i) {
        const double d = dist.values[i];
        if (std::isnan(d)) continue;
        if (d < 0.0) throw Error("build_obstacles: negative distance");
        lo.values[i] = c - k * d;
        hi.values[i] = c + k * d;
    }
    return {lo, hi};
}

}  // namespace gradvi
