#include "gradvi/projection.hpp"

#include "gradvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <vector>

namespace gradvi {

namespace {

void radial_clip(std::span<double> p, double radius) {
    double s = 0.0;
    for (double v : p) s += v * v;
    if (s <= radius * radius) return;
    const double f = radius / std::sqrt(s);
    for (double& v : p) v *= f;
}

// {x : |x|_1 <= radius} via the sorted-threshold rule.
void l1_project(std::span<double> p, double radius) {
    double s = 0.0;
    for (double v : p) s += std::abs(v);
    if (s <= radius) return;
    std::vector<double> a(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) a[i] = std::abs(p[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        cum += a[j];
        const double t = (cum - radius) / static_cast<double>(j + 1);
        if (j + 1 == a.size() || a[j + 1] <= t) {
            theta = t;
            break;
        }
    }
    for (double& v : p) v = std::copysign(std::max(std::abs(v) - theta, 0.0), v);
}

// Root t in [0, a] of t + mu p t^(p-1) = a.
double pball_coordinate(double a, double mu, double p) {
    if (a == 0.0) return 0.0;
    if (p == 3.0) return 2.0 * a / (1.0 + std::sqrt(1.0 + 12.0 * mu * a));
    double lo = 0.0, hi = a;
    double t = a;
    for (int it = 0; it < 100; ++it) {
        const double f = t + mu * p * std::pow(t, p - 1.0) - a;
        if (f > 0.0) hi = t; else lo = t;
        if (f == 0.0 || hi - lo <= 1e-16 * a) break;
        const double df = 1.0 + mu * p * (p - 1.0) * std::pow(t, p - 2.0);
        double next = t - f / df;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        t = next;
    }
    return t;
}

double power(double t, double p) { return p == 3.0 ? t * t * t : std::pow(t, p); }

double pball_slope(double t, double mu, double p) {
    if (t == 0.0) return 0.0;
    const double tp1 = p == 3.0 ? t * t : std::pow(t, p - 1.0);
    const double tp2 = p == 3.0 ? t : std::pow(t, p - 2.0);
    const double dt = -p * tp1 / (1.0 + mu * p * (p - 1.0) * tp2);
    return p * tp1 * dt;
}

void pball_project(std::span<double> x, double p, double radius) {
    if (p == 2.0) return radial_clip(x, radius);
    if (p == 1.0) return l1_project(x, radius);
    const std::size_t n = x.size();
    double amax = 0.0;
    for (double v : x) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return;
    // Work on the unit ball with a = |x| / radius.
    thread_local std::vector<double> a, t;
    a.resize(n);
    t.resize(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::abs(x[i]) / radius;
        norm += power(a[i] / (amax / radius), p);
    }
    if ((amax / radius) * std::pow(norm, 1.0 / p) <= 1.0) return;
    auto phi = [&](double mu, double* slope) {
        double s = 0.0, ds = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = pball_coordinate(a[i], mu, p);
            s += power(t[i], p);
            if (slope) ds += pball_slope(t[i], mu, p);
        }
        if (slope) *slope = ds;
        return s - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    while (phi(hi, nullptr) > 0.0) hi *= 2.0;
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        double slope = 0.0;
        const double f = phi(mu, &slope);
        if (f > 0.0) lo = mu; else hi = mu;
        if (std::abs(f) <= 1e-15 || hi - lo <= 1e-16 * hi) break;
        double next = slope < 0.0 ? mu - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const bool settled = std::abs(next - mu) <= 1e-15 * mu;
        mu = next;
        if (settled) break;
    }
    phi(mu, nullptr);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += power(t[i], p);
    // Land exactly on the sphere; the correction is at roundoff level.
    const double fix = s > 0.0 ? std::pow(s, -1.0 / p) : 1.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = std::copysign(t[i] * fix * radius, x[i]);
}

bool canonical_sign(const Point& n) {
    for (double v : n) {
        if (std::abs(v) > 1e-12) return v > 0.0;
    }
    return true;
}

bool dykstra(std::span<double> x, const Polytope& poly, double k, std::size_t* cycles) {
    thread_local std::vector<const Halfspace*> slabs;
    slabs.clear();
    for (const auto& h : poly.halfspaces) {
        if (canonical_sign(h.normal)) slabs.push_back(&h);
    }
    auto inside = [&] {
        for (const auto* s : slabs) {
            double t = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) t += s->normal[i] * x[i];
            if (std::abs(t) > k * s->offset) return false;
        }
        return true;
    };
    if (inside()) return true;
    const std::size_t n = x.size();
    thread_local std::vector<double> incr, start, y;
    incr.assign(slabs.size() * n, 0.0);
    start.resize(n);
    y.resize(n);
    for (std::size_t cyc = 1; cyc <= kDykstraCycles; ++cyc) {
        std::copy(x.begin(), x.end(), start.begin());
        double moved = 0.0;
        for (std::size_t j = 0; j < slabs.size(); ++j) {
            double* inc = incr.data() + j * n;
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + inc[i];
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) t += slabs[j]->normal[i] * y[i];
            const double b = k * slabs[j]->offset;
            const double excess = t > b ? t - b : (t < -b ? t + b : 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = y[i] - excess * slabs[j]->normal[i];
                const double next = y[i] - x[i];
                moved = std::max(moved, std::abs(next - inc[i]));
                inc[i] = next;
            }
        }
        // The iterate can repeat while the increments are still moving.
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(x[i] - start[i]));
        if (cycles) *cycles = cyc;
        if (moved <= kDykstraTol) {
            // Land inside so that a second projection is the identity.
            for (int pass = 0; pass < 8 && !inside(); ++pass) {
                for (const auto* sl : slabs) {
                    double t = 0.0;
                    for (std::size_t i = 0; i < n; ++i) t += sl->normal[i] * x[i];
                    const double b = k * sl->offset * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
                    const double excess = t > b ? t - b : (t < -b ? t + b : 0.0);
                    for (std::size_t i = 0; i < n; ++i) x[i] -= excess * sl->normal[i];
                }
            }
            return true;
        }
    }
    return false;
}

bool project_impl(std::span<double> p, const ConvexBody& body, double k, std::size_t* cycles) {
    if (p.size() != body.dimension()) throw Error("project_gradient: dimension mismatch");
    if (!(k >= 0.0) || !std::isfinite(k)) throw Error("project_gradient: k must be finite and nonnegative");
    return std::visit(
        [&](const auto& f) -> bool {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                radial_clip(p, k * f.radius);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                if (k == 0.0) std::fill(p.begin(), p.end(), 0.0);
                else pball_project(p, f.p, k * f.radius);
            } else if constexpr (std::is_same_v<T, Box>) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    p[i] = std::min(std::max(p[i], -k * f.half_widths[i]), k * f.half_widths[i]);
                }
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                l1_project(p, k * f.scale);
            } else {
                return dykstra(p, f, k, cycles);
            }
            return true;
        },
        body.family());
}

}  // namespace

ProjectionResult project_gradient(std::span<const double> p, const ConvexBody& body, double k) {
    ProjectionResult r;
    r.point.assign(p.begin(), p.end());
    r.converged = project_impl(r.point, body, k, &r.iterations);
    return r;
}

bool project_in_place(std::span<double> p, const ConvexBody& body, double k) {
    return project_impl(p, body, k, nullptr);
}

}  // namespace gradvi
