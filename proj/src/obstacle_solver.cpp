#include "gradvi/obstacle_solver.hpp"

#include "gradvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gradvi {

namespace {

constexpr int kNewtonCap = 30;

struct NodeSolver {
    const ZeroOrderTerm& term;
    double c;

    // Minimizer over [lo, hi] of 1/2 diag t^2 + off t + m G(c + t).
    double operator()(double diag, double off, double m, double lo, double hi, double start) const {
        if (!term.g) return std::clamp((m * term.eta - off) / diag, lo, hi);
        auto F = [&](double t) { return diag * t + off + m * term.derivative(c + t); };
        if (lo == hi) return lo;
        if (F(lo) >= 0.0) return lo;
        if (F(hi) <= 0.0) return hi;
        double a = lo, b = hi;
        double t = std::clamp(start, lo, hi);
        for (int it = 0; it < kNewtonCap; ++it) {
            const double f = F(t);
            if (f == 0.0) return t;
            if (f < 0.0) a = t; else b = t;
            const double slope = diag + m * term.curvature(c + t);
            double next = slope > 0.0 ? t - f / slope : 0.5 * (a + b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - t) <= 1e-15 * (1.0 + std::abs(t))) return next;
            t = next;
        }
        // Bisection on whatever bracket Newton left behind.
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            const double mid = 0.5 * (a + b);
            if (F(mid) < 0.0) a = mid; else b = mid;
        }
        return 0.5 * (a + b);
    }

    double local_energy(double diag, double off, double m, double t) const {
        return 0.5 * diag * t * t + off * t + m * term.value(c + t);
    }
};

}  // namespace

double ZeroOrderTerm::curvature(double v) const {
    if (!g) return 0.0;
    if (g->curvature) return g->curvature(v);
    const double step = 1e-6 * (1.0 + std::abs(v));
    return (g->derivative(v + step) - g->derivative(v - step)) / (2.0 * step);
}

void certify_convexity(const ZeroOrderTerm& term, double lo, double hi) {
    if (!term.g) return;
    if (!(hi > lo)) throw Error("certify_convexity: empty range");
    constexpr int kPoints = 1000;
    double prev = term.derivative(lo);
    for (int k = 1; k < kPoints; ++k) {
        const double v = lo + (hi - lo) * k / (kPoints - 1);
        const double d = term.derivative(v);
        if (!std::isfinite(d)) throw Error("certify_convexity: non-finite derivative");
        if (d < prev - 1e-12 * (1.0 + std::abs(prev))) {
            std::ostringstream os;
            os << "certify_convexity: derivative decreases near v = " << v;
            throw Error(os.str());
        }
        prev = d;
    }
}

void ObstacleProblem::validate() const {
    if (!grid) throw Error("obstacle problem: null grid");
    const std::size_t n = grid->node_count();
    if (lower.values.size() != n || upper.values.size() != n) throw Error("obstacle problem: obstacle size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const NodeKind k = grid->kind(i);
        if (k == NodeKind::Exterior) continue;
        const double lo = lower.values[i], hi = upper.values[i];
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw Error("obstacle problem: non-finite obstacle");
        if (lo > hi) {
            std::ostringstream os;
            os << "obstacle problem: lower obstacle above upper at node " << i;
            throw Error(os.str());
        }
        if (k == NodeKind::Boundary && (std::abs(lo - c) > 1e-12 * (1.0 + std::abs(c)) ||
                                        std::abs(hi - c) > 1e-12 * (1.0 + std::abs(c)))) {
            throw Error("obstacle problem: obstacles must equal c on boundary nodes");
        }
        if (k == NodeKind::Interior && (lo > c || hi < c)) {
            throw Error("obstacle problem: boundary value c outside the obstacle interval");
        }
    }
}

double discrete_energy(const Discretization& disc, const ScalarField& u, double c, const ZeroOrderTerm& term) {
    const auto w = disc.shifted(u.values, c);
    double e = disc.dirichlet_energy(w);
    for (std::size_t i : disc.grid().interior_nodes()) e += disc.mass()[i] * term.value(u.values[i]);
    return e;
}

PsorResult psor_solve(const ObstacleProblem& problem, const PsorOptions& options) {
    problem.validate();
    if (!(options.omega > 0.0 && options.omega < 2.0)) throw Error("psor_solve: omega must lie in (0, 2)");
    if (!(options.tol > 0.0)) throw Error("psor_solve: tol must be positive");
    const Discretization disc(problem.grid);
    const auto& g = *problem.grid;
    const auto& nodes = g.interior_nodes();
    const auto& rows = disc.rows();
    const auto& mass = disc.mass();
    const double c = problem.c;
    const NodeSolver solve{problem.term, c};

    std::vector<double> w(g.node_count(), 0.0);
    std::vector<double> lo(nodes.size()), hi(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        lo[k] = problem.lower.values[nodes[k]] - c;
        hi[k] = problem.upper.values[nodes[k]] - c;
    }

    auto to_field = [&] {
        ScalarField u = ScalarField::zeros(problem.grid);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            if (g.kind(i) != NodeKind::Exterior) u.values[i] = c + w[i];
        }
        return u;
    };

    PsorResult out;
    out.stats.method = "psor";
    if (options.record_energy) out.stats.energy_history.push_back(discrete_energy(disc, to_field(), c, problem.term));

    const std::size_t m = nodes.size();
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double change = 0.0;
        const bool forward = sweep % 2 == 0;
        for (std::size_t q = 0; q < m; ++q) {
            const std::size_t k = forward ? q : m - 1 - q;
            const std::size_t i = nodes[k];
            const auto& row = rows[k];
            double off = 0.0;
            for (std::size_t t = 0; t < row.count; ++t) off += row.coef[t] * w[row.nbr[t]];
            const double cur = w[i];
            const double gs = solve(row.diag, off, mass[i], lo[k], hi[k], cur);
            change = std::max(change, std::abs(gs - cur));
            double next = std::clamp(cur + options.omega * (gs - cur), lo[k], hi[k]);
            if (problem.term.g && solve.local_energy(row.diag, off, mass[i], next) >
                                      solve.local_energy(row.diag, off, mass[i], cur)) {
                next = gs;
            }
            w[i] = next;
        }
        out.stats.iterations = sweep + 1;
        out.stats.residual = change;
        if (options.record_energy) out.stats.energy_history.push_back(discrete_energy(disc, to_field(), c, problem.term));
        if (change <= options.tol) {
            out.stats.converged = true;
            break;
        }
    }
    out.u = to_field();
    return out;
}

double fixed_point_residual(const ObstacleProblem& problem, const ScalarField& u) {
    const Discretization disc(problem.grid);
    const auto& nodes = problem.grid->interior_nodes();
    const NodeSolver solve{problem.term, problem.c};
    const auto w = disc.shifted(u.values, problem.c);
    double r = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t i = nodes[k];
        const auto& row = disc.rows()[k];
        double off = 0.0;
        for (std::size_t t = 0; t < row.count; ++t) off += row.coef[t] * w[row.nbr[t]];
        const double gs = solve(row.diag, off, disc.mass()[i], problem.lower.values[i] - problem.c,
                                problem.upper.values[i] - problem.c, w[i]);
        r = std::max(r, std::abs(gs - w[i]));
    }
    return r;
}

ActiveSets active_sets(const ScalarField& u, const ObstacleProblem& problem, double tol_act) {
    const auto& g = *problem.grid;
    ActiveSets s;
    s.lower.assign(g.node_count(), false);
    s.upper.assign(g.node_count(), false);
    s.elastic.assign(g.node_count(), false);
    for (std::size_t i : g.interior_nodes()) {
        if (u.values[i] <= problem.lower.values[i] + tol_act) {
            s.lower[i] = true;
            ++s.lower_count;
        } else if (u.values[i] >= problem.upper.values[i] - tol_act) {
            s.upper[i] = true;
            ++s.upper_count;
        } else {
            s.elastic[i] = true;
            ++s.elastic_count;
        }
    }
    return s;
}

KktReport kkt_residuals(const ScalarField& u, const ObstacleProblem& problem, const ActiveSets& sets) {
    const Discretization disc(problem.grid);
    const auto lap = disc.minus_laplacian(u.values, problem.c);
    KktReport r;
    r.lower_sign = std::numeric_limits<double>::infinity();
    r.upper_sign = -std::numeric_limits<double>::infinity();
    for (std::size_t i : problem.grid->interior_nodes()) {
        const double s = lap[i] + problem.term.derivative(u.values[i]);
        if (sets.elastic[i]) r.elastic_residual = std::max(r.elastic_residual, std::abs(s));
        if (sets.lower[i]) r.lower_sign = std::min(r.lower_sign, s);
        if (sets.upper[i]) r.upper_sign = std::max(r.upper_sign, s);
    }
    if (sets.lower_count == 0) r.lower_sign = 0.0;
    if (sets.upper_count == 0) r.upper_sign = 0.0;
    return r;
}

}  // namespace gradvi
