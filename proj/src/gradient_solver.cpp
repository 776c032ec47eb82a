#include "gradvi/gradient_solver.hpp"

#include "admm_core.hpp"
#include "gradvi/error.hpp"
#include "gradvi/kernels.hpp"
#include "gradvi/projection.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace gradvi {

namespace detail {

std::vector<double> cell_weights(const Discretization& disc) {
    std::vector<double> s(disc.node_count(), 0.0);
    for (std::size_t axis = 0; axis < disc.dim(); ++axis) {
        const auto& w = disc.edge_weight(axis);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (w[i] > 0.0) s[i] = s[i] > 0.0 ? std::min(s[i], w[i]) : w[i];
        }
    }
    return s;
}

void Anderson::reset() {
    count_ = 0;
    head_ = 0;
    have_prev_ = false;
    extrapolated_ = false;
}

const Eigen::VectorXd& Anderson::step(const Eigen::VectorXd& x, const Eigen::VectorXd& gx) {
    f_ = gx - x;
    const double norm = f_.norm();
    if (extrapolated_ && norm > norm_prev_) {
        ++rejected_;
        next_ = g_prev_;
        reset();
        return next_;
    }
    const auto m = static_cast<Eigen::Index>(memory_);
    if (df_.size() != memory_) {
        df_.assign(memory_, Eigen::VectorXd());
        dg_.assign(memory_, Eigen::VectorXd());
        gram_.setZero(m, m);
    }
    if (have_prev_) {
        const std::size_t slot = (head_ + count_) % memory_;
        df_[slot] = f_ - f_prev_;
        dg_[slot] = gx - g_prev_;
        if (count_ < memory_) ++count_;
        else head_ = (head_ + 1) % memory_;
        for (std::size_t j = 0; j < count_; ++j) {
            const std::size_t r = (head_ + j) % memory_;
            const double v = df_[slot].dot(df_[r]);
            gram_(static_cast<Eigen::Index>(slot), static_cast<Eigen::Index>(r)) = v;
            gram_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(slot)) = v;
        }
    }
    f_prev_ = f_;
    g_prev_ = gx;
    have_prev_ = true;
    norm_prev_ = norm;
    extrapolated_ = false;
    next_ = gx;
    if (count_ == 0) return next_;

    const auto k = static_cast<Eigen::Index>(count_);
    Eigen::MatrixXd a(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto ri = static_cast<Eigen::Index>((head_ + static_cast<std::size_t>(i)) % memory_);
        b[i] = df_[static_cast<std::size_t>(ri)].dot(f_);
        for (Eigen::Index j = 0; j < k; ++j) {
            a(i, j) = gram_(ri, static_cast<Eigen::Index>((head_ + static_cast<std::size_t>(j)) % memory_));
        }
    }
    a.diagonal().array() += 1e-10 * a.diagonal().maxCoeff() + std::numeric_limits<double>::min();
    const Eigen::VectorXd gamma = a.ldlt().solve(b);
    if (!gamma.allFinite()) {
        reset();
        return next_;
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        next_ -= gamma[i] * dg_[(head_ + static_cast<std::size_t>(i)) % memory_];
    }
    extrapolated_ = true;
    return next_;
}

Eigen::SparseMatrix<double> gradient_gram(const Discretization& disc, const std::vector<double>& weights) {
    const auto& g = disc.grid();
    const std::size_t n = g.node_count();
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t axis = 0; axis < disc.dim(); ++axis) {
        const std::size_t s = g.stride(axis);
        const auto& inv = disc.inv_length(axis);
        for (std::size_t i = 0; i + s < n; ++i) {
            if (inv[i] == 0.0) continue;
            const std::size_t ends[2] = {disc.position(i), disc.position(i + s)};
            const double coef[2] = {-inv[i], inv[i]};
            for (int a = 0; a < 2; ++a) {
                if (ends[a] == Discretization::npos) continue;
                for (int b = 0; b < 2; ++b) {
                    if (ends[b] == Discretization::npos) continue;
                    trips.emplace_back(static_cast<int>(ends[a]), static_cast<int>(ends[b]),
                                       weights[i] * coef[a] * coef[b]);
                }
            }
        }
    }
    const auto m = static_cast<Eigen::Index>(disc.unknowns());
    Eigen::SparseMatrix<double> out(m, m);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Eigen::VectorXd gather(const Discretization& disc, const std::vector<double>& full) {
    const auto& nodes = disc.grid().interior_nodes();
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) v[static_cast<Eigen::Index>(k)] = full[nodes[k]];
    return v;
}

void scatter(const Discretization& disc, const Eigen::VectorXd& v, std::vector<double>& full) {
    const auto& nodes = disc.grid().interior_nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) full[nodes[k]] = v[static_cast<Eigen::Index>(k)];
}

CellProjector::CellProjector(const ConvexBody& body, double k) : body_(body), k_(k) {}

bool CellProjector::apply(std::vector<std::vector<double>>& z) const {
    const std::size_t dim = z.size();
    const std::size_t n = z.front().size();
    if (const auto* b = std::get_if<EuclideanBall>(&body_.family())) {
        std::vector<double*> comps(dim);
        for (std::size_t d = 0; d < dim; ++d) comps[d] = z[d].data();
        kernels::clip_ball(comps.data(), dim, n, k_ * b->radius);
        return true;
    }
    if (const auto* b = std::get_if<PNormBall>(&body_.family()); b && b->p == 2.0) {
        std::vector<double*> comps(dim);
        for (std::size_t d = 0; d < dim; ++d) comps[d] = z[d].data();
        kernels::clip_ball(comps.data(), dim, n, k_ * b->radius);
        return true;
    }
    if (const auto* b = std::get_if<Box>(&body_.family())) {
        for (std::size_t d = 0; d < dim; ++d) kernels::clip_box(z[d].data(), n, k_ * b->half_widths[d]);
        return true;
    }
    bool ok = true;
    std::vector<double> cell(dim);
    for (std::size_t i = 0; i < n; ++i) {
        bool nonzero = false;
        for (std::size_t d = 0; d < dim; ++d) {
            cell[d] = z[d][i];
            nonzero = nonzero || cell[d] != 0.0;
        }
        if (!nonzero) continue;
        ok = project_in_place(cell, body_, k_) && ok;
        for (std::size_t d = 0; d < dim; ++d) z[d][i] = cell[d];
    }
    return ok;
}

}  // namespace detail

namespace {

// Smooth description of k K for the ball and p-balls with p >= 2:
// psi(g) = sum_d |g_d|^p / R^p - 1 <= 0.
struct SmoothBall {
    double p = 0.0;
    double R = 0.0;

    bool valid() const { return p >= 2.0 && R > 0.0; }
    double value(const double* g, std::size_t dim) const {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += std::pow(std::abs(g[d]) / R, p);
        return s - 1.0;
    }
    double slope(double t) const {
        const double a = std::abs(t) / R;
        return std::copysign(p * std::pow(a, p - 1.0) / R, t);
    }
    double curvature(double t) const {
        return p == 2.0 ? 2.0 / (R * R) : p * (p - 1.0) * std::pow(std::abs(t) / R, p - 2.0) / (R * R);
    }
};

SmoothBall smooth_ball(const ConvexBody& body, double k) {
    if (const auto* b = std::get_if<EuclideanBall>(&body.family())) return {2.0, k * b->radius};
    if (const auto* b = std::get_if<PNormBall>(&body.family()); b && b->p >= 2.0) return {b->p, k * b->radius};
    return {};
}

// Gradient rows of one cell: component d is inv * (x[b] - x[a]), with -1 for an
// end held at the boundary value.
struct CellRows {
    std::size_t node;
    std::array<std::array<int, 2>, 3> ends;
    std::array<double, 3> inv;
};

std::vector<CellRows> cell_rows(const Discretization& disc, const std::vector<double>& weight) {
    const auto& g = disc.grid();
    const std::size_t n = g.node_count();
    std::vector<CellRows> rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] <= 0.0) continue;
        CellRows r{i, {}, {}};
        for (std::size_t d = 0; d < disc.dim(); ++d) {
            const std::size_t s = g.stride(d);
            r.inv[d] = i + s < n ? disc.inv_length(d)[i] : 0.0;
            const std::size_t ends[2] = {disc.position(i), i + s < n ? disc.position(i + s) : Discretization::npos};
            for (int e = 0; e < 2; ++e) r.ends[d][e] = ends[e] == Discretization::npos ? -1 : static_cast<int>(ends[e]);
        }
        rows.push_back(r);
    }
    return rows;
}

double component(const CellRows& r, std::size_t d, const Eigen::VectorXd& x) {
    const double a = r.ends[d][0] < 0 ? 0.0 : x[r.ends[d][0]];
    const double b = r.ends[d][1] < 0 ? 0.0 : x[r.ends[d][1]];
    return r.inv[d] * (b - a);
}

// Primal-dual interior-point solve (Mehrotra predictor-corrector) of the
// discrete problem with the constraints psi(G_c x) <= 0, started from x = 0,
// which is strictly feasible. Degenerate constraints, where the multiplier and
// the slack vanish together, slow the tail of the splitting iteration but not
// this one. On success x is the minimizer to roundoff and (z, lambda) are set
// to the matching splitting fixed point; returns the iteration count, 0 on
// failure.
std::size_t interior_point(const Discretization& disc, const Eigen::SparseMatrix<double>& K,
                           const Eigen::VectorXd& mass, const ZeroOrderTerm& term, double c, const SmoothBall& ball,
                           double rho, const std::vector<double>& weight, Eigen::VectorXd& x,
                           std::vector<std::vector<double>>& z, std::vector<std::vector<double>>& lambda) {
    const std::size_t dim = disc.dim();
    std::vector<CellRows> rows;
    for (const auto& r : cell_rows(disc, weight)) {
        bool coupled = false;
        for (std::size_t d = 0; d < dim; ++d) coupled = coupled || r.ends[d][0] >= 0 || r.ends[d][1] >= 0;
        if (coupled) rows.push_back(r);
    }
    const auto m = x.size();
    const std::size_t nc = rows.size();
    double scale = (mass.array() * std::abs(term.eta)).maxCoeff();
    if (!(scale > 0.0)) scale = 1.0;
    double invmax = 0.0;
    for (const auto& r : rows) {
        for (std::size_t d = 0; d < dim; ++d) invmax = std::max(invmax, r.inv[d]);
    }

    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    std::vector<double> mu(nc, scale * ball.R / (2.0 * invmax)), s(nc), ds(nc), dmu(nc), rc(nc);
    std::vector<std::array<double, 3>> g(nc), slope(nc), curv(nc);
    auto evaluate = [&](const Eigen::VectorXd& v) {
        bool inside = true;
        for (std::size_t r = 0; r < nc; ++r) {
            for (std::size_t d = 0; d < dim; ++d) g[r][d] = component(rows[r], d, v);
            s[r] = -ball.value(g[r].data(), dim);
            inside = inside && s[r] > 0.0;
        }
        return inside;
    };
    // b_c . v for the constraint gradient b_c = G_c^T grad psi.
    auto bdot = [&](std::size_t r, const Eigen::VectorXd& v) {
        double t = 0.0;
        for (std::size_t d = 0; d < dim; ++d) t += slope[r][d] * component(rows[r], d, v);
        return t;
    };
    // out += sum_c coef_c b_c
    auto bsum = [&](const std::vector<double>& coef, Eigen::VectorXd& out) {
        for (std::size_t r = 0; r < nc; ++r) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double t = coef[r] * slope[r][d] * rows[r].inv[d];
                if (rows[r].ends[d][0] >= 0) out[rows[r].ends[d][0]] -= t;
                if (rows[r].ends[d][1] >= 0) out[rows[r].ends[d][1]] += t;
            }
        }
    };

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::SparseMatrix<double> M(m, m);
    std::vector<double> coef(nc);
    Eigen::VectorXd rd(m), rhs(m), dx(m), ytry(m);
    evaluate(y);
    int stalled = 0;
    double last_alpha = 1.0;
    for (std::size_t it = 1; it <= 200; ++it) {
        for (std::size_t r = 0; r < nc; ++r) {
            for (std::size_t d = 0; d < dim; ++d) {
                slope[r][d] = ball.slope(g[r][d]);
                curv[r][d] = ball.curvature(g[r][d]);
            }
        }
        rd = K * y;
        for (Eigen::Index k = 0; k < m; ++k) rd[k] += mass[k] * term.derivative(c + y[k]);
        bsum(mu, rd);
        double gap = 0.0, worst = 0.0, mumax = 0.0;
        for (std::size_t r = 0; r < nc; ++r) {
            gap += mu[r] * s[r];
            worst = std::max(worst, mu[r] * s[r]);
            mumax = std::max(mumax, mu[r]);
        }
        gap /= static_cast<double>(nc);
        if (!std::isfinite(gap) || !rd.allFinite()) return 0;
        // Past the roundoff floor the steps shorten; a looser target applies then.
        const double rn = rd.lpNorm<Eigen::Infinity>() / scale, cn = worst / mumax;
        if ((rn <= 1e-10 && cn <= 1e-13) || (last_alpha < 0.1 && rn <= 1e-9 && cn <= 1e-11)) {
            x = y;
            for (std::size_t r = 0; r < nc; ++r) {
                const std::size_t i = rows[r].node;
                for (std::size_t d = 0; d < dim; ++d) {
                    z[d][i] = g[r][d];
                    lambda[d][i] = mu[r] * slope[r][d] / (rho * weight[i]);
                }
            }
            return it;
        }

        // Condensed Newton matrix H + sum mu/s b b^T; the pattern never changes.
        trips.clear();
        for (int col = 0; col < K.outerSize(); ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator e(K, col); e; ++e) trips.emplace_back(e.row(), e.col(), e.value());
        }
        for (Eigen::Index k = 0; k < m; ++k) trips.emplace_back(k, k, mass[k] * std::max(term.curvature(c + y[k]), 0.0));
        for (std::size_t r = 0; r < nc; ++r) {
            const auto& row = rows[r];
            int idx[6];
            double bv[6];
            int cnt = 0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double cf[2] = {-row.inv[d], row.inv[d]};
                for (int e = 0; e < 2; ++e) {
                    if (row.ends[d][e] < 0) continue;
                    idx[cnt] = row.ends[d][e];
                    bv[cnt] = slope[r][d] * cf[e];
                    ++cnt;
                    for (int o = 0; o < 2; ++o) {
                        if (row.ends[d][o] >= 0) trips.emplace_back(row.ends[d][e], row.ends[d][o], mu[r] * curv[r][d] * cf[e] * cf[o]);
                    }
                }
            }
            const double w = mu[r] / s[r];
            for (int a = 0; a < cnt; ++a) {
                for (int b = 0; b < cnt; ++b) trips.emplace_back(idx[a], idx[b], w * bv[a] * bv[b]);
            }
        }
        M.setFromTriplets(trips.begin(), trips.end());
        if (it == 1) ldlt.analyzePattern(M);
        ldlt.factorize(M);
        if (ldlt.info() != Eigen::Success) return 0;

        // Direction for complementarity targets rc = mu s - tau (+ corrector).
        auto direction = [&]() {
            for (std::size_t r = 0; r < nc; ++r) coef[r] = rc[r] / s[r];
            rhs = -rd;
            bsum(coef, rhs);
            dx = ldlt.solve(rhs);
            for (std::size_t r = 0; r < nc; ++r) {
                ds[r] = -bdot(r, dx);
                dmu[r] = (-rc[r] - mu[r] * ds[r]) / s[r];
            }
        };
        auto max_step = [&](double frac) {
            double a = 1.0;
            for (std::size_t r = 0; r < nc; ++r) {
                if (ds[r] < 0.0) a = std::min(a, -frac * s[r] / ds[r]);
                if (dmu[r] < 0.0) a = std::min(a, -frac * mu[r] / dmu[r]);
            }
            return a;
        };
        for (std::size_t r = 0; r < nc; ++r) rc[r] = mu[r] * s[r];
        direction();
        const double aff = max_step(1.0);
        double gap_aff = 0.0;
        for (std::size_t r = 0; r < nc; ++r) gap_aff += (mu[r] + aff * dmu[r]) * (s[r] + aff * ds[r]);
        gap_aff /= static_cast<double>(nc);
        const double sigma = std::pow(gap_aff / gap, 3.0);
        for (std::size_t r = 0; r < nc; ++r) rc[r] = mu[r] * s[r] - sigma * gap + ds[r] * dmu[r];
        direction();
        double alpha = max_step(0.995);
        // The constraints are curved: keep the true slacks positive.
        for (int back = 0; back < 40; ++back, alpha *= 0.5) {
            ytry = y + alpha * dx;
            if (evaluate(ytry)) break;
        }
        if (!evaluate(ytry)) return 0;
        last_alpha = alpha;
        if (alpha < 1e-3) ++stalled;
        if (stalled > 5) return 0;
        y.swap(ytry);
        for (std::size_t r = 0; r < nc; ++r) mu[r] = std::max(mu[r] + alpha * dmu[r], 1e-300);
    }
    return 0;
}

}  // namespace

GradientField discrete_gradient(const ScalarField& v) {
    if (!v.grid) throw Error("discrete_gradient: field without grid");
    const Discretization disc(v.grid);
    std::vector<double> w(v.values.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (v.grid->kind(i) != NodeKind::Exterior) w[i] = v.values[i];
    }
    GradientField out{v.grid, {}, std::vector<bool>(w.size(), false)};
    disc.gradient(w, out.components);
    for (std::size_t axis = 0; axis < disc.dim(); ++axis) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (disc.inv_length(axis)[i] != 0.0) out.cell[i] = true;
        }
    }
    return out;
}

ScalarField discrete_divergence(const GradientField& q) {
    if (!q.grid) throw Error("discrete_divergence: field without grid");
    const Discretization disc(q.grid);
    std::vector<double> gt(q.grid->node_count());
    disc.gradient_transpose(q.components, gt);
    ScalarField out = ScalarField::zeros(q.grid);
    for (std::size_t i : q.grid->interior_nodes()) out.values[i] = -gt[i];
    return out;
}

AdmmResult admm_solve(const GradientProblem& problem, const AdmmOptions& options) {
    if (!problem.grid) throw Error("admm_solve: null grid");
    if (problem.body.dimension() != problem.grid->dimension()) throw Error("admm_solve: body dimension mismatch");
    if (!(problem.k > 0.0)) throw Error("admm_solve: k must be positive");
    if (!(options.rho > 0.0) || !(options.tol > 0.0)) throw Error("admm_solve: rho and tol must be positive");
    const Discretization disc(problem.grid);
    const auto& g = *problem.grid;
    const std::size_t n = g.node_count();
    const std::size_t dim = disc.dim();
    const double c = problem.c;
    double rho = options.rho;
    const ZeroOrderTerm& term = problem.term;

    const Eigen::SparseMatrix<double> K = disc.stiffness();
    std::vector<double> weight = detail::cell_weights(disc);
    const Eigen::SparseMatrix<double> gram = detail::gradient_gram(disc, weight);
    Eigen::SparseMatrix<double> M;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol;
    auto assemble = [&] {
        M = K + rho * gram;
        chol.analyzePattern(M);
        chol.factorize(M);
        if (chol.info() != Eigen::Success) throw Error("admm_solve: factorization failed");
    };
    assemble();

    const auto& nodes = g.interior_nodes();
    const auto m = static_cast<Eigen::Index>(nodes.size());
    Eigen::VectorXd mass(m);
    for (Eigen::Index k = 0; k < m; ++k) mass[k] = disc.mass()[nodes[static_cast<std::size_t>(k)]];

    std::vector<double> w(n, 0.0), gt(n, 0.0);
    std::vector<std::vector<double>> gw(dim, std::vector<double>(n, 0.0));
    auto z = gw, lambda = gw, zold = gw, diff = gw;
    const detail::CellProjector project(problem.body, problem.k);

    AdmmResult out;
    out.stats.method = "admm";
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    Eigen::SparseMatrix<double> H;
    Eigen::VectorXd last_rhs, factored_curv;

    // The accelerated state is (sqrt(s) z, sqrt(s) lambda), in which the plain
    // iteration is nonexpansive.
    std::vector<double> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(weight[i]);
    detail::Anderson anderson(options.anderson);
    const SmoothBall ball = smooth_ball(problem.body, problem.k);
    Eigen::VectorXd state(static_cast<Eigen::Index>(2 * dim * n)), image(state.size());
    auto pack = [&](Eigen::VectorXd& v) {
        Eigen::Index k = 0;
        for (const auto* f : {&z, &lambda}) {
            for (std::size_t d = 0; d < dim; ++d) {
                for (std::size_t i = 0; i < n; ++i) v[k++] = root[i] * (*f)[d][i];
            }
        }
    };
    auto unpack = [&](const Eigen::VectorXd& v) {
        Eigen::Index k = 0;
        for (auto* f : {&z, &lambda}) {
            for (std::size_t d = 0; d < dim; ++d) {
                for (std::size_t i = 0; i < n; ++i, ++k) (*f)[d][i] = root[i] > 0.0 ? v[k] / root[i] : 0.0;
            }
        }
    };

    if (options.interior_start && ball.valid()) {
        out.interior_iterations = interior_point(disc, K, mass, term, c, ball, rho, weight, x, z, lambda);
    }
    for (std::size_t it = 1; it <= options.max_iters; ++it) {
        if (options.anderson > 0) pack(state);
        for (std::size_t d = 0; d < dim; ++d) {
            for (std::size_t i = 0; i < n; ++i) diff[d][i] = weight[i] * (z[d][i] - lambda[d][i]);
        }
        disc.gradient_transpose(diff, gt);
        Eigen::VectorXd rhs = rho * detail::gather(disc, gt);
        if (!term.g) {
            rhs += term.eta * mass;
            x = chol.solve(rhs);
            last_rhs = rhs;
        } else {
            // Newton on M x - rhs + m G'(c + x) = 0; the factorization is reused
            // while the curvature does not change.
            for (int newton = 0; newton < 30; ++newton) {
                Eigen::VectorXd grad = M * x - rhs;
                Eigen::VectorXd curv(m);
                for (Eigen::Index k = 0; k < m; ++k) {
                    grad[k] += mass[k] * term.derivative(c + x[k]);
                    curv[k] = mass[k] * std::max(term.curvature(c + x[k]), 0.0);
                }
                if (factored_curv.size() != m || curv != factored_curv) {
                    H = M;
                    for (Eigen::Index k = 0; k < m; ++k) H.coeffRef(k, k) += curv[k];
                    chol.factorize(H);
                    if (chol.info() != Eigen::Success) throw Error("admm_solve: Newton factorization failed");
                    factored_curv = curv;
                }
                const Eigen::VectorXd step = chol.solve(grad);
                x -= step;
                if (step.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
            }
        }
        detail::scatter(disc, x, w);
        disc.gradient(w, gw);
        for (std::size_t d = 0; d < dim; ++d) {
            zold[d].swap(z[d]);
            for (std::size_t i = 0; i < n; ++i) z[d][i] = gw[d][i] + lambda[d][i];
        }
        out.projection_ok = project.apply(z) && out.projection_ok;
        double primal = 0.0, dual = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            kernels::multiplier_update(lambda[d].data(), gw[d].data(), z[d].data(), n);
            primal = std::max(primal, kernels::max_abs_diff(gw[d].data(), z[d].data(), n));
            dual = std::max(dual, rho * kernels::max_abs_diff(z[d].data(), zold[d].data(), n));
        }
        out.primal = primal;
        out.dual = dual;
        out.stats.iterations = it;
        out.stats.residual = std::max(primal, dual);
        if (options.log_residuals) out.log.push_back({it, primal, dual});
        if (!std::isfinite(out.stats.residual)) break;
        if (primal <= options.tol && dual <= options.tol) {
            out.stats.converged = true;
            break;
        }
        if (options.adapt_rho && it % 25 == 0 && it <= options.adapt_until) {
            double scale = 1.0;
            if (primal > 10.0 * dual) scale = 2.0;
            else if (dual > 10.0 * primal) scale = 0.5;
            if (scale != 1.0) {
                rho *= scale;
                for (auto& l : lambda) {
                    for (double& v : l) v /= scale;
                }
                assemble();
                factored_curv.resize(0);
                anderson.reset();
                continue;
            }
        }
        if (options.anderson > 0) {
            pack(image);
            unpack(anderson.step(state, image));
        }
    }
    if (!term.g && last_rhs.size() > 0) {
        const double scale = std::max(last_rhs.lpNorm<Eigen::Infinity>(), std::numeric_limits<double>::min());
        out.linear_residual = (M * x - last_rhs).lpNorm<Eigen::Infinity>() / scale;
    }
    out.u = ScalarField::zeros(problem.grid);
    for (std::size_t i = 0; i < n; ++i) {
        if (g.kind(i) != NodeKind::Exterior) out.u.values[i] = c + w[i];
    }
    return out;
}

FeasibilityProfile feasibility_profile(const ScalarField& v, const ConvexBody& body, double k) {
    if (!(k > 0.0)) throw Error("feasibility_profile: k must be positive");
    const auto grad = discrete_gradient(v);
    FeasibilityProfile p;
    const std::size_t dim = grad.components.size();
    std::vector<double> cell(dim);
    for (std::size_t i = 0; i < grad.cell.size(); ++i) {
        if (!grad.cell[i]) continue;
        for (std::size_t d = 0; d < dim; ++d) cell[d] = grad.components[d][i];
        const double r = gauge_eval(body, cell) / k;
        p.max_ratio = std::max(p.max_ratio, r);
        const auto bin = static_cast<std::size_t>(std::min(r / 0.1, 11.0));
        ++p.histogram[bin];
        ++p.cells;
    }
    return p;
}

}  // namespace gradvi
