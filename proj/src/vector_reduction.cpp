#include "gradvi/vector_reduction.hpp"

#include "admm_core.hpp"
#include "gradvi/distance.hpp"
#include "gradvi/error.hpp"
#include "gradvi/kernels.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace gradvi {

namespace {

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void require_eta(const std::vector<double>& eta) {
    if (eta.empty()) throw Error("vector problem: eta is empty");
    for (double e : eta) {
        if (!std::isfinite(e)) throw Error("vector problem: eta must be finite");
    }
    if (!(norm(eta) > 0.0)) throw Error("vector problem: eta must be nonzero");
}

double ball_radius(const ConvexBody& body) {
    if (const auto* b = std::get_if<EuclideanBall>(&body.family())) return b->radius;
    if (const auto* b = std::get_if<PNormBall>(&body.family()); b && b->p == 2.0) return b->radius;
    throw Error("direct_vector_solve: K must be a Euclidean ball");
}

}  // namespace

void VectorProblem::validate() const {
    if (!grid) throw Error("vector problem: null grid");
    if (body.dimension() != grid->dimension()) throw Error("vector problem: body dimension mismatch");
    require_eta(eta);
}

double VectorProblem::eta_norm() const { return norm(eta); }

ProblemSpec reduce_to_scalar(const ProblemSpec& vector_spec) {
    require_eta(vector_spec.eta);
    ProblemSpec s = vector_spec;
    s.body = polar(vector_spec.body);
    s.k = 1.0 / norm(vector_spec.eta);
    s.c = 0.0;
    s.eta = {0.5};
    s.zero_order = {};
    s.formulation = Formulation::Obstacle;
    return s;
}

ObstacleProblem reduced_obstacle_problem(const VectorProblem& vp) {
    vp.validate();
    const auto dist = gauge_distance_map(vp.grid, vp.body);
    auto [lo, hi] = build_obstacles(dist, 0.0, 1.0 / vp.eta_norm());
    return ObstacleProblem{vp.grid, std::move(lo), std::move(hi), 0.0, ZeroOrderTerm::linear(0.5)};
}

VectorField assemble_vector(const ScalarField& u, const std::vector<double>& eta) {
    if (!u.grid) throw Error("assemble_vector: field without grid");
    VectorField v = VectorField::zeros(u.grid, eta.size());
    for (std::size_t l = 0; l < eta.size(); ++l) {
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            if (u.grid->kind(i) != NodeKind::Exterior) v.components[l][i] = u.values[i] * eta[l];
        }
    }
    return v;
}

double vector_energy(const VectorField& v, const std::vector<double>& eta) {
    if (!v.grid) throw Error("vector_energy: field without grid");
    if (v.size() != eta.size()) throw Error("vector_energy: component count does not match eta");
    const Discretization disc(v.grid);
    double e = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) {
        const auto w = disc.shifted(v.components[l], 0.0);
        e += 2.0 * disc.dirichlet_energy(w);
        double src = 0.0;
        for (std::size_t i : v.grid->interior_nodes()) src += disc.mass()[i] * v.components[l][i];
        e -= eta[l] * src;
    }
    return e;
}

double j1_energy(const ScalarField& u) {
    if (!u.grid) throw Error("j1_energy: field without grid");
    const Discretization disc(u.grid);
    const auto w = disc.shifted(u.values, 0.0);
    double src = 0.0;
    for (std::size_t i : u.grid->interior_nodes()) src += disc.mass()[i] * u.values[i];
    return 2.0 * disc.dirichlet_energy(w) - src;
}

K1Report k1_feasibility(const VectorField& v, const ConvexBody& body) {
    if (!v.grid) throw Error("k1_feasibility: field without grid");
    const std::size_t dim = v.grid->dimension();
    if (body.dimension() != dim) throw Error("k1_feasibility: body dimension mismatch");
    std::vector<GradientField> grads;
    for (const auto& comp : v.components) grads.push_back(discrete_gradient(ScalarField{v.grid, comp}));
    K1Report r;
    const std::size_t n = v.grid->node_count();
    const std::size_t N = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (N == 0 || !grads.front().cell[i]) continue;
        MatrixNn jac(N, dim);
        bool zero = true;
        for (std::size_t l = 0; l < N; ++l) {
            for (std::size_t d = 0; d < dim; ++d) {
                jac(l, d) = grads[l].components[d][i];
                zero = zero && jac(l, d) == 0.0;
            }
        }
        ++r.cells;
        if (!zero) r.max_norm = std::max(r.max_norm, operator_norm_2k(jac, body));
    }
    return r;
}

double invariance_check(const VectorField& v, const std::vector<double>& eta, const MatrixNn& t) {
    const std::size_t N = eta.size();
    if (t.rows() != N || t.cols() != N || v.size() != N) throw Error("invariance_check: dimension mismatch");
    for (std::size_t a = 0; a < N; ++a) {
        double te = 0.0;
        for (std::size_t b = 0; b < N; ++b) {
            te += t(a, b) * eta[b];
            double ttb = 0.0;
            for (std::size_t r = 0; r < N; ++r) ttb += t(r, a) * t(r, b);
            if (std::abs(ttb - (a == b ? 1.0 : 0.0)) > 1e-12) throw Error("invariance_check: T is not orthogonal");
        }
        if (std::abs(te - eta[a]) > 1e-12 * (1.0 + norm(eta))) throw Error("invariance_check: T does not fix eta");
    }
    VectorField tv = v;
    for (std::size_t i = 0; i < v.grid->node_count(); ++i) {
        if (v.grid->kind(i) == NodeKind::Exterior) continue;
        for (std::size_t a = 0; a < N; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < N; ++b) s += t(a, b) * v.components[b][i];
            tv.components[a][i] = s;
        }
    }
    return std::abs(vector_energy(tv, eta) - vector_energy(v, eta));
}

MatrixNn random_orthogonal_fixing(const std::vector<double>& eta, std::uint64_t seed) {
    require_eta(eta);
    const auto N = static_cast<Eigen::Index>(eta.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    // Orthonormal basis whose first column is eta / |eta|.
    Eigen::MatrixXd a(N, N);
    for (Eigen::Index r = 0; r < N; ++r) {
        a(r, 0) = eta[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 1; c < N; ++c) a(r, c) = normal(rng);
    }
    Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    if (u.col(0).dot(a.col(0)) < 0.0) u.col(0) *= -1.0;
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(N, N);
    if (N > 1) {
        Eigen::MatrixXd g(N - 1, N - 1);
        for (Eigen::Index r = 0; r < N - 1; ++r) {
            for (Eigen::Index c = 0; c < N - 1; ++c) g(r, c) = normal(rng);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd qq = qr.householderQ();
        // Sign fix so the distribution is uniform (Haar).
        const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index c = 0; c < N - 1; ++c) {
            if (rr(c, c) < 0.0) qq.col(c) *= -1.0;
        }
        q.bottomRightCorner(N - 1, N - 1) = qq;
    }
    const Eigen::MatrixXd t = u * q * u.transpose();
    MatrixNn out(eta.size(), eta.size());
    for (Eigen::Index r = 0; r < N; ++r) {
        for (Eigen::Index c = 0; c < N; ++c) out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = t(r, c);
    }
    return out;
}

double collinearity_angle(const VectorField& v, const std::vector<double>& eta, double threshold) {
    if (v.size() != eta.size()) throw Error("collinearity_angle: component count does not match eta");
    const double en = norm(eta);
    double vmax = 0.0;
    const std::size_t n = v.grid->node_count();
    std::vector<double> mag(n, 0.0);
    for (std::size_t i : v.grid->interior_nodes()) {
        double s = 0.0;
        for (const auto& comp : v.components) s += comp[i] * comp[i];
        mag[i] = std::sqrt(s);
        vmax = std::max(vmax, mag[i]);
    }
    double worst = 0.0;
    if (vmax == 0.0) return 0.0;
    for (std::size_t i : v.grid->interior_nodes()) {
        if (mag[i] < threshold * vmax) continue;
        double d = 0.0;
        for (std::size_t l = 0; l < eta.size(); ++l) d += v.components[l][i] * eta[l];
        // Angle to the line spanned by eta.
        const double cosine = std::min(1.0, std::abs(d) / (mag[i] * en));
        worst = std::max(worst, std::acos(cosine));
    }
    return worst;
}

VectorSolveResult direct_vector_solve(const VectorProblem& vp, const AdmmOptions& options) {
    vp.validate();
    const double radius = ball_radius(vp.body);
    const double cap = 1.0 / radius;  // largest admissible singular value
    const Discretization disc(vp.grid);
    const auto& g = *vp.grid;
    const std::size_t n = g.node_count();
    const std::size_t dim = disc.dim();
    const std::size_t N = vp.eta.size();
    const double rs = options.rho;
    const std::vector<double> weight = detail::cell_weights(disc);

    Eigen::SparseMatrix<double> M = disc.stiffness() + rs * detail::gradient_gram(disc, weight);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(M);
    if (chol.info() != Eigen::Success) throw Error("direct_vector_solve: factorization failed");

    const auto& nodes = g.interior_nodes();
    const auto m = static_cast<Eigen::Index>(nodes.size());
    Eigen::VectorXd mass(m);
    for (Eigen::Index k = 0; k < m; ++k) mass[k] = disc.mass()[nodes[static_cast<std::size_t>(k)]];

    using Cells = std::vector<std::vector<double>>;
    std::vector<std::vector<double>> w(N, std::vector<double>(n, 0.0));
    std::vector<Cells> gw(N, Cells(dim, std::vector<double>(n, 0.0)));
    auto z = gw, lambda = gw, zold = gw;
    Cells diff(dim, std::vector<double>(n, 0.0));
    std::vector<double> gt(n);

    VectorSolveResult out;
    out.stats.method = "admm-vector";
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(dim));

    for (std::size_t it = 1; it <= options.max_iters; ++it) {
        for (std::size_t l = 0; l < N; ++l) {
            for (std::size_t d = 0; d < dim; ++d) {
                for (std::size_t i = 0; i < n; ++i) diff[d][i] = weight[i] * (z[l][d][i] - lambda[l][d][i]);
            }
            disc.gradient_transpose(diff, gt);
            // Source eta_l / 2: the energy without the factor 1/2, halved.
            const Eigen::VectorXd rhs = rs * detail::gather(disc, gt) + 0.5 * vp.eta[l] * mass;
            detail::scatter(disc, chol.solve(rhs), w[l]);
            disc.gradient(w[l], gw[l]);
            for (std::size_t d = 0; d < dim; ++d) {
                zold[l][d].swap(z[l][d]);
                for (std::size_t i = 0; i < n; ++i) z[l][d][i] = gw[l][d][i] + lambda[l][d][i];
            }
        }
        if (dim == 1) {
            // N x 1 Jacobian: the singular value is the column length.
            std::vector<double*> comps(N);
            for (std::size_t l = 0; l < N; ++l) comps[l] = z[l][0].data();
            kernels::clip_ball(comps.data(), N, n, cap);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double fro = 0.0;
                for (std::size_t l = 0; l < N; ++l) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        jac(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d)) = z[l][d][i];
                        fro += z[l][d][i] * z[l][d][i];
                    }
                }
                if (fro <= cap * cap) continue;
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
                Eigen::VectorXd s = svd.singularValues();
                if (s[0] <= cap) continue;
                for (Eigen::Index q = 0; q < s.size(); ++q) s[q] = std::min(s[q], cap);
                const Eigen::MatrixXd clipped = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
                for (std::size_t l = 0; l < N; ++l) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        z[l][d][i] = clipped(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d));
                    }
                }
            }
        }
        double primal = 0.0, dual = 0.0;
        for (std::size_t l = 0; l < N; ++l) {
            for (std::size_t d = 0; d < dim; ++d) {
                kernels::multiplier_update(lambda[l][d].data(), gw[l][d].data(), z[l][d].data(), n);
                primal = std::max(primal, kernels::max_abs_diff(gw[l][d].data(), z[l][d].data(), n));
                dual = std::max(dual, options.rho * kernels::max_abs_diff(z[l][d].data(), zold[l][d].data(), n));
            }
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
    }
    out.v = VectorField::zeros(vp.grid, N);
    for (std::size_t l = 0; l < N; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            if (g.kind(i) != NodeKind::Exterior) out.v.components[l][i] = w[l][i];
        }
    }
    return out;
}

}  // namespace gradvi
