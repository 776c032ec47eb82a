#include "gradvi/discretization.hpp"

#include "gradvi/error.hpp"
#include "gradvi/kernels.hpp"

#include <cmath>
#include <limits>

namespace gradvi {

Discretization::Discretization(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw Error("Discretization: null grid");
    const auto& g = *grid_;
    const std::size_t n = g.node_count();
    const std::size_t dim = g.dimension();
    const double h = g.h();
    const double hface = dim == 2 ? h : 1.0;  // h^(n-1)
    cell_weight_ = dim == 2 ? h * h : h;

    pos_.assign(n, npos);
    for (std::size_t k = 0; k < g.interior_nodes().size(); ++k) pos_[g.interior_nodes()[k]] = k;

    for (std::size_t axis = 0; axis < dim; ++axis) {
        inv_len_[axis].assign(n, 0.0);
        weight_[axis].assign(n, 0.0);
        const Arm plus = axis == 0 ? kPlusX : kPlusY;
        const Arm minus = axis == 0 ? kMinusX : kMinusY;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = g.neighbor(i, plus);
            if (j >= n) continue;
            double len = 0.0;
            if (g.interior(i)) {
                len = g.arm(i, plus) * h;
            } else if (g.interior(j)) {
                len = g.arm(j, minus) * h;
            } else {
                continue;
            }
            inv_len_[axis][i] = 1.0 / len;
            weight_[axis][i] = len * hface;
        }
    }

    mass_.assign(n, 0.0);
    rows_.resize(g.interior_nodes().size());
    for (std::size_t k = 0; k < g.interior_nodes().size(); ++k) {
        const std::size_t i = g.interior_nodes()[k];
        double m = cell_weight_;
        StencilRow row;
        for (std::size_t axis = 0; axis < dim; ++axis) {
            const Arm lo = axis == 0 ? kMinusX : kMinusY;
            const Arm hi = axis == 0 ? kPlusX : kPlusY;
            m *= 0.5 * (g.arm(i, lo) + g.arm(i, hi));
            for (Arm a : {lo, hi}) {
                row.diag += hface / (g.arm(i, a) * h);
                const std::size_t j = g.neighbor(i, a);
                if (j < n && g.interior(j)) {
                    row.nbr[row.count] = j;
                    row.coef[row.count] = -hface / h;
                    ++row.count;
                }
            }
        }
        mass_[i] = m;
        rows_[k] = row;
    }
}

void Discretization::gradient(std::span<const double> w, std::vector<std::vector<double>>& out) const {
    const std::size_t n = node_count();
    if (w.size() != n) throw Error("gradient: field size does not match grid");
    out.resize(dim());
    for (std::size_t axis = 0; axis < dim(); ++axis) {
        out[axis].resize(n);
        kernels::forward_difference(w.data(), inv_len_[axis].data(), grid_->stride(axis), out[axis].data(), n);
    }
}

void Discretization::gradient_transpose(const std::vector<std::vector<double>>& q, std::span<double> out) const {
    const std::size_t n = node_count();
    if (out.size() != n || q.size() != dim()) throw Error("gradient_transpose: size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t axis = 0; axis < dim(); ++axis) {
        if (q[axis].size() != n) throw Error("gradient_transpose: size mismatch");
        kernels::accumulate_transpose(q[axis].data(), inv_len_[axis].data(), grid_->stride(axis), out.data(), n);
    }
}

Eigen::SparseMatrix<double> Discretization::stiffness() const {
    const std::size_t m = unknowns();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m * 5);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& row = rows_[k];
        trips.emplace_back(static_cast<int>(k), static_cast<int>(k), row.diag);
        for (std::size_t t = 0; t < row.count; ++t) {
            trips.emplace_back(static_cast<int>(k), static_cast<int>(pos_[row.nbr[t]]), row.coef[t]);
        }
    }
    Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

void Discretization::apply_stiffness(std::span<const double> w, std::span<double> out) const {
    const std::size_t n = node_count();
    if (w.size() != n || out.size() != n) throw Error("apply_stiffness: size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    const auto& nodes = grid_->interior_nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& row = rows_[k];
        double s = row.diag * w[nodes[k]];
        for (std::size_t t = 0; t < row.count; ++t) s += row.coef[t] * w[row.nbr[t]];
        out[nodes[k]] = s;
    }
}

double Discretization::dirichlet_energy(std::span<const double> w) const {
    const std::size_t n = node_count();
    if (w.size() != n) throw Error("dirichlet_energy: size mismatch");
    double e = 0.0;
    for (std::size_t axis = 0; axis < dim(); ++axis) {
        const std::size_t s = grid_->stride(axis);
        for (std::size_t i = 0; i + s < n; ++i) {
            if (weight_[axis][i] == 0.0) continue;
            const double g = (w[i + s] - w[i]) * inv_len_[axis][i];
            e += weight_[axis][i] * g * g;
        }
    }
    return 0.5 * e;
}

std::vector<double> Discretization::shifted(std::span<const double> u, double c) const {
    const std::size_t n = node_count();
    if (u.size() != n) throw Error("shifted: size mismatch");
    std::vector<double> w(n, 0.0);
    for (std::size_t i : grid_->interior_nodes()) w[i] = u[i] - c;
    return w;
}

std::vector<double> Discretization::minus_laplacian(std::span<const double> u, double c) const {
    const auto w = shifted(u, c);
    std::vector<double> kw(node_count());
    apply_stiffness(w, kw);
    std::vector<double> out(node_count(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i : grid_->interior_nodes()) out[i] = kw[i] / mass_[i];
    return out;
}

}  // namespace gradvi
