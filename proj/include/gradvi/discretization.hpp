#pragma once

// Symmetric cut-cell finite differences shared by both scalar solvers.
//
// Unknowns are w = u - c on Interior nodes (w = 0 elsewhere). Each lattice edge
// with at least one Interior endpoint carries a forward difference
// (w_j - w_i) / l with l = h, or l = theta h when it is cut by the boundary.
// The discrete Dirichlet energy is 1/2 sum_e l h^(n-1) g_e^2 and its Hessian K
// is the stiffness matrix; -Delta_h u := (K w)_a / m_a with the dual-cell mass
// m_a = h^n prod_d (theta_-d + theta_+d) / 2. In 1-D this is exactly the
// Shortley-Weller operator.

#include "gradvi/grid.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <span>
#include <vector>

namespace gradvi {

/// One row of K for an Interior node: diagonal plus Interior neighbors.
struct StencilRow {
    double diag = 0.0;
    std::array<std::size_t, 4> nbr{};
    std::array<double, 4> coef{};  // K_ij (negative)
    std::size_t count = 0;
};

class Discretization {
public:
    explicit Discretization(GridPtr grid);

    const GridDomain& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return grid_->dimension(); }
    std::size_t node_count() const noexcept { return grid_->node_count(); }
    std::size_t unknowns() const noexcept { return grid_->interior_nodes().size(); }

    /// 1/l for the edge leaving node i along +axis; 0 where there is no edge.
    const std::vector<double>& inv_length(std::size_t axis) const { return inv_len_[axis]; }
    /// l h^(n-1) for the same edge; 0 where there is no edge.
    const std::vector<double>& edge_weight(std::size_t axis) const { return weight_[axis]; }
    const std::vector<double>& mass() const noexcept { return mass_; }
    const std::vector<StencilRow>& rows() const noexcept { return rows_; }
    /// Position of node i among the Interior nodes, or npos.
    std::size_t position(std::size_t i) const noexcept { return pos_[i]; }
    /// h^n, the uniform per-cell weight used when gradients are compared in the Euclidean norm.
    double cell_weight() const noexcept { return cell_weight_; }

    /// out[axis][i] = forward difference leaving node i; w is a full lattice array.
    void gradient(std::span<const double> w, std::vector<std::vector<double>>& out) const;
    /// out = G^T q (full lattice array, overwritten).
    void gradient_transpose(const std::vector<std::vector<double>>& q, std::span<double> out) const;

    /// K restricted to Interior nodes, ordered as interior_nodes().
    Eigen::SparseMatrix<double> stiffness() const;
    /// out[i] = (K w)_i on Interior nodes, 0 elsewhere.
    void apply_stiffness(std::span<const double> w, std::span<double> out) const;
    /// 1/2 sum_e weight_e g_e^2.
    double dirichlet_energy(std::span<const double> w) const;

    /// (K w)_a / m_a with w = u - c; NaN off Interior.
    std::vector<double> minus_laplacian(std::span<const double> u, double c) const;

    /// Full lattice array of u - c on Interior nodes, 0 elsewhere.
    std::vector<double> shifted(std::span<const double> u, double c) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    GridPtr grid_;
    std::array<std::vector<double>, 2> inv_len_;
    std::array<std::vector<double>, 2> weight_;
    std::vector<double> mass_;
    std::vector<StencilRow> rows_;
    std::vector<std::size_t> pos_;
    double cell_weight_ = 0.0;
};

}  // namespace gradvi
