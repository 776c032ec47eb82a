#pragma once

// Pieces shared by the scalar and vector splitting solvers.

#include "gradvi/discretization.hpp"
#include "gradvi/gauge.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <deque>
#include <vector>

namespace gradvi::detail {

/// Penalty weight of each cell: the smallest edge weight l h^(n-1) among the
/// edges leaving the node (0 where none leaves). Cut cells then carry a penalty
/// on the scale of their stiffness entries, and a single scalar per cell keeps
/// the pointwise projection Euclidean.
std::vector<double> cell_weights(const Discretization& disc);

/// G^T S G restricted to Interior unknowns, S = diag(weights) per cell.
Eigen::SparseMatrix<double> gradient_gram(const Discretization& disc, const std::vector<double>& weights);

/// Gather Interior entries of a full lattice array.
Eigen::VectorXd gather(const Discretization& disc, const std::vector<double>& full);
void scatter(const Discretization& disc, const Eigen::VectorXd& v, std::vector<double>& full);

/// Pointwise projection of a cell field onto k K, using the SIMD kernels where
/// the family allows it.
class CellProjector {
public:
    CellProjector(const ConvexBody& body, double k);
    /// Returns false if some cell projection did not converge.
    bool apply(std::vector<std::vector<double>>& z) const;

private:
    const ConvexBody& body_;
    double k_;
};

/// Safeguarded type-II Anderson acceleration of a fixed-point map x -> T(x).
/// An extrapolated point is kept only if its residual |T(x) - x| does not
/// exceed that of the last accepted point; otherwise the plain image of that
/// point is used and the memory is cleared.
class Anderson {
public:
    explicit Anderson(std::size_t memory) : memory_(memory) {}
    /// x is the current point and gx = T(x); returns the next point.
    const Eigen::VectorXd& step(const Eigen::VectorXd& x, const Eigen::VectorXd& gx);
    void reset();
    std::size_t rejected() const noexcept { return rejected_; }

private:
    std::size_t memory_;
    std::vector<Eigen::VectorXd> df_, dg_;  // ring buffers of residual and image differences
    std::size_t count_ = 0, head_ = 0;
    Eigen::MatrixXd gram_;  // df_ Gram matrix, ring-indexed
    Eigen::VectorXd f_, f_prev_, g_prev_, next_;
    bool have_prev_ = false;
    double norm_prev_ = 0.0;
    bool extrapolated_ = false;
    std::size_t rejected_ = 0;
};

}  // namespace gradvi::detail
