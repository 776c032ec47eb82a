#pragma once

// Euclidean projection onto k K.

#include "gradvi/gauge.hpp"

#include <span>

namespace gradvi {

inline constexpr std::size_t kDykstraCycles = 500;
inline constexpr double kDykstraTol = 1e-11;

struct ProjectionResult {
    Point point;
    bool converged = true;
    std::size_t iterations = 0;  // Dykstra cycles; 0 for closed forms
};

/// Closed forms for balls, boxes and cross-polytopes; p-norm balls by the
/// one-multiplier KKT system; general polytopes by Dykstra's algorithm over the
/// slabs |n . x| <= k b (at most kDykstraCycles cycles, stop when a full cycle
/// moves the iterate by at most kDykstraTol).
ProjectionResult project_gradient(std::span<const double> p, const ConvexBody& body, double k);

/// Same, overwriting p. Returns false when Dykstra did not converge.
bool project_in_place(std::span<double> p, const ConvexBody& body, double k);

}  // namespace gradvi
