#pragma once

// Anisotropic boundary distance d(x) = min_{y on the boundary} gauge(x - y).

#include "gradvi/gauge.hpp"
#include "gradvi/grid.hpp"

#include <utility>

namespace gradvi {

/// Distance in the gauge of `metric` at every non-Exterior node; 0 on Boundary
/// nodes, NaN on Exterior ones. Polygonal boundaries are handled edge by edge with
/// golden-section search, disks by a 64-angle multistart refined the same way.
ScalarField gauge_distance_map(const GridDomain& grid, const ConvexBody& metric);
ScalarField gauge_distance_map(const GridPtr& grid, const ConvexBody& metric);

/// Distance from a single point to the boundary of `shape`.
double gauge_distance(const DomainShape& shape, const ConvexBody& metric, std::span<const double> x);

/// max over neighbor pairs (axis pairs with an Interior end, diagonal pairs of
/// Interior nodes) of |u(x) - u(y)| - k gauge(x - y), using lattice positions.
double lipschitz_excess(const ScalarField& u, const ConvexBody& metric, double k);

/// (c - k d, c + k d).
std::pair<ScalarField, ScalarField> build_obstacles(const ScalarField& dist, double c, double k);

}  // namespace gradvi
