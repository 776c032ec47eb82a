#pragma once

// Interior second-derivative diagnostics against
// C(n) [ |eta| + k A^2 B / d + A^2 |c| / d^2 ].

#include "gradvi/gauge.hpp"
#include "gradvi/grid.hpp"

#include <cstdint>
#include <vector>

namespace gradvi {

/// Smallest A with gauge(x) <= A |x|, in closed form for every family.
/// `metric` is the body whose gauge is bounded (the polar of the constraint body).
double estimate_A(const ConvexBody& metric);

struct BEstimate {
    double value = 1.0;    // reported constant
    double sampled = 1.0;  // max(1, sup over samples of D2 (gauge(x) - h))
    bool consistent = true;  // p-norm balls: sampled <= 2(p-1) + 1e-6
    std::size_t samples = 0;
};

/// Samples x, z on the unit gauge sphere and h in (0, 1). For p-norm balls with
/// p >= 2 the reported value is min(sampled, 2(p-1)).
BEstimate estimate_B(const ConvexBody& metric, std::size_t samples, std::uint64_t seed = 0);

/// Max over axis and diagonal directions of |u(x+hz) + u(x-hz) - 2u(x)| / (|z| h)^2,
/// on nodes whose stencil is all Interior; NaN elsewhere. `directions` is 4 or 8
/// in 2-D (8 adds the (2,1)-type knight steps) and ignored in 1-D.
ScalarField second_difference_field(const ScalarField& u, std::size_t directions = 4);

struct BoundParams {
    double A = 1.0;
    double B = 1.0;
    double k = 1.0;
    double c = 0.0;
    double eta = 0.0;
};

struct RegularityReport {
    ScalarField ratio;              // NaN where undefined
    double max_ratio = 0.0;         // over nodes with d > 2 A h
    double region_threshold = 0.0;  // d threshold of the refinement region
    double region_max_ratio = 0.0;
    double region_max_second_difference = 0.0;
    std::size_t region_nodes = 0;
};

/// r(x) = D2u(x) / [|eta| + k A^2 B / d + A^2 |c| / d^2] where d > 2 A h.
/// Region statistics are taken over d > region_threshold.
RegularityReport bound_profile(const ScalarField& u, const ScalarField& dist, const BoundParams& params,
                               double region_threshold);

struct RefinementRow {
    double h = 0.0;
    double max_second_difference = 0.0;
    double max_ratio = 0.0;
    std::size_t nodes = 0;
};

}  // namespace gradvi
