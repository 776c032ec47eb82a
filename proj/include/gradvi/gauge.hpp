#pragma once

// Balanced convex bodies with closed-form gauges and polars.
//
// A ConvexBody K is compact, convex, symmetric through the origin and has the
// origin in its interior. Its gauge gamma_K(x) = inf{t > 0 : x in tK} is a norm,
// and the gauge of the polar body is the support function of K.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gradvi {

using Point = std::vector<double>;

struct EuclideanBall {
    double radius;
};

/// {x : |x|_p <= radius}, 1 <= p < inf.
struct PNormBall {
    double p;
    double radius;
};

struct Box {
    std::vector<double> half_widths;
};

/// {x : |x|_1 <= scale}
struct CrossPolytope {
    double scale;
};

/// {x : normal . x <= offset}; normals are stored with unit length.
struct Halfspace {
    Point normal;
    double offset;
};

struct Polytope {
    std::vector<Halfspace> halfspaces;
    std::vector<Point> vertices;  // filled by ConvexBody::polytope
};

class ConvexBody {
public:
    using Family = std::variant<EuclideanBall, PNormBall, Box, CrossPolytope, Polytope>;

    static ConvexBody euclidean_ball(std::size_t dim, double radius);
    static ConvexBody pnorm_ball(std::size_t dim, double p, double radius);
    static ConvexBody box(std::vector<double> half_widths);
    static ConvexBody cross_polytope(std::size_t dim, double scale);
    /// Halfspaces must come in (n, b), (-n, b) pairs and bound a compact set.
    static ConvexBody polytope(std::vector<Halfspace> halfspaces);

    std::size_t dimension() const noexcept { return dim_; }
    const Family& family() const noexcept { return family_; }
    std::string family_name() const;

    template <class T>
    bool is() const noexcept {
        return std::holds_alternative<T>(family_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(family_);
    }

private:
    ConvexBody(Family family, std::size_t dim) : family_(std::move(family)), dim_(dim) {}

    Family family_;
    std::size_t dim_;
};

double gauge_eval(const ConvexBody& body, std::span<const double> x);

/// Gauge of the polar body, i.e. the support function of `body`. Same value as
/// gauge_eval(polar(body), y) without building the polar.
double polar_gauge(const ConvexBody& body, std::span<const double> y);

ConvexBody polar(const ConvexBody& body);

/// gamma_K(x) * gamma_{K polar}(y) - x . y, nonnegative up to roundoff.
double duality_gap(const ConvexBody& body, std::span<const double> x, std::span<const double> y);

/// Dense row-major N x n matrix.
class MatrixNn {
public:
    MatrixNn(std::size_t rows, std::size_t cols);
    MatrixNn(std::size_t rows, std::size_t cols, std::vector<double> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> entries() const noexcept { return data_; }

    static MatrixNn identity(std::size_t n);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Number of directions used by the sampled operator norm for p-norm balls.
inline constexpr std::size_t kOperatorNormSamples = 4096;

/// sup_{z != 0} |Az| / gamma_K(z).
///
/// Exact for EuclideanBall (largest singular value scaled by the radius) and for
/// the polyhedral families (maximum of |Az| over the vertices of K). For PNormBall
/// with p != 1, 2 the supremum is taken over a fixed set of kOperatorNormSamples
/// quasi-uniform directions, so the returned value never exceeds the true norm.
double operator_norm_2k(const MatrixNn& a, const ConvexBody& body);

/// [g(x + hz) + g(x - hz) - 2 g(x)] / h^2 for the gauge g of `body`.
/// Requires g(z) = 1 within 1e-10 and 0 < h < g(x).
double second_difference_gauge(const ConvexBody& body, std::span<const double> x, std::span<const double> z,
                               double h);

/// 2(p - 1): second-difference constant of the p-norm gauge, p >= 2.
double pnorm_b_constant(double p);

/// Deterministic quasi-uniform unit vectors in R^dim. In 2-D these are equally
/// spaced angles; in higher dimensions a spherical Fibonacci-style lattice.
std::vector<Point> sphere_directions(std::size_t dim, std::size_t count);

}  // namespace gradvi
