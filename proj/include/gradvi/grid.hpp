#pragma once

// Lattices over bounded convex domains in 1-D and 2-D, with cut-cell arms.

#include "gradvi/gauge.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gradvi {

struct Interval {
    double a;
    double b;
};

struct Rectangle {
    double x0, y0;
    double width, height;
};

struct Disk {
    double cx, cy;
    double radius;
};

/// Counterclockwise vertex list of a convex polygon.
struct ConvexPolygon {
    std::vector<std::array<double, 2>> vertices;
};

class DomainShape {
public:
    using Kind = std::variant<Interval, Rectangle, Disk, ConvexPolygon>;

    static DomainShape interval(double a, double b);
    static DomainShape rectangle(double x0, double y0, double width, double height);
    static DomainShape disk(double cx, double cy, double radius);
    /// Drops repeated and collinear vertices; rejects clockwise or non-convex input.
    static DomainShape polygon(std::vector<std::array<double, 2>> vertices);

    /// Inverse of descriptor().
    static DomainShape from_descriptor(const std::string& text);

    const Kind& kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return std::holds_alternative<Interval>(kind_) ? 1 : 2; }

    /// Compact text form, e.g. "disk(0,0,1)", with round-trip precision.
    std::string descriptor() const;

    /// Signed distance to the boundary, positive inside (Euclidean).
    double inside_margin(std::span<const double> x) const;

    /// Distance from an inside point to the boundary along +e_axis (sign > 0) or -e_axis.
    double exit_distance(std::span<const double> x, std::size_t axis, int sign) const;

    /// Lower corner and extent of the bounding box (second entries unused in 1-D).
    std::array<double, 2> lower() const;
    std::array<double, 2> extent() const;

    /// max_{x,y in closure} gauge(x - y).
    double gauge_diameter(const ConvexBody& body) const;

    /// Boundary segments (2-D polygonal shapes) as pairs of endpoints.
    std::vector<std::array<std::array<double, 2>, 2>> edges() const;

private:
    explicit DomainShape(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

enum class NodeKind : std::uint8_t { Interior, Boundary, Exterior };

/// Arm directions at a node: -x, +x, -y, +y.
enum Arm : std::size_t { kMinusX = 0, kPlusX = 1, kMinusY = 2, kPlusY = 3 };

class GridDomain {
public:
    const DomainShape& shape() const noexcept { return shape_; }
    double h() const noexcept { return h_; }
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t node_count() const noexcept { return nx_ * ny_; }
    std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return ix + nx_ * iy; }
    std::size_t ix(std::size_t i) const noexcept { return i % nx_; }
    std::size_t iy(std::size_t i) const noexcept { return i / nx_; }
    /// Lattice offset of the neighbor along `axis`.
    std::size_t stride(std::size_t axis) const noexcept { return axis == 0 ? 1 : nx_; }

    std::array<double, 2> coord(std::size_t i) const noexcept;
    NodeKind kind(std::size_t i) const noexcept { return kinds_[i]; }
    bool interior(std::size_t i) const noexcept { return kinds_[i] == NodeKind::Interior; }

    /// Fraction of h from an interior node to the boundary along an arm, in (0, 1].
    double arm(std::size_t i, Arm a) const noexcept { return arms_[i][a]; }

    const std::vector<std::size_t>& interior_nodes() const noexcept { return interior_; }
    std::size_t count(NodeKind k) const noexcept;

    /// Neighbor index along an arm, or node_count() if it falls off the lattice.
    std::size_t neighbor(std::size_t i, Arm a) const noexcept;

private:
    friend std::shared_ptr<const GridDomain> build_grid(const DomainShape& shape, double h);
    GridDomain(DomainShape shape) : shape_(std::move(shape)) {}

    DomainShape shape_;
    double h_ = 0.0;
    std::size_t dim_ = 1;
    std::size_t nx_ = 0, ny_ = 1;
    std::array<double, 2> origin_{};
    std::vector<NodeKind> kinds_;
    std::vector<std::array<double, 4>> arms_;
    std::vector<std::size_t> interior_;
};

using GridPtr = std::shared_ptr<const GridDomain>;

/// Lattice anchored at the lower corner of the bounding box. A node is Interior
/// when it lies inside the shape by more than 1e-9 h, Boundary when it is not
/// Interior but has an Interior axis neighbor, and Exterior otherwise.
GridPtr build_grid(const DomainShape& shape, double h);

/// Node values; NaN on Exterior nodes.
struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    static ScalarField zeros(GridPtr grid);
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// N components per node, stored as N separate node arrays.
struct VectorField {
    GridPtr grid;
    std::vector<std::vector<double>> components;

    static VectorField zeros(GridPtr grid, std::size_t n);
    std::size_t size() const noexcept { return components.size(); }
};

}  // namespace gradvi
