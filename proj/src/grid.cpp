#include "gradvi/grid.hpp"

#include "gradvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace gradvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<double> parse_numbers(const std::string& body, const std::string& text) {
    std::vector<double> out;
    std::string token;
    auto flush = [&] {
        if (token.empty()) throw Error("shape descriptor '" + text + "': empty number");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            throw Error("shape descriptor '" + text + "': bad number '" + token + "'");
        }
        if (used != token.size()) throw Error("shape descriptor '" + text + "': bad number '" + token + "'");
        out.push_back(v);
        token.clear();
    };
    for (char ch : body) {
        if (ch == ',' || ch == ';') {
            flush();
        } else {
            token += ch;
        }
    }
    flush();
    return out;
}

}  // namespace

DomainShape DomainShape::interval(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) throw Error("interval: need finite a < b");
    return DomainShape(Interval{a, b});
}

DomainShape DomainShape::rectangle(double x0, double y0, double width, double height) {
    if (!std::isfinite(x0) || !std::isfinite(y0)) throw Error("rectangle: corner must be finite");
    if (!positive_finite(width) || !positive_finite(height)) throw Error("rectangle: widths must be positive");
    return DomainShape(Rectangle{x0, y0, width, height});
}

DomainShape DomainShape::disk(double cx, double cy, double radius) {
    if (!std::isfinite(cx) || !std::isfinite(cy)) throw Error("disk: center must be finite");
    if (!positive_finite(radius)) throw Error("disk: radius must be positive");
    return DomainShape(Disk{cx, cy, radius});
}

DomainShape DomainShape::polygon(std::vector<std::array<double, 2>> vertices) {
    for (const auto& v : vertices) {
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw Error("polygon: vertices must be finite");
    }
    double scale = 0.0;
    for (const auto& v : vertices) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
    const double eps = 1e-12 * std::max(scale, 1.0);
    // Drop repeated then collinear vertices until nothing changes.
    bool changed = true;
    while (changed && vertices.size() >= 3) {
        changed = false;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& prev = vertices[(i + n - 1) % n];
            const auto& cur = vertices[i];
            const auto& next = vertices[(i + 1) % n];
            const bool repeated = std::abs(cur[0] - prev[0]) <= eps && std::abs(cur[1] - prev[1]) <= eps;
            const double la = std::hypot(cur[0] - prev[0], cur[1] - prev[1]);
            const double lb = std::hypot(next[0] - cur[0], next[1] - cur[1]);
            if (repeated || std::abs(cross(prev, cur, next)) <= 1e-12 * la * lb) {
                vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    if (vertices.size() < 3) throw Error("polygon: fewer than 3 distinct non-collinear vertices");
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) > 0.0)) {
            throw Error("polygon: vertices must be counterclockwise and convex");
        }
    }
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % n];
        const auto& c = vertices[(i + 2) % n];
        const double t1 = std::atan2(b[1] - a[1], b[0] - a[0]);
        const double t2 = std::atan2(c[1] - b[1], c[0] - b[0]);
        double d = t2 - t1;
        while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
        while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
        turning += d;
    }
    if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) throw Error("polygon: vertex list winds more than once");
    return DomainShape(ConvexPolygon{std::move(vertices)});
}

DomainShape DomainShape::from_descriptor(const std::string& text) {
    const auto open = text.find('(');
    if (open == std::string::npos || text.empty() || text.back() != ')') {
        throw Error("shape descriptor '" + text + "': expected name(...)");
    }
    const std::string name = text.substr(0, open);
    const std::string body = text.substr(open + 1, text.size() - open - 2);
    const auto nums = parse_numbers(body, text);
    auto want = [&](std::size_t count) {
        if (nums.size() != count) throw Error("shape descriptor '" + text + "': wrong number of values");
    };
    if (name == "interval") {
        want(2);
        return interval(nums[0], nums[1]);
    }
    if (name == "rectangle") {
        want(4);
        return rectangle(nums[0], nums[1], nums[2], nums[3]);
    }
    if (name == "disk") {
        want(3);
        return disk(nums[0], nums[1], nums[2]);
    }
    if (name == "polygon") {
        if (nums.size() % 2 != 0) throw Error("shape descriptor '" + text + "': odd coordinate count");
        std::vector<std::array<double, 2>> vs;
        for (std::size_t i = 0; i < nums.size(); i += 2) vs.push_back({nums[i], nums[i + 1]});
        return polygon(std::move(vs));
    }
    throw Error("shape descriptor '" + text + "': unknown shape '" + name + "'");
}

std::string DomainShape::descriptor() const {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return "interval(" + fmt(s.a) + "," + fmt(s.b) + ")";
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return "rectangle(" + fmt(s.x0) + "," + fmt(s.y0) + "," + fmt(s.width) + "," + fmt(s.height) + ")";
            } else if constexpr (std::is_same_v<T, Disk>) {
                return "disk(" + fmt(s.cx) + "," + fmt(s.cy) + "," + fmt(s.radius) + ")";
            } else {
                std::string out = "polygon(";
                for (std::size_t i = 0; i < s.vertices.size(); ++i) {
                    if (i > 0) out += ";";
                    out += fmt(s.vertices[i][0]) + "," + fmt(s.vertices[i][1]);
                }
                return out + ")";
            }
        },
        kind_);
}

double DomainShape::inside_margin(std::span<const double> x) const {
    if (x.size() != dimension()) throw Error("inside_margin: dimension mismatch");
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return std::min(x[0] - s.a, s.b - x[0]);
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return std::min({x[0] - s.x0, s.x0 + s.width - x[0], x[1] - s.y0, s.y0 + s.height - x[1]});
            } else if constexpr (std::is_same_v<T, Disk>) {
                return s.radius - std::hypot(x[0] - s.cx, x[1] - s.cy);
            } else {
                double m = kInf;
                const std::size_t n = s.vertices.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& p = s.vertices[i];
                    const auto& q = s.vertices[(i + 1) % n];
                    const double ex = q[0] - p[0], ey = q[1] - p[1];
                    const double len = std::hypot(ex, ey);
                    // inward normal of a counterclockwise edge is (-ey, ex)
                    m = std::min(m, (-ey * (x[0] - p[0]) + ex * (x[1] - p[1])) / len);
                }
                return m;
            }
        },
        kind_);
}

double DomainShape::exit_distance(std::span<const double> x, std::size_t axis, int sign) const {
    if (x.size() != dimension() || axis >= dimension()) throw Error("exit_distance: dimension mismatch");
    const double sg = sign > 0 ? 1.0 : -1.0;
    double u[2] = {0.0, 0.0};
    u[axis] = sg;
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return sg > 0 ? s.b - x[0] : x[0] - s.a;
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                const double lo = axis == 0 ? s.x0 : s.y0;
                const double hi = lo + (axis == 0 ? s.width : s.height);
                return sg > 0 ? hi - x[axis] : x[axis] - lo;
            } else if constexpr (std::is_same_v<T, Disk>) {
                // |x - c + t u|^2 = r^2, largest root
                const double px = x[0] - s.cx, py = x[1] - s.cy;
                const double b = px * u[0] + py * u[1];
                const double cc = px * px + py * py - s.radius * s.radius;
                const double disc = std::max(0.0, b * b - cc);
                // -b + sqrt(disc), written to avoid cancellation when b > 0
                const double sq = std::sqrt(disc);
                return b > 0.0 ? -cc / (b + sq) : sq - b;
            } else {
                double t = kInf;
                const std::size_t n = s.vertices.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& p = s.vertices[i];
                    const auto& q = s.vertices[(i + 1) % n];
                    const double nx = q[1] - p[1], ny = -(q[0] - p[0]);  // outward
                    const double nu = nx * u[0] + ny * u[1];
                    if (nu <= 0.0) continue;
                    t = std::min(t, (nx * (p[0] - x[0]) + ny * (p[1] - x[1])) / nu);
                }
                return std::max(t, 0.0);
            }
        },
        kind_);
}

std::array<double, 2> DomainShape::lower() const {
    return std::visit(
        [](const auto& s) -> std::array<double, 2> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return {s.a, 0.0};
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return {s.x0, s.y0};
            } else if constexpr (std::is_same_v<T, Disk>) {
                return {s.cx - s.radius, s.cy - s.radius};
            } else {
                std::array<double, 2> lo{kInf, kInf};
                for (const auto& v : s.vertices) {
                    lo[0] = std::min(lo[0], v[0]);
                    lo[1] = std::min(lo[1], v[1]);
                }
                return lo;
            }
        },
        kind_);
}

std::array<double, 2> DomainShape::extent() const {
    return std::visit(
        [](const auto& s) -> std::array<double, 2> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return {s.b - s.a, 0.0};
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return {s.width, s.height};
            } else if constexpr (std::is_same_v<T, Disk>) {
                return {2.0 * s.radius, 2.0 * s.radius};
            } else {
                std::array<double, 2> lo{kInf, kInf}, hi{-kInf, -kInf};
                for (const auto& v : s.vertices) {
                    for (int d = 0; d < 2; ++d) {
                        lo[d] = std::min(lo[d], v[d]);
                        hi[d] = std::max(hi[d], v[d]);
                    }
                }
                return {hi[0] - lo[0], hi[1] - lo[1]};
            }
        },
        kind_);
}

std::vector<std::array<std::array<double, 2>, 2>> DomainShape::edges() const {
    std::vector<std::array<std::array<double, 2>, 2>> out;
    if (const auto* r = std::get_if<Rectangle>(&kind_)) {
        const std::array<double, 2> a{r->x0, r->y0}, b{r->x0 + r->width, r->y0},
            c{r->x0 + r->width, r->y0 + r->height}, d{r->x0, r->y0 + r->height};
        out = {{a, b}, {b, c}, {c, d}, {d, a}};
    } else if (const auto* p = std::get_if<ConvexPolygon>(&kind_)) {
        const std::size_t n = p->vertices.size();
        for (std::size_t i = 0; i < n; ++i) out.push_back({p->vertices[i], p->vertices[(i + 1) % n]});
    }
    return out;
}

double DomainShape::gauge_diameter(const ConvexBody& body) const {
    if (body.dimension() != dimension()) throw Error("gauge_diameter: dimension mismatch");
    if (const auto* iv = std::get_if<Interval>(&kind_)) {
        const double d = iv->b - iv->a;
        return gauge_eval(body, std::span<const double>(&d, 1));
    }
    if (const auto* dk = std::get_if<Disk>(&kind_)) {
        double m = 0.0;
        for (const auto& u : sphere_directions(2, 4096)) {
            const double v[2] = {2.0 * dk->radius * u[0], 2.0 * dk->radius * u[1]};
            m = std::max(m, gauge_eval(body, v));
        }
        return m;
    }
    double m = 0.0;
    const auto es = edges();
    for (const auto& e1 : es) {
        for (const auto& e2 : es) {
            const double v[2] = {e1[0][0] - e2[0][0], e1[0][1] - e2[0][1]};
            m = std::max(m, gauge_eval(body, v));
        }
    }
    return m;
}

std::array<double, 2> GridDomain::coord(std::size_t i) const noexcept {
    return {origin_[0] + h_ * static_cast<double>(ix(i)), origin_[1] + h_ * static_cast<double>(iy(i))};
}

std::size_t GridDomain::count(NodeKind k) const noexcept {
    return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), k));
}

std::size_t GridDomain::neighbor(std::size_t i, Arm a) const noexcept {
    const std::size_t x = ix(i), y = iy(i);
    switch (a) {
        case kMinusX: return x > 0 ? i - 1 : node_count();
        case kPlusX: return x + 1 < nx_ ? i + 1 : node_count();
        case kMinusY: return y > 0 ? i - nx_ : node_count();
        case kPlusY: return y + 1 < ny_ ? i + nx_ : node_count();
    }
    return node_count();
}

GridPtr build_grid(const DomainShape& shape, double h) {
    if (!positive_finite(h)) throw Error("build_grid: spacing must be positive");
    std::shared_ptr<GridDomain> g(new GridDomain(shape));
    g->h_ = h;
    g->dim_ = shape.dimension();
    g->origin_ = shape.lower();
    const auto ext = shape.extent();
    auto cells = [&](double e) {
        const double q = std::ceil(e / h - 1e-9);
        if (q > 1e8) throw Error("build_grid: spacing too fine for the domain");
        return static_cast<std::size_t>(q) + 1;
    };
    g->nx_ = cells(ext[0]);
    g->ny_ = g->dim_ == 2 ? cells(ext[1]) : 1;
    const std::size_t n = g->nx_ * g->ny_;
    g->kinds_.assign(n, NodeKind::Exterior);
    g->arms_.assign(n, {1.0, 1.0, 1.0, 1.0});
    const double margin = 1e-9 * h;
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = g->coord(i);
        if (shape.inside_margin(std::span<const double>(c.data(), g->dim_)) > margin) {
            g->kinds_[i] = NodeKind::Interior;
            g->interior_.push_back(i);
        }
    }
    if (g->interior_.empty()) throw Error("build_grid: spacing too coarse, no interior node");
    for (std::size_t i : g->interior_) {
        const auto c = g->coord(i);
        for (std::size_t a = 0; a < 2 * g->dim_; ++a) {
            const std::size_t j = g->neighbor(i, static_cast<Arm>(a));
            if (j < n && g->kinds_[j] == NodeKind::Interior) continue;
            if (j < n) g->kinds_[j] = NodeKind::Boundary;
            const double t = shape.exit_distance(std::span<const double>(c.data(), g->dim_), a / 2, a % 2 == 1 ? 1 : -1);
            g->arms_[i][a] = std::clamp(t / h, margin / h, 1.0);
        }
    }
    return g;
}

ScalarField ScalarField::zeros(GridPtr grid) {
    ScalarField f{grid, std::vector<double>(grid->node_count(), 0.0)};
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (grid->kind(i) == NodeKind::Exterior) f.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
    return f;
}

VectorField VectorField::zeros(GridPtr grid, std::size_t n) {
    VectorField f{grid, {}};
    const auto base = ScalarField::zeros(grid).values;
    f.components.assign(n, base);
    return f;
}

}  // namespace gradvi
