#include "gradvi/gauge.hpp"

#include "gradvi/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace gradvi {

namespace {

void require_dim(const ConvexBody& body, std::span<const double> x, const char* what) {
    if (x.size() != body.dimension()) {
        std::ostringstream os;
        os << what << ": point has " << x.size() << " components, body has dimension " << body.dimension();
        throw Error(os.str());
    }
}

double pnorm(std::span<const double> x, double p) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    if (p == 1.0) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double v : x) s += (v / m) * (v / m);
        return m * std::sqrt(s);
    }
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s, 1.0 / p);
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// All vertices of a bounded polytope given by halfspaces, by solving every
// dim-subset of boundary hyperplanes and keeping the feasible solutions.
std::vector<Point> enumerate_vertices(const std::vector<Halfspace>& hs, std::size_t dim) {
    const std::size_t m = hs.size();
    std::vector<Point> out;
    if (m < dim) return out;
    std::vector<std::size_t> pick(dim);
    for (std::size_t i = 0; i < dim; ++i) pick[i] = i;
    Eigen::MatrixXd a(dim, dim);
    Eigen::VectorXd b(dim);
    while (true) {
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) a(r, c) = hs[pick[r]].normal[c];
            b(r) = hs[pick[r]].offset;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() == static_cast<Eigen::Index>(dim)) {
            const Eigen::VectorXd x = lu.solve(b);
            Point v(x.data(), x.data() + dim);
            bool feasible = true;
            for (const auto& h : hs) {
                if (dot(h.normal, v) > h.offset * (1.0 + 1e-9) + 1e-12) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                const bool seen = std::any_of(out.begin(), out.end(), [&](const Point& w) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < dim; ++i) d = std::max(d, std::abs(w[i] - v[i]));
                    return d <= 1e-9 * (1.0 + max_abs(v));
                });
                if (!seen) out.push_back(std::move(v));
            }
        }
        // next combination
        std::size_t k = dim;
        while (k > 0 && pick[k - 1] == m - dim + (k - 1)) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t j = k; j < dim; ++j) pick[j] = pick[j - 1] + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

double spectral_norm(const MatrixNn& a) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        a.entries().data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double image_norm(const MatrixNn& a, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double v = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) v += a(r, c) * z[c];
        s += v * v;
    }
    return std::sqrt(s);
}

}  // namespace

ConvexBody ConvexBody::euclidean_ball(std::size_t dim, double radius) {
    if (dim == 0) throw Error("euclidean ball: dimension must be positive");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("euclidean ball: radius must be positive");
    return ConvexBody(EuclideanBall{radius}, dim);
}

ConvexBody ConvexBody::pnorm_ball(std::size_t dim, double p, double radius) {
    if (dim == 0) throw Error("p-norm ball: dimension must be positive");
    if (!(p >= 1.0) || !std::isfinite(p)) throw Error("p-norm ball: p must be a finite real >= 1");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error("p-norm ball: radius must be positive");
    return ConvexBody(PNormBall{p, radius}, dim);
}

ConvexBody ConvexBody::box(std::vector<double> half_widths) {
    if (half_widths.empty()) throw Error("box: at least one half-width required");
    for (double w : half_widths) {
        if (!(w > 0.0) || !std::isfinite(w)) throw Error("box: half-widths must be positive");
    }
    const std::size_t dim = half_widths.size();
    return ConvexBody(Box{std::move(half_widths)}, dim);
}

ConvexBody ConvexBody::cross_polytope(std::size_t dim, double scale) {
    if (dim == 0) throw Error("cross-polytope: dimension must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("cross-polytope: scale must be positive");
    return ConvexBody(CrossPolytope{scale}, dim);
}

ConvexBody ConvexBody::polytope(std::vector<Halfspace> halfspaces) {
    if (halfspaces.empty()) throw Error("polytope: no halfspaces");
    const std::size_t dim = halfspaces.front().normal.size();
    if (dim == 0) throw Error("polytope: empty normal");
    for (auto& h : halfspaces) {
        if (h.normal.size() != dim) throw Error("polytope: normals of mixed dimension");
        if (!(h.offset > 0.0) || !std::isfinite(h.offset)) throw Error("polytope: offsets must be positive");
        const double len = norm2(h.normal);
        if (!(len > 0.0)) throw Error("polytope: zero normal");
        for (double& v : h.normal) v /= len;
        h.offset /= len;
    }
    for (const auto& h : halfspaces) {
        const bool paired = std::any_of(halfspaces.begin(), halfspaces.end(), [&](const Halfspace& g) {
            double d = 0.0;
            for (std::size_t i = 0; i < dim; ++i) d = std::max(d, std::abs(g.normal[i] + h.normal[i]));
            return d <= 1e-9 && std::abs(g.offset - h.offset) <= 1e-9 * h.offset;
        });
        if (!paired) throw Error("polytope: halfspaces must come in (n, b), (-n, b) pairs");
    }
    Polytope poly{std::move(halfspaces), {}};
    poly.vertices = enumerate_vertices(poly.halfspaces, dim);
    // Bounded iff the gauge is positive in every direction.
    for (const auto& u : sphere_directions(dim, 512)) {
        double g = 0.0;
        for (const auto& h : poly.halfspaces) g = std::max(g, dot(h.normal, u) / h.offset);
        if (!(g > 1e-12)) throw Error("polytope: halfspaces do not bound a compact set");
    }
    if (poly.vertices.size() < 2) throw Error("polytope: halfspaces do not bound a compact set");
    return ConvexBody(std::move(poly), dim);
}

std::string ConvexBody::family_name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) return "ball";
            else if constexpr (std::is_same_v<T, PNormBall>) return "pball";
            else if constexpr (std::is_same_v<T, Box>) return "box";
            else if constexpr (std::is_same_v<T, CrossPolytope>) return "cross";
            else return "polytope";
        },
        family_);
}

double gauge_eval(const ConvexBody& body, std::span<const double> x) {
    require_dim(body, x, "gauge_eval");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return pnorm(x, 2.0) / f.radius;
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                return pnorm(x, f.p) / f.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                double g = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) g = std::max(g, std::abs(x[i]) / f.half_widths[i]);
                return g;
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                return pnorm(x, 1.0) / f.scale;
            } else {
                double g = 0.0;
                for (const auto& h : f.halfspaces) g = std::max(g, dot(h.normal, x) / h.offset);
                return g;
            }
        },
        body.family());
}

double polar_gauge(const ConvexBody& body, std::span<const double> y) {
    require_dim(body, y, "polar_gauge");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return f.radius * pnorm(y, 2.0);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                if (f.p == 1.0) return f.radius * max_abs(y);
                return f.radius * pnorm(y, f.p / (f.p - 1.0));
            } else if constexpr (std::is_same_v<T, Box>) {
                double s = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) s += f.half_widths[i] * std::abs(y[i]);
                return s;
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                return f.scale * max_abs(y);
            } else {
                double g = 0.0;
                for (const auto& v : f.vertices) g = std::max(g, dot(v, y));
                return g;
            }
        },
        body.family());
}

ConvexBody polar(const ConvexBody& body) {
    const std::size_t dim = body.dimension();
    return std::visit(
        [&](const auto& f) -> ConvexBody {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return ConvexBody::euclidean_ball(dim, 1.0 / f.radius);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                if (f.p == 1.0) return ConvexBody::box(std::vector<double>(dim, 1.0 / f.radius));
                return ConvexBody::pnorm_ball(dim, f.p / (f.p - 1.0), 1.0 / f.radius);
            } else if constexpr (std::is_same_v<T, Box>) {
                // {y : sum_i w_i |y_i| <= 1}, one halfspace per sign pattern.
                std::vector<Halfspace> hs;
                const std::size_t count = std::size_t{1} << dim;
                for (std::size_t mask = 0; mask < count; ++mask) {
                    Point n(dim);
                    for (std::size_t i = 0; i < dim; ++i) n[i] = ((mask >> i) & 1U ? -1.0 : 1.0) * f.half_widths[i];
                    hs.push_back({std::move(n), 1.0});
                }
                return ConvexBody::polytope(std::move(hs));
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                return ConvexBody::box(std::vector<double>(dim, 1.0 / f.scale));
            } else {
                std::vector<Halfspace> hs;
                hs.reserve(f.vertices.size());
                for (const auto& v : f.vertices) hs.push_back({v, 1.0});
                return ConvexBody::polytope(std::move(hs));
            }
        },
        body.family());
}

double duality_gap(const ConvexBody& body, std::span<const double> x, std::span<const double> y) {
    require_dim(body, x, "duality_gap");
    require_dim(body, y, "duality_gap");
    return gauge_eval(body, x) * polar_gauge(body, y) - dot(x, y);
}

MatrixNn::MatrixNn(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

MatrixNn::MatrixNn(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw Error("MatrixNn: entry count does not match shape");
    for (double v : data_) {
        if (!std::isfinite(v)) throw Error("MatrixNn: non-finite entry");
    }
}

MatrixNn MatrixNn::identity(std::size_t n) {
    MatrixNn m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double operator_norm_2k(const MatrixNn& a, const ConvexBody& body) {
    const std::size_t dim = body.dimension();
    if (a.cols() != dim) {
        std::ostringstream os;
        os << "operator_norm_2k: matrix has " << a.cols() << " columns, body has dimension " << dim;
        throw Error(os.str());
    }
    auto over_vertices = [&](const std::vector<Point>& vs) {
        double m = 0.0;
        for (const auto& v : vs) m = std::max(m, image_norm(a, v));
        return m;
    };
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return f.radius * spectral_norm(a);
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                if (f.p == 2.0) return f.radius * spectral_norm(a);
                if (f.p == 1.0 || dim == 1) {
                    std::vector<Point> vs;
                    for (std::size_t i = 0; i < dim; ++i) {
                        Point e(dim, 0.0);
                        e[i] = f.radius;
                        vs.push_back(e);
                    }
                    return over_vertices(vs);
                }
                double m = 0.0;
                for (const auto& z : sphere_directions(dim, kOperatorNormSamples)) {
                    m = std::max(m, image_norm(a, z) / gauge_eval(body, z));
                }
                return m;
            } else if constexpr (std::is_same_v<T, Box>) {
                std::vector<Point> vs;
                const std::size_t count = std::size_t{1} << dim;
                for (std::size_t mask = 0; mask < count; ++mask) {
                    Point v(dim);
                    for (std::size_t i = 0; i < dim; ++i) v[i] = ((mask >> i) & 1U ? -1.0 : 1.0) * f.half_widths[i];
                    vs.push_back(std::move(v));
                }
                return over_vertices(vs);
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                std::vector<Point> vs;
                for (std::size_t i = 0; i < dim; ++i) {
                    Point e(dim, 0.0);
                    e[i] = f.scale;
                    vs.push_back(e);
                }
                return over_vertices(vs);
            } else {
                return over_vertices(f.vertices);
            }
        },
        body.family());
}

double second_difference_gauge(const ConvexBody& body, std::span<const double> x, std::span<const double> z,
                               double h) {
    require_dim(body, x, "second_difference_gauge");
    require_dim(body, z, "second_difference_gauge");
    const double gz = gauge_eval(body, z);
    if (std::abs(gz - 1.0) > 1e-10) throw Error("second_difference_gauge: direction must have unit gauge");
    const double gx = gauge_eval(body, x);
    if (!(h > 0.0) || !(h < gx)) throw Error("second_difference_gauge: need 0 < h < gauge(x)");
    Point xp(x.begin(), x.end());
    Point xm(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += h * z[i];
        xm[i] -= h * z[i];
    }
    return (gauge_eval(body, xp) + gauge_eval(body, xm) - 2.0 * gx) / (h * h);
}

double pnorm_b_constant(double p) {
    if (!(p >= 2.0)) throw Error("pnorm_b_constant: requires p >= 2");
    return 2.0 * (p - 1.0);
}

std::vector<Point> sphere_directions(std::size_t dim, std::size_t count) {
    std::vector<Point> out;
    out.reserve(count);
    if (dim == 1) {
        for (std::size_t k = 0; k < count; ++k) out.push_back({k % 2 == 0 ? 1.0 : -1.0});
        return out;
    }
    if (dim == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
            out.push_back({std::cos(t), std::sin(t)});
        }
        return out;
    }
    if (dim == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < count; ++k) {
            const double zc = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
            const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
            const double t = golden * static_cast<double>(k);
            out.push_back({r * std::cos(t), r * std::sin(t), zc});
        }
        return out;
    }
    std::mt19937_64 rng(0x5eed'd1e5ULL);
    std::normal_distribution<double> normal;
    while (out.size() < count) {
        Point v(dim);
        for (double& c : v) c = normal(rng);
        const double len = norm2(v);
        if (len < 1e-12) continue;
        for (double& c : v) c /= len;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace gradvi
