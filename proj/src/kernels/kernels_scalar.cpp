#include "gradvi/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gradvi::kernels::scalar {

void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept {
    const std::size_t m = n > stride ? n - stride : 0;
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = (w[i + stride] - w[i]) * inv_len[i];
    }
    for (std::size_t i = m; i < n; ++i) {
        out[i] = 0.0;
    }
}

void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept {
    const std::size_t head = std::min(stride, n);
    for (std::size_t j = 0; j < head; ++j) {
        out[j] = out[j] - q[j] * inv_len[j];
    }
    for (std::size_t j = head; j < n; ++j) {
        out[j] = (out[j] + q[j - stride] * inv_len[j - stride]) - q[j] * inv_len[j];
    }
}

void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept {
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < n; ++i) {
        double n2 = 0.0;
        for (std::size_t c = 0; c < ncomp; ++c) {
            n2 = n2 + comps[c][i] * comps[c][i];
        }
        if (n2 > r2) {
            const double s = radius / std::sqrt(n2);
            for (std::size_t c = 0; c < ncomp; ++c) {
                comps[c][i] = comps[c][i] * s;
            }
        }
    }
}

void clip_box(double* x, std::size_t n, double half_width) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::min(std::max(x[i], -half_width), half_width);
    }
}

void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = lambda[i] + (g[i] - z[i]);
    }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        s[i % 4] = s[i % 4] + a[i] * b[i];
    }
    return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace gradvi::kernels::scalar
