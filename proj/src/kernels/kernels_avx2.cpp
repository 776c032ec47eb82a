#include "gradvi/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// Built with -mavx2 (no -mfma). Each loop mirrors the scalar reference
// operation for operation; tails fall back to the same scalar expressions.

namespace gradvi::kernels::avx2 {

void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept {
    const std::size_t m = n > stride ? n - stride : 0;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m256d hi = _mm256_loadu_pd(w + i + stride);
        const __m256d lo = _mm256_loadu_pd(w + i);
        const __m256d il = _mm256_loadu_pd(inv_len + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(hi, lo), il));
    }
    for (; i < m; ++i) {
        out[i] = (w[i + stride] - w[i]) * inv_len[i];
    }
    for (i = m; i < n; ++i) {
        out[i] = 0.0;
    }
}

void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept {
    const std::size_t head = std::min(stride, n);
    for (std::size_t j = 0; j < head; ++j) {
        out[j] = out[j] - q[j] * inv_len[j];
    }
    std::size_t j = head;
    for (; j + 4 <= n; j += 4) {
        const __m256d prev = _mm256_mul_pd(_mm256_loadu_pd(q + j - stride), _mm256_loadu_pd(inv_len + j - stride));
        const __m256d here = _mm256_mul_pd(_mm256_loadu_pd(q + j), _mm256_loadu_pd(inv_len + j));
        const __m256d o = _mm256_loadu_pd(out + j);
        _mm256_storeu_pd(out + j, _mm256_sub_pd(_mm256_add_pd(o, prev), here));
    }
    for (; j < n; ++j) {
        out[j] = (out[j] + q[j - stride] * inv_len[j - stride]) - q[j] * inv_len[j];
    }
}

void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept {
    const double r2 = radius * radius;
    const __m256d vr = _mm256_set1_pd(radius);
    const __m256d vr2 = _mm256_set1_pd(r2);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d n2 = _mm256_setzero_pd();
        for (std::size_t c = 0; c < ncomp; ++c) {
            const __m256d x = _mm256_loadu_pd(comps[c] + i);
            n2 = _mm256_add_pd(n2, _mm256_mul_pd(x, x));
        }
        const __m256d outside = _mm256_cmp_pd(n2, vr2, _CMP_GT_OQ);
        if (_mm256_movemask_pd(outside) == 0) {
            continue;
        }
        // Lanes inside the ball keep s = 1 and are left untouched by the blend below.
        const __m256d s = _mm256_blendv_pd(one, _mm256_div_pd(vr, _mm256_sqrt_pd(n2)), outside);
        for (std::size_t c = 0; c < ncomp; ++c) {
            const __m256d x = _mm256_loadu_pd(comps[c] + i);
            _mm256_storeu_pd(comps[c] + i, _mm256_blendv_pd(x, _mm256_mul_pd(x, s), outside));
        }
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < ncomp; ++c) {
            acc = acc + comps[c][i] * comps[c][i];
        }
        if (acc > r2) {
            const double s = radius / std::sqrt(acc);
            for (std::size_t c = 0; c < ncomp; ++c) {
                comps[c][i] = comps[c][i] * s;
            }
        }
    }
}

void clip_box(double* x, std::size_t n, double half_width) noexcept {
    const __m256d hi = _mm256_set1_pd(half_width);
    const __m256d lo = _mm256_set1_pd(-half_width);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max(x, lo) then min(., hi), matching std::min(std::max(x, lo), hi).
        const __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(x + i, _mm256_min_pd(_mm256_max_pd(v, lo), hi));
    }
    for (; i < n; ++i) {
        x[i] = std::min(std::max(x[i], -half_width), half_width);
    }
}

void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l = _mm256_loadu_pd(lambda + i);
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(g + i), _mm256_loadu_pd(z + i));
        _mm256_storeu_pd(lambda + i, _mm256_add_pd(l, d));
    }
    for (; i < n; ++i) {
        lambda[i] = lambda[i] + (g[i] - z[i]);
    }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) {
        r = std::max(r, std::abs(a[i] - b[i]));
    }
    return r;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    for (; i < n; ++i) {
        s[i % 4] = s[i % 4] + a[i] * b[i];
    }
    return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace gradvi::kernels::avx2
