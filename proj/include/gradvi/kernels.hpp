#pragma once

// Data-parallel inner loops of the solvers.
//
// Every kernel exists as a scalar reference (kernels::scalar) and, on x86-64,
// an AVX2 variant (kernels::avx2). The public entry points in kernels:: select
// one implementation at first use through a cpuid check. Both variants perform
// the same floating-point operations in the same order, so results are
// bit-identical regardless of which one runs; reductions use four interleaved
// partial sums in both variants for that reason.
//
// Setting GRADVI_FORCE_SCALAR=1 in the environment pins the scalar path.

#include <cstddef>

namespace gradvi::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa() noexcept;
const char* isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

/// out[i] = (w[i + stride] - w[i]) * inv_len[i] for i < n - stride; out[i] = 0 after.
void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept;

/// out[j] += q[j - stride] * inv_len[j - stride] - q[j] * inv_len[j]  (terms with j < stride dropped).
/// This is the transpose of forward_difference accumulated into out.
void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept;

/// Radial clip of the vectors (comps[0][i], ..., comps[ncomp-1][i]) onto the Euclidean ball of `radius`.
void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept;

/// Componentwise clip to [-half_width, half_width].
void clip_box(double* x, std::size_t n, double half_width) noexcept;

/// lambda[i] += g[i] - z[i]
void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept;

/// max_i |a[i] - b[i]|, 0 for n == 0.
double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept;

/// sum_i a[i] * b[i] with four interleaved partial sums combined as (s0 + s1) + (s2 + s3).
double dot(const double* a, const double* b, std::size_t n) noexcept;

namespace scalar {
void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept;
void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept;
void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept;
void clip_box(double* x, std::size_t n, double half_width) noexcept;
void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept;
double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept;
void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept;
void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept;
void clip_box(double* x, std::size_t n, double half_width) noexcept;
void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept;
double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace avx2

}  // namespace gradvi::kernels
