#include "gradvi/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gradvi::kernels {

namespace {

struct Table {
    Isa isa;
    void (*forward_difference)(const double*, const double*, std::size_t, double*, std::size_t) noexcept;
    void (*accumulate_transpose)(const double*, const double*, std::size_t, double*, std::size_t) noexcept;
    void (*clip_ball)(double* const*, std::size_t, std::size_t, double) noexcept;
    void (*clip_box)(double*, std::size_t, double) noexcept;
    void (*multiplier_update)(double*, const double*, const double*, std::size_t) noexcept;
    double (*max_abs_diff)(const double*, const double*, std::size_t) noexcept;
    double (*dot)(const double*, const double*, std::size_t) noexcept;
};

constexpr Table kScalar{Isa::Scalar,         scalar::forward_difference, scalar::accumulate_transpose,
                        scalar::clip_ball,   scalar::clip_box,           scalar::multiplier_update,
                        scalar::max_abs_diff, scalar::dot};

#ifdef GRADVI_HAVE_AVX2
constexpr Table kAvx2{Isa::Avx2,         avx2::forward_difference, avx2::accumulate_transpose,
                      avx2::clip_ball,   avx2::clip_box,           avx2::multiplier_update,
                      avx2::max_abs_diff, avx2::dot};
#endif

bool cpu_has_avx2() noexcept {
#ifdef GRADVI_HAVE_AVX2
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Table& select() noexcept {
    const char* force = std::getenv("GRADVI_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0 && force[0] != '\0') {
        return kScalar;
    }
#ifdef GRADVI_HAVE_AVX2
    if (cpu_has_avx2()) {
        return kAvx2;
    }
#endif
    return kScalar;
}

const Table& table() noexcept {
    static const Table& t = select();
    return t;
}

}  // namespace

Isa active_isa() noexcept { return table().isa; }

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) noexcept { return isa == Isa::Scalar || cpu_has_avx2(); }

void forward_difference(const double* w, const double* inv_len, std::size_t stride, double* out,
                        std::size_t n) noexcept {
    table().forward_difference(w, inv_len, stride, out, n);
}

void accumulate_transpose(const double* q, const double* inv_len, std::size_t stride, double* out,
                          std::size_t n) noexcept {
    table().accumulate_transpose(q, inv_len, stride, out, n);
}

void clip_ball(double* const* comps, std::size_t ncomp, std::size_t n, double radius) noexcept {
    table().clip_ball(comps, ncomp, n, radius);
}

void clip_box(double* x, std::size_t n, double half_width) noexcept { table().clip_box(x, n, half_width); }

void multiplier_update(double* lambda, const double* g, const double* z, std::size_t n) noexcept {
    table().multiplier_update(lambda, g, z, n);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) noexcept {
    return table().max_abs_diff(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) noexcept { return table().dot(a, b, n); }

}  // namespace gradvi::kernels
