#include "semdrift/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace semdrift::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

namespace {

struct KernelTable {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
    double (*sqdist)(const double*, const double*, std::size_t);
};

constexpr KernelTable kScalarTable = {
    Backend::scalar,
    detail::dot_scalar,
    detail::axpy_scalar,
    detail::scale_scalar,
    detail::squared_distance_scalar,
};

#if defined(SEMDRIFT_HAVE_AVX2)
constexpr KernelTable kAvx2Table = {
    Backend::avx2,
    detail::dot_avx2,
    detail::axpy_avx2,
    detail::scale_avx2,
    detail::squared_distance_avx2,
};
#endif

#if defined(SEMDRIFT_HAVE_NEON)
constexpr KernelTable kNeonTable = {
    Backend::neon,
    detail::dot_neon,
    detail::axpy_neon,
    detail::scale_neon,
    detail::squared_distance_neon,
};
#endif

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(SEMDRIFT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(SEMDRIFT_HAVE_NEON)
            return true;  // baseline on aarch64
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return &kScalarTable;
#if defined(SEMDRIFT_HAVE_AVX2)
        case Backend::avx2:
            return &kAvx2Table;
#endif
#if defined(SEMDRIFT_HAVE_NEON)
        case Backend::neon:
            return &kNeonTable;
#endif
        default:
            return nullptr;
    }
}

Backend detect_backend() {
    if (const char* env = std::getenv("SEMDRIFT_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_supports(Backend::avx2)) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && cpu_supports(Backend::neon)) return Backend::neon;
        // unknown value or unsupported request falls through to auto
    }
    if (cpu_supports(Backend::avx2)) return Backend::avx2;
    if (cpu_supports(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

const KernelTable* g_table = nullptr;
std::once_flag g_init_once;

const KernelTable* table() {
    std::call_once(g_init_once, [] { g_table = table_for(detect_backend()); });
    return g_table;
}

}  // namespace

Backend active_backend() { return table()->backend; }

bool backend_supported(Backend b) { return cpu_supports(b) && table_for(b) != nullptr; }

bool set_backend(Backend b) {
    if (!backend_supported(b)) return false;
    table();  // force init so call_once does not clobber the override
    g_table = table_for(b);
    return true;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

double dot(const double* a, const double* b, std::size_t n) { return table()->dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) { table()->axpy(alpha, x, y, n); }

void scale(double* x, double alpha, std::size_t n) { table()->scale(x, alpha, n); }

double squared_distance(const double* a, const double* b, std::size_t n) {
    return table()->sqdist(a, b, n);
}

double norm(const double* a, std::size_t n) { return std::sqrt(table()->dot(a, a, n)); }

}  // namespace semdrift::kernels
