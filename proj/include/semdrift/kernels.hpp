#pragma once

#include <cstddef>
#include <string>

// Dense double-precision vector kernels used by the embedding training loop,
// k-means, and nearest-neighbor search. A scalar reference implementation is
// always available; AVX2 (x86-64) and NEON (aarch64) variants are selected at
// runtime. Results of the SIMD variants may differ from scalar in the last
// few ulps (reassociation), never more; the equivalence suite pins that.

namespace semdrift::kernels {

enum class Backend { scalar, avx2, neon };

// Backend picked at startup from CPU features, overridable with the
// SEMDRIFT_SIMD environment variable (scalar|avx2|neon|auto) or set_backend().
Backend active_backend();
bool backend_supported(Backend b);
bool set_backend(Backend b);  // false (and no change) if unsupported here
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scale(double* x, double alpha, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double norm(const double* a, std::size_t n);

namespace detail {

// reference kernels; exposed so the equivalence tests can compare against them
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scale_scalar(double* x, double alpha, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);

#if defined(SEMDRIFT_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scale_avx2(double* x, double alpha, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(SEMDRIFT_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
void scale_neon(double* x, double alpha, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
#endif

}  // namespace detail

}  // namespace semdrift::kernels
