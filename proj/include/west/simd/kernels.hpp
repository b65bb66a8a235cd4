#pragma once

#include <cstddef>

// Dense inner-loop kernels used by the embedding/softmax factor lookups, the
// LSTM cell, and the quantizer. Every kernel has a scalar reference
// implementation and (on x86-64 with AVX2+FMA) a vectorized variant; the
// active table is chosen once at startup from CPUID and can be overridden
// with WEST_SIMD=scalar|avx2 or force_variant() for equivalence tests.
//
// All matrices are row-major. Within one variant the accumulation order is
// fixed, so repeated runs on the same machine are bit-reproducible.

namespace west::simd {

enum class Variant { scalar, avx2 };

Variant active_variant();
bool variant_available(Variant v);
const char* variant_name(Variant v);
void force_variant(Variant v); // test hook; throws if unavailable

template <typename T>
struct KernelTable {
  T (*dot)(const T* x, const T* y, std::size_t n);
  void (*axpy)(T a, const T* x, T* y, std::size_t n);      // y += a*x
  void (*scal)(T a, T* x, std::size_t n);                  // x *= a
  T (*sumsq)(const T* x, std::size_t n);
  // y = A*x / y += A*x, A is rows x cols
  void (*matvec)(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols);
  void (*matvec_add)(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols);
  // x += A^T * y
  void (*matvec_t_add)(const T* a, const T* y, T* x, std::size_t rows, std::size_t cols);
  // A += alpha * x * y^T
  void (*ger)(T* a, const T* x, const T* y, std::size_t rows, std::size_t cols, T alpha);
  void (*minmax)(const T* x, std::size_t n, T* mn, T* mx);
};

template <typename T> const KernelTable<T>& active();

namespace detail {
template <typename T> KernelTable<T> scalar_table();
template <typename T> KernelTable<T> avx2_table(); // zeroed when unsupported at build time
}

template <typename T> inline T dot(const T* x, const T* y, std::size_t n) {
  return active<T>().dot(x, y, n);
}
template <typename T> inline void axpy(T a, const T* x, T* y, std::size_t n) {
  active<T>().axpy(a, x, y, n);
}
template <typename T> inline void scal(T a, T* x, std::size_t n) {
  active<T>().scal(a, x, n);
}
template <typename T> inline T sumsq(const T* x, std::size_t n) {
  return active<T>().sumsq(x, n);
}
template <typename T>
inline void matvec(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  active<T>().matvec(a, x, y, rows, cols);
}
template <typename T>
inline void matvec_add(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  active<T>().matvec_add(a, x, y, rows, cols);
}
template <typename T>
inline void matvec_t_add(const T* a, const T* y, T* x, std::size_t rows, std::size_t cols) {
  active<T>().matvec_t_add(a, y, x, rows, cols);
}
template <typename T>
inline void ger(T* a, const T* x, const T* y, std::size_t rows, std::size_t cols, T alpha = T(1)) {
  active<T>().ger(a, x, y, rows, cols, alpha);
}
template <typename T> inline void minmax(const T* x, std::size_t n, T* mn, T* mx) {
  active<T>().minmax(x, n, mn, mx);
}

} // namespace west::simd
