#include "west/simd/kernels.hpp"

namespace west::simd {
namespace {

template <typename T>
T dot_k(const T* x, const T* y, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void axpy_k(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void scal_k(T a, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

template <typename T>
T sumsq_k(const T* x, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

template <typename T>
void matvec_k(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_k(a + r * cols, x, cols);
}

template <typename T>
void matvec_add_k(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_k(a + r * cols, x, cols);
}

template <typename T>
void matvec_t_add_k(const T* a, const T* y, T* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy_k(y[r], a + r * cols, x, cols);
}

template <typename T>
void ger_k(T* a, const T* x, const T* y, std::size_t rows, std::size_t cols, T alpha) {
  for (std::size_t r = 0; r < rows; ++r) axpy_k(alpha * x[r], y, a + r * cols, cols);
}

template <typename T>
void minmax_k(const T* x, std::size_t n, T* mn, T* mx) {
  T lo = x[0], hi = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

} // namespace

namespace detail {

template <typename T>
KernelTable<T> scalar_table() {
  KernelTable<T> t;
  t.dot = dot_k<T>;
  t.axpy = axpy_k<T>;
  t.scal = scal_k<T>;
  t.sumsq = sumsq_k<T>;
  t.matvec = matvec_k<T>;
  t.matvec_add = matvec_add_k<T>;
  t.matvec_t_add = matvec_t_add_k<T>;
  t.ger = ger_k<T>;
  t.minmax = minmax_k<T>;
  return t;
}

template KernelTable<float> scalar_table<float>();
template KernelTable<double> scalar_table<double>();

} // namespace detail
} // namespace west::simd
