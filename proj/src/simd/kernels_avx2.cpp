#include "west/simd/kernels.hpp"

#include <cstring>

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#define WEST_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define WEST_HAVE_AVX2_BUILD 0
#endif

namespace west::simd {

#if WEST_HAVE_AVX2_BUILD

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, lo);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

float dot_f(const float* x, const float* y, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  float s = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double dot_d(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_f(float a, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_d(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_f(float a, float* x, std::size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void scal_d(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

float sumsq_f(const float* x, std::size_t n) { return dot_f(x, x, n); }
double sumsq_d(const double* x, std::size_t n) { return dot_d(x, x, n); }

template <typename T, T (*Dot)(const T*, const T*, std::size_t)>
void matvec_k(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = Dot(a + r * cols, x, cols);
}

template <typename T, T (*Dot)(const T*, const T*, std::size_t)>
void matvec_add_k(const T* a, const T* x, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += Dot(a + r * cols, x, cols);
}

template <typename T, void (*Axpy)(T, const T*, T*, std::size_t)>
void matvec_t_add_k(const T* a, const T* y, T* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) Axpy(y[r], a + r * cols, x, cols);
}

template <typename T, void (*Axpy)(T, const T*, T*, std::size_t)>
void ger_k(T* a, const T* x, const T* y, std::size_t rows, std::size_t cols, T alpha) {
  for (std::size_t r = 0; r < rows; ++r) Axpy(alpha * x[r], y, a + r * cols, cols);
}

void minmax_f(const float* x, std::size_t n, float* mn, float* mx) {
  std::size_t i = 0;
  float lo, hi;
  if (n >= 8) {
    __m256 vlo = _mm256_loadu_ps(x);
    __m256 vhi = vlo;
    for (i = 8; i + 8 <= n; i += 8) {
      __m256 v = _mm256_loadu_ps(x + i);
      vlo = _mm256_min_ps(vlo, v);
      vhi = _mm256_max_ps(vhi, v);
    }
    alignas(32) float tmp[8];
    _mm256_store_ps(tmp, vlo);
    lo = tmp[0];
    for (int j = 1; j < 8; ++j) lo = tmp[j] < lo ? tmp[j] : lo;
    _mm256_store_ps(tmp, vhi);
    hi = tmp[0];
    for (int j = 1; j < 8; ++j) hi = tmp[j] > hi ? tmp[j] : hi;
  } else {
    lo = hi = x[0];
    i = 1;
  }
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

void minmax_d(const double* x, std::size_t n, double* mn, double* mx) {
  double lo = x[0], hi = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  *mn = lo;
  *mx = hi;
}

} // namespace

namespace detail {

template <>
KernelTable<float> avx2_table<float>() {
  KernelTable<float> t;
  t.dot = dot_f;
  t.axpy = axpy_f;
  t.scal = scal_f;
  t.sumsq = sumsq_f;
  t.matvec = matvec_k<float, dot_f>;
  t.matvec_add = matvec_add_k<float, dot_f>;
  t.matvec_t_add = matvec_t_add_k<float, axpy_f>;
  t.ger = ger_k<float, axpy_f>;
  t.minmax = minmax_f;
  return t;
}

template <>
KernelTable<double> avx2_table<double>() {
  KernelTable<double> t;
  t.dot = dot_d;
  t.axpy = axpy_d;
  t.scal = scal_d;
  t.sumsq = sumsq_d;
  t.matvec = matvec_k<double, dot_d>;
  t.matvec_add = matvec_add_k<double, dot_d>;
  t.matvec_t_add = matvec_t_add_k<double, axpy_d>;
  t.ger = ger_k<double, axpy_d>;
  t.minmax = minmax_d;
  return t;
}

} // namespace detail

#else // !WEST_HAVE_AVX2_BUILD

namespace detail {

template <>
KernelTable<float> avx2_table<float>() {
  KernelTable<float> t;
  std::memset(&t, 0, sizeof(t));
  return t;
}

template <>
KernelTable<double> avx2_table<double>() {
  KernelTable<double> t;
  std::memset(&t, 0, sizeof(t));
  return t;
}

} // namespace detail

#endif

} // namespace west::simd
