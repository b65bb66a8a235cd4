#include "west/simd/kernels.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

using namespace west;
using testutil::random_vec;

TEST_CASE("dot/axpy/scal/sumsq known values") {
  double x[] = {1, 2, 3};
  double y[] = {4, 5, 6};
  CHECK(simd::dot(x, y, 3) == doctest::Approx(32.0));
  CHECK(simd::sumsq(x, 3) == doctest::Approx(14.0));

  double acc[] = {10, 20, 30};
  simd::axpy(2.0, x, acc, 3);
  CHECK(acc[0] == doctest::Approx(12.0));
  CHECK(acc[2] == doctest::Approx(36.0));

  simd::scal(0.5, acc, 3);
  CHECK(acc[0] == doctest::Approx(6.0));
  CHECK(acc[1] == doctest::Approx(12.0));
}

TEST_CASE("matvec family known values") {
  // A = [[1,2,3],[4,5,6]], x = [1,1,1]
  double a[] = {1, 2, 3, 4, 5, 6};
  double x[] = {1, 1, 1};
  double y[2] = {0, 0};
  simd::matvec(a, x, y, 2, 3);
  CHECK(y[0] == doctest::Approx(6.0));
  CHECK(y[1] == doctest::Approx(15.0));

  simd::matvec_add(a, x, y, 2, 3);
  CHECK(y[0] == doctest::Approx(12.0));
  CHECK(y[1] == doctest::Approx(30.0));

  // x += A^T y with y = [1,2]: columns dotted with y
  double xt[3] = {0, 0, 0};
  double yv[] = {1, 2};
  simd::matvec_t_add(a, yv, xt, 2, 3);
  CHECK(xt[0] == doctest::Approx(9.0));
  CHECK(xt[1] == doctest::Approx(12.0));
  CHECK(xt[2] == doctest::Approx(15.0));

  // A += 2 * x y^T, outer product of [1,1,1] (rows) and [1,2] — shapes: A is
  // rows x cols with x length rows, y length cols
  double b[] = {0, 0, 0, 0};
  double u[] = {1, 2};
  double v[] = {3, 4};
  simd::ger(b, u, v, 2, 2, 2.0);
  CHECK(b[0] == doctest::Approx(6.0));
  CHECK(b[1] == doctest::Approx(8.0));
  CHECK(b[2] == doctest::Approx(12.0));
  CHECK(b[3] == doctest::Approx(16.0));
}

TEST_CASE("minmax known values") {
  float x[] = {3.0f, -7.0f, 2.5f, 11.0f, 0.0f};
  float mn = 0, mx = 0;
  simd::minmax(x, 5, &mn, &mx);
  CHECK(mn == doctest::Approx(-7.0f));
  CHECK(mx == doctest::Approx(11.0f));

  double single = 4.0;
  double dmn = 0, dmx = 0;
  simd::minmax(&single, 1, &dmn, &dmx);
  CHECK(dmn == doctest::Approx(4.0));
  CHECK(dmx == doctest::Approx(4.0));
}

TEST_CASE("variant dispatch reports a usable table") {
  CHECK(simd::variant_available(simd::Variant::scalar));
  auto v = simd::active_variant();
  CHECK((v == simd::Variant::scalar || v == simd::Variant::avx2));
  CHECK(simd::variant_name(simd::Variant::scalar) == std::string("scalar"));
  CHECK(simd::variant_name(simd::Variant::avx2) == std::string("avx2"));
}

TEST_CASE("forcing an unavailable variant throws") {
  if (!simd::variant_available(simd::Variant::avx2)) {
    CHECK_THROWS_WITH(simd::force_variant(simd::Variant::avx2),
                      doctest::Contains("simd variant unavailable"));
  }
}

namespace {

// Runs every kernel on both variants over one size and compares. Vector
// lengths are chosen to exercise full SIMD blocks, remainders, and the
// scalar tails.
template <typename T>
void check_equivalence(std::size_t n, std::uint64_t seed, double tol) {
  auto x = random_vec<T>(n, seed);
  auto y = random_vec<T>(n, seed + 1);
  std::size_t rows = n, cols = (seed % 7) + 1;
  auto a = random_vec<T>(rows * cols, seed + 2);
  auto xc = random_vec<T>(cols, seed + 3);
  auto yr = random_vec<T>(rows, seed + 4);

  struct Out {
    T dot, sumsq, mn, mx;
    std::vector<T> axpy, scal, mv, mva, mvt, ger;
  };
  auto run = [&](simd::Variant v) {
    simd::force_variant(v);
    Out o;
    o.dot = simd::dot(x.data(), y.data(), n);
    o.sumsq = simd::sumsq(x.data(), n);
    simd::minmax(x.data(), n, &o.mn, &o.mx);
    o.axpy = y;
    simd::axpy(T(0.37), x.data(), o.axpy.data(), n);
    o.scal = x;
    simd::scal(T(-1.25), o.scal.data(), n);
    o.mv.assign(rows, T(0));
    simd::matvec(a.data(), xc.data(), o.mv.data(), rows, cols);
    o.mva = yr;
    simd::matvec_add(a.data(), xc.data(), o.mva.data(), rows, cols);
    o.mvt = xc;
    simd::matvec_t_add(a.data(), yr.data(), o.mvt.data(), rows, cols);
    o.ger = a;
    simd::ger(o.ger.data(), yr.data(), xc.data(), rows, cols, T(0.81));
    return o;
  };

  Out s = run(simd::Variant::scalar);
  Out f = run(simd::Variant::avx2);

  CHECK(s.dot == doctest::Approx(f.dot).epsilon(tol));
  CHECK(s.sumsq == doctest::Approx(f.sumsq).epsilon(tol));
  CHECK(s.mn == f.mn);
  CHECK(s.mx == f.mx);
  auto check_vec = [&](const std::vector<T>& u, const std::vector<T>& w) {
    REQUIRE(u.size() == w.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(u[i] == doctest::Approx(w[i]).epsilon(tol));
  };
  check_vec(s.axpy, f.axpy);
  check_vec(s.scal, f.scal);
  check_vec(s.mv, f.mv);
  check_vec(s.mva, f.mva);
  check_vec(s.mvt, f.mvt);
  check_vec(s.ger, f.ger);
}

} // namespace

TEST_CASE("scalar and avx2 variants agree") {
  if (!simd::variant_available(simd::Variant::avx2)) {
    MESSAGE("avx2 not available on this host; equivalence check skipped");
    return;
  }
  testutil::VariantGuard guard;
  std::uint64_t seed = 12345;
  for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 32u, 33u, 100u, 1000u}) {
    check_equivalence<float>(n, seed++, 1e-4);
    check_equivalence<double>(n, seed++, 1e-12);
  }
}

TEST_CASE("fixed accumulation order is reproducible within a variant") {
  testutil::VariantGuard guard;
  auto x = random_vec<double>(513, 99);
  auto y = random_vec<double>(513, 100);
  for (auto v : {simd::Variant::scalar, simd::Variant::avx2}) {
    if (!simd::variant_available(v)) continue;
    simd::force_variant(v);
    double first = simd::dot(x.data(), y.data(), x.size());
    for (int rep = 0; rep < 5; ++rep)
      CHECK(simd::dot(x.data(), y.data(), x.size()) == first);
  }
}
