#include "west/factor.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "west/rng.hpp"
#include "west/simd/kernels.hpp"

using namespace west;

namespace {

// Hand-built 6-word fixture: k=3, n=2, d=4. Both position sub-matrices carry
// the same three rows, so tied and untied layouts must give identical output.
Codebook fixture_codebook() {
  Codebook cb;
  cb.kind = CodingKind::random;
  cb.k = 3;
  cb.n = 2;
  cb.codes = {{1, 2}, {3, 3}, {2, 1}, {1, 3}, {1, 1}, {3, 2}};
  return cb;
}

const double kFixtureRows[3][2] = {{0.1, 1.5}, {1.0, -3.2}, {-1.8, 2.0}};

template <typename T>
void fill_fixture_rows(DenseFactor<T>& df) {
  for (int i = 0; i < (df.tied ? 1 : df.n); ++i)
    for (int s = 1; s <= 3; ++s)
      for (int j = 0; j < df.cols(); ++j)
        df.subs[i].at(s, j) = static_cast<T>(kFixtureRows[s - 1][j]);
}

const double kExpectedConcat[6][4] = {
    {0.1, 1.5, 1.0, -3.2}, {-1.8, 2.0, -1.8, 2.0}, {1.0, -3.2, 0.1, 1.5},
    {0.1, 1.5, -1.8, 2.0}, {0.1, 1.5, 0.1, 1.5},   {-1.8, 2.0, 1.0, -3.2}};

} // namespace

TEST_CASE("block-diagonal lookup concatenates the selected rows") {
  Codebook cb = fixture_codebook();
  auto sf = make_sparse_factor<double>(cb, false);
  for (bool tied : {false, true}) {
    auto df = make_dense_factor<double>(DenseStructure::block_diagonal, tied, 3, 4, 2);
    fill_fixture_rows(df);
    double out[4];
    for (int w = 0; w < 6; ++w) {
      lookup(sf, df, w, out);
      for (int j = 0; j < 4; ++j)
        CHECK(out[j] == doctest::Approx(kExpectedConcat[w][j]));
    }
  }
}

TEST_CASE("band lookup sums the selected rows") {
  Codebook cb = fixture_codebook();
  auto sf = make_sparse_factor<double>(cb, false);
  auto df = make_dense_factor<double>(DenseStructure::band, false, 3, 2, 2);
  fill_fixture_rows(df);
  double out[2];
  lookup(sf, df, 3, out); // code (1,3): (0.1,1.5) + (-1.8,2.0)
  CHECK(out[0] == doctest::Approx(-1.7));
  CHECK(out[1] == doctest::Approx(3.5));
  lookup(sf, df, 1, out); // code (3,3)
  CHECK(out[0] == doctest::Approx(-3.6));
  CHECK(out[1] == doctest::Approx(4.0));
  lookup(sf, df, 4, out); // code (1,1)
  CHECK(out[0] == doctest::Approx(0.2));
  CHECK(out[1] == doctest::Approx(3.0));
}

TEST_CASE("lambda weights scale each selected row") {
  Codebook cb = fixture_codebook();
  auto sf = make_sparse_factor<double>(cb, true);
  sf.lambda.at(0, 0) = 0.5;
  sf.lambda.at(0, 1) = 2.0;
  auto df = make_dense_factor<double>(DenseStructure::block_diagonal, false, 3, 4, 2);
  fill_fixture_rows(df);
  double out[4];
  lookup(sf, df, 0, out); // code (1,2)
  CHECK(out[0] == doctest::Approx(0.05));
  CHECK(out[1] == doctest::Approx(0.75));
  CHECK(out[2] == doctest::Approx(2.0));
  CHECK(out[3] == doctest::Approx(-6.4));
}

TEST_CASE("codes shorter than n read pad rows as zero") {
  Codebook cb;
  cb.kind = CodingKind::language;
  cb.k = 3;
  cb.n = 2;
  cb.codes = {{2}, {1, 3}};
  auto sf = make_sparse_factor<double>(cb, true);
  CHECK(sf.lambda.at(0, 0) == 1.0);
  CHECK(sf.lambda.at(0, 1) == 0.0); // pad position carries no weight

  auto block = make_dense_factor<double>(DenseStructure::block_diagonal, false, 3, 4, 2);
  fill_fixture_rows(block);
  double out[4];
  lookup(sf, block, 0, out);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(-3.2));
  CHECK(out[2] == doctest::Approx(0.0));
  CHECK(out[3] == doctest::Approx(0.0));

  auto band = make_dense_factor<double>(DenseStructure::band, false, 3, 2, 2);
  fill_fixture_rows(band);
  lookup(sf, band, 0, out);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(-3.2));
}

TEST_CASE("reconstruct materializes the same embedding table") {
  Codebook cb = fixture_codebook();
  auto sf = make_sparse_factor<double>(cb, false);
  auto df = make_dense_factor<double>(DenseStructure::block_diagonal, false, 3, 4, 2);
  fill_fixture_rows(df);
  Mat<double> e = reconstruct(sf, df);
  REQUIRE(e.rows == 6);
  REQUIRE(e.cols == 4);
  for (int w = 0; w < 6; ++w)
    for (int j = 0; j < 4; ++j)
      CHECK(e.at(w, j) == doctest::Approx(kExpectedConcat[w][j]));
}

TEST_CASE("lookup agrees with the explicit product over random factors") {
  SplitMix64 rng(2024);
  for (auto structure : {DenseStructure::block_diagonal, DenseStructure::band}) {
    for (bool tied : {false, true}) {
      for (bool weighted : {false, true}) {
        Codebook cb = gen_random_code(5, 3, 40, rng.next());
        auto sf = make_sparse_factor<double>(cb, weighted);
        auto df = make_dense_factor<double>(structure, tied, 5, 6, 3);
        for (auto& sub : df.subs)
          for (std::size_t s = 1; s < sub.rows; ++s)
            for (std::size_t j = 0; j < sub.cols; ++j) sub.at(s, j) = rng.uniform_sym(2.0);
        if (weighted)
          for (int w = 0; w < 40; ++w)
            for (int i = 0; i < 3; ++i) sf.lambda.at(w, i) = rng.uniform_sym(1.5);

        Mat<double> e = reconstruct(sf, df);
        double out[6];
        for (int w = 0; w < 40; ++w) {
          lookup(sf, df, w, out);
          for (int j = 0; j < 6; ++j)
            CHECK(out[j] == doctest::Approx(e.at(w, j)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("lookup output matches across simd variants") {
  if (!simd::variant_available(simd::Variant::avx2)) return;
  testutil::VariantGuard guard;
  SplitMix64 rng(77);
  Codebook cb = gen_random_code(6, 4, 30, 5);
  auto sf = make_sparse_factor<float>(cb, true);
  auto df = make_dense_factor<float>(DenseStructure::band, false, 6, 33, 4);
  for (auto& sub : df.subs)
    for (std::size_t i = sub.cols; i < sub.size(); ++i)
      sub.data()[i] = static_cast<float>(rng.uniform_sym(1.0));
  for (auto& l : sf.lambda.v) l = static_cast<float>(rng.uniform_sym(1.0));

  std::vector<float> a(33), b(33);
  for (int w = 0; w < 30; ++w) {
    simd::force_variant(simd::Variant::scalar);
    lookup(sf, df, w, a.data());
    simd::force_variant(simd::Variant::avx2);
    lookup(sf, df, w, b.data());
    for (int j = 0; j < 33; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-5));
  }
}

namespace {

// Central-difference check of lookup_backward: the lookup is linear in every
// parameter, so the difference quotient is exact up to rounding.
template <typename Getter>
void check_grad(double analytic, Getter&& value_at, double* param) {
  const double eps = 1e-5;
  double saved = *param;
  *param = saved + eps;
  double up = value_at();
  *param = saved - eps;
  double down = value_at();
  *param = saved;
  double numeric = (up - down) / (2 * eps);
  double rel = std::fabs(analytic - numeric) /
               std::max(1e-3, std::fabs(analytic) + std::fabs(numeric));
  CHECK(rel < 1e-9);
}

} // namespace

TEST_CASE("lookup_backward matches finite differences") {
  SplitMix64 rng(31337);
  for (auto structure : {DenseStructure::block_diagonal, DenseStructure::band}) {
    for (bool tied : {false, true}) {
      Codebook cb;
      cb.k = 3;
      cb.n = 2;
      cb.codes = {{1, 2}, {3}, {2, 2}}; // includes a short code and a repeat
      auto sf = make_sparse_factor<double>(cb, true);
      auto df = make_dense_factor<double>(structure, tied, 3, 4, 2);
      for (auto& sub : df.subs)
        for (std::size_t i = sub.cols; i < sub.size(); ++i)
          sub.data()[i] = rng.uniform_sym(1.0);
      for (int w = 0; w < 3; ++w)
        for (int i = 0; i < cb.length(w); ++i) sf.lambda.at(w, i) = rng.uniform_sym(1.0);

      std::vector<double> g(4), out(4);
      for (auto& x : g) x = rng.uniform_sym(1.0);
      const int dim = df.dim;

      for (int w = 0; w < 3; ++w) {
        auto loss = [&]() {
          lookup(sf, df, w, out.data());
          return simd::dot(out.data(), g.data(), static_cast<std::size_t>(dim));
        };
        for (auto& sub : df.subs_g) sub.zero();
        sf.lambda_g.zero();
        lookup(sf, df, w, out.data());
        lookup_backward(sf, df, w, g.data());

        for (std::size_t i = 0; i < df.subs.size(); ++i)
          for (std::size_t p = 0; p < df.subs[i].size(); ++p)
            check_grad(df.subs_g[i].data()[p], loss, df.subs[i].data() + p);
        for (int i = 0; i < cb.n; ++i)
          check_grad(sf.lambda_g.at(w, i), loss, &sf.lambda.at(w, i));

        // pad row and pad-position lambda gradients stay zero
        for (std::size_t i = 0; i < df.subs_g.size(); ++i)
          for (std::size_t j = 0; j < df.subs_g[i].cols; ++j)
            CHECK(df.subs_g[i].at(0, j) == 0.0);
        if (cb.length(w) < cb.n) CHECK(sf.lambda_g.at(w, cb.n - 1) == 0.0);
      }
    }
  }
}

TEST_CASE("dense parameter counts follow the closed forms") {
  // k_eff=3, d=4, n=2
  CHECK(dense_param_count(DenseStructure::block_diagonal, false, 3, 4, 2) == 12);
  CHECK(dense_param_count(DenseStructure::block_diagonal, true, 3, 4, 2) == 6);
  CHECK(dense_param_count(DenseStructure::band, false, 3, 4, 2) == 24);
  CHECK(dense_param_count(DenseStructure::band, true, 3, 4, 2) == 12);
  // tied block-diagonal at k=80, d=200, n=8: the 1000x-compression setting
  CHECK(dense_param_count(DenseStructure::block_diagonal, true, 80, 200, 8) == 2000);
  CHECK_THROWS_WITH(dense_param_count(DenseStructure::block_diagonal, false, 3, 10, 4),
                    doctest::Contains("divide"));
  CHECK_THROWS_WITH(make_dense_factor<double>(DenseStructure::block_diagonal, false, 3, 10, 4),
                    doctest::Contains("divide"));
}

TEST_CASE("factor allocation shapes") {
  auto untied = make_dense_factor<float>(DenseStructure::block_diagonal, false, 5, 8, 2);
  CHECK(untied.subs.size() == 2);
  CHECK(untied.subs[0].rows == 6); // k_eff + pad row
  CHECK(untied.subs[0].cols == 4);
  CHECK(untied.sub(1).data() != untied.sub(0).data());

  auto tied = make_dense_factor<float>(DenseStructure::band, true, 5, 8, 2);
  CHECK(tied.subs.size() == 1);
  CHECK(tied.subs[0].cols == 8);
  CHECK(tied.sub(1).data() == tied.sub(0).data()); // all positions share the matrix

  Codebook cb;
  cb.k = 3;
  cb.n = 2;
  cb.codes = {{1, 2}, {3}};
  CHECK(lambda_param_count(cb) == 3);
}

TEST_CASE("mismatched codebook and dense factor shapes are rejected") {
  Codebook cb = fixture_codebook(); // k_eff 3, n 2
  auto sf = make_sparse_factor<double>(cb, false);
  double out[4];
  auto wrong_k = make_dense_factor<double>(DenseStructure::block_diagonal, false, 4, 4, 2);
  CHECK_THROWS_WITH(lookup(sf, wrong_k, 0, out), doctest::Contains("does not match"));
  auto wrong_n = make_dense_factor<double>(DenseStructure::band, false, 3, 4, 3);
  CHECK_THROWS_WITH(lookup(sf, wrong_n, 0, out), doctest::Contains("does not match"));
}
