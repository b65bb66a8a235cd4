#include "west/factor.hpp"

#include <cstring>
#include <stdexcept>

#include "west/simd/kernels.hpp"

namespace west {

const char* dense_structure_name(DenseStructure s) {
  return s == DenseStructure::block_diagonal ? "block_diagonal" : "band";
}

DenseStructure dense_structure_from_name(std::string_view name) {
  if (name == "block_diagonal") return DenseStructure::block_diagonal;
  if (name == "band") return DenseStructure::band;
  throw std::runtime_error("unknown dense structure: " + std::string(name));
}

template <typename T>
SparseFactor<T> make_sparse_factor(const Codebook& cb, bool weighted) {
  SparseFactor<T> sf;
  sf.codebook = &cb;
  sf.weighted = weighted;
  sf.lambda.resize(cb.vocab_size(), cb.n);
  sf.lambda_g.resize(cb.vocab_size(), cb.n);
  for (int w = 0; w < cb.vocab_size(); ++w)
    for (int i = 0; i < cb.length(w); ++i) sf.lambda.at(w, i) = T(1);
  return sf;
}

template <typename T>
DenseFactor<T> make_dense_factor(DenseStructure structure, bool tied, int k_eff, int dim, int n) {
  if (structure == DenseStructure::block_diagonal && dim % n != 0)
    throw std::runtime_error("block-diagonal structure requires n to divide d");
  DenseFactor<T> df;
  df.structure = structure;
  df.tied = tied;
  df.n = n;
  df.k_eff = k_eff;
  df.dim = dim;
  int count = tied ? 1 : n;
  df.subs.assign(count, Mat<T>(k_eff + 1, df.cols()));
  df.subs_g.assign(count, Mat<T>(k_eff + 1, df.cols()));
  return df;
}

namespace {

template <typename T>
void check_shapes(const SparseFactor<T>& sf, const DenseFactor<T>& df) {
  if (sf.codebook == nullptr) throw std::runtime_error("sparse factor has no codebook");
  if (sf.codebook->k_eff() != df.k_eff)
    throw std::runtime_error("codebook alphabet does not match dense factor rows");
  if (sf.codebook->n != df.n)
    throw std::runtime_error("codebook length bound does not match dense factor positions");
}

} // namespace

template <typename T>
void lookup_concat(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out) {
  check_shapes(sf, df);
  const int cols = df.cols();
  for (int i = 0; i < df.n; ++i) {
    T* block = out + static_cast<std::size_t>(i) * cols;
    int sym = sf.codebook->symbol(w, i);
    T lam = sf.weight(w, i);
    const T* row = df.sub(i).row(sym);
    if (sym == 0) {
      std::memset(block, 0, sizeof(T) * cols);
    } else if (lam == T(1)) {
      // unweighted path is a pure gather
      std::memcpy(block, row, sizeof(T) * cols);
    } else {
      for (int j = 0; j < cols; ++j) block[j] = lam * row[j];
    }
  }
}

template <typename T>
void lookup_sum(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out) {
  check_shapes(sf, df);
  const int cols = df.cols();
  std::memset(out, 0, sizeof(T) * cols);
  for (int i = 0; i < df.n; ++i) {
    int sym = sf.codebook->symbol(w, i);
    if (sym == 0) continue;
    simd::axpy(sf.weight(w, i), df.sub(i).row(sym), out, static_cast<std::size_t>(cols));
  }
}

template <typename T>
void lookup(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out) {
  if (df.structure == DenseStructure::block_diagonal) lookup_concat(sf, df, w, out);
  else lookup_sum(sf, df, w, out);
}

template <typename T>
void lookup_backward(SparseFactor<T>& sf, DenseFactor<T>& df, int w, const T* dout) {
  const int cols = df.cols();
  const bool block = df.structure == DenseStructure::block_diagonal;
  for (int i = 0; i < df.n; ++i) {
    int sym = sf.codebook->symbol(w, i);
    if (sym == 0) continue;
    const T* dblock = block ? dout + static_cast<std::size_t>(i) * cols : dout;
    T lam = sf.weight(w, i);
    simd::axpy(lam, dblock, df.sub_g(i).row(sym), static_cast<std::size_t>(cols));
    if (sf.weighted)
      sf.lambda_g.at(w, i) +=
          simd::dot(df.sub(i).row(sym), dblock, static_cast<std::size_t>(cols));
  }
}

template <typename T>
Mat<T> reconstruct(const SparseFactor<T>& sf, const DenseFactor<T>& df) {
  check_shapes(sf, df);
  const Codebook& cb = *sf.codebook;
  const int v = cb.vocab_size();
  const int nk = df.n * df.k_eff;
  const int cols = df.cols();

  // materialize C (V x n*k_eff): nonzero at column i*k_eff + (sym-1)
  Mat<T> c_mat(v, nk);
  for (int w = 0; w < v; ++w)
    for (int i = 0; i < cb.length(w); ++i)
      c_mat.at(w, i * df.k_eff + cb.codes[w][i] - 1) = sf.weight(w, i);

  // materialize E^c (n*k_eff x d)
  Mat<T> ec(nk, df.dim);
  for (int i = 0; i < df.n; ++i) {
    const Mat<T>& sub = df.sub(i);
    int col0 = df.structure == DenseStructure::block_diagonal ? i * cols : 0;
    for (int s = 1; s <= df.k_eff; ++s)
      for (int j = 0; j < cols; ++j) ec.at(i * df.k_eff + s - 1, col0 + j) = sub.at(s, j);
  }

  // plain triple-loop product, independent of the lookup kernels
  Mat<T> e(v, df.dim);
  for (int w = 0; w < v; ++w)
    for (int m = 0; m < nk; ++m) {
      T cw = c_mat.at(w, m);
      if (cw == T(0)) continue;
      for (int j = 0; j < df.dim; ++j) e.at(w, j) += cw * ec.at(m, j);
    }
  return e;
}

std::int64_t dense_param_count(DenseStructure structure, bool tied, int k_eff, int dim, int n) {
  if (structure == DenseStructure::block_diagonal) {
    if (dim % n != 0) throw std::runtime_error("block-diagonal structure requires n to divide d");
    return tied ? static_cast<std::int64_t>(k_eff) * (dim / n)
                : static_cast<std::int64_t>(k_eff) * dim;
  }
  return tied ? static_cast<std::int64_t>(k_eff) * dim
              : static_cast<std::int64_t>(k_eff) * dim * n;
}

std::int64_t lambda_param_count(const Codebook& cb) {
  std::int64_t total = 0;
  for (int w = 0; w < cb.vocab_size(); ++w) total += cb.length(w);
  return total;
}

template SparseFactor<float> make_sparse_factor<float>(const Codebook&, bool);
template SparseFactor<double> make_sparse_factor<double>(const Codebook&, bool);
template DenseFactor<float> make_dense_factor<float>(DenseStructure, bool, int, int, int);
template DenseFactor<double> make_dense_factor<double>(DenseStructure, bool, int, int, int);
template void lookup_concat<float>(const SparseFactor<float>&, const DenseFactor<float>&, int, float*);
template void lookup_concat<double>(const SparseFactor<double>&, const DenseFactor<double>&, int, double*);
template void lookup_sum<float>(const SparseFactor<float>&, const DenseFactor<float>&, int, float*);
template void lookup_sum<double>(const SparseFactor<double>&, const DenseFactor<double>&, int, double*);
template void lookup<float>(const SparseFactor<float>&, const DenseFactor<float>&, int, float*);
template void lookup<double>(const SparseFactor<double>&, const DenseFactor<double>&, int, double*);
template void lookup_backward<float>(SparseFactor<float>&, DenseFactor<float>&, int, const float*);
template void lookup_backward<double>(SparseFactor<double>&, DenseFactor<double>&, int, const double*);
template Mat<float> reconstruct<float>(const SparseFactor<float>&, const DenseFactor<float>&);
template Mat<double> reconstruct<double>(const SparseFactor<double>&, const DenseFactor<double>&);

} // namespace west
