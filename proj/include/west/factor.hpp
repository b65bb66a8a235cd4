#pragma once

#include <cstdint>
#include <vector>

#include "west/codebook.hpp"
#include "west/mat.hpp"

namespace west {

enum class DenseStructure { block_diagonal, band };

const char* dense_structure_name(DenseStructure s);
DenseStructure dense_structure_from_name(std::string_view name);

// The structured sparse factor: the codebook fixes the nonzero pattern, the
// lambda matrix holds the nonzero values. Unweighted factors keep lambda
// frozen at 1 (0 at pad positions); weighted factors train it.
template <typename T>
struct SparseFactor {
  const Codebook* codebook = nullptr;
  bool weighted = false;
  Mat<T> lambda;   // V x n
  Mat<T> lambda_g; // gradient, same shape

  T weight(int w, int i) const { return lambda.at(w, i); }
};

// The structured dense factor: n sub-unit matrices, each (k_eff + 1) rows
// (row 0 is the frozen all-zero pad row) by d/n (block-diagonal) or d (band)
// columns. Tied factors back all positions with one matrix.
template <typename T>
struct DenseFactor {
  DenseStructure structure = DenseStructure::block_diagonal;
  bool tied = false;
  int n = 0;
  int k_eff = 0;
  int dim = 0;
  std::vector<Mat<T>> subs;   // tied ? 1 : n
  std::vector<Mat<T>> subs_g; // parallel gradients

  int cols() const { return structure == DenseStructure::block_diagonal ? dim / n : dim; }
  Mat<T>& sub(int i) { return subs[tied ? 0 : i]; }
  const Mat<T>& sub(int i) const { return subs[tied ? 0 : i]; }
  Mat<T>& sub_g(int i) { return subs_g[tied ? 0 : i]; }
};

template <typename T>
SparseFactor<T> make_sparse_factor(const Codebook& cb, bool weighted);

template <typename T>
DenseFactor<T> make_dense_factor(DenseStructure structure, bool tied, int k_eff, int dim, int n);

// Eq.-style lookups. out must hold dim values.
template <typename T>
void lookup_concat(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out);
template <typename T>
void lookup_sum(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out);
template <typename T>
void lookup(const SparseFactor<T>& sf, const DenseFactor<T>& df, int w, T* out);

// Accumulates gradients of a lookup into df.subs_g and sf.lambda_g.
template <typename T>
void lookup_backward(SparseFactor<T>& sf, DenseFactor<T>& df, int w, const T* dout);

// The V x d product C * E^c, materialized explicitly. Testing oracle: this
// path never calls the lookup kernels.
template <typename T>
Mat<T> reconstruct(const SparseFactor<T>& sf, const DenseFactor<T>& df);

// Trainable dense-factor parameters by the closed forms: block-diagonal
// k_eff*d (tied: k_eff*d/n), band k_eff*d*n (tied: k_eff*d). The pad row is
// frozen and not counted.
std::int64_t dense_param_count(DenseStructure structure, bool tied, int k_eff, int dim, int n);

// Number of real (non-pad) lambda entries, i.e. the sum of code lengths.
std::int64_t lambda_param_count(const Codebook& cb);

} // namespace west
