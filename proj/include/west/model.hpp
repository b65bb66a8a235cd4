#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "west/codebook.hpp"
#include "west/corpus.hpp"
#include "west/factor.hpp"
#include "west/mat.hpp"

namespace west {

enum class EmbeddingMode { full, west };
enum class HeadMode { full, west, char_normalized };

const char* embedding_mode_name(EmbeddingMode m);
EmbeddingMode embedding_mode_from_name(std::string_view name);
const char* head_mode_name(HeadMode m);
HeadMode head_mode_from_name(std::string_view name);

// Shape of one factorized matrix (embedding or softmax side).
struct FactorConfig {
  CodingKind coding = CodingKind::random;
  int k = 8;
  int n = 2;
  int t = 0; // hybrid cutoff
  DenseStructure structure = DenseStructure::block_diagonal;
  bool tied = false;
  bool weighted = false; // train the lambda entries of C
};

struct ModelConfig {
  int vocab_size = 0;
  int emb_dim = 64; // d
  int hidden = 64;
  int layers = 1;
  int projection = 0; // 0 = none
  EmbeddingMode emb_mode = EmbeddingMode::full;
  FactorConfig emb;
  HeadMode head_mode = HeadMode::full;
  FactorConfig soft;
  bool soft_bias = false; // per-word bias for the west head (full always has one)
  double init_range = 0.05;
  std::uint64_t seed = 1;

  // d_s: the head consumes the recurrent stack's output
  int softmax_dim() const { return projection > 0 ? projection : hidden; }
};

// One LSTM layer, gates packed [i, f, g, o]. The recurrent input is the
// layer's own output, i.e. the projected vector when a projection is present.
template <typename T>
struct LstmLayer {
  int in_dim = 0;
  int hidden = 0;
  int proj = 0; // 0 = none
  Mat<T> wx, wx_g; // 4h x in_dim
  Mat<T> wh, wh_g; // 4h x out_dim
  Mat<T> b, b_g;   // 1 x 4h
  Mat<T> p, p_g;   // proj x hidden

  int out_dim() const { return proj > 0 ? proj : hidden; }
};

// Per-layer recurrent activations (h is the layer output, c the cell).
template <typename T>
struct RecurrentState {
  std::vector<std::vector<T>> h, c;
};

// Everything one timestep's backward pass needs, per layer.
template <typename T>
struct LstmStepCache {
  std::vector<T> x;      // layer input
  std::vector<T> h_prev; // previous output (recurrent input)
  std::vector<T> c_prev;
  std::vector<T> gates; // 4h, post-activation
  std::vector<T> c;
  std::vector<T> tanh_c;
  std::vector<T> h_raw; // pre-projection
  std::vector<T> h_out;
};

// Handle to one trainable tensor, produced fresh by param_refs(): the refs
// hold raw pointers into the model, so they do not survive a move.
template <typename T>
struct ParamRef {
  std::string name;
  Mat<T>* value;
  Mat<T>* grad;
  bool pad_row0 = false; // row 0 is the frozen pad row
  bool lambda = false;   // sparse-factor weights get their own lr multiplier
};

template <typename T>
struct Model {
  ModelConfig cfg;
  // Heap-allocated so the sparse factors' codebook pointers survive moves.
  std::unique_ptr<Codebook> emb_codebook;  // emb_mode == west
  std::unique_ptr<Codebook> soft_codebook; // head_mode != full

  Mat<T> emb_table, emb_table_g; // full embedding: V x d
  SparseFactor<T> emb_sparse;
  DenseFactor<T> emb_dense;

  std::vector<LstmLayer<T>> lstm;

  Mat<T> soft_w, soft_w_g; // full head: V x d_s
  Mat<T> soft_b, soft_b_g; // 1 x V; full head always, west head when soft_bias
  SparseFactor<T> soft_sparse;
  DenseFactor<T> soft_dense;

  int vocab() const { return cfg.vocab_size; }
  bool has_soft_bias() const {
    return cfg.head_mode == HeadMode::full ||
           (cfg.head_mode == HeadMode::west && cfg.soft_bias);
  }
  const Codebook& emb_cb() const { return *emb_codebook; }
  const Codebook& soft_cb() const { return *soft_codebook; }
  RecurrentState<T> zero_state() const;
};

// Validates the config, generates codebooks from the vocabulary, allocates
// all tensors, and initializes them from named sub-seeds of cfg.seed.
template <typename T>
Model<T> build_model(const ModelConfig& cfg, const Vocabulary& vocab);

// Allocation + init split out for checkpoint loading, where the codebooks
// come from the file rather than the generators.
template <typename T>
Model<T> allocate_model(const ModelConfig& cfg, Codebook emb_cb, Codebook soft_cb);
template <typename T>
void init_params(Model<T>& m);

template <typename T>
std::vector<ParamRef<T>> param_refs(Model<T>& m);

template <typename T>
void zero_grads(Model<T>& m);

// Clears gradients that must never move: dense-factor pad rows. Called
// before every optimizer step.
template <typename T>
void mask_frozen_grads(Model<T>& m);

// --- embedding ---
template <typename T>
void embed_forward(const Model<T>& m, int w, T* out); // out: emb_dim
template <typename T>
void embed_backward(Model<T>& m, int w, const T* dout);

// --- recurrent core ---
// Runs the stack for one input vector, updating state in place. cache may be
// null for inference. out receives the top layer's output (softmax_dim).
template <typename T>
void core_forward(const Model<T>& m, const T* x, RecurrentState<T>& state,
                  std::type_identity_t<std::vector<LstmStepCache<T>>*> cache, T* out);

// One timestep of reverse BPTT. dout is the loss gradient w.r.t. this step's
// top output; dstate carries dh/dc backwards across steps (updated in
// place); dx receives the gradient w.r.t. the step's input embedding.
template <typename T>
void core_backward(Model<T>& m, const std::vector<LstmStepCache<T>>& cache, const T* dout,
                   RecurrentState<T>& dstate, T* dx);

// --- softmax heads ---
// Sub-unit score table s[i][j] = E^i_j . h (slice of h for block-diagonal),
// shape n x (k_eff+1) with column 0 (pad) identically zero. This is the
// shared first stage of the west and char-normalized heads; the full
// vocabulary matrix is never formed.
template <typename T>
void head_score_table(const Model<T>& m, const T* h, Mat<T>& s);

// l_w = sum_i lambda(w,i) * s[i][c_i(w)] + b_w
template <typename T>
void west_logits(const Model<T>& m, const Mat<T>& s, T* logits);

template <typename T>
void full_logits(const Model<T>& m, const T* h, T* logits);

// log P(w|h) for the word-normalized heads (full, west). Throws
// "non-finite logits" if any logit is not finite.
template <typename T>
void log_posterior(const Model<T>& m, const T* h, T* logprobs);
template <typename T>
void log_posterior_from_logits(const T* logits, int v, T* logprobs);

// log P(w|h) under the char-normalized head: each code position (including
// the <eow> terminator) is softmax-normalized over the alphabet alone, so
// the word distribution leaks probability off-vocabulary.
template <typename T>
T char_normalized_log_prob(const Model<T>& m, const Mat<T>& s, int w);
template <typename T>
T char_normalized_log_prob(const Model<T>& m, const T* h, int w);

// log-sum-exp over the alphabet entries row[1..k_eff] of one score-table row
// (the char-normalized per-position normalizer). Throws "non-finite logits".
template <typename T>
T char_position_logz(const T* row, int k_eff);

// --- head backward stages (driven by the trainer) ---
// Accumulates dsub/dh from a score-table gradient; ds column 0 must be zero.
template <typename T>
void score_table_backward(Model<T>& m, const T* h, const Mat<T>& ds, T* dh);

// dlogits -> dsub/dlambda/dbias/dh for the west head (s is the cached
// forward score table).
template <typename T>
void west_head_backward(Model<T>& m, const T* h, const Mat<T>& s, const T* dlogits, T* dh);

template <typename T>
void full_head_backward(Model<T>& m, const T* h, const T* dlogits, T* dh);

// --- whole-model step ---
// Embeds word w, advances the recurrent state, applies the head. Writes V
// log-probabilities (leaky ones for the char-normalized head).
template <typename T>
void forward_step(const Model<T>& m, int w, RecurrentState<T>& state, T* logprobs);

} // namespace west
