#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "west/model.hpp"

namespace west {

struct Hyperparameters {
  double lr = 1.0;
  double lr_decay = 0.5; // multiplied in per epoch past decay_start
  int decay_start = 3;   // last epoch at the initial rate (epochs are 1-based)
  int epochs = 5;
  int batch_size = 16;
  int bptt = 35;
  double clip = 5.0;
  double lambda_lr_mult = 1.0; // separate rate for sparse-factor weights
};

void validate_hyperparameters(const Hyperparameters& hp);

// One BPTT chunk: inputs/targets indexed [t * batch_size + b].
struct Batch {
  int steps = 0;
  int batch_size = 0;
  std::vector<int> inputs;
  std::vector<int> targets;

  int input(int t, int b) const { return inputs[t * batch_size + b]; }
  int target(int t, int b) const { return targets[t * batch_size + b]; }
};

// Continuous-stream batching: the encoded stream is cut into batch_size
// contiguous segments walked in parallel, bptt targets at a time, so
// recurrent state carries across chunks within an epoch. The input at each
// target position is the preceding stream token (<eos> at the very start).
class StreamBatcher {
 public:
  StreamBatcher(const std::vector<int>& stream, int eos_index, int batch_size, int bptt);
  int num_batches() const { return num_batches_; }
  Batch batch(int index) const;

 private:
  std::vector<int> inputs_, targets_; // [b * seg_len_ + pos]
  int batch_size_, bptt_, seg_len_, num_batches_;
};

// Reusable buffers for loss_and_grads; contents are scratch.
template <typename T>
struct BpttWorkspace {
  std::vector<std::vector<LstmStepCache<T>>> tape; // [t*B+b][layer]
  Mat<T> h_out;   // (steps*B) x d_s
  Mat<T> logprob; // (steps*B) x V, word-normalized heads only
  std::vector<Mat<T>> score; // per (t,b) score tables, factorized heads only
  std::vector<T> logits, dlogits, dh, dx, x;
  Mat<T> ds; // char-head score-table gradient
};

// Mean cross-entropy over the batch plus gradients for every trainable
// tensor (accumulated into the model's grad buffers, which the caller
// zeroes). states carry the continuous-stream recurrent state per segment
// and are advanced in place; gradients truncate at the batch boundary.
template <typename T>
double loss_and_grads(Model<T>& m, const Batch& batch, std::vector<RecurrentState<T>>& states,
                      BpttWorkspace<T>& ws);

// Forward-only loss with fresh zero states (the finite-difference oracle).
template <typename T>
double loss_only(const Model<T>& m, const Batch& batch);

// Global gradient norm across all trainable tensors.
template <typename T>
double grad_norm(Model<T>& m);

// Rescales gradients so the global norm is at most clip; returns the
// pre-clip norm.
template <typename T>
double clip_gradients(Model<T>& m, double clip);

// mask frozen rows, clip, then value -= lr * grad (lambda tensors use
// lr * lambda_lr_mult).
template <typename T>
void sgd_step(Model<T>& m, const Hyperparameters& hp, double lr);

struct EpochStats {
  int epoch = 0;
  double lr = 0;
  double train_ppl = 0;
  double test_ppl = 0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
};

// Full training loop: per epoch, walk the batches, step SGD, record train
// perplexity (from the epoch's accumulated loss) and test perplexity.
// Deterministic given config and seed. Throws "training diverged" when an
// epoch's mean loss exceeds twice the uniform-model loss (log V for
// word-normalized heads, mean code length * log k_eff for the
// char-normalized head). Progress lines go to log when set.
template <typename T>
TrainResult train(Model<T>& m, const std::vector<int>& train_stream,
                  const std::vector<int>& test_stream, int eos_index, const Hyperparameters& hp,
                  std::ostream* log = nullptr);

// exp(mean -log P(target)) over the stream, word-level for every head (the
// char-normalized head scores whole words, so the numbers are comparable).
template <typename T>
double perplexity(const Model<T>& m, const std::vector<int>& stream, int eos_index);

// Unigram-model perplexity of the test stream under train-stream MLE counts
// (the classical baseline any trained model must beat).
double unigram_perplexity(const std::vector<int>& train_stream,
                          const std::vector<int>& test_stream, int vocab_size);

struct GradCheckResult {
  double max_rel_err = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
};

// Central-difference verification of every trainable scalar: rel err =
// |a-n| / max(1e-3, |a|+|n|). Throws "invalid epsilon" when epsilon <= 0.
template <typename T>
GradCheckResult grad_check(Model<T>& m, const Batch& batch, double epsilon);

// Table-style trainable-parameter accounting (embedding / recurrent stack /
// softmax) plus codebook storage costs. Codebooks are needed only to count
// language-coding lambda entries and alphabet sizes; pass null otherwise.
struct ParamReport {
  std::int64_t emb = 0;
  std::int64_t lstm = 0;
  std::int64_t soft = 0;
  std::int64_t emb_codebook_bits = 0;      // explicit storage, V*n*ceil(log2 k_eff)
  std::int64_t soft_codebook_bits = 0;
  std::int64_t emb_codebook_succinct = 0;  // seed-per-word form (0 for language codes)
  std::int64_t soft_codebook_succinct = 0;

  std::int64_t total() const { return emb + lstm + soft; }
};

ParamReport param_report(const ModelConfig& cfg, const Codebook* emb_cb = nullptr,
                         const Codebook* soft_cb = nullptr);

} // namespace west
