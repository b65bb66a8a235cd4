#include "west/training.hpp"

#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "west/simd/kernels.hpp"

namespace west {

void validate_hyperparameters(const Hyperparameters& hp) {
  if (!(hp.lr > 0)) throw std::runtime_error("invalid hyperparameters: lr must be positive");
  if (!(hp.lr_decay > 0))
    throw std::runtime_error("invalid hyperparameters: lr_decay must be positive");
  if (hp.decay_start < 0)
    throw std::runtime_error("invalid hyperparameters: decay_start must be nonnegative");
  if (hp.epochs < 1) throw std::runtime_error("invalid hyperparameters: epochs must be positive");
  if (hp.batch_size < 1)
    throw std::runtime_error("invalid hyperparameters: batch_size must be positive");
  if (hp.bptt < 1) throw std::runtime_error("invalid hyperparameters: bptt must be positive");
  if (!(hp.clip > 0)) throw std::runtime_error("invalid hyperparameters: clip must be positive");
  if (!(hp.lambda_lr_mult > 0))
    throw std::runtime_error("invalid hyperparameters: lambda_lr_mult must be positive");
}

StreamBatcher::StreamBatcher(const std::vector<int>& stream, int eos_index, int batch_size,
                             int bptt)
    : batch_size_(batch_size), bptt_(bptt) {
  if (stream.empty()) throw std::runtime_error("empty stream");
  seg_len_ = static_cast<int>(stream.size()) / batch_size;
  if (seg_len_ < 1) throw std::runtime_error("stream shorter than the batch size");
  num_batches_ = (seg_len_ + bptt - 1) / bptt;
  inputs_.resize(static_cast<std::size_t>(batch_size) * seg_len_);
  targets_.resize(static_cast<std::size_t>(batch_size) * seg_len_);
  for (int b = 0; b < batch_size; ++b)
    for (int p = 0; p < seg_len_; ++p) {
      std::size_t global = static_cast<std::size_t>(b) * seg_len_ + p;
      inputs_[global] = global == 0 ? eos_index : stream[global - 1];
      targets_[global] = stream[global];
    }
}

Batch StreamBatcher::batch(int index) const {
  if (index < 0 || index >= num_batches_) throw std::runtime_error("batch index out of range");
  Batch out;
  out.batch_size = batch_size_;
  out.steps = std::min(bptt_, seg_len_ - index * bptt_);
  out.inputs.resize(static_cast<std::size_t>(out.steps) * batch_size_);
  out.targets.resize(static_cast<std::size_t>(out.steps) * batch_size_);
  for (int t = 0; t < out.steps; ++t)
    for (int b = 0; b < batch_size_; ++b) {
      std::size_t src = static_cast<std::size_t>(b) * seg_len_ + index * bptt_ + t;
      out.inputs[static_cast<std::size_t>(t) * batch_size_ + b] = inputs_[src];
      out.targets[static_cast<std::size_t>(t) * batch_size_ + b] = targets_[src];
    }
  return out;
}

namespace {

template <typename T>
void resize_workspace(BpttWorkspace<T>& ws, const Model<T>& m, int steps, int batch_size) {
  const std::size_t cells = static_cast<std::size_t>(steps) * batch_size;
  const std::size_t v = static_cast<std::size_t>(m.vocab());
  const std::size_t ds = static_cast<std::size_t>(m.cfg.softmax_dim());
  ws.tape.resize(cells);
  if (ws.h_out.rows != cells || ws.h_out.cols != ds) ws.h_out.resize(cells, ds);
  if (m.cfg.head_mode != HeadMode::char_normalized &&
      (ws.logprob.rows != cells || ws.logprob.cols != v))
    ws.logprob.resize(cells, v);
  if (m.cfg.head_mode != HeadMode::full) ws.score.resize(cells);
  ws.logits.resize(v);
  ws.dlogits.resize(v);
  ws.dh.resize(ds);
  ws.dx.resize(m.cfg.emb_dim);
  ws.x.resize(m.cfg.emb_dim);
}

} // namespace

template <typename T>
double loss_and_grads(Model<T>& m, const Batch& batch, std::vector<RecurrentState<T>>& states,
                      BpttWorkspace<T>& ws) {
  const int steps = batch.steps, bsz = batch.batch_size;
  if (steps < 1 || bsz < 1) throw std::runtime_error("empty batch");
  if (static_cast<int>(states.size()) != bsz)
    throw std::runtime_error("state count does not match the batch size");
  const int v = m.vocab();
  const HeadMode head = m.cfg.head_mode;
  resize_workspace(ws, m, steps, bsz);

  double loss = 0;
  for (int t = 0; t < steps; ++t)
    for (int b = 0; b < bsz; ++b) {
      const std::size_t cell = static_cast<std::size_t>(t) * bsz + b;
      embed_forward(m, batch.input(t, b), ws.x.data());
      core_forward(m, ws.x.data(), states[b], &ws.tape[cell], ws.h_out.row(cell));

      const int y = batch.target(t, b);
      if (y < 0 || y >= v) throw std::runtime_error("word index out of range");
      double lp = 0;
      try {
        switch (head) {
          case HeadMode::full:
            full_logits(m, ws.h_out.row(cell), ws.logits.data());
            log_posterior_from_logits(ws.logits.data(), v, ws.logprob.row(cell));
            lp = ws.logprob.at(cell, y);
            break;
          case HeadMode::west:
            head_score_table(m, ws.h_out.row(cell), ws.score[cell]);
            west_logits(m, ws.score[cell], ws.logits.data());
            log_posterior_from_logits(ws.logits.data(), v, ws.logprob.row(cell));
            lp = ws.logprob.at(cell, y);
            break;
          case HeadMode::char_normalized:
            head_score_table(m, ws.h_out.row(cell), ws.score[cell]);
            lp = char_normalized_log_prob(m, ws.score[cell], y);
            break;
        }
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("non-finite loss at step " + std::to_string(t) + ": " +
                                 e.what());
      }
      if (!std::isfinite(lp))
        throw std::runtime_error("non-finite loss at step " + std::to_string(t));
      loss -= lp;
    }

  const T scale = T(1) / (T(steps) * T(bsz));
  std::vector<RecurrentState<T>> dstates(bsz, m.zero_state());
  for (int t = steps - 1; t >= 0; --t)
    for (int b = 0; b < bsz; ++b) {
      const std::size_t cell = static_cast<std::size_t>(t) * bsz + b;
      const int y = batch.target(t, b);
      const T* h = ws.h_out.row(cell);
      std::fill(ws.dh.begin(), ws.dh.end(), T(0));

      if (head == HeadMode::char_normalized) {
        const Codebook& cb = m.soft_cb();
        const Mat<T>& s = ws.score[cell];
        const int k_eff = cb.k_eff();
        if (ws.ds.rows != static_cast<std::size_t>(s.rows) || ws.ds.cols != s.cols)
          ws.ds.resize(s.rows, s.cols);
        ws.ds.zero();
        for (int i = 0; i < cb.length(y); ++i) {
          T logz = char_position_logz(s.row(i), k_eff);
          for (int j = 1; j <= k_eff; ++j)
            ws.ds.at(i, j) = scale * std::exp(s.at(i, j) - logz);
          ws.ds.at(i, cb.codes[y][i]) -= scale;
        }
        score_table_backward(m, h, ws.ds, ws.dh.data());
      } else {
        const T* lp_row = ws.logprob.row(cell);
        for (int w = 0; w < v; ++w) ws.dlogits[w] = scale * std::exp(lp_row[w]);
        ws.dlogits[y] -= scale;
        if (head == HeadMode::full)
          full_head_backward(m, h, ws.dlogits.data(), ws.dh.data());
        else
          west_head_backward(m, h, ws.score[cell], ws.dlogits.data(), ws.dh.data());
      }

      core_backward(m, ws.tape[cell], ws.dh.data(), dstates[b], ws.dx.data());
      embed_backward(m, batch.input(t, b), ws.dx.data());
    }

  return loss / (static_cast<double>(steps) * bsz);
}

template <typename T>
double loss_only(const Model<T>& m, const Batch& batch) {
  const int steps = batch.steps, bsz = batch.batch_size;
  if (steps < 1 || bsz < 1) throw std::runtime_error("empty batch");
  const int v = m.vocab();
  std::vector<RecurrentState<T>> states(bsz, m.zero_state());
  std::vector<T> x(m.cfg.emb_dim), h(m.cfg.softmax_dim()), logits(v), logprob(v);
  Mat<T> s;
  double loss = 0;
  for (int t = 0; t < steps; ++t)
    for (int b = 0; b < bsz; ++b) {
      embed_forward(m, batch.input(t, b), x.data());
      core_forward(m, x.data(), states[b], nullptr, h.data());
      const int y = batch.target(t, b);
      double lp = 0;
      switch (m.cfg.head_mode) {
        case HeadMode::full:
          full_logits(m, h.data(), logits.data());
          log_posterior_from_logits(logits.data(), v, logprob.data());
          lp = logprob[y];
          break;
        case HeadMode::west:
          head_score_table(m, h.data(), s);
          west_logits(m, s, logits.data());
          log_posterior_from_logits(logits.data(), v, logprob.data());
          lp = logprob[y];
          break;
        case HeadMode::char_normalized:
          lp = char_normalized_log_prob(m, h.data(), y);
          break;
      }
      loss -= lp;
    }
  return loss / (static_cast<double>(steps) * bsz);
}

template <typename T>
double grad_norm(Model<T>& m) {
  double total = 0;
  for (auto& ref : param_refs(m))
    total += static_cast<double>(simd::sumsq(ref.grad->data(), ref.grad->size()));
  return std::sqrt(total);
}

template <typename T>
double clip_gradients(Model<T>& m, double clip) {
  if (!(clip > 0)) throw std::runtime_error("invalid hyperparameters: clip must be positive");
  double norm = grad_norm(m);
  if (norm > clip) {
    const T s = static_cast<T>(clip / norm);
    for (auto& ref : param_refs(m)) simd::scal(s, ref.grad->data(), ref.grad->size());
  }
  return norm;
}

template <typename T>
void sgd_step(Model<T>& m, const Hyperparameters& hp, double lr) {
  mask_frozen_grads(m);
  clip_gradients(m, hp.clip);
  for (auto& ref : param_refs(m)) {
    const T step = static_cast<T>(-lr * (ref.lambda ? hp.lambda_lr_mult : 1.0));
    simd::axpy(step, ref.grad->data(), ref.value->data(), ref.value->size());
  }
}

template <typename T>
double perplexity(const Model<T>& m, const std::vector<int>& stream, int eos_index) {
  if (stream.empty()) throw std::runtime_error("empty stream");
  const int v = m.vocab();
  RecurrentState<T> state = m.zero_state();
  std::vector<T> x(m.cfg.emb_dim), h(m.cfg.softmax_dim()), logits(v), logprob(v);
  Mat<T> s;
  double loss = 0;
  for (std::size_t p = 0; p < stream.size(); ++p) {
    int input = p == 0 ? eos_index : stream[p - 1];
    embed_forward(m, input, x.data());
    core_forward(m, x.data(), state, nullptr, h.data());
    const int y = stream[p];
    if (y < 0 || y >= v) throw std::runtime_error("word index out of range");
    switch (m.cfg.head_mode) {
      case HeadMode::full:
        full_logits(m, h.data(), logits.data());
        log_posterior_from_logits(logits.data(), v, logprob.data());
        loss -= logprob[y];
        break;
      case HeadMode::west:
        head_score_table(m, h.data(), s);
        west_logits(m, s, logits.data());
        log_posterior_from_logits(logits.data(), v, logprob.data());
        loss -= logprob[y];
        break;
      case HeadMode::char_normalized:
        head_score_table(m, h.data(), s);
        loss -= char_normalized_log_prob(m, s, y);
        break;
    }
  }
  return std::exp(loss / static_cast<double>(stream.size()));
}

double unigram_perplexity(const std::vector<int>& train_stream,
                          const std::vector<int>& test_stream, int vocab_size) {
  if (train_stream.empty() || test_stream.empty()) throw std::runtime_error("empty stream");
  std::vector<std::int64_t> counts(vocab_size, 0);
  for (int w : train_stream) counts.at(w) += 1;
  const double total = static_cast<double>(train_stream.size());
  double loss = 0;
  for (int w : test_stream) loss -= std::log(counts.at(w) / total);
  return std::exp(loss / static_cast<double>(test_stream.size()));
}

template <typename T>
TrainResult train(Model<T>& m, const std::vector<int>& train_stream,
                  const std::vector<int>& test_stream, int eos_index, const Hyperparameters& hp,
                  std::ostream* log) {
  validate_hyperparameters(hp);
  StreamBatcher batcher(train_stream, eos_index, hp.batch_size, hp.bptt);
  BpttWorkspace<T> ws;
  TrainResult result;

  // Divergence bound: twice the loss of the uniform predictor. That is
  // log(V) for word-normalized heads; the char-normalized head pays
  // log(k_eff) per code position, so its reference is the stream's mean
  // code length times log(k_eff).
  double uniform_loss = std::log(static_cast<double>(m.vocab()));
  if (m.cfg.head_mode == HeadMode::char_normalized) {
    double total_len = 0;
    for (int w : train_stream) total_len += m.soft_codebook->length(w);
    uniform_loss = total_len / static_cast<double>(train_stream.size()) *
                   std::log(static_cast<double>(m.soft_codebook->k_eff()));
  }
  const double bound = 2.0 * uniform_loss;

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    const double lr =
        hp.lr * std::pow(hp.lr_decay, std::max(0, epoch - hp.decay_start));
    std::vector<RecurrentState<T>> states(hp.batch_size, m.zero_state());
    double loss_sum = 0;
    std::int64_t positions = 0;
    for (int i = 0; i < batcher.num_batches(); ++i) {
      Batch batch = batcher.batch(i);
      zero_grads(m);
      double mean_loss = loss_and_grads(m, batch, states, ws);
      loss_sum += mean_loss * batch.steps * batch.batch_size;
      positions += static_cast<std::int64_t>(batch.steps) * batch.batch_size;
      sgd_step(m, hp, lr);
    }
    const double epoch_loss = loss_sum / static_cast<double>(positions);

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_ppl = std::exp(epoch_loss);
    stats.test_ppl = perplexity(m, test_stream, eos_index);
    result.epochs.push_back(stats);
    if (log)
      (*log) << "epoch " << epoch << " lr " << lr << " train_ppl " << stats.train_ppl
             << " test_ppl " << stats.test_ppl << "\n";

    if (epoch_loss > bound)
      throw std::runtime_error("training diverged: epoch " + std::to_string(epoch) +
                               " mean loss " + std::to_string(epoch_loss) +
                               " exceeds twice the uniform-model loss");
  }
  return result;
}

template <typename T>
GradCheckResult grad_check(Model<T>& m, const Batch& batch, double epsilon) {
  if (!(epsilon > 0)) throw std::runtime_error("invalid epsilon");
  zero_grads(m);
  std::vector<RecurrentState<T>> states(batch.batch_size, m.zero_state());
  BpttWorkspace<T> ws;
  loss_and_grads(m, batch, states, ws);
  mask_frozen_grads(m);

  GradCheckResult result;
  for (auto& ref : param_refs(m)) {
    for (std::size_t p = 0; p < ref.value->size(); ++p) {
      T* slot = ref.value->data() + p;
      const T saved = *slot;
      *slot = saved + static_cast<T>(epsilon);
      const double up = loss_only(m, batch);
      *slot = saved - static_cast<T>(epsilon);
      const double down = loss_only(m, batch);
      *slot = saved;
      const double numeric = (up - down) / (2 * epsilon);
      const double analytic = static_cast<double>(ref.grad->data()[p]);
      const double rel = std::fabs(analytic - numeric) /
                         std::max(1e-3, std::fabs(analytic) + std::fabs(numeric));
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_tensor = ref.name;
        result.worst_index = p;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

namespace {

std::int64_t lambda_count_closed_form(const FactorConfig& fc, int vocab_size,
                                      const Codebook* cb) {
  if (cb) return lambda_param_count(*cb);
  switch (fc.coding) {
    case CodingKind::random:
      return static_cast<std::int64_t>(vocab_size) * fc.n;
    case CodingKind::hybrid:
      return fc.t + static_cast<std::int64_t>(vocab_size - fc.t) * fc.n;
    case CodingKind::language:
      throw std::runtime_error("language coding parameter count requires the codebook");
  }
  return 0;
}

int factor_k_eff(const FactorConfig& fc, const Codebook* cb) {
  if (cb) return cb->k_eff();
  return fc.coding == CodingKind::hybrid ? fc.k + fc.t : fc.k;
}

std::int64_t codebook_bits_closed_form(const FactorConfig& fc, int vocab_size,
                                       const Codebook* cb) {
  if (cb) return codebook_storage_bits(*cb);
  Codebook shim;
  shim.kind = fc.coding;
  shim.k = fc.k;
  shim.n = fc.n;
  shim.t = fc.t;
  shim.codes.resize(vocab_size);
  return codebook_storage_bits(shim);
}

} // namespace

ParamReport param_report(const ModelConfig& cfg, const Codebook* emb_cb,
                         const Codebook* soft_cb) {
  ParamReport report;
  const int v = cfg.vocab_size;
  const int ds = cfg.softmax_dim();
  if (v <= 0) throw std::runtime_error("vocab_size must be positive");

  if (cfg.emb_mode == EmbeddingMode::full) {
    report.emb = static_cast<std::int64_t>(v) * cfg.emb_dim;
  } else {
    report.emb = dense_param_count(cfg.emb.structure, cfg.emb.tied,
                                   factor_k_eff(cfg.emb, emb_cb), cfg.emb_dim, cfg.emb.n);
    if (cfg.emb.weighted) report.emb += lambda_count_closed_form(cfg.emb, v, emb_cb);
    report.emb_codebook_bits = codebook_bits_closed_form(cfg.emb, v, emb_cb);
    report.emb_codebook_succinct = cfg.emb.coding == CodingKind::language ? 0 : v;
  }

  int in_dim = cfg.emb_dim;
  const int out_dim = cfg.projection > 0 ? cfg.projection : cfg.hidden;
  for (int l = 0; l < cfg.layers; ++l) {
    report.lstm += static_cast<std::int64_t>(4) * cfg.hidden * (in_dim + out_dim + 1);
    if (cfg.projection > 0)
      report.lstm += static_cast<std::int64_t>(cfg.projection) * cfg.hidden;
    in_dim = out_dim;
  }

  switch (cfg.head_mode) {
    case HeadMode::full:
      report.soft = static_cast<std::int64_t>(v) * ds + v;
      break;
    case HeadMode::west:
      report.soft = dense_param_count(cfg.soft.structure, cfg.soft.tied,
                                      factor_k_eff(cfg.soft, soft_cb), ds, cfg.soft.n);
      if (cfg.soft_bias) report.soft += v;
      if (cfg.soft.weighted) report.soft += lambda_count_closed_form(cfg.soft, v, soft_cb);
      break;
    case HeadMode::char_normalized:
      report.soft = dense_param_count(cfg.soft.structure, cfg.soft.tied,
                                      factor_k_eff(cfg.soft, soft_cb), ds, cfg.soft.n);
      break;
  }
  if (cfg.head_mode != HeadMode::full) {
    report.soft_codebook_bits = codebook_bits_closed_form(cfg.soft, v, soft_cb);
    report.soft_codebook_succinct = cfg.soft.coding == CodingKind::language ? 0 : v;
  }
  return report;
}

#define WEST_INSTANTIATE_TRAINING(T)                                                        \
  template struct BpttWorkspace<T>;                                                         \
  template double loss_and_grads<T>(Model<T>&, const Batch&, std::vector<RecurrentState<T>>&, \
                                    BpttWorkspace<T>&);                                     \
  template double loss_only<T>(const Model<T>&, const Batch&);                              \
  template double grad_norm<T>(Model<T>&);                                                  \
  template double clip_gradients<T>(Model<T>&, double);                                     \
  template void sgd_step<T>(Model<T>&, const Hyperparameters&, double);                     \
  template double perplexity<T>(const Model<T>&, const std::vector<int>&, int);             \
  template TrainResult train<T>(Model<T>&, const std::vector<int>&, const std::vector<int>&, \
                                int, const Hyperparameters&, std::ostream*);                \
  template GradCheckResult grad_check<T>(Model<T>&, const Batch&, double);

WEST_INSTANTIATE_TRAINING(float)
WEST_INSTANTIATE_TRAINING(double)

#undef WEST_INSTANTIATE_TRAINING

} // namespace west
