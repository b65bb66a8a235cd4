#include "west/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "west/rng.hpp"
#include "west/simd/kernels.hpp"

namespace west {

const char* embedding_mode_name(EmbeddingMode m) {
  return m == EmbeddingMode::full ? "full" : "west";
}

EmbeddingMode embedding_mode_from_name(std::string_view name) {
  if (name == "full") return EmbeddingMode::full;
  if (name == "west") return EmbeddingMode::west;
  throw std::runtime_error("unknown embedding mode: " + std::string(name));
}

const char* head_mode_name(HeadMode m) {
  switch (m) {
    case HeadMode::full: return "full";
    case HeadMode::west: return "west";
    case HeadMode::char_normalized: return "char_normalized";
  }
  return "?";
}

HeadMode head_mode_from_name(std::string_view name) {
  if (name == "full") return HeadMode::full;
  if (name == "west") return HeadMode::west;
  if (name == "char_normalized") return HeadMode::char_normalized;
  throw std::runtime_error("unknown head mode: " + std::string(name));
}

namespace {

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

void validate_config(const ModelConfig& cfg) {
  if (cfg.vocab_size <= 0) throw std::runtime_error("vocab_size must be positive");
  if (cfg.emb_dim <= 0 || cfg.hidden <= 0) throw std::runtime_error("dims must be positive");
  if (cfg.layers < 1) throw std::runtime_error("layers must be at least 1");
  if (cfg.projection < 0) throw std::runtime_error("projection must be nonnegative");
  if (!(cfg.init_range > 0)) throw std::runtime_error("init_range must be positive");
  if (cfg.head_mode == HeadMode::char_normalized && cfg.soft.coding != CodingKind::language)
    throw std::runtime_error("char-normalized head requires language coding");
}

// Builds the codebook one factorized side needs. Language codes come from
// the vocabulary spellings; softmax-side language codes are <eow>-terminated
// (the heads score the terminator as a regular position).
Codebook factor_codebook(const FactorConfig& fc, const Vocabulary& vocab, std::uint64_t seed,
                         bool softmax_side) {
  switch (fc.coding) {
    case CodingKind::random:
      return gen_random_code(fc.k, fc.n, vocab.size(), seed);
    case CodingKind::hybrid:
      return gen_hybrid_code(fc.k, fc.n, fc.t, vocab.size(), seed);
    case CodingKind::language: {
      SubUnitAlphabet alpha = extract_characters(vocab, /*with_eow=*/softmax_side);
      return gen_language_code(vocab, alpha, fc.n, /*append_eow=*/softmax_side);
    }
  }
  throw std::runtime_error("unknown coding kind");
}

// Resets the lambda matrix to the codebook's structural pattern: 1 at real
// code positions, 0 at pads.
template <typename T>
void reset_lambda(SparseFactor<T>& sf) {
  sf.lambda.zero();
  const Codebook& cb = *sf.codebook;
  for (int w = 0; w < cb.vocab_size(); ++w)
    for (int i = 0; i < cb.length(w); ++i) sf.lambda.at(w, i) = T(1);
}

} // namespace

template <typename T>
RecurrentState<T> Model<T>::zero_state() const {
  RecurrentState<T> st;
  st.h.resize(lstm.size());
  st.c.resize(lstm.size());
  for (std::size_t l = 0; l < lstm.size(); ++l) {
    st.h[l].assign(lstm[l].out_dim(), T(0));
    st.c[l].assign(lstm[l].hidden, T(0));
  }
  return st;
}

template <typename T>
Model<T> allocate_model(const ModelConfig& cfg, Codebook emb_cb, Codebook soft_cb) {
  validate_config(cfg);
  Model<T> m;
  m.cfg = cfg;
  const int v = cfg.vocab_size;
  const int ds = cfg.softmax_dim();

  if (cfg.emb_mode == EmbeddingMode::full) {
    m.emb_table.resize(v, cfg.emb_dim);
    m.emb_table_g.resize(v, cfg.emb_dim);
  } else {
    if (emb_cb.vocab_size() != v)
      throw std::runtime_error("embedding codebook does not cover the vocabulary");
    m.emb_codebook = std::make_unique<Codebook>(std::move(emb_cb));
    m.emb_sparse = make_sparse_factor<T>(*m.emb_codebook, cfg.emb.weighted);
    m.emb_dense = make_dense_factor<T>(cfg.emb.structure, cfg.emb.tied,
                                       m.emb_codebook->k_eff(), cfg.emb_dim, cfg.emb.n);
  }

  m.lstm.resize(cfg.layers);
  int in_dim = cfg.emb_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    LstmLayer<T>& layer = m.lstm[l];
    layer.in_dim = in_dim;
    layer.hidden = cfg.hidden;
    layer.proj = cfg.projection;
    layer.wx.resize(4 * cfg.hidden, in_dim);
    layer.wx_g.resize(4 * cfg.hidden, in_dim);
    layer.wh.resize(4 * cfg.hidden, layer.out_dim());
    layer.wh_g.resize(4 * cfg.hidden, layer.out_dim());
    layer.b.resize(1, 4 * cfg.hidden);
    layer.b_g.resize(1, 4 * cfg.hidden);
    if (cfg.projection > 0) {
      layer.p.resize(cfg.projection, cfg.hidden);
      layer.p_g.resize(cfg.projection, cfg.hidden);
    }
    in_dim = layer.out_dim();
  }

  switch (cfg.head_mode) {
    case HeadMode::full:
      m.soft_w.resize(v, ds);
      m.soft_w_g.resize(v, ds);
      m.soft_b.resize(1, v);
      m.soft_b_g.resize(1, v);
      break;
    case HeadMode::west:
    case HeadMode::char_normalized:
      if (soft_cb.vocab_size() != v)
        throw std::runtime_error("softmax codebook does not cover the vocabulary");
      m.soft_codebook = std::make_unique<Codebook>(std::move(soft_cb));
      m.soft_sparse = make_sparse_factor<T>(*m.soft_codebook, cfg.soft.weighted);
      m.soft_dense = make_dense_factor<T>(cfg.soft.structure, cfg.soft.tied,
                                          m.soft_codebook->k_eff(), ds, cfg.soft.n);
      if (m.has_soft_bias()) {
        m.soft_b.resize(1, v);
        m.soft_b_g.resize(1, v);
      }
      break;
  }
  return m;
}

template <typename T>
void init_params(Model<T>& m) {
  std::uint64_t init_seed = sub_seed(m.cfg.seed, "init");
  for (auto& ref : param_refs(m)) {
    SplitMix64 rng(sub_seed(init_seed, ref.name));
    for (auto& x : ref.value->v) x = static_cast<T>(rng.uniform_sym(m.cfg.init_range));
    if (ref.pad_row0)
      std::memset(ref.value->row(0), 0, sizeof(T) * ref.value->cols);
  }
  for (auto& layer : m.lstm) {
    layer.b.zero();
    for (int j = 0; j < layer.hidden; ++j) layer.b.at(0, layer.hidden + j) = T(1); // forget gate
  }
  if (m.has_soft_bias()) m.soft_b.zero();
  if (m.cfg.emb_mode == EmbeddingMode::west && m.cfg.emb.weighted) reset_lambda(m.emb_sparse);
  if (m.cfg.head_mode == HeadMode::west && m.cfg.soft.weighted) reset_lambda(m.soft_sparse);
}

template <typename T>
Model<T> build_model(const ModelConfig& cfg, const Vocabulary& vocab) {
  if (cfg.vocab_size != 0 && cfg.vocab_size != vocab.size())
    throw std::runtime_error("config vocab_size does not match the vocabulary");
  ModelConfig resolved = cfg;
  resolved.vocab_size = vocab.size();

  Codebook emb_cb, soft_cb;
  if (resolved.emb_mode == EmbeddingMode::west) {
    emb_cb = factor_codebook(resolved.emb, vocab, sub_seed(resolved.seed, "emb-codebook"),
                             /*softmax_side=*/false);
    resolved.emb.k = emb_cb.k; // language coding derives k from the alphabet
  }
  if (resolved.head_mode != HeadMode::full) {
    soft_cb = factor_codebook(resolved.soft, vocab, sub_seed(resolved.seed, "soft-codebook"),
                              /*softmax_side=*/true);
    resolved.soft.k = soft_cb.k;
  }
  Model<T> m = allocate_model<T>(resolved, std::move(emb_cb), std::move(soft_cb));
  init_params(m);
  return m;
}

template <typename T>
std::vector<ParamRef<T>> param_refs(Model<T>& m) {
  std::vector<ParamRef<T>> refs;
  auto add = [&](std::string name, Mat<T>& v, Mat<T>& g, bool pad = false, bool lam = false) {
    refs.push_back(ParamRef<T>{std::move(name), &v, &g, pad, lam});
  };
  if (m.cfg.emb_mode == EmbeddingMode::full) {
    add("emb.table", m.emb_table, m.emb_table_g);
  } else {
    for (std::size_t i = 0; i < m.emb_dense.subs.size(); ++i)
      add("emb.sub" + std::to_string(i), m.emb_dense.subs[i], m.emb_dense.subs_g[i], true);
    if (m.cfg.emb.weighted)
      add("emb.lambda", m.emb_sparse.lambda, m.emb_sparse.lambda_g, false, true);
  }
  for (std::size_t l = 0; l < m.lstm.size(); ++l) {
    std::string p = "lstm" + std::to_string(l);
    add(p + ".wx", m.lstm[l].wx, m.lstm[l].wx_g);
    add(p + ".wh", m.lstm[l].wh, m.lstm[l].wh_g);
    add(p + ".bias", m.lstm[l].b, m.lstm[l].b_g);
    if (m.lstm[l].proj > 0) add(p + ".proj", m.lstm[l].p, m.lstm[l].p_g);
  }
  if (m.cfg.head_mode == HeadMode::full) {
    add("soft.w", m.soft_w, m.soft_w_g);
  } else {
    for (std::size_t i = 0; i < m.soft_dense.subs.size(); ++i)
      add("soft.sub" + std::to_string(i), m.soft_dense.subs[i], m.soft_dense.subs_g[i], true);
    if (m.cfg.head_mode == HeadMode::west && m.cfg.soft.weighted)
      add("soft.lambda", m.soft_sparse.lambda, m.soft_sparse.lambda_g, false, true);
  }
  if (m.has_soft_bias()) add("soft.bias", m.soft_b, m.soft_b_g);
  return refs;
}

template <typename T>
void zero_grads(Model<T>& m) {
  for (auto& ref : param_refs(m)) ref.grad->zero();
}

template <typename T>
void mask_frozen_grads(Model<T>& m) {
  for (auto& ref : param_refs(m))
    if (ref.pad_row0) std::memset(ref.grad->row(0), 0, sizeof(T) * ref.grad->cols);
}

template <typename T>
void embed_forward(const Model<T>& m, int w, T* out) {
  if (w < 0 || w >= m.vocab()) throw std::runtime_error("word index out of range");
  if (m.cfg.emb_mode == EmbeddingMode::full)
    std::memcpy(out, m.emb_table.row(w), sizeof(T) * m.cfg.emb_dim);
  else
    lookup(m.emb_sparse, m.emb_dense, w, out);
}

template <typename T>
void embed_backward(Model<T>& m, int w, const T* dout) {
  if (m.cfg.emb_mode == EmbeddingMode::full)
    simd::axpy(T(1), dout, m.emb_table_g.row(w), static_cast<std::size_t>(m.cfg.emb_dim));
  else
    lookup_backward(m.emb_sparse, m.emb_dense, w, dout);
}

template <typename T>
void core_forward(const Model<T>& m, const T* x, RecurrentState<T>& state,
                  std::type_identity_t<std::vector<LstmStepCache<T>>*> cache, T* out) {
  if (cache) cache->resize(m.lstm.size());
  const T* in = x;
  int in_dim = m.cfg.emb_dim;
  for (std::size_t l = 0; l < m.lstm.size(); ++l) {
    const LstmLayer<T>& layer = m.lstm[l];
    const int h = layer.hidden;
    std::vector<T>& h_state = state.h[l];
    std::vector<T>& c_state = state.c[l];

    std::vector<T> z(layer.b.v);
    simd::matvec_add(layer.wx.data(), in, z.data(), 4 * h, in_dim);
    simd::matvec_add(layer.wh.data(), h_state.data(), z.data(), 4 * h, layer.out_dim());
    for (int j = 0; j < h; ++j) {
      z[j] = sigmoid(z[j]);                 // input gate
      z[h + j] = sigmoid(z[h + j]);         // forget gate
      z[2 * h + j] = std::tanh(z[2 * h + j]); // candidate
      z[3 * h + j] = sigmoid(z[3 * h + j]); // output gate
    }

    std::vector<T> c(h), tc(h), h_raw(h);
    for (int j = 0; j < h; ++j) {
      c[j] = z[h + j] * c_state[j] + z[j] * z[2 * h + j];
      tc[j] = std::tanh(c[j]);
      h_raw[j] = z[3 * h + j] * tc[j];
    }
    std::vector<T> h_out;
    if (layer.proj > 0) {
      h_out.assign(layer.proj, T(0));
      simd::matvec(layer.p.data(), h_raw.data(), h_out.data(), layer.proj, h);
    } else {
      h_out = h_raw;
    }

    if (cache) {
      LstmStepCache<T>& sc = (*cache)[l];
      sc.x.assign(in, in + in_dim);
      sc.h_prev = h_state;
      sc.c_prev = c_state;
      sc.gates = std::move(z);
      sc.c = c;
      sc.tanh_c = std::move(tc);
      sc.h_raw = std::move(h_raw);
      sc.h_out = h_out;
    }
    c_state = std::move(c);
    h_state = std::move(h_out);
    in = h_state.data();
    in_dim = layer.out_dim();
  }
  std::memcpy(out, in, sizeof(T) * in_dim);
}

template <typename T>
void core_backward(Model<T>& m, const std::vector<LstmStepCache<T>>& cache, const T* dout,
                   RecurrentState<T>& dstate, T* dx) {
  // dh_below: gradient w.r.t. the current layer's output contributed by the
  // layer above at this same timestep (or by the head, for the top layer).
  std::vector<T> dh_below(dout, dout + m.lstm.back().out_dim());
  for (int l = static_cast<int>(m.lstm.size()) - 1; l >= 0; --l) {
    const LstmLayer<T>& layer = m.lstm[l];
    LstmLayer<T>& lg = m.lstm[l];
    const LstmStepCache<T>& sc = cache[l];
    const int h = layer.hidden;

    std::vector<T> dh_out(layer.out_dim());
    for (int j = 0; j < layer.out_dim(); ++j) dh_out[j] = dh_below[j] + dstate.h[l][j];

    std::vector<T> dh_raw(h, T(0));
    if (layer.proj > 0) {
      simd::ger(lg.p_g.data(), dh_out.data(), sc.h_raw.data(), layer.proj, h, T(1));
      simd::matvec_t_add(layer.p.data(), dh_out.data(), dh_raw.data(), layer.proj, h);
    } else {
      dh_raw = dh_out;
    }

    const T* gi = sc.gates.data();
    const T* gf = gi + h;
    const T* gg = gi + 2 * h;
    const T* go = gi + 3 * h;
    std::vector<T> dz(4 * h);
    for (int j = 0; j < h; ++j) {
      T dtc = dh_raw[j] * go[j];
      T dc = dstate.c[l][j] + dtc * (T(1) - sc.tanh_c[j] * sc.tanh_c[j]);
      T di = dc * gg[j];
      T df = dc * sc.c_prev[j];
      T dg = dc * gi[j];
      T do_ = dh_raw[j] * sc.tanh_c[j];
      dz[j] = di * gi[j] * (T(1) - gi[j]);
      dz[h + j] = df * gf[j] * (T(1) - gf[j]);
      dz[2 * h + j] = dg * (T(1) - gg[j] * gg[j]);
      dz[3 * h + j] = do_ * go[j] * (T(1) - go[j]);
      dstate.c[l][j] = dc * gf[j]; // flows to c_prev
    }

    simd::ger(lg.wx_g.data(), dz.data(), sc.x.data(), 4 * h, layer.in_dim, T(1));
    simd::ger(lg.wh_g.data(), dz.data(), sc.h_prev.data(), 4 * h, layer.out_dim(), T(1));
    simd::axpy(T(1), dz.data(), lg.b_g.data(), static_cast<std::size_t>(4 * h));

    std::fill(dstate.h[l].begin(), dstate.h[l].end(), T(0));
    simd::matvec_t_add(layer.wh.data(), dz.data(), dstate.h[l].data(), 4 * h, layer.out_dim());

    std::vector<T> dx_cur(layer.in_dim, T(0));
    simd::matvec_t_add(layer.wx.data(), dz.data(), dx_cur.data(), 4 * h, layer.in_dim);
    if (l == 0)
      std::memcpy(dx, dx_cur.data(), sizeof(T) * layer.in_dim);
    else
      dh_below = std::move(dx_cur);
  }
}

template <typename T>
void head_score_table(const Model<T>& m, const T* h, Mat<T>& s) {
  const DenseFactor<T>& df = m.soft_dense;
  const int cols = df.cols();
  s.resize(df.n, df.k_eff + 1);
  for (int i = 0; i < df.n; ++i) {
    const T* hs = df.structure == DenseStructure::block_diagonal ? h + i * cols : h;
    simd::matvec(df.sub(i).data(), hs, s.row(i), df.k_eff + 1, cols);
  }
}

template <typename T>
void west_logits(const Model<T>& m, const Mat<T>& s, T* logits) {
  const Codebook& cb = m.soft_cb();
  const bool bias = m.has_soft_bias();
  for (int w = 0; w < m.vocab(); ++w) {
    T acc = bias ? m.soft_b.at(0, w) : T(0);
    const auto& code = cb.codes[w];
    for (std::size_t i = 0; i < code.size(); ++i)
      acc += m.soft_sparse.weight(w, static_cast<int>(i)) * s.at(i, code[i]);
    logits[w] = acc;
  }
}

template <typename T>
void full_logits(const Model<T>& m, const T* h, T* logits) {
  simd::matvec(m.soft_w.data(), h, logits, m.vocab(), m.cfg.softmax_dim());
  simd::axpy(T(1), m.soft_b.data(), logits, static_cast<std::size_t>(m.vocab()));
}

template <typename T>
void log_posterior_from_logits(const T* logits, int v, T* logprobs) {
  T mx = logits[0];
  for (int w = 0; w < v; ++w) {
    if (!std::isfinite(logits[w])) throw std::runtime_error("non-finite logits");
    mx = std::max(mx, logits[w]);
  }
  T sum = T(0);
  for (int w = 0; w < v; ++w) sum += std::exp(logits[w] - mx);
  T logz = mx + std::log(sum);
  for (int w = 0; w < v; ++w) logprobs[w] = logits[w] - logz;
}

template <typename T>
void log_posterior(const Model<T>& m, const T* h, T* logprobs) {
  if (m.cfg.head_mode == HeadMode::char_normalized)
    throw std::runtime_error("log_posterior requires a word-normalized head");
  std::vector<T> logits(m.vocab());
  if (m.cfg.head_mode == HeadMode::full) {
    full_logits(m, h, logits.data());
  } else {
    Mat<T> s;
    head_score_table(m, h, s);
    west_logits(m, s, logits.data());
  }
  log_posterior_from_logits(logits.data(), m.vocab(), logprobs);
}

template <typename T>
T char_position_logz(const T* row, int k_eff) {
  T mx = row[1];
  for (int j = 1; j <= k_eff; ++j) {
    if (!std::isfinite(row[j])) throw std::runtime_error("non-finite logits");
    mx = std::max(mx, row[j]);
  }
  T sum = T(0);
  for (int j = 1; j <= k_eff; ++j) sum += std::exp(row[j] - mx);
  return mx + std::log(sum);
}

template <typename T>
T char_normalized_log_prob(const Model<T>& m, const Mat<T>& s, int w) {
  if (m.cfg.head_mode != HeadMode::char_normalized)
    throw std::runtime_error("char_normalized_log_prob requires the char-normalized head");
  if (w < 0 || w >= m.vocab()) throw std::runtime_error("word index out of range");
  const Codebook& cb = m.soft_cb();
  const int k_eff = cb.k_eff();
  T total = T(0);
  for (int i = 0; i < cb.length(w); ++i) {
    const T* row = s.row(i);
    total += row[cb.codes[w][i]] - char_position_logz(row, k_eff);
  }
  return total;
}

template <typename T>
T char_normalized_log_prob(const Model<T>& m, const T* h, int w) {
  Mat<T> s;
  head_score_table(m, h, s);
  return char_normalized_log_prob(m, s, w);
}

template <typename T>
void score_table_backward(Model<T>& m, const T* h, const Mat<T>& ds, T* dh) {
  DenseFactor<T>& df = m.soft_dense;
  const int cols = df.cols();
  for (int i = 0; i < df.n; ++i) {
    const T* hs = df.structure == DenseStructure::block_diagonal ? h + i * cols : h;
    T* dhs = df.structure == DenseStructure::block_diagonal ? dh + i * cols : dh;
    simd::ger(df.sub_g(i).data(), ds.row(i), hs, df.k_eff + 1, cols, T(1));
    simd::matvec_t_add(df.sub(i).data(), ds.row(i), dhs, df.k_eff + 1, cols);
  }
}

template <typename T>
void west_head_backward(Model<T>& m, const T* h, const Mat<T>& s, const T* dlogits, T* dh) {
  const Codebook& cb = m.soft_cb();
  const bool bias = m.has_soft_bias();
  const bool weighted = m.cfg.soft.weighted;
  Mat<T> ds(m.soft_dense.n, m.soft_dense.k_eff + 1);
  for (int w = 0; w < m.vocab(); ++w) {
    T dl = dlogits[w];
    if (dl == T(0)) continue;
    if (bias) m.soft_b_g.at(0, w) += dl;
    const auto& code = cb.codes[w];
    for (std::size_t i = 0; i < code.size(); ++i) {
      int sym = code[i];
      ds.at(i, sym) += m.soft_sparse.weight(w, static_cast<int>(i)) * dl;
      if (weighted)
        m.soft_sparse.lambda_g.at(w, i) += s.at(i, sym) * dl;
    }
  }
  score_table_backward(m, h, ds, dh);
}

template <typename T>
void full_head_backward(Model<T>& m, const T* h, const T* dlogits, T* dh) {
  const int v = m.vocab();
  const int ds = m.cfg.softmax_dim();
  simd::ger(m.soft_w_g.data(), dlogits, h, v, ds, T(1));
  simd::axpy(T(1), dlogits, m.soft_b_g.data(), static_cast<std::size_t>(v));
  simd::matvec_t_add(m.soft_w.data(), dlogits, dh, v, ds);
}

template <typename T>
void forward_step(const Model<T>& m, int w, RecurrentState<T>& state, T* logprobs) {
  std::vector<T> x(m.cfg.emb_dim), h(m.cfg.softmax_dim());
  embed_forward(m, w, x.data());
  core_forward(m, x.data(), state, nullptr, h.data());
  if (m.cfg.head_mode == HeadMode::char_normalized) {
    Mat<T> s;
    head_score_table(m, h.data(), s);
    for (int u = 0; u < m.vocab(); ++u) logprobs[u] = char_normalized_log_prob(m, s, u);
  } else {
    log_posterior(m, h.data(), logprobs);
  }
}

#define WEST_INSTANTIATE_MODEL(T)                                                            \
  template struct Model<T>;                                                                  \
  template Model<T> allocate_model<T>(const ModelConfig&, Codebook, Codebook);               \
  template void init_params<T>(Model<T>&);                                                   \
  template Model<T> build_model<T>(const ModelConfig&, const Vocabulary&);                   \
  template std::vector<ParamRef<T>> param_refs<T>(Model<T>&);                                \
  template void zero_grads<T>(Model<T>&);                                                    \
  template void mask_frozen_grads<T>(Model<T>&);                                             \
  template void embed_forward<T>(const Model<T>&, int, T*);                                  \
  template void embed_backward<T>(Model<T>&, int, const T*);                                 \
  template void core_forward<T>(const Model<T>&, const T*, RecurrentState<T>&,               \
                                std::vector<LstmStepCache<T>>*, T*);                         \
  template void core_backward<T>(Model<T>&, const std::vector<LstmStepCache<T>>&, const T*,  \
                                 RecurrentState<T>&, T*);                                    \
  template void head_score_table<T>(const Model<T>&, const T*, Mat<T>&);                     \
  template void west_logits<T>(const Model<T>&, const Mat<T>&, T*);                          \
  template void full_logits<T>(const Model<T>&, const T*, T*);                               \
  template void log_posterior_from_logits<T>(const T*, int, T*);                             \
  template void log_posterior<T>(const Model<T>&, const T*, T*);                             \
  template T char_normalized_log_prob<T>(const Model<T>&, const Mat<T>&, int);               \
  template T char_normalized_log_prob<T>(const Model<T>&, const T*, int);                    \
  template T char_position_logz<T>(const T*, int);                                           \
  template void score_table_backward<T>(Model<T>&, const T*, const Mat<T>&, T*);             \
  template void west_head_backward<T>(Model<T>&, const T*, const Mat<T>&, const T*, T*);     \
  template void full_head_backward<T>(Model<T>&, const T*, const T*, T*);                    \
  template void forward_step<T>(const Model<T>&, int, RecurrentState<T>&, T*);

WEST_INSTANTIATE_MODEL(float)
WEST_INSTANTIATE_MODEL(double)

#undef WEST_INSTANTIATE_MODEL

} // namespace west
