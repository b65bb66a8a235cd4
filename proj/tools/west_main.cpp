// Command-line surface for the WEST toolkit: vocabulary building, codebook
// generation, training, evaluation, parameter accounting, quantization and
// gradient checking, all driven by a flat key-value config file.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "west/checkpoint.hpp"
#include "west/codebook.hpp"
#include "west/config.hpp"
#include "west/corpus.hpp"
#include "west/model.hpp"
#include "west/quantize.hpp"
#include "west/training.hpp"

namespace {

using namespace west;

RunConfig load_run_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

// Vocabulary resolution order: explicit vocab_file, else built from the
// training corpus capped at vocab_size (0 = keep every word). vocab_size
// counts the reserved <eos>/<unk> entries, matching the model's view.
Vocabulary resolve_vocabulary(const RunConfig& rc) {
  if (!rc.vocab_path.empty()) return deserialize_vocabulary(read_text_file(rc.vocab_path));
  if (rc.train_path.empty())
    throw std::runtime_error("config must set train or vocab_file to resolve the vocabulary");
  if (rc.model.vocab_size != 0 && rc.model.vocab_size < 3)
    throw std::runtime_error("vocab_size must be 0 or at least 3");
  const int cap = rc.model.vocab_size > 0 ? rc.model.vocab_size - 2
                                          : std::numeric_limits<int>::max() - 2;
  return build_vocabulary(read_text_file(rc.train_path), cap);
}

std::vector<int> load_stream(const Vocabulary& vocab, const std::string& path) {
  return encode_stream(vocab, read_text_file(path));
}

std::string format_ppl(double v) {
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

std::string format_ratio(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v << 'x';
  return os.str();
}

void cmd_build_vocab(const std::string& corpus_path, const std::string& out_path,
                     int max_size) {
  if (max_size != 0 && max_size < 3)
    throw std::runtime_error("--max-size must be 0 or at least 3");
  const int cap = max_size > 0 ? max_size - 2 : std::numeric_limits<int>::max() - 2;
  const Vocabulary vocab = build_vocabulary(read_text_file(corpus_path), cap);
  write_text_file(out_path, serialize_vocabulary(vocab));
  std::cout << "vocab size " << vocab.size() << "\nsaved: " << out_path << '\n';
}

void cmd_gen_codebook(const std::string& vocab_path, const std::string& out_path,
                      const std::string& kind_name, int k, int n, int t, std::uint64_t seed,
                      bool eow) {
  const Vocabulary vocab = deserialize_vocabulary(read_text_file(vocab_path));
  const CodingKind kind = coding_kind_from_name(kind_name);
  Codebook cb;
  switch (kind) {
    case CodingKind::random:
      cb = gen_random_code(k, n, vocab.size(), seed);
      break;
    case CodingKind::hybrid:
      cb = gen_hybrid_code(k, n, t, vocab.size(), seed);
      break;
    case CodingKind::language: {
      const SubUnitAlphabet alphabet = extract_characters(vocab, eow);
      cb = gen_language_code(vocab, alphabet, n, eow);
      break;
    }
  }
  // The generated artifact lists every code so it can be inspected and
  // edited; checkpoints store seed-regenerable kinds as a header only.
  write_text_file(out_path, serialize_codebook(cb, /*explicit_codes=*/true));
  std::cout << "codebook: " << cb.vocab_size() << " codes, kind " << coding_kind_name(cb.kind)
            << ", k " << cb.k << ", n " << cb.n << ", k_eff " << cb.k_eff() << '\n'
            << "saved: " << out_path << '\n';
}

void cmd_train(const std::string& config_path, std::string out_path) {
  const RunConfig rc = load_run_config(config_path);
  if (rc.train_path.empty()) throw std::runtime_error("config must set train");
  const Vocabulary vocab = resolve_vocabulary(rc);
  const std::vector<int> train_stream = load_stream(vocab, rc.train_path);

  // Per-epoch evaluation uses the validation stream when present, else test.
  const std::string eval_path = !rc.valid_path.empty() ? rc.valid_path : rc.test_path;
  if (eval_path.empty()) throw std::runtime_error("config must set valid or test");
  const std::vector<int> eval_stream = load_stream(vocab, eval_path);

  std::cout << "vocab " << vocab.size() << " words, train " << train_stream.size()
            << " tokens, eval " << eval_stream.size() << " tokens\n";

  Model<float> model = build_model<float>(rc.model, vocab);
  train(model, train_stream, eval_stream, vocab.eos_index, rc.hp, &std::cout);

  if (!rc.test_path.empty() && rc.test_path != eval_path) {
    const std::vector<int> test_stream = load_stream(vocab, rc.test_path);
    std::cout << "test_ppl " << format_ppl(perplexity(model, test_stream, vocab.eos_index))
              << '\n';
  }

  if (out_path.empty()) {
    std::filesystem::create_directories(rc.out_dir);
    out_path = (std::filesystem::path(rc.out_dir) / "model.ckpt").string();
  } else if (const auto dir = std::filesystem::path(out_path).parent_path(); !dir.empty()) {
    std::filesystem::create_directories(dir);
  }
  save_checkpoint(out_path, make_checkpoint(rc, model, vocab));
  std::cout << "saved checkpoint: " << out_path << '\n';
}

void cmd_eval(const std::string& ckpt_path, std::string corpus_path) {
  const RestoredModel<float> restored = restore_model<float>(load_checkpoint(ckpt_path));
  if (corpus_path.empty()) corpus_path = restored.config.test_path;
  if (corpus_path.empty())
    throw std::runtime_error("no corpus: pass --corpus or set test in the config");
  const std::vector<int> stream = load_stream(restored.vocab, corpus_path);
  std::cout << "ppl "
            << format_ppl(perplexity(restored.model, stream, restored.vocab.eos_index))
            << '\n';
}

// Parameter accounting for a config or checkpoint. Building the model (when
// a vocabulary is available) yields the real codebooks; a config with an
// explicit vocab_size and seed-regenerable codings can be described without
// touching any corpus.
ParamReport report_for(const std::string& config_path, const std::string& ckpt_path) {
  if (!ckpt_path.empty()) {
    const RestoredModel<float> r = restore_model<float>(load_checkpoint(ckpt_path));
    return param_report(r.model.cfg, r.model.emb_codebook.get(), r.model.soft_codebook.get());
  }
  const RunConfig rc = load_run_config(config_path);
  if (!rc.vocab_path.empty() || !rc.train_path.empty()) {
    const Vocabulary vocab = resolve_vocabulary(rc);
    Model<float> m = build_model<float>(rc.model, vocab);
    return param_report(m.cfg, m.emb_codebook.get(), m.soft_codebook.get());
  }
  if (rc.model.vocab_size <= 0)
    throw std::runtime_error(
        "stats from config alone needs vocab_size; set it or provide train/vocab_file");
  return param_report(rc.model);
}

void cmd_stats(const std::string& config_path, const std::string& ckpt_path,
               const std::string& baseline_path) {
  const ParamReport r = report_for(config_path, ckpt_path);

  const bool with_baseline = !baseline_path.empty();
  ParamReport base;
  if (with_baseline) base = report_for(baseline_path, "");

  const auto line = [&](const char* label, std::int64_t mine, std::int64_t theirs) {
    std::cout << std::left << std::setw(6) << label << ' ' << mine;
    if (with_baseline) {
      std::cout << "  baseline " << theirs << "  ratio ";
      std::cout << (mine > 0 ? format_ratio(double(theirs) / double(mine)) : "inf");
    }
    std::cout << '\n';
  };
  line("Emb", r.emb, base.emb);
  line("LSTM", r.lstm, base.lstm);
  line("Soft", r.soft, base.soft);
  line("Total", r.total(), base.total());
  if (r.emb_codebook_bits > 0)
    std::cout << "emb codebook: " << r.emb_codebook_bits << " bits explicit, "
              << r.emb_codebook_succinct << " bits succinct\n";
  if (r.soft_codebook_bits > 0)
    std::cout << "soft codebook: " << r.soft_codebook_bits << " bits explicit, "
              << r.soft_codebook_succinct << " bits succinct\n";
}

void cmd_quantize(const std::string& in_path, const std::string& out_path, int bits,
                  const std::vector<std::string>& exclude) {
  const Checkpoint ck = load_checkpoint(in_path);
  const Checkpoint qck = quantize_checkpoint(ck, bits, exclude);
  save_checkpoint(out_path, qck);
  const std::uint64_t before = checkpoint_payload_bytes(ck);
  const std::uint64_t after = checkpoint_payload_bytes(qck);
  std::cout << "tensor payload: " << before << " -> " << after << " bytes ("
            << format_ratio(after > 0 ? double(before) / double(after) : 0.0)
            << " smaller)\n"
            << "checkpoint file: " << std::filesystem::file_size(in_path) << " -> "
            << std::filesystem::file_size(out_path) << " bytes\n"
            << "saved: " << out_path << '\n';
}

void cmd_grad_check(const std::string& config_path, double epsilon, double tol) {
  const RunConfig rc = load_run_config(config_path);
  if (rc.train_path.empty()) throw std::runtime_error("config must set train");
  const Vocabulary vocab = resolve_vocabulary(rc);
  const std::vector<int> stream = load_stream(vocab, rc.train_path);

  // Double precision: central differences at epsilon drown in float noise.
  Model<double> model = build_model<double>(rc.model, vocab);
  StreamBatcher batcher(stream, vocab.eos_index, rc.hp.batch_size, rc.hp.bptt);
  const GradCheckResult res = grad_check(model, batcher.batch(0), epsilon);

  std::cout << "max_rel_err " << std::setprecision(6) << res.max_rel_err << " tensor "
            << res.worst_tensor << '[' << res.worst_index << "] analytic " << res.analytic
            << " numeric " << res.numeric << '\n';
  if (res.max_rel_err > tol) {
    std::ostringstream os;
    os << "gradient check failed: max relative error " << res.max_rel_err << " exceeds "
       << tol;
    throw std::runtime_error(os.str());
  }
  std::cout << "gradient check passed (tol " << tol << ")\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"WEST language models: factorized embedding/softmax over an LSTM"};
  app.require_subcommand(1);

  // build-vocab
  std::string bv_corpus, bv_out;
  int bv_max = 0;
  auto* build_vocab = app.add_subcommand("build-vocab", "Build a vocabulary from a corpus");
  build_vocab->add_option("--corpus", bv_corpus, "tokenized corpus file")->required();
  build_vocab->add_option("--out", bv_out, "output vocabulary file")->required();
  build_vocab->add_option("--max-size", bv_max,
                          "cap on vocabulary size incl. <eos>/<unk> (0 = no cap)");
  build_vocab->callback([&] { cmd_build_vocab(bv_corpus, bv_out, bv_max); });

  // gen-codebook
  std::string gc_vocab, gc_out, gc_kind = "random";
  int gc_k = 0, gc_n = 0, gc_t = 0;
  std::uint64_t gc_seed = 1;
  bool gc_eow = false;
  auto* gen_codebook =
      app.add_subcommand("gen-codebook", "Generate a codebook for a vocabulary");
  gen_codebook->add_option("--vocab", gc_vocab, "vocabulary file")->required();
  gen_codebook->add_option("--out", gc_out, "output codebook file")->required();
  gen_codebook->add_option("--kind", gc_kind, "random | hybrid | language");
  gen_codebook->add_option("--k", gc_k, "alphabet size (random/hybrid)");
  gen_codebook->add_option("--n", gc_n, "code length (max length for language)");
  gen_codebook->add_option("--t", gc_t, "singleton-coded top words (hybrid)");
  gen_codebook->add_option("--seed", gc_seed, "generator seed");
  gen_codebook->add_flag("--eow", gc_eow, "append <eow> to language codes");
  gen_codebook->callback(
      [&] { cmd_gen_codebook(gc_vocab, gc_out, gc_kind, gc_k, gc_n, gc_t, gc_seed, gc_eow); });

  // train
  std::string tr_config, tr_out;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", tr_config, "flat key-value config file")->required();
  train_cmd->add_option("--out", tr_out, "checkpoint path (default <out_dir>/model.ckpt)");
  train_cmd->callback([&] { cmd_train(tr_config, tr_out); });

  // eval
  std::string ev_ckpt, ev_corpus;
  auto* eval_cmd = app.add_subcommand("eval", "Word-level perplexity of a checkpoint");
  eval_cmd->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--corpus", ev_corpus, "corpus file (default: config's test)");
  eval_cmd->callback([&] { cmd_eval(ev_ckpt, ev_corpus); });

  // stats
  std::string st_config, st_ckpt, st_baseline;
  auto* stats_cmd =
      app.add_subcommand("stats", "Emb/LSTM/Soft parameter breakdown and ratios");
  stats_cmd->add_option("--config", st_config, "config file to describe");
  stats_cmd->add_option("--checkpoint", st_ckpt, "checkpoint to describe");
  stats_cmd->add_option("--baseline", st_baseline, "baseline config for ratios");
  stats_cmd->callback([&] {
    if (st_config.empty() == st_ckpt.empty())
      throw CLI::ValidationError("stats", "pass exactly one of --config or --checkpoint");
    cmd_stats(st_config, st_ckpt, st_baseline);
  });

  // quantize
  std::string qz_in, qz_out;
  int qz_bits = 8;
  std::vector<std::string> qz_exclude;
  auto* quant_cmd = app.add_subcommand("quantize", "Quantize a checkpoint's tensors");
  quant_cmd->add_option("--checkpoint", qz_in, "input checkpoint")->required();
  quant_cmd->add_option("--out", qz_out, "output checkpoint")->required();
  quant_cmd->add_option("--bits", qz_bits, "bit width, 8 or 16");
  quant_cmd->add_option("--exclude", qz_exclude,
                        "skip tensors whose name contains this substring (repeatable)");
  quant_cmd->callback([&] { cmd_quantize(qz_in, qz_out, qz_bits, qz_exclude); });

  // grad-check
  std::string gk_config;
  double gk_eps = 1e-4, gk_tol = 1e-4;
  auto* gk_cmd =
      app.add_subcommand("grad-check", "Finite-difference check of analytic gradients");
  gk_cmd->add_option("--config", gk_config, "config file")->required();
  gk_cmd->add_option("--epsilon", gk_eps, "central-difference step");
  gk_cmd->add_option("--tol", gk_tol, "max relative error accepted");
  gk_cmd->callback([&] { cmd_grad_check(gk_config, gk_eps, gk_tol); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
