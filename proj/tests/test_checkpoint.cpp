#include "west/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "west/corpus.hpp"
#include "west/model.hpp"
#include "west/quantize.hpp"
#include "west/rng.hpp"

using namespace west;

namespace {

TensorRecord float_record(std::string name, std::vector<std::uint64_t> dims,
                          const std::vector<float>& values) {
  TensorRecord rec;
  rec.name = std::move(name);
  rec.dims = std::move(dims);
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b)
      rec.payload.push_back(static_cast<std::uint8_t>((bits >> (8 * b)) & 0xff));
  }
  return rec;
}

// Hand-built checkpoint mixing float and quantized records plus an absent
// codebook side; exercises every branch of the wire format.
Checkpoint demo_checkpoint() {
  Checkpoint ck;
  ck.config_text = "hidden = 3\n";
  ck.vocab_text = "a 1\n";
  ck.soft_codebook_text = "random 3 2 0 9\n";
  ck.tensors.push_back(float_record("w", {2, 3}, {0.5f, -1.25f, 3.0f, 0.0f, 42.0f, -0.125f}));
  TensorRecord q;
  q.name = "q8";
  q.bits = 8;
  q.dims = {1, 4};
  q.scale = 0.5;
  q.zero_point = -1.0;
  q.payload = {0, 3, 128, 255};
  ck.tensors.push_back(q);
  return ck;
}

Vocabulary demo_vocab() {
  return build_vocabulary("the cat sat on the mat while the dog ran\n", 100);
}

// Both sides factorized (weighted embedding, biased head) so the checkpoint
// carries sub-matrices, lambda weights, LSTM tensors and a bias.
RunConfig demo_config() {
  RunConfig rc;
  rc.train_path = "data/train.txt";
  rc.model.emb_dim = 6;
  rc.model.hidden = 6;
  rc.model.init_range = 0.2;
  rc.model.seed = 7;
  rc.model.emb_mode = EmbeddingMode::west;
  rc.model.emb.coding = CodingKind::random;
  rc.model.emb.k = 5;
  rc.model.emb.n = 2;
  rc.model.emb.weighted = true;
  rc.model.head_mode = HeadMode::west;
  rc.model.soft.coding = CodingKind::random;
  rc.model.soft.k = 5;
  rc.model.soft.n = 2;
  rc.model.soft_bias = true;
  return rc;
}

// Overwrites every parameter (pad rows included) so no tensor is left at a
// value the allocator would reproduce on its own.
template <typename T>
void scribble_params(Model<T>& m) {
  SplitMix64 rng(271828);
  for (auto& ref : param_refs(m))
    for (auto& x : ref.value->v) x = static_cast<T>(rng.uniform_sym(1.0));
}

} // namespace

TEST_CASE("payload size follows the ceiling law per bit width") {
  TensorRecord rec;
  rec.dims = {3, 5};
  rec.bits = 0;
  CHECK(rec.numel() == 15);
  CHECK(rec.expected_payload_bytes() == 60);
  rec.bits = 8;
  CHECK(rec.expected_payload_bytes() == 15);
  rec.bits = 16;
  CHECK(rec.expected_payload_bytes() == 30);
  rec.dims.clear();
  CHECK(rec.numel() == 0);
  CHECK(rec.expected_payload_bytes() == 0);
}

TEST_CASE("encode/decode is the identity in both directions") {
  const Checkpoint ck = demo_checkpoint();
  const std::string bytes = encode_checkpoint(ck);

  CHECK(bytes.size() >= 12);
  CHECK(std::memcmp(bytes.data(), "WESTCKP1", 8) == 0);
  CHECK(bytes[8] == 1); // version, little-endian u32
  CHECK(bytes[9] == 0);

  CHECK(decode_checkpoint(bytes) == ck);
  CHECK(encode_checkpoint(decode_checkpoint(bytes)) == bytes);
  CHECK(checkpoint_payload_bytes(ck) == 24 + 4);
}

TEST_CASE("save/load round-trips through a file") {
  const Checkpoint ck = demo_checkpoint();
  const std::string path =
      (std::filesystem::temp_directory_path() / "west_test_ck.bin").string();
  save_checkpoint(path, ck);
  CHECK(load_checkpoint(path) == ck);
  std::filesystem::remove(path);

  bool threw = false;
  try {
    load_checkpoint(path);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).starts_with("cannot read file: "));
  }
  CHECK(threw);
}

TEST_CASE("every strict prefix is rejected as truncated") {
  const std::string bytes = encode_checkpoint(demo_checkpoint());
  int other_outcomes = 0;
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    try {
      decode_checkpoint(std::string_view(bytes).substr(0, len));
      ++other_outcomes;
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()) != "truncated checkpoint") ++other_outcomes;
    }
  }
  CHECK(other_outcomes == 0);
}

TEST_CASE("corrupt streams are rejected with named errors") {
  Checkpoint ck = demo_checkpoint();
  std::string bytes = encode_checkpoint(ck);

  SUBCASE("wrong magic") {
    bytes[0] = 'X';
    CHECK_THROWS_WITH(decode_checkpoint(bytes), "not a checkpoint file");
  }
  SUBCASE("unknown version") {
    bytes[8] = 2;
    CHECK_THROWS_WITH(decode_checkpoint(bytes), "unsupported checkpoint version");
  }
  SUBCASE("trailing bytes") {
    bytes.push_back('\0');
    CHECK_THROWS_WITH(decode_checkpoint(bytes), "trailing bytes in checkpoint");
  }
  SUBCASE("bit width outside {0, 8, 16}") {
    ck.tensors[1].bits = 4;
    CHECK_THROWS_WITH(decode_checkpoint(encode_checkpoint(ck)),
                      "quantization bits must be 8 or 16");
  }
  SUBCASE("payload length inconsistent with dims") {
    ck.tensors[0].payload.pop_back();
    CHECK_THROWS_WITH(decode_checkpoint(encode_checkpoint(ck)), "corrupt payload length: w");
  }
}

TEST_CASE("model checkpoints echo resolved config, vocabulary and codebooks") {
  const Vocabulary vocab = demo_vocab();
  const RunConfig rc = demo_config();
  Model<float> m = build_model<float>(rc.model, vocab);
  const Checkpoint ck = make_checkpoint(rc, m, vocab);

  // The config echo is canonical text with shapes resolved from the model.
  const RunConfig echoed = parse_config(ck.config_text);
  CHECK(serialize_config(echoed) == ck.config_text);
  CHECK(echoed.model.vocab_size == vocab.size());
  CHECK(echoed.train_path == "data/train.txt");

  const Vocabulary back = deserialize_vocabulary(ck.vocab_text);
  CHECK(back.words == vocab.words);
  CHECK(back.frequencies == vocab.frequencies);

  REQUIRE(!ck.emb_codebook_text.empty());
  REQUIRE(!ck.soft_codebook_text.empty());
  CHECK(deserialize_codebook(ck.emb_codebook_text) == *m.emb_codebook);
  CHECK(deserialize_codebook(ck.soft_codebook_text) == *m.soft_codebook);

  const auto refs = param_refs(m);
  REQUIRE(ck.tensors.size() == refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    CHECK(ck.tensors[i].name == refs[i].name);
    CHECK(ck.tensors[i].bits == 0);
    REQUIRE(ck.tensors[i].dims.size() == 2);
    CHECK(ck.tensors[i].dims[0] == refs[i].value->rows);
    CHECK(ck.tensors[i].dims[1] == refs[i].value->cols);
    CHECK(ck.tensors[i].payload.size() == refs[i].value->size() * 4);
  }
}

TEST_CASE("full/full models carry no codebook text") {
  const Vocabulary vocab = demo_vocab();
  RunConfig rc;
  rc.model.emb_dim = 4;
  rc.model.hidden = 4;
  Model<float> m = build_model<float>(rc.model, vocab);
  const Checkpoint ck = make_checkpoint(rc, m, vocab);
  CHECK(ck.emb_codebook_text.empty());
  CHECK(ck.soft_codebook_text.empty());
  CHECK(restore_model<float>(ck).model.emb_codebook == nullptr);
}

TEST_CASE("restore rebuilds the model bit-exactly") {
  const Vocabulary vocab = demo_vocab();
  const RunConfig rc = demo_config();
  Model<float> m = build_model<float>(rc.model, vocab);
  scribble_params(m);
  const Checkpoint ck = make_checkpoint(rc, m, vocab);
  const std::string bytes = encode_checkpoint(ck);

  RestoredModel<float> restored = restore_model<float>(decode_checkpoint(bytes));

  RunConfig expected = rc;
  expected.model = m.cfg;
  CHECK(restored.config == expected);
  CHECK(restored.vocab.words == vocab.words);
  CHECK(*restored.model.emb_codebook == *m.emb_codebook);
  CHECK(*restored.model.soft_codebook == *m.soft_codebook);

  const auto want = param_refs(m);
  const auto got = param_refs(restored.model);
  REQUIRE(want.size() == got.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    REQUIRE(got[i].name == want[i].name);
    REQUIRE(got[i].value->size() == want[i].value->size());
    CHECK(std::memcmp(got[i].value->data(), want[i].value->data(),
                      want[i].value->size() * sizeof(float)) == 0);
  }

  // Re-checkpointing the restored model reproduces the original bytes —
  // float precision survives the trip, and so does a detour through double.
  CHECK(encode_checkpoint(make_checkpoint(restored.config, restored.model, restored.vocab)) ==
        bytes);
  RestoredModel<double> wide = restore_model<double>(decode_checkpoint(bytes));
  CHECK(encode_checkpoint(make_checkpoint(wide.config, wide.model, wide.vocab)) == bytes);
}

TEST_CASE("restore failure modes are named") {
  const Vocabulary vocab = demo_vocab();
  const RunConfig rc = demo_config();
  Model<float> m = build_model<float>(rc.model, vocab);
  const Checkpoint ck = make_checkpoint(rc, m, vocab);

  SUBCASE("missing tensor") {
    Checkpoint broken = ck;
    const std::string name = broken.tensors.front().name;
    broken.tensors.erase(broken.tensors.begin());
    CHECK_THROWS_WITH(restore_model<float>(broken),
                      ("checkpoint missing tensor: " + name).c_str());
  }
  SUBCASE("shape mismatch") {
    Checkpoint broken = ck;
    std::swap(broken.tensors.front().dims[0], broken.tensors.front().dims[1]);
    CHECK_THROWS_WITH(restore_model<float>(broken),
                      ("tensor shape mismatch: " + broken.tensors.front().name).c_str());
  }
  SUBCASE("unknown tensor") {
    Checkpoint broken = ck;
    broken.tensors.push_back(float_record("extra.bogus", {1, 1}, {1.0f}));
    CHECK_THROWS_WITH(restore_model<float>(broken), "unknown tensor in checkpoint: extra.bogus");
  }
  SUBCASE("unparsable config echo") {
    Checkpoint broken = ck;
    broken.config_text = "garbage";
    CHECK_THROWS_WITH(restore_model<float>(broken), "malformed config line: garbage");
  }
}
