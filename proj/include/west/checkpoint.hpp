#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "west/config.hpp"
#include "west/model.hpp"

namespace west {

inline constexpr char kCheckpointMagic[8] = {'W', 'E', 'S', 'T', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// One named tensor. bits = 0 stores row-major little-endian float32; bits 8
// or 16 store an affine-quantized integer payload with
// value = zero_point + scale * q.
struct TensorRecord {
  std::string name;
  int bits = 0;
  std::vector<std::uint64_t> dims;
  double scale = 0;
  double zero_point = 0;
  std::vector<std::uint8_t> payload;

  std::uint64_t numel() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
  // ceil(numel * b / 8) with b = 32 for float records
  std::uint64_t expected_payload_bytes() const {
    const std::uint64_t b = bits == 0 ? 32 : static_cast<std::uint64_t>(bits);
    return (numel() * b + 7) / 8;
  }

  bool operator==(const TensorRecord& o) const = default;
};

// Everything needed to rebuild a model: the resolved run config echoed as
// canonical text, the vocabulary, codebook texts (empty when that side is a
// full matrix), and every trainable tensor.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_text;
  std::string vocab_text;
  std::string emb_codebook_text;
  std::string soft_codebook_text;
  std::vector<TensorRecord> tensors;

  bool operator==(const Checkpoint& o) const = default;
};

// Binary form. decode(encode(ck)) == ck and encode(decode(bytes)) == bytes.
std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Sum of tensor payload bytes (the serialized parameter storage, excluding
// headers, config and codebook text).
std::uint64_t checkpoint_payload_bytes(const Checkpoint& ck);

// Snapshot of a model: rc is echoed with rc.model replaced by the model's
// own (resolved) config so shapes are derivable from the text alone.
template <typename T>
Checkpoint make_checkpoint(const RunConfig& rc, Model<T>& m, const Vocabulary& vocab);

template <typename T>
struct RestoredModel {
  RunConfig config;
  Vocabulary vocab;
  Model<T> model;
};

// Rebuilds the model from a checkpoint: parses the config echo, restores the
// vocabulary and codebooks, allocates tensors and fills them from the
// records (dequantizing when needed).
template <typename T>
RestoredModel<T> restore_model(const Checkpoint& ck);

} // namespace west
