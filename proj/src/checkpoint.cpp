#include "west/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "west/quantize.hpp"

namespace west {

namespace {

// All integers little-endian fixed-width; floats IEEE-754 bit patterns.
void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& out, T v) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits;
  if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
    std::memcpy(&bits, &v, 8);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  put_bytes(out, bytes, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put_le<std::uint64_t>(out, s.size());
  put_bytes(out, s.data(), s.size());
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw std::runtime_error("truncated checkpoint");
  }
  const char* take(std::size_t n) {
    need(n);
    const char* p = data.data() + pos;
    pos += n;
    return p;
  }
  template <typename T>
  T get_le() {
    const unsigned char* p = reinterpret_cast<const unsigned char*>(take(sizeof(T)));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t(p[i]) << (8 * i);
    if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>) {
      T v;
      std::memcpy(&v, &bits, 8);
      return v;
    } else {
      return static_cast<T>(bits);
    }
  }
  std::string get_string() {
    std::uint64_t n = get_le<std::uint64_t>();
    return std::string(take(n), n);
  }
};

} // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  std::string out;
  put_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, ck.version);
  put_string(out, ck.config_text);
  put_string(out, ck.vocab_text);
  put_string(out, ck.emb_codebook_text);
  put_string(out, ck.soft_codebook_text);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const TensorRecord& t : ck.tensors) {
    put_string(out, t.name);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.bits));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint64_t d : t.dims) put_le<std::uint64_t>(out, d);
    if (t.bits != 0) {
      put_le<double>(out, t.scale);
      put_le<double>(out, t.zero_point);
    }
    put_le<std::uint64_t>(out, t.payload.size());
    put_bytes(out, t.payload.data(), t.payload.size());
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r{bytes};
  const char* magic = r.take(sizeof(kCheckpointMagic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw std::runtime_error("not a checkpoint file");
  Checkpoint ck;
  ck.version = r.get_le<std::uint32_t>();
  if (ck.version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version");
  ck.config_text = r.get_string();
  ck.vocab_text = r.get_string();
  ck.emb_codebook_text = r.get_string();
  ck.soft_codebook_text = r.get_string();
  const std::uint32_t count = r.get_le<std::uint32_t>();
  ck.tensors.resize(count);
  for (TensorRecord& t : ck.tensors) {
    t.name = r.get_string();
    t.bits = r.get_le<std::uint8_t>();
    if (t.bits != 0 && t.bits != 8 && t.bits != 16)
      throw std::runtime_error("quantization bits must be 8 or 16");
    const std::uint8_t rank = r.get_le<std::uint8_t>();
    t.dims.resize(rank);
    for (std::uint64_t& d : t.dims) d = r.get_le<std::uint64_t>();
    if (t.bits != 0) {
      t.scale = r.get_le<double>();
      t.zero_point = r.get_le<double>();
    }
    const std::uint64_t payload_len = r.get_le<std::uint64_t>();
    if (payload_len != t.expected_payload_bytes())
      throw std::runtime_error("corrupt payload length: " + t.name);
    const char* p = r.take(payload_len);
    t.payload.assign(p, p + payload_len);
  }
  if (r.pos != bytes.size()) throw std::runtime_error("trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write file: " + path);
  const std::string bytes = encode_checkpoint(ck);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw std::runtime_error("cannot write file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::uint64_t checkpoint_payload_bytes(const Checkpoint& ck) {
  std::uint64_t total = 0;
  for (const TensorRecord& t : ck.tensors) total += t.payload.size();
  return total;
}

template <typename T>
Checkpoint make_checkpoint(const RunConfig& rc, Model<T>& m, const Vocabulary& vocab) {
  Checkpoint ck;
  RunConfig echo = rc;
  echo.model = m.cfg;
  ck.config_text = serialize_config(echo);
  ck.vocab_text = serialize_vocabulary(vocab);
  if (m.emb_codebook)
    ck.emb_codebook_text = serialize_codebook(
        *m.emb_codebook, m.emb_codebook->kind == CodingKind::language);
  if (m.soft_codebook)
    ck.soft_codebook_text = serialize_codebook(
        *m.soft_codebook, m.soft_codebook->kind == CodingKind::language);
  for (auto& ref : param_refs(m)) {
    TensorRecord rec;
    rec.name = ref.name;
    rec.dims = {ref.value->rows, ref.value->cols};
    rec.payload.reserve(ref.value->size() * 4);
    for (std::size_t i = 0; i < ref.value->size(); ++i) {
      const float f = static_cast<float>(ref.value->data()[i]);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      for (int byte = 0; byte < 4; ++byte)
        rec.payload.push_back(static_cast<std::uint8_t>((bits >> (8 * byte)) & 0xff));
    }
    ck.tensors.push_back(std::move(rec));
  }
  return ck;
}

template <typename T>
RestoredModel<T> restore_model(const Checkpoint& ck) {
  RestoredModel<T> out;
  out.config = parse_config(ck.config_text);
  out.vocab = deserialize_vocabulary(ck.vocab_text);

  Codebook emb_cb, soft_cb;
  if (!ck.emb_codebook_text.empty()) emb_cb = deserialize_codebook(ck.emb_codebook_text);
  if (!ck.soft_codebook_text.empty()) soft_cb = deserialize_codebook(ck.soft_codebook_text);
  // Allocation already establishes all frozen state (zero pad rows, unit
  // lambda pattern); every trainable tensor is then filled from its record.
  out.model = allocate_model<T>(out.config.model, std::move(emb_cb), std::move(soft_cb));

  std::unordered_map<std::string, const TensorRecord*> by_name;
  for (const TensorRecord& t : ck.tensors) by_name.emplace(t.name, &t);

  std::size_t used = 0;
  for (auto& ref : param_refs(out.model)) {
    auto it = by_name.find(ref.name);
    if (it == by_name.end())
      throw std::runtime_error("checkpoint missing tensor: " + ref.name);
    const TensorRecord& rec = *it->second;
    if (rec.dims.size() != 2 || rec.dims[0] != ref.value->rows ||
        rec.dims[1] != ref.value->cols)
      throw std::runtime_error("tensor shape mismatch: " + ref.name);
    const std::vector<float> values = tensor_values(rec);
    for (std::size_t i = 0; i < values.size(); ++i)
      ref.value->data()[i] = static_cast<T>(values[i]);
    ++used;
  }
  if (used != ck.tensors.size()) {
    std::unordered_map<std::string, bool> known;
    for (auto& ref : param_refs(out.model)) known.emplace(ref.name, true);
    for (const TensorRecord& t : ck.tensors)
      if (!known.count(t.name))
        throw std::runtime_error("unknown tensor in checkpoint: " + t.name);
  }
  return out;
}

template Checkpoint make_checkpoint<float>(const RunConfig&, Model<float>&, const Vocabulary&);
template Checkpoint make_checkpoint<double>(const RunConfig&, Model<double>&,
                                            const Vocabulary&);
template RestoredModel<float> restore_model<float>(const Checkpoint&);
template RestoredModel<double> restore_model<double>(const Checkpoint&);

} // namespace west
