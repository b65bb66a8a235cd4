#include "west/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace west {

namespace {

bool name_excluded(const std::string& name, const std::vector<std::string>& exclude) {
  for (const std::string& pattern : exclude)
    if (!pattern.empty() && name.find(pattern) != std::string::npos) return true;
  return false;
}

} // namespace

std::vector<float> tensor_values(const TensorRecord& rec) {
  if (rec.payload.size() != rec.expected_payload_bytes())
    throw std::runtime_error("corrupt payload length: " + rec.name);
  const std::uint64_t n = rec.numel();
  std::vector<float> out(n);
  switch (rec.bits) {
    case 0:
      for (std::uint64_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int byte = 0; byte < 4; ++byte)
          bits |= std::uint32_t(rec.payload[i * 4 + byte]) << (8 * byte);
        float f;
        std::memcpy(&f, &bits, 4);
        out[i] = f;
      }
      break;
    case 8:
      for (std::uint64_t i = 0; i < n; ++i)
        out[i] = static_cast<float>(rec.zero_point + rec.scale * rec.payload[i]);
      break;
    case 16:
      for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t q =
            std::uint32_t(rec.payload[i * 2]) | (std::uint32_t(rec.payload[i * 2 + 1]) << 8);
        out[i] = static_cast<float>(rec.zero_point + rec.scale * q);
      }
      break;
    default:
      throw std::runtime_error("quantization bits must be 8 or 16");
  }
  return out;
}

TensorRecord quantize_tensor(const TensorRecord& rec, int bits) {
  if (bits != 8 && bits != 16) throw std::runtime_error("quantization bits must be 8 or 16");
  const std::vector<float> values = tensor_values(rec);

  double lo = 0, hi = 0;
  bool first = true;
  for (float v : values) {
    if (!std::isfinite(v))
      throw std::runtime_error("tensor with non-finite values: " + rec.name);
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
  }

  TensorRecord out;
  out.name = rec.name;
  out.bits = bits;
  out.dims = rec.dims;
  const std::uint32_t levels = (1u << bits) - 1u;
  out.zero_point = lo;
  out.scale = hi > lo ? (hi - lo) / static_cast<double>(levels) : 0.0;

  out.payload.reserve(values.size() * (bits / 8));
  for (float v : values) {
    std::uint32_t q = 0;
    if (out.scale > 0) {
      const double stepped = (static_cast<double>(v) - lo) / out.scale;
      q = static_cast<std::uint32_t>(
          std::min<long>(levels, std::max<long>(0, std::lround(stepped))));
    }
    out.payload.push_back(static_cast<std::uint8_t>(q & 0xff));
    if (bits == 16) out.payload.push_back(static_cast<std::uint8_t>((q >> 8) & 0xff));
  }
  return out;
}

TensorRecord dequantize_tensor(const TensorRecord& rec) {
  if (rec.bits == 0) return rec;
  const std::vector<float> values = tensor_values(rec);
  TensorRecord out;
  out.name = rec.name;
  out.bits = 0;
  out.dims = rec.dims;
  out.payload.reserve(values.size() * 4);
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int byte = 0; byte < 4; ++byte)
      out.payload.push_back(static_cast<std::uint8_t>((bits >> (8 * byte)) & 0xff));
  }
  return out;
}

Checkpoint quantize_checkpoint(const Checkpoint& ck, int bits,
                               const std::vector<std::string>& exclude) {
  if (bits != 8 && bits != 16) throw std::runtime_error("quantization bits must be 8 or 16");
  Checkpoint out = ck;
  for (TensorRecord& t : out.tensors) {
    if (t.bits != 0 || name_excluded(t.name, exclude)) continue;
    t = quantize_tensor(t, bits);
  }
  return out;
}

Checkpoint dequantize_checkpoint(const Checkpoint& ck) {
  Checkpoint out = ck;
  for (TensorRecord& t : out.tensors) t = dequantize_tensor(t);
  return out;
}

} // namespace west
