#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "west/checkpoint.hpp"

namespace west {

// Per-tensor affine min/max quantization to 8 or 16 bits:
// q = round((x - min) / scale), value = zero_point + scale * q with
// zero_point = min. Constant tensors degenerate to scale = 0 and reconstruct
// exactly. Throws "quantization bits must be 8 or 16" and
// "tensor with non-finite values: NAME".
TensorRecord quantize_tensor(const TensorRecord& rec, int bits);

// Decodes any record back to floats (identity for float records, inverse
// affine map otherwise). Throws "corrupt payload length: NAME".
std::vector<float> tensor_values(const TensorRecord& rec);

// Float record with the decoded values (used to materialize a quantized
// checkpoint back into float form).
TensorRecord dequantize_tensor(const TensorRecord& rec);

// Applies quantize_tensor to every float tensor whose name contains none of
// the exclude substrings; config, vocabulary and codebooks pass through
// untouched. Already-quantized records are left as they are.
Checkpoint quantize_checkpoint(const Checkpoint& ck, int bits,
                               const std::vector<std::string>& exclude = {});

// Inverse storage transform: every quantized record becomes a float record.
Checkpoint dequantize_checkpoint(const Checkpoint& ck);

} // namespace west
