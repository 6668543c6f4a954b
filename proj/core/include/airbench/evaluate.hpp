#pragma once

#include <cstdint>
#include <vector>

#include "airbench/net.hpp"
#include "airbench/tensor.hpp"

namespace airbench {

// Eval-mode inference with test-time augmentation. Levels: 0 none, 1 mirror,
// 2 mirror+translate (six views weighted 1/4,1/4,1/8,1/8,1/8,1/8). Images are
// processed in fixed-size chunks; chunking does not affect the result.
Tensor infer(Net& net, const Tensor& images, int tta_level, int64_t chunk_size = 2000);

// Fraction of rows whose argmax equals the label; ties break toward the
// lowest class index.
double accuracy(const Tensor& logits, const std::vector<int32_t>& labels);

} // namespace airbench
