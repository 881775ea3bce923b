#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "osc/nn/model.hpp"
#include "osc/nn/tensor.hpp"

namespace osc::nn {

// Checkpoint layout, all integers little-endian u32:
//   "OSC1" | tensor count | per tensor: rank, dims... | every value as LE float32
// Values are narrowed to float32 on write.
void write_tensors(std::span<const Tensor* const> tensors, std::ostream& os);
// Throws FormatError on a bad magic, truncated stream or trailing bytes.
std::vector<Tensor> read_tensors(std::istream& is);

void save_checkpoint(const Model& model, std::ostream& os);
// Throws FormatError when the stored shapes do not match the model's parameters.
void load_checkpoint(Model& model, std::istream& is);

}  // namespace osc::nn
