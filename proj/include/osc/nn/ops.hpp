#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "osc/activation.hpp"
#include "osc/nn/tensor.hpp"

namespace osc::nn {

enum class Mode { Train, Eval };

// 3x3 cross-correlation, stride 1, zero padding 1.
// input [N,C,H,W], weights [K,C,3,3], bias [K] -> [N,K,H,W].
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct Conv2dGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output);

// 2x2 non-overlapping max pool. `argmax` holds, for every output element, the
// flat input offset that won (first in row-major block order on ties).
struct PoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;
};

PoolResult maxpool2_forward(const Tensor& input);
Tensor maxpool2_backward(const Shape& input_shape, std::span<const std::size_t> argmax, const Tensor& grad_output);

// x [N,D] * W [D,U] + b [U].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output);

// Non-finite inputs map to NaN rather than throwing.
Tensor activation_forward(const Tensor& input, ActivationId id);
// grad_output * g'(pre_activation), with 0 at kinks.
Tensor activation_backward(const Tensor& pre_activation, ActivationId id, const Tensor& grad_output);

// Inverted dropout. `mask` holds 0 or 1/(1-rate) per element (all ones in eval).
struct DropoutResult {
    Tensor output;
    Tensor mask;
};

DropoutResult dropout(const Tensor& input, double rate, Mode mode, std::mt19937_64& rng);
DropoutResult dropout(const Tensor& input, double rate, Mode mode, std::uint64_t seed);

struct LossResult {
    double loss = 0.0;  // mean over the batch
    Tensor grad;        // d loss / d logits = (softmax - onehot) / N
};

// Throws LabelError for labels outside [0, classes).
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

// Index of the largest logit per row, lowest index on ties.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace osc::nn
