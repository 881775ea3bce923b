#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "osc/nn/tensor.hpp"

namespace osc::nn {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;   // allocated on the first step
    std::vector<Tensor> second_moment;
};

// One bias-corrected Adam update. params[i] and grads[i] must share a shape,
// and the parameter list must stay the same across calls with one state.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state, double lr);

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, double lr);

}  // namespace osc::nn
