#include "osc/nn/optim.hpp"

#include <cmath>
#include <string>

#include "osc/error.hpp"

namespace osc::nn {

namespace {

void check_pairs(std::span<Tensor* const> params, std::span<const Tensor* const> grads) {
    if (params.size() != grads.size()) {
        throw ShapeError("optimizer: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        expect_shape(*grads[i], params[i]->shape(), "optimizer gradient");
    }
}

}  // namespace

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state, double lr) {
    check_pairs(params, grads);
    if (state.first_moment.empty()) {
        for (const Tensor* p : params) {
            state.first_moment.emplace_back(p->shape());
            state.second_moment.emplace_back(p->shape());
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                         " tensors, got " + std::to_string(params.size()));
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& m = state.first_moment[i];
        Tensor& v = state.second_moment[i];
        expect_shape(m, p.shape(), "adam_step moment");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, double lr) {
    check_pairs(params, grads);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
    }
}

}  // namespace osc::nn
