#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "osc/activation.hpp"
#include "osc/nn/ops.hpp"
#include "osc/nn/optim.hpp"
#include "osc/nn/tensor.hpp"

namespace osc::nn {

// 3x3, stride 1, same padding; followed by the activation.
struct Conv2dSpec {
    std::size_t out_channels;
    ActivationId activation;
};
struct MaxPoolSpec {};
struct FlattenSpec {};
struct DenseSpec {
    std::size_t units;
    ActivationId activation;
};
struct DropoutSpec {
    double rate;
};
// Final affine layer producing class logits, no activation.
struct LogitsDenseSpec {
    std::size_t units = 10;
};

using LayerSpec = std::variant<Conv2dSpec, MaxPoolSpec, FlattenSpec, DenseSpec, DropoutSpec, LogitsDenseSpec>;

std::string describe(const LayerSpec& spec);

struct NetworkConfig {
    int conv_layers = 2;
    ActivationId activation = ActivationId::ReLU;
    std::uint64_t seed = 0;

    std::size_t in_channels = 3;
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t classes = 10;
    std::size_t dense_units = 64;
    double dropout_rate = 0.5;

    // Throws ConfigError: conv_layers must be 1..4 and the spatial size must
    // survive conv_layers halvings.
    void validate() const;
};

inline constexpr std::size_t kConvChannels[4] = {32, 64, 128, 128};

// [Conv2d(c_l), MaxPool] per conv layer, then Flatten, Dense(64), Dropout(0.5),
// LogitsDense(classes).
std::vector<LayerSpec> architecture(const NetworkConfig& cfg);

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

class Model {
public:
    // Weights are He-uniform (limit sqrt(6 / fan_in)) drawn from `seed`, biases 0.
    Model(std::vector<LayerSpec> specs, Shape sample_shape, std::uint64_t seed);
    ~Model();
    Model(Model&&) noexcept;
    Model& operator=(Model&&) noexcept;

    const std::vector<LayerSpec>& specs() const;
    const Shape& sample_shape() const;  // [C, H, W]
    std::size_t flatten_dim() const;

    // Train mode needs `rng` for dropout masks; eval mode ignores it.
    Tensor forward(const Tensor& batch, Mode mode, std::mt19937_64* rng = nullptr);
    // Accumulates parameter gradients; returns d loss / d input.
    Tensor backward(const Tensor& grad_logits);

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    void zero_grad();

    AdamState& optimizer_state();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Model build_model(const NetworkConfig& cfg);

// Labelled samples of a fixed shape.
class Dataset {
public:
    virtual ~Dataset() = default;
    virtual std::size_t size() const = 0;
    virtual Shape sample_shape() const = 0;
    virtual int label(std::size_t i) const = 0;
    virtual void copy_sample(std::size_t i, std::span<double> out) const = 0;
};

class TensorDataset final : public Dataset {
public:
    // inputs [N, ...]; labels.size() == N.
    TensorDataset(Tensor inputs, std::vector<int> labels);

    std::size_t size() const override { return labels_.size(); }
    Shape sample_shape() const override;
    int label(std::size_t i) const override { return labels_.at(i); }
    void copy_sample(std::size_t i, std::span<double> out) const override;

private:
    Tensor inputs_;
    std::vector<int> labels_;
    std::size_t sample_size_ = 0;
};

// Gathers the given samples into a [n, ...] tensor plus their labels.
Tensor gather_batch(const Dataset& data, std::span<const std::size_t> indices, std::vector<int>& labels);

struct TrainOptions {
    std::size_t batch = 64;
    double lr = 1e-4;
};

// Shuffles with `rng`, runs Adam over every batch (last one may be short) and
// returns the sample-weighted mean training loss. Throws DivergenceError on a
// non-finite batch loss.
double train_epoch(Model& model, const Dataset& data, const TrainOptions& opts, std::mt19937_64& rng);

// Mean cross-entropy in eval mode.
double evaluate_loss(Model& model, const Dataset& data, std::size_t batch = 256);

// Fraction of samples whose argmax logit (lowest index on ties) equals the label.
double evaluate_top1(Model& model, const Dataset& data, std::size_t batch = 256);

}  // namespace osc::nn
