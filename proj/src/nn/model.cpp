#include "osc/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "osc/error.hpp"

namespace osc::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Mode mode, std::mt19937_64* rng) = 0;
    virtual Tensor backward(const Tensor& grad) = 0;
    virtual std::vector<Parameter*> parameters() { return {}; }
};

void he_uniform(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : t.data()) v = u(rng);
}

class ConvLayer final : public Layer {
public:
    ConvLayer(std::size_t in_c, std::size_t out_c, std::size_t index, std::mt19937_64& rng)
        : weight_{"conv" + std::to_string(index) + ".weight", Tensor({out_c, in_c, 3, 3}), Tensor({out_c, in_c, 3, 3})},
          bias_{"conv" + std::to_string(index) + ".bias", Tensor({out_c}), Tensor({out_c})} {
        he_uniform(weight_.value, in_c * 9, rng);
    }

    Tensor forward(const Tensor& x, Mode, std::mt19937_64*) override {
        input_ = x;
        return conv2d_forward(x, weight_.value, bias_.value);
    }

    Tensor backward(const Tensor& grad) override {
        Conv2dGrads g = conv2d_backward(input_, weight_.value, grad);
        for (std::size_t i = 0; i < g.weights.size(); ++i) weight_.grad[i] += g.weights[i];
        for (std::size_t i = 0; i < g.bias.size(); ++i) bias_.grad[i] += g.bias[i];
        return std::move(g.input);
    }

    std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

private:
    Parameter weight_;
    Parameter bias_;
    Tensor input_;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out, const std::string& label, std::mt19937_64& rng)
        : weight_{label + ".weight", Tensor({in, out}), Tensor({in, out})},
          bias_{label + ".bias", Tensor({out}), Tensor({out})} {
        he_uniform(weight_.value, in, rng);
    }

    Tensor forward(const Tensor& x, Mode, std::mt19937_64*) override {
        input_ = x;
        return dense_forward(x, weight_.value, bias_.value);
    }

    Tensor backward(const Tensor& grad) override {
        DenseGrads g = dense_backward(input_, weight_.value, grad);
        for (std::size_t i = 0; i < g.weights.size(); ++i) weight_.grad[i] += g.weights[i];
        for (std::size_t i = 0; i < g.bias.size(); ++i) bias_.grad[i] += g.bias[i];
        return std::move(g.input);
    }

    std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

private:
    Parameter weight_;
    Parameter bias_;
    Tensor input_;
};

class ActivationLayer final : public Layer {
public:
    explicit ActivationLayer(ActivationId id) : id_(id) {}

    Tensor forward(const Tensor& x, Mode, std::mt19937_64*) override {
        pre_ = x;
        return activation_forward(x, id_);
    }

    Tensor backward(const Tensor& grad) override { return activation_backward(pre_, id_, grad); }

private:
    ActivationId id_;
    Tensor pre_;
};

class PoolLayer final : public Layer {
public:
    Tensor forward(const Tensor& x, Mode, std::mt19937_64*) override {
        PoolResult r = maxpool2_forward(x);
        input_shape_ = x.shape();
        argmax_ = std::move(r.argmax);
        return std::move(r.output);
    }

    Tensor backward(const Tensor& grad) override { return maxpool2_backward(input_shape_, argmax_, grad); }

private:
    Shape input_shape_;
    std::vector<std::size_t> argmax_;
};

class FlattenLayer final : public Layer {
public:
    Tensor forward(const Tensor& x, Mode, std::mt19937_64*) override {
        input_shape_ = x.shape();
        return x.reshaped({x.dim(0), x.size() / x.dim(0)});
    }

    Tensor backward(const Tensor& grad) override { return grad.reshaped(input_shape_); }

private:
    Shape input_shape_;
};

class DropoutLayer final : public Layer {
public:
    explicit DropoutLayer(double rate) : rate_(rate) {}

    Tensor forward(const Tensor& x, Mode mode, std::mt19937_64* rng) override {
        if (mode == Mode::Train && rate_ > 0.0 && rng == nullptr) {
            throw ConfigError("dropout in train mode needs a random generator");
        }
        std::mt19937_64 unused;
        DropoutResult r = dropout(x, rate_, mode, rng ? *rng : unused);
        mask_ = std::move(r.mask);
        return std::move(r.output);
    }

    Tensor backward(const Tensor& grad) override {
        Tensor g = grad;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
        return g;
    }

private:
    double rate_;
    Tensor mask_;
};

}  // namespace

std::string describe(const LayerSpec& spec) {
    return std::visit(overloaded{
                          [](const Conv2dSpec& s) {
                              return "Conv2d(" + std::to_string(s.out_channels) + ", 3x3, " +
                                     std::string(name(s.activation)) + ")";
                          },
                          [](const MaxPoolSpec&) { return std::string("MaxPool(2x2)"); },
                          [](const FlattenSpec&) { return std::string("Flatten"); },
                          [](const DenseSpec& s) {
                              return "Dense(" + std::to_string(s.units) + ", " + std::string(name(s.activation)) + ")";
                          },
                          [](const DropoutSpec& s) {
                              std::ostringstream os;
                              os << "Dropout(" << s.rate << ")";
                              return os.str();
                          },
                          [](const LogitsDenseSpec& s) { return "LogitsDense(" + std::to_string(s.units) + ")"; },
                      },
                      spec);
}

void NetworkConfig::validate() const {
    if (conv_layers < 1 || conv_layers > 4) {
        throw ConfigError("conv_layers must be in 1..4, got " + std::to_string(conv_layers));
    }
    const std::size_t factor = std::size_t{1} << conv_layers;
    if (height % factor != 0 || width % factor != 0 || height < factor || width < factor) {
        throw ConfigError("input " + std::to_string(height) + "x" + std::to_string(width) + " cannot be pooled " +
                          std::to_string(conv_layers) + " times");
    }
    if (in_channels == 0 || classes < 2 || dense_units == 0) {
        throw ConfigError("in_channels, dense_units must be positive and classes >= 2");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

std::vector<LayerSpec> architecture(const NetworkConfig& cfg) {
    cfg.validate();
    std::vector<LayerSpec> specs;
    for (int l = 0; l < cfg.conv_layers; ++l) {
        specs.emplace_back(Conv2dSpec{kConvChannels[l], cfg.activation});
        specs.emplace_back(MaxPoolSpec{});
    }
    specs.emplace_back(FlattenSpec{});
    specs.emplace_back(DenseSpec{cfg.dense_units, cfg.activation});
    specs.emplace_back(DropoutSpec{cfg.dropout_rate});
    specs.emplace_back(LogitsDenseSpec{cfg.classes});
    return specs;
}

struct Model::Impl {
    std::vector<LayerSpec> specs;
    Shape sample_shape;
    std::size_t flatten_dim = 0;
    std::vector<std::unique_ptr<Layer>> layers;
    AdamState adam;
};

Model::Model(std::vector<LayerSpec> specs, Shape sample_shape, std::uint64_t seed) : impl_(std::make_unique<Impl>()) {
    if (sample_shape.size() != 3) throw ShapeError("model sample shape must be [C, H, W], got " + to_string(sample_shape));
    impl_->specs = std::move(specs);
    impl_->sample_shape = sample_shape;

    std::mt19937_64 rng(seed);
    Shape cur = sample_shape;  // [C,H,W] while spatial, [D] after flatten
    std::size_t conv_index = 0, dense_index = 0;
    for (const LayerSpec& spec : impl_->specs) {
        std::visit(overloaded{
                       [&](const Conv2dSpec& s) {
                           if (cur.size() != 3) throw ConfigError("Conv2d after Flatten");
                           impl_->layers.push_back(std::make_unique<ConvLayer>(cur[0], s.out_channels, ++conv_index, rng));
                           impl_->layers.push_back(std::make_unique<ActivationLayer>(s.activation));
                           cur[0] = s.out_channels;
                       },
                       [&](const MaxPoolSpec&) {
                           if (cur.size() != 3 || cur[1] % 2 || cur[2] % 2) {
                               throw ConfigError("MaxPool needs even spatial dims, got " + to_string(cur));
                           }
                           impl_->layers.push_back(std::make_unique<PoolLayer>());
                           cur[1] /= 2;
                           cur[2] /= 2;
                       },
                       [&](const FlattenSpec&) {
                           impl_->layers.push_back(std::make_unique<FlattenLayer>());
                           cur = {element_count(cur)};
                           impl_->flatten_dim = cur[0];
                       },
                       [&](const DenseSpec& s) {
                           if (cur.size() != 1) throw ConfigError("Dense before Flatten");
                           impl_->layers.push_back(std::make_unique<DenseLayer>(
                               cur[0], s.units, "dense" + std::to_string(++dense_index), rng));
                           impl_->layers.push_back(std::make_unique<ActivationLayer>(s.activation));
                           cur = {s.units};
                       },
                       [&](const DropoutSpec& s) {
                           if (!(s.rate >= 0.0 && s.rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
                           impl_->layers.push_back(std::make_unique<DropoutLayer>(s.rate));
                       },
                       [&](const LogitsDenseSpec& s) {
                           if (cur.size() != 1) throw ConfigError("LogitsDense before Flatten");
                           impl_->layers.push_back(std::make_unique<DenseLayer>(cur[0], s.units, "logits", rng));
                           cur = {s.units};
                       },
                   },
                   spec);
    }
}

Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

const std::vector<LayerSpec>& Model::specs() const { return impl_->specs; }
const Shape& Model::sample_shape() const { return impl_->sample_shape; }
std::size_t Model::flatten_dim() const { return impl_->flatten_dim; }
AdamState& Model::optimizer_state() { return impl_->adam; }

Tensor Model::forward(const Tensor& batch, Mode mode, std::mt19937_64* rng) {
    if (batch.rank() != 4 || Shape(batch.shape().begin() + 1, batch.shape().end()) != impl_->sample_shape) {
        throw ShapeError("model input: expected [N, " + to_string(impl_->sample_shape).substr(1) + ", got " +
                         to_string(batch.shape()));
    }
    Tensor x = batch;
    for (auto& layer : impl_->layers) x = layer->forward(x, mode, rng);
    return x;
}

Tensor Model::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (auto it = impl_->layers.rbegin(); it != impl_->layers.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Parameter*> Model::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : impl_->layers) {
        for (Parameter* p : layer->parameters()) out.push_back(p);
    }
    return out;
}

std::vector<const Parameter*> Model::parameters() const {
    std::vector<const Parameter*> out;
    for (auto& layer : impl_->layers) {
        for (Parameter* p : layer->parameters()) out.push_back(p);
    }
    return out;
}

void Model::zero_grad() {
    for (Parameter* p : parameters()) p->grad.fill(0.0);
}

Model build_model(const NetworkConfig& cfg) {
    return Model(architecture(cfg), {cfg.in_channels, cfg.height, cfg.width}, cfg.seed);
}

// --- datasets and training --------------------------------------------------

TensorDataset::TensorDataset(Tensor inputs, std::vector<int> labels)
    : inputs_(std::move(inputs)), labels_(std::move(labels)) {
    if (inputs_.rank() < 2 || inputs_.dim(0) != labels_.size()) {
        throw ShapeError("TensorDataset: inputs " + to_string(inputs_.shape()) + " for " +
                         std::to_string(labels_.size()) + " labels");
    }
    sample_size_ = element_count(sample_shape());
}

Shape TensorDataset::sample_shape() const { return Shape(inputs_.shape().begin() + 1, inputs_.shape().end()); }

void TensorDataset::copy_sample(std::size_t i, std::span<double> out) const {
    if (i >= labels_.size() || out.size() != sample_size_) throw ShapeError("TensorDataset::copy_sample: bad index or size");
    const double* src = inputs_.raw() + i * sample_size_;
    std::copy(src, src + sample_size_, out.begin());
}

Tensor gather_batch(const Dataset& data, std::span<const std::size_t> indices, std::vector<int>& labels) {
    Shape shape = data.sample_shape();
    const std::size_t per = element_count(shape);
    shape.insert(shape.begin(), indices.size());
    Tensor batch(shape);
    labels.resize(indices.size());
    for (std::size_t b = 0; b < indices.size(); ++b) {
        data.copy_sample(indices[b], batch.data().subspan(b * per, per));
        labels[b] = data.label(indices[b]);
    }
    return batch;
}

double train_epoch(Model& model, const Dataset& data, const TrainOptions& opts, std::mt19937_64& rng) {
    if (data.size() == 0) throw ConfigError("train_epoch: empty dataset");
    if (opts.batch == 0) throw ConfigError("train_epoch: batch must be positive");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Parameter*> params = model.parameters();
    std::vector<Tensor*> values;
    std::vector<const Tensor*> grads;
    for (Parameter* p : params) {
        values.push_back(&p->value);
        grads.push_back(&p->grad);
    }

    double total = 0.0;
    std::vector<int> labels;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch, ++batch_index) {
        const std::size_t count = std::min(opts.batch, order.size() - start);
        const Tensor x = gather_batch(data, std::span(order).subspan(start, count), labels);
        model.zero_grad();
        const Tensor logits = model.forward(x, Mode::Train, &rng);
        LossResult loss = softmax_cross_entropy(logits, labels);
        if (!std::isfinite(loss.loss)) throw DivergenceError(batch_index);
        model.backward(loss.grad);
        adam_step(values, grads, model.optimizer_state(), opts.lr);
        total += loss.loss * static_cast<double>(count);
    }
    return total / static_cast<double>(data.size());
}

namespace {

template <class Fn>
void for_each_eval_batch(Model& model, const Dataset& data, std::size_t batch, Fn&& fn) {
    if (batch == 0) throw ConfigError("evaluation batch must be positive");
    std::vector<std::size_t> idx;
    std::vector<int> labels;
    for (std::size_t start = 0; start < data.size(); start += batch) {
        const std::size_t count = std::min(batch, data.size() - start);
        idx.resize(count);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor x = gather_batch(data, idx, labels);
        fn(model.forward(x, Mode::Eval), labels);
    }
}

}  // namespace

double evaluate_loss(Model& model, const Dataset& data, std::size_t batch) {
    if (data.size() == 0) return 0.0;
    double total = 0.0;
    for_each_eval_batch(model, data, batch, [&](const Tensor& logits, const std::vector<int>& labels) {
        total += softmax_cross_entropy(logits, labels).loss * static_cast<double>(labels.size());
    });
    return total / static_cast<double>(data.size());
}

double evaluate_top1(Model& model, const Dataset& data, std::size_t batch) {
    if (data.size() == 0) return 0.0;
    std::size_t hits = 0;
    for_each_eval_batch(model, data, batch, [&](const Tensor& logits, const std::vector<int>& labels) {
        const std::vector<int> pred = argmax_rows(logits);
        for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
    });
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace osc::nn
