#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "osc/error.hpp"
#include "osc/nn/checkpoint.hpp"
#include "osc/nn/model.hpp"

namespace {

using namespace osc::nn;
using osc::ActivationId;

NetworkConfig tiny_config(ActivationId act, double dropout_rate = 0.0) {
    NetworkConfig cfg;
    cfg.conv_layers = 1;
    cfg.activation = act;
    cfg.seed = 3;
    cfg.in_channels = 2;
    cfg.height = 4;
    cfg.width = 4;
    cfg.classes = 2;
    cfg.dense_units = 5;
    cfg.dropout_rate = dropout_rate;
    return cfg;
}

// Ten well-separated classes: each class lights up its own channel/row pattern.
TensorDataset patterned_data(std::size_t per_class, Shape sample, std::uint64_t seed, int classes = 10) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    const std::size_t n = per_class * static_cast<std::size_t>(classes);
    Shape shape = sample;
    shape.insert(shape.begin(), n);
    Tensor x(shape);
    const std::size_t per = element_count(sample);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
        labels[i] = label;
        for (std::size_t j = 0; j < per; ++j) {
            const double signal = (j * 7 / per) % static_cast<std::size_t>(classes) == static_cast<std::size_t>(label) % 7 ? 1.0 : 0.0;
            x[i * per + j] = 0.5 * signal + 0.2 * (label % 3) + noise(rng);
        }
    }
    return TensorDataset(std::move(x), std::move(labels));
}

std::size_t parameter_count(const Model& m) {
    std::size_t n = 0;
    for (const Parameter* p : m.parameters()) n += p->value.size();
    return n;
}

TEST(Architecture, LayerSequence) {
    NetworkConfig cfg;
    cfg.conv_layers = 2;
    cfg.activation = ActivationId::GCU;
    const auto specs = architecture(cfg);
    std::vector<std::string> got;
    for (const auto& s : specs) got.push_back(describe(s));
    const std::vector<std::string> want = {"Conv2d(32, 3x3, GCU)", "MaxPool(2x2)", "Conv2d(64, 3x3, GCU)",
                                           "MaxPool(2x2)",         "Flatten",      "Dense(64, GCU)",
                                           "Dropout(0.5)",         "LogitsDense(10)"};
    EXPECT_EQ(got, want);
}

TEST(BuildModel, OneConvLayerFlattenDim) {
    NetworkConfig cfg;
    cfg.conv_layers = 1;
    EXPECT_EQ(build_model(cfg).flatten_dim(), 32u * 16u * 16u);
}

TEST(BuildModel, FourConvLayersLeaveTwoByTwo) {
    NetworkConfig cfg;
    cfg.conv_layers = 4;
    EXPECT_EQ(build_model(cfg).flatten_dim(), 128u * 2u * 2u);
}

TEST(BuildModel, PenultimateDenseHas64Units) {
    for (int c = 1; c <= 4; ++c) {
        NetworkConfig cfg;
        cfg.conv_layers = c;
        Model m = build_model(cfg);
        const auto params = m.parameters();
        const Parameter* dense = nullptr;
        for (const Parameter* p : params) {
            if (p->name == "dense1.weight") dense = p;
        }
        ASSERT_NE(dense, nullptr);
        EXPECT_EQ(dense->value.shape(), (Shape{m.flatten_dim(), 64}));
        EXPECT_EQ(params.back()->value.shape(), (Shape{10}));
    }
}

TEST(BuildModel, ParameterCountForTwoConvLayers) {
    NetworkConfig cfg;
    cfg.conv_layers = 2;
    // conv1 896 + conv2 18496 + dense 4096*64+64 + logits 650
    EXPECT_EQ(parameter_count(build_model(cfg)), 896u + 18496u + 262208u + 650u);
}

TEST(BuildModel, RejectsBadConfigs) {
    NetworkConfig cfg;
    cfg.conv_layers = 0;
    EXPECT_THROW(build_model(cfg), osc::ConfigError);
    cfg.conv_layers = 5;
    EXPECT_THROW(build_model(cfg), osc::ConfigError);
    cfg.conv_layers = 3;
    cfg.height = 12;  // 12 -> 6 -> 3 cannot be pooled again
    EXPECT_THROW(build_model(cfg), osc::ConfigError);
    cfg.height = 32;
    cfg.dropout_rate = 1.0;
    EXPECT_THROW(build_model(cfg), osc::ConfigError);
}

TEST(BuildModel, HeUniformInitialisation) {
    NetworkConfig cfg;
    cfg.conv_layers = 2;
    Model m = build_model(cfg);
    for (const Parameter* p : m.parameters()) {
        if (p->name.ends_with(".bias")) {
            for (double v : p->value.data()) EXPECT_EQ(v, 0.0) << p->name;
            continue;
        }
        const auto& s = p->value.shape();
        const std::size_t fan_in = s.size() == 4 ? s[1] * 9 : s[0];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        double max_abs = 0.0;
        for (double v : p->value.data()) max_abs = std::max(max_abs, std::abs(v));
        EXPECT_LE(max_abs, limit) << p->name;
        EXPECT_GT(max_abs, 0.9 * limit) << p->name;
    }
}

TEST(BuildModel, SeedDeterminesWeights) {
    NetworkConfig cfg = tiny_config(ActivationId::ReLU);
    Model a = build_model(cfg), b = build_model(cfg);
    cfg.seed = 4;
    Model c = build_model(cfg);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_TRUE(std::equal(pa[i]->value.data().begin(), pa[i]->value.data().end(), pb[i]->value.data().begin()));
    }
    EXPECT_FALSE(std::equal(pa[0]->value.data().begin(), pa[0]->value.data().end(), pc[0]->value.data().begin()));
}

TEST(ModelForward, EvalIsPure) {
    Model m = build_model(tiny_config(ActivationId::SSU, 0.5));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Tensor x({3, 2, 4, 4});
    for (double& v : x.data()) v = nd(rng);
    const Tensor a = m.forward(x, Mode::Eval);
    m.forward(x, Mode::Train, &rng);
    const Tensor b = m.forward(x, Mode::Eval);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    EXPECT_EQ(a.shape(), (Shape{3, 2}));
}

TEST(ModelForward, InputShapeChecked) {
    Model m = build_model(tiny_config(ActivationId::ReLU));
    EXPECT_THROW(m.forward(Tensor({1, 3, 4, 4}), Mode::Eval), osc::ShapeError);
    EXPECT_THROW(m.forward(Tensor({2, 4, 4}), Mode::Eval), osc::ShapeError);
}

TEST(ModelForward, TrainModeDropoutNeedsGenerator) {
    Model m = build_model(tiny_config(ActivationId::ReLU, 0.5));
    EXPECT_THROW(m.forward(Tensor({1, 2, 4, 4}), Mode::Train), osc::ConfigError);
}

// Every parameter of a tiny network against central differences of the loss.
double end_to_end_gradient_error(ActivationId act, double dropout_rate) {
    Model m = build_model(tiny_config(act, dropout_rate));
    std::mt19937_64 data_rng(5);
    std::normal_distribution<double> nd;
    Tensor x({3, 2, 4, 4});
    for (double& v : x.data()) v = nd(data_rng);
    const std::vector<int> y{0, 1, 1};

    // Re-seeding per evaluation replays the same dropout mask.
    auto loss = [&] {
        std::mt19937_64 mask_rng(77);
        return softmax_cross_entropy(m.forward(x, Mode::Train, &mask_rng), y).loss;
    };
    m.zero_grad();
    std::mt19937_64 mask_rng(77);
    const auto r = softmax_cross_entropy(m.forward(x, Mode::Train, &mask_rng), y);
    m.backward(r.grad);

    double worst = 0.0;
    const double h = 1e-6;
    for (Parameter* p : m.parameters()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double keep = p->value[i];
            p->value[i] = keep + h;
            const double up = loss();
            p->value[i] = keep - h;
            const double down = loss();
            p->value[i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double analytic = p->grad[i];
            const double scale = std::max(std::abs(numeric), std::abs(analytic));
            if (scale < 1e-6) continue;  // below finite-difference noise
            worst = std::max(worst, std::abs(numeric - analytic) / scale);
        }
    }
    return worst;
}

TEST(EndToEndGradient, TinyModelMatchesFiniteDifference) {
    for (ActivationId act : {ActivationId::SiLU, ActivationId::Tanh, ActivationId::SQU, ActivationId::NCU,
                             ActivationId::GCU, ActivationId::SSU, ActivationId::DSU, ActivationId::Mish}) {
        EXPECT_LT(end_to_end_gradient_error(act, 0.0), 1e-3) << osc::name(act);
    }
}

TEST(EndToEndGradient, WithDropoutMask) {
    EXPECT_LT(end_to_end_gradient_error(ActivationId::GCU, 0.5), 1e-3);
}

TEST(EndToEndGradient, SignumOnlyMovesTheLogitsLayer) {
    Model m = build_model(tiny_config(ActivationId::Signum));
    Tensor x({4, 2, 4, 4});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (double& v : x.data()) v = nd(rng);
    const std::vector<int> y{0, 1, 0, 1};
    m.zero_grad();
    const auto r = softmax_cross_entropy(m.forward(x, Mode::Train, &rng), y);
    m.backward(r.grad);
    bool logits_moved = false;
    for (const Parameter* p : m.parameters()) {
        double mag = 0.0;
        for (double g : p->grad.data()) mag += std::abs(g);
        if (p->name.starts_with("logits")) {
            logits_moved |= mag > 0.0;
        } else {
            EXPECT_EQ(mag, 0.0) << p->name;
        }
    }
    EXPECT_TRUE(logits_moved);
}

TEST(TrainEpoch, ZeroLearningRateLeavesParameters) {
    NetworkConfig cfg = tiny_config(ActivationId::ReLU);
    cfg.classes = 10;
    Model m = build_model(cfg);
    const TensorDataset data = patterned_data(3, {2, 4, 4}, 1);
    std::vector<Tensor> before;
    for (const Parameter* p : m.parameters()) before.push_back(p->value);
    const double eval = evaluate_loss(m, data);
    std::mt19937_64 rng(0);
    const double train = train_epoch(m, data, TrainOptions{8, 0.0}, rng);
    const auto after = m.parameters();
    for (std::size_t i = 0; i < after.size(); ++i) {
        EXPECT_TRUE(std::equal(before[i].data().begin(), before[i].data().end(), after[i]->value.data().begin()));
    }
    EXPECT_NEAR(train, eval, 1e-12);
}

TEST(TrainEpoch, SingleSampleMemorisation) {
    NetworkConfig cfg;
    cfg.conv_layers = 1;
    cfg.activation = ActivationId::ReLU;
    cfg.height = 8;
    cfg.width = 8;
    Model m = build_model(cfg);
    Tensor x({1, 3, 8, 8});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : x.data()) v = u(rng);
    const TensorDataset one(std::move(x), {7});
    for (int e = 0; e < 200; ++e) train_epoch(m, one, TrainOptions{64, 1e-3}, rng);
    EXPECT_LT(evaluate_loss(m, one), 0.01);
    EXPECT_EQ(evaluate_top1(m, one), 1.0);
}

TEST(TrainEpoch, BitIdenticalLossTraceForFixedSeed) {
    auto trace = [] {
        NetworkConfig cfg = tiny_config(ActivationId::SQU, 0.5);
        cfg.classes = 10;
        Model m = build_model(cfg);
        const TensorDataset data = patterned_data(4, {2, 4, 4}, 2);
        std::mt19937_64 rng(99);
        std::vector<double> out;
        for (int e = 0; e < 3; ++e) out.push_back(train_epoch(m, data, TrainOptions{16, 1e-3}, rng));
        return out;
    };
    EXPECT_EQ(trace(), trace());
}

TEST(TrainEpoch, LossDecreasesOnFixedSubset) {
    for (ActivationId act : {ActivationId::ReLU, ActivationId::SQU}) {
        NetworkConfig cfg;
        cfg.conv_layers = 2;
        cfg.activation = act;
        cfg.seed = 1;
        Model m = build_model(cfg);
        const TensorDataset data = patterned_data(7, {3, 32, 32}, 3);
        TensorDataset subset = data;
        std::mt19937_64 rng(4);
        double previous = evaluate_loss(m, subset);
        for (int e = 0; e < 5; ++e) {
            train_epoch(m, subset, TrainOptions{64, 1e-4}, rng);
            const double now = evaluate_loss(m, subset);
            EXPECT_LE(now, previous) << osc::name(act) << " epoch " << e;
            previous = now;
        }
    }
}

TEST(TrainEpoch, DivergenceNamesTheBatch) {
    NetworkConfig cfg = tiny_config(ActivationId::SQU);
    cfg.classes = 10;
    Model m = build_model(cfg);
    // z^2 overflows on the first batch, whatever the shuffle order.
    const TensorDataset data(Tensor({20, 2, 4, 4}, 1e300), std::vector<int>(20, 0));
    std::mt19937_64 rng(0);
    try {
        train_epoch(m, data, TrainOptions{8, 1e-3}, rng);
        FAIL() << "expected DivergenceError";
    } catch (const osc::DivergenceError& e) {
        EXPECT_EQ(e.batch(), 0u);
        EXPECT_NE(std::string(e.what()).find('0'), std::string::npos);
    }
}

TEST(TrainEpoch, RejectsEmptyData) {
    Model m = build_model(tiny_config(ActivationId::ReLU));
    const TensorDataset empty(Tensor({0, 2, 4, 4}), {});
    std::mt19937_64 rng(0);
    EXPECT_THROW(train_epoch(m, empty, TrainOptions{}, rng), osc::ConfigError);
}

TEST(EvaluateTop1, UntrainedModelIsNearChance) {
    NetworkConfig cfg;
    cfg.conv_layers = 1;
    cfg.height = 8;
    cfg.width = 8;
    Model m = build_model(cfg);
    const TensorDataset data = patterned_data(50, {3, 8, 8}, 5);
    EXPECT_NEAR(evaluate_top1(m, data), 0.1, 0.03);
}

TEST(EvaluateTop1, SingleCorrectSample) {
    Model m = build_model(tiny_config(ActivationId::GCU));
    Tensor x({1, 2, 4, 4}, 0.3);
    const int predicted = argmax_rows(m.forward(x, Mode::Eval))[0];
    const TensorDataset one(std::move(x), {predicted});
    EXPECT_EQ(evaluate_top1(m, one), 1.0);
}

TEST(EvaluateTop1, InvariantUnderLogitRescaling) {
    NetworkConfig cfg = tiny_config(ActivationId::Tanh);
    cfg.classes = 10;
    Model m = build_model(cfg);
    const TensorDataset data = patterned_data(5, {2, 4, 4}, 6);
    const double before = evaluate_top1(m, data);
    for (Parameter* p : m.parameters()) {
        if (!p->name.starts_with("logits")) continue;
        for (double& v : p->value.data()) v *= 3.5;
    }
    EXPECT_EQ(evaluate_top1(m, data), before);
}

TEST(Datasets, GatherBatch) {
    Tensor x({3, 1, 2, 2});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const TensorDataset data(std::move(x), {0, 1, 2});
    std::vector<int> labels;
    const std::vector<std::size_t> idx{2, 0};
    const Tensor b = gather_batch(data, idx, labels);
    EXPECT_EQ(b.shape(), (Shape{2, 1, 2, 2}));
    EXPECT_EQ(labels, (std::vector<int>{2, 0}));
    EXPECT_EQ(b[0], 8.0);
    EXPECT_EQ(b[4], 0.0);
    EXPECT_THROW(TensorDataset(Tensor({2, 3}), {0}), osc::ShapeError);
}

TEST(Checkpoint, RoundTripThroughFloat32) {
    Model a = build_model(tiny_config(ActivationId::GCU));
    NetworkConfig other = tiny_config(ActivationId::GCU);
    other.seed = 123;
    Model b = build_model(other);
    std::stringstream blob;
    save_checkpoint(a, blob);
    load_checkpoint(b, blob);
    const auto pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pa[i]->value.size(); ++j) {
            EXPECT_EQ(pb[i]->value[j], static_cast<double>(static_cast<float>(pa[i]->value[j])));
        }
    }
}

TEST(Checkpoint, Layout) {
    Tensor t({2, 3}, 1.0);
    const Tensor* list[] = {&t};
    std::stringstream blob;
    write_tensors(list, blob);
    const std::string s = blob.str();
    ASSERT_EQ(s.size(), 4u + 4u + 4u + 8u + 6u * 4u);
    EXPECT_EQ(s.substr(0, 4), "OSC1");
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(s[off + static_cast<std::size_t>(k)]);
        return v;
    };
    EXPECT_EQ(u32(4), 1u);
    EXPECT_EQ(u32(8), 2u);
    EXPECT_EQ(u32(12), 2u);
    EXPECT_EQ(u32(16), 3u);
    EXPECT_EQ(u32(20), 0x3f800000u);  // 1.0f
}

TEST(Checkpoint, Errors) {
    Model a = build_model(tiny_config(ActivationId::ReLU));
    std::stringstream blob;
    save_checkpoint(a, blob);
    const std::string good = blob.str();

    std::stringstream bad_magic("OSC2" + good.substr(4));
    EXPECT_THROW(load_checkpoint(a, bad_magic), osc::FormatError);
    std::stringstream truncated(good.substr(0, good.size() - 3));
    EXPECT_THROW(load_checkpoint(a, truncated), osc::FormatError);
    std::stringstream trailing(good + "x");
    EXPECT_THROW(load_checkpoint(a, trailing), osc::FormatError);

    NetworkConfig wider = tiny_config(ActivationId::ReLU);
    wider.dense_units = 6;
    Model b = build_model(wider);
    std::stringstream mismatch(good);
    EXPECT_THROW(load_checkpoint(b, mismatch), osc::FormatError);
}

}  // namespace
