#include "osc/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "osc/error.hpp"

namespace osc::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using Eigen::Index;

constexpr std::size_t kKernel = 3;
constexpr std::size_t kTaps = kKernel * kKernel;

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         to_string(t.shape()));
    }
}

struct ConvDims {
    std::size_t n, c, h, w, k;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weights) {
    expect_rank(input, 4, "conv2d input");
    expect_rank(weights, 4, "conv2d weights");
    ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weights.dim(0)};
    expect_shape(weights, {d.k, d.c, kKernel, kKernel}, "conv2d weights");
    return d;
}

// Unfolds one sample [C,H,W] into a (C*9) x (H*W) patch matrix.
void im2col(const double* in, const ConvDims& d, double* cols) {
    const std::size_t hw = d.h * d.w;
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
                double* row = cols + ((c * kKernel + ky) * kKernel + kx) * hw;
                for (std::size_t y = 0; y < d.h; ++y) {
                    const long iy = static_cast<long>(y + ky) - 1;
                    double* dst = row + y * d.w;
                    if (iy < 0 || iy >= static_cast<long>(d.h)) {
                        std::fill(dst, dst + d.w, 0.0);
                        continue;
                    }
                    const double* src = in + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
                    for (std::size_t x = 0; x < d.w; ++x) {
                        const long ix = static_cast<long>(x + kx) - 1;
                        dst[x] = (ix < 0 || ix >= static_cast<long>(d.w)) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

void col2im_add(const double* cols, const ConvDims& d, double* out) {
    const std::size_t hw = d.h * d.w;
    for (std::size_t c = 0; c < d.c; ++c) {
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
            for (std::size_t kx = 0; kx < kKernel; ++kx) {
                const double* row = cols + ((c * kKernel + ky) * kKernel + kx) * hw;
                for (std::size_t y = 0; y < d.h; ++y) {
                    const long iy = static_cast<long>(y + ky) - 1;
                    if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
                    double* dst = out + (c * d.h + static_cast<std::size_t>(iy)) * d.w;
                    const double* src = row + y * d.w;
                    for (std::size_t x = 0; x < d.w; ++x) {
                        const long ix = static_cast<long>(x + kx) - 1;
                        if (ix >= 0 && ix < static_cast<long>(d.w)) dst[ix] += src[x];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    const ConvDims d = conv_dims(input, weights);
    expect_shape(bias, {d.k}, "conv2d bias");
    const std::size_t hw = d.h * d.w;
    const std::size_t patch = d.c * kTaps;

    Tensor out({d.n, d.k, d.h, d.w});
    RowMat cols(static_cast<Index>(patch), static_cast<Index>(hw));
    ConstMapMat wm(weights.raw(), static_cast<Index>(d.k), static_cast<Index>(patch));
    for (std::size_t n = 0; n < d.n; ++n) {
        im2col(input.raw() + n * d.c * hw, d, cols.data());
        MapMat o(out.raw() + n * d.k * hw, static_cast<Index>(d.k), static_cast<Index>(hw));
        o.noalias() = wm * cols;
        for (std::size_t k = 0; k < d.k; ++k) o.row(static_cast<Index>(k)).array() += bias[k];
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output) {
    const ConvDims d = conv_dims(input, weights);
    expect_shape(grad_output, {d.n, d.k, d.h, d.w}, "conv2d grad_output");
    const std::size_t hw = d.h * d.w;
    const std::size_t patch = d.c * kTaps;

    Conv2dGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({d.k})};
    RowMat cols(static_cast<Index>(patch), static_cast<Index>(hw));
    RowMat dcols(static_cast<Index>(patch), static_cast<Index>(hw));
    ConstMapMat wm(weights.raw(), static_cast<Index>(d.k), static_cast<Index>(patch));
    MapMat dw(g.weights.raw(), static_cast<Index>(d.k), static_cast<Index>(patch));
    for (std::size_t n = 0; n < d.n; ++n) {
        ConstMapMat go(grad_output.raw() + n * d.k * hw, static_cast<Index>(d.k), static_cast<Index>(hw));
        im2col(input.raw() + n * d.c * hw, d, cols.data());
        dw.noalias() += go * cols.transpose();
        for (std::size_t k = 0; k < d.k; ++k) g.bias[k] += go.row(static_cast<Index>(k)).sum();
        dcols.noalias() = wm.transpose() * go;
        col2im_add(dcols.data(), d, g.input.raw() + n * d.c * hw);
    }
    return g;
}

PoolResult maxpool2_forward(const Tensor& input) {
    expect_rank(input, 4, "maxpool2 input");
    const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (h % 2 != 0 || w % 2 != 0) {
        throw ShapeError("maxpool2: spatial dims must be even, got " + to_string(input.shape()));
    }
    const std::size_t oh = h / 2, ow = w / 2;
    PoolResult r{Tensor({n, c, oh, ow}), std::vector<std::size_t>(n * c * oh * ow)};
    std::size_t o = 0;
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const std::size_t base = plane * h * w;
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x, ++o) {
                std::size_t best = base + (2 * y) * w + 2 * x;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const std::size_t at = base + (2 * y + dy) * w + 2 * x + dx;
                        if (input[at] > input[best]) best = at;
                    }
                }
                r.output[o] = input[best];
                r.argmax[o] = best;
            }
        }
    }
    return r;
}

Tensor maxpool2_backward(const Shape& input_shape, std::span<const std::size_t> argmax, const Tensor& grad_output) {
    if (argmax.size() != grad_output.size()) {
        throw ShapeError("maxpool2 backward: argmax has " + std::to_string(argmax.size()) +
                         " entries, grad_output " + std::to_string(grad_output.size()));
    }
    Tensor g(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += grad_output[i];
    return g;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    expect_rank(input, 2, "dense input");
    expect_rank(weights, 2, "dense weights");
    const std::size_t n = input.dim(0), din = input.dim(1), u = weights.dim(1);
    expect_shape(weights, {din, u}, "dense weights");
    expect_shape(bias, {u}, "dense bias");
    Tensor out({n, u});
    ConstMapMat x(input.raw(), static_cast<Index>(n), static_cast<Index>(din));
    ConstMapMat wm(weights.raw(), static_cast<Index>(din), static_cast<Index>(u));
    MapMat o(out.raw(), static_cast<Index>(n), static_cast<Index>(u));
    Eigen::Map<const Eigen::RowVectorXd> b(bias.raw(), static_cast<Index>(u));
    o.noalias() = x * wm;
    o.rowwise() += b;
    return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output) {
    expect_rank(input, 2, "dense input");
    const std::size_t n = input.dim(0), din = input.dim(1);
    expect_rank(weights, 2, "dense weights");
    const std::size_t u = weights.dim(1);
    expect_shape(weights, {din, u}, "dense weights");
    expect_shape(grad_output, {n, u}, "dense grad_output");
    DenseGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({u})};
    ConstMapMat x(input.raw(), static_cast<Index>(n), static_cast<Index>(din));
    ConstMapMat wm(weights.raw(), static_cast<Index>(din), static_cast<Index>(u));
    ConstMapMat go(grad_output.raw(), static_cast<Index>(n), static_cast<Index>(u));
    MapMat(g.input.raw(), static_cast<Index>(n), static_cast<Index>(din)).noalias() = go * wm.transpose();
    MapMat(g.weights.raw(), static_cast<Index>(din), static_cast<Index>(u)).noalias() = x.transpose() * go;
    Eigen::Map<Eigen::RowVectorXd>(g.bias.raw(), static_cast<Index>(u)) = go.colwise().sum();
    return g;
}

Tensor activation_forward(const Tensor& input, ActivationId id) {
    Tensor out(input.shape());
    // An overflowed pre-activation poisons the output instead of throwing, so a
    // diverging run surfaces as a non-finite loss.
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = std::isfinite(input[i]) ? evaluate(id, input[i]) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

Tensor activation_backward(const Tensor& pre_activation, ActivationId id, const Tensor& grad_output) {
    expect_shape(grad_output, pre_activation.shape(), "activation grad_output");
    Tensor g(pre_activation.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_output[i] * subgradient(id, pre_activation[i]);
    return g;
}

DropoutResult dropout(const Tensor& input, double rate, Mode mode, std::mt19937_64& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
    DropoutResult r{input, Tensor(input.shape(), 1.0)};
    if (mode == Mode::Eval || rate == 0.0) return r;
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double m = u(rng) < rate ? 0.0 : keep_scale;
        r.mask[i] = m;
        r.output[i] = input[i] * m;
    }
    return r;
}

DropoutResult dropout(const Tensor& input, double rate, Mode mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return dropout(input, rate, mode, rng);
}

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    expect_rank(logits, 2, "softmax_cross_entropy logits");
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    if (labels.size() != n) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " rows");
    }
    LossResult r{0.0, Tensor(logits.shape())};
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
            throw LabelError("label " + std::to_string(y) + " at row " + std::to_string(i) + " outside [0, " +
                             std::to_string(k) + ")");
        }
        const double* row = logits.raw() + i * k;
        const double m = *std::max_element(row, row + k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - m);
        const double lse = m + std::log(sum);
        r.loss += lse - row[y];
        double* g = r.grad.raw() + i * k;
        for (std::size_t j = 0; j < k; ++j) g[j] = std::exp(row[j] - lse) * inv_n;
        g[y] -= inv_n;
    }
    r.loss *= inv_n;
    return r;
}

std::vector<int> argmax_rows(const Tensor& logits) {
    expect_rank(logits, 2, "argmax_rows");
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logits.raw() + i * k;
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (row[j] > row[best]) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace osc::nn
