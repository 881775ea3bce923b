#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "osc/activation.hpp"

namespace osc::xorlab {

using Point = std::array<double, 2>;

struct Sample {
    Point x;
    int label;  // -1 or +1
};

using Dataset = std::array<Sample, 4>;

// Bipolar XOR: (-1,-1)->-1, (1,-1)->1, (-1,1)->1, (1,1)->-1.
Dataset xor_dataset();

struct SingleNeuron {
    Point w{0.0, 0.0};
    double b = 0.0;
    ActivationId activation = ActivationId::Identity;

    double preactivation(const Point& x) const { return w[0] * x[0] + w[1] * x[1] + b; }
};

double neuron_forward(const SingleNeuron& n, const Point& x);

inline constexpr double kMarginThreshold = 1e-6;

struct XorCertificate {
    SingleNeuron neuron;
    std::array<double, 4> margins{};  // g(z_i) for each dataset point, in dataset order
    int correct = 0;

    bool valid() const;
    double min_abs_margin() const;
};

// Evaluates the neuron on the four XOR points.
XorCertificate certify(const SingleNeuron& n);

// Exhaustive search over (w1, w2, b) on the grid -bound + k * resolution.
// Best = most points correct, then largest min |margin|, then earliest grid
// index (w1-major). The result does not depend on `threads`.
XorCertificate grid_search_certificate(ActivationId id, double bound, double resolution,
                                       unsigned threads = 0);

struct TrainSpec {
    double learning_rate = 0.05;
    std::size_t epochs = 2000;
    std::size_t restarts = 20;
    std::uint64_t seed = 7;
    double init_scale = 1.0;

    void validate() const;
};

struct TrainResult {
    XorCertificate certificate;
    std::vector<double> loss_trace;  // per epoch, for the restart that produced `certificate`
    std::size_t restart = 0;         // index of that restart
    std::size_t restarts_run = 0;
};

// Full-batch gradient descent on sum_i (g(w.x_i + b) - y_i)^2. Restart r draws
// (w1, w2, b) uniformly from [-init_scale, init_scale] with seed + r and stops
// at the first valid certificate.
TrainResult train_single_neuron(ActivationId id, const TrainSpec& spec);

struct BoundaryGrid {
    double lo = -2.0;
    double hi = 2.0;
    std::size_t resolution = 0;
    std::vector<int> signs;  // row-major: row = x2 index, column = x1 index

    double coordinate(std::size_t k) const;
    int at(std::size_t x1_index, std::size_t x2_index) const { return signs[x2_index * resolution + x1_index]; }
    // Cell whose centre is nearest to the given point.
    int sign_near(const Point& p) const;
};

// Requires resolution >= 2.
BoundaryGrid decision_boundary_grid(const SingleNeuron& n, double lo, double hi, std::size_t resolution);

// CSV with header "x1,x2,sign".
void write_boundary_csv(const BoundaryGrid& grid, std::ostream& os);

// {"activation", "w", "b", "margins", "correct", ...extra}; `method` names where
// the certificate came from ("trained" or "grid").
void write_certificate_json(const XorCertificate& cert, std::string_view method, std::ostream& os);

}  // namespace osc::xorlab
