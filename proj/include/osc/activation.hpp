#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osc {

enum class ActivationId {
    Signum,
    Identity,
    BipolarSigmoid,
    Sigmoid,
    Tanh,
    Absolute,
    SoftRootSign,
    HardTanh,
    SiLU,
    LiSHT,
    Softplus,
    ReLU,
    LeakyReLU,
    GELU,
    SELU,
    Swish,
    Mish,
    ELU,
    PReLU,
    Sine,
    SQU,
    MonotonicCubic,
    NCU,
    ZSqCos,
    SSU,
    GCU,
    DSU,
};

inline constexpr std::size_t kActivationCount = 27;

// Every id, in catalog order.
std::span<const ActivationId> all_activations() noexcept;

std::string_view name(ActivationId id) noexcept;

// Case-sensitive lookup by catalog name (e.g. "GCU", "LeakyReLU").
std::optional<ActivationId> parse_activation(std::string_view text) noexcept;

// Tunable constants. Soft-Root-Sign needs z/alpha + exp(-z/beta) > 0 everywhere,
// which holds for the defaults.
struct ActivationParams {
    double srs_alpha = 2.0;
    double srs_beta = 3.0;
};

// sin(z)/z with the removable singularity filled in (sinc(0) = 1).
double sinc(double z);
// d/dz sinc(z); series expansion near the origin.
double sinc_derivative(double z);

double evaluate(ActivationId id, double z, const ActivationParams& params = {});

// Analytic derivative. Throws KinkError when z is one of the function's
// non-differentiable points.
double derivative(ActivationId id, double z, const ActivationParams& params = {});

// Same as derivative() but returns 0 at kinks instead of throwing. Used by
// backprop and the single-neuron trainer.
double subgradient(ActivationId id, double z, const ActivationParams& params = {}) noexcept;

// --- static metadata ------------------------------------------------------

struct RangeEnd {
    double value;
    bool closed;

    bool finite() const noexcept {
        return value != std::numeric_limits<double>::infinity() &&
               value != -std::numeric_limits<double>::infinity();
    }
};

struct Range {
    RangeEnd lo;
    RangeEnd hi;

    bool contains(double v, double slack = 0.0) const noexcept;
    std::string to_string() const;
};

struct SmallValueApprox {
    double c0;  // g(0)
    double c1;  // g'(0)
};

struct HyperplaneCount {
    enum class Kind { Finite, CountablyInfinite };
    Kind kind;
    int count;  // meaningful only for Finite

    static HyperplaneCount finite(int n) { return {Kind::Finite, n}; }
    static HyperplaneCount infinite() { return {Kind::CountablyInfinite, -1}; }
    bool is_infinite() const noexcept { return kind == Kind::CountablyInfinite; }
    std::string to_string() const;
};

struct NamedParam {
    std::string_view name;
    double value;
};

// A place where the published tables disagree with the function as defined.
// `table` quotes the tabulated cell, the descriptor carries the corrected value.
struct Erratum {
    std::string_view field;
    std::string_view table;
    std::string_view note;
};

struct ActivationDescriptor {
    ActivationId id;
    std::string_view name;
    std::string_view formula;
    std::vector<NamedParam> params;
    bool continuous;
    std::vector<double> nondifferentiable_points;
    bool monotonic;
    Range range;
    std::optional<SmallValueApprox> small_value;
    HyperplaneCount hyperplane_count;
    bool sign_equivalent_identity;
    bool xor_property;
    // True when the properties table has a row for this function.
    bool tabulated_properties;
    std::vector<Erratum> errata;
};

const ActivationDescriptor& descriptor(ActivationId id);

// Table-only "Step" row (Heaviside). It shares Signum's metadata layout but has
// no evaluator and is never benchmarked.
const ActivationDescriptor& step_descriptor();

bool is_kink(ActivationId id, double z) noexcept;

// The activations that can solve XOR in a single neuron.
bool has_xor_property(ActivationId id);

}  // namespace osc
