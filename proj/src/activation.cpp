#include "osc/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "osc/error.hpp"

namespace osc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double kSeluLambda = 1.0507009873554805;
constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kLeakySlope = 0.01;
constexpr double kPreluSlope = 0.25;
// Tanh-form GELU as tabulated: 0.5 z (1 + tanh(sqrt(2/pi) z + 0.044715 z^3)).
const double kGeluLinear = std::sqrt(2.0 / kPi);
constexpr double kGeluCubic = 0.044715;

constexpr std::array<ActivationId, kActivationCount> kAll = {
    ActivationId::Signum,   ActivationId::Identity,       ActivationId::BipolarSigmoid,
    ActivationId::Sigmoid,  ActivationId::Tanh,           ActivationId::Absolute,
    ActivationId::SoftRootSign, ActivationId::HardTanh,   ActivationId::SiLU,
    ActivationId::LiSHT,    ActivationId::Softplus,       ActivationId::ReLU,
    ActivationId::LeakyReLU, ActivationId::GELU,          ActivationId::SELU,
    ActivationId::Swish,    ActivationId::Mish,           ActivationId::ELU,
    ActivationId::PReLU,    ActivationId::Sine,           ActivationId::SQU,
    ActivationId::MonotonicCubic, ActivationId::NCU,      ActivationId::ZSqCos,
    ActivationId::SSU,      ActivationId::GCU,            ActivationId::DSU,
};

constexpr std::array<std::string_view, kActivationCount> kNames = {
    "Signum", "Identity", "BipolarSigmoid", "Sigmoid", "Tanh", "Absolute", "SoftRootSign",
    "HardTanh", "SiLU", "LiSHT", "Softplus", "ReLU", "LeakyReLU", "GELU", "SELU", "Swish",
    "Mish", "ELU", "PReLU", "Sine", "SQU", "MonotonicCubic", "NCU", "ZSqCos", "SSU", "GCU",
    "DSU",
};

double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double gelu_inner(double z) { return kGeluLinear * z + kGeluCubic * z * z * z; }

double srs_denominator(double z, const ActivationParams& p) {
    return z / p.srs_alpha + std::exp(-z / p.srs_beta);
}

}  // namespace

std::span<const ActivationId> all_activations() noexcept { return kAll; }

std::string_view name(ActivationId id) noexcept { return kNames[static_cast<std::size_t>(id)]; }

std::optional<ActivationId> parse_activation(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == text) return kAll[i];
    }
    return std::nullopt;
}

double sinc(double z) {
    if (!std::isfinite(z)) throw DomainError("sinc: non-finite argument");
    if (z == 0.0) return 1.0;
    return std::sin(z) / z;
}

double sinc_derivative(double z) {
    if (!std::isfinite(z)) throw DomainError("sinc_derivative: non-finite argument");
    // (z cos z - sin z) / z^2 cancels catastrophically near 0.
    if (std::abs(z) < 1e-2) {
        const double z2 = z * z;
        return z * (-1.0 / 3.0 + z2 * (1.0 / 30.0 - z2 / 840.0));
    }
    return (z * std::cos(z) - std::sin(z)) / (z * z);
}

double evaluate(ActivationId id, double z, const ActivationParams& p) {
    if (!std::isfinite(z)) throw DomainError("evaluate: non-finite input for " + std::string(name(id)));
    switch (id) {
        case ActivationId::Signum: return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
        case ActivationId::Identity: return z;
        // (1 - e^-z) / (1 + e^-z) == tanh(z / 2), without the overflow.
        case ActivationId::BipolarSigmoid: return std::tanh(0.5 * z);
        case ActivationId::Sigmoid: return logistic(z);
        case ActivationId::Tanh: return std::tanh(z);
        case ActivationId::Absolute: return std::abs(z);
        case ActivationId::SoftRootSign: return z / srs_denominator(z, p);
        case ActivationId::HardTanh: return std::clamp(z, -1.0, 1.0);
        case ActivationId::SiLU:
        case ActivationId::Swish: return z * logistic(z);
        case ActivationId::LiSHT: return z * std::tanh(z);
        case ActivationId::Softplus: return softplus(z);
        case ActivationId::ReLU: return z > 0.0 ? z : 0.0;
        case ActivationId::LeakyReLU: return z >= 0.0 ? z : kLeakySlope * z;
        // 0.5 (1 + tanh u) == logistic(2u); keeps the negative tail nonzero.
        case ActivationId::GELU: return z * logistic(2.0 * gelu_inner(z));
        case ActivationId::SELU: return z >= 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
        case ActivationId::Mish: return z * std::tanh(softplus(z));
        case ActivationId::ELU: return z >= 0.0 ? z : std::expm1(z);
        case ActivationId::PReLU: return z >= 0.0 ? z : kPreluSlope * z;
        case ActivationId::Sine: return std::sin(z);
        case ActivationId::SQU: return z * z + z;
        case ActivationId::MonotonicCubic: return z * z * z + z;
        case ActivationId::NCU: return z - z * z * z;
        case ActivationId::ZSqCos: return z * z * std::cos(z);
        case ActivationId::SSU: return kPi * sinc(z - kPi);
        case ActivationId::GCU: return z * std::cos(z);
        case ActivationId::DSU: return 0.5 * kPi * (sinc(z - kPi) - sinc(z + kPi));
    }
    throw DomainError("evaluate: unknown activation id");
}

bool is_kink(ActivationId id, double z) noexcept {
    switch (id) {
        case ActivationId::Signum:
        case ActivationId::Absolute:
        case ActivationId::ReLU:
        case ActivationId::LeakyReLU:
        case ActivationId::SELU:
        case ActivationId::PReLU: return z == 0.0;
        case ActivationId::HardTanh: return z == -1.0 || z == 1.0;
        default: return false;
    }
}

namespace {

double derivative_unchecked(ActivationId id, double z, const ActivationParams& p) {
    switch (id) {
        case ActivationId::Signum: return 0.0;
        case ActivationId::Identity: return 1.0;
        case ActivationId::BipolarSigmoid: {
            const double t = std::tanh(0.5 * z);
            return 0.5 * (1.0 - t * t);
        }
        case ActivationId::Sigmoid: {
            const double s = logistic(z);
            return s * (1.0 - s);
        }
        case ActivationId::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case ActivationId::Absolute: return z > 0.0 ? 1.0 : -1.0;
        case ActivationId::SoftRootSign: {
            const double e = std::exp(-z / p.srs_beta);
            const double d = z / p.srs_alpha + e;
            const double dd = 1.0 / p.srs_alpha - e / p.srs_beta;
            return (d - z * dd) / (d * d);
        }
        case ActivationId::HardTanh: return (z > -1.0 && z < 1.0) ? 1.0 : 0.0;
        case ActivationId::SiLU:
        case ActivationId::Swish: {
            const double s = logistic(z);
            return s + z * s * (1.0 - s);
        }
        case ActivationId::LiSHT: {
            const double t = std::tanh(z);
            return t + z * (1.0 - t * t);
        }
        case ActivationId::Softplus: return logistic(z);
        case ActivationId::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case ActivationId::LeakyReLU: return z > 0.0 ? 1.0 : kLeakySlope;
        case ActivationId::GELU: {
            const double s = logistic(2.0 * gelu_inner(z));
            const double du = kGeluLinear + 3.0 * kGeluCubic * z * z;
            return s + z * s * (1.0 - s) * 2.0 * du;
        }
        case ActivationId::SELU: return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
        case ActivationId::Mish: {
            const double t = std::tanh(softplus(z));
            return t + z * (1.0 - t * t) * logistic(z);
        }
        case ActivationId::ELU: return z >= 0.0 ? 1.0 : std::exp(z);
        case ActivationId::PReLU: return z > 0.0 ? 1.0 : kPreluSlope;
        case ActivationId::Sine: return std::cos(z);
        case ActivationId::SQU: return 2.0 * z + 1.0;
        case ActivationId::MonotonicCubic: return 3.0 * z * z + 1.0;
        case ActivationId::NCU: return 1.0 - 3.0 * z * z;
        case ActivationId::ZSqCos: return 2.0 * z * std::cos(z) - z * z * std::sin(z);
        case ActivationId::SSU: return kPi * sinc_derivative(z - kPi);
        case ActivationId::GCU: return std::cos(z) - z * std::sin(z);
        case ActivationId::DSU:
            return 0.5 * kPi * (sinc_derivative(z - kPi) - sinc_derivative(z + kPi));
    }
    return 0.0;
}

}  // namespace

double derivative(ActivationId id, double z, const ActivationParams& p) {
    if (!std::isfinite(z)) throw DomainError("derivative: non-finite input for " + std::string(name(id)));
    if (is_kink(id, z)) throw KinkError(std::string(name(id)), z);
    return derivative_unchecked(id, z, p);
}

double subgradient(ActivationId id, double z, const ActivationParams& p) noexcept {
    if (!std::isfinite(z) || is_kink(id, z)) return 0.0;
    return derivative_unchecked(id, z, p);
}

bool has_xor_property(ActivationId id) { return descriptor(id).xor_property; }

// --- metadata -------------------------------------------------------------

bool Range::contains(double v, double slack) const noexcept {
    const bool above = lo.closed ? v >= lo.value - slack : v > lo.value - slack;
    const bool below = hi.closed ? v <= hi.value + slack : v < hi.value + slack;
    return above && below;
}

namespace {

std::string format_end(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string Range::to_string() const {
    return std::string(lo.closed ? "[" : "(") + format_end(lo.value) + ", " + format_end(hi.value) +
           (hi.closed ? "]" : ")");
}

std::string HyperplaneCount::to_string() const {
    return is_infinite() ? std::string("inf") : std::to_string(count);
}

namespace {

constexpr RangeEnd closed(double v) { return {v, true}; }
constexpr RangeEnd open(double v) { return {v, false}; }
constexpr RangeEnd neg_inf() { return {-kInf, false}; }
constexpr RangeEnd pos_inf() { return {kInf, false}; }

// Infima/suprema that have no closed form, located numerically to 1e-12.
constexpr double kSiluMin = -0.27846454276107385;
constexpr double kGeluMin = -0.16905129736927407;
constexpr double kMishMin = -0.30884341301725043;
constexpr double kSsuMin = -0.6824595705010305;
constexpr double kDsuMax = 1.6364081368248824;

ActivationDescriptor make(ActivationId id) {
    using H = HyperplaneCount;
    const SmallValueApprox linear{0.0, 1.0};
    ActivationDescriptor d{};
    d.id = id;
    d.name = name(id);
    d.continuous = true;
    d.tabulated_properties = true;
    switch (id) {
        case ActivationId::Signum:
            d.formula = "-1 (z<0), 0 (z=0), 1 (z>0)";
            d.continuous = false;
            d.nondifferentiable_points = {0.0};
            d.monotonic = true;
            d.range = {closed(-1), closed(1)};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"monotonic", "No", "signum is non-decreasing"}};
            break;
        case ActivationId::Identity:
            d.formula = "z";
            d.monotonic = true;
            d.range = {neg_inf(), pos_inf()};
            d.small_value = linear;
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            break;
        case ActivationId::BipolarSigmoid:
            d.formula = "(1 - e^-z) / (1 + e^-z)";
            d.monotonic = true;
            d.range = {open(-1), open(1)};
            d.small_value = SmallValueApprox{0.0, 0.5};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"monotonic", "No", "equals tanh(z/2), strictly increasing"},
                        {"small_value", "z", "slope at the origin is 1/2"}};
            break;
        case ActivationId::Sigmoid:
            d.formula = "1 / (1 + e^-z)";
            d.monotonic = true;
            d.range = {open(0), open(1)};
            d.hyperplane_count = H::finite(0);
            d.sign_equivalent_identity = false;
            d.tabulated_properties = false;
            break;
        case ActivationId::Tanh:
            d.formula = "tanh(z)";
            d.monotonic = true;
            d.range = {open(-1), open(1)};
            d.small_value = linear;
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"sign_equivalent_identity", "", "blank cell; tanh has the sign of z"}};
            break;
        case ActivationId::Absolute:
            d.formula = "|z|";
            d.nondifferentiable_points = {0.0};
            d.monotonic = false;
            d.range = {closed(0), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = false;
            d.errata = {{"monotonic", "Yes", "|z| decreases on z < 0"}};
            break;
        case ActivationId::SoftRootSign: {
            const ActivationParams p;
            d.formula = "z / (z/alpha + e^(-z/beta))";
            d.params = {{"alpha", p.srs_alpha}, {"beta", p.srs_beta}};
            d.monotonic = false;
            // Minimum alpha*beta / (beta - alpha*e), attained at z = -beta.
            d.range = {closed(p.srs_alpha * p.srs_beta / (p.srs_beta - p.srs_alpha * std::numbers::e)),
                       open(p.srs_alpha)};
            d.small_value = linear;
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            break;
        }
        case ActivationId::HardTanh:
            d.formula = "max(-1, min(1, z))";
            d.nondifferentiable_points = {-1.0, 1.0};
            d.monotonic = true;
            d.range = {closed(-1), closed(1)};
            d.small_value = linear;
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"continuity/differentiability/monotonicity", "",
                         "blank cells; continuous, kinks at -1 and 1, non-decreasing"}};
            break;
        case ActivationId::SiLU:
            d.formula = "z / (1 + e^-z)";
            d.monotonic = false;
            d.range = {closed(kSiluMin), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.tabulated_properties = false;
            d.errata = {{"monotonic", "Yes", "minimum at z = -1.2785"},
                        {"range", "[-0.5, inf)", "infimum is -0.27846"}};
            break;
        case ActivationId::LiSHT:
            d.formula = "z tanh(z)";
            d.monotonic = false;
            d.range = {closed(0), pos_inf()};
            d.small_value = SmallValueApprox{0.0, 0.0};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = false;
            d.errata = {{"range", "(-inf, inf)", "z tanh z is non-negative"}};
            break;
        case ActivationId::Softplus:
            d.formula = "ln(1 + e^z)";
            d.monotonic = true;
            d.range = {open(0), pos_inf()};
            d.small_value = SmallValueApprox{std::numbers::ln2, 0.5};
            d.hyperplane_count = H::finite(0);
            d.sign_equivalent_identity = false;
            break;
        case ActivationId::ReLU:
            d.formula = "max(0, z)";
            d.nondifferentiable_points = {0.0};
            d.monotonic = true;
            d.range = {closed(0), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = false;
            break;
        case ActivationId::LeakyReLU:
            d.formula = "0.01 z (z<0), z (z>=0)";
            d.params = {{"slope", kLeakySlope}};
            d.nondifferentiable_points = {0.0};
            d.monotonic = true;
            d.range = {neg_inf(), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            break;
        case ActivationId::GELU:
            d.formula = "0.5 z (1 + tanh(sqrt(2/pi) z + 0.044715 z^3))";
            d.monotonic = false;
            d.range = {closed(kGeluMin), pos_inf()};
            d.small_value = SmallValueApprox{0.0, 0.5};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"continuity", "z=0", "continuous everywhere"},
                        {"monotonic", "Yes", "minimum at z = -0.7425"},
                        {"range", "[-0.5, inf)", "infimum is -0.16905"}};
            break;
        case ActivationId::SELU:
            d.formula = "lambda z (z>=0), lambda alpha (e^z - 1) (z<0)";
            d.params = {{"lambda", kSeluLambda}, {"alpha", kSeluAlpha}};
            d.nondifferentiable_points = {0.0};
            d.monotonic = true;
            d.range = {open(-kSeluLambda * kSeluAlpha), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            break;
        case ActivationId::Swish:
            d.formula = "z / (1 + e^-z)";
            d.monotonic = false;
            d.range = {closed(kSiluMin), pos_inf()};
            d.small_value = SmallValueApprox{0.0, 0.5};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"monotonic", "Yes", "minimum at z = -1.2785"},
                        {"range", "[-0.5, inf)", "infimum is -0.27846"}};
            break;
        case ActivationId::Mish:
            d.formula = "z tanh(ln(1 + e^z))";
            d.monotonic = false;
            d.range = {closed(kMishMin), pos_inf()};
            d.small_value = SmallValueApprox{0.0, std::tanh(std::numbers::ln2)};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.errata = {{"monotonic", "Yes", "minimum at z = -1.1924"}};
            break;
        case ActivationId::ELU:
            d.formula = "z (z>=0), e^z - 1 (z<0)";
            d.monotonic = true;
            d.range = {open(-1), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.tabulated_properties = false;
            d.errata = {{"differentiability", "z=0", "both one-sided slopes equal 1 for alpha = 1"}};
            break;
        case ActivationId::PReLU:
            d.formula = "z (z>=0), alpha z (z<0)";
            d.params = {{"alpha", kPreluSlope}};
            d.nondifferentiable_points = {0.0};
            d.monotonic = true;
            d.range = {neg_inf(), pos_inf()};
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.tabulated_properties = false;
            break;
        case ActivationId::Sine:
            d.formula = "sin(z)";
            d.monotonic = false;
            d.range = {closed(-1), closed(1)};
            d.small_value = linear;
            d.hyperplane_count = H::infinite();
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            break;
        case ActivationId::SQU:
            d.formula = "z^2 + z";
            d.monotonic = false;
            d.range = {closed(-0.25), pos_inf()};
            d.small_value = linear;
            d.hyperplane_count = H::finite(2);
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            break;
        case ActivationId::MonotonicCubic:
            d.formula = "z^3 + z";
            d.monotonic = true;
            d.range = {neg_inf(), pos_inf()};
            d.small_value = linear;
            d.hyperplane_count = H::finite(1);
            d.sign_equivalent_identity = true;
            d.tabulated_properties = false;
            break;
        case ActivationId::NCU:
            d.formula = "z - z^3";
            d.monotonic = false;
            d.range = {neg_inf(), pos_inf()};
            d.small_value = linear;
            d.hyperplane_count = H::finite(3);
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            break;
        case ActivationId::ZSqCos:
            d.formula = "z^2 cos(z)";
            d.monotonic = false;
            d.range = {neg_inf(), pos_inf()};
            d.small_value = SmallValueApprox{0.0, 0.0};
            d.hyperplane_count = H::infinite();
            d.sign_equivalent_identity = false;
            // Not tabulated. w = (1.6, 1.5), b = 0 separates XOR:
            // margins -9.60, 0.0099, 0.0099, -9.60.
            d.xor_property = true;
            d.tabulated_properties = false;
            d.errata = {{"range", "[,inf)", "malformed cell; |z^2 cos z| is unbounded both ways"}};
            break;
        case ActivationId::SSU:
            d.formula = "pi sinc(z - pi)";
            d.monotonic = false;
            d.range = {closed(kSsuMin), closed(kPi)};
            d.hyperplane_count = H::infinite();
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            d.tabulated_properties = false;
            break;
        case ActivationId::GCU:
            d.formula = "z cos(z)";
            d.monotonic = false;
            d.range = {neg_inf(), pos_inf()};
            d.small_value = linear;
            d.hyperplane_count = H::infinite();
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            break;
        case ActivationId::DSU:
            d.formula = "(pi/2) (sinc(z - pi) - sinc(z + pi))";
            d.monotonic = false;
            d.range = {closed(-kDsuMax), closed(kDsuMax)};
            d.small_value = linear;
            d.hyperplane_count = H::infinite();
            d.sign_equivalent_identity = false;
            d.xor_property = true;
            d.errata = {{"range", "[-1.04, 1.04]",
                         "extremes are +-1.6364 at z = +-2.631; +-1.04 is the range without the pi/2 factor"}};
            break;
    }
    return d;
}

std::array<ActivationDescriptor, kActivationCount> build_catalog() {
    std::array<ActivationDescriptor, kActivationCount> out{};
    for (std::size_t i = 0; i < kActivationCount; ++i) out[i] = make(kAll[i]);
    return out;
}

}  // namespace

const ActivationDescriptor& descriptor(ActivationId id) {
    static const auto catalog = build_catalog();
    return catalog[static_cast<std::size_t>(id)];
}

const ActivationDescriptor& step_descriptor() {
    static const ActivationDescriptor step = [] {
        ActivationDescriptor d{};
        d.id = ActivationId::Signum;
        d.name = "Step";
        d.formula = "0 (z<0), 1 (z>=0)";
        d.continuous = false;
        d.nondifferentiable_points = {0.0};
        d.monotonic = true;
        d.range = {closed(0), closed(1)};
        d.hyperplane_count = HyperplaneCount::finite(1);
        d.sign_equivalent_identity = false;
        d.xor_property = false;
        d.tabulated_properties = true;
        return d;
    }();
    return step;
}

}  // namespace osc
