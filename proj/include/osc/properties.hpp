#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osc/activation.hpp"

namespace osc {

// A scanned segment [lo, hi] sampled at lo + i * step. The grid is rebuilt from
// the index each time so accumulated rounding never shifts the points.
struct Interval {
    double lo;
    double hi;
    double step;

    // Throws ConfigError unless lo < hi and 0 < step < hi - lo.
    void validate() const;
    std::size_t points() const;  // number of gridpoints, hi included
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

inline constexpr double kDefaultScanStep = 1e-3;

// Grid scans treat a value as zero only when it is exactly 0.0 unless a
// tolerance is given.
struct ScanOptions {
    double zero_tolerance = 0.0;
};

int sign_of(double v, double zero_tolerance = 0.0) noexcept;

struct ZeroCrossings {
    // Sub-intervals [z, z + step] on which g changes sign strictly.
    std::vector<std::pair<double, double>> brackets;
    // Gridpoints where g evaluates to zero.
    std::vector<double> exact_zeros;
    // Sign changes along the grid, skipping zero gridpoints.
    int crossing_count = 0;
    // Zeros of g counted the way a decision boundary sees them: each maximal
    // run of zero gridpoints is one, and so is each strict bracket. Touching
    // roots (|z| at 0) and zero half-lines (ReLU) each count once.
    int zero_count = 0;
};

// Requires step <= 1e-2.
ZeroCrossings zero_crossings(ActivationId id, const Interval& iv, const ScanOptions& opts = {});

struct GradientCheckReport {
    double max_relative_error = 0.0;
    double worst_point = 0.0;
    std::size_t samples = 0;
    bool passed = false;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kKinkGuardBand = 1e-3;

// Compares derivative() against (g(z+h) - g(z-h)) / 2h at n evenly spaced
// midpoints of iv, skipping any point within the guard band of a kink.
// Relative error uses max(1, |g'(z)|) as denominator.
GradientCheckReport gradient_check(ActivationId id, const Interval& iv, std::size_t n, double tol);

struct SmallValueReport {
    double c0 = 0.0;  // measured g(0)
    double c1 = 0.0;  // measured g'(0), central difference
    SmallValueApprox expected{};
    bool passed = false;
};

// Throws UnsupportedError when the descriptor has no small-value approximation.
SmallValueReport small_value_check(ActivationId id, double tol);

struct SignEquivalenceReport {
    bool equivalent = true;
    std::optional<double> counterexample;
};

// sign(g(z)) == sign(z) at every gridpoint. At the origin only |g(0)| <= 1e-12
// is required.
SignEquivalenceReport sign_equivalence_scan(ActivationId id, const Interval& iv,
                                            const ScanOptions& opts = {});

struct RangeScan {
    double min = 0.0;
    double max = 0.0;
    double argmin = 0.0;
    double argmax = 0.0;
};

RangeScan range_scan(ActivationId id, const Interval& iv);

struct MonotonicityReport {
    bool monotonic = true;
    std::size_t violation_count = 0;
    std::vector<double> violations;  // first few gridpoints z with g(z + step) < g(z)
};

MonotonicityReport monotonicity_scan(ActivationId id, const Interval& iv);

struct ContinuityReport {
    bool continuous = true;
    double max_jump = 0.0;  // largest jump left after bisecting a suspect cell
    double location = 0.0;
};

// Flags cells whose jump survives repeated bisection down to ~1e-13 width.
ContinuityReport continuity_scan(ActivationId id, const Interval& iv);

}  // namespace osc
