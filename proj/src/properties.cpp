#include "osc/properties.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osc/error.hpp"

namespace osc {

void Interval::validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw ConfigError("interval requires finite lo < hi");
    }
    if (!(step > 0.0 && step < hi - lo)) {
        throw ConfigError("interval step must lie in (0, hi - lo)");
    }
}

std::size_t Interval::points() const {
    return static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
}

int sign_of(double v, double zero_tolerance) noexcept {
    if (std::abs(v) <= zero_tolerance) return 0;
    return v > 0.0 ? 1 : -1;
}

ZeroCrossings zero_crossings(ActivationId id, const Interval& iv, const ScanOptions& opts) {
    iv.validate();
    if (iv.step > 1e-2) throw ConfigError("zero_crossings: step must be <= 1e-2");

    ZeroCrossings out;
    const std::size_t n = iv.points();
    int last_nonzero = 0;
    int prev = 0;
    bool in_zero_run = false;
    double prev_z = iv.lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = iv.at(i);
        const int s = sign_of(evaluate(id, z), opts.zero_tolerance);
        if (s == 0) {
            out.exact_zeros.push_back(z);
            if (!in_zero_run) ++out.zero_count;
            in_zero_run = true;
        } else {
            in_zero_run = false;
            if (last_nonzero != 0 && s != last_nonzero) ++out.crossing_count;
            last_nonzero = s;
        }
        if (i > 0 && prev * s < 0) {
            out.brackets.emplace_back(prev_z, z);
            ++out.zero_count;
        }
        prev = s;
        prev_z = z;
    }
    return out;
}

GradientCheckReport gradient_check(ActivationId id, const Interval& iv, std::size_t n, double tol) {
    iv.validate();
    const auto& kinks = descriptor(id).nondifferentiable_points;
    const double h = kFiniteDifferenceStep;
    const double width = (iv.hi - iv.lo) / static_cast<double>(n);

    GradientCheckReport report;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = iv.lo + (static_cast<double>(i) + 0.5) * width;
        const bool near_kink = std::any_of(kinks.begin(), kinks.end(), [&](double k) {
            return std::abs(z - k) < kKinkGuardBand;
        });
        if (near_kink) continue;
        const double analytic = derivative(id, z);
        const double numeric = (evaluate(id, z + h) - evaluate(id, z - h)) / (2.0 * h);
        const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
        ++report.samples;
        if (err > report.max_relative_error) {
            report.max_relative_error = err;
            report.worst_point = z;
        }
    }
    report.passed = report.samples > 0 && report.max_relative_error <= tol;
    return report;
}

SmallValueReport small_value_check(ActivationId id, double tol) {
    const auto& d = descriptor(id);
    if (!d.small_value) {
        throw UnsupportedError(std::string(d.name) + " has no small-value approximation");
    }
    constexpr double h = 1e-6;
    SmallValueReport r;
    r.expected = *d.small_value;
    r.c0 = evaluate(id, 0.0);
    r.c1 = (evaluate(id, h) - evaluate(id, -h)) / (2.0 * h);
    r.passed = std::abs(r.c0 - r.expected.c0) <= tol && std::abs(r.c1 - r.expected.c1) <= tol;
    return r;
}

SignEquivalenceReport sign_equivalence_scan(ActivationId id, const Interval& iv, const ScanOptions& opts) {
    iv.validate();
    constexpr double kOriginTolerance = 1e-12;
    SignEquivalenceReport r;
    const std::size_t n = iv.points();
    for (std::size_t i = 0; i < n; ++i) {
        const double z = iv.at(i);
        const double g = evaluate(id, z);
        const int zs = sign_of(z, kOriginTolerance);
        const bool ok = zs == 0 ? std::abs(g) <= kOriginTolerance : sign_of(g, opts.zero_tolerance) == zs;
        if (!ok) {
            r.equivalent = false;
            r.counterexample = z;
            return r;
        }
    }
    return r;
}

RangeScan range_scan(ActivationId id, const Interval& iv) {
    iv.validate();
    RangeScan r;
    r.min = r.max = evaluate(id, iv.lo);
    r.argmin = r.argmax = iv.lo;
    const std::size_t n = iv.points();
    for (std::size_t i = 1; i < n; ++i) {
        const double z = iv.at(i);
        const double g = evaluate(id, z);
        if (g < r.min) {
            r.min = g;
            r.argmin = z;
        }
        if (g > r.max) {
            r.max = g;
            r.argmax = z;
        }
    }
    return r;
}

MonotonicityReport monotonicity_scan(ActivationId id, const Interval& iv) {
    iv.validate();
    constexpr std::size_t kKeep = 16;
    MonotonicityReport r;
    const std::size_t n = iv.points();
    double prev = evaluate(id, iv.lo);
    for (std::size_t i = 1; i < n; ++i) {
        const double g = evaluate(id, iv.at(i));
        if (g < prev) {
            r.monotonic = false;
            ++r.violation_count;
            if (r.violations.size() < kKeep) r.violations.push_back(iv.at(i - 1));
        }
        prev = g;
    }
    return r;
}

ContinuityReport continuity_scan(ActivationId id, const Interval& iv) {
    iv.validate();
    // A cell is suspect when the function moves faster than slope 10 across it.
    const double suspect = 10.0 * iv.step;
    constexpr double kJumpThreshold = 1e-6;
    constexpr int kMaxBisections = 64;

    ContinuityReport r;
    const std::size_t n = iv.points();
    double prev_z = iv.lo;
    double prev_g = evaluate(id, prev_z);
    for (std::size_t i = 1; i < n; ++i) {
        const double z = iv.at(i);
        const double g = evaluate(id, z);
        if (std::abs(g - prev_g) > suspect) {
            double a = prev_z, b = z, ga = prev_g, gb = g;
            for (int k = 0; k < kMaxBisections && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++k) {
                const double m = 0.5 * (a + b);
                const double gm = evaluate(id, m);
                if (std::abs(gm - ga) >= std::abs(gb - gm)) {
                    b = m;
                    gb = gm;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            const double jump = std::abs(gb - ga);
            if (jump > r.max_jump) {
                r.max_jump = jump;
                r.location = 0.5 * (a + b);
            }
        }
        prev_z = z;
        prev_g = g;
    }
    r.continuous = r.max_jump <= kJumpThreshold;
    return r;
}

}  // namespace osc
