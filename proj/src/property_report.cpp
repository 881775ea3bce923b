#include "osc/property_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace osc {

namespace {

const Interval kCore{-10.0, 10.0, kDefaultScanStep};
const Interval kWide{-20.0, 20.0, kDefaultScanStep};
const Interval kGradient{-6.0, 6.0, 1e-2};
constexpr std::size_t kGradientSamples = 1000;
constexpr double kGradientTol = 1e-5;
constexpr double kSmallValueTol = 1e-6;
constexpr double kRangeSlack = 1e-9;
constexpr double kEndpointTol = 0.01;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void add(PropertyRow& row, std::string property, std::string expected, std::string measured, bool ok) {
    row.checks.push_back({std::move(property), std::move(expected), std::move(measured), ok});
}

}  // namespace

bool PropertyRow::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.ok; });
}

bool PropertyReport::ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const PropertyRow& r) { return r.ok(); });
}

std::vector<std::string> PropertyReport::contradictions() const {
    std::vector<std::string> out;
    for (const auto& row : rows) {
        for (const auto& c : row.checks) {
            if (!c.ok) out.push_back(std::string(name(row.id)) + ": " + c.property);
        }
    }
    return out;
}

Interval range_interval_for(ActivationId id) {
    if (id == ActivationId::SSU) return {-40.0, 40.0, kDefaultScanStep};
    return kWide;
}

PropertyRow measure_properties(ActivationId id) {
    const auto& d = descriptor(id);
    PropertyRow row;
    row.id = id;

    row.continuous = continuity_scan(id, kCore).continuous;
    add(row, "continuous", yes_no(d.continuous), yes_no(row.continuous), row.continuous == d.continuous);

    row.monotonic = monotonicity_scan(id, kCore).monotonic;
    add(row, "monotonic", yes_no(d.monotonic), yes_no(row.monotonic), row.monotonic == d.monotonic);

    row.range_interval = range_interval_for(id);
    row.range = range_scan(id, row.range_interval);
    {
        bool ok = d.range.contains(row.range.min, kRangeSlack) && d.range.contains(row.range.max, kRangeSlack);
        if (d.range.lo.finite()) ok = ok && std::abs(row.range.min - d.range.lo.value) <= kEndpointTol;
        if (d.range.hi.finite()) ok = ok && std::abs(row.range.max - d.range.hi.value) <= kEndpointTol;
        add(row, "range", d.range.to_string(), "[" + num(row.range.min) + ", " + num(row.range.max) + "]", ok);
    }

    if (d.small_value) {
        row.small_value = small_value_check(id, kSmallValueTol);
        add(row, "small_value", num(d.small_value->c0) + " + " + num(d.small_value->c1) + " z",
            num(row.small_value->c0) + " + " + num(row.small_value->c1) + " z", row.small_value->passed);
    }

    row.zeros = zero_crossings(id, kCore);
    row.zero_count_wide = zero_crossings(id, kWide).zero_count;
    {
        const auto& h = d.hyperplane_count;
        const bool ok = h.is_infinite()
                            ? (row.zeros.zero_count >= 2 && row.zero_count_wide > row.zeros.zero_count)
                            : row.zeros.zero_count == h.count;
        add(row, "hyperplane_count", h.to_string(),
            std::to_string(row.zeros.zero_count) + " on [-10,10], " + std::to_string(row.zero_count_wide) +
                " on [-20,20]",
            ok);
    }

    row.sign_equivalent = sign_equivalence_scan(id, kCore).equivalent;
    add(row, "sign_equivalent_identity", yes_no(d.sign_equivalent_identity), yes_no(row.sign_equivalent),
        row.sign_equivalent == d.sign_equivalent_identity);

    row.gradient = gradient_check(id, kGradient, kGradientSamples, kGradientTol);
    add(row, "derivative", "max rel err <= " + num(kGradientTol), num(row.gradient.max_relative_error),
        row.gradient.passed);

    return row;
}

PropertyReport build_property_report() {
    PropertyReport report;
    for (ActivationId id : all_activations()) report.rows.push_back(measure_properties(id));
    return report;
}

void write_report_json(const PropertyReport& report, std::ostream& os) {
    using nlohmann::ordered_json;
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        const auto& d = descriptor(row.id);
        ordered_json desc;
        desc["formula"] = d.formula;
        ordered_json params = ordered_json::object();
        for (const auto& p : d.params) params[std::string(p.name)] = p.value;
        desc["params"] = params;
        desc["continuous"] = d.continuous;
        desc["nondifferentiable_points"] = d.nondifferentiable_points;
        desc["monotonic"] = d.monotonic;
        desc["range"] = d.range.to_string();
        if (d.small_value) {
            desc["small_value"] = {d.small_value->c0, d.small_value->c1};
        } else {
            desc["small_value"] = nullptr;
        }
        desc["hyperplane_count"] = d.hyperplane_count.to_string();
        desc["sign_equivalent_identity"] = d.sign_equivalent_identity;
        desc["xor_property"] = d.xor_property;
        ordered_json errata = ordered_json::array();
        for (const auto& e : d.errata) {
            errata.push_back({{"field", e.field}, {"table", e.table}, {"note", e.note}});
        }
        desc["errata"] = errata;

        ordered_json measured;
        measured["continuous"] = row.continuous;
        measured["monotonic"] = row.monotonic;
        measured["range_min"] = row.range.min;
        measured["range_max"] = row.range.max;
        measured["range_interval"] = {row.range_interval.lo, row.range_interval.hi};
        measured["zero_crossings"] = row.zeros.crossing_count;
        measured["zero_count"] = row.zeros.zero_count;
        measured["zero_count_wide"] = row.zero_count_wide;
        measured["sign_equivalent_identity"] = row.sign_equivalent;
        if (row.small_value) {
            measured["small_value"] = {row.small_value->c0, row.small_value->c1};
        } else {
            measured["small_value"] = nullptr;
        }
        measured["gradient_max_rel_error"] = row.gradient.max_relative_error;

        ordered_json checks = ordered_json::array();
        for (const auto& c : row.checks) {
            checks.push_back({{"property", c.property}, {"expected", c.expected}, {"measured", c.measured},
                              {"ok", c.ok}});
        }
        ordered_json entry;
        entry["activation"] = name(row.id);
        entry["descriptor"] = desc;
        entry["measured"] = measured;
        entry["checks"] = checks;
        entry["ok"] = row.ok();
        rows.push_back(entry);
    }
    ordered_json doc;
    doc["ok"] = report.ok();
    doc["contradictions"] = report.contradictions();
    doc["rows"] = rows;
    os << doc.dump(2) << '\n';
}

void write_report_csv(const PropertyReport& report, std::ostream& os) {
    os << "activation,continuous,monotonic,range,small_value,hyperplane_count,sign_equivalent_identity,"
          "xor_property,measured_continuous,measured_monotonic,measured_min,measured_max,zero_crossings,"
          "zero_count,measured_sign_equivalent,measured_c0,measured_c1,gradient_max_rel_error,ok\n";
    for (const auto& row : report.rows) {
        const auto& d = descriptor(row.id);
        os << name(row.id) << ',' << yes_no(d.continuous) << ',' << yes_no(d.monotonic) << ",\""
           << d.range.to_string() << "\",";
        if (d.small_value) os << num(d.small_value->c0) << " + " << num(d.small_value->c1) << " z";
        os << ',' << d.hyperplane_count.to_string() << ',' << yes_no(d.sign_equivalent_identity) << ','
           << yes_no(d.xor_property) << ',' << yes_no(row.continuous) << ',' << yes_no(row.monotonic) << ','
           << num(row.range.min) << ',' << num(row.range.max) << ',' << row.zeros.crossing_count << ','
           << row.zeros.zero_count << ',' << yes_no(row.sign_equivalent) << ',';
        if (row.small_value) os << num(row.small_value->c0) << ',' << num(row.small_value->c1);
        else os << ',';
        os << ',' << num(row.gradient.max_relative_error) << ',' << (row.ok() ? "true" : "false") << '\n';
    }
}

}  // namespace osc
