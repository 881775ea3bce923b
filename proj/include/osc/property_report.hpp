#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "osc/activation.hpp"
#include "osc/properties.hpp"

namespace osc {

struct PropertyCheck {
    std::string property;
    std::string expected;
    std::string measured;
    bool ok = false;
};

struct PropertyRow {
    ActivationId id{};
    bool continuous = false;
    bool monotonic = false;
    RangeScan range{};
    Interval range_interval{};
    ZeroCrossings zeros{};                // on [-10, 10]
    int zero_count_wide = 0;              // on [-20, 20]
    bool sign_equivalent = false;
    std::optional<SmallValueReport> small_value;
    GradientCheckReport gradient{};
    std::vector<PropertyCheck> checks;

    bool ok() const;
};

struct PropertyReport {
    std::vector<PropertyRow> rows;

    bool ok() const;
    std::vector<std::string> contradictions() const;  // "<id>: <property>"
};

// Grid used for range scans; SSU needs a wider window to reach its minimum.
Interval range_interval_for(ActivationId id);

PropertyRow measure_properties(ActivationId id);
PropertyReport build_property_report();

void write_report_json(const PropertyReport& report, std::ostream& os);
void write_report_csv(const PropertyReport& report, std::ostream& os);

}  // namespace osc
