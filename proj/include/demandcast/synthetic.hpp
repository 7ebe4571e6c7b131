#pragma once

#include "demandcast/features.hpp"
#include "demandcast/sales_table.hpp"

#include <array>
#include <cstdint>

namespace demandcast {

/// Deterministic retail-like daily sales: item level times store scale,
/// linear growth, yearly and weekly seasonality, holiday lift, Poisson
/// noise and store-wide outage days where sales collapse.
struct SyntheticConfig {
    int stores = 10;
    int items = 50;
    Date start = Date::from_ymd(2013, 1, 1);
    Date end = Date::from_ymd(2017, 12, 31);
    std::uint64_t seed = 20130101;
    double base_min = 15.0;
    double base_max = 90.0;
    double annual_growth = 0.08;
    double yearly_amplitude = 0.20;
    /// Monday through Sunday.
    std::array<double, 7> weekday_factors{0.80, 0.93, 0.94, 0.99, 1.05, 1.12, 1.17};
    double holiday_lift = 1.25;
    /// Daily probability that a store suffers an outage.
    double outage_probability = 0.05;
    double outage_level_min = 0.05;
    double outage_level_max = 0.15;
    /// Fraction of rows dropped at random (never the first or last day).
    double missing_fraction = 0.0;

    void validate() const;
};

/// Rows for stores 1..stores and items 1..items in (store, item, date) order.
/// Each store and each series draws from its own seeded stream, so a smaller
/// configuration reproduces the matching subset of a larger one exactly.
SalesTable generate_synthetic_sales(const SyntheticConfig& cfg, const HolidayCalendar* calendar = nullptr);

} // namespace demandcast
