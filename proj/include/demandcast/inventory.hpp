#pragma once

#include "demandcast/date.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace demandcast {

/// Periodic-review order-up-to replenishment with lost sales.
struct ReplenishmentPolicy {
    int review_period = 1;
    /// Safety stock in units of the supplying model's training-residual std.
    double safety_factor = 0.5;
    int lead_time = 1;
    /// Opening stock on the first day; defaults to the first order-up-to level.
    std::optional<double> initial_stock;
    double holding_cost = 1.0;
    double emergency_cost = 5.0;
    /// A day is overstocked when closing stock exceeds this multiple of the
    /// trailing mean demand (window includes the current day).
    double overstock_multiple = 2.0;
    int overstock_window = 7;

    void validate() const;
};

struct LedgerDay {
    Date date;
    double opening = 0.0;
    double ordered = 0.0;
    double received = 0.0;
    double demand = 0.0;
    double sold = 0.0;
    double lost_sales = 0.0;
    double closing = 0.0;
    bool overstocked = false;
};

struct InventoryOutcome {
    std::vector<LedgerDay> ledger;
    std::size_t days = 0;
    std::size_t overstock_days = 0;
    std::size_t stockout_days = 0;
    double total_demand = 0.0;
    double total_closing = 0.0;
    double total_lost = 0.0;
    /// Sum of |demand - forecast| over the simulated days.
    double forecast_abs_error = 0.0;
    std::size_t negative_forecasts = 0;
    double holding_cost = 1.0;
    double emergency_cost = 5.0;

    double overstock_rate() const noexcept;
    double stockout_rate() const noexcept;
    double cost_index() const noexcept;
    /// 100 * (1 - MAE / mean demand).
    double forecast_accuracy() const noexcept;
};

/// `dates` may be empty, in which case ledger dates count from day 0.
InventoryOutcome simulate(std::span<const double> demand, std::span<const double> forecast, double sigma,
                          const ReplenishmentPolicy& policy, std::span<const Date> dates = {});

/// Pools counts and totals across series; ledgers are concatenated.
InventoryOutcome combine(const std::vector<InventoryOutcome>& parts);

struct ImpactRow {
    std::string model;
    std::string metric;
    double before = 0.0;
    double after = 0.0;
    /// Positive when the model improves on the baseline.
    double improvement_pct = 0.0;
    bool higher_is_better = false;
};

struct ImpactTable {
    std::vector<ImpactRow> rows;
};

/// Before/after rows per model with the baseline as "before": overstock
/// rate, stockout rate, forecast accuracy and cost index.
ImpactTable impact_table(const std::vector<std::pair<std::string, InventoryOutcome>>& outcomes,
                         const InventoryOutcome& baseline);

} // namespace demandcast
