#include "demandcast/inventory.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace demandcast {

void ReplenishmentPolicy::validate() const {
    if (review_period < 1) throw Error(ErrorCode::InvalidConfig, "review_period must be at least 1");
    if (lead_time < 0) throw Error(ErrorCode::InvalidConfig, "lead_time must be non-negative");
    if (!(safety_factor >= 0.0)) throw Error(ErrorCode::InvalidConfig, "safety_factor must be non-negative");
    if (initial_stock && !(*initial_stock >= 0.0)) throw Error(ErrorCode::InvalidConfig, "initial_stock must be >= 0");
    if (!(holding_cost >= 0.0) || !(emergency_cost >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "unit costs must be non-negative");
    if (!(overstock_multiple > 0.0)) throw Error(ErrorCode::InvalidConfig, "overstock_multiple must be positive");
    if (overstock_window < 1) throw Error(ErrorCode::InvalidConfig, "overstock_window must be at least 1");
}

double InventoryOutcome::overstock_rate() const noexcept {
    return days == 0 ? 0.0 : static_cast<double>(overstock_days) / static_cast<double>(days);
}

double InventoryOutcome::stockout_rate() const noexcept {
    return days == 0 ? 0.0 : static_cast<double>(stockout_days) / static_cast<double>(days);
}

double InventoryOutcome::cost_index() const noexcept { return holding_cost * total_closing + emergency_cost * total_lost; }

double InventoryOutcome::forecast_accuracy() const noexcept {
    if (!(total_demand > 0.0)) return forecast_abs_error == 0.0 ? 100.0 : 0.0;
    return 100.0 * (1.0 - forecast_abs_error / total_demand);
}

InventoryOutcome simulate(std::span<const double> demand, std::span<const double> forecast, double sigma,
                          const ReplenishmentPolicy& policy, std::span<const Date> dates) {
    policy.validate();
    if (demand.size() != forecast.size())
        throw Error(ErrorCode::InvalidArgument, "demand and forecast are not aligned");
    if (!dates.empty() && dates.size() != demand.size())
        throw Error(ErrorCode::InvalidArgument, "dates are not aligned with demand");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be finite and >= 0");

    const std::size_t n = demand.size();
    InventoryOutcome out;
    out.holding_cost = policy.holding_cost;
    out.emergency_cost = policy.emergency_cost;
    std::vector<double> f(forecast.begin(), forecast.end());
    for (auto& v : f) {
        if (v < 0.0) {
            v = 0.0;
            ++out.negative_forecasts;
        }
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (demand[t] < 0.0) throw Error(ErrorCode::InvalidArgument, "demand must be non-negative");
        out.forecast_abs_error += std::abs(demand[t] - f[t]);
    }

    const std::size_t protection = static_cast<std::size_t>(policy.lead_time + policy.review_period);
    auto order_up_to = [&](std::size_t t) {
        double s = 0.0;
        for (std::size_t k = t; k < std::min(n, t + protection); ++k) s += f[k];
        return s + policy.safety_factor * sigma;
    };

    // pipeline[k] holds the quantity arriving k days from today.
    std::deque<double> pipeline(static_cast<std::size_t>(policy.lead_time) + 1, 0.0);
    double on_hand = n == 0 ? 0.0 : policy.initial_stock.value_or(order_up_to(0));
    double window_sum = 0.0;
    out.ledger.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        LedgerDay day;
        day.date = dates.empty() ? Date(static_cast<int>(t)) : dates[t];
        day.opening = on_hand;
        day.received = pipeline.front();
        pipeline.front() = 0.0;
        if (t % static_cast<std::size_t>(policy.review_period) == 0) {
            double position = day.opening + day.received;
            for (std::size_t k = 1; k < pipeline.size(); ++k) position += pipeline[k];
            day.ordered = std::max(0.0, order_up_to(t) - position);
            if (policy.lead_time == 0)
                day.received += day.ordered;
            else
                pipeline[static_cast<std::size_t>(policy.lead_time)] += day.ordered;
        }
        day.demand = demand[t];
        const double available = day.opening + day.received;
        day.sold = std::min(day.demand, available);
        day.lost_sales = day.demand - day.sold;
        day.closing = available - day.sold;

        window_sum += demand[t];
        if (t >= static_cast<std::size_t>(policy.overstock_window)) window_sum -= demand[t - static_cast<std::size_t>(policy.overstock_window)];
        const double span = static_cast<double>(std::min<std::size_t>(t + 1, policy.overstock_window));
        day.overstocked = day.closing > policy.overstock_multiple * (window_sum / span);

        out.total_demand += day.demand;
        out.total_closing += day.closing;
        out.total_lost += day.lost_sales;
        if (day.lost_sales > 0.0) ++out.stockout_days;
        if (day.overstocked) ++out.overstock_days;
        out.ledger.push_back(day);

        on_hand = day.closing;
        pipeline.pop_front();
        pipeline.push_back(0.0);
    }
    out.days = n;
    return out;
}

InventoryOutcome combine(const std::vector<InventoryOutcome>& parts) {
    InventoryOutcome out;
    if (!parts.empty()) {
        out.holding_cost = parts.front().holding_cost;
        out.emergency_cost = parts.front().emergency_cost;
    }
    for (const auto& p : parts) {
        out.ledger.insert(out.ledger.end(), p.ledger.begin(), p.ledger.end());
        out.days += p.days;
        out.overstock_days += p.overstock_days;
        out.stockout_days += p.stockout_days;
        out.total_demand += p.total_demand;
        out.total_closing += p.total_closing;
        out.total_lost += p.total_lost;
        out.forecast_abs_error += p.forecast_abs_error;
        out.negative_forecasts += p.negative_forecasts;
    }
    return out;
}

namespace {

double reduction_pct(double before, double after) {
    if (before == 0.0) return after == 0.0 ? 0.0 : -100.0;
    return (before - after) / before * 100.0;
}

} // namespace

ImpactTable impact_table(const std::vector<std::pair<std::string, InventoryOutcome>>& outcomes,
                         const InventoryOutcome& baseline) {
    ImpactTable table;
    for (const auto& [model, o] : outcomes) {
        table.rows.push_back({model, "overstock_rate", baseline.overstock_rate(), o.overstock_rate(),
                              reduction_pct(baseline.overstock_rate(), o.overstock_rate()), false});
        table.rows.push_back({model, "stockout_rate", baseline.stockout_rate(), o.stockout_rate(),
                              reduction_pct(baseline.stockout_rate(), o.stockout_rate()), false});
        const double acc_before = baseline.forecast_accuracy(), acc_after = o.forecast_accuracy();
        table.rows.push_back({model, "forecast_accuracy", acc_before, acc_after,
                              acc_before == 0.0 ? 0.0 : (acc_after - acc_before) / std::abs(acc_before) * 100.0, true});
        table.rows.push_back({model, "cost_index", baseline.cost_index(), o.cost_index(),
                              reduction_pct(baseline.cost_index(), o.cost_index()), false});
    }
    return table;
}

} // namespace demandcast
