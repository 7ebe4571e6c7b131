#include "demandcast/synthetic.hpp"

#include "demandcast/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace demandcast {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the combined inputs.
    std::uint64_t z = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace

void SyntheticConfig::validate() const {
    if (stores < 1 || items < 1) throw Error(ErrorCode::InvalidConfig, "need at least one store and one item");
    if (end < start) throw Error(ErrorCode::InvalidConfig, "synthetic end date precedes start date");
    if (!(base_min > 0.0) || base_max < base_min) throw Error(ErrorCode::InvalidConfig, "invalid base level range");
    if (outage_probability < 0.0 || outage_probability > 1.0 || missing_fraction < 0.0 || missing_fraction >= 1.0)
        throw Error(ErrorCode::InvalidConfig, "probabilities must lie in [0, 1)");
    if (outage_level_min < 0.0 || outage_level_max < outage_level_min)
        throw Error(ErrorCode::InvalidConfig, "invalid outage level range");
}

SalesTable generate_synthetic_sales(const SyntheticConfig& cfg, const HolidayCalendar* calendar) {
    cfg.validate();
    const int n_days = cfg.end - cfg.start + 1;

    std::vector<std::vector<double>> outage(static_cast<std::size_t>(cfg.stores));
    std::vector<double> store_scale(static_cast<std::size_t>(cfg.stores));
    for (int s = 0; s < cfg.stores; ++s) {
        std::mt19937_64 rng(mix(cfg.seed, 1000003ULL + static_cast<std::uint64_t>(s), 0));
        store_scale[static_cast<std::size_t>(s)] = 0.75 + 0.5 * unit(rng);
        auto& o = outage[static_cast<std::size_t>(s)];
        o.assign(static_cast<std::size_t>(n_days), 1.0);
        for (auto& v : o)
            if (unit(rng) < cfg.outage_probability)
                v = cfg.outage_level_min + (cfg.outage_level_max - cfg.outage_level_min) * unit(rng);
    }

    std::vector<SalesRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.stores) * static_cast<std::size_t>(cfg.items) *
                    static_cast<std::size_t>(n_days));
    for (int s = 0; s < cfg.stores; ++s) {
        for (int i = 0; i < cfg.items; ++i) {
            std::mt19937_64 item_rng(mix(cfg.seed, 7ULL, static_cast<std::uint64_t>(i)));
            const double item_base = cfg.base_min + (cfg.base_max - cfg.base_min) * unit(item_rng);
            const double phase = 0.3 * (unit(item_rng) - 0.5);
            const double level = item_base * store_scale[static_cast<std::size_t>(s)];
            std::mt19937_64 rng(mix(cfg.seed, static_cast<std::uint64_t>(s) + 1, static_cast<std::uint64_t>(i) + 1));
            const SeriesKey key{std::to_string(s + 1), std::to_string(i + 1)};
            for (int t = 0; t < n_days; ++t) {
                const Date d = cfg.start + t;
                const double years = t / 365.25;
                const double doy = d - Date::from_ymd(d.year(), 1, 1);
                const double season =
                    1.0 + cfg.yearly_amplitude * std::sin(2.0 * std::numbers::pi * (doy / 365.25 - 0.25) + phase);
                double mean = level * (1.0 + cfg.annual_growth * years) * season *
                              cfg.weekday_factors[static_cast<std::size_t>(d.weekday())];
                if (calendar && calendar->contains(d)) mean *= cfg.holiday_lift;
                mean *= outage[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
                const double qty = static_cast<double>(std::poisson_distribution<long>(std::max(mean, 1e-9))(rng));
                const bool drop = cfg.missing_fraction > 0.0 && unit(rng) < cfg.missing_fraction;
                if (drop && t > 0 && t + 1 < n_days) continue;
                records.push_back({d, key, qty, false, {}});
            }
        }
    }
    return SalesTable(std::move(records));
}

} // namespace demandcast
