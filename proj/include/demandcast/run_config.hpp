#pragma once

#include "demandcast/backtest.hpp"
#include "demandcast/inventory.hpp"
#include "demandcast/serialize.hpp"
#include "demandcast/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace demandcast {

inline constexpr std::string_view kVersion = "1.0.0";

/// One canonical record of a run. Relative paths resolve against the
/// working directory.
struct RunConfig {
    std::filesystem::path data_path = "data/sample_sales.csv";
    std::filesystem::path holiday_calendar_path = "data/holidays_IN_2013_2017.csv";
    std::filesystem::path output_dir = "out";
    CsvSchema schema;
    FillMethod fill_method = FillMethod::LinearInterpolate;
    Granularity granularity = Granularity::PerSeries;
    SplitSpec split = SplitSpec::after(Date::from_ymd(2017, 7, 31), Date::from_ymd(2017, 12, 31));
    /// Any of S1, S2 and S2-lagged (Scenario 2 with the causal deviation flag).
    std::vector<std::string> scenarios{"S1", "S2"};
    DeviationMode deviation_mode = DeviationMode::SameDay;
    bool include_causal_variant = false;
    std::vector<ModelKind> models = default_models();
    ModelSettings settings;
    DeviationConfig deviation;
    int histogram_bins = 30;
    bool exclude_imputed = false;
    ReplenishmentPolicy policy;
    /// Scenario whose forecasts feed the inventory simulation; empty picks the last.
    std::string simulate_scenario;
    /// Models to simulate; empty means every model that produced forecasts.
    std::vector<std::string> simulate_models;
    /// "model": each forecast uses its own training-residual std for safety
    /// stock. "baseline": every forecast uses the naive baseline's std, so all
    /// models hold the same safety stock.
    std::string safety_sigma = "model";
    int workers = 1;
    /// Reserved; the pipeline draws no random numbers.
    std::uint64_t seed = 0;
    /// Fill the runtime_s column of metrics.csv (breaks byte-identical reruns).
    bool record_runtime = false;
    bool save_models = false;
    SyntheticConfig synthetic;

    /// Scenario ids to evaluate, with the causal variant appended when requested.
    std::vector<std::string> effective_scenarios() const;
    ScenarioSpec scenario(const std::string& id) const;
    /// Throws InvalidConfig for inconsistent settings and Input for missing files.
    void validate(bool require_inputs = true) const;
};

void to_json(Json& j, const RunConfig& c);
/// Keys absent from `j` keep their defaults.
void from_json(const Json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);
std::string config_fingerprint(const RunConfig& c);

} // namespace demandcast
