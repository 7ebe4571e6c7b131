#pragma once

#include "demandcast/arimax.hpp"
#include "demandcast/features.hpp"
#include "demandcast/gbdt.hpp"
#include "demandcast/metrics.hpp"
#include "demandcast/prophet_like.hpp"
#include "demandcast/sales_table.hpp"
#include "demandcast/svr.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace demandcast {

enum class ModelKind { Gbdt, Arimax, ArimaxOneStep, ProphetLike, Svr, Naive };

std::string_view model_name(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_name(std::string_view name);
/// The four forecasting models plus the seasonal-naive reference.
std::vector<ModelKind> default_models();

struct ModelSettings {
    GbdtConfig gbdt;
    ArimaxConfig arimax;
    ProphetConfig prophet;
    SvrConfig svr;
};

struct ScenarioSpec {
    std::string id = "S1";
    FeatureSpec features = FeatureSpec::scenario1();
    std::vector<ModelKind> models = default_models();
    SplitSpec split;
    Granularity granularity = Granularity::PerSeries;
    ModelSettings settings;
    int histogram_bins = 30;
    /// Drop imputed rows from the scored test set.
    bool exclude_imputed = false;

    static ScenarioSpec scenario1(const SplitSpec& split, Granularity granularity = Granularity::PerSeries);
    static ScenarioSpec scenario2(const SplitSpec& split, Granularity granularity = Granularity::PerSeries,
                                  DeviationMode mode = DeviationMode::SameDay);

    /// True when the feature set carries weekday, holiday or deviation columns.
    bool exogenous() const noexcept;
    void validate() const;
};

/// Training values repeated with a 7-day period into the test window; the
/// last training value when the history is shorter than a week.
std::vector<double> naive_baseline(std::span<const double> train, std::size_t horizon);

struct ModelEvaluation {
    ModelKind kind = ModelKind::Naive;
    std::string name;
    bool ok = false;
    std::string error;
    Metrics metrics;
    /// Pooled test rows in series-then-date order.
    std::vector<Date> dates;
    std::vector<std::size_t> series;
    std::vector<double> actual;
    std::vector<double> predicted;
    std::vector<Metrics> per_series;
    /// Per-series standard deviation of in-sample training residuals.
    std::vector<double> train_sigma;
    std::vector<HistogramBin> histogram;
    double runtime_s = 0.0;
    std::vector<std::string> warnings;
    /// Per-series model documents, filled when artifacts are requested.
    std::vector<std::string> artifacts;

    std::vector<double> residuals() const;
};

struct EvaluationReport {
    std::string scenario;
    std::string feature_label;
    Granularity granularity = Granularity::PerSeries;
    SplitSpec split;
    std::vector<SeriesKey> series_keys;
    std::vector<std::string> feature_columns;
    std::vector<ModelEvaluation> models;
    /// Gain importance pooled over every per-series tree model.
    std::vector<FeatureScore> importance;
    std::string data_fingerprint;
    std::string split_fingerprint;

    const ModelEvaluation* find(std::string_view model) const;
    bool any_ok() const;
};

struct BacktestOptions {
    int workers = 1;
    /// Keep a serialized model document for every fitted series.
    bool keep_artifacts = false;
};

/// Fits every configured model on the training window of each series and
/// forecasts the test window. Model failures are captured in the report.
EvaluationReport run_scenario(const SalesTable& table, const ScenarioSpec& spec, const HolidayCalendar& calendar,
                              const BacktestOptions& options = {});

struct ComparisonTable {
    std::vector<std::string> models;
    std::vector<std::string> scenarios;
    /// [model][scenario]; empty when the model failed or was not run.
    std::vector<std::vector<std::optional<double>>> mae;
    std::vector<std::vector<std::optional<double>>> rmse;
    std::vector<std::vector<std::optional<double>>> r2;
    /// [model][scenario]: MAE improvement over the first scenario, in
    /// percent; always empty for the first column.
    std::vector<std::vector<std::optional<double>>> improvement_pct;
    /// Model name with the best value in each scenario column.
    std::vector<std::string> best_mae;
    std::vector<std::string> best_rmse;
    std::vector<std::string> best_r2;
};

/// (before - after) / before * 100.
double improvement_percent(double before, double after);

ComparisonTable compare(const std::vector<EvaluationReport>& reports);

} // namespace demandcast
