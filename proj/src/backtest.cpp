#include "demandcast/backtest.hpp"

#include "demandcast/error.hpp"
#include "demandcast/fingerprint.hpp"
#include "demandcast/parallel.hpp"
#include "demandcast/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <set>

namespace demandcast {

namespace {

constexpr std::pair<ModelKind, std::string_view> kModelNames[] = {
    {ModelKind::Gbdt, "gbdt"},         {ModelKind::Arimax, "arimax"}, {ModelKind::ArimaxOneStep, "arimax_onestep"},
    {ModelKind::ProphetLike, "prophet"}, {ModelKind::Svr, "svr"},     {ModelKind::Naive, "naive"},
};

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double residual_sigma(std::span<const double> actual, std::span<const double> fitted) {
    if (actual.empty()) return 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) mean += actual[i] - fitted[i];
    mean /= static_cast<double>(actual.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - fitted[i] - mean;
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

/// Columns whose training values are all equal; linear models cannot
/// identify a coefficient for them alongside the intercept.
std::vector<std::string> varying_columns(const FeatureMatrix& train, const std::vector<std::string>& names) {
    std::vector<std::string> keep;
    for (const auto& name : names) {
        const auto j = train.column_index(name);
        if (!j || train.rows() == 0) continue;
        const auto col = train.values.col(static_cast<Eigen::Index>(*j));
        if (col.maxCoeff() > col.minCoeff()) keep.push_back(name);
    }
    return keep;
}

Eigen::MatrixXd columns_of(const FeatureMatrix& m, const std::vector<std::string>& names) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = m.values.col(static_cast<Eigen::Index>(*m.column_index(names[k])));
    return out;
}

struct SeriesFit {
    bool ok = false;
    std::string error;
    std::vector<double> predicted;
    double sigma = 0.0;
    double seconds = 0.0;
    std::vector<std::string> warnings;
    std::shared_ptr<GbdtModel> importance;
    std::string artifact;
};

struct Context {
    const ScenarioSpec& spec;
    const HolidayCalendar& calendar;
    std::vector<std::string> model_columns;
    std::vector<std::string> linear_exog;
    std::vector<std::string> prophet_regressors;
    bool keep_artifacts = false;
};

std::vector<double> naive_fit(const FeatureMatrix& train, const FeatureMatrix& test, double& sigma) {
    const std::span<const double> y(train.target.data(), train.rows());
    std::vector<double> actual, fitted;
    for (std::size_t t = 7; t < y.size(); ++t) {
        actual.push_back(y[t]);
        fitted.push_back(y[t - 7]);
    }
    sigma = residual_sigma(actual, fitted);
    return naive_baseline(y, test.rows());
}

void require_contiguous(const FeatureMatrix& train, const FeatureMatrix& test) {
    for (std::size_t i = 0; i < test.rows(); ++i)
        if (test.dates[i] != train.dates.back() + static_cast<int>(i + 1))
            throw Error(ErrorCode::InvalidArgument, "test window does not follow the training window day by day");
}

SeriesFit fit_one(const Context& ctx, ModelKind kind, const FeatureMatrix& train, const FeatureMatrix& test) {
    SeriesFit out;
    auto keep = [&](const auto& model) {
        if (ctx.keep_artifacts)
            out.artifact = model_artifact(std::string(model_name(kind)), ctx.spec.features, model).dump();
    };
    const auto start = std::chrono::steady_clock::now();
    try {
        if (train.rows() == 0) throw Error(ErrorCode::EmptyPartition, "series has no training rows");
        const std::span<const double> y(train.target.data(), train.rows());
        switch (kind) {
        case ModelKind::Gbdt: {
            const FeatureMatrix tr = train.select_columns(ctx.model_columns);
            const GbdtModel model = fit_gbdt(tr, ctx.spec.settings.gbdt);
            out.predicted = to_vector(predict_gbdt(model, test.select_columns(ctx.model_columns)));
            keep(model);
            const auto fitted = to_vector(predict_gbdt(model, tr));
            out.sigma = residual_sigma(y, fitted);
            auto slim = std::make_shared<GbdtModel>();
            slim->feature_names = model.feature_names;
            slim->gain_totals = model.gain_totals;
            out.importance = std::move(slim);
            break;
        }
        case ModelKind::Arimax:
        case ModelKind::ArimaxOneStep: {
            require_contiguous(train, test);
            const auto exog_names = varying_columns(train, ctx.linear_exog);
            ArimaxConfig cfg = ctx.spec.settings.arimax;
            cfg.exogenous_columns = exog_names;
            const Eigen::MatrixXd x_tr = columns_of(train, exog_names);
            const ArimaxModel model = fit_arimax(y, x_tr, cfg);
            const Eigen::MatrixXd x_te = columns_of(test, exog_names);
            if (kind == ModelKind::Arimax) {
                out.predicted = to_vector(forecast_arimax(model, x_te, test.rows()));
            } else {
                const std::span<const double> actual(test.target.data(), test.rows());
                out.predicted = to_vector(
                    forecast_arimax(model, x_te, test.rows(), ArimaxForecastMode::OneStepWithActuals, actual));
            }
            keep(model);
            const auto fitted = to_vector(fitted_arimax(model, y, x_tr));
            out.sigma = residual_sigma(y.subspan(y.size() - fitted.size()), fitted);
            break;
        }
        case ModelKind::ProphetLike: {
            ProphetConfig cfg = ctx.spec.settings.prophet;
            cfg.include_holidays = ctx.spec.features.holiday;
            const auto reg_names = varying_columns(train, ctx.prophet_regressors);
            const auto& d_tr = train.dates;
            const auto& d_te = test.dates;
            const ProphetLikeModel model =
                fit_prophetlike(y, d_tr, cfg, ctx.calendar, columns_of(train, reg_names), reg_names);
            out.predicted =
                to_vector(forecast_prophetlike(model, d_te, ctx.calendar, columns_of(test, reg_names)).point);
            keep(model);
            const auto fitted =
                to_vector(forecast_prophetlike(model, d_tr, ctx.calendar, columns_of(train, reg_names)).point);
            out.sigma = residual_sigma(y, fitted);
            break;
        }
        case ModelKind::Svr: {
            const FeatureMatrix tr = train.select_columns(ctx.model_columns);
            const SvrModel model = fit_svr(tr, ctx.spec.settings.svr);
            if (!model.converged)
                out.warnings.push_back(std::string(to_string(ErrorCode::IterationCapReached)) + ": SMO stopped after " +
                                       std::to_string(model.iterations) + " iterations");
            out.predicted = to_vector(predict_svr(model, test.select_columns(ctx.model_columns)));
            keep(model);
            const auto fitted = to_vector(predict_svr(model, tr));
            out.sigma = residual_sigma(y, fitted);
            break;
        }
        case ModelKind::Naive: {
            require_contiguous(train, test);
            out.predicted = naive_fit(train, test, out.sigma);
            break;
        }
        }
        for (double v : out.predicted)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "model produced a non-finite forecast");
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
        out.predicted.clear();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string describe(const FeatureSpec& f) {
    std::string s = "lags";
    for (int l : f.lags) s += "_" + std::to_string(l);
    if (f.month_cyclical) s += "+month";
    if (f.weekday_numeric) s += "+weekday";
    if (f.weekday_cyclical) s += "+weekday_cyc";
    if (f.weekday_one_hot) s += "+weekday_dummies";
    if (f.holiday) s += "+holiday";
    if (f.deviation_flag)
        s += f.deviation.mode == DeviationMode::SameDay ? "+deviation(same-day)" : "+deviation(lagged)";
    return s;
}

bool is_exogenous_column(const std::string& name) {
    if (name == columns::kWeekday || name == columns::kWeekdaySin || name == columns::kWeekdayCos ||
        name == columns::kHoliday || name == columns::kDeviationFlag)
        return true;
    for (int d = 1; d < 7; ++d)
        if (name == columns::weekday_dummy(d)) return true;
    return false;
}

} // namespace

std::string_view model_name(ModelKind kind) noexcept {
    for (const auto& [k, name] : kModelNames)
        if (k == kind) return name;
    return "unknown";
}

std::optional<ModelKind> parse_model_name(std::string_view name) {
    for (const auto& [k, n] : kModelNames)
        if (n == name) return k;
    return std::nullopt;
}

std::vector<ModelKind> default_models() {
    return {ModelKind::Gbdt, ModelKind::Arimax, ModelKind::ProphetLike, ModelKind::Svr, ModelKind::Naive};
}

ScenarioSpec ScenarioSpec::scenario1(const SplitSpec& split, Granularity granularity) {
    ScenarioSpec s;
    s.id = "S1";
    s.features = FeatureSpec::scenario1();
    s.split = split;
    s.granularity = granularity;
    return s;
}

ScenarioSpec ScenarioSpec::scenario2(const SplitSpec& split, Granularity granularity, DeviationMode mode) {
    ScenarioSpec s;
    s.id = "S2";
    s.features = FeatureSpec::scenario2(mode);
    s.split = split;
    s.granularity = granularity;
    return s;
}

bool ScenarioSpec::exogenous() const noexcept {
    return features.weekday_numeric || features.weekday_cyclical || features.weekday_one_hot || features.holiday ||
           features.deviation_flag;
}

void ScenarioSpec::validate() const {
    if (id.empty()) throw Error(ErrorCode::InvalidConfig, "scenario id must not be empty");
    if (models.empty()) throw Error(ErrorCode::InvalidConfig, "scenario " + id + " lists no models");
    std::set<ModelKind> seen;
    for (auto m : models)
        if (!seen.insert(m).second)
            throw Error(ErrorCode::InvalidConfig, "model " + std::string(model_name(m)) + " listed twice");
    if (id == "S1" && exogenous())
        throw Error(ErrorCode::InvalidConfig, "scenario S1 must not use weekday, holiday or deviation columns");
    if (histogram_bins < 1) throw Error(ErrorCode::InvalidConfig, "histogram_bins must be positive");
    split.validate();
    if (split.test_start != split.train_end + 1)
        throw Error(ErrorCode::InvalidConfig, "the test window must start the day after train_end");
    features.validate();
    settings.gbdt.validate();
    settings.arimax.validate();
    settings.prophet.validate();
    settings.svr.validate();
}

std::vector<double> naive_baseline(std::span<const double> train, std::size_t horizon) {
    if (train.empty()) throw Error(ErrorCode::InvalidArgument, "naive baseline needs training data");
    std::vector<double> out(horizon);
    if (train.size() < 7) {
        std::fill(out.begin(), out.end(), train.back());
        return out;
    }
    const std::size_t base = train.size() - 7;
    for (std::size_t h = 0; h < horizon; ++h) out[h] = train[base + h % 7];
    return out;
}

std::vector<double> ModelEvaluation::residuals() const {
    std::vector<double> r(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i) r[i] = actual[i] - predicted[i];
    return r;
}

const ModelEvaluation* EvaluationReport::find(std::string_view model) const {
    for (const auto& m : models)
        if (m.name == model) return &m;
    return nullptr;
}

bool EvaluationReport::any_ok() const {
    return std::any_of(models.begin(), models.end(), [](const ModelEvaluation& m) { return m.ok; });
}

EvaluationReport run_scenario(const SalesTable& table, const ScenarioSpec& spec, const HolidayCalendar& calendar,
                              const BacktestOptions& options) {
    spec.validate();
    const SalesTable work = aggregate(table.sorted() ? table : sort_chronological(table), spec.granularity);

    const bool wants_linear_exog = spec.exogenous() && std::any_of(spec.models.begin(), spec.models.end(), [](auto m) {
        return m == ModelKind::Arimax || m == ModelKind::ArimaxOneStep;
    });
    FeatureSpec full = spec.features;
    if (wants_linear_exog && (full.weekday_numeric || full.weekday_cyclical)) full.weekday_one_hot = true;
    const FeatureMatrix matrix = build_design_matrix(work, full, calendar, spec.split.train_end);
    const DesignSplit parts = split_design(matrix, spec.split);

    Context ctx{spec, calendar, {}, {}, {}, options.keep_artifacts};
    for (const auto& c : matrix.columns) {
        const bool dummy = c.rfind("dow_", 0) == 0;
        if (!dummy || spec.features.weekday_one_hot) ctx.model_columns.push_back(c);
        if (!is_exogenous_column(c)) continue;
        if (dummy || c == columns::kHoliday || c == columns::kDeviationFlag) ctx.linear_exog.push_back(c);
        if (c == columns::kDeviationFlag) ctx.prophet_regressors.push_back(c);
    }
    const std::size_t n_series = matrix.series_keys.size();
    std::vector<FeatureMatrix> train_s(n_series), test_s(n_series);
    for (std::size_t s = 0; s < n_series; ++s) {
        train_s[s] = parts.train.series_slice(s);
        test_s[s] = parts.test.series_slice(s);
    }

    const std::size_t n_models = spec.models.size();
    std::vector<SeriesFit> fits(n_series * n_models);
    parallel_for(fits.size(), options.workers, [&](std::size_t task) {
        const std::size_t s = task / n_models, k = task % n_models;
        if (test_s[s].rows() == 0) {
            fits[task].ok = true;
            return;
        }
        fits[task] = fit_one(ctx, spec.models[k], train_s[s], test_s[s]);
    });

    EvaluationReport report;
    report.scenario = spec.id;
    report.feature_label = describe(spec.features);
    report.granularity = spec.granularity;
    report.split = spec.split;
    report.series_keys = matrix.series_keys;
    report.feature_columns = ctx.model_columns;
    report.data_fingerprint = fingerprint(table);
    report.split_fingerprint = fingerprint(spec.split.train_end.iso() + "|" + spec.split.test_start.iso() + "|" +
                                           spec.split.test_end.iso() + "|" +
                                           (spec.granularity == Granularity::PerSeries ? "per-series" : "aggregate"));

    std::vector<const GbdtModel*> tree_models;
    for (std::size_t k = 0; k < n_models; ++k) {
        ModelEvaluation ev;
        ev.kind = spec.models[k];
        ev.name = std::string(model_name(ev.kind));
        ev.ok = true;
        ev.train_sigma.assign(n_series, 0.0);
        if (options.keep_artifacts) ev.artifacts.assign(n_series, {});
        for (std::size_t s = 0; s < n_series; ++s) {
            const SeriesFit& fit = fits[s * n_models + k];
            ev.runtime_s += fit.seconds;
            for (const auto& w : fit.warnings) ev.warnings.push_back(matrix.series_keys[s].label() + ": " + w);
            if (!fit.ok) {
                ev.ok = false;
                if (ev.error.empty()) ev.error = matrix.series_keys[s].label() + ": " + fit.error;
                continue;
            }
            ev.train_sigma[s] = fit.sigma;
            if (options.keep_artifacts) ev.artifacts[s] = fit.artifact;
            if (fit.importance) tree_models.push_back(fit.importance.get());
            const FeatureMatrix& te = test_s[s];
            std::vector<double> a, p;
            for (std::size_t i = 0; i < fit.predicted.size(); ++i) {
                if (spec.exclude_imputed && te.imputed[i]) continue;
                ev.dates.push_back(te.dates[i]);
                ev.series.push_back(s);
                ev.actual.push_back(te.target(static_cast<Eigen::Index>(i)));
                ev.predicted.push_back(fit.predicted[i]);
                a.push_back(ev.actual.back());
                p.push_back(ev.predicted.back());
            }
            ev.per_series.push_back(a.empty() ? Metrics{} : score(a, p));
        }
        if (ev.ok && ev.actual.empty()) {
            ev.ok = false;
            ev.error = "no test rows to score";
        }
        if (ev.ok) {
            ev.metrics = score(ev.actual, ev.predicted);
            ev.histogram = error_histogram(ev.residuals(), spec.histogram_bins);
        } else {
            ev.dates.clear();
            ev.series.clear();
            ev.actual.clear();
            ev.predicted.clear();
            ev.per_series.clear();
        }
        report.models.push_back(std::move(ev));
    }
    if (!tree_models.empty()) {
        try {
            report.importance = feature_importance(tree_models);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSplits) throw;
        }
    }
    return report;
}

double improvement_percent(double before, double after) {
    if (before == 0.0) return after == 0.0 ? 0.0 : -INFINITY;
    return (before - after) / before * 100.0;
}

ComparisonTable compare(const std::vector<EvaluationReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to compare");
    for (const auto& r : reports) {
        if (r.data_fingerprint != reports.front().data_fingerprint)
            throw Error(ErrorCode::FingerprintMismatch, "reports were computed on different data");
        if (r.split_fingerprint != reports.front().split_fingerprint)
            throw Error(ErrorCode::FingerprintMismatch, "reports use different splits or granularity");
    }
    ComparisonTable t;
    for (const auto& r : reports) {
        if (std::find(t.scenarios.begin(), t.scenarios.end(), r.scenario) != t.scenarios.end())
            throw Error(ErrorCode::InvalidArgument, "scenario " + r.scenario + " appears twice");
        t.scenarios.push_back(r.scenario);
        for (const auto& m : r.models)
            if (std::find(t.models.begin(), t.models.end(), m.name) == t.models.end()) t.models.push_back(m.name);
    }
    const std::size_t nm = t.models.size(), ns = t.scenarios.size();
    t.mae.assign(nm, std::vector<std::optional<double>>(ns));
    t.rmse = t.mae;
    t.r2 = t.mae;
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t m = 0; m < nm; ++m)
            if (const auto* ev = reports[s].find(t.models[m]); ev && ev->ok) {
                t.mae[m][s] = ev->metrics.mae;
                t.rmse[m][s] = ev->metrics.rmse;
                t.r2[m][s] = ev->metrics.r2;
            }
    t.improvement_pct.assign(nm, std::vector<std::optional<double>>(ns));
    for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t s = 1; s < ns; ++s)
            if (t.mae[m][0] && t.mae[m][s]) t.improvement_pct[m][s] = improvement_percent(*t.mae[m][0], *t.mae[m][s]);

    auto best = [&](const std::vector<std::vector<std::optional<double>>>& table, bool higher) {
        std::vector<std::string> out(ns);
        for (std::size_t s = 0; s < ns; ++s) {
            std::optional<double> top;
            for (std::size_t m = 0; m < nm; ++m) {
                const auto& v = table[m][s];
                if (v && (!top || (higher ? *v > *top : *v < *top))) {
                    top = v;
                    out[s] = t.models[m];
                }
            }
        }
        return out;
    };
    t.best_mae = best(t.mae, false);
    t.best_rmse = best(t.rmse, false);
    t.best_r2 = best(t.r2, true);
    return t;
}

} // namespace demandcast
