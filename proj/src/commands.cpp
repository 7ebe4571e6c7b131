#include "demandcast/commands.hpp"

#include "demandcast/fingerprint.hpp"
#include "demandcast/parallel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace demandcast {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) { return format_quantity(v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back() += c;
        }
    }
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Input, "cannot write " + path.string());
    return out;
}

double parse_number(const std::string& s, const fs::path& file) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::Input, file.string() + ": invalid number '" + s + "'");
    }
}

struct CleanData {
    ParsedSales parsed;
    FillResult fill;
};

CleanData load_clean(const RunConfig& cfg) {
    std::ifstream in(cfg.data_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Input, "cannot open data file " + cfg.data_path.string());
    CleanData d;
    d.parsed = parse_sales_csv(in, cfg.schema);
    d.fill = fill_gaps(sort_chronological(d.parsed.table), FillOptions{cfg.fill_method, false});
    return d;
}

Json metrics_json(const Metrics& m) {
    return Json{{"mae", m.mae}, {"rmse", m.rmse}, {"r2", m.r2 ? Json(*m.r2) : Json(nullptr)}, {"n", m.n}};
}

Json artifact_versions() {
    return Json{{"demandcast", std::string(kVersion)},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

std::string file_fingerprint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fingerprint(ss.str());
}

// ---------------------------------------------------------------- evaluate

void write_evaluation(const fs::path& dir, const RunConfig& cfg, const std::vector<EvaluationReport>& reports,
                      const ComparisonTable& table, std::vector<std::string>& written) {
    auto out_file = [&](const std::string& name) {
        written.push_back(name);
        return open_out(dir / name);
    };

    {
        auto out = out_file("metrics.csv");
        out << "model,scenario,mae,rmse,r2,n,runtime_s\n";
        for (const auto& r : reports)
            for (const auto& m : r.models) {
                out << m.name << ',' << r.scenario << ',';
                if (m.ok)
                    out << num(m.metrics.mae) << ',' << num(m.metrics.rmse) << ',' << opt_num(m.metrics.r2) << ','
                        << m.metrics.n;
                else
                    out << ",,,0";
                out << ',' << (cfg.record_runtime ? num(m.runtime_s) : std::string()) << '\n';
            }
    }
    {
        auto out = out_file("runtimes.csv");
        out << "model,scenario,runtime_s\n";
        for (const auto& r : reports)
            for (const auto& m : r.models) out << m.name << ',' << r.scenario << ',' << num(m.runtime_s) << '\n';
    }
    for (const auto& r : reports)
        for (const auto& m : r.models) {
            if (!m.ok) continue;
            auto res = out_file("residuals_" + m.name + "_" + r.scenario + ".csv");
            auto avp = out_file("actual_vs_predicted_" + m.name + "_" + r.scenario + ".csv");
            res << "date,store,item,residual\n";
            avp << "date,store,item,actual,predicted\n";
            for (std::size_t i = 0; i < m.actual.size(); ++i) {
                const auto& key = r.series_keys[m.series[i]];
                const std::string prefix =
                    m.dates[i].iso() + ',' + csv_field(key.store) + ',' + csv_field(key.item) + ',';
                res << prefix << num(m.actual[i] - m.predicted[i]) << '\n';
                avp << prefix << num(m.actual[i]) << ',' << num(m.predicted[i]) << '\n';
            }
        }
    {
        std::map<std::string, std::ofstream> hist;
        for (const auto& r : reports)
            for (const auto& m : r.models) {
                if (!m.ok) continue;
                auto it = hist.find(m.name);
                if (it == hist.end()) {
                    it = hist.emplace(m.name, out_file("histogram_" + m.name + ".csv")).first;
                    it->second << "scenario,bin,bin_lo,bin_hi,count\n";
                }
                for (std::size_t b = 0; b < m.histogram.size(); ++b)
                    it->second << r.scenario << ',' << b << ',' << num(m.histogram[b].lo) << ','
                               << num(m.histogram[b].hi) << ',' << m.histogram[b].count << '\n';
            }
    }
    {
        auto out = out_file("importance.csv");
        out << "scenario,rank,feature,score\n";
        for (const auto& r : reports)
            for (std::size_t k = 0; k < r.importance.size(); ++k)
                out << r.scenario << ',' << k + 1 << ',' << r.importance[k].feature << ','
                    << num(r.importance[k].score) << '\n';
    }
    {
        auto per = out_file("per_series_metrics.csv");
        auto sig = out_file("residual_sigma.csv");
        per << "model,scenario,store,item,mae,rmse,r2,n\n";
        sig << "model,scenario,store,item,sigma\n";
        for (const auto& r : reports)
            for (const auto& m : r.models) {
                if (!m.ok) continue;
                std::size_t k = 0;
                for (std::size_t s = 0; s < r.series_keys.size(); ++s) {
                    const std::string key = csv_field(r.series_keys[s].store) + ',' + csv_field(r.series_keys[s].item);
                    sig << m.name << ',' << r.scenario << ',' << key << ',' << num(m.train_sigma[s]) << '\n';
                    const bool scored = std::find(m.series.begin(), m.series.end(), s) != m.series.end();
                    if (!scored) continue;
                    const Metrics& pm = m.per_series[k++];
                    per << m.name << ',' << r.scenario << ',' << key << ',' << num(pm.mae) << ',' << num(pm.rmse)
                        << ',' << opt_num(pm.r2) << ',' << pm.n << '\n';
                }
            }
    }
    {
        auto out = out_file("comparison.csv");
        out << "metric,model";
        for (const auto& s : table.scenarios) out << ',' << s;
        for (std::size_t s = 1; s < table.scenarios.size(); ++s)
            out << ",improvement_pct_" << table.scenarios.front() << "_to_" << table.scenarios[s];
        out << ",best_in\n";
        auto rows = [&](const char* metric, const std::vector<std::vector<std::optional<double>>>& values,
                        const std::vector<std::string>& best, bool with_improvement) {
            for (std::size_t m = 0; m < table.models.size(); ++m) {
                out << metric << ',' << table.models[m];
                for (const auto& v : values[m]) out << ',' << opt_num(v);
                for (std::size_t s = 1; s < table.scenarios.size(); ++s)
                    out << ',' << (with_improvement ? opt_num(table.improvement_pct[m][s]) : std::string());
                out << ',';
                std::string best_in;
                for (std::size_t s = 0; s < best.size(); ++s)
                    if (best[s] == table.models[m]) best_in += (best_in.empty() ? "" : ";") + table.scenarios[s];
                out << best_in << '\n';
            }
        };
        rows("mae", table.mae, table.best_mae, true);
        rows("rmse", table.rmse, table.best_rmse, false);
        rows("r2", table.r2, table.best_r2, false);
    }
    {
        Json doc;
        doc["version"] = std::string(kVersion);
        doc["data_fingerprint"] = reports.front().data_fingerprint;
        doc["config_fingerprint"] = config_fingerprint(cfg);
        doc["granularity"] = to_string(cfg.granularity);
        doc["split"] = Json{{"train_end", cfg.split.train_end},
                            {"test_start", cfg.split.test_start},
                            {"test_end", cfg.split.test_end}};
        Json scen = Json::array();
        for (const auto& r : reports) {
            Json models = Json::array();
            for (const auto& m : r.models) {
                Json jm{{"name", m.name}, {"ok", m.ok}};
                if (m.ok) {
                    jm["metrics"] = metrics_json(m.metrics);
                    Json hist = Json::array();
                    for (const auto& b : m.histogram) hist.push_back(Json{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
                    jm["histogram"] = hist;
                } else {
                    jm["error"] = m.error;
                }
                jm["warnings"] = m.warnings;
                models.push_back(jm);
            }
            Json imp = Json::array();
            for (const auto& f : r.importance) imp.push_back(Json{{"feature", f.feature}, {"score", f.score}});
            scen.push_back(Json{{"id", r.scenario},
                                {"features", r.feature_label},
                                {"feature_columns", r.feature_columns},
                                {"series", r.series_keys.size()},
                                {"models", models},
                                {"importance", imp}});
        }
        doc["scenarios"] = scen;
        Json cmp;
        cmp["models"] = table.models;
        cmp["scenarios"] = table.scenarios;
        auto grid = [](const std::vector<std::vector<std::optional<double>>>& g) {
            Json out = Json::array();
            for (const auto& row : g) {
                Json r = Json::array();
                for (const auto& v : row) r.push_back(v ? Json(*v) : Json(nullptr));
                out.push_back(r);
            }
            return out;
        };
        cmp["mae"] = grid(table.mae);
        cmp["rmse"] = grid(table.rmse);
        cmp["r2"] = grid(table.r2);
        cmp["improvement_pct"] = grid(table.improvement_pct);
        cmp["best_mae"] = table.best_mae;
        cmp["best_rmse"] = table.best_rmse;
        cmp["best_r2"] = table.best_r2;
        doc["comparison"] = cmp;
        written.push_back("evaluation.json");
        write_json_file(dir / "evaluation.json", doc);
    }
}

void write_artifacts(const fs::path& dir, const std::vector<EvaluationReport>& reports) {
    for (const auto& r : reports)
        for (const auto& m : r.models) {
            const fs::path sub = dir / "models" / r.scenario / m.name;
            fs::create_directories(sub);
            for (std::size_t s = 0; s < m.artifacts.size(); ++s) {
                if (m.artifacts[s].empty()) continue;
                auto out = open_out(sub / (r.series_keys[s].store + "_" + r.series_keys[s].item + ".json"));
                out << m.artifacts[s] << '\n';
            }
        }
}

// ---------------------------------------------------------------- simulate

struct SeriesForecast {
    SeriesKey key;
    std::vector<Date> dates;
    std::vector<double> actual;
    std::vector<double> predicted;
    double sigma = 0.0;
};

std::vector<SeriesForecast> read_forecasts(const fs::path& dir, const std::string& model, const std::string& scenario) {
    const fs::path avp = dir / ("actual_vs_predicted_" + model + "_" + scenario + ".csv");
    std::ifstream in(avp, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingForecasts, "no forecasts for " + model + " in scenario " + scenario);
    std::vector<SeriesForecast> out;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw Error(ErrorCode::Input, avp.string() + ": expected 5 fields");
        const SeriesKey key{f[1], f[2]};
        if (out.empty() || out.back().key != key) out.push_back({key, {}, {}, {}, 0.0});
        out.back().dates.push_back(Date::parse_or_throw(f[0]));
        out.back().actual.push_back(parse_number(f[3], avp));
        out.back().predicted.push_back(parse_number(f[4], avp));
    }

    const fs::path sig_path = dir / "residual_sigma.csv";
    std::ifstream sig(sig_path, std::ios::binary);
    if (!sig) throw Error(ErrorCode::MissingForecasts, "residual_sigma.csv is missing");
    std::map<SeriesKey, double> sigma;
    std::getline(sig, line);
    while (std::getline(sig, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw Error(ErrorCode::Input, sig_path.string() + ": expected 5 fields");
        if (f[0] == model && f[1] == scenario) sigma[SeriesKey{f[2], f[3]}] = parse_number(f[4], sig_path);
    }
    for (auto& s : out) {
        const auto it = sigma.find(s.key);
        if (it == sigma.end())
            throw Error(ErrorCode::MissingForecasts, "no residual sigma for " + model + " series " + s.key.label());
        s.sigma = it->second;
    }
    return out;
}

struct SimulatedModel {
    std::string name;
    std::vector<SeriesForecast> series;
    std::vector<InventoryOutcome> outcomes;
    InventoryOutcome pooled;
};

SimulatedModel simulate_model(const fs::path& dir, const std::string& model, const std::string& scenario,
                              const RunConfig& cfg, const SimulatedModel* sigma_from = nullptr) {
    SimulatedModel sm;
    sm.name = model;
    sm.series = read_forecasts(dir, model, scenario);
    if (sigma_from) {
        std::map<SeriesKey, double> shared;
        for (const auto& f : sigma_from->series) shared[f.key] = f.sigma;
        for (auto& f : sm.series) {
            const auto it = shared.find(f.key);
            if (it == shared.end()) throw Error(ErrorCode::MissingForecasts, "baseline lacks series " + f.key.label());
            f.sigma = it->second;
        }
    }
    sm.outcomes.resize(sm.series.size());
    parallel_for(sm.series.size(), cfg.workers, [&](std::size_t s) {
        const auto& f = sm.series[s];
        sm.outcomes[s] = simulate(f.actual, f.predicted, f.sigma, cfg.policy, f.dates);
    });
    sm.pooled = combine(sm.outcomes);
    return sm;
}

void write_ledger(const fs::path& path, const SimulatedModel& sm) {
    auto out = open_out(path);
    out << "store,item,date,opening,ordered,received,demand,sold,lost_sales,closing,overstocked\n";
    for (std::size_t s = 0; s < sm.series.size(); ++s) {
        const std::string key = csv_field(sm.series[s].key.store) + ',' + csv_field(sm.series[s].key.item) + ',';
        for (const auto& d : sm.outcomes[s].ledger)
            out << key << d.date.iso() << ',' << num(d.opening) << ',' << num(d.ordered) << ',' << num(d.received)
                << ',' << num(d.demand) << ',' << num(d.sold) << ',' << num(d.lost_sales) << ',' << num(d.closing)
                << ',' << (d.overstocked ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------- report

std::string md_value(const Json& v, int digits = 3) { return v.is_null() ? "n/a" : fixed(v.get<double>(), digits); }

std::string pct(double v) { return fixed(v, 1) + "%"; }

} // namespace

std::string_view error_tag(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument: return "E_CONFIG";
    case ErrorCode::Input:
    case ErrorCode::MalformedRow:
    case ErrorCode::EmptyInput:
    case ErrorCode::TooManyMalformed:
    case ErrorCode::DuplicateDate:
    case ErrorCode::LeadingGap:
    case ErrorCode::EmptyPartition:
    case ErrorCode::LagExceedsSeries:
    case ErrorCode::CalendarGap:
    case ErrorCode::FingerprintMismatch: return "E_INPUT";
    case ErrorCode::MissingForecasts: return "E_MISSING_FORECASTS";
    default: return "E_INTERNAL";
    }
}

int exit_code_for(ErrorCode code) noexcept {
    const auto tag = error_tag(code);
    if (tag == "E_CONFIG") return kExitConfigError;
    if (tag == "E_INPUT" || tag == "E_MISSING_FORECASTS") return kExitInputError;
    return kExitFailure;
}

int cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const auto t0 = Clock::now();
    const CleanData d = load_clean(cfg);
    fs::create_directories(cfg.output_dir);
    {
        auto out = open_out(cfg.output_dir / "cleaned.csv");
        write_sales_csv(out, d.fill.table, cfg.schema);
    }
    {
        auto out = open_out(cfg.output_dir / "ingest_summary.csv");
        out << "store,item,rows,imputed,leading_gap_days\n";
        for (std::size_t s = 0; s < d.fill.per_series.size(); ++s) {
            const auto& ps = d.fill.per_series[s];
            const auto* range = d.fill.table.find_series(ps.key);
            out << csv_field(ps.key.store) << ',' << csv_field(ps.key.item) << ',' << (range ? range->size() : 0)
                << ',' << ps.imputed << ',' << ps.leading_gap_days << '\n';
        }
    }
    Json summary;
    summary["rows_in"] = d.parsed.report.data_rows;
    summary["rows_accepted"] = d.parsed.report.accepted_rows;
    summary["rows_malformed"] = d.parsed.report.malformed.size();
    Json issues = Json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(d.parsed.report.malformed.size(), 50); ++k)
        issues.push_back(Json{{"line", d.parsed.report.malformed[k].line}, {"reason", d.parsed.report.malformed[k].reason}});
    summary["malformed_examples"] = issues;
    summary["series"] = d.fill.table.series().size();
    summary["rows_out"] = d.fill.table.size();
    summary["imputed_rows"] = d.fill.imputed_total;
    if (const auto cov = d.fill.table.coverage()) summary["coverage"] = Json{{"first", cov->first}, {"last", cov->second}};
    summary["data_fingerprint"] = fingerprint(d.fill.table);
    summary["seconds"] = seconds_since(t0);
    write_json_file(cfg.output_dir / "ingest_summary.json", summary);
    log << "ingested " << d.parsed.report.data_rows << " rows (" << d.parsed.report.malformed.size()
        << " malformed) into " << d.fill.table.series().size() << " series; " << d.fill.imputed_total
        << " rows imputed\n";
    return kExitSuccess;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    Json stages = Json::object();
    auto t0 = Clock::now();
    const CleanData d = load_clean(cfg);
    const HolidayCalendar calendar = HolidayCalendar::load_file(cfg.holiday_calendar_path);
    stages["load_s"] = seconds_since(t0);
    log << "loaded " << d.fill.table.size() << " rows in " << d.fill.table.series().size() << " series ("
        << d.fill.imputed_total << " imputed)\n";

    std::vector<EvaluationReport> reports;
    for (const auto& id : cfg.effective_scenarios()) {
        t0 = Clock::now();
        reports.push_back(run_scenario(d.fill.table, cfg.scenario(id), calendar,
                                       BacktestOptions{cfg.workers, cfg.save_models}));
        stages[id + "_s"] = seconds_since(t0);
        for (const auto& m : reports.back().models) {
            if (m.ok) {
                log << id << ' ' << m.name << ": MAE " << fixed(m.metrics.mae) << ", RMSE " << fixed(m.metrics.rmse)
                    << ", R2 " << (m.metrics.r2 ? fixed(*m.metrics.r2) : std::string("n/a")) << '\n';
            } else {
                log << id << ' ' << m.name << ": FAILED (" << m.error << ")\n";
            }
            if (!m.warnings.empty())
                log << id << ' ' << m.name << ": " << m.warnings.size() << " warning(s), first: " << m.warnings.front()
                    << '\n';
        }
    }
    const ComparisonTable table = compare(reports);

    t0 = Clock::now();
    fs::create_directories(cfg.output_dir);
    std::vector<std::string> written;
    write_evaluation(cfg.output_dir, cfg, reports, table, written);
    if (cfg.save_models) write_artifacts(cfg.output_dir, reports);
    stages["write_s"] = seconds_since(t0);

    Json manifest;
    manifest["command"] = "evaluate";
    manifest["config_fingerprint"] = config_fingerprint(cfg);
    manifest["data_fingerprint"] = reports.front().data_fingerprint;
    manifest["input_file_fingerprint"] = file_fingerprint(cfg.data_path);
    manifest["holiday_calendar_fingerprint"] = file_fingerprint(cfg.holiday_calendar_path);
    manifest["artifact_versions"] = artifact_versions();
    manifest["workers"] = cfg.workers;
    manifest["stages"] = stages;
    Json runtimes = Json::object();
    for (const auto& r : reports)
        for (const auto& m : r.models) runtimes[m.name + "_" + r.scenario] = m.runtime_s;
    manifest["model_runtime_s"] = runtimes;
    manifest["outputs"] = written;
    manifest["config"] = cfg;
    write_json_file(cfg.output_dir / "manifest.json", manifest);

    const bool any = std::any_of(reports.begin(), reports.end(), [](const EvaluationReport& r) { return r.any_ok(); });
    if (!any) {
        log << "every model failed\n";
        return kExitAllModelsFailed;
    }
    return kExitSuccess;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    cfg.validate(false);
    const fs::path eval_path = cfg.output_dir / "evaluation.json";
    if (!fs::is_regular_file(eval_path))
        throw Error(ErrorCode::MissingForecasts, "no evaluation found in " + cfg.output_dir.string());
    const Json eval = read_json_file(eval_path);
    const Json& scenarios = eval.at("scenarios");
    if (scenarios.empty()) throw Error(ErrorCode::MissingForecasts, "evaluation lists no scenarios");
    std::string scenario = cfg.simulate_scenario;
    const Json* chosen = nullptr;
    for (const auto& s : scenarios)
        if (scenario.empty() ? true : s.at("id").get<std::string>() == scenario) chosen = &s;
    if (!chosen) throw Error(ErrorCode::MissingForecasts, "evaluation has no scenario " + scenario);
    scenario = chosen->at("id").get<std::string>();

    std::vector<std::string> available;
    for (const auto& m : chosen->at("models"))
        if (m.at("ok").get<bool>()) available.push_back(m.at("name").get<std::string>());
    const std::string baseline_name(model_name(ModelKind::Naive));
    if (std::find(available.begin(), available.end(), baseline_name) == available.end())
        throw Error(ErrorCode::MissingForecasts, "the evaluation lacks the naive baseline forecasts");
    std::vector<std::string> models;
    if (cfg.simulate_models.empty()) {
        for (const auto& m : available)
            if (m != baseline_name) models.push_back(m);
    } else {
        for (const auto& m : cfg.simulate_models) {
            if (std::find(available.begin(), available.end(), m) == available.end())
                throw Error(ErrorCode::MissingForecasts, "the evaluation lacks forecasts for model " + m);
            if (m != baseline_name) models.push_back(m);
        }
    }

    const auto t0 = Clock::now();
    const SimulatedModel baseline = simulate_model(cfg.output_dir, baseline_name, scenario, cfg);
    std::vector<SimulatedModel> sims;
    const SimulatedModel* shared = cfg.safety_sigma == "baseline" ? &baseline : nullptr;
    for (const auto& m : models) sims.push_back(simulate_model(cfg.output_dir, m, scenario, cfg, shared));

    write_ledger(cfg.output_dir / ("ledger_" + baseline_name + ".csv"), baseline);
    for (const auto& s : sims) write_ledger(cfg.output_dir / ("ledger_" + s.name + ".csv"), s);
    {
        auto out = open_out(cfg.output_dir / "inventory_summary.csv");
        out << "model,scenario,days,overstock_rate,stockout_rate,forecast_accuracy,cost_index,negative_forecasts\n";
        auto row = [&](const SimulatedModel& s) {
            const auto& o = s.pooled;
            out << s.name << ',' << scenario << ',' << o.days << ',' << num(o.overstock_rate()) << ','
                << num(o.stockout_rate()) << ',' << num(o.forecast_accuracy()) << ',' << num(o.cost_index()) << ','
                << o.negative_forecasts << '\n';
        };
        row(baseline);
        for (const auto& s : sims) row(s);
    }
    std::vector<std::pair<std::string, InventoryOutcome>> outcomes;
    for (const auto& s : sims) outcomes.emplace_back(s.name, s.pooled);
    const ImpactTable impact = impact_table(outcomes, baseline.pooled);
    {
        auto out = open_out(cfg.output_dir / "impact_table.csv");
        out << "model,metric,before,after,improvement_pct,direction\n";
        for (const auto& r : impact.rows)
            out << r.model << ',' << r.metric << ',' << num(r.before) << ',' << num(r.after) << ','
                << num(r.improvement_pct) << ',' << (r.higher_is_better ? "increase" : "reduction") << '\n';
    }
    Json doc;
    doc["scenario"] = scenario;
    doc["baseline"] = baseline_name;
    doc["safety_sigma"] = cfg.safety_sigma;
    doc["policy"] = Json(cfg).at("policy");
    Json rows = Json::array();
    for (const auto& r : impact.rows)
        rows.push_back(Json{{"model", r.model},
                            {"metric", r.metric},
                            {"before", r.before},
                            {"after", r.after},
                            {"improvement_pct", r.improvement_pct},
                            {"direction", r.higher_is_better ? "increase" : "reduction"}});
    doc["rows"] = rows;
    write_json_file(cfg.output_dir / "impact_table.json", doc);

    Json manifest;
    manifest["command"] = "simulate";
    manifest["config_fingerprint"] = config_fingerprint(cfg);
    manifest["evaluation_fingerprint"] = file_fingerprint(eval_path);
    manifest["artifact_versions"] = artifact_versions();
    manifest["stages"] = Json{{"simulate_s", seconds_since(t0)}};
    write_json_file(cfg.output_dir / "simulation_manifest.json", manifest);

    log << "simulated " << sims.size() << " model(s) against the naive baseline on " << scenario << " forecasts\n";
    for (const auto& s : sims)
        log << s.name << ": stockout " << pct(100 * s.pooled.stockout_rate()) << " (baseline "
            << pct(100 * baseline.pooled.stockout_rate()) << "), overstock " << pct(100 * s.pooled.overstock_rate())
            << " (baseline " << pct(100 * baseline.pooled.overstock_rate()) << ")\n";
    return kExitSuccess;
}

std::string render_report(const fs::path& dir) {
    const fs::path eval_path = dir / "evaluation.json";
    if (!fs::is_regular_file(eval_path))
        throw Error(ErrorCode::Input, "no evaluation found in " + dir.string() + "; run evaluate first");
    const Json eval = read_json_file(eval_path);
    std::ostringstream md;
    md << "# Demand forecast evaluation report\n\n";
    md << "- Data fingerprint: `" << eval.at("data_fingerprint").get<std::string>() << "`\n";
    md << "- Config fingerprint: `" << eval.at("config_fingerprint").get<std::string>() << "`\n";
    md << "- Granularity: " << eval.at("granularity").get<std::string>() << "\n";
    const Json& split = eval.at("split");
    md << "- Training window ends " << split.at("train_end").get<std::string>() << "; test window "
       << split.at("test_start").get<std::string>() << " to " << split.at("test_end").get<std::string>() << "\n";
    for (const auto& s : eval.at("scenarios"))
        md << "- " << s.at("id").get<std::string>() << " features: `" << s.at("features").get<std::string>() << "`\n";
    md << '\n';

    const Json& cmp = eval.at("comparison");
    const auto models = cmp.at("models").get<std::vector<std::string>>();
    const auto scen = cmp.at("scenarios").get<std::vector<std::string>>();
    auto matrix = [&](const char* title, const char* key, const char* best_key, bool improvement) {
        md << "## " << title << "\n\n| Model |";
        for (const auto& s : scen) md << ' ' << s << " |";
        if (improvement)
            for (std::size_t s = 1; s < scen.size(); ++s) md << ' ' << scen.front() << " to " << scen[s] << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < scen.size(); ++i) md << "---:|";
        if (improvement)
            for (std::size_t s = 1; s < scen.size(); ++s) md << "---:|";
        md << '\n';
        for (std::size_t m = 0; m < models.size(); ++m) {
            md << "| " << models[m] << " |";
            for (std::size_t s = 0; s < scen.size(); ++s) {
                const bool best = cmp.at(best_key).at(s).get<std::string>() == models[m];
                const std::string v = md_value(cmp.at(key).at(m).at(s));
                md << ' ' << (best ? "**" + v + "**" : v) << " |";
            }
            if (improvement)
                for (std::size_t s = 1; s < scen.size(); ++s) {
                    const Json& v = cmp.at("improvement_pct").at(m).at(s);
                    md << ' ' << (v.is_null() ? std::string("n/a") : pct(v.get<double>())) << " |";
                }
            md << '\n';
        }
        md << "\nBold marks the best model per scenario.";
        if (improvement && scen.size() > 1) md << " Improvement columns give the MAE reduction relative to " << scen.front() << '.';
        md << "\n\n";
    };
    matrix("Model comparison: MAE", "mae", "best_mae", true);
    matrix("RMSE", "rmse", "best_rmse", false);
    matrix("R squared", "r2", "best_r2", false);

    const Json* imp_scenario = nullptr;
    for (const auto& s : eval.at("scenarios"))
        if (!s.at("importance").empty() && s.at("id") == "S2") imp_scenario = &s;
    for (const auto& s : eval.at("scenarios"))
        if (!imp_scenario && !s.at("importance").empty()) imp_scenario = &s;
    md << "## Feature importance\n\n";
    if (imp_scenario) {
        md << "Gain share of the gbdt model, pooled over series, scenario " << imp_scenario->at("id").get<std::string>()
           << ".\n\n";
        int rank = 1;
        for (const auto& f : imp_scenario->at("importance"))
            md << rank++ << ". `" << f.at("feature").get<std::string>() << "`: " << fixed(f.at("score").get<double>(), 4)
               << '\n';
        md << '\n';
    } else {
        md << "No tree model produced splits.\n\n";
    }

    md << "## Inventory simulation\n\n";
    const fs::path impact_path = dir / "impact_table.json";
    if (fs::is_regular_file(impact_path)) {
        const Json impact = read_json_file(impact_path);
        md << "Forecasts from " << impact.at("scenario").get<std::string>() << "; \"before\" is the "
           << impact.at("baseline").get<std::string>() << " baseline.\n\n";
        md << "| Model | Metric | Before | After | Improvement |\n|---|---|---:|---:|---:|\n";
        for (const auto& r : impact.at("rows")) {
            const std::string metric = r.at("metric").get<std::string>();
            const bool rate = metric.size() > 5 && metric.substr(metric.size() - 5) == "_rate";
            auto show = [&](double v) { return rate ? pct(100 * v) : fixed(v, 2); };
            md << "| " << r.at("model").get<std::string>() << " | " << metric << " | " << show(r.at("before").get<double>())
               << " | " << show(r.at("after").get<double>()) << " | " << pct(r.at("improvement_pct").get<double>())
               << ' ' << r.at("direction").get<std::string>() << " |\n";
        }
        md << '\n';
    } else {
        md << "Simulation outputs absent.\n\n";
    }

    md << "## Failures and warnings\n\n";
    bool any = false;
    for (const auto& s : eval.at("scenarios"))
        for (const auto& m : s.at("models")) {
            if (!m.at("ok").get<bool>()) {
                md << "- " << s.at("id").get<std::string>() << ' ' << m.at("name").get<std::string>()
                   << " failed: " << m.at("error").get<std::string>() << '\n';
                any = true;
            }
            if (!m.at("warnings").empty()) {
                md << "- " << s.at("id").get<std::string>() << ' ' << m.at("name").get<std::string>() << ": "
                   << m.at("warnings").size() << " warning(s), e.g. " << m.at("warnings").at(0).get<std::string>()
                   << '\n';
                any = true;
            }
        }
    if (!any) md << "None.\n";
    md << '\n';

    md << "## Figure data\n\n";
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) md << "- `" << f << "`\n";
    return md.str();
}

int cmd_report(const RunConfig& cfg, std::ostream& log) {
    cfg.validate(false);
    const std::string text = render_report(cfg.output_dir);
    auto out = open_out(cfg.output_dir / "report.md");
    out << text;
    log << "wrote " << (cfg.output_dir / "report.md").string() << '\n';
    return kExitSuccess;
}

int cmd_generate(const RunConfig& cfg, std::ostream& log) {
    HolidayCalendar calendar;
    if (fs::is_regular_file(cfg.holiday_calendar_path)) calendar = HolidayCalendar::load_file(cfg.holiday_calendar_path);
    const SalesTable table = generate_synthetic_sales(cfg.synthetic, calendar.empty() ? nullptr : &calendar);
    if (cfg.data_path.has_parent_path()) fs::create_directories(cfg.data_path.parent_path());
    auto out = open_out(cfg.data_path);
    write_sales_csv(out, table, cfg.schema, false);
    log << "wrote " << table.size() << " synthetic rows to " << cfg.data_path.string() << '\n';
    return kExitSuccess;
}

int run_command(std::string_view name, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    auto fail = [&](std::string_view tag, std::string_view code, const std::string& message, int exit_code) {
        const Json doc{{"error", std::string(tag)}, {"code", std::string(code)}, {"message", message},
                       {"command", std::string(name)}};
        err << doc.dump() << '\n';
        std::error_code ec;
        fs::create_directories(cfg.output_dir, ec);
        if (!ec) {
            std::ofstream out(cfg.output_dir / "error.json", std::ios::binary);
            if (out) out << doc.dump(2) << '\n';
        }
        return exit_code;
    };
    try {
        if (name == "ingest") return cmd_ingest(cfg, log);
        if (name == "evaluate") return cmd_evaluate(cfg, log);
        if (name == "simulate") return cmd_simulate(cfg, log);
        if (name == "report") return cmd_report(cfg, log);
        if (name == "generate") return cmd_generate(cfg, log);
        return fail("E_CONFIG", "InvalidConfig", "unknown command '" + std::string(name) + "'", kExitConfigError);
    } catch (const Error& e) {
        return fail(error_tag(e.code()), to_string(e.code()), e.what(), exit_code_for(e.code()));
    } catch (const std::exception& e) {
        return fail("E_INTERNAL", "Internal", e.what(), kExitFailure);
    }
}

} // namespace demandcast
