#include "demandcast/run_config.hpp"

#include "demandcast/error.hpp"
#include "demandcast/fingerprint.hpp"

#include <algorithm>
#include <set>

namespace demandcast {

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& field) {
    if (auto it = j.find(key); it != j.end()) field = it->template get<T>();
}

const std::set<std::string> kKnownScenarios{"S1", "S2", "S2-lagged"};

} // namespace

std::vector<std::string> RunConfig::effective_scenarios() const {
    std::vector<std::string> out = scenarios;
    if (include_causal_variant && std::find(out.begin(), out.end(), "S2-lagged") == out.end())
        out.push_back("S2-lagged");
    return out;
}

ScenarioSpec RunConfig::scenario(const std::string& id) const {
    ScenarioSpec spec;
    if (id == "S1") {
        spec = ScenarioSpec::scenario1(split, granularity);
    } else if (id == "S2" || id == "S2-lagged") {
        spec = ScenarioSpec::scenario2(split, granularity, id == "S2" ? deviation_mode : DeviationMode::Lagged);
        const DeviationMode mode = spec.features.deviation.mode;
        spec.features.deviation = deviation;
        spec.features.deviation.mode = mode;
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + id + "' (expected S1, S2 or S2-lagged)");
    }
    spec.id = id;
    spec.models = models;
    spec.settings = settings;
    spec.histogram_bins = histogram_bins;
    spec.exclude_imputed = exclude_imputed;
    return spec;
}

void RunConfig::validate(bool require_inputs) const {
    split.validate();
    if (scenarios.empty()) throw Error(ErrorCode::InvalidConfig, "no scenarios configured");
    std::set<std::string> seen;
    for (const auto& s : effective_scenarios()) {
        if (!kKnownScenarios.count(s))
            throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + s + "' (expected S1, S2 or S2-lagged)");
        if (!seen.insert(s).second) throw Error(ErrorCode::InvalidConfig, "scenario " + s + " listed twice");
        scenario(s).validate();
    }
    if (workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be at least 1");
    if (output_dir.empty()) throw Error(ErrorCode::InvalidConfig, "output_dir must not be empty");
    policy.validate();
    deviation.validate();
    if (safety_sigma != "model" && safety_sigma != "baseline")
        throw Error(ErrorCode::InvalidConfig, "safety_sigma must be model or baseline");
    for (const auto& m : simulate_models)
        if (!parse_model_name(m)) throw Error(ErrorCode::InvalidConfig, "unknown model '" + m + "' in simulate_models");
    if (require_inputs) {
        if (!std::filesystem::is_regular_file(data_path))
            throw Error(ErrorCode::Input, "data file not found: " + data_path.string());
        if (!std::filesystem::is_regular_file(holiday_calendar_path))
            throw Error(ErrorCode::Input, "holiday calendar not found: " + holiday_calendar_path.string());
    }
}

void to_json(Json& j, const RunConfig& c) {
    std::vector<std::string> models;
    for (auto m : c.models) models.emplace_back(model_name(m));
    j = Json{
        {"data_path", c.data_path.generic_string()},
        {"holiday_calendar_path", c.holiday_calendar_path.generic_string()},
        {"output_dir", c.output_dir.generic_string()},
        {"schema",
         Json{{"date_column", c.schema.date_column},
              {"store_column", c.schema.store_column},
              {"item_column", c.schema.item_column},
              {"quantity_column", c.schema.quantity_column},
              {"extra_columns", c.schema.extra_columns},
              {"max_malformed_fraction", c.schema.max_malformed_fraction}}},
        {"fill_method", c.fill_method == FillMethod::LinearInterpolate ? "linear" : "forward"},
        {"granularity", to_string(c.granularity)},
        {"split", Json{{"train_end", c.split.train_end}, {"test_start", c.split.test_start}, {"test_end", c.split.test_end}}},
        {"scenarios", c.scenarios},
        {"deviation_mode", to_string(c.deviation_mode)},
        {"include_causal_variant", c.include_causal_variant},
        {"models", models},
        {"gbdt", c.settings.gbdt},
        {"arimax", c.settings.arimax},
        {"prophet", c.settings.prophet},
        {"svr", c.settings.svr},
        {"deviation", c.deviation},
        {"histogram_bins", c.histogram_bins},
        {"exclude_imputed", c.exclude_imputed},
        {"policy",
         Json{{"review_period", c.policy.review_period},
              {"safety_factor", c.policy.safety_factor},
              {"lead_time", c.policy.lead_time},
              {"initial_stock", c.policy.initial_stock ? Json(*c.policy.initial_stock) : Json(nullptr)},
              {"holding_cost", c.policy.holding_cost},
              {"emergency_cost", c.policy.emergency_cost},
              {"overstock_multiple", c.policy.overstock_multiple},
              {"overstock_window", c.policy.overstock_window}}},
        {"simulate_scenario", c.simulate_scenario},
        {"simulate_models", c.simulate_models},
        {"safety_sigma", c.safety_sigma},
        {"workers", c.workers},
        {"seed", c.seed},
        {"record_runtime", c.record_runtime},
        {"save_models", c.save_models},
        {"synthetic",
         Json{{"stores", c.synthetic.stores},
              {"items", c.synthetic.items},
              {"start", c.synthetic.start},
              {"end", c.synthetic.end},
              {"seed", c.synthetic.seed},
              {"outage_probability", c.synthetic.outage_probability},
              {"missing_fraction", c.synthetic.missing_fraction}}},
    };
}

void from_json(const Json& j, RunConfig& c) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    static const std::set<std::string> known{
        "data_path", "holiday_calendar_path", "output_dir", "schema", "fill_method", "granularity", "split",
        "scenarios", "deviation_mode", "include_causal_variant", "models", "gbdt", "arimax", "prophet", "svr",
        "deviation", "histogram_bins", "exclude_imputed", "policy", "simulate_scenario", "simulate_models",
        "safety_sigma", "workers", "seed", "record_runtime", "save_models", "synthetic"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    try {
        if (j.contains("data_path")) c.data_path = j.at("data_path").get<std::string>();
        if (j.contains("holiday_calendar_path")) c.holiday_calendar_path = j.at("holiday_calendar_path").get<std::string>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("schema")) {
            const Json& s = j.at("schema");
            read_opt(s, "date_column", c.schema.date_column);
            read_opt(s, "store_column", c.schema.store_column);
            read_opt(s, "item_column", c.schema.item_column);
            read_opt(s, "quantity_column", c.schema.quantity_column);
            read_opt(s, "extra_columns", c.schema.extra_columns);
            read_opt(s, "max_malformed_fraction", c.schema.max_malformed_fraction);
        }
        if (j.contains("fill_method")) {
            const auto m = j.at("fill_method").get<std::string>();
            if (m == "linear")
                c.fill_method = FillMethod::LinearInterpolate;
            else if (m == "forward")
                c.fill_method = FillMethod::ForwardFill;
            else
                throw Error(ErrorCode::InvalidConfig, "unknown fill_method '" + m + "' (expected linear or forward)");
        }
        if (j.contains("granularity")) c.granularity = parse_granularity(j.at("granularity").get<std::string>());
        if (j.contains("split")) {
            const Json& s = j.at("split");
            if (s.contains("train_end")) {
                c.split.train_end = s.at("train_end").get<Date>();
                c.split.test_start = c.split.train_end + 1;
            }
            if (s.contains("test_start")) c.split.test_start = s.at("test_start").get<Date>();
            if (s.contains("test_end")) c.split.test_end = s.at("test_end").get<Date>();
        }
        read_opt(j, "scenarios", c.scenarios);
        if (j.contains("deviation_mode")) c.deviation_mode = parse_deviation_mode(j.at("deviation_mode").get<std::string>());
        read_opt(j, "include_causal_variant", c.include_causal_variant);
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& name : j.at("models").get<std::vector<std::string>>()) {
                const auto kind = parse_model_name(name);
                if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown model '" + name + "'");
                c.models.push_back(*kind);
            }
        }
        if (j.contains("gbdt")) from_json(j.at("gbdt"), c.settings.gbdt);
        if (j.contains("arimax")) from_json(j.at("arimax"), c.settings.arimax);
        if (j.contains("prophet")) from_json(j.at("prophet"), c.settings.prophet);
        if (j.contains("svr")) from_json(j.at("svr"), c.settings.svr);
        if (j.contains("deviation")) from_json(j.at("deviation"), c.deviation);
        read_opt(j, "histogram_bins", c.histogram_bins);
        read_opt(j, "exclude_imputed", c.exclude_imputed);
        if (j.contains("policy")) {
            const Json& p = j.at("policy");
            read_opt(p, "review_period", c.policy.review_period);
            read_opt(p, "safety_factor", c.policy.safety_factor);
            read_opt(p, "lead_time", c.policy.lead_time);
            if (p.contains("initial_stock")) {
                if (p.at("initial_stock").is_null())
                    c.policy.initial_stock.reset();
                else
                    c.policy.initial_stock = p.at("initial_stock").get<double>();
            }
            read_opt(p, "holding_cost", c.policy.holding_cost);
            read_opt(p, "emergency_cost", c.policy.emergency_cost);
            read_opt(p, "overstock_multiple", c.policy.overstock_multiple);
            read_opt(p, "overstock_window", c.policy.overstock_window);
        }
        read_opt(j, "simulate_scenario", c.simulate_scenario);
        read_opt(j, "simulate_models", c.simulate_models);
        read_opt(j, "safety_sigma", c.safety_sigma);
        read_opt(j, "workers", c.workers);
        read_opt(j, "seed", c.seed);
        read_opt(j, "record_runtime", c.record_runtime);
        read_opt(j, "save_models", c.save_models);
        if (j.contains("synthetic")) {
            const Json& s = j.at("synthetic");
            read_opt(s, "stores", c.synthetic.stores);
            read_opt(s, "items", c.synthetic.items);
            if (s.contains("start")) c.synthetic.start = s.at("start").get<Date>();
            if (s.contains("end")) c.synthetic.end = s.at("end").get<Date>();
            read_opt(s, "seed", c.synthetic.seed);
            read_opt(s, "outage_probability", c.synthetic.outage_probability);
            read_opt(s, "missing_fraction", c.synthetic.missing_fraction);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path))
        throw Error(ErrorCode::InvalidConfig, "config file not found: " + path.string());
    RunConfig c;
    from_json(read_json_file(path), c);
    return c;
}

std::string config_fingerprint(const RunConfig& c) {
    Json j = c;
    // Execution-only knobs do not change results.
    j.erase("workers");
    j.erase("output_dir");
    j.erase("record_runtime");
    return fingerprint(j.dump());
}

} // namespace demandcast
