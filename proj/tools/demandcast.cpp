#include "demandcast/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace dc = demandcast;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retail demand forecasting: ingest, evaluate, simulate, report"};
    app.require_subcommand(1);

    std::string config_path, data, out, granularity, deviation_mode, holidays, scenarios, models;
    int workers = 0;
    bool save_models = false;
    bool causal = false;
    app.add_option("--config", config_path, "JSON run config");
    app.add_option("--data", data, "Input sales CSV");
    app.add_option("--out", out, "Output directory");
    app.add_option("--granularity", granularity, "per-series or aggregate");
    app.add_option("--deviation-mode", deviation_mode, "same-day or lagged");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--holidays", holidays, "Holiday calendar CSV (date,name)");
    app.add_option("--scenarios", scenarios, "Comma-separated scenario ids (S1,S2,S2-lagged)");
    app.add_option("--models", models, "Comma-separated model names");
    app.add_flag("--save-models", save_models, "Write per-series model documents");
    app.add_flag("--causal-variant", causal, "Also evaluate S2 with the lagged deviation flag");

    for (const char* name : {"ingest", "evaluate", "simulate", "report", "generate"})
        app.add_subcommand(name)->fallthrough();
    int stores = 0, items = 0;
    app.get_subcommand("generate")->add_option("--stores", stores, "Number of stores")->check(CLI::PositiveNumber);
    app.get_subcommand("generate")->add_option("--items", items, "Number of items")->check(CLI::PositiveNumber);
    app.get_subcommand("ingest")->description("Parse, validate and gap-fill the sales CSV");
    app.get_subcommand("evaluate")->description("Fit and score every configured model and scenario");
    app.get_subcommand("simulate")->description("Replay replenishment against the evaluated forecasts");
    app.get_subcommand("report")->description("Write report.md from the evaluation artifacts");
    app.get_subcommand("generate")->description("Write a deterministic synthetic sales CSV to --data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : dc::kExitConfigError;
    }

    dc::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = dc::load_run_config(config_path);
        if (!data.empty()) cfg.data_path = data;
        if (!out.empty()) cfg.output_dir = out;
        if (!granularity.empty()) cfg.granularity = dc::parse_granularity(granularity);
        if (!deviation_mode.empty()) cfg.deviation_mode = dc::parse_deviation_mode(deviation_mode);
        if (workers > 0) cfg.workers = workers;
        if (!holidays.empty()) cfg.holiday_calendar_path = holidays;
        if (!scenarios.empty()) cfg.scenarios = split_list(scenarios);
        if (!models.empty()) {
            cfg.models.clear();
            for (const auto& m : split_list(models)) {
                const auto kind = dc::parse_model_name(m);
                if (!kind) throw dc::Error(dc::ErrorCode::InvalidConfig, "unknown model '" + m + "'");
                cfg.models.push_back(*kind);
            }
        }
        if (stores > 0) cfg.synthetic.stores = stores;
        if (items > 0) cfg.synthetic.items = items;
        if (save_models) cfg.save_models = true;
        if (causal) cfg.include_causal_variant = true;
    } catch (const dc::Error& e) {
        std::cerr << dc::Json{{"error", dc::error_tag(e.code())}, {"code", dc::to_string(e.code())}, {"message", e.what()}}.dump()
                  << '\n';
        return dc::exit_code_for(e.code());
    }

    const std::string command = app.get_subcommands().front()->get_name();
    return dc::run_command(command, cfg, std::cout, std::cerr);
}
