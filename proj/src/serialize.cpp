#include "demandcast/serialize.hpp"

#include "demandcast/error.hpp"

#include <fstream>

namespace demandcast {

namespace {

Json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json rows(const Eigen::MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
    return out;
}

Eigen::MatrixXd from_rows(const Json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::VectorXd row = to_eigen(j[r]);
        if (row.size() != cols) throw Error(ErrorCode::SchemaMismatch, "ragged matrix in model document");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

template <typename T>
void read_opt(const Json& j, const char* key, T& field) {
    if (auto it = j.find(key); it != j.end()) field = it->template get<T>();
}

} // namespace

std::string to_string(DeviationMode mode) { return mode == DeviationMode::SameDay ? "same-day" : "lagged"; }

DeviationMode parse_deviation_mode(const std::string& text) {
    if (text == "same-day") return DeviationMode::SameDay;
    if (text == "lagged") return DeviationMode::Lagged;
    throw Error(ErrorCode::InvalidConfig, "unknown deviation mode '" + text + "' (expected same-day or lagged)");
}

std::string to_string(Granularity g) { return g == Granularity::PerSeries ? "per-series" : "aggregate"; }

Granularity parse_granularity(const std::string& text) {
    if (text == "per-series") return Granularity::PerSeries;
    if (text == "aggregate") return Granularity::Aggregate;
    throw Error(ErrorCode::InvalidConfig, "unknown granularity '" + text + "' (expected per-series or aggregate)");
}

void to_json(Json& j, const Date& d) { j = d.iso(); }

void from_json(const Json& j, Date& d) {
    const auto parsed = Date::parse(j.get<std::string>());
    if (!parsed) throw Error(ErrorCode::InvalidConfig, "invalid date '" + j.get<std::string>() + "'");
    d = *parsed;
}

void to_json(Json& j, const DeviationConfig& c) {
    j = Json{{"window", c.window},
             {"ratio", c.ratio},
             {"mode", to_string(c.mode)},
             {"min_periods", c.min_periods},
             {"flag_spikes", c.flag_spikes}};
}

void from_json(const Json& j, DeviationConfig& c) {
    read_opt(j, "window", c.window);
    read_opt(j, "ratio", c.ratio);
    if (j.contains("mode")) c.mode = parse_deviation_mode(j.at("mode").get<std::string>());
    read_opt(j, "min_periods", c.min_periods);
    read_opt(j, "flag_spikes", c.flag_spikes);
}

void to_json(Json& j, const FeatureSpec& s) {
    j = Json{{"lags", s.lags},
             {"month_cyclical", s.month_cyclical},
             {"weekday_cyclical", s.weekday_cyclical},
             {"weekday_numeric", s.weekday_numeric},
             {"weekday_one_hot", s.weekday_one_hot},
             {"holiday", s.holiday},
             {"deviation_flag", s.deviation_flag},
             {"deviation", s.deviation},
             {"one_hot_ids", s.one_hot_ids},
             {"include_extras", s.include_extras}};
}

void from_json(const Json& j, FeatureSpec& s) {
    read_opt(j, "lags", s.lags);
    read_opt(j, "month_cyclical", s.month_cyclical);
    read_opt(j, "weekday_cyclical", s.weekday_cyclical);
    read_opt(j, "weekday_numeric", s.weekday_numeric);
    read_opt(j, "weekday_one_hot", s.weekday_one_hot);
    read_opt(j, "holiday", s.holiday);
    read_opt(j, "deviation_flag", s.deviation_flag);
    if (j.contains("deviation")) from_json(j.at("deviation"), s.deviation);
    read_opt(j, "one_hot_ids", s.one_hot_ids);
    read_opt(j, "include_extras", s.include_extras);
}

void to_json(Json& j, const GbdtConfig& c) {
    j = Json{{"n_trees", c.n_trees},           {"learning_rate", c.learning_rate}, {"l2_lambda", c.l2_lambda},
             {"max_depth", c.max_depth},       {"min_child_rows", c.min_child_rows}, {"gamma", c.gamma}};
}

void from_json(const Json& j, GbdtConfig& c) {
    read_opt(j, "n_trees", c.n_trees);
    read_opt(j, "learning_rate", c.learning_rate);
    read_opt(j, "l2_lambda", c.l2_lambda);
    read_opt(j, "max_depth", c.max_depth);
    read_opt(j, "min_child_rows", c.min_child_rows);
    read_opt(j, "gamma", c.gamma);
}

void to_json(Json& j, const ArimaxConfig& c) {
    j = Json{{"p", c.p},
             {"d", c.d},
             {"q", c.q},
             {"allow_order_override", c.allow_order_override},
             {"exogenous_columns", c.exogenous_columns}};
}

void from_json(const Json& j, ArimaxConfig& c) {
    read_opt(j, "p", c.p);
    read_opt(j, "d", c.d);
    read_opt(j, "q", c.q);
    read_opt(j, "allow_order_override", c.allow_order_override);
    read_opt(j, "exogenous_columns", c.exogenous_columns);
}

void to_json(Json& j, const ProphetConfig& c) {
    j = Json{{"n_changepoints", c.n_changepoints},
             {"changepoint_range", c.changepoint_range},
             {"weekly_fourier_order", c.weekly_fourier_order},
             {"yearly_fourier_order", c.yearly_fourier_order},
             {"seasonality_mode", c.seasonality_mode == SeasonalityMode::Multiplicative ? "multiplicative" : "additive"},
             {"changepoint_penalty", c.changepoint_penalty},
             {"interval_level", c.interval_level},
             {"include_holidays", c.include_holidays}};
}

void from_json(const Json& j, ProphetConfig& c) {
    read_opt(j, "n_changepoints", c.n_changepoints);
    read_opt(j, "changepoint_range", c.changepoint_range);
    read_opt(j, "weekly_fourier_order", c.weekly_fourier_order);
    read_opt(j, "yearly_fourier_order", c.yearly_fourier_order);
    if (j.contains("seasonality_mode")) {
        const auto mode = j.at("seasonality_mode").get<std::string>();
        if (mode == "multiplicative")
            c.seasonality_mode = SeasonalityMode::Multiplicative;
        else if (mode == "additive")
            c.seasonality_mode = SeasonalityMode::Additive;
        else
            throw Error(ErrorCode::InvalidConfig, "unknown seasonality_mode '" + mode + "'");
    }
    read_opt(j, "changepoint_penalty", c.changepoint_penalty);
    read_opt(j, "interval_level", c.interval_level);
    read_opt(j, "include_holidays", c.include_holidays);
}

void to_json(Json& j, const SvrConfig& c) {
    j = Json{{"C", c.C},
             {"epsilon", c.epsilon},
             {"rbf_gamma", c.rbf_gamma ? Json(*c.rbf_gamma) : Json(nullptr)},
             {"smo_tolerance", c.smo_tolerance},
             {"max_passes", c.max_passes},
             {"max_train_rows", c.max_train_rows},
             {"standardize_target", c.standardize_target}};
}

void from_json(const Json& j, SvrConfig& c) {
    read_opt(j, "C", c.C);
    read_opt(j, "epsilon", c.epsilon);
    if (j.contains("rbf_gamma")) {
        if (j.at("rbf_gamma").is_null())
            c.rbf_gamma.reset();
        else
            c.rbf_gamma = j.at("rbf_gamma").get<double>();
    }
    read_opt(j, "smo_tolerance", c.smo_tolerance);
    read_opt(j, "max_passes", c.max_passes);
    read_opt(j, "max_train_rows", c.max_train_rows);
    read_opt(j, "standardize_target", c.standardize_target);
}

void to_json(Json& j, const GbdtModel& m) {
    Json trees = Json::array();
    for (const auto& t : m.trees) {
        std::vector<int> feature, left, right;
        std::vector<double> threshold, weight, gain;
        for (const auto& n : t.nodes) {
            feature.push_back(n.feature);
            left.push_back(n.left);
            right.push_back(n.right);
            threshold.push_back(n.threshold);
            weight.push_back(n.weight);
            gain.push_back(n.gain);
        }
        trees.push_back(Json{{"feature", feature},
                             {"threshold", threshold},
                             {"left", left},
                             {"right", right},
                             {"weight", weight},
                             {"gain", gain}});
    }
    j = Json{{"config", m.config},
             {"base_score", m.base_score},
             {"feature_names", m.feature_names},
             {"gain_totals", m.gain_totals},
             {"degenerate_target", m.degenerate_target},
             {"trees", trees}};
}

void from_json(const Json& j, GbdtModel& m) {
    m.config = j.at("config").get<GbdtConfig>();
    m.base_score = j.at("base_score").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.gain_totals = j.at("gain_totals").get<std::vector<double>>();
    m.degenerate_target = j.value("degenerate_target", false);
    m.trees.clear();
    for (const auto& t : j.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto weight = t.at("weight").get<std::vector<double>>();
        const auto gain = t.at("gain").get<std::vector<double>>();
        const std::size_t n = feature.size();
        if (left.size() != n || right.size() != n || threshold.size() != n || weight.size() != n || gain.size() != n)
            throw Error(ErrorCode::SchemaMismatch, "tree arrays differ in length");
        RegressionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
            const int limit = static_cast<int>(n);
            if (feature[i] >= 0 && (left[i] <= 0 || left[i] >= limit || right[i] <= 0 || right[i] >= limit ||
                                    feature[i] >= static_cast<int>(m.feature_names.size())))
                throw Error(ErrorCode::SchemaMismatch, "tree node references are out of range");
            tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], weight[i], gain[i]});
        }
        m.trees.push_back(std::move(tree));
    }
}

void to_json(Json& j, const ArimaxModel& m) {
    j = Json{{"config", m.config},
             {"intercept", m.intercept},
             {"phi", m.phi},
             {"exogenous_names", m.exogenous_names},
             {"beta", vec(m.beta)},
             {"sigma2", m.sigma2},
             {"history", m.history},
             {"n_obs", m.n_obs}};
}

void from_json(const Json& j, ArimaxModel& m) {
    m.config = j.at("config").get<ArimaxConfig>();
    m.intercept = j.at("intercept").get<double>();
    m.phi = j.at("phi").get<std::vector<double>>();
    m.exogenous_names = j.at("exogenous_names").get<std::vector<std::string>>();
    m.beta = to_eigen(j.at("beta"));
    if (static_cast<std::size_t>(m.beta.size()) != m.exogenous_names.size())
        throw Error(ErrorCode::SchemaMismatch, "beta does not match the exogenous names");
    m.sigma2 = j.at("sigma2").get<double>();
    m.history = j.at("history").get<std::vector<double>>();
    m.n_obs = j.at("n_obs").get<std::size_t>();
}

void to_json(Json& j, const ProphetLikeModel& m) {
    j = Json{{"config", m.config},
             {"basis",
              Json{{"t_start", m.basis.t_start},
                   {"t_span", m.basis.t_span},
                   {"changepoints", m.basis.changepoints},
                   {"weekly_order", m.basis.weekly_order},
                   {"yearly_order", m.basis.yearly_order},
                   {"holiday_names", m.basis.holiday_names},
                   {"regressor_names", m.basis.regressor_names}}},
             {"offset", m.offset},
             {"slope", m.slope},
             {"deltas", m.deltas},
             {"fourier", m.fourier},
             {"holiday_effects", m.holiday_effects},
             {"regressor_effects", m.regressor_effects},
             {"residual_lo", m.residual_lo},
             {"residual_hi", m.residual_hi},
             {"fit_on_log", m.fit_on_log}};
}

void from_json(const Json& j, ProphetLikeModel& m) {
    m.config = j.at("config").get<ProphetConfig>();
    const Json& b = j.at("basis");
    m.basis.t_start = b.at("t_start").get<Date>();
    m.basis.t_span = b.at("t_span").get<double>();
    m.basis.changepoints = b.at("changepoints").get<std::vector<double>>();
    m.basis.weekly_order = b.at("weekly_order").get<int>();
    m.basis.yearly_order = b.at("yearly_order").get<int>();
    m.basis.holiday_names = b.at("holiday_names").get<std::vector<std::string>>();
    m.basis.regressor_names = b.at("regressor_names").get<std::vector<std::string>>();
    m.offset = j.at("offset").get<double>();
    m.slope = j.at("slope").get<double>();
    m.deltas = j.at("deltas").get<std::vector<double>>();
    m.fourier = j.at("fourier").get<std::vector<double>>();
    m.holiday_effects = j.at("holiday_effects").get<std::vector<double>>();
    m.regressor_effects = j.at("regressor_effects").get<std::vector<double>>();
    m.residual_lo = j.at("residual_lo").get<double>();
    m.residual_hi = j.at("residual_hi").get<double>();
    m.fit_on_log = j.at("fit_on_log").get<bool>();
    if (m.deltas.size() != m.basis.changepoints.size() ||
        m.fourier.size() != 2 * static_cast<std::size_t>(m.basis.weekly_order + m.basis.yearly_order) ||
        m.holiday_effects.size() != m.basis.holiday_names.size() ||
        m.regressor_effects.size() != m.basis.regressor_names.size())
        throw Error(ErrorCode::SchemaMismatch, "coefficients do not match the basis description");
}

void to_json(Json& j, const SvrModel& m) {
    j = Json{{"config", m.config},
             {"gamma", m.gamma},
             {"feature_names", m.feature_names},
             {"feature_mean", vec(m.feature_mean)},
             {"feature_scale", vec(m.feature_scale)},
             {"target_mean", m.target_mean},
             {"target_scale", m.target_scale},
             {"bias", m.bias},
             {"dual_coeffs", m.dual_coeffs},
             {"support_indices", m.support_indices},
             {"support_vectors", rows(m.support_vectors)},
             {"converged", m.converged},
             {"degenerate_target", m.degenerate_target},
             {"iterations", m.iterations},
             {"train_rows_used", m.train_rows_used},
             {"final_violation", m.final_violation}};
}

void from_json(const Json& j, SvrModel& m) {
    m.config = j.at("config").get<SvrConfig>();
    m.gamma = j.at("gamma").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.feature_mean = to_eigen(j.at("feature_mean"));
    m.feature_scale = to_eigen(j.at("feature_scale"));
    m.target_mean = j.at("target_mean").get<double>();
    m.target_scale = j.at("target_scale").get<double>();
    m.bias = j.at("bias").get<double>();
    m.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
    m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
    m.support_vectors = from_rows(j.at("support_vectors"), static_cast<Eigen::Index>(m.feature_names.size()));
    if (m.dual_coeffs.size() != static_cast<std::size_t>(m.support_vectors.rows()) ||
        m.support_indices.size() != m.dual_coeffs.size() ||
        static_cast<std::size_t>(m.feature_mean.size()) != m.feature_names.size() ||
        static_cast<std::size_t>(m.feature_scale.size()) != m.feature_names.size())
        throw Error(ErrorCode::SchemaMismatch, "support vector arrays differ in length");
    m.converged = j.value("converged", true);
    m.degenerate_target = j.value("degenerate_target", false);
    m.iterations = j.value("iterations", std::size_t{0});
    m.train_rows_used = j.value("train_rows_used", std::size_t{0});
    m.final_violation = j.value("final_violation", 0.0);
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Input, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Input, "cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

} // namespace demandcast
