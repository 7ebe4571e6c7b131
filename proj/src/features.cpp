#include "demandcast/features.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace demandcast {

namespace columns {
std::string lag(int offset) { return "lag_" + std::to_string(offset); }
std::string weekday_dummy(int weekday) {
    static constexpr const char* kNames[] = {"dow_mon", "dow_tue", "dow_wed", "dow_thu",
                                             "dow_fri", "dow_sat", "dow_sun"};
    return kNames[weekday];
}
} // namespace columns

void DeviationConfig::validate() const {
    if (window < 1) throw Error(ErrorCode::InvalidConfig, "deviation window must be positive");
    if (min_periods < 1 || min_periods > window)
        throw Error(ErrorCode::InvalidConfig, "deviation min_periods must lie in [1, window]");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "deviation ratio must lie in (0, 1)");
}

FeatureSpec FeatureSpec::scenario1() { return FeatureSpec{}; }

FeatureSpec FeatureSpec::scenario2(DeviationMode mode) {
    FeatureSpec spec;
    spec.weekday_numeric = true;
    spec.holiday = true;
    spec.deviation_flag = true;
    spec.deviation.mode = mode;
    return spec;
}

int FeatureSpec::max_lag() const noexcept {
    return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
}

void FeatureSpec::validate() const {
    for (int lag : lags)
        if (lag <= 0) throw Error(ErrorCode::InvalidConfig, "lags must be strictly positive");
    if (std::set<int>(lags.begin(), lags.end()).size() != lags.size())
        throw Error(ErrorCode::InvalidConfig, "lags must be distinct");
    const bool any = !lags.empty() || month_cyclical || weekday_cyclical || weekday_numeric || weekday_one_hot ||
                     holiday || deviation_flag || one_hot_ids;
    if (!any) throw Error(ErrorCode::InvalidConfig, "feature spec has no active feature");
    if (deviation_flag) deviation.validate();
}

HolidayCalendar::HolidayCalendar(std::map<Date, std::string> entries, std::string country_tag)
    : entries_(std::move(entries)), country_tag_(std::move(country_tag)) {
    for (const auto& [d, _] : entries_) years_.insert(d.year());
}

HolidayCalendar HolidayCalendar::load_csv(std::istream& in, std::string country_tag) {
    std::map<Date, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("date", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(ErrorCode::Input, "holiday calendar line " + std::to_string(line_no) + " lacks a name");
        const auto date = Date::parse(std::string_view(line).substr(0, comma));
        if (!date)
            throw Error(ErrorCode::Input, "holiday calendar line " + std::to_string(line_no) + " has a bad date");
        std::string name = line.substr(comma + 1);
        if (!name.empty() && name.front() == '"' && name.back() == '"' && name.size() >= 2)
            name = name.substr(1, name.size() - 2);
        if (!entries.emplace(*date, name).second)
            throw Error(ErrorCode::Input, "holiday calendar lists " + date->iso() + " twice");
    }
    return HolidayCalendar(std::move(entries), std::move(country_tag));
}

HolidayCalendar HolidayCalendar::load_file(const std::filesystem::path& path, std::string country_tag) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Input, "cannot open holiday calendar " + path.string());
    return load_csv(in, std::move(country_tag));
}

const std::string* HolidayCalendar::name(Date d) const {
    auto it = entries_.find(d);
    return it == entries_.end() ? nullptr : &it->second;
}

int weekday_of(Date d) noexcept { return d.weekday(); }

std::pair<double, double> cyclical_encode(int value, int period) {
    if (period <= 0) throw Error(ErrorCode::ZeroPeriod, "cyclical period must be positive");
    if (value < 0 || value >= period)
        throw Error(ErrorCode::InvalidArgument, "cyclical value must lie in [0, period)");
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(value) / static_cast<double>(period);
    return {std::sin(angle), std::cos(angle)};
}

LagColumns lag_features(std::span<const double> series, std::span<const int> lags) {
    const int n = static_cast<int>(series.size());
    int max_lag = 0;
    for (int lag : lags) {
        if (lag <= 0) throw Error(ErrorCode::InvalidArgument, "lags must be strictly positive");
        max_lag = std::max(max_lag, lag);
    }
    if (!lags.empty() && n <= max_lag)
        throw Error(ErrorCode::LagExceedsSeries, "series of length " + std::to_string(n) +
                                                     " cannot support lag " + std::to_string(max_lag));
    LagColumns out;
    out.values = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(lags.size()),
                                           std::numeric_limits<double>::quiet_NaN());
    out.valid.assign(static_cast<std::size_t>(n), true);
    for (std::size_t j = 0; j < lags.size(); ++j) {
        for (int t = 0; t < n; ++t) {
            if (t - lags[j] >= 0)
                out.values(t, static_cast<Eigen::Index>(j)) = series[static_cast<std::size_t>(t - lags[j])];
            else
                out.valid[static_cast<std::size_t>(t)] = false;
        }
    }
    return out;
}

std::vector<double> rolling_mean(std::span<const double> series, int window, int min_periods) {
    if (window < 1 || min_periods < 1 || min_periods > window)
        throw Error(ErrorCode::InvalidArgument, "rolling_mean requires window >= min_periods >= 1");
    std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const std::size_t first = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - window : 0;
        const std::size_t count = t + 1 - first;
        if (count < static_cast<std::size_t>(min_periods)) continue;
        // Summed directly per window so results do not depend on earlier values.
        double sum = 0.0;
        for (std::size_t k = first; k <= t; ++k) sum += series[k];
        out[t] = sum / static_cast<double>(count);
    }
    return out;
}

std::vector<std::uint8_t> deviation_flag(std::span<const double> series, const DeviationConfig& cfg) {
    cfg.validate();
    const std::size_t n = series.size();
    const auto means = rolling_mean(series, cfg.window, cfg.min_periods);
    std::vector<std::uint8_t> same_day(n, 0);
    for (std::size_t t = 1; t < n; ++t) {
        const double mean = means[t - 1];
        if (std::isnan(mean)) continue;
        const bool drop = series[t] < cfg.ratio * mean;
        const bool spike = cfg.flag_spikes && series[t] > mean / cfg.ratio;
        same_day[t] = (drop || spike) ? 1 : 0;
    }
    if (cfg.mode == DeviationMode::SameDay) return same_day;
    std::vector<std::uint8_t> lagged(n, 0);
    for (std::size_t t = 1; t < n; ++t) lagged[t] = same_day[t - 1];
    return lagged;
}

std::vector<std::uint8_t> holiday_flag(std::span<const Date> dates, const HolidayCalendar& calendar,
                                       bool require_coverage) {
    std::vector<std::uint8_t> out(dates.size(), 0);
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (require_coverage && !calendar.covers_year(dates[i].year()))
            throw Error(ErrorCode::CalendarGap,
                        "holiday calendar has no entries for year " + std::to_string(dates[i].year()));
        out[i] = calendar.contains(dates[i]) ? 1 : 0;
    }
    return out;
}

std::optional<std::size_t> FeatureMatrix::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns.begin());
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out;
    out.columns = columns;
    out.scaling = scaling;
    out.series_keys = series_keys;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    out.target.resize(static_cast<Eigen::Index>(rows.size()));
    out.series_rows.assign(series_keys.size(), RowRange{});
    std::vector<bool> seen(series_keys.size(), false);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(rows[k]);
        out.values.row(static_cast<Eigen::Index>(k)) = values.row(r);
        out.target(static_cast<Eigen::Index>(k)) = target(r);
        out.dates.push_back(dates[rows[k]]);
        out.series.push_back(series[rows[k]]);
        out.imputed.push_back(imputed[rows[k]]);
        const std::size_t s = series[rows[k]];
        if (!seen[s]) {
            out.series_rows[s] = {k, k};
            seen[s] = true;
        }
        out.series_rows[s].end = k + 1;
    }
    return out;
}

FeatureMatrix FeatureMatrix::series_slice(std::size_t s) const {
    const RowRange range = series_rows.at(s);
    std::vector<std::size_t> rows(range.size());
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = range.begin + k;
    return select_rows(rows);
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
    FeatureMatrix out = *this;
    out.columns = names;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
    out.scaling.clear();
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto idx = column_index(names[j]);
        if (!idx) throw Error(ErrorCode::SchemaMismatch, "matrix has no column '" + names[j] + "'");
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(*idx));
        out.scaling.push_back(scaling.at(*idx));
    }
    return out;
}

void FeatureMatrix::validate() const {
    const auto n = rows();
    if (static_cast<std::size_t>(target.size()) != n || dates.size() != n || series.size() != n ||
        imputed.size() != n)
        throw Error(ErrorCode::InvalidArgument, "feature matrix row arrays disagree in length");
    if (columns.size() != cols() || scaling.size() != cols())
        throw Error(ErrorCode::InvalidArgument, "feature matrix column metadata disagrees with values");
    if (std::set<std::string>(columns.begin(), columns.end()).size() != columns.size())
        throw Error(ErrorCode::InvalidArgument, "feature matrix column names are not unique");
    if (!values.allFinite() || !target.allFinite())
        throw Error(ErrorCode::InvalidArgument, "feature matrix contains non-finite entries");
}

namespace {

// Maps raw column values through recorded min/max statistics.
void apply_scaling(FeatureMatrix& matrix, const std::vector<ColumnScaling>& scaling);

struct ColumnBuilder {
    std::vector<std::string> names;
    std::vector<bool> scaled;
    std::vector<std::vector<double>> data;

    std::vector<double>& add(std::string name, bool scale) {
        names.push_back(std::move(name));
        scaled.push_back(scale);
        return data.emplace_back();
    }
};

} // namespace

FeatureMatrix build_design_matrix(const SalesTable& input, const FeatureSpec& spec, const HolidayCalendar& calendar,
                                  std::optional<Date> scale_through) {
    spec.validate();
    const SalesTable table = sort_chronological(input);
    const auto& recs = table.records();

    std::vector<std::string> stores, items;
    if (spec.one_hot_ids) {
        std::set<std::string, bool (*)(const std::string&, const std::string&)> s(
            [](const std::string& a, const std::string& b) { return compare_ids(a, b) < 0; });
        auto i = s;
        for (const auto& r : table.series()) {
            s.insert(r.key.store);
            i.insert(r.key.item);
        }
        stores.assign(s.begin(), s.end());
        items.assign(i.begin(), i.end());
    }

    ColumnBuilder cb;
    for (int lag : spec.lags) cb.add(columns::lag(lag), true);
    if (spec.month_cyclical) {
        cb.add(columns::kMonthSin, false);
        cb.add(columns::kMonthCos, false);
    }
    if (spec.weekday_numeric) cb.add(columns::kWeekday, true);
    if (spec.weekday_cyclical) {
        cb.add(columns::kWeekdaySin, false);
        cb.add(columns::kWeekdayCos, false);
    }
    if (spec.weekday_one_hot)
        for (int w = 1; w < 7; ++w) cb.add(columns::weekday_dummy(w), false);
    if (spec.holiday) cb.add(columns::kHoliday, false);
    if (spec.deviation_flag) cb.add(columns::kDeviationFlag, false);
    const std::size_t n_extra = spec.include_extras ? table.extra_columns().size() : 0;
    for (std::size_t k = 0; k < n_extra; ++k) cb.add(table.extra_columns()[k], false);
    for (const auto& s : stores) cb.add("store_" + s, false);
    for (const auto& i : items) cb.add("item_" + i, false);

    FeatureMatrix m;
    m.columns = cb.names;
    std::vector<double> target;

    for (std::size_t s = 0; s < table.series().size(); ++s) {
        const auto& range = table.series()[s];
        m.series_keys.push_back(range.key);
        const std::size_t len = range.size();
        std::vector<double> y(len);
        std::vector<Date> dates(len);
        for (std::size_t t = 0; t < len; ++t) {
            y[t] = recs[range.begin + t].quantity;
            dates[t] = recs[range.begin + t].date;
            if (t > 0 && dates[t] - dates[t - 1] != 1)
                throw Error(ErrorCode::InvalidArgument,
                            "series " + range.key.label() + " is not gap-free at " + dates[t].iso());
        }
        const LagColumns lagged = lag_features(y, spec.lags);
        std::vector<std::uint8_t> holidays, flags;
        if (spec.holiday) holidays = holiday_flag(dates, calendar);
        if (spec.deviation_flag) flags = deviation_flag(y, spec.deviation);

        const std::size_t first_row = m.dates.size();
        for (std::size_t t = 0; t < len; ++t) {
            if (!lagged.valid[t]) continue;
            std::size_t c = 0;
            for (std::size_t j = 0; j < spec.lags.size(); ++j)
                cb.data[c++].push_back(lagged.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
            const int wd = dates[t].weekday();
            if (spec.month_cyclical) {
                const auto [sn, cs] = cyclical_encode(dates[t].month() - 1, 12);
                cb.data[c++].push_back(sn);
                cb.data[c++].push_back(cs);
            }
            if (spec.weekday_numeric) cb.data[c++].push_back(wd);
            if (spec.weekday_cyclical) {
                const auto [sn, cs] = cyclical_encode(wd, 7);
                cb.data[c++].push_back(sn);
                cb.data[c++].push_back(cs);
            }
            if (spec.weekday_one_hot)
                for (int w = 1; w < 7; ++w) cb.data[c++].push_back(wd == w ? 1.0 : 0.0);
            if (spec.holiday) cb.data[c++].push_back(holidays[t]);
            if (spec.deviation_flag) cb.data[c++].push_back(flags[t]);
            for (std::size_t k = 0; k < n_extra; ++k) cb.data[c++].push_back(recs[range.begin + t].extras[k]);
            for (const auto& st : stores) cb.data[c++].push_back(range.key.store == st ? 1.0 : 0.0);
            for (const auto& it : items) cb.data[c++].push_back(range.key.item == it ? 1.0 : 0.0);

            target.push_back(y[t]);
            m.dates.push_back(dates[t]);
            m.series.push_back(s);
            m.imputed.push_back(recs[range.begin + t].imputed ? 1 : 0);
        }
        m.series_rows.push_back({first_row, m.dates.size()});
    }

    const auto n = static_cast<Eigen::Index>(m.dates.size());
    m.values.resize(n, static_cast<Eigen::Index>(cb.names.size()));
    for (std::size_t c = 0; c < cb.names.size(); ++c)
        for (Eigen::Index r = 0; r < n; ++r) m.values(r, static_cast<Eigen::Index>(c)) = cb.data[c][static_cast<std::size_t>(r)];
    m.target = Eigen::Map<const Eigen::VectorXd>(target.data(), n);

    m.scaling.assign(cb.names.size(), ColumnScaling{});
    for (std::size_t c = 0; c < cb.names.size(); ++c) {
        if (!cb.scaled[c]) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (scale_through && m.dates[static_cast<std::size_t>(r)] > *scale_through) continue;
            lo = std::min(lo, m.values(r, static_cast<Eigen::Index>(c)));
            hi = std::max(hi, m.values(r, static_cast<Eigen::Index>(c)));
        }
        if (!std::isfinite(lo)) lo = hi = 0.0;
        m.scaling[c] = {true, lo, hi};
    }
    apply_scaling(m, m.scaling);
    m.validate();
    return m;
}

namespace {
void apply_scaling(FeatureMatrix& matrix, const std::vector<ColumnScaling>& scaling) {
    if (scaling.size() != matrix.cols())
        throw Error(ErrorCode::SchemaMismatch, "scaling record does not match matrix columns");
    for (std::size_t c = 0; c < scaling.size(); ++c) {
        const auto& s = scaling[c];
        if (!s.scaled) continue;
        const double range = s.max - s.min;
        auto col = matrix.values.col(static_cast<Eigen::Index>(c));
        if (range > 0.0)
            col = (col.array() - s.min) / range;
        else
            col = col.array() - s.min;
    }
    matrix.scaling = scaling;
}
} // namespace

DesignSplit split_design(const FeatureMatrix& matrix, const SplitSpec& split) {
    split.validate();
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const Date d = matrix.dates[r];
        if (d <= split.train_end)
            train.push_back(r);
        else if (d >= split.test_start && d <= split.test_end)
            test.push_back(r);
    }
    if (train.empty()) throw Error(ErrorCode::EmptyPartition, "training design matrix is empty");
    if (test.empty()) throw Error(ErrorCode::EmptyPartition, "test design matrix is empty");
    return {matrix.select_rows(train), matrix.select_rows(test)};
}

} // namespace demandcast
