#pragma once

#include "demandcast/date.hpp"
#include "demandcast/sales_table.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace demandcast {

// Column names used across the pipeline.
namespace columns {
inline const std::string kMonthSin = "month_sin";
inline const std::string kMonthCos = "month_cos";
inline const std::string kWeekday = "weekday";
inline const std::string kWeekdaySin = "weekday_sin";
inline const std::string kWeekdayCos = "weekday_cos";
inline const std::string kHoliday = "public_holiday";
inline const std::string kDeviationFlag = "sales_deviation_flag";
std::string lag(int offset);
std::string weekday_dummy(int weekday);
} // namespace columns

/// Days whose sales drop below `ratio` times the trailing rolling mean.
///
/// SameDay compares the day's own sales against the mean of the preceding
/// `window` days, so it reads the target of the row it annotates. Lagged
/// shifts that flag forward one day, which makes it strictly causal.
enum class DeviationMode { SameDay, Lagged };

struct DeviationConfig {
    int window = 7;
    double ratio = 0.30;
    DeviationMode mode = DeviationMode::SameDay;
    int min_periods = 3;
    /// Also flag spikes above (1 / ratio) times the rolling mean.
    bool flag_spikes = false;

    void validate() const;
};

struct FeatureSpec {
    std::vector<int> lags{1, 7, 14, 28};
    bool month_cyclical = true;
    bool weekday_cyclical = false;
    bool weekday_numeric = false;
    /// Six Monday-baseline dummies; used for linear models.
    bool weekday_one_hot = false;
    bool holiday = false;
    bool deviation_flag = false;
    DeviationConfig deviation;
    bool one_hot_ids = false;
    bool include_extras = true;

    /// History-only features: lags plus month sin/cos.
    static FeatureSpec scenario1();
    /// Scenario 1 plus weekday, holiday and deviation flag.
    static FeatureSpec scenario2(DeviationMode mode = DeviationMode::SameDay);

    int max_lag() const noexcept;
    void validate() const;
};

class HolidayCalendar {
public:
    HolidayCalendar() = default;
    HolidayCalendar(std::map<Date, std::string> entries, std::string country_tag);

    /// CSV with header `date,name`.
    static HolidayCalendar load_csv(std::istream& in, std::string country_tag = "IN");
    static HolidayCalendar load_file(const std::filesystem::path& path, std::string country_tag = "IN");

    bool contains(Date d) const { return entries_.count(d) != 0; }
    const std::string* name(Date d) const;
    bool covers_year(int year) const { return years_.count(year) != 0; }
    bool empty() const noexcept { return entries_.empty(); }

    const std::map<Date, std::string>& entries() const noexcept { return entries_; }
    const std::string& country_tag() const noexcept { return country_tag_; }

private:
    std::map<Date, std::string> entries_;
    std::set<int> years_;
    std::string country_tag_;
};

int weekday_of(Date d) noexcept;

/// (sin(2*pi*value/period), cos(2*pi*value/period)). Throws ZeroPeriod.
std::pair<double, double> cyclical_encode(int value, int period);

struct LagColumns {
    /// column j holds x[t - lags[j]]; NaN where undefined.
    Eigen::MatrixXd values;
    std::vector<bool> valid;
};

LagColumns lag_features(std::span<const double> series, std::span<const int> lags);

/// Mean of the up-to-`window` values ending at t; NaN while fewer than
/// `min_periods` are available.
std::vector<double> rolling_mean(std::span<const double> series, int window, int min_periods);

std::vector<std::uint8_t> deviation_flag(std::span<const double> series, const DeviationConfig& cfg);

/// Throws CalendarGap for dates whose year has no calendar entries, unless
/// `require_coverage` is false.
std::vector<std::uint8_t> holiday_flag(std::span<const Date> dates, const HolidayCalendar& calendar,
                                       bool require_coverage = true);

struct ColumnScaling {
    bool scaled = false;
    double min = 0.0;
    double max = 0.0;
};

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

/// Row-aligned design matrix. Rows are grouped by series, then date.
struct FeatureMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    Eigen::VectorXd target;
    std::vector<Date> dates;
    std::vector<std::size_t> series;
    std::vector<std::uint8_t> imputed;
    std::vector<SeriesKey> series_keys;
    std::vector<RowRange> series_rows;
    std::vector<ColumnScaling> scaling;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
    std::optional<std::size_t> column_index(const std::string& name) const;

    /// Rows of one series, keeping the full series_keys list.
    FeatureMatrix series_slice(std::size_t s) const;
    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
    FeatureMatrix select_columns(const std::vector<std::string>& names) const;

    /// Checks shape agreement, finiteness and column-name uniqueness.
    void validate() const;
};

/// Assembles every active column for a cleaned, sorted, gap-free table.
/// Scaled columns use min/max over rows dated on or before `scale_through`
/// (all rows when absent); the statistics are kept in `scaling`.
FeatureMatrix build_design_matrix(const SalesTable& table, const FeatureSpec& spec, const HolidayCalendar& calendar,
                                  std::optional<Date> scale_through = std::nullopt);

struct DesignSplit {
    FeatureMatrix train;
    FeatureMatrix test;
};

DesignSplit split_design(const FeatureMatrix& matrix, const SplitSpec& split);

} // namespace demandcast
