#pragma once

#include "demandcast/date.hpp"
#include "demandcast/features.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace demandcast {

enum class SeasonalityMode { Multiplicative, Additive };

struct ProphetConfig {
    int n_changepoints = 25;
    /// Changepoints are spread uniformly over this leading fraction of training time.
    double changepoint_range = 0.8;
    int weekly_fourier_order = 3;
    int yearly_fourier_order = 10;
    SeasonalityMode seasonality_mode = SeasonalityMode::Multiplicative;
    /// Ridge weight on changepoint slope adjustments, multiplied by the row count.
    double changepoint_penalty = 0.05;
    double interval_level = 0.95;
    bool include_holidays = true;

    void validate() const;
};

/// Everything needed to rebuild the design for arbitrary dates.
struct ProphetBasis {
    Date t_start;
    double t_span = 1.0;
    std::vector<double> changepoints;
    int weekly_order = 0;
    int yearly_order = 0;
    std::vector<std::string> holiday_names;
    std::vector<std::string> regressor_names;

    std::size_t n_columns() const noexcept {
        return 1 + changepoints.size() + 2 * static_cast<std::size_t>(weekly_order + yearly_order) +
               holiday_names.size() + regressor_names.size();
    }
    std::vector<std::string> column_names() const;
};

/// Derives the basis layout from training dates: normalized time, hinge
/// positions, and the holiday names that occur inside the training window.
ProphetBasis make_basis(std::span<const Date> train_dates, const ProphetConfig& cfg, const HolidayCalendar& calendar,
                        std::vector<std::string> regressor_names = {});

/// Columns: [t_norm, max(0, t_norm - c_j)..., weekly sin/cos pairs,
/// yearly sin/cos pairs, holiday indicators..., extra regressors...].
/// The intercept is not part of the basis.
Eigen::MatrixXd build_basis(std::span<const Date> dates, const ProphetBasis& basis, const HolidayCalendar& calendar,
                            const Eigen::MatrixXd& regressors = Eigen::MatrixXd());

/// Convenience form treating `dates` as the training window.
Eigen::MatrixXd build_basis(std::span<const Date> dates, const ProphetConfig& cfg, const HolidayCalendar& calendar);

struct ProphetLikeModel {
    ProphetConfig config;
    ProphetBasis basis;
    double offset = 0.0;              // m
    double slope = 0.0;               // k
    std::vector<double> deltas;       // per-changepoint slope adjustments
    std::vector<double> fourier;      // weekly pairs then yearly pairs
    std::vector<double> holiday_effects;
    std::vector<double> regressor_effects;
    double residual_lo = 0.0;
    double residual_hi = 0.0;
    bool fit_on_log = true;

    Eigen::VectorXd coefficients() const;  // aligned with basis columns
};

/// Penalized least squares on log(1 + y) (multiplicative) or y (additive).
ProphetLikeModel fit_prophetlike(std::span<const double> y, std::span<const Date> dates, const ProphetConfig& cfg,
                                 const HolidayCalendar& calendar, const Eigen::MatrixXd& regressors = Eigen::MatrixXd(),
                                 std::vector<std::string> regressor_names = {});

struct ProphetForecast {
    Eigen::VectorXd point;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

ProphetForecast forecast_prophetlike(const ProphetLikeModel& model, std::span<const Date> dates,
                                     const HolidayCalendar& calendar,
                                     const Eigen::MatrixXd& regressors = Eigen::MatrixXd());

/// Trend component m + k t + sum_j delta_j max(0, t - c_j) at normalized time t.
double prophet_trend(const ProphetLikeModel& model, double t_norm);

/// Linear-interpolated empirical quantile of `values` at probability q.
double empirical_quantile(std::vector<double> values, double q);

} // namespace demandcast
