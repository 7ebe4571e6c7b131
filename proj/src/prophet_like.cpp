#include "demandcast/prophet_like.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace demandcast {

namespace {
constexpr double kWeekDays = 7.0;
constexpr double kYearDays = 365.25;
} // namespace

void ProphetConfig::validate() const {
    if (n_changepoints < 0) throw Error(ErrorCode::InvalidConfig, "n_changepoints must be non-negative");
    if (!(changepoint_range > 0.0 && changepoint_range <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "changepoint_range must lie in (0, 1]");
    if (weekly_fourier_order < 0 || yearly_fourier_order < 0)
        throw Error(ErrorCode::InvalidConfig, "Fourier orders must be non-negative");
    if (!(changepoint_penalty >= 0.0)) throw Error(ErrorCode::InvalidConfig, "changepoint_penalty must be >= 0");
    if (!(interval_level > 0.0 && interval_level < 1.0))
        throw Error(ErrorCode::InvalidConfig, "interval_level must lie in (0, 1)");
}

std::vector<std::string> ProphetBasis::column_names() const {
    std::vector<std::string> names{"t"};
    for (std::size_t j = 0; j < changepoints.size(); ++j) names.push_back("cp_" + std::to_string(j + 1));
    for (int k = 1; k <= weekly_order; ++k) {
        names.push_back("weekly_sin_" + std::to_string(k));
        names.push_back("weekly_cos_" + std::to_string(k));
    }
    for (int k = 1; k <= yearly_order; ++k) {
        names.push_back("yearly_sin_" + std::to_string(k));
        names.push_back("yearly_cos_" + std::to_string(k));
    }
    for (const auto& h : holiday_names) names.push_back("holiday:" + h);
    for (const auto& r : regressor_names) names.push_back(r);
    return names;
}

ProphetBasis make_basis(std::span<const Date> train_dates, const ProphetConfig& cfg, const HolidayCalendar& calendar,
                        std::vector<std::string> regressor_names) {
    cfg.validate();
    if (train_dates.empty()) throw Error(ErrorCode::InvalidArgument, "basis needs at least one date");
    ProphetBasis b;
    b.t_start = train_dates.front();
    const Date t_end = train_dates.back();
    b.t_span = t_end > b.t_start ? static_cast<double>(t_end - b.t_start) : 1.0;
    for (int j = 1; j <= cfg.n_changepoints; ++j)
        b.changepoints.push_back(cfg.changepoint_range * static_cast<double>(j) / static_cast<double>(cfg.n_changepoints));
    b.weekly_order = cfg.weekly_fourier_order;
    b.yearly_order = cfg.yearly_fourier_order;
    if (cfg.include_holidays) {
        std::set<std::string> names;
        for (Date d : train_dates)
            if (const auto* n = calendar.name(d)) names.insert(*n);
        b.holiday_names.assign(names.begin(), names.end());
    }
    b.regressor_names = std::move(regressor_names);
    return b;
}

Eigen::MatrixXd build_basis(std::span<const Date> dates, const ProphetBasis& b, const HolidayCalendar& calendar,
                            const Eigen::MatrixXd& regressors) {
    const auto n = static_cast<Eigen::Index>(dates.size());
    if (static_cast<std::size_t>(regressors.cols()) != b.regressor_names.size() ||
        (regressors.cols() > 0 && regressors.rows() != n))
        throw Error(ErrorCode::SchemaMismatch, "regressor matrix does not match the basis layout");
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(b.n_columns()));
    for (Eigen::Index r = 0; r < n; ++r) {
        const Date d = dates[static_cast<std::size_t>(r)];
        const double t = static_cast<double>(d - b.t_start) / b.t_span;
        const double days = static_cast<double>(d.days());
        Eigen::Index c = 0;
        out(r, c++) = t;
        for (double cp : b.changepoints) out(r, c++) = std::max(0.0, t - cp);
        for (int k = 1; k <= b.weekly_order; ++k) {
            const double a = 2.0 * std::numbers::pi * k * days / kWeekDays;
            out(r, c++) = std::sin(a);
            out(r, c++) = std::cos(a);
        }
        for (int k = 1; k <= b.yearly_order; ++k) {
            const double a = 2.0 * std::numbers::pi * k * days / kYearDays;
            out(r, c++) = std::sin(a);
            out(r, c++) = std::cos(a);
        }
        const std::string* hname = b.holiday_names.empty() ? nullptr : calendar.name(d);
        for (const auto& h : b.holiday_names) out(r, c++) = (hname && *hname == h) ? 1.0 : 0.0;
        for (Eigen::Index j = 0; j < regressors.cols(); ++j) out(r, c++) = regressors(r, j);
    }
    return out;
}

Eigen::MatrixXd build_basis(std::span<const Date> dates, const ProphetConfig& cfg, const HolidayCalendar& calendar) {
    if (!std::is_sorted(dates.begin(), dates.end()))
        throw Error(ErrorCode::InvalidArgument, "basis dates must be sorted ascending");
    return build_basis(dates, make_basis(dates, cfg, calendar), calendar);
}

Eigen::VectorXd ProphetLikeModel::coefficients() const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(basis.n_columns()));
    Eigen::Index i = 0;
    c(i++) = slope;
    for (double v : deltas) c(i++) = v;
    for (double v : fourier) c(i++) = v;
    for (double v : holiday_effects) c(i++) = v;
    for (double v : regressor_effects) c(i++) = v;
    return c;
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

ProphetLikeModel fit_prophetlike(std::span<const double> y, std::span<const Date> dates, const ProphetConfig& cfg,
                                 const HolidayCalendar& calendar, const Eigen::MatrixXd& regressors,
                                 std::vector<std::string> regressor_names) {
    cfg.validate();
    if (y.size() != dates.size()) throw Error(ErrorCode::InvalidArgument, "series and dates differ in length");
    if (!std::is_sorted(dates.begin(), dates.end()))
        throw Error(ErrorCode::InvalidArgument, "dates must be sorted ascending");
    if (regressor_names.empty() && regressors.cols() > 0)
        for (Eigen::Index j = 0; j < regressors.cols(); ++j) regressor_names.push_back("regressor_" + std::to_string(j));

    ProphetLikeModel model;
    model.config = cfg;
    model.fit_on_log = cfg.seasonality_mode == SeasonalityMode::Multiplicative;
    model.basis = make_basis(dates, cfg, calendar, std::move(regressor_names));

    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = y[static_cast<std::size_t>(i)];
        if (model.fit_on_log && !(v > -1.0))
            throw Error(ErrorCode::NonPositiveData, "multiplicative mode requires y > -1");
        z(i) = model.fit_on_log ? std::log1p(v) : v;
    }

    const Eigen::MatrixXd basis = build_basis(dates, model.basis, calendar, regressors);
    const Eigen::Index p = basis.cols() + 1;
    if (n < p) throw Error(ErrorCode::InvalidArgument, "series shorter than the number of basis columns");

    // Ridge on hinge terms only, by row augmentation so QR sees the penalty directly.
    const auto n_cp = static_cast<Eigen::Index>(model.basis.changepoints.size());
    const double penalty = cfg.changepoint_penalty * static_cast<double>(n);
    const Eigen::Index extra = penalty > 0.0 ? n_cp : 0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + extra, p);
    a.topLeftCorner(n, 1).setOnes();
    a.topRightCorner(n, basis.cols()) = basis;
    for (Eigen::Index j = 0; j < extra; ++j) a(n + j, 2 + j) = std::sqrt(penalty);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + extra);
    rhs.head(n) = z;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < p)
        throw Error(ErrorCode::SingularBasis, "basis is rank-deficient (rank " + std::to_string(qr.rank()) + " of " +
                                                  std::to_string(p) + ")");
    const Eigen::VectorXd theta = qr.solve(rhs);

    Eigen::Index i = 0;
    model.offset = theta(i++);
    model.slope = theta(i++);
    for (Eigen::Index j = 0; j < n_cp; ++j) model.deltas.push_back(theta(i++));
    for (int k = 0; k < 2 * (model.basis.weekly_order + model.basis.yearly_order); ++k)
        model.fourier.push_back(theta(i++));
    for (std::size_t k = 0; k < model.basis.holiday_names.size(); ++k) model.holiday_effects.push_back(theta(i++));
    for (std::size_t k = 0; k < model.basis.regressor_names.size(); ++k) model.regressor_effects.push_back(theta(i++));

    const Eigen::VectorXd fitted = (basis * theta.tail(basis.cols())).array() + model.offset;
    std::vector<double> resid(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) resid[static_cast<std::size_t>(r)] = z(r) - fitted(r);
    const double level = cfg.interval_level;
    // Clamped around zero so that lo <= point <= hi always holds.
    model.residual_lo = std::min(0.0, empirical_quantile(resid, (1.0 - level) / 2.0));
    model.residual_hi = std::max(0.0, empirical_quantile(resid, (1.0 + level) / 2.0));
    return model;
}

ProphetForecast forecast_prophetlike(const ProphetLikeModel& model, std::span<const Date> dates,
                                     const HolidayCalendar& calendar, const Eigen::MatrixXd& regressors) {
    const Eigen::MatrixXd basis = build_basis(dates, model.basis, calendar, regressors);
    const Eigen::ArrayXd eta = (basis * model.coefficients()).array() + model.offset;
    auto inverse = [&](const Eigen::ArrayXd& v) -> Eigen::VectorXd {
        return model.fit_on_log ? Eigen::VectorXd(v.exp() - 1.0) : Eigen::VectorXd(v);
    };
    return {inverse(eta), inverse(eta + model.residual_lo), inverse(eta + model.residual_hi)};
}

double prophet_trend(const ProphetLikeModel& model, double t_norm) {
    double v = model.offset + model.slope * t_norm;
    for (std::size_t j = 0; j < model.deltas.size(); ++j)
        v += model.deltas[j] * std::max(0.0, t_norm - model.basis.changepoints[j]);
    return v;
}

} // namespace demandcast
