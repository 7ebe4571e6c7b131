#include "demandcast/error.hpp"
#include "demandcast/prophet_like.hpp"
#include "demandcast/serialize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace demandcast;

namespace {

std::vector<Date> days_from(Date start, int n) {
    std::vector<Date> d;
    for (int i = 0; i < n; ++i) d.push_back(start + i);
    return d;
}

ProphetConfig bare() {
    ProphetConfig c;
    c.n_changepoints = 0;
    c.weekly_fourier_order = 0;
    c.yearly_fourier_order = 0;
    c.include_holidays = false;
    return c;
}

const HolidayCalendar kNoHolidays;

} // namespace

TEST(ProphetBasis, ColumnCounts) {
    const auto d = days_from(Date::from_ymd(2015, 1, 1), 400);
    EXPECT_EQ(build_basis(d, bare(), kNoHolidays).cols(), 1);
    EXPECT_EQ(build_basis(d, ProphetConfig{}, kNoHolidays).cols(), 52);
    EXPECT_EQ(make_basis(d, ProphetConfig{}, kNoHolidays).column_names().size(), 52u);

    std::map<Date, std::string> h{{Date::from_ymd(2015, 1, 26), "Republic Day"}, {Date::from_ymd(2015, 8, 15), "Independence Day"}};
    const HolidayCalendar cal(h, "IN");
    EXPECT_EQ(build_basis(d, ProphetConfig{}, cal).cols(), 54);
}

TEST(ProphetBasis, WeeklyColumnsArePeriodic) {
    const ProphetConfig cfg;
    const auto train = days_from(Date::from_ymd(2015, 1, 1), 400);
    const auto basis = make_basis(train, cfg, kNoHolidays);
    const std::vector<Date> pair{Date::from_ymd(2015, 3, 3), Date::from_ymd(2015, 3, 10)};
    const auto m = build_basis(pair, basis, kNoHolidays);
    const Eigen::Index first = 1 + 25;
    for (Eigen::Index c = first; c < first + 6; ++c) EXPECT_NEAR(m(0, c), m(1, c), 1e-9);
}

TEST(ProphetLike, RecoversPureTrend) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 500);
    const double a = 0.8;
    std::vector<double> y;
    for (std::size_t i = 0; i < d.size(); ++i) y.push_back(std::exp(a * double(i) / 499.0) - 1.0);
    const auto m = fit_prophetlike(y, d, bare(), kNoHolidays);
    EXPECT_NEAR(m.slope, a, 1e-6);
    EXPECT_NEAR(m.offset, 0.0, 1e-6);
}

TEST(ProphetLike, RecoversWeeklyPattern) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 365);
    std::vector<double> y;
    for (Date x : d) y.push_back(std::exp(0.2 * std::sin(2 * std::numbers::pi * x.weekday() / 7.0)) - 1.0);
    auto cfg = bare();
    cfg.weekly_fourier_order = 1;
    const auto m = fit_prophetlike(y, d, cfg, kNoHolidays);
    const auto f = forecast_prophetlike(m, d, kNoHolidays);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double err = std::abs(f.point(i) - y[i]);
        // Mondays have y = 0 exactly; there only the absolute error is meaningful.
        worst = std::max(worst, std::abs(y[i]) > 1e-9 ? err / std::abs(y[i]) : err);
    }
    EXPECT_LT(worst, 0.01);
}

TEST(ProphetLike, IntervalCoverageOnHeldOutNoise) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 4.0);
    const auto all = days_from(Date::from_ymd(2010, 1, 1), 3000);
    std::vector<double> y;
    for (std::size_t i = 0; i < all.size(); ++i) y.push_back(60.0 + noise(rng));
    const std::vector<Date> train(all.begin(), all.begin() + 2000), test(all.begin() + 2000, all.end());
    const std::vector<double> ytrain(y.begin(), y.begin() + 2000);
    for (auto mode : {SeasonalityMode::Multiplicative, SeasonalityMode::Additive}) {
        ProphetConfig cfg;
        cfg.seasonality_mode = mode;
        cfg.include_holidays = false;
        const auto m = fit_prophetlike(ytrain, train, cfg, kNoHolidays);
        const auto f = forecast_prophetlike(m, test, kNoHolidays);
        int inside = 0;
        for (std::size_t i = 0; i < test.size(); ++i) inside += (y[2000 + i] >= f.lo(i) && y[2000 + i] <= f.hi(i));
        const double coverage = inside / 1000.0;
        EXPECT_NEAR(coverage, 0.95, 0.05);
        for (Eigen::Index i = 0; i < f.point.size(); ++i) {
            EXPECT_LE(f.lo(i), f.point(i));
            EXPECT_LE(f.point(i), f.hi(i));
        }
    }
}

TEST(ProphetLike, TrendContinuousAtChangepoints) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.1);
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 700);
    std::vector<double> y;
    for (std::size_t i = 0; i < d.size(); ++i) y.push_back(20 + (i < 300 ? 0.05 * i : 15 - 0.02 * (i - 300.0)) + noise(rng));
    ProphetConfig cfg;
    cfg.changepoint_penalty = 0.0;
    cfg.include_holidays = false;
    const auto m = fit_prophetlike(y, d, cfg, kNoHolidays);
    for (double c : m.basis.changepoints) {
        const double jump = std::abs(prophet_trend(m, c + 1e-9) - prophet_trend(m, c - 1e-9));
        EXPECT_LT(jump, 1e-6) << "changepoint " << c;
    }
}

TEST(ProphetLike, PenaltyShrinksHinges) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 700);
    std::vector<double> y;
    for (std::size_t i = 0; i < d.size(); ++i) y.push_back(20 + (i < 300 ? 0.05 * i : 15 - 0.02 * (i - 300.0)));
    auto abs_sum = [&](double penalty) {
        ProphetConfig cfg;
        cfg.changepoint_penalty = penalty;
        cfg.include_holidays = false;
        const auto m = fit_prophetlike(y, d, cfg, kNoHolidays);
        double s = 0;
        for (double v : m.deltas) s += std::abs(v);
        return s;
    };
    const double low = abs_sum(0.01), mid = abs_sum(1.0), huge = abs_sum(1e8);
    EXPECT_GT(low, mid);
    EXPECT_GT(mid, huge);
    EXPECT_LT(huge, 1e-4);
}

TEST(ProphetLike, ConstantSeries) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 400);
    const std::vector<double> y(d.size(), 25.0);
    ProphetConfig mult;
    ProphetConfig add;
    add.seasonality_mode = SeasonalityMode::Additive;
    const auto a = fit_prophetlike(y, d, mult, kNoHolidays);
    const auto b = fit_prophetlike(y, d, add, kNoHolidays);
    for (const auto* m : {&a, &b}) {
        EXPECT_NEAR(m->slope, 0.0, 1e-8);
        for (double v : m->deltas) EXPECT_NEAR(v, 0.0, 1e-8);
        for (double v : m->fourier) EXPECT_NEAR(v, 0.0, 1e-8);
        EXPECT_NEAR(m->residual_hi - m->residual_lo, 0.0, 1e-8);
    }
    const auto future = days_from(Date::from_ymd(2015, 2, 5), 30);
    const auto fa = forecast_prophetlike(a, future, kNoHolidays), fb = forecast_prophetlike(b, future, kNoHolidays);
    for (Eigen::Index i = 0; i < fa.point.size(); ++i) {
        EXPECT_NEAR(fa.point(i), 25.0, 1e-6);
        EXPECT_NEAR(fa.point(i), fb.point(i), 1e-6);
    }
}

TEST(ProphetLike, RegressorEffect) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 300);
    Eigen::MatrixXd reg(300, 1);
    std::vector<double> y;
    for (int i = 0; i < 300; ++i) {
        reg(i, 0) = i % 11 == 0 ? 1.0 : 0.0;
        y.push_back(10.0 + 5.0 * reg(i, 0));
    }
    auto cfg = bare();
    cfg.seasonality_mode = SeasonalityMode::Additive;
    const auto m = fit_prophetlike(y, d, cfg, kNoHolidays, reg, {"flag"});
    ASSERT_EQ(m.regressor_effects.size(), 1u);
    EXPECT_NEAR(m.regressor_effects[0], 5.0, 1e-8);
}

TEST(ProphetLike, NonPositiveDataRejected) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 100);
    std::vector<double> y(100, 3.0);
    y[10] = -2.0;
    try {
        fit_prophetlike(y, d, bare(), kNoHolidays);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveData);
    }
}

TEST(ProphetLike, EmpiricalQuantile) {
    EXPECT_DOUBLE_EQ(empirical_quantile({3, 1, 2, 4}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(empirical_quantile({3, 1, 2, 4}, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({3, 1, 2, 4}, 1.0), 4.0);
}

TEST(ProphetLike, JsonRoundTrip) {
    const auto d = days_from(Date::from_ymd(2014, 1, 1), 400);
    std::vector<double> y;
    for (std::size_t i = 0; i < d.size(); ++i) y.push_back(30 + 5 * std::sin(i * 0.3) + 0.01 * i);
    ProphetConfig cfg;
    cfg.include_holidays = false;
    const auto m = fit_prophetlike(y, d, cfg, kNoHolidays);
    const auto back = Json::parse(Json(m).dump()).get<ProphetLikeModel>();
    EXPECT_EQ(forecast_prophetlike(back, d, kNoHolidays).point, forecast_prophetlike(m, d, kNoHolidays).point);
}
