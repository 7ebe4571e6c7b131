#include "demandcast/arimax.hpp"
#include "demandcast/error.hpp"
#include "demandcast/serialize.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace demandcast;

namespace {

struct Synthetic {
    std::vector<double> y;
    Eigen::MatrixXd x;
};

Synthetic ar1_exog(std::mt19937_64& rng, int n, int k, double noise_sd) {
    std::uniform_real_distribution<double> coef(-0.9, 0.9), level(-5, 5);
    std::normal_distribution<double> noise(0.0, noise_sd);
    std::bernoulli_distribution flag(0.2);
    const double c = level(rng), phi = coef(rng);
    Eigen::VectorXd beta(k);
    for (int j = 0; j < k; ++j) beta(j) = level(rng);
    Synthetic s{std::vector<double>(static_cast<std::size_t>(n)), Eigen::MatrixXd(n, k)};
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < k; ++j) s.x(t, j) = j == 0 ? (flag(rng) ? 1.0 : 0.0) : level(rng);
    double prev = c / (1 - phi);
    for (int t = 0; t < n; ++t) {
        s.y[t] = c + phi * prev + s.x.row(t).dot(beta) + noise(rng);
        prev = s.y[t];
    }
    return s;
}

} // namespace

TEST(Arimax, MatchesNormalEquations) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = ar1_exog(rng, 120 + trial * 7, 1 + trial % 3, 1.0);
        const auto m = fit_arimax(s.y, s.x);
        const auto ref = oracles::normal_equations(s.y, s.x);
        EXPECT_NEAR(m.intercept, ref(0), 1e-8);
        EXPECT_NEAR(m.phi1(), ref(1), 1e-8);
        for (int j = 0; j < s.x.cols(); ++j) EXPECT_NEAR(m.beta(j), ref(2 + j), 1e-8);
    }
}

TEST(Arimax, NoiselessRecovery) {
    std::vector<double> y{1.0};
    for (int t = 1; t < 60; ++t) y.push_back(2 + 0.5 * y.back());
    // Converges to 4 quickly; keep the transient so the design has full rank.
    const auto m = fit_arimax(y, Eigen::MatrixXd(60, 0));
    EXPECT_NEAR(m.intercept, 2.0, 1e-6);
    EXPECT_NEAR(m.phi1(), 0.5, 1e-6);
    EXPECT_TRUE(m.stationary());
}

TEST(Arimax, HolidayBetaRecovered) {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution flag(0.15);
    const int n = 200;
    Eigen::MatrixXd x(n, 1);
    std::vector<double> y(n);
    for (int t = 0; t < n; ++t) {
        x(t, 0) = flag(rng) ? 1.0 : 0.0;
        y[t] = 3 + x(t, 0);
    }
    const auto m = fit_arimax(y, x);
    EXPECT_NEAR(m.beta(0), 1.0, 1e-6);
    EXPECT_NEAR(m.phi1(), 0.0, 1e-6);
    EXPECT_NEAR(m.intercept, 3.0, 1e-6);
}

TEST(Arimax, ConstantSeriesFitsExactly) {
    const std::vector<double> y(40, 7.0);
    const auto m = fit_arimax(y, Eigen::MatrixXd(40, 0));
    const auto fit = fitted_arimax(m, y, Eigen::MatrixXd(40, 0));
    for (int i = 0; i < fit.size(); ++i) EXPECT_NEAR(fit(i), 7.0, 1e-12);
    const auto fc = forecast_arimax(m, Eigen::MatrixXd(5, 0), 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(fc(i), 7.0, 1e-12);
}

TEST(Arimax, RecursiveForecastHandRecursion) {
    ArimaxModel m;
    m.intercept = 0.0;
    m.phi = {0.5};
    m.beta = Eigen::VectorXd(0);
    m.history = {8.0};
    const auto f = forecast_arimax(m, Eigen::MatrixXd(3, 0), 3);
    EXPECT_DOUBLE_EQ(f(0), 4.0);
    EXPECT_DOUBLE_EQ(f(1), 2.0);
    EXPECT_DOUBLE_EQ(f(2), 1.0);
}

TEST(Arimax, ZeroPhiIsPureRegression) {
    ArimaxModel m;
    m.intercept = 2.0;
    m.phi = {0.0};
    m.beta = Eigen::VectorXd::Constant(1, 3.0);
    m.history = {100.0};
    Eigen::MatrixXd x(4, 1);
    x << 1, 0, 1, 0;
    const auto f = forecast_arimax(m, x, 4);
    EXPECT_DOUBLE_EQ(f(0), 5.0);
    EXPECT_DOUBLE_EQ(f(1), 2.0);
    EXPECT_DOUBLE_EQ(f(2), 5.0);
    EXPECT_DOUBLE_EQ(f(3), 2.0);
}

TEST(Arimax, OneStepOnNoiselessSegmentIsExact) {
    std::mt19937_64 rng(17);
    auto s = ar1_exog(rng, 200, 2, 0.0);
    const std::vector<double> train(s.y.begin(), s.y.begin() + 150);
    const std::vector<double> test(s.y.begin() + 150, s.y.end());
    const auto m = fit_arimax(train, s.x.topRows(150));
    const auto f = forecast_arimax(m, s.x.bottomRows(50), 50, ArimaxForecastMode::OneStepWithActuals,
                                   std::span<const double>(test));
    for (int h = 0; h < 50; ++h) EXPECT_NEAR(f(h), test[h], 1e-6);
    try {
        forecast_arimax(m, s.x.bottomRows(50), 50, ArimaxForecastMode::OneStepWithActuals);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingActuals);
    }
}

TEST(Arimax, ResidualsOrthogonalToDesign) {
    std::mt19937_64 rng(23);
    const auto s = ar1_exog(rng, 300, 3, 2.0);
    const auto m = fit_arimax(s.y, s.x);
    const auto design = arimax_design(s.y, s.x, 1);
    const auto fit = fitted_arimax(m, s.y, s.x);
    Eigen::VectorXd resid(fit.size());
    for (int i = 0; i < fit.size(); ++i) resid(i) = s.y[i + 1] - fit(i);
    for (int c = 0; c < design.cols(); ++c) {
        const double scale = design.col(c).norm() * resid.norm();
        EXPECT_LE(std::abs(design.col(c).dot(resid)) / scale, 1e-6) << "column " << c;
    }
}

TEST(Arimax, RecursiveForecastBounded) {
    std::mt19937_64 rng(2);
    const auto s = ar1_exog(rng, 200, 1, 1.0);
    const auto m = fit_arimax(s.y, s.x);
    ASSERT_TRUE(m.stationary());
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5000, 1);
    const auto f = forecast_arimax(m, x, 5000);
    const double bound = std::abs(m.intercept + m.beta(0)) / (1 - std::abs(m.phi1())) + std::abs(m.history.back()) + 1;
    EXPECT_LE(f.cwiseAbs().maxCoeff(), bound);
}

TEST(Arimax, RejectsUnsupportedOrders) {
    ArimaxConfig cfg;
    cfg.d = 1;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.d = 0;
    cfg.p = 2;
    EXPECT_THROW(cfg.validate(), Error);
    cfg.allow_order_override = true;
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Arimax, SingularDesign) {
    std::vector<double> y(50);
    for (int t = 0; t < 50; ++t) y[t] = t % 3;
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(50, 1);  // duplicates the intercept
    try {
        fit_arimax(y, x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularDesign);
    }
}

TEST(Arimax, JsonRoundTrip) {
    std::mt19937_64 rng(6);
    const auto s = ar1_exog(rng, 100, 2, 1.0);
    const auto m = fit_arimax(s.y, s.x);
    const auto back = Json::parse(Json(m).dump()).get<ArimaxModel>();
    EXPECT_EQ(forecast_arimax(back, s.x, 10), forecast_arimax(m, s.x, 10));
}
