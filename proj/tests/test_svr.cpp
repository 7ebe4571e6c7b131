#include "demandcast/error.hpp"
#include "demandcast/serialize.hpp"
#include "demandcast/svr.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace demandcast;

namespace {

struct Instance {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Instance smooth_1d(int n) {
    Instance s{Eigen::MatrixXd(n, 1), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        s.x(i, 0) = -2.0 + 4.0 * i / (n - 1);
        s.y(i) = std::sin(1.5 * s.x(i, 0)) + 0.3 * s.x(i, 0);
    }
    return s;
}

} // namespace

TEST(SvrDual, MatchesBruteForceOnTinyInstances) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 24; ++trial) {
        const int n = 2 + trial % 5;
        Eigen::MatrixXd x(n, 2);
        std::vector<double> z(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            x(i, 0) = u(rng);
            x(i, 1) = u(rng);
            z[i] = u(rng);
        }
        const double C = trial % 2 ? 0.5 : 3.0, eps = trial % 3 ? 0.1 : 0.3;
        const Eigen::MatrixXd k = rbf_kernel(x, x, 0.7);
        const auto res = solve_svr_dual(k, z, C, eps, 1e-10, 100000);
        ASSERT_TRUE(res.converged);
        const double smo = svr_dual_objective(k, z, res.alpha, res.alpha_star, eps);
        const double ref = oracles::reference_dual(k, z, C, eps);
        EXPECT_NEAR(smo, ref, 1e-4) << "trial " << trial;
        EXPECT_GE(smo, ref - 1e-4);
    }
}

TEST(SvrDual, ObjectiveMonotoneAndConstraintsHeld) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    const int n = 80;
    Eigen::MatrixXd x(n, 3);
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = g(rng);
        z[i] = std::sin(x(i, 0)) + 0.2 * g(rng);
    }
    const Eigen::MatrixXd k = rbf_kernel(x, x, 1.0 / 3.0);
    const double C = 1.0;
    std::size_t updates = 0;
    double worst_box = 0.0, worst_eq = 0.0;
    double last_obj = -INFINITY;
    bool monotone = true;
    const std::vector<double> zc = z;
    auto observer = [&](const SmoState& s) {
        ++updates;
        double sum = 0.0;
        for (std::size_t i = 0; i < s.alpha.size(); ++i) {
            worst_box = std::max({worst_box, -s.alpha[i], s.alpha[i] - C, -s.alpha_star[i], s.alpha_star[i] - C});
            sum += s.alpha[i] - s.alpha_star[i];
        }
        worst_eq = std::max(worst_eq, std::abs(sum));
        const double obj = svr_dual_objective(k, zc, s.alpha, s.alpha_star, 0.1);
        if (obj < last_obj - 1e-12 * std::max(1.0, std::abs(last_obj))) monotone = false;
        last_obj = obj;
    };
    const auto res = solve_svr_dual(k, z, C, 0.1, 1e-3, 100000, observer);
    EXPECT_TRUE(res.converged);
    EXPECT_GT(updates, 0u);
    EXPECT_LE(worst_box, 1e-12);
    EXPECT_LE(worst_eq, 1e-9);
    EXPECT_TRUE(monotone);
    ASSERT_GE(res.objective_trace.size(), 2u);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
        EXPECT_GE(res.objective_trace[i], res.objective_trace[i - 1] - 1e-12);
}

TEST(Svr, ConvergedFitSatisfiesKkt) {
    const auto s = smooth_1d(20);
    SvrConfig cfg;
    cfg.rbf_gamma = 1.0;
    cfg.C = 10.0;
    const auto m = fit_svr(s.x, s.y, {"x"}, cfg);
    ASSERT_TRUE(m.converged);
    EXPECT_LE(kkt_violation(m, s.x, s.y), 1e-3);

    // Points off the support set sit inside the epsilon tube.
    const auto p = predict_svr(m, s.x);
    std::vector<bool> support(20, false);
    for (auto i : m.support_indices) support[i] = true;
    for (int i = 0; i < 20; ++i)
        if (!support[i]) EXPECT_LE(std::abs(s.y(i) - p(i)), (cfg.epsilon + 1e-3) * m.target_scale) << i;

    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
        EXPECT_GE(m.objective_trace[i], m.objective_trace[i - 1] - 1e-12);
}

TEST(Svr, PerturbedBiasViolatesKkt) {
    const auto s = smooth_1d(30);
    SvrConfig cfg;
    cfg.rbf_gamma = 1.0;
    auto m = fit_svr(s.x, s.y, {"x"}, cfg);
    ASSERT_LE(kkt_violation(m, s.x, s.y), cfg.smo_tolerance);
    m.bias += 0.5;
    EXPECT_GT(kkt_violation(m, s.x, s.y), cfg.smo_tolerance);
}

TEST(Svr, ConstantTarget) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(25, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(25, 42.0);
    const auto m = fit_svr(x, y, {"a", "b"});
    EXPECT_TRUE(m.degenerate_target);
    EXPECT_TRUE(m.dual_coeffs.empty());
    EXPECT_EQ(kkt_violation(m, x, y), 0.0);
    const auto p = predict_svr(m, Eigen::MatrixXd::Random(5, 2));
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(p(i), 42.0);
}

TEST(Svr, IterationCapReported) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0, 1);
    Eigen::MatrixXd x(200, 2);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        x(i, 0) = g(rng);
        x(i, 1) = g(rng);
        y(i) = x(i, 0) * x(i, 1) + g(rng);
    }
    SvrConfig cfg;
    cfg.max_passes = 1;
    cfg.C = 100.0;
    cfg.smo_tolerance = 1e-9;
    const auto m = fit_svr(x, y, {"a", "b"}, cfg);
    EXPECT_FALSE(m.converged);
    EXPECT_LE(m.iterations, 200u);
    EXPECT_GT(m.final_violation, cfg.smo_tolerance);
}

TEST(Svr, KeepsMostRecentRows) {
    const auto s = smooth_1d(50);
    SvrConfig cfg;
    cfg.max_train_rows = 20;
    const auto m = fit_svr(s.x, s.y, {"x"}, cfg);
    EXPECT_EQ(m.train_rows_used, 20u);
    EXPECT_LE(kkt_violation(m, s.x, s.y), 1e-3);
}

TEST(Svr, JsonRoundTrip) {
    const auto s = smooth_1d(25);
    const auto m = fit_svr(s.x, s.y, {"x"});
    const auto back = Json::parse(Json(m).dump()).get<SvrModel>();
    EXPECT_EQ(predict_svr(back, s.x), predict_svr(m, s.x));
}
