#include "demandcast/error.hpp"
#include "demandcast/gbdt.hpp"
#include "demandcast/serialize.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <set>

using namespace demandcast;

namespace {

using oracles::RefNode;
using oracles::ref_grow;

void expect_same_tree(const RegressionTree& tree, int id, const RefNode& ref) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    ASSERT_EQ(node.feature, ref.feature);
    if (ref.feature < 0) {
        EXPECT_NEAR(node.weight, ref.weight, 1e-12 * std::max(1.0, std::abs(ref.weight)));
        return;
    }
    EXPECT_EQ(node.threshold, ref.threshold);
    expect_same_tree(tree, node.left, *ref.left);
    expect_same_tree(tree, node.right, *ref.right);
}

struct Fixture {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Fixture random_fixture(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rows(2, 32), cols(1, 2), coarse(0, 1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const int n = rows(rng), p = cols(rng);
    Fixture fx{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    for (int j = 0; j < p; ++j) {
        // Some columns are integer-valued so duplicate feature values occur.
        const bool discrete = coarse(rng) == 1;
        for (int i = 0; i < n; ++i) fx.x(i, j) = discrete ? std::floor(u(rng)) : u(rng);
    }
    for (int i = 0; i < n; ++i) fx.y(i) = u(rng) + 2.0 * fx.x(i, 0);
    return fx;
}

std::vector<std::string> names(int p) {
    std::vector<std::string> out;
    for (int j = 0; j < p; ++j) out.push_back("f" + std::to_string(j));
    return out;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).squaredNorm() / double(a.size()); }

} // namespace

TEST(Gbdt, EightRowOracle) {
    Eigen::MatrixXd x(8, 1);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) {
        x(i, 0) = i < 4 ? 0.0 : 1.0;
        y(i) = i < 4 ? 0.0 : 10.0;
    }
    GbdtConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 1;
    cfg.l2_lambda = 0.0;
    cfg.learning_rate = 1.0;
    const auto m = fit_gbdt(x, y, {"x"}, cfg);
    EXPECT_DOUBLE_EQ(m.base_score, 5.0);
    ASSERT_EQ(m.trees.size(), 1u);
    const auto& root = m.trees[0].nodes[0];
    EXPECT_EQ(root.feature, 0);
    EXPECT_DOUBLE_EQ(root.threshold, 0.5);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[static_cast<std::size_t>(root.left)].weight, -5.0);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[static_cast<std::size_t>(root.right)].weight, 5.0);
    const auto p = predict_gbdt(m, x);
    for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(p(i), y(i));

    cfg.l2_lambda = 0.1;
    const auto r = fit_gbdt(x, y, {"x"}, cfg);
    const auto& rr = r.trees[0].nodes[0];
    EXPECT_NEAR(r.trees[0].nodes[static_cast<std::size_t>(rr.left)].weight, -20.0 / 4.1, 1e-9);
    EXPECT_NEAR(r.trees[0].nodes[static_cast<std::size_t>(rr.right)].weight, 20.0 / 4.1, 1e-9);

    const auto imp = feature_importance(m);
    ASSERT_EQ(imp.size(), 1u);
    EXPECT_EQ(imp[0].feature, "x");
    EXPECT_DOUBLE_EQ(imp[0].score, 1.0);
}

TEST(Gbdt, GreedySplitsMatchExhaustiveEnumeration) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto fx = random_fixture(rng);
        GbdtConfig cfg;
        cfg.n_trees = 1;
        cfg.max_depth = 1 + trial % 2;
        cfg.l2_lambda = trial % 3 == 0 ? 0.0 : 0.1 * (trial % 3);
        cfg.learning_rate = 1.0;
        const auto m = fit_gbdt(fx.x, fx.y, names(int(fx.x.cols())), cfg);
        std::vector<double> r(static_cast<std::size_t>(fx.y.size()));
        for (int i = 0; i < fx.y.size(); ++i) r[i] = fx.y(i) - m.base_score;
        std::vector<int> rows(r.size());
        std::iota(rows.begin(), rows.end(), 0);
        const auto ref = ref_grow(fx.x, r, rows, 0, cfg.max_depth, cfg.l2_lambda);
        SCOPED_TRACE("trial " + std::to_string(trial));
        expect_same_tree(m.trees[0], 0, *ref);
        EXPECT_LE(m.trees[0].depth(), cfg.max_depth);
    }
}

TEST(Gbdt, ConstantTargetPredictsConstant) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 3.25);
    const auto m = fit_gbdt(x, y, names(2));
    EXPECT_TRUE(m.degenerate_target);
    const auto p = predict_gbdt(m, Eigen::MatrixXd::Random(7, 2));
    for (int i = 0; i < p.size(); ++i) EXPECT_EQ(p(i), 3.25);
    try {
        feature_importance(m);
        FAIL() << "expected NoSplits";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoSplits);
    }
}

TEST(Gbdt, EmptyEnsemblePredictsBaseScore) {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 1, 2, 6;
    GbdtConfig cfg;
    cfg.n_trees = 0;
    const auto m = fit_gbdt(x, y, {"x"}, cfg);
    const auto p = predict_gbdt(m, x);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p(i), 3.0);
}

TEST(Gbdt, TrainingErrorNonIncreasingInTrees) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd x(200, 3);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = noise(rng);
        y(i) = std::sin(x(i, 0)) * 3 + x(i, 1) * x(i, 2) + noise(rng);
    }
    for (double eta : {0.1, 0.5, 1.0})
        for (double lambda : {0.0, 1.0}) {
            GbdtConfig cfg;
            cfg.n_trees = 40;
            cfg.learning_rate = eta;
            cfg.l2_lambda = lambda;
            cfg.max_depth = 3;
            const auto m = fit_gbdt(x, y, names(3), cfg);
            double prev = mse(predict_gbdt(m, x, 0), y);
            for (std::size_t k = 1; k <= m.trees.size(); ++k) {
                const double cur = mse(predict_gbdt(m, x, k), y);
                ASSERT_LE(cur, prev * (1 + 1e-12)) << "eta=" << eta << " lambda=" << lambda << " k=" << k;
                prev = cur;
            }
        }
}

TEST(Gbdt, DeterministicAndRowOrderInvariant) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd x(150, 2);
    Eigen::VectorXd y(150);
    for (int i = 0; i < 150; ++i) {
        x(i, 0) = u(rng);
        x(i, 1) = u(rng);
        y(i) = 10 * x(i, 0) + (x(i, 1) > 0.5 ? 4 : 0) + u(rng);
    }
    GbdtConfig cfg;
    cfg.n_trees = 20;
    cfg.max_depth = 3;
    const auto a = fit_gbdt(x, y, names(2), cfg);
    const auto b = fit_gbdt(x, y, names(2), cfg);
    EXPECT_EQ(predict_gbdt(a, x), predict_gbdt(b, x));

    std::vector<int> perm(150);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(150, 2);
    Eigen::VectorXd yp(150);
    for (int i = 0; i < 150; ++i) {
        xp.row(i) = x.row(perm[i]);
        yp(i) = y(perm[i]);
    }
    const auto c = fit_gbdt(xp, yp, names(2), cfg);
    const auto pa = predict_gbdt(a, x), pc = predict_gbdt(c, x);
    for (int i = 0; i < 150; ++i) EXPECT_NEAR(pa(i), pc(i), 1e-9);
}

TEST(Gbdt, SchemaMismatch) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Random(10);
    const auto m = fit_gbdt(x, y, names(2));
    try {
        predict_gbdt(m, Eigen::MatrixXd::Random(3, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
    }
    try {
        fit_gbdt(x, y, names(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
    }
}

TEST(Gbdt, ImportanceSumsToOneAndPools) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd x(100, 3);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = u(rng);
        y(i) = 8 * x(i, 2) + x(i, 0);
    }
    const auto m = fit_gbdt(x, y, names(3));
    const auto imp = feature_importance(m);
    double total = 0;
    for (const auto& s : imp) total += s.score;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(imp.front().feature, "f2");
    for (std::size_t i = 1; i < imp.size(); ++i) EXPECT_GE(imp[i - 1].score, imp[i].score);

    const auto pooled = feature_importance(std::vector<const GbdtModel*>{&m, &m});
    for (std::size_t i = 0; i < imp.size(); ++i) EXPECT_NEAR(pooled[i].score, imp[i].score, 1e-12);
}

TEST(Gbdt, JsonRoundTrip) {
    std::mt19937_64 rng(1);
    const auto fx = random_fixture(rng);
    GbdtConfig cfg;
    cfg.n_trees = 5;
    const auto m = fit_gbdt(fx.x, fx.y, names(int(fx.x.cols())), cfg);
    const Json j = m;
    const auto back = Json::parse(j.dump()).get<GbdtModel>();
    EXPECT_EQ(predict_gbdt(back, fx.x), predict_gbdt(m, fx.x));
    EXPECT_EQ(back.feature_names, m.feature_names);
}
