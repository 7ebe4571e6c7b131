#include "demandcast/gbdt.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace demandcast {

void GbdtConfig::validate() const {
    if (n_trees < 0) throw Error(ErrorCode::InvalidConfig, "n_trees must be non-negative");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "learning_rate must lie in (0, 1]");
    if (!(l2_lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "l2_lambda must be non-negative");
    if (max_depth < 1) throw Error(ErrorCode::InvalidConfig, "max_depth must be positive");
    if (min_child_rows < 1) throw Error(ErrorCode::InvalidConfig, "min_child_rows must be positive");
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.is_leaf()) continue;
        level[static_cast<std::size_t>(n.left)] = level[i] + 1;
        level[static_cast<std::size_t>(n.right)] = level[i] + 1;
        deepest = std::max(deepest, level[i] + 1);
    }
    return deepest;
}

std::size_t RegressionTree::split_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

namespace {

struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct NodeStats {
    double grad_sum = 0.0;
    double sq_sum = 0.0;
    std::size_t count = 0;
};

double score(double g, std::size_t n, double lambda) { return g * g / (static_cast<double>(n) + lambda); }

RegressionTree grow_tree(const Eigen::MatrixXd& x, const std::vector<double>& residual,
                         const std::vector<std::vector<int>>& order, const GbdtConfig& cfg,
                         std::vector<double>& gain_totals) {
    const std::size_t n = residual.size();
    const std::size_t n_features = static_cast<std::size_t>(x.cols());
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, 0);
    std::vector<int> active{0};

    for (int depth = 0; depth < cfg.max_depth && !active.empty(); ++depth) {
        std::vector<int> slot(tree.nodes.size(), -1);
        for (std::size_t k = 0; k < active.size(); ++k) slot[static_cast<std::size_t>(active[k])] = static_cast<int>(k);

        std::vector<NodeStats> stats(active.size());
        for (std::size_t i = 0; i < n; ++i) {
            const int s = slot[static_cast<std::size_t>(node_of[i])];
            if (s < 0) continue;
            auto& st = stats[static_cast<std::size_t>(s)];
            st.grad_sum += residual[i];
            st.sq_sum += residual[i] * residual[i];
            ++st.count;
        }

        std::vector<Candidate> best(active.size());
        std::vector<double> left_sum(active.size());
        std::vector<std::size_t> left_count(active.size());
        std::vector<double> prev(active.size());
        std::vector<bool> has_prev(active.size());
        for (std::size_t f = 0; f < n_features; ++f) {
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_count.begin(), left_count.end(), 0);
            std::fill(has_prev.begin(), has_prev.end(), false);
            for (int row : order[f]) {
                const int s = slot[static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)])];
                if (s < 0) continue;
                const auto k = static_cast<std::size_t>(s);
                const double v = x(row, static_cast<Eigen::Index>(f));
                if (has_prev[k] && v > prev[k]) {
                    const auto& st = stats[k];
                    const std::size_t nl = left_count[k], nr = st.count - nl;
                    if (nl >= static_cast<std::size_t>(cfg.min_child_rows) &&
                        nr >= static_cast<std::size_t>(cfg.min_child_rows)) {
                        const double gl = left_sum[k], gr = st.grad_sum - gl;
                        const double gain = 0.5 * (score(gl, nl, cfg.l2_lambda) + score(gr, nr, cfg.l2_lambda) -
                                                   score(st.grad_sum, st.count, cfg.l2_lambda));
                        // Near-ties go to the earlier feature and lower threshold.
                        if (gain > best[k].gain + 1e-12 * std::max(1.0, std::abs(best[k].gain))) {
                            double thr = 0.5 * (prev[k] + v);
                            if (!(thr > prev[k])) thr = v;
                            best[k] = {gain, static_cast<int>(f), thr};
                        }
                    }
                }
                left_sum[k] += residual[static_cast<std::size_t>(row)];
                ++left_count[k];
                prev[k] = v;
                has_prev[k] = true;
            }
        }

        std::vector<int> next_active;
        std::vector<int> split_slot(active.size(), -1);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const auto& c = best[k];
            // Ignore gains at round-off level relative to the node's residual energy.
            const double floor = 1e-12 * stats[k].sq_sum;
            if (c.feature < 0 || !(c.gain > cfg.gamma) || !(c.gain > floor)) continue;
            const int id = active[k];
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(id)];
            node.feature = c.feature;
            node.threshold = c.threshold;
            node.left = left;
            node.right = left + 1;
            node.gain = c.gain;
            gain_totals[static_cast<std::size_t>(c.feature)] += c.gain;
            next_active.push_back(left);
            next_active.push_back(left + 1);
            split_slot[k] = id;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int s = slot[static_cast<std::size_t>(node_of[i])];
            if (s < 0 || split_slot[static_cast<std::size_t>(s)] < 0) continue;
            const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
            node_of[i] = x(static_cast<Eigen::Index>(i), node.feature) < node.threshold ? node.left : node.right;
        }
        active = std::move(next_active);
    }

    std::vector<double> sums(tree.nodes.size(), 0.0);
    std::vector<std::size_t> counts(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        sums[static_cast<std::size_t>(node_of[i])] += residual[i];
        ++counts[static_cast<std::size_t>(node_of[i])];
    }
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        auto& node = tree.nodes[id];
        if (!node.is_leaf()) continue;
        const double denom = static_cast<double>(counts[id]) + cfg.l2_lambda;
        node.weight = denom > 0.0 ? sums[id] / denom : 0.0;
    }
    return tree;
}

} // namespace

GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                   const GbdtConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "GBDT needs at least one training row");
    if (static_cast<std::size_t>(y.size()) != n)
        throw Error(ErrorCode::InvalidArgument, "GBDT target length differs from row count");
    if (feature_names.size() != static_cast<std::size_t>(x.cols()))
        throw Error(ErrorCode::SchemaMismatch, "feature names do not match matrix columns");
    if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidArgument, "GBDT input is not finite");

    GbdtModel model;
    model.config = cfg;
    model.feature_names = std::move(feature_names);
    model.gain_totals.assign(model.feature_names.size(), 0.0);
    model.base_score = y.mean();

    if (y.maxCoeff() == y.minCoeff()) {
        model.base_score = y(0);
        model.degenerate_target = true;
        model.trees.assign(static_cast<std::size_t>(cfg.n_trees), RegressionTree{{TreeNode{}}});
        return model;
    }

    std::vector<std::vector<int>> order(static_cast<std::size_t>(x.cols()));
    for (std::size_t f = 0; f < order.size(); ++f) {
        auto& o = order[f];
        o.resize(n);
        std::iota(o.begin(), o.end(), 0);
        const auto col = x.col(static_cast<Eigen::Index>(f));
        std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return col(a) < col(b); });
    }

    std::vector<double> pred(n, model.base_score), residual(n);
    model.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
    for (int t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y(static_cast<Eigen::Index>(i)) - pred[i];
        RegressionTree tree = grow_tree(x, residual, order, cfg, model.gain_totals);
        for (std::size_t i = 0; i < n; ++i)
            pred[i] += cfg.learning_rate * tree.predict(x.row(static_cast<Eigen::Index>(i)));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

GbdtModel fit_gbdt(const FeatureMatrix& m, const GbdtConfig& cfg) {
    return fit_gbdt(m.values, m.target, m.columns, cfg);
}

Eigen::VectorXd predict_gbdt(const GbdtModel& model, const Eigen::MatrixXd& x, std::optional<std::size_t> tree_limit) {
    if (static_cast<std::size_t>(x.cols()) != model.feature_names.size())
        throw Error(ErrorCode::SchemaMismatch, "prediction matrix has the wrong number of columns");
    const std::size_t k = std::min(tree_limit.value_or(model.trees.size()), model.trees.size());
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), model.base_score);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += model.trees[t].predict(x.row(i));
        out(i) += model.config.learning_rate * acc;
    }
    return out;
}

Eigen::VectorXd predict_gbdt(const GbdtModel& model, const FeatureMatrix& m, std::optional<std::size_t> tree_limit) {
    if (m.columns != model.feature_names)
        throw Error(ErrorCode::SchemaMismatch, "prediction columns differ from the training columns");
    return predict_gbdt(model, m.values, tree_limit);
}

std::vector<FeatureScore> feature_importance(const std::vector<const GbdtModel*>& models) {
    if (models.empty()) throw Error(ErrorCode::NoSplits, "no models to rank");
    const auto& names = models.front()->feature_names;
    std::vector<double> gains(names.size(), 0.0);
    for (const auto* m : models) {
        if (m->feature_names != names)
            throw Error(ErrorCode::SchemaMismatch, "models disagree on feature names");
        for (std::size_t f = 0; f < names.size(); ++f) gains[f] += m->gain_totals[f];
    }
    const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
    if (!(total > 0.0)) throw Error(ErrorCode::NoSplits, "no tree contains a split");
    std::vector<FeatureScore> out;
    for (std::size_t f = 0; f < names.size(); ++f) out.push_back({names[f], gains[f] / total});
    std::stable_sort(out.begin(), out.end(), [](const FeatureScore& a, const FeatureScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.feature < b.feature;
    });
    return out;
}

std::vector<FeatureScore> feature_importance(const GbdtModel& model) { return feature_importance({&model}); }

} // namespace demandcast
