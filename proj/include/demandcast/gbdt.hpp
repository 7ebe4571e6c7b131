#pragma once

#include "demandcast/features.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace demandcast {

struct GbdtConfig {
    int n_trees = 100;
    double learning_rate = 0.1;
    double l2_lambda = 0.1;
    int max_depth = 6;
    int min_child_rows = 1;
    /// A split is accepted only when its gain exceeds this value.
    double gamma = 0.0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;
    double gain = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

/// Binary regression tree; rows with x[feature] < threshold go left.
struct RegressionTree {
    std::vector<TreeNode> nodes;

    template <typename Row>
    double predict(const Row& x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x(n.feature) < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].weight;
    }

    int depth() const;
    std::size_t split_count() const;
};

struct GbdtModel {
    GbdtConfig config;
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    std::vector<std::string> feature_names;
    std::vector<double> gain_totals;
    /// Set when the training target was constant; every tree is a zero leaf.
    bool degenerate_target = false;
};

/// Squared-error gradient boosting with exact greedy, level-wise splitting.
///
/// Each row has unit hessian, so a leaf holding residuals r gets weight
/// sum(r) / (n + lambda), and a split scores
/// 0.5 * [G_L^2/(n_L+lambda) + G_R^2/(n_R+lambda) - G^2/(n+lambda)].
/// Candidate thresholds are midpoints of consecutive distinct values; ties
/// go to the lowest feature index, then the lowest threshold.
GbdtModel fit_gbdt(const FeatureMatrix& m, const GbdtConfig& cfg = {});
GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                   const GbdtConfig& cfg = {});

/// `tree_limit` applies only the first k trees.
Eigen::VectorXd predict_gbdt(const GbdtModel& model, const FeatureMatrix& m,
                             std::optional<std::size_t> tree_limit = std::nullopt);
Eigen::VectorXd predict_gbdt(const GbdtModel& model, const Eigen::MatrixXd& x,
                             std::optional<std::size_t> tree_limit = std::nullopt);

struct FeatureScore {
    std::string feature;
    double score = 0.0;
};

/// Total split gain per feature, normalized to sum to one, descending; ties
/// ordered by feature name. Throws NoSplits when no tree ever split.
std::vector<FeatureScore> feature_importance(const GbdtModel& model);

/// Pools gain totals of several models over the same feature names.
std::vector<FeatureScore> feature_importance(const std::vector<const GbdtModel*>& models);

} // namespace demandcast
