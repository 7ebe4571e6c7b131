#pragma once

// Reference implementations shared by the unit tests and the acceptance run.
// Each one is written independently of the library code it checks.

#include "demandcast/metrics.hpp"
#include "demandcast/svr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <vector>

namespace oracles {

using demandcast::Metrics;

// Straightforward two-pass reference.
inline Metrics brute_metrics(const std::vector<double>& y, const std::vector<double>& p) {
    const double n = static_cast<double>(y.size());
    double abs_sum = 0, sq_sum = 0, mean = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        abs_sum += std::abs(y[i] - p[i]);
        sq_sum += (y[i] - p[i]) * (y[i] - p[i]);
        mean += y[i];
    }
    mean /= n;
    double tot = 0;
    for (double v : y) tot += (v - mean) * (v - mean);
    Metrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (tot > 0) m.r2 = 1 - sq_sum / tot;
    m.n = y.size();
    return m;
}

// Independent oracle: solve (X'X) b = X'y with an LDLT factorization on a design
// assembled here from scratch.
inline Eigen::VectorXd normal_equations(const std::vector<double>& y, const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(y.size());
    Eigen::MatrixXd d(n - 1, 2 + x.cols());
    Eigen::VectorXd target(n - 1);
    for (int t = 1; t < n; ++t) {
        d(t - 1, 0) = 1.0;
        d(t - 1, 1) = y[t - 1];
        for (int j = 0; j < x.cols(); ++j) d(t - 1, 2 + j) = x(t, j);
        target(t - 1) = y[t];
    }
    return (d.transpose() * d).ldlt().solve(d.transpose() * target);
}

// Exhaustive reference tree: every (feature, midpoint) pair is scored from
// scratch at every node.
struct RefNode {
    int feature = -1;
    double threshold = 0.0;
    double weight = 0.0;
    std::unique_ptr<RefNode> left, right;
};

inline std::unique_ptr<RefNode> ref_grow(const Eigen::MatrixXd& x, const std::vector<double>& r, const std::vector<int>& rows,
                                  int depth, int max_depth, double lambda) {
    auto node = std::make_unique<RefNode>();
    double g = 0.0, sq = 0.0;
    for (int i : rows) {
        g += r[i];
        sq += r[i] * r[i];
    }
    const double n = static_cast<double>(rows.size());
    node->weight = g / (n + lambda);
    if (depth >= max_depth) return node;

    double best_gain = 0.0;
    int best_f = -1;
    double best_thr = 0.0;
    for (int f = 0; f < x.cols(); ++f) {
        std::set<double> values;
        for (int i : rows) values.insert(x(i, f));
        for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
            const double thr = 0.5 * (*it + *std::next(it));
            double gl = 0.0;
            double nl = 0.0;
            for (int i : rows)
                if (x(i, f) < thr) {
                    gl += r[i];
                    nl += 1.0;
                }
            const double gr = g - gl, nr = n - nl;
            const double gain =
                0.5 * (gl * gl / (nl + lambda) + gr * gr / (nr + lambda) - g * g / (n + lambda));
            if (gain > best_gain + 1e-12 * std::max(1.0, std::abs(best_gain))) {
                best_gain = gain;
                best_f = f;
                best_thr = thr;
            }
        }
    }
    if (best_f < 0 || !(best_gain > 1e-12 * sq)) return node;
    node->feature = best_f;
    node->threshold = best_thr;
    std::vector<int> lrows, rrows;
    for (int i : rows) (x(i, best_f) < best_thr ? lrows : rrows).push_back(i);
    node->left = ref_grow(x, r, lrows, depth + 1, max_depth, lambda);
    node->right = ref_grow(x, r, rrows, depth + 1, max_depth, lambda);
    return node;
}

// Exhaustive oracle: each theta_i = alpha_i - alpha*_i is pinned at -C, 0 or C,
// or free with a fixed sign. For every pattern the equality-constrained
// stationary point is solved directly; the best feasible value is the optimum.
inline double reference_dual(const Eigen::MatrixXd& k, const std::vector<double>& z, double C, double eps) {
    const int n = static_cast<int>(z.size());
    int patterns = 1;
    for (int i = 0; i < n; ++i) patterns *= 5;
    double best = -INFINITY;
    for (int code = 0; code < patterns; ++code) {
        std::vector<int> state(n);  // 0:-C 1:free- 2:zero 3:free+ 4:+C
        for (int i = 0, c = code; i < n; ++i, c /= 5) state[i] = c % 5;
        std::vector<int> free;
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (state[i] == 0) theta(i) = -C;
            if (state[i] == 4) theta(i) = C;
            if (state[i] == 1 || state[i] == 3) free.push_back(i);
        }
        const int f = static_cast<int>(free.size());
        if (f == 0) {
            if (std::abs(theta.sum()) > 1e-12) continue;
        } else {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd b(f + 1);
            for (int r = 0; r < f; ++r) {
                const int i = free[r];
                for (int c = 0; c < f; ++c) a(r, c) = k(i, free[c]);
                a(r, f) = 1.0;
                a(f, r) = 1.0;
                const double s = state[i] == 3 ? 1.0 : -1.0;
                b(r) = z[i] - eps * s - k.row(i).dot(theta);
            }
            b(f) = -theta.sum();
            const Eigen::VectorXd sol = a.completeOrthogonalDecomposition().solve(b);
            if ((a * sol - b).cwiseAbs().maxCoeff() > 1e-9) continue;
            bool ok = true;
            for (int r = 0; r < f; ++r) {
                const double v = sol(r);
                if (state[free[r]] == 3) ok = ok && v >= -1e-12 && v <= C + 1e-12;
                else ok = ok && v <= 1e-12 && v >= -C - 1e-12;
                theta(free[r]) = std::clamp(v, -C, C);
            }
            if (!ok || std::abs(theta.sum()) > 1e-9) continue;
        }
        std::vector<double> al(n), as(n);
        for (int i = 0; i < n; ++i) {
            al[i] = std::max(theta(i), 0.0);
            as[i] = std::max(-theta(i), 0.0);
        }
        best = std::max(best, demandcast::svr_dual_objective(k, z, al, as, eps));
    }
    return best;
}

} // namespace oracles
