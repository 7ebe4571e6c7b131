#pragma once

#include "demandcast/features.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace demandcast {

struct SvrConfig {
    double C = 1.0;
    double epsilon = 0.1;
    /// Defaults to 1 / (number of features).
    std::optional<double> rbf_gamma;
    double smo_tolerance = 1e-3;
    /// Iteration cap, in units of the training-row count.
    int max_passes = 1000;
    /// Only the most recent rows are kept when training data exceeds this.
    std::size_t max_train_rows = 2000;
    bool standardize_target = true;

    void validate() const;
};

/// State handed to an SmoObserver after each pair update.
struct SmoState {
    std::span<const double> alpha;
    std::span<const double> alpha_star;
    std::size_t iteration = 0;
};
using SmoObserver = std::function<void(const SmoState&)>;

struct SmoResult {
    std::vector<double> alpha;
    std::vector<double> alpha_star;
    double bias = 0.0;
    /// Dual objective (maximization form) at the start and after every sweep
    /// of n pair updates, plus the final value.
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
    /// m(alpha) - M(alpha) at termination.
    double max_violation = 0.0;
};

/// Epsilon-SVR dual over a precomputed kernel, solved by SMO with
/// second-order working-set selection:
///   max  -1/2 (a - a*)' K (a - a*) - eps * sum(a + a*) + z' (a - a*)
///   s.t. sum(a - a*) = 0,  0 <= a, a* <= C.
SmoResult solve_svr_dual(const Eigen::MatrixXd& kernel, std::span<const double> z, double C, double epsilon,
                         double tolerance, std::size_t max_iterations, const SmoObserver& observer = {});

/// Dual objective for given multipliers.
double svr_dual_objective(const Eigen::MatrixXd& kernel, std::span<const double> z, std::span<const double> alpha,
                          std::span<const double> alpha_star, double epsilon);

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

struct SvrModel {
    SvrConfig config;
    double gamma = 1.0;
    std::vector<std::string> feature_names;
    /// Standardized feature rows with non-zero dual coefficient.
    Eigen::MatrixXd support_vectors;
    std::vector<double> dual_coeffs;  // alpha - alpha*, one per support vector
    /// Position of each support vector among the training rows used.
    std::vector<std::size_t> support_indices;
    double bias = 0.0;                // standardized target scale
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_scale;
    double target_mean = 0.0;
    double target_scale = 1.0;

    bool converged = true;
    bool degenerate_target = false;
    std::size_t iterations = 0;
    std::size_t train_rows_used = 0;
    double final_violation = 0.0;
    std::vector<double> objective_trace;
};

SvrModel fit_svr(const FeatureMatrix& m, const SvrConfig& cfg = {});
SvrModel fit_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> feature_names,
                 const SvrConfig& cfg = {});

Eigen::VectorXd predict_svr(const SvrModel& model, const FeatureMatrix& m);
Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::MatrixXd& x);

/// Largest KKT violation over training rows, on the standardized target
/// scale, reconstructing alpha / alpha* from the signed dual coefficients.
/// `x` and `y` must be the rows the model was trained on.
double kkt_violation(const SvrModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
double kkt_violation(const SvrModel& model, const FeatureMatrix& m);

} // namespace demandcast
