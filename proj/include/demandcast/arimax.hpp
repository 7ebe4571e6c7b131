#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace demandcast {

struct ArimaxConfig {
    int p = 1;
    int d = 0;
    int q = 0;
    /// Permits AR orders other than 1 (differencing and MA terms are never supported).
    bool allow_order_override = false;
    std::vector<std::string> exogenous_columns;

    void validate() const;
};

/// y_t = c + sum_k phi_k * y_{t-k} + beta' x_t + e_t
struct ArimaxModel {
    ArimaxConfig config;
    double intercept = 0.0;
    std::vector<double> phi;
    Eigen::VectorXd beta;
    std::vector<std::string> exogenous_names;
    double sigma2 = 0.0;
    /// The last p training observations, oldest first.
    std::vector<double> history;
    std::size_t n_obs = 0;

    double phi1() const { return phi.empty() ? 0.0 : phi.front(); }
    double last_train_value() const { return history.empty() ? 0.0 : history.back(); }
    bool stationary() const;
};

/// Conditional least squares. With q = 0 and d = 0 this is exactly OLS of y_t
/// on [1, y_{t-1..t-p}, x_t] for t >= p, solved by column-pivoted QR.
/// Throws SingularDesign for a rank-deficient design; a constant series is
/// fitted as intercept-only with zero residuals.
ArimaxModel fit_arimax(std::span<const double> y, const Eigen::MatrixXd& exog, const ArimaxConfig& cfg = {});

enum class ArimaxForecastMode { Recursive, OneStepWithActuals };

/// Recursive feeds its own predictions back into the AR term, seeded with
/// the training history. OneStepWithActuals uses the observed previous value
/// (`actuals` covers the forecast window) and throws MissingActuals without it.
Eigen::VectorXd forecast_arimax(const ArimaxModel& model, const Eigen::MatrixXd& exog_future, std::size_t horizon,
                                ArimaxForecastMode mode = ArimaxForecastMode::Recursive,
                                std::optional<std::span<const double>> actuals = std::nullopt);

/// In-sample one-step fitted values for t >= p.
Eigen::VectorXd fitted_arimax(const ArimaxModel& model, std::span<const double> y, const Eigen::MatrixXd& exog);

/// The lag-augmented design used by the fit, exposed for audits.
Eigen::MatrixXd arimax_design(std::span<const double> y, const Eigen::MatrixXd& exog, int p);

} // namespace demandcast
