#include "demandcast/arimax.hpp"

#include "demandcast/error.hpp"

#include <cmath>

namespace demandcast {

void ArimaxConfig::validate() const {
    if (d != 0 || q != 0)
        throw Error(ErrorCode::InvalidConfig, "only d = 0 and q = 0 are supported");
    if (p < 0) throw Error(ErrorCode::InvalidConfig, "AR order must be non-negative");
    if (p != 1 && !allow_order_override)
        throw Error(ErrorCode::InvalidConfig, "AR order other than 1 requires allow_order_override");
}

bool ArimaxModel::stationary() const {
    // Sufficient condition; exact for p = 1.
    double s = 0.0;
    for (double c : phi) s += std::abs(c);
    return s < 1.0;
}

Eigen::MatrixXd arimax_design(std::span<const double> y, const Eigen::MatrixXd& exog, int p) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index rows = n - p;
    Eigen::MatrixXd design(rows, 1 + p + exog.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = r + p;
        design(r, 0) = 1.0;
        for (int k = 1; k <= p; ++k) design(r, k) = y[static_cast<std::size_t>(t - k)];
        design.block(r, 1 + p, 1, exog.cols()) = exog.row(t);
    }
    return design;
}

ArimaxModel fit_arimax(std::span<const double> y, const Eigen::MatrixXd& exog, const ArimaxConfig& cfg) {
    cfg.validate();
    const std::size_t n = y.size();
    const std::size_t k = 1 + static_cast<std::size_t>(cfg.p) + static_cast<std::size_t>(exog.cols());
    if (static_cast<std::size_t>(exog.rows()) != n)
        throw Error(ErrorCode::InvalidArgument, "exogenous matrix is not row-aligned with the series");
    if (n < k + 2)
        throw Error(ErrorCode::InvalidArgument, "series too short for " + std::to_string(k) + " parameters");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "series contains non-finite values");
    if (!exog.allFinite()) throw Error(ErrorCode::InvalidArgument, "exogenous matrix contains non-finite values");

    ArimaxModel model;
    model.config = cfg;
    model.exogenous_names = cfg.exogenous_columns;
    if (!model.exogenous_names.empty() && model.exogenous_names.size() != static_cast<std::size_t>(exog.cols()))
        throw Error(ErrorCode::SchemaMismatch, "exogenous names do not match matrix columns");
    if (model.exogenous_names.empty())
        for (Eigen::Index j = 0; j < exog.cols(); ++j) model.exogenous_names.push_back("x" + std::to_string(j));
    model.history.assign(y.end() - cfg.p, y.end());
    model.n_obs = n - static_cast<std::size_t>(cfg.p);

    bool constant = true;
    for (double v : y) constant = constant && v == y.front();
    if (constant && exog.cols() == 0) {
        model.intercept = y.front();
        model.phi.assign(static_cast<std::size_t>(cfg.p), 0.0);
        model.beta = Eigen::VectorXd::Zero(0);
        return model;
    }

    const Eigen::MatrixXd design = arimax_design(y, exog, cfg.p);
    Eigen::VectorXd target(design.rows());
    for (Eigen::Index r = 0; r < design.rows(); ++r) target(r) = y[static_cast<std::size_t>(r + cfg.p)];

    if (constant) {
        // Lag columns duplicate the intercept; the exogenous part must still be identifiable.
        Eigen::MatrixXd reduced(design.rows(), 1 + exog.cols());
        reduced.col(0) = design.col(0);
        reduced.rightCols(exog.cols()) = design.rightCols(exog.cols());
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(reduced);
        if (qr.rank() < reduced.cols())
            throw Error(ErrorCode::SingularDesign, "exogenous design is rank-deficient");
        model.intercept = y.front();
        model.phi.assign(static_cast<std::size_t>(cfg.p), 0.0);
        model.beta = Eigen::VectorXd::Zero(exog.cols());
        return model;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols())
        throw Error(ErrorCode::SingularDesign, "lag-augmented design matrix is rank-deficient (rank " +
                                                   std::to_string(qr.rank()) + " of " +
                                                   std::to_string(design.cols()) + ")");
    const Eigen::VectorXd coef = qr.solve(target);
    model.intercept = coef(0);
    for (int j = 1; j <= cfg.p; ++j) model.phi.push_back(coef(j));
    model.beta = coef.tail(exog.cols());

    const Eigen::VectorXd resid = target - design * coef;
    const double dof = static_cast<double>(design.rows() - design.cols());
    model.sigma2 = dof > 0 ? resid.squaredNorm() / dof : 0.0;
    return model;
}

Eigen::VectorXd forecast_arimax(const ArimaxModel& model, const Eigen::MatrixXd& exog_future, std::size_t horizon,
                                ArimaxForecastMode mode, std::optional<std::span<const double>> actuals) {
    if (static_cast<std::size_t>(exog_future.rows()) < horizon)
        throw Error(ErrorCode::InvalidArgument, "exogenous forecast matrix has fewer rows than the horizon");
    if (exog_future.cols() != model.beta.size())
        throw Error(ErrorCode::SchemaMismatch, "exogenous forecast matrix has the wrong number of columns");
    if (mode == ArimaxForecastMode::OneStepWithActuals) {
        if (!actuals) throw Error(ErrorCode::MissingActuals, "one-step forecasting needs the actual series");
        if (actuals->size() + 1 < horizon)
            throw Error(ErrorCode::MissingActuals, "actual series is shorter than the horizon");
    }
    const std::size_t p = model.phi.size();
    // Rolling window of the p most recent values, newest last.
    std::vector<double> window = model.history;
    Eigen::VectorXd out(static_cast<Eigen::Index>(horizon));
    for (std::size_t h = 0; h < horizon; ++h) {
        double v = model.intercept;
        for (std::size_t k = 0; k < p; ++k) v += model.phi[k] * window[p - 1 - k];
        v += exog_future.row(static_cast<Eigen::Index>(h)).dot(model.beta);
        out(static_cast<Eigen::Index>(h)) = v;
        if (p == 0) continue;
        const double next = mode == ArimaxForecastMode::Recursive ? v : (*actuals)[h];
        window.erase(window.begin());
        window.push_back(next);
    }
    return out;
}

Eigen::VectorXd fitted_arimax(const ArimaxModel& model, std::span<const double> y, const Eigen::MatrixXd& exog) {
    const int p = static_cast<int>(model.phi.size());
    const Eigen::MatrixXd design = arimax_design(y, exog, p);
    Eigen::VectorXd coef(design.cols());
    coef(0) = model.intercept;
    for (int j = 0; j < p; ++j) coef(1 + j) = model.phi[static_cast<std::size_t>(j)];
    coef.tail(model.beta.size()) = model.beta;
    return design * coef;
}

} // namespace demandcast
