#include "demandcast/svr.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace demandcast {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTau = 1e-12;
} // namespace

void SvrConfig::validate() const {
    if (!(C > 0.0)) throw Error(ErrorCode::InvalidConfig, "SVR C must be positive");
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "SVR epsilon must be non-negative");
    if (rbf_gamma && !(*rbf_gamma > 0.0)) throw Error(ErrorCode::InvalidConfig, "RBF gamma must be positive");
    if (!(smo_tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "SMO tolerance must be positive");
    if (max_passes < 1) throw Error(ErrorCode::InvalidConfig, "max_passes must be positive");
    if (max_train_rows < 1) throw Error(ErrorCode::InvalidConfig, "max_train_rows must be positive");
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
    const Eigen::VectorXd na = a.rowwise().squaredNorm();
    const Eigen::VectorXd nb = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + na;
    d2.rowwise() += nb.transpose();
    return (-gamma * d2.array().max(0.0)).exp().matrix();
}

double svr_dual_objective(const Eigen::MatrixXd& kernel, std::span<const double> z, std::span<const double> alpha,
                          std::span<const double> alpha_star, double epsilon) {
    const auto n = static_cast<Eigen::Index>(z.size());
    Eigen::VectorXd theta(n);
    double linear = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        theta(i) = alpha[k] - alpha_star[k];
        linear += z[k] * theta(i) - epsilon * (alpha[k] + alpha_star[k]);
    }
    return linear - 0.5 * theta.dot(kernel * theta);
}

SmoResult solve_svr_dual(const Eigen::MatrixXd& kernel, std::span<const double> z, double C, double epsilon,
                         double tolerance, std::size_t max_iterations, const SmoObserver& observer) {
    const std::size_t n = z.size();
    if (static_cast<std::size_t>(kernel.rows()) != n || static_cast<std::size_t>(kernel.cols()) != n)
        throw Error(ErrorCode::InvalidArgument, "kernel matrix does not match the target length");
    // Variables 0..n-1 are alpha (sign +1), n..2n-1 are alpha* (sign -1).
    const std::size_t l = 2 * n;
    std::vector<double> beta(l, 0.0), grad(l), p(l);
    std::vector<int> sign(l);
    for (std::size_t i = 0; i < n; ++i) {
        sign[i] = 1;
        sign[i + n] = -1;
        p[i] = epsilon - z[i];
        p[i + n] = epsilon + z[i];
    }
    grad = p;
    auto kern = [&](std::size_t a, std::size_t b) {
        return kernel(static_cast<Eigen::Index>(a % n), static_cast<Eigen::Index>(b % n));
    };
    auto q = [&](std::size_t a, std::size_t b) { return sign[a] * sign[b] * kern(a, b); };
    auto objective = [&] {
        double f = 0.0;
        for (std::size_t i = 0; i < l; ++i) f += beta[i] * (grad[i] + p[i]);
        return -0.5 * f;
    };
    auto upper = [&](std::size_t i) { return beta[i] >= C; };
    auto lower = [&](std::size_t i) { return beta[i] <= 0.0; };

    SmoResult res;
    res.objective_trace.push_back(objective());
    const std::size_t sweep = std::max<std::size_t>(n, 1);
    double violation = 0.0;
    while (true) {
        double gmax = -kInf, gmax2 = -kInf, obj_min = kInf;
        std::ptrdiff_t i_sel = -1, j_sel = -1;
        for (std::size_t t = 0; t < l; ++t) {
            if (sign[t] == 1) {
                if (!upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i_sel = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                i_sel = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i_sel >= 0) {
            const auto i = static_cast<std::size_t>(i_sel);
            const double* ki = kernel.col(static_cast<Eigen::Index>(i % n)).data();
            const double qd_i = kern(i, i);
            for (std::size_t t = 0; t < l; ++t) {
                const std::size_t tt = t < n ? t : t - n;
                const double qd_t = kernel(static_cast<Eigen::Index>(tt), static_cast<Eigen::Index>(tt));
                // sign[i] * Q(i, t) = sign[t] * K(i, t)
                const double si_q = sign[t] * ki[tt];
                if (sign[t] == 1) {
                    if (lower(t)) continue;
                    const double diff = gmax + grad[t];
                    gmax2 = std::max(gmax2, grad[t]);
                    if (diff > 0.0) {
                        double quad = qd_i + qd_t - 2.0 * si_q;
                        if (quad <= 0.0) quad = kTau;
                        const double obj = -(diff * diff) / quad;
                        if (obj <= obj_min) {
                            j_sel = static_cast<std::ptrdiff_t>(t);
                            obj_min = obj;
                        }
                    }
                } else {
                    if (upper(t)) continue;
                    const double diff = gmax - grad[t];
                    gmax2 = std::max(gmax2, -grad[t]);
                    if (diff > 0.0) {
                        double quad = qd_i + qd_t + 2.0 * si_q;
                        if (quad <= 0.0) quad = kTau;
                        const double obj = -(diff * diff) / quad;
                        if (obj <= obj_min) {
                            j_sel = static_cast<std::ptrdiff_t>(t);
                            obj_min = obj;
                        }
                    }
                }
            }
        }
        violation = (i_sel < 0) ? 0.0 : gmax + gmax2;
        if (i_sel < 0 || j_sel < 0 || violation < tolerance) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_iterations) break;

        const auto i = static_cast<std::size_t>(i_sel), j = static_cast<std::size_t>(j_sel);
        const double old_i = beta[i], old_j = beta[j];
        const double qij = q(i, j);
        if (sign[i] != sign[j]) {
            double quad = kern(i, i) + kern(j, j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if (diff > 0.0) {
                if (beta[j] < 0.0) {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if (beta[i] < 0.0) {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if (diff > 0.0) {
                if (beta[i] > C) {
                    beta[i] = C;
                    beta[j] = C - diff;
                }
            } else if (beta[j] > C) {
                beta[j] = C;
                beta[i] = C + diff;
            }
        } else {
            double quad = kern(i, i) + kern(j, j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if (sum > C) {
                if (beta[i] > C) {
                    beta[i] = C;
                    beta[j] = sum - C;
                }
            } else if (beta[j] < 0.0) {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if (sum > C) {
                if (beta[j] > C) {
                    beta[j] = C;
                    beta[i] = sum - C;
                }
            } else if (beta[i] < 0.0) {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        const double ci = sign[i] * (beta[i] - old_i), cj = sign[j] * (beta[j] - old_j);
        const double* ki = kernel.col(static_cast<Eigen::Index>(i % n)).data();
        const double* kj = kernel.col(static_cast<Eigen::Index>(j % n)).data();
        for (std::size_t t = 0; t < n; ++t) {
            const double u = ci * ki[t] + cj * kj[t];
            grad[t] += u;
            grad[t + n] -= u;
        }
        ++res.iterations;
        if (observer)
            observer({std::span<const double>(beta.data(), n), std::span<const double>(beta.data() + n, n),
                      res.iterations});
        if (res.iterations % sweep == 0) res.objective_trace.push_back(objective());
    }
    res.max_violation = std::max(0.0, violation);
    res.objective_trace.push_back(objective());

    // Offset from free variables, else the midpoint of the feasible interval.
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = sign[t] * grad[t];
        if (upper(t)) {
            if (sign[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (sign[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    res.bias = -rho;
    res.alpha.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(n));
    res.alpha_star.assign(beta.begin() + static_cast<std::ptrdiff_t>(n), beta.end());
    return res;
}

namespace {

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

} // namespace

SvrModel fit_svr(const Eigen::MatrixXd& x_all, const Eigen::VectorXd& y_all, std::vector<std::string> feature_names,
                 const SvrConfig& cfg) {
    cfg.validate();
    if (x_all.rows() == 0) throw Error(ErrorCode::InvalidArgument, "SVR needs at least one training row");
    if (y_all.size() != x_all.rows()) throw Error(ErrorCode::InvalidArgument, "SVR target length differs from rows");
    if (feature_names.size() != static_cast<std::size_t>(x_all.cols()))
        throw Error(ErrorCode::SchemaMismatch, "feature names do not match matrix columns");

    // Rows are chronological; keep the most recent ones.
    const Eigen::Index keep = std::min<Eigen::Index>(x_all.rows(), static_cast<Eigen::Index>(cfg.max_train_rows));
    const Eigen::MatrixXd x = x_all.bottomRows(keep);
    const Eigen::VectorXd y = y_all.tail(keep);

    SvrModel model;
    model.config = cfg;
    model.feature_names = std::move(feature_names);
    model.train_rows_used = static_cast<std::size_t>(keep);
    model.gamma = cfg.rbf_gamma.value_or(1.0 / static_cast<double>(std::max<Eigen::Index>(x.cols(), 1)));

    const double n = static_cast<double>(keep);
    model.feature_mean = x.colwise().mean().transpose();
    model.feature_scale = ((x.rowwise() - model.feature_mean.transpose()).array().square().colwise().sum() / n)
                              .sqrt()
                              .transpose();
    for (Eigen::Index j = 0; j < model.feature_scale.size(); ++j)
        if (!(model.feature_scale(j) > 0.0)) model.feature_scale(j) = 1.0;

    model.target_mean = cfg.standardize_target ? y.mean() : 0.0;
    const double sd = std::sqrt((y.array() - y.mean()).square().sum() / n);
    model.target_scale = (cfg.standardize_target && sd > 0.0) ? sd : 1.0;
    model.support_vectors.resize(0, x.cols());

    if (y.maxCoeff() == y.minCoeff()) {
        model.degenerate_target = true;
        model.target_mean = y(0);
        model.bias = 0.0;
        return model;
    }

    const Eigen::MatrixXd xs = standardize(x, model.feature_mean, model.feature_scale);
    std::vector<double> z(static_cast<std::size_t>(keep));
    for (Eigen::Index i = 0; i < keep; ++i)
        z[static_cast<std::size_t>(i)] = (y(i) - model.target_mean) / model.target_scale;

    const Eigen::MatrixXd kernel = rbf_kernel(xs, xs, model.gamma);
    const std::size_t max_iter = static_cast<std::size_t>(cfg.max_passes) * static_cast<std::size_t>(keep);
    SmoResult res = solve_svr_dual(kernel, z, cfg.C, cfg.epsilon, cfg.smo_tolerance, max_iter);

    model.converged = res.converged;
    model.iterations = res.iterations;
    model.final_violation = res.max_violation;
    model.objective_trace = std::move(res.objective_trace);
    model.bias = res.bias;

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < keep; ++i) {
        const double coef = res.alpha[static_cast<std::size_t>(i)] - res.alpha_star[static_cast<std::size_t>(i)];
        if (coef != 0.0) {
            sv.push_back(i);
            model.support_indices.push_back(static_cast<std::size_t>(i));
            model.dual_coeffs.push_back(coef);
        }
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    for (std::size_t k = 0; k < sv.size(); ++k) model.support_vectors.row(static_cast<Eigen::Index>(k)) = xs.row(sv[k]);
    return model;
}

SvrModel fit_svr(const FeatureMatrix& m, const SvrConfig& cfg) { return fit_svr(m.values, m.target, m.columns, cfg); }

namespace {

Eigen::VectorXd decision_standardized(const SvrModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.feature_mean.size())
        throw Error(ErrorCode::SchemaMismatch, "prediction matrix has the wrong number of columns");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), model.bias);
    if (model.dual_coeffs.empty()) return out;
    const Eigen::MatrixXd xs = standardize(x, model.feature_mean, model.feature_scale);
    const Eigen::MatrixXd k = rbf_kernel(xs, model.support_vectors, model.gamma);
    const Eigen::Map<const Eigen::VectorXd> coef(model.dual_coeffs.data(),
                                                 static_cast<Eigen::Index>(model.dual_coeffs.size()));
    out += k * coef;
    return out;
}

} // namespace

Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::MatrixXd& x) {
    return (decision_standardized(model, x).array() * model.target_scale + model.target_mean).matrix();
}

Eigen::VectorXd predict_svr(const SvrModel& model, const FeatureMatrix& m) {
    if (m.columns != model.feature_names)
        throw Error(ErrorCode::SchemaMismatch, "prediction columns differ from the training columns");
    return predict_svr(model, m.values);
}

double kkt_violation(const SvrModel& model, const Eigen::MatrixXd& x_all, const Eigen::VectorXd& y_all) {
    if (model.degenerate_target) return 0.0;
    const auto keep = static_cast<Eigen::Index>(model.train_rows_used);
    if (x_all.rows() < keep) throw Error(ErrorCode::InvalidArgument, "fewer rows than the model was trained on");
    const Eigen::MatrixXd x = x_all.bottomRows(keep);
    const Eigen::VectorXd f = decision_standardized(model, x);

    std::vector<double> theta(static_cast<std::size_t>(keep), 0.0);
    for (std::size_t k = 0; k < model.support_indices.size(); ++k)
        theta.at(model.support_indices[k]) = model.dual_coeffs[k];
    const double C = model.config.C, eps = model.config.epsilon;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < keep; ++i) {
        const double z = (y_all(x_all.rows() - keep + i) - model.target_mean) / model.target_scale;
        const double r = z - f(i);
        const double a = std::max(theta[static_cast<std::size_t>(i)], 0.0);
        const double as = std::max(-theta[static_cast<std::size_t>(i)], 0.0);
        double v = 0.0;
        // alpha: below C requires r <= eps; above 0 requires r >= eps.
        if (a < C) v = std::max(v, r - eps);
        if (a > 0.0) v = std::max(v, eps - r);
        // alpha*: above 0 requires r <= -eps; below C requires r >= -eps.
        if (as > 0.0) v = std::max(v, r + eps);
        if (as < C) v = std::max(v, -eps - r);
        worst = std::max(worst, v);
    }
    return worst;
}

double kkt_violation(const SvrModel& model, const FeatureMatrix& m) { return kkt_violation(model, m.values, m.target); }

} // namespace demandcast
