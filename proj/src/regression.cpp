#include "causalqa/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "causalqa/error.hpp"

namespace causalqa {

namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd D(X.rows(), X.cols() + 1);
    D.col(0).setOnes();
    D.rightCols(X.cols()) = X;
    return D;
}

// Rank and pivot order of the centered design; the intercept never competes.
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> centered_qr(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    // Scale columns so the rank threshold is relative to each column's size.
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
        const double norm = C.col(j).norm();
        if (norm > 0) C.col(j) /= norm;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
    qr.setThreshold(kRankThreshold);
    return qr;
}

// Indices of a maximal independent column subset, in ascending order.
std::vector<int> independent_columns(const Eigen::MatrixXd& X) {
    auto qr = centered_qr(X);
    std::vector<int> keep;
    for (Eigen::Index k = 0; k < qr.rank(); ++k) keep.push_back(static_cast<int>(qr.colsPermutation().indices()(k)));
    std::sort(keep.begin(), keep.end());
    return keep;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& keep) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(keep[k]);
    return out;
}

}  // namespace

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (y.size() != n) throw Error(ErrorCode::BadDims, "ols: X and y disagree on row count");
    if (n < p + 1)
        throw Error(ErrorCode::RankDeficient,
                    "ols needs rows >= columns + 1 (" + std::to_string(n) + " rows, " + std::to_string(p) + " columns)");
    if (p > 0) {
        auto qr = centered_qr(X);
        if (qr.rank() < p) throw Error(ErrorCode::RankDeficient, "design has rank " + std::to_string(qr.rank()) +
                                                                     " < " + std::to_string(p) + " columns");
    }

    const Eigen::MatrixXd D = with_intercept(X);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - D * beta;
    const double dof = static_cast<double>(n - p - 1);

    OlsFit fit;
    fit.intercept = beta(0);
    fit.coefficients = beta.tail(p);
    fit.residual_variance = dof > 0 ? resid.squaredNorm() / dof : 0.0;

    const Eigen::MatrixXd xtx_inv = (D.transpose() * D).ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    fit.covariance = xtx_inv.bottomRightCorner(p, p) * fit.residual_variance;
    fit.standard_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

OlsFit ols_with_fallback(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    try {
        return ols(X, y);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient || X.cols() == 0) throw;
    }

    const std::vector<int> keep = independent_columns(X);
    OlsFit sub;
    try {
        sub = ols(select_columns(X, keep), y);
    } catch (const Error& e) {
        throw Error(ErrorCode::EstimationFailed, std::string("refit after dropping collinear columns failed: ") + e.what());
    }

    OlsFit fit;
    fit.intercept = sub.intercept;
    fit.residual_variance = sub.residual_variance;
    fit.coefficients = Eigen::VectorXd::Zero(X.cols());
    fit.standard_errors = Eigen::VectorXd::Zero(X.cols());
    fit.covariance = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        fit.coefficients(keep[k]) = sub.coefficients(kk);
        fit.standard_errors(keep[k]) = sub.standard_errors(kk);
        for (std::size_t m = 0; m < keep.size(); ++m)
            fit.covariance(keep[k], keep[m]) = sub.covariance(kk, static_cast<Eigen::Index>(m));
    }
    for (int j = 0; j < X.cols(); ++j)
        if (!std::binary_search(keep.begin(), keep.end(), j)) fit.dropped.push_back(j);
    return fit;
}

double LogisticFit::probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const double p = 1.0 / (1.0 + std::exp(-(intercept + coefficients.dot(x))));
    return std::clamp(p, kPropensityFloor, kPropensityCeil);
}

LogisticFit logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& a) {
    constexpr int kMaxIterations = 50;
    constexpr double kTolerance = 1e-8;

    const Eigen::Index n = X.rows(), p = X.cols();
    if (a.size() != n) throw Error(ErrorCode::BadDims, "logistic: X and a disagree on row count");
    if (n < p + 1) throw Error(ErrorCode::RankDeficient, "logistic needs rows >= columns + 1");
    for (Eigen::Index i = 0; i < n; ++i)
        if (a(i) != 0.0 && a(i) != 1.0) throw Error(ErrorCode::NonBinaryTreatment, "logistic response must be 0/1");
    if (p > 0 && centered_qr(X).rank() < p) throw Error(ErrorCode::RankDeficient, "logistic design is singular");

    const Eigen::MatrixXd D = with_intercept(X);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    const double mean = a.mean();
    if (mean > 0.0 && mean < 1.0) beta(0) = std::log(mean / (1.0 - mean));

    LogisticFit fit;
    Eigen::VectorXd prob(n);
    for (int it = 1; it <= kMaxIterations; ++it) {
        fit.iterations = it;
        const Eigen::VectorXd eta = D * beta;
        prob = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
        const Eigen::VectorXd w = (prob.array() * (1.0 - prob.array())).max(1e-12).matrix();
        const Eigen::MatrixXd H = D.transpose() * w.asDiagonal() * D;
        const Eigen::VectorXd g = D.transpose() * (a - prob);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        const Eigen::VectorXd step = ldlt.solve(g);
        if (!step.allFinite()) break;
        beta += step;
        if (step.cwiseAbs().maxCoeff() < kTolerance) {
            fit.converged = true;
            break;
        }
    }

    const Eigen::VectorXd eta = D * beta;
    prob = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const auto pinned = (prob.array() < kPropensityFloor || prob.array() > kPropensityCeil).count();
    if (static_cast<double>(pinned) > 0.9 * static_cast<double>(n))
        throw Error(ErrorCode::SeparationDetected, std::to_string(pinned) + " of " + std::to_string(n) +
                                                       " fitted probabilities sit at the clip bounds");
    if (!beta.allFinite()) throw Error(ErrorCode::EstimationFailed, "logistic fit diverged");

    fit.intercept = beta(0);
    fit.coefficients = beta.tail(p);
    return fit;
}

LogisticFit logistic_with_fallback(const Eigen::MatrixXd& X, const Eigen::VectorXd& a) {
    try {
        return logistic(X, a);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient || X.cols() == 0) throw;
    }
    const std::vector<int> keep = independent_columns(X);
    LogisticFit sub;
    try {
        sub = logistic(select_columns(X, keep), a);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient) throw;
        throw Error(ErrorCode::EstimationFailed, std::string("propensity refit failed: ") + e.what());
    }
    LogisticFit fit = sub;
    fit.coefficients = Eigen::VectorXd::Zero(X.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) fit.coefficients(keep[k]) = sub.coefficients(static_cast<Eigen::Index>(k));
    return fit;
}

}  // namespace causalqa
