#pragma once

#include <vector>

#include <Eigen/Dense>

namespace causalqa {

struct OlsFit {
    Eigen::VectorXd coefficients;     // one per design column; dropped columns are 0
    double intercept = 0.0;
    double residual_variance = 0.0;
    Eigen::VectorXd standard_errors;  // per coefficient; 0 for dropped columns
    Eigen::MatrixXd covariance;       // coefficient covariance, intercept excluded
    std::vector<int> dropped;         // columns removed by the collinearity fallback

    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return intercept + coefficients.dot(x); }
};

// Least squares of y on [1, X] through column-pivoting Householder QR.
// Throws Error(RankDeficient) when the centered design has rank < cols or
// when rows < cols + 1.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// ols() that, on RankDeficient, drops the columns falling outside the QR
// rank in pivot order and refits once. A second failure throws
// Error(EstimationFailed).
OlsFit ols_with_fallback(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

inline constexpr double kPropensityFloor = 0.01;
inline constexpr double kPropensityCeil = 0.99;

struct LogisticFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    bool converged = false;
    int iterations = 0;

    // Fitted probability clipped to [kPropensityFloor, kPropensityCeil].
    double probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Logistic regression of binary `a` on [1, X] by iteratively reweighted
// least squares: at most 50 iterations, converged when the largest
// coefficient step is below 1e-8. Throws Error(SeparationDetected) when more
// than 90% of the fitted probabilities sit beyond the clip bounds, and
// Error(RankDeficient) for a singular design.
LogisticFit logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& a);

// logistic() with the same drop-and-refit-once fallback as ols_with_fallback.
// Dropped columns get a zero coefficient.
LogisticFit logistic_with_fallback(const Eigen::MatrixXd& X, const Eigen::VectorXd& a);

}  // namespace causalqa
