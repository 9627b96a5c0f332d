#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace dietcost {

enum class CovarianceKind { classical, hc1, cr1 };

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov;
    Eigen::VectorXd se;
    Eigen::VectorXd residuals;
    /// Columns removed because they were linearly dependent on earlier ones;
    /// their beta, se and covariance entries are zero.
    std::vector<std::size_t> dropped;
    CovarianceKind cov_kind{CovarianceKind::classical};
    std::size_t n{};
    /// Rank of the design (number of estimated coefficients).
    std::size_t k{};
    std::size_t n_clusters{};
    double rss{};
    double tss{};
    double r2{};
    double adj_r2{};
    /// Gaussian concentrated log likelihood based criteria divided by n.
    double aic_per_obs{};
    double bic_per_obs{};
    std::string warning;
};

/// Least squares via column-pivoted QR. `clusters` (one id per row) is
/// required for CR1; with fewer than two clusters CR1 falls back to HC1 and
/// sets a warning.
OlsFit ols(const Eigen::MatrixXd &X, const Eigen::VectorXd &y, CovarianceKind kind,
           std::span<const std::size_t> clusters = {});

struct WaldTest {
    double f{};
    int df1{};
    int df2{};
    double p_value{};
};

/// Joint test that the listed coefficients are zero, using the fit's
/// covariance. Denominator degrees of freedom are G-1 for CR1, n-k otherwise.
/// Dropped columns are skipped.
WaldTest wald_test(const OlsFit &fit, std::span<const std::size_t> coefficients);

} // namespace dietcost
