#include "dietcost/ols.h"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace dietcost {

OlsFit ols(const Eigen::MatrixXd &X, const Eigen::VectorXd &y, CovarianceKind kind,
           std::span<const std::size_t> clusters) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = static_cast<std::size_t>(X.cols());
    if (static_cast<std::size_t>(y.size()) != n) {
        throw std::invalid_argument("ols: design and response differ in length");
    }
    if (kind == CovarianceKind::cr1 && clusters.size() != n) {
        throw std::invalid_argument("ols: one cluster id per observation is required");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (n <= rank) {
        throw std::invalid_argument("ols: fewer observations than parameters");
    }
    std::vector<std::size_t> keep;
    OlsFit fit;
    {
        std::vector<char> used(p, 0);
        for (std::size_t i = 0; i < rank; ++i) {
            used[qr.colsPermutation().indices()(static_cast<Eigen::Index>(i))] = 1;
        }
        for (std::size_t j = 0; j < p; ++j) {
            (used[j] ? keep : fit.dropped).push_back(j);
        }
    }
    Eigen::MatrixXd Xk(n, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
        Xk.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(keep[c]));
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrk(Xk);
    const Eigen::VectorXd bk = qrk.solve(y);
    fit.residuals = y - Xk * bk;
    fit.n = n;
    fit.k = keep.size();
    fit.rss = fit.residuals.squaredNorm();
    const double mean = y.mean();
    fit.tss = (y.array() - mean).square().sum();
    fit.r2 = fit.tss > 0.0 ? 1.0 - fit.rss / fit.tss : 0.0;
    const double dn = static_cast<double>(n), dk = static_cast<double>(fit.k);
    fit.adj_r2 = fit.tss > 0.0 ? 1.0 - (1.0 - fit.r2) * (dn - 1.0) / (dn - dk) : 0.0;
    const double sigma2_ml = std::max(fit.rss / dn, std::numeric_limits<double>::min());
    const double loglik = -0.5 * dn * (std::log(2.0 * std::numbers::pi) + std::log(sigma2_ml) + 1.0);
    fit.aic_per_obs = (-2.0 * loglik + 2.0 * dk) / dn;
    fit.bic_per_obs = (-2.0 * loglik + dk * std::log(dn)) / dn;

    // (X'X)^-1 of the reduced, full-rank design.
    const Eigen::MatrixXd xtx = Xk.transpose() * Xk;
    const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(fit.k, fit.k));
    Eigen::MatrixXd covk;
    std::size_t n_clusters = 0;
    if (kind == CovarianceKind::cr1) {
        std::map<std::size_t, std::size_t> index;
        for (auto c : clusters) {
            index.emplace(c, index.size());
        }
        n_clusters = index.size();
        if (n_clusters < 2) {
            kind = CovarianceKind::hc1;
            fit.warning = "single cluster: cluster-robust covariance undefined, using HC1";
        } else {
            Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_clusters), fit.k);
            for (std::size_t i = 0; i < n; ++i) {
                scores.row(static_cast<Eigen::Index>(index[clusters[i]])) +=
                    Xk.row(static_cast<Eigen::Index>(i)) * fit.residuals(static_cast<Eigen::Index>(i));
            }
            const double g = static_cast<double>(n_clusters);
            const double factor = g / (g - 1.0) * (dn - 1.0) / (dn - dk);
            covk = factor * bread * (scores.transpose() * scores) * bread;
        }
    }
    if (kind == CovarianceKind::hc1) {
        Eigen::MatrixXd meat = Xk.transpose() * fit.residuals.array().square().matrix().asDiagonal() * Xk;
        covk = dn / (dn - dk) * bread * meat * bread;
    } else if (kind == CovarianceKind::classical) {
        covk = fit.rss / (dn - dk) * bread;
    }
    fit.cov_kind = kind;
    fit.n_clusters = n_clusters;

    fit.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    fit.cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t a = 0; a < keep.size(); ++a) {
        fit.beta(static_cast<Eigen::Index>(keep[a])) = bk(static_cast<Eigen::Index>(a));
        for (std::size_t b = 0; b < keep.size(); ++b) {
            fit.cov(static_cast<Eigen::Index>(keep[a]), static_cast<Eigen::Index>(keep[b])) =
                covk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

WaldTest wald_test(const OlsFit &fit, std::span<const std::size_t> coefficients) {
    std::vector<Eigen::Index> idx;
    for (auto c : coefficients) {
        if (std::find(fit.dropped.begin(), fit.dropped.end(), c) == fit.dropped.end()) {
            idx.push_back(static_cast<Eigen::Index>(c));
        }
    }
    WaldTest t;
    t.df1 = static_cast<int>(idx.size());
    t.df2 = fit.cov_kind == CovarianceKind::cr1 ? static_cast<int>(fit.n_clusters) - 1
                                                 : static_cast<int>(fit.n - fit.k);
    if (idx.empty() || t.df2 < 1) {
        t.p_value = std::numeric_limits<double>::quiet_NaN();
        return t;
    }
    const auto q = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd b(q);
    Eigen::MatrixXd v(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        b(a) = fit.beta(idx[a]);
        for (Eigen::Index c = 0; c < q; ++c) {
            v(a, c) = fit.cov(idx[a], idx[c]);
        }
    }
    // Pseudo-inverse guards against a rank-deficient cluster-robust covariance.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(v);
    t.f = b.dot(cod.solve(b)) / static_cast<double>(q);
    if (!std::isfinite(t.f) || t.f < 0.0) {
        t.p_value = std::numeric_limits<double>::quiet_NaN();
        return t;
    }
    boost::math::fisher_f dist(t.df1, t.df2);
    t.p_value = boost::math::cdf(boost::math::complement(dist, t.f));
    return t;
}

} // namespace dietcost
