#include "dietcost/denton.h"

#include <Eigen/Dense>

#include <stdexcept>

namespace dietcost {

std::optional<double> PpFactorSeries::factor(YearMonth when) const {
    const int offset = when.index() - start.index();
    if (offset < 0 || offset >= static_cast<int>(factors.size())) {
        return std::nullopt;
    }
    return factors[offset];
}

PpFactorSeries denton_monthly_factors(const std::map<int, double> &annual) {
    if (annual.empty()) {
        throw std::invalid_argument("Denton benchmarking needs at least one annual factor");
    }
    int expected = annual.begin()->first;
    for (const auto &[year, value] : annual) {
        if (year != expected++) {
            throw std::invalid_argument("annual factors must cover contiguous years");
        }
        if (!(value > 0.0)) {
            throw std::invalid_argument("annual factor for " + std::to_string(year) + " must be > 0");
        }
    }
    const int n_years = static_cast<int>(annual.size());
    const int n = 12 * n_years;
    // Work in units of the first annual factor to keep the KKT matrix well scaled.
    const double unit = annual.begin()->second;
    std::vector<double> level;
    level.reserve(n);
    for (const auto &[year, value] : annual) {
        level.insert(level.end(), 12, value / unit);
    }

    // KKT system [2 D'WD  J'; J  0] [x; mu] = [0; A].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + n_years, n + n_years);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + n_years);
    for (int t = 1; t < n; ++t) {
        const double w = 1.0 / (level[t - 1] * level[t - 1]);
        kkt(t, t) += 2.0 * w;
        kkt(t - 1, t - 1) += 2.0 * w;
        kkt(t, t - 1) -= 2.0 * w;
        kkt(t - 1, t) -= 2.0 * w;
    }
    int y = 0;
    for (const auto &[year, value] : annual) {
        for (int k = 0; k < 12; ++k) {
            kkt(n + y, 12 * y + k) = 1.0 / 12.0;
            kkt(12 * y + k, n + y) = 1.0 / 12.0;
        }
        rhs(n + y) = value / unit;
        ++y;
    }
    Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);

    PpFactorSeries out;
    out.start = YearMonth{annual.begin()->first, 1};
    out.factors.assign(sol.data(), sol.data() + n);
    for (double &f : out.factors) {
        f *= unit;
        if (!(f > 0.0)) {
            throw std::invalid_argument("Denton solution is not strictly positive for these factors");
        }
    }
    return out;
}

double proportional_roughness(const std::vector<double> &series) {
    double total = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double r = series[t] / series[t - 1] - 1.0;
        total += r * r;
    }
    return total;
}

double to_ppp(double nominal, double factor, PppOrientation orientation) noexcept {
    return orientation == PppOrientation::lcu_per_ppp ? nominal / factor : nominal * factor;
}

} // namespace dietcost
