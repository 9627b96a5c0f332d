#include "dietcost/seasonality.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dietcost {

std::string_view to_string(SeasonalMethod m) noexcept {
    switch (m) {
    case SeasonalMethod::stochastic_dummy:
        return "stochastic_dummy";
    case SeasonalMethod::trigonometric:
        return "trigonometric";
    case SeasonalMethod::feasibility_lpm:
        return "feasibility_lpm";
    }
    return "stochastic_dummy";
}

std::vector<DiffObservation> difference_with_gaps(std::span<const MonthlySeries> series) {
    std::vector<DiffObservation> out;
    for (std::size_t u = 0; u < series.size(); ++u) {
        const auto &pts = series[u].points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!std::isfinite(pts[i].value)) {
                throw std::invalid_argument("series " + series[u].unit_id + " has a non-finite value");
            }
            if (i == 0) {
                continue;
            }
            if (!(pts[i - 1].when < pts[i].when)) {
                throw std::invalid_argument("series " + series[u].unit_id + " is not strictly increasing");
            }
            DiffObservation d{};
            d.unit = u;
            d.when = pts[i].when;
            d.dy = pts[i].value - pts[i - 1].value;
            d.k = pts[i].when.index() - pts[i - 1].when.index() - 1;
            d.dummies.fill(0.0);
            d.dummies[pts[i].when.month - 1] += 1.0;
            d.dummies[pts[i - 1].when.month - 1] -= 1.0;
            d.trend = d.k + 1.0;
            out.push_back(d);
        }
    }
    return out;
}

double seasonal_gap(std::span<const double> factors) {
    if (factors.size() != 12) {
        throw std::invalid_argument("seasonal_gap needs 12 factors");
    }
    auto [lo, hi] = std::minmax_element(factors.begin(), factors.end());
    return *hi - *lo;
}

double factor_sum(std::span<const double> factors) {
    double s = 0.0;
    for (double f : factors) {
        s += f;
    }
    return s;
}

namespace {

std::vector<std::size_t> cluster_ids(std::span<const MonthlySeries> series,
                                     const std::vector<DiffObservation> &obs, std::size_t *n_units) {
    std::map<std::string, std::size_t> index;
    std::vector<std::size_t> per_unit(series.size());
    for (std::size_t u = 0; u < series.size(); ++u) {
        const auto &key = series[u].cluster_id.empty() ? series[u].unit_id : series[u].cluster_id;
        per_unit[u] = index.emplace(key, index.size()).first->second;
    }
    std::vector<std::size_t> out;
    out.reserve(obs.size());
    std::vector<char> seen(series.size(), 0);
    std::size_t units = 0;
    for (const auto &o : obs) {
        out.push_back(per_unit[o.unit]);
        if (!seen[o.unit]) {
            seen[o.unit] = 1;
            ++units;
        }
    }
    if (n_units) {
        *n_units = units;
    }
    return out;
}

// Demeans twelve month effects (given with their covariance) into factors.
void demean_factors(const std::array<double, 12> &delta, const Eigen::MatrixXd &cov12, double scale,
                    SeasonalFit &fit) {
    double mean = 0.0;
    for (double d : delta) {
        mean += d / 12.0;
    }
    for (int m = 0; m < 12; ++m) {
        fit.factors[m] = (delta[m] - mean) * scale;
    }
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(12, 12) - Eigen::MatrixXd::Constant(12, 12, 1.0 / 12.0);
    const Eigen::MatrixXd v = M * cov12 * M.transpose();
    for (int m = 0; m < 12; ++m) {
        fit.factor_se[m] = std::sqrt(std::max(0.0, v(m, m))) * scale;
    }
    fit.gap = seasonal_gap(fit.factors);
    const auto hi = std::max_element(fit.factors.begin(), fit.factors.end()) - fit.factors.begin();
    const auto lo = std::min_element(fit.factors.begin(), fit.factors.end()) - fit.factors.begin();
    const double var = v(hi, hi) + v(lo, lo) - 2.0 * v(hi, lo);
    fit.gap_se = std::sqrt(std::max(0.0, var)) * scale;
}

void copy_fit_stats(const OlsFit &ols_fit, SeasonalFit &fit) {
    fit.n_obs = ols_fit.n;
    fit.n_clusters = ols_fit.n_clusters;
    fit.adj_r2 = ols_fit.adj_r2;
    fit.aic_per_obs = ols_fit.aic_per_obs;
    fit.bic_per_obs = ols_fit.bic_per_obs;
    fit.warning = ols_fit.warning;
}

} // namespace

SeasonalFit fit_stochastic_dummy(std::span<const MonthlySeries> series, const SeasonalOptions &options) {
    if (options.omitted_month < 1 || options.omitted_month > 12) {
        throw std::invalid_argument("omitted month must be 1-12");
    }
    const auto obs = difference_with_gaps(series);
    SeasonalFit fit;
    fit.method = SeasonalMethod::stochastic_dummy;
    fit.scale = options.scale;
    std::vector<int> months;
    for (int m = 1; m <= 12; ++m) {
        if (m != options.omitted_month) {
            months.push_back(m);
        }
    }
    const auto p = static_cast<Eigen::Index>(1 + months.size());
    if (obs.size() <= static_cast<std::size_t>(p)) {
        throw std::invalid_argument("fewer differenced observations than parameters");
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(obs.size()), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        y(r) = obs[i].dy;
        X(r, 0) = obs[i].trend;
        for (std::size_t c = 0; c < months.size(); ++c) {
            X(r, static_cast<Eigen::Index>(c + 1)) = obs[i].dummies[months[c] - 1];
        }
    }
    const auto clusters = cluster_ids(series, obs, &fit.n_units);
    const auto ols_fit = ols(X, y, options.covariance, clusters);
    copy_fit_stats(ols_fit, fit);
    fit.gamma = ols_fit.beta(0);
    fit.gamma_se = ols_fit.se(0);
    for (auto c : ols_fit.dropped) {
        if (c == 0) {
            fit.warning += (fit.warning.empty() ? "" : "; ") + std::string("trend not identified");
        } else {
            fit.dropped_months.push_back(months[c - 1]);
        }
    }
    std::array<double, 12> delta{};
    Eigen::MatrixXd cov12 = Eigen::MatrixXd::Zero(12, 12);
    for (std::size_t a = 0; a < months.size(); ++a) {
        delta[months[a] - 1] = ols_fit.beta(static_cast<Eigen::Index>(a + 1));
        for (std::size_t b = 0; b < months.size(); ++b) {
            cov12(months[a] - 1, months[b] - 1) =
                ols_fit.cov(static_cast<Eigen::Index>(a + 1), static_cast<Eigen::Index>(b + 1));
        }
    }
    fit.coefficients.assign(delta.begin(), delta.end());
    demean_factors(delta, cov12, options.scale, fit);
    std::vector<std::size_t> tested;
    for (std::size_t c = 1; c <= months.size(); ++c) {
        tested.push_back(c);
    }
    fit.seasonal_test = wald_test(ols_fit, tested);
    return fit;
}

SeasonalFit fit_trigonometric(std::span<const MonthlySeries> series, const SeasonalOptions &options) {
    const auto obs = difference_with_gaps(series);
    if (obs.size() <= 3) {
        throw std::invalid_argument("fewer differenced observations than parameters");
    }
    const double w = std::numbers::pi / 6.0;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(obs.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const int m1 = obs[i].when.month;
        const int m0 = obs[i].when.plus_months(-(obs[i].k + 1)).month;
        y(r) = obs[i].dy;
        X(r, 0) = obs[i].trend;
        X(r, 1) = std::cos(m1 * w) - std::cos(m0 * w);
        X(r, 2) = std::sin(m1 * w) - std::sin(m0 * w);
    }
    SeasonalFit fit;
    fit.method = SeasonalMethod::trigonometric;
    fit.scale = options.scale;
    const auto clusters = cluster_ids(series, obs, &fit.n_units);
    const auto ols_fit = ols(X, y, options.covariance, clusters);
    copy_fit_stats(ols_fit, fit);
    if (!ols_fit.dropped.empty()) {
        fit.warning += (fit.warning.empty() ? "" : "; ") + std::string("design is rank deficient");
    }
    fit.gamma = ols_fit.beta(0);
    fit.gamma_se = ols_fit.se(0);
    const double alpha = ols_fit.beta(1), beta = ols_fit.beta(2);
    fit.coefficients = {alpha, beta};
    fit.lambda = std::hypot(alpha, beta);
    fit.omega = std::atan2(beta, alpha);
    double peak = fit.omega / w;
    while (peak <= 0.0) {
        peak += 12.0;
    }
    while (peak > 12.0) {
        peak -= 12.0;
    }
    fit.peak_month = peak;
    const Eigen::Matrix2d v = ols_fit.cov.block(1, 1, 2, 2);
    for (int m = 1; m <= 12; ++m) {
        const Eigen::Vector2d g(std::cos(m * w), std::sin(m * w));
        fit.factors[m - 1] = fit.lambda * std::cos(m * w - fit.omega) * options.scale;
        fit.factor_se[m - 1] = std::sqrt(std::max(0.0, g.dot(v * g))) * options.scale;
    }
    fit.gap = 2.0 * fit.lambda * options.scale;
    if (fit.lambda > 0.0) {
        const Eigen::Vector2d g(alpha / fit.lambda, beta / fit.lambda);
        fit.gap_se = 2.0 * std::sqrt(std::max(0.0, g.dot(v * g))) * options.scale;
    }
    const std::size_t tested[] = {1, 2};
    fit.seasonal_test = wald_test(ols_fit, tested);
    return fit;
}

std::map<std::string, std::string> household_clusters(const Dataset &dataset) {
    std::map<std::string, std::string> out;
    for (const auto &hh : dataset.households) {
        out.emplace(hh.household_id, hh.cluster());
    }
    return out;
}

std::vector<MonthlySeries> cost_series(const ConaPanel &panel, std::size_t scenario, bool impute,
                                       const std::map<std::string, std::string> &clusters,
                                       ImputationReport *report) {
    if (scenario >= panel.scenarios.size()) {
        throw std::out_of_range("scenario index out of range");
    }
    std::vector<std::optional<double>> month_max(panel.n_months);
    for (std::size_t h = 0; h < panel.household_ids.size(); ++h) {
        for (int t = 0; t < panel.n_months; ++t) {
            const auto &c = panel.at(h, scenario, t);
            if (c.optimal()) {
                month_max[t] = std::max(month_max[t].value_or(0.0), *c.cost_nominal);
            }
        }
    }
    ImputationReport rep;
    if (impute) {
        for (int t = 0; t < panel.n_months; ++t) {
            if (!month_max[t]) {
                rep.undefined_months.push_back(panel.start.plus_months(t));
            }
        }
    }
    std::vector<MonthlySeries> out;
    out.reserve(panel.household_ids.size());
    for (std::size_t h = 0; h < panel.household_ids.size(); ++h) {
        MonthlySeries s;
        s.unit_id = panel.household_ids[h];
        auto it = clusters.find(s.unit_id);
        s.cluster_id = it != clusters.end() ? it->second : s.unit_id;
        for (int t = 0; t < panel.n_months; ++t) {
            const auto &c = panel.at(h, scenario, t);
            if (c.optimal()) {
                s.points.push_back({c.when, std::log(*c.cost_nominal)});
            } else if (impute && month_max[t]) {
                s.points.push_back({c.when, std::log(*month_max[t])});
                ++rep.imputed_cells;
            }
        }
        out.push_back(std::move(s));
    }
    if (report) {
        *report = std::move(rep);
    }
    return out;
}

SeasonalFit feasibility_lpm(const ConaPanel &panel, std::size_t scenario, const LpmOptions &options,
                            const std::map<std::string, std::string> &clusters) {
    if (scenario >= panel.scenarios.size()) {
        throw std::out_of_range("scenario index out of range");
    }
    struct Row {
        int month;
        std::size_t market;
        std::size_t cluster;
        double y;
    };
    std::map<std::string, std::size_t> market_index, cluster_index;
    std::vector<Row> rows;
    for (std::size_t h = 0; h < panel.household_ids.size(); ++h) {
        const auto &id = panel.household_ids[h];
        auto it = clusters.find(id);
        const auto cl = cluster_index.emplace(it != clusters.end() ? it->second : id, cluster_index.size())
                            .first->second;
        for (int t = 0; t < panel.n_months; ++t) {
            const auto &c = panel.at(h, scenario, t);
            if (options.exclude_vacancy && c.status == CellStatus::infeasible_by_vacancy) {
                continue;
            }
            market_index.emplace(c.market_id, 0);
            rows.push_back({c.when.month, 0, cl, c.optimal() ? 100.0 : 0.0});
        }
    }
    // Markets in sorted order; the first is the baseline.
    std::size_t mi = 0;
    for (auto &[id, idx] : market_index) {
        idx = mi++;
    }
    {
        std::size_t r = 0;
        for (std::size_t h = 0; h < panel.household_ids.size(); ++h) {
            for (int t = 0; t < panel.n_months; ++t) {
                const auto &c = panel.at(h, scenario, t);
                if (options.exclude_vacancy && c.status == CellStatus::infeasible_by_vacancy) {
                    continue;
                }
                rows[r++].market = market_index[c.market_id];
            }
        }
    }

    SeasonalFit fit;
    fit.method = SeasonalMethod::feasibility_lpm;
    fit.scale = 1.0;
    fit.n_obs = rows.size();
    fit.n_units = panel.household_ids.size();
    fit.n_clusters = cluster_index.size();
    if (rows.empty()) {
        fit.degenerate = true;
        fit.warning = "no observations";
        return fit;
    }
    const double first = rows.front().y;
    if (std::all_of(rows.begin(), rows.end(), [&](const Row &r) { return r.y == first; })) {
        fit.degenerate = true;
        fit.levels.fill(first);
        fit.coefficients.assign(12, 0.0);
        fit.warning = first > 0.0 ? "all cells feasible" : "no cell feasible";
        return fit;
    }

    const std::size_t n_markets = market_index.size();
    const auto p = static_cast<Eigen::Index>(12 + n_markets - 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), p);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::size_t> cl(rows.size());
    std::vector<double> market_share(n_markets, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        y(r) = rows[i].y;
        X(r, 0) = 1.0;
        if (rows[i].month != 12) {
            X(r, rows[i].month) = 1.0;
        }
        if (rows[i].market > 0) {
            X(r, static_cast<Eigen::Index>(11 + rows[i].market)) = 1.0;
        }
        cl[i] = rows[i].cluster;
        market_share[rows[i].market] += 1.0 / static_cast<double>(rows.size());
    }
    const auto ols_fit = ols(X, y, options.covariance, cl);
    copy_fit_stats(ols_fit, fit);
    fit.n_clusters = ols_fit.cov_kind == CovarianceKind::cr1 ? ols_fit.n_clusters : cluster_index.size();
    for (auto c : ols_fit.dropped) {
        if (c >= 1 && c <= 11) {
            fit.dropped_months.push_back(static_cast<int>(c));
        }
    }
    double avg_market = 0.0;
    for (std::size_t m = 1; m < n_markets; ++m) {
        avg_market += market_share[m] * ols_fit.beta(static_cast<Eigen::Index>(11 + m));
    }
    std::array<double, 12> delta{};
    Eigen::MatrixXd cov12 = Eigen::MatrixXd::Zero(12, 12);
    for (int a = 1; a <= 11; ++a) {
        delta[a - 1] = ols_fit.beta(a);
        for (int b = 1; b <= 11; ++b) {
            cov12(a - 1, b - 1) = ols_fit.cov(a, b);
        }
    }
    fit.coefficients.assign(delta.begin(), delta.end());
    for (int m = 0; m < 12; ++m) {
        fit.levels[m] = ols_fit.beta(0) + delta[m] + avg_market;
    }
    demean_factors(delta, cov12, 1.0, fit);
    std::vector<std::size_t> tested;
    for (std::size_t c = 1; c <= 11; ++c) {
        tested.push_back(c);
    }
    fit.seasonal_test = wald_test(ols_fit, tested);
    return fit;
}

std::vector<MonthlySeries> price_series(const Dataset &dataset, std::span<const std::string> items) {
    std::map<std::pair<std::string, std::string>, MonthlySeries> by_unit;
    for (const auto &p : dataset.prices) {
        if (!items.empty() && std::find(items.begin(), items.end(), p.item_id) == items.end()) {
            continue;
        }
        auto &s = by_unit[{p.item_id, p.market_id}];
        if (s.unit_id.empty()) {
            s.unit_id = p.item_id + "@" + p.market_id;
            s.cluster_id = p.market_id;
        }
        s.points.push_back({p.when, std::log(p.price_per_kg)});
    }
    std::vector<MonthlySeries> out;
    out.reserve(by_unit.size());
    for (auto &[key, s] : by_unit) {
        std::sort(s.points.begin(), s.points.end(),
                  [](const SeriesPoint &a, const SeriesPoint &b) { return a.when < b.when; });
        out.push_back(std::move(s));
    }
    return out;
}

std::map<std::string, std::vector<std::string>> items_by_group(const Dataset &dataset) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto &f : dataset.foods) {
        out[f.food_group].push_back(f.item_id);
    }
    return out;
}

namespace {

std::string num(double v) {
    return std::isfinite(v) ? format_double(v) : std::string{};
}

} // namespace

void write_seasonal_factors_csv(std::span<const LabeledFit> fits, std::ostream &out) {
    write_csv_row(out, {"model", "scenario_or_group", "month", "factor", "se"});
    for (const auto &[label, fit] : fits) {
        const std::string model(to_string(fit.method));
        for (int m = 0; m < 12; ++m) {
            write_csv_row(out, {model, label, std::to_string(m + 1), num(fit.factors[m]),
                                fit.degenerate ? std::string{} : num(fit.factor_se[m])});
        }
        if (fit.method == SeasonalMethod::feasibility_lpm) {
            for (int m = 0; m < 12; ++m) {
                write_csv_row(out, {model + "_level", label, std::to_string(m + 1), num(fit.levels[m]), ""});
            }
        }
    }
}

void write_seasonal_gaps_csv(std::span<const LabeledFit> fits, std::ostream &out) {
    write_csv_row(out, {"model", "scenario_or_group", "gap", "se", "max_month", "min_month", "n_obs"});
    for (const auto &[label, fit] : fits) {
        const auto hi = std::max_element(fit.factors.begin(), fit.factors.end()) - fit.factors.begin();
        const auto lo = std::min_element(fit.factors.begin(), fit.factors.end()) - fit.factors.begin();
        write_csv_row(out, {std::string(to_string(fit.method)), label, num(fit.gap),
                            fit.degenerate ? std::string{} : num(fit.gap_se), std::to_string(hi + 1),
                            std::to_string(lo + 1), std::to_string(fit.n_obs)});
    }
}

void write_fit_stats_csv(std::span<const LabeledFit> fits, std::ostream &out) {
    write_csv_row(out, {"model", "scenario_or_group", "n_obs", "n_units", "n_clusters", "f_stat", "f_df1",
                        "f_df2", "f_p_value", "adj_r2", "aic_per_obs", "bic_per_obs", "preferred", "warning"});
    for (const auto &[label, fit] : fits) {
        std::string preferred;
        if (fit.method != SeasonalMethod::feasibility_lpm) {
            bool best = true;
            bool compared = false;
            for (const auto &[other_label, other] : fits) {
                if (&other == &fit || other_label != label || other.method == SeasonalMethod::feasibility_lpm) {
                    continue;
                }
                compared = true;
                if (other.bic_per_obs < fit.bic_per_obs) {
                    best = false;
                }
            }
            preferred = compared ? (best ? "yes" : "no") : "";
        }
        const bool stats = !fit.degenerate;
        write_csv_row(out, {std::string(to_string(fit.method)), label, std::to_string(fit.n_obs),
                            std::to_string(fit.n_units), std::to_string(fit.n_clusters),
                            stats ? num(fit.seasonal_test.f) : "", stats ? std::to_string(fit.seasonal_test.df1) : "",
                            stats ? std::to_string(fit.seasonal_test.df2) : "",
                            stats ? num(fit.seasonal_test.p_value) : "", stats ? num(fit.adj_r2) : "",
                            stats ? num(fit.aic_per_obs) : "", stats ? num(fit.bic_per_obs) : "", preferred,
                            fit.warning});
    }
}

} // namespace dietcost
