#pragma once

#include "dietcost/cona.h"
#include "dietcost/data_io.h"
#include "dietcost/ols.h"

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dietcost {

struct SeriesPoint {
    YearMonth when;
    double value;
};

/// Log cost or log price of one unit (household, or item in a market) over
/// months, gaps allowed. Points are strictly increasing in time.
struct MonthlySeries {
    std::string unit_id;
    std::string cluster_id;
    std::vector<SeriesPoint> points;
};

/// One usable difference: value_t minus the most recent preceding value.
struct DiffObservation {
    std::size_t unit;
    YearMonth when;
    double dy;
    /// Months skipped between the two observations.
    int k;
    /// e_{m(t)} - e_{m(t-k-1)}: the sum of consecutive month-indicator
    /// differences across the span.
    std::array<double, 12> dummies;
    /// Elapsed months, k + 1.
    double trend;
};

/// Throws std::invalid_argument on unsorted or duplicate months, or
/// non-finite values. Units with fewer than two points contribute nothing.
std::vector<DiffObservation> difference_with_gaps(std::span<const MonthlySeries> series);

enum class SeasonalMethod { stochastic_dummy, trigonometric, feasibility_lpm };

std::string_view to_string(SeasonalMethod m) noexcept;

struct SeasonalFit {
    SeasonalMethod method{SeasonalMethod::stochastic_dummy};
    /// Per-month drift (difference models); unused by the LPM.
    double gamma{};
    double gamma_se{};
    /// Stochastic dummy: delta_1..delta_12 with the omitted month at 0.
    /// Trigonometric: {alpha, beta}. LPM: month coefficients.
    std::vector<double> coefficients;
    /// Demeaned seasonal factors, times `scale`.
    std::array<double, 12> factors{};
    std::array<double, 12> factor_se{};
    /// LPM only: conditional mean outcome by month (percent).
    std::array<double, 12> levels{};
    double gap{};
    double gap_se{};
    /// Trigonometric only: lambda, omega (radians) and the peak month.
    double lambda{};
    double omega{};
    double peak_month{};
    double scale{100.0};
    WaldTest seasonal_test;
    std::size_t n_obs{};
    std::size_t n_units{};
    std::size_t n_clusters{};
    double adj_r2{};
    double aic_per_obs{};
    double bic_per_obs{};
    /// Months whose dummy could not be estimated.
    std::vector<int> dropped_months;
    /// Outcome constant across the panel (LPM).
    bool degenerate{false};
    std::string warning;
};

struct SeasonalOptions {
    int omitted_month{12};
    CovarianceKind covariance{CovarianceKind::cr1};
    double scale{100.0};
};

/// Differenced seasonal dummy model with a per-month trend.
SeasonalFit fit_stochastic_dummy(std::span<const MonthlySeries> series, const SeasonalOptions &options = {});

/// Differenced cos/sin model: S_m = lambda cos(m pi / 6 - omega), gap 2 lambda.
SeasonalFit fit_trigonometric(std::span<const MonthlySeries> series, const SeasonalOptions &options = {});

/// max - min of twelve factors.
double seasonal_gap(std::span<const double> factors);

/// Sum of demeaned factors; zero up to rounding.
double factor_sum(std::span<const double> factors);

struct ImputationReport {
    std::size_t imputed_cells{};
    /// Months with no optimal cell in the scenario; their cells are left out.
    std::vector<YearMonth> undefined_months;
};

/// Household log-cost series for one scenario. With `impute`, every
/// non-optimal cell takes the highest optimal nominal cost in the same month
/// (over all markets and households); otherwise non-optimal cells are gaps.
/// `clusters` maps household_id to cluster id (missing: the household).
std::vector<MonthlySeries> cost_series(const ConaPanel &panel, std::size_t scenario, bool impute,
                                       const std::map<std::string, std::string> &clusters = {},
                                       ImputationReport *report = nullptr);

/// household_id -> survey cluster (first record of each household).
std::map<std::string, std::string> household_clusters(const Dataset &dataset);

struct LpmOptions {
    bool exclude_vacancy{false};
    CovarianceKind covariance{CovarianceKind::cr1};
};

/// Linear probability model of 100 * 1{optimal} on month and market
/// indicators for one scenario.
SeasonalFit feasibility_lpm(const ConaPanel &panel, std::size_t scenario, const LpmOptions &options = {},
                            const std::map<std::string, std::string> &clusters = {});

/// Log price series per (item, market); clustered by market. `items` limits
/// the items (empty = all).
std::vector<MonthlySeries> price_series(const Dataset &dataset, std::span<const std::string> items = {});

/// food_group -> item ids, in item order.
std::map<std::string, std::vector<std::string>> items_by_group(const Dataset &dataset);

/// One row per model and label.
struct LabeledFit {
    std::string label;
    SeasonalFit fit;
};

void write_seasonal_factors_csv(std::span<const LabeledFit> fits, std::ostream &out);
void write_seasonal_gaps_csv(std::span<const LabeledFit> fits, std::ostream &out);
/// Marks the lower-BIC model among fits sharing a label as preferred.
void write_fit_stats_csv(std::span<const LabeledFit> fits, std::ostream &out);

} // namespace dietcost
