#pragma once

#include "dietcost/cona.h"
#include "dietcost/data_io.h"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dietcost {

enum class AccessClass { no_access, reallocation_access, food_budget_access };

std::string_view to_string(AccessClass c) noexcept;

/// Affordability of one surveyed household record under one scenario, in
/// its survey month.
struct AccessResult {
    std::string household_id;
    YearMonth survey;
    Scenario scenario{Scenario::individualized};
    CellStatus status{CellStatus::infeasible};
    std::optional<double> cost_nominal;
    std::optional<double> cost_ppp;
    std::optional<double> per_capita;
    std::optional<double> per_1000kcal;
    std::optional<double> ratio_food;
    std::optional<double> ratio_total;
    AccessClass access_class{AccessClass::no_access};
    double weight{1.0};
    std::string cluster;
};

/// Ratios of nominal cost to nominal daily expenditure; exactly equal cost
/// and budget counts as affordable. Throws std::invalid_argument on
/// nonpositive expenditure.
AccessResult ratios(const ConaCell &cell, const HouseholdRecord &household);

/// Shared over individualized nominal cost; nullopt unless both are optimal.
std::optional<double> premium(const ConaCell &shared, const ConaCell &individualized);

/// Smallest value whose cumulative weight reaches half the total weight.
/// Throws std::invalid_argument on empty input, size mismatch or a
/// nonpositive weight.
double weighted_median(std::span<const double> values, std::span<const double> weights);
double weighted_mean(std::span<const double> values, std::span<const double> weights);

struct AffordabilityConfig {
    std::vector<Scenario> scenarios{Scenario::individualized, Scenario::shared};
    PppOrientation orientation{PppOrientation::lcu_per_ppp};
    ConaOptions cona;
    unsigned workers{0};
};

/// Survey-month cells and access results for every household record, in
/// dataset order with scenarios innermost. PPP fields are filled when the
/// dataset's conversion factors cover the survey month.
std::vector<AccessResult> survey_month_access(const Dataset &dataset, const AffordabilityConfig &config);

struct WeightedSummary {
    /// Scenario name, or "shared/individualized" for the premium.
    std::string scenario;
    std::string statistic;
    double value{};
    /// Cluster bootstrap standard error; NaN when not computed.
    double se{};
    std::size_t n{};
};

struct SummaryOptions {
    int bootstrap_reps{200};
    std::uint64_t seed{1};
    /// Per-capita PPP reference line reported next to costs.
    double reference_line{1.90};
};

/// Weighted access shares (percent), medians of costs and ratios among
/// feasible households, and the median premium. Expects the layout of
/// survey_month_access.
std::vector<WeightedSummary> population_summary(std::span<const AccessResult> results,
                                                const SummaryOptions &options = {});

void write_access_csv(std::span<const AccessResult> results, std::ostream &out);
void write_summary_csv(std::span<const WeightedSummary> summary, std::ostream &out);

/// Cost of each requirement group's own diet over all market-months.
struct GroupCostSummary {
    std::string group_id;
    /// Weighted share (percent) of members aged 6 months and over.
    double population_share{};
    double months_with_solution_mean{};
    double months_with_solution_sd{};
    /// Median and SD of optimal costs, in PPP dollars when `ppp` is set,
    /// otherwise nominal.
    double median_cost{};
    double cost_sd{};
    bool ppp{false};
    std::size_t n_market_months{};
};

std::vector<GroupCostSummary> group_cost_summary(const Dataset &dataset, YearMonth start, YearMonth end,
                                                 const AffordabilityConfig &config);

void write_group_costs_csv(std::span<const GroupCostSummary> rows, std::ostream &out);

} // namespace dietcost
