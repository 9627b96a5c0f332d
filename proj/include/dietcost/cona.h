#pragma once

#include "dietcost/data_io.h"
#include "dietcost/denton.h"
#include "dietcost/diet_problem.h"
#include "dietcost/requirements.h"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dietcost {

enum class Scenario { individualized, shared };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view text);

enum class CellStatus { optimal, infeasible, infeasible_by_vacancy, structural_infeasible, numerical_failure };

std::string_view to_string(CellStatus s) noexcept;
CellStatus parse_cell_status(std::string_view text);

/// Least-cost diet outcome for one household, market, month and scenario.
struct ConaCell {
    std::string household_id;
    std::string market_id;
    YearMonth when;
    Scenario scenario{Scenario::individualized};
    CellStatus status{CellStatus::infeasible};
    std::optional<double> cost_nominal;
    std::optional<double> cost_ppp;
    std::optional<double> per_capita;
    std::optional<double> per_1000kcal;
    /// kcal/day of everyone fed (shared pool plus add-on children).
    double energy_total{};
    int n_eaters{};
    /// Members whose individual LP failed (individualized), or "shared" for the pooled LP.
    std::vector<std::string> failing_members;
    /// Shared scenario with nobody aged 4+: only add-on diets were solved.
    bool addon_only{false};

    bool optimal() const noexcept { return status == CellStatus::optimal; }
};

struct ConaOptions {
    lp::SolverOptions solver;
    RequirementOptions requirements;
    double certificate_tol{1e-6};
};

/// Memoizes single-person diet LPs against one market-month menu. Identical
/// requirement rows produce identical problems, so results are unchanged.
class MemberDietCache {
  public:
    MemberDietCache(const Dataset &dataset, std::span<const MenuEntry> menu, const ConaOptions &options);

    struct Outcome {
        DietStatus status;
        double cost;
    };

    Outcome solve(const RequirementRow &row);

  private:
    const Dataset &dataset_;
    std::span<const MenuEntry> menu_;
    ConaOptions options_;
    std::map<std::vector<double>, Outcome> memo_;
};

/// Sum of every fed member's own least-cost diet; optimal only if all are.
ConaCell individualized_cona(const HouseholdRecord &household, const HouseholdRequirement &req,
                             YearMonth when, const Dataset &dataset, const ConaOptions &options,
                             MemberDietCache *cache = nullptr);

/// One pooled LP over the shared bounds plus add-on diets for children
/// under 4; optimal only if all are.
ConaCell shared_cona(const HouseholdRecord &household, const HouseholdRequirement &req, YearMonth when,
                     const Dataset &dataset, const ConaOptions &options,
                     MemberDietCache *cache = nullptr);

/// Fills cost_ppp, per_capita and per_1000kcal from cost_nominal. Throws
/// std::out_of_range when the month has no factor.
void apply_ppp(ConaCell &cell, const PpFactorSeries &factors, PppOrientation orientation);

struct PanelConfig {
    YearMonth start{2013, 1};
    YearMonth end{2017, 7};
    /// Months from this date use the composition surveyed on or after it.
    std::optional<YearMonth> switch_date{YearMonth{2016, 1}};
    std::vector<Scenario> scenarios{Scenario::individualized, Scenario::shared};
    /// 0 = hardware concurrency.
    unsigned workers{0};
    PppOrientation orientation{PppOrientation::lcu_per_ppp};
    ConaOptions cona;
};

struct ConaPanel {
    std::vector<std::string> household_ids;
    std::vector<Scenario> scenarios;
    YearMonth start;
    int n_months{};
    /// Indexed by (household, scenario, month) in that nesting order.
    std::vector<ConaCell> cells;

    const ConaCell &at(std::size_t household, std::size_t scenario, int month) const {
        return cells[(household * scenarios.size() + scenario) * n_months + month];
    }
};

/// Index of the survey record whose composition applies in `when`.
std::size_t record_for_month(std::span<const HouseholdRecord *const> records, YearMonth when,
                             const std::optional<YearMonth> &switch_date);

/// Monthly conversion factors covering the dataset's annual PPP input, or
/// nullopt when the dataset has none.
std::optional<PpFactorSeries> ppp_factors_for(const Dataset &dataset);

ConaPanel cona_panel(const Dataset &dataset, const PanelConfig &config);

void write_panel_csv(const ConaPanel &panel, std::ostream &out);
/// Reads a panel written by write_panel_csv.
ConaPanel read_panel_csv(const std::filesystem::path &path);

void write_ppp_factors_csv(const PpFactorSeries &series, std::ostream &out);

/// Households whose shared lower bound exceeds the upper bound:
/// household_id,nutrient_id,lower,upper.
void write_structural_report(const Dataset &dataset, const RequirementOptions &options, std::ostream &out);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads (0 = all cores).
/// Rethrows the first exception after all workers stop.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &fn);

} // namespace dietcost
