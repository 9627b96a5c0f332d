#pragma once

#include "dietcost/csv.h"
#include "dietcost/year_month.h"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dietcost {

/// Which side(s) of a nutrient are constrained. `equality` marks the single
/// energy nutrient, which enters the diet problem as an equality.
enum class BoundKind { lower_only, upper_only, both, equality };

std::string_view to_string(BoundKind kind) noexcept;
BoundKind parse_bound_kind(std::string_view text);

constexpr bool has_lower(BoundKind k) noexcept {
    return k == BoundKind::lower_only || k == BoundKind::both;
}
constexpr bool has_upper(BoundKind k) noexcept {
    return k == BoundKind::upper_only || k == BoundKind::both;
}

struct NutrientDef {
    std::string id;
    std::string name;
    std::string unit;
    BoundKind bound_kind{BoundKind::lower_only};

    friend bool operator==(const NutrientDef &, const NutrientDef &) = default;
};

/// Nutrient catalog. Nutrient order here fixes the column order of every
/// per-nutrient vector in the library.
class NutrientCatalog {
  public:
    NutrientCatalog() = default;
    explicit NutrientCatalog(std::vector<NutrientDef> nutrients);

    /// 21 nutrients plus energy: 12 with both bounds, 7 lower-only and
    /// retinol/sodium upper-only.
    static NutrientCatalog malawi_default();

    std::size_t size() const noexcept { return nutrients_.size(); }
    const NutrientDef &operator[](std::size_t i) const { return nutrients_[i]; }
    const std::vector<NutrientDef> &nutrients() const noexcept { return nutrients_; }
    std::size_t energy_index() const noexcept { return energy_index_; }
    std::optional<std::size_t> find(std::string_view id) const;

    std::size_t lower_count() const noexcept;
    std::size_t upper_count() const noexcept;

    friend bool operator==(const NutrientCatalog &a, const NutrientCatalog &b) {
        return a.nutrients_ == b.nutrients_;
    }

  private:
    std::vector<NutrientDef> nutrients_;
    std::size_t energy_index_{0};
};

struct FoodItem {
    std::string item_id;
    std::string name;
    std::string food_group;
    /// As supplied, per 100 g edible portion, in catalog order.
    std::vector<double> per_100g;
    /// Per 1 kg edible portion, derived from per_100g.
    std::vector<double> per_kg;

    friend bool operator==(const FoodItem &, const FoodItem &) = default;
};

struct PriceObservation {
    std::string market_id;
    YearMonth when;
    std::string item_id;
    double price_per_kg{};

    friend bool operator==(const PriceObservation &, const PriceObservation &) = default;
};

enum class Sex { male, female };

struct MemberRecord {
    std::string person_id;
    int age_months{};
    Sex sex{Sex::female};
    bool lactating{false};
    double meals_share{1.0};

    friend bool operator==(const MemberRecord &, const MemberRecord &) = default;
};

/// One survey interview. A household interviewed in two waves has two
/// records sharing `household_id` with different survey months.
struct HouseholdRecord {
    std::string household_id;
    std::string district_id;
    YearMonth survey;
    double food_exp_day{};
    double total_exp_day{};
    double weight{1.0};
    /// Enumeration area; empty when the file carries no cluster column.
    std::string cluster_id;
    std::vector<MemberRecord> members;

    const std::string &cluster() const noexcept {
        return cluster_id.empty() ? household_id : cluster_id;
    }

    friend bool operator==(const HouseholdRecord &, const HouseholdRecord &) = default;
};

/// Daily requirements of one demographic group. Bounds are in catalog order;
/// a missing bound is nullopt.
struct RequirementRow {
    std::string group_id;
    double energy_kcal{};
    std::vector<std::optional<double>> min_need;
    std::vector<std::optional<double>> max_tolerance;

    friend bool operator==(const RequirementRow &, const RequirementRow &) = default;
};

struct MenuEntry {
    std::size_t item;
    double price_per_kg;
};

/// Validated, immutable input data.
class Dataset {
  public:
    NutrientCatalog catalog;
    std::vector<FoodItem> foods;               // sorted by item_id
    std::vector<PriceObservation> prices;      // sorted by market, month, item
    std::map<std::string, std::string> market_map;
    std::vector<HouseholdRecord> households;   // sorted by household_id, survey
    std::vector<RequirementRow> requirements;
    /// Annual currency-per-PPP-dollar conversion factors; optional input.
    std::map<int, double> ppp_annual;

    /// Checks every invariant and builds lookup indices. Throws ValidationError.
    void validate_and_index();

    const std::vector<std::string> &markets() const noexcept { return markets_; }
    std::optional<std::size_t> find_item(std::string_view item_id) const;
    const std::string &market_of(const HouseholdRecord &hh) const;

    /// Items with an observed price in a market-month, in item_id order.
    /// Empty when nothing was priced.
    std::span<const MenuEntry> menu(const std::string &market_id, YearMonth when) const;

    /// First and last month with any price row.
    std::pair<YearMonth, YearMonth> price_span() const;

    /// Distinct household ids in sorted order.
    std::vector<std::string> household_ids() const;

    const RequirementRow *find_requirement(std::string_view group_id) const;

    friend bool operator==(const Dataset &a, const Dataset &b) {
        return a.catalog == b.catalog && a.foods == b.foods && a.prices == b.prices &&
               a.market_map == b.market_map && a.households == b.households &&
               a.requirements == b.requirements && a.ppp_annual == b.ppp_annual;
    }

  private:
    std::vector<std::string> markets_;
    std::unordered_map<std::string, std::size_t> item_index_;
    std::map<std::pair<std::string, int>, std::vector<MenuEntry>> menus_;
};

/// Reads foods.csv, nutrients.csv, prices.csv, market_map.csv,
/// households.csv, members.csv, requirements.csv and (optionally)
/// ppp_annual.csv from `dir`, then validates.
Dataset load_catalog(const std::filesystem::path &dir);

/// Writes the dataset in the same layout load_catalog reads.
void write_dataset(const Dataset &dataset, const std::filesystem::path &dir);

struct AvailabilityCell {
    std::string item_id;
    YearMonth when;
    int n_markets_observed{};
};

/// Count of markets with an observed price, per item and month over the
/// price span. Items are in item_id order, months ascending.
std::vector<AvailabilityCell> availability_matrix(const Dataset &dataset);

void write_availability_csv(const std::vector<AvailabilityCell> &cells, std::ostream &out);

struct SynthParams {
    std::uint64_t seed{1};
    int n_markets{5};
    int n_items{30};
    int n_households{50};
    YearMonth start{2013, 1};
    YearMonth end{2017, 7};
    /// Amplitude of the log-price cosine cycle.
    double price_seasonal_amplitude{0.1};
    /// Fraction of market-month-item price cells left unobserved.
    double missingness_rate{0.1};
    /// Months where missingness is concentrated (1-12).
    std::set<int> lean_season_months{12, 1, 2};
    /// Relative odds of a lean-month cell going missing.
    double lean_missingness_odds{4.0};
    /// Standard deviation of iid noise on log prices.
    double price_noise_sd{0.05};
    /// Standard deviation of the monthly random-walk innovation on log prices.
    double price_trend_sd{0.0};
    /// Monthly log drift of prices.
    double price_drift{0.005};
    /// When set, every household gets a second survey record after this month.
    std::optional<YearMonth> second_wave{YearMonth{2016, 1}};
};

/// Synthetic dataset plus the ground truth it was generated from.
struct SynthResult {
    Dataset dataset;
    /// Seasonal phase per food group (radians), shared by all its items.
    std::map<std::string, double> group_phase;
    double amplitude{};
};

/// Deterministic for a fixed seed. Throws std::invalid_argument on bad params.
SynthResult synth_generate(const SynthParams &params);

} // namespace dietcost
