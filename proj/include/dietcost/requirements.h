#pragma once

#include "dietcost/data_io.h"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dietcost {

/// The requirement table does not cover a member, or the member is below
/// the classification floor (6 months).
class RequirementError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Youngest age with a requirement row; younger infants are assumed
/// exclusively breastfed.
inline constexpr int kMinDietAgeMonths = 6;
/// Members from this age on share the household diet; younger ones get
/// individual add-on diets.
inline constexpr int kSharedPoolMinMonths = 48;

/// Age-sex-lactation group label, matching the group_id convention of
/// requirements.csv (e.g. "Adult (F) 19-30 y", "Lactation (F) 31-50 y").
std::string group_label(const MemberRecord &member);

/// Every group label a complete requirement table must provide.
const std::vector<std::string> &standard_group_labels();

const RequirementRow &classify(const MemberRecord &member, std::span<const RequirementRow> table);

/// Energy and every bound multiplied by `meals_share`.
RequirementRow scale_partial(const RequirementRow &row, double meals_share);

struct Partition {
    std::vector<const MemberRecord *> shared_pool;
    std::vector<const MemberRecord *> addon_children;
    std::vector<const MemberRecord *> excluded;
};

Partition partition(const HouseholdRecord &household);

/// Shared household bounds over a pool of (already scaled) requirement rows.
struct SharedBounds {
    std::vector<std::optional<double>> lower;
    std::vector<std::optional<double>> upper;
    double energy_total{};
    /// Nutrients whose shared lower bound exceeds the shared upper bound.
    std::vector<std::size_t> structural_conflicts;

    bool structurally_infeasible() const noexcept { return !structural_conflicts.empty(); }
};

/// Lower = HHE * max_i(min_i / E_i), Upper = HHE * min_i(max_i / E_i),
/// HHE = sum_i E_i. The result does not depend on pool order.
/// Throws std::invalid_argument on an empty pool.
SharedBounds shared_requirements(std::span<const RequirementRow> pool, const NutrientCatalog &catalog);

struct RequirementOptions {
    std::string protein_id{"protein"};
    /// Multiplier on the protein upper bound for young add-on children.
    double young_child_protein_relaxation{1.5};
    /// Oldest age (inclusive) receiving the relaxation.
    int young_child_max_months{35};
};

/// Copy of `row` with the protein upper bound relaxed, as used for children
/// up to options.young_child_max_months.
RequirementRow relax_protein(const RequirementRow &row, const NutrientCatalog &catalog,
                             const RequirementOptions &options = {});

/// True when every member classified into `group_id` receives the protein
/// relaxation (groups lying entirely within the relaxed age range).
bool is_relaxed_group(std::string_view group_id, const RequirementOptions &options = {});

struct MemberRequirement {
    std::string person_id;
    RequirementRow row; // scaled by meals_share
};

/// Everything the diet scenarios need for one household record.
struct HouseholdRequirement {
    std::vector<MemberRequirement> pool;
    std::vector<MemberRequirement> addon_children;
    std::vector<std::string> excluded;
    /// Absent when nobody aged 4+ eats in the household.
    std::optional<SharedBounds> shared;
    /// Energy of everyone fed: pool plus add-on children.
    double energy_total{};
    /// Members with a positive meals share.
    int n_eaters{};
};

HouseholdRequirement household_requirement(const HouseholdRecord &household,
                                           std::span<const RequirementRow> table,
                                           const NutrientCatalog &catalog,
                                           const RequirementOptions &options = {});

} // namespace dietcost
