#include "dietcost/requirements.h"

#include <algorithm>
#include <numeric>

namespace dietcost {

namespace {

struct AgeBand {
    int min_months;
    int max_months; // inclusive
    const char *label;
};

// Dietary Reference Intake bands; 3-year-olds are separated from 1-2 y.
constexpr AgeBand kChildBands[] = {
    {6, 11, "Infant (all) 6 months-1 y"},
    {12, 35, "Child (all) 1-2 y"},
};

constexpr AgeBand kMaleBands[] = {
    {36, 47, "Child (M) 3 y"},          {48, 107, "Child (M) 4-8 y"},
    {108, 167, "Adolescent (M) 9-13 y"}, {168, 227, "Adolescent (M) 14-18 y"},
    {228, 371, "Adult (M) 19-30 y"},     {372, 611, "Adult (M) 31-50 y"},
    {612, 851, "Adult (M) 51-70 y"},     {852, 1 << 20, "Older Adult (M) 70+ y"},
};

constexpr AgeBand kFemaleBands[] = {
    {36, 47, "Child (F) 3 y"},          {48, 107, "Child (F) 4-8 y"},
    {108, 167, "Adolescent (F) 9-13 y"}, {168, 227, "Adolescent (F) 14-18 y"},
    {228, 371, "Adult (F) 19-30 y"},     {372, 611, "Adult (F) 31-50 y"},
    {612, 851, "Adult (F) 51-70 y"},     {852, 1 << 20, "Older Adult (F) 70+ y"},
};

constexpr AgeBand kLactationBands[] = {
    {168, 227, "Lactation (F) 14-18 y"},
    {228, 371, "Lactation (F) 19-30 y"},
    {372, 611, "Lactation (F) 31-50 y"},
};

template <std::size_t N>
const char *find_band(const AgeBand (&bands)[N], int age) {
    for (const auto &b : bands) {
        if (age >= b.min_months && age <= b.max_months) {
            return b.label;
        }
    }
    return nullptr;
}

// Strict weak order over rows by content, used to canonicalize pool order.
bool row_less(const RequirementRow &a, const RequirementRow &b) {
    if (a.energy_kcal != b.energy_kcal) {
        return a.energy_kcal < b.energy_kcal;
    }
    if (a.min_need != b.min_need) {
        return a.min_need < b.min_need;
    }
    if (a.max_tolerance != b.max_tolerance) {
        return a.max_tolerance < b.max_tolerance;
    }
    return a.group_id < b.group_id;
}

} // namespace

std::string group_label(const MemberRecord &m) {
    if (m.age_months < kMinDietAgeMonths) {
        throw RequirementError("member '" + m.person_id + "' is younger than 6 months");
    }
    if (const char *label = find_band(kChildBands, m.age_months)) {
        return label;
    }
    if (m.lactating) {
        if (const char *label = find_band(kLactationBands, m.age_months)) {
            return label;
        }
        throw RequirementError("no lactation group for member '" + m.person_id + "'");
    }
    const char *label = m.sex == Sex::male ? find_band(kMaleBands, m.age_months)
                                           : find_band(kFemaleBands, m.age_months);
    return label;
}

const std::vector<std::string> &standard_group_labels() {
    static const std::vector<std::string> labels = [] {
        std::vector<std::string> out;
        for (const auto &b : kChildBands) {
            out.emplace_back(b.label);
        }
        for (const auto &b : kMaleBands) {
            out.emplace_back(b.label);
        }
        for (const auto &b : kFemaleBands) {
            out.emplace_back(b.label);
        }
        for (const auto &b : kLactationBands) {
            out.emplace_back(b.label);
        }
        return out;
    }();
    return labels;
}

const RequirementRow &classify(const MemberRecord &member, std::span<const RequirementRow> table) {
    auto label = group_label(member);
    for (const auto &row : table) {
        if (row.group_id == label) {
            return row;
        }
    }
    throw RequirementError("requirement table has no row for group '" + label + "'");
}

RequirementRow scale_partial(const RequirementRow &row, double meals_share) {
    if (!(meals_share >= 0.0 && meals_share <= 1.0)) {
        throw std::invalid_argument("meals_share must be in [0,1]");
    }
    if (meals_share == 1.0) {
        return row;
    }
    RequirementRow out = row;
    out.energy_kcal *= meals_share;
    for (auto &v : out.min_need) {
        if (v) {
            *v *= meals_share;
        }
    }
    for (auto &v : out.max_tolerance) {
        if (v) {
            *v *= meals_share;
        }
    }
    return out;
}

Partition partition(const HouseholdRecord &household) {
    Partition p;
    for (const auto &m : household.members) {
        if (m.meals_share <= 0.0 || m.age_months < kMinDietAgeMonths) {
            p.excluded.push_back(&m);
        } else if (m.age_months < kSharedPoolMinMonths) {
            p.addon_children.push_back(&m);
        } else {
            p.shared_pool.push_back(&m);
        }
    }
    return p;
}

SharedBounds shared_requirements(std::span<const RequirementRow> pool, const NutrientCatalog &catalog) {
    if (pool.empty()) {
        throw std::invalid_argument("shared requirements need a non-empty pool");
    }
    std::vector<const RequirementRow *> rows;
    for (const auto &r : pool) {
        if (!(r.energy_kcal > 0.0)) {
            throw std::invalid_argument("pool member '" + r.group_id + "' has no energy requirement");
        }
        rows.push_back(&r);
    }
    std::sort(rows.begin(), rows.end(), [](auto *a, auto *b) { return row_less(*a, *b); });

    SharedBounds out;
    out.lower.resize(catalog.size());
    out.upper.resize(catalog.size());
    for (const auto *r : rows) {
        out.energy_total += r->energy_kcal;
    }
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        const auto kind = catalog[j].bound_kind;
        // Bound = (bound of the extreme-density member) * HHE / E_member, so a
        // single-member pool reproduces its own row exactly.
        if (has_lower(kind)) {
            const RequirementRow *best = nullptr;
            double best_density = 0.0;
            for (const auto *r : rows) {
                double density = r->min_need[j].value() / r->energy_kcal;
                if (best == nullptr || density > best_density) {
                    best = r;
                    best_density = density;
                }
            }
            out.lower[j] = *best->min_need[j] * (out.energy_total / best->energy_kcal);
        }
        if (has_upper(kind)) {
            const RequirementRow *best = nullptr;
            double best_density = 0.0;
            for (const auto *r : rows) {
                double density = r->max_tolerance[j].value() / r->energy_kcal;
                if (best == nullptr || density < best_density) {
                    best = r;
                    best_density = density;
                }
            }
            out.upper[j] = *best->max_tolerance[j] * (out.energy_total / best->energy_kcal);
        }
        if (out.lower[j] && out.upper[j] && *out.lower[j] > *out.upper[j]) {
            out.structural_conflicts.push_back(j);
        }
    }
    return out;
}

RequirementRow relax_protein(const RequirementRow &row, const NutrientCatalog &catalog,
                             const RequirementOptions &options) {
    RequirementRow out = row;
    auto protein = catalog.find(options.protein_id);
    if (protein && *protein < out.max_tolerance.size() && out.max_tolerance[*protein]) {
        *out.max_tolerance[*protein] *= options.young_child_protein_relaxation;
    }
    return out;
}

bool is_relaxed_group(std::string_view group_id, const RequirementOptions &options) {
    bool any = false;
    for (Sex sex : {Sex::male, Sex::female}) {
        for (int age = kMinDietAgeMonths; age < kSharedPoolMinMonths; ++age) {
            MemberRecord m;
            m.age_months = age;
            m.sex = sex;
            if (group_label(m) == group_id) {
                if (age > options.young_child_max_months) {
                    return false;
                }
                any = true;
            }
        }
    }
    return any;
}

HouseholdRequirement household_requirement(const HouseholdRecord &household,
                                           std::span<const RequirementRow> table,
                                           const NutrientCatalog &catalog,
                                           const RequirementOptions &options) {
    HouseholdRequirement out;
    auto parts = partition(household);

    for (const auto *m : parts.excluded) {
        out.excluded.push_back(m->person_id);
    }
    for (const auto *m : parts.shared_pool) {
        out.pool.push_back({m->person_id, scale_partial(classify(*m, table), m->meals_share)});
    }
    for (const auto *m : parts.addon_children) {
        RequirementRow row = classify(*m, table);
        if (m->age_months <= options.young_child_max_months) {
            row = relax_protein(row, catalog, options);
        }
        out.addon_children.push_back({m->person_id, scale_partial(row, m->meals_share)});
    }
    if (!out.pool.empty()) {
        std::vector<RequirementRow> rows;
        rows.reserve(out.pool.size());
        for (const auto &p : out.pool) {
            rows.push_back(p.row);
        }
        out.shared = shared_requirements(rows, catalog);
    }
    std::vector<double> energies;
    for (const auto &p : out.pool) {
        energies.push_back(p.row.energy_kcal);
    }
    for (const auto &c : out.addon_children) {
        energies.push_back(c.row.energy_kcal);
    }
    std::sort(energies.begin(), energies.end());
    out.energy_total = std::accumulate(energies.begin(), energies.end(), 0.0);
    out.n_eaters = static_cast<int>(std::count_if(household.members.begin(), household.members.end(),
                                                  [](const auto &m) { return m.meals_share > 0.0; }));
    return out;
}

} // namespace dietcost
