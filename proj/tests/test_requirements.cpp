#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dietcost/requirements.h"
#include "support.h"

#include <algorithm>
#include <random>

using namespace dietcost;

namespace {

NutrientCatalog small_catalog() {
    return NutrientCatalog({{"energy", "Energy", "kcal", BoundKind::equality},
                            {"iron", "Iron", "mg", BoundKind::both},
                            {"copper", "Copper", "mg", BoundKind::both},
                            {"vitamin_c", "Vitamin C", "mg", BoundKind::lower_only},
                            {"sodium", "Sodium", "mg", BoundKind::upper_only}});
}

RequirementRow make_row(std::string id, double energy, double iron_min, double iron_max, double cu_min,
                        double cu_max, double vitc, double sodium) {
    RequirementRow r;
    r.group_id = std::move(id);
    r.energy_kcal = energy;
    r.min_need = {std::nullopt, iron_min, cu_min, vitc, std::nullopt};
    r.max_tolerance = {std::nullopt, iron_max, cu_max, std::nullopt, sodium};
    return r;
}

MemberRecord member(int age, Sex sex, bool lactating = false, double share = 1.0) {
    MemberRecord m;
    m.person_id = "p" + std::to_string(age);
    m.age_months = age;
    m.sex = sex;
    m.lactating = lactating;
    m.meals_share = share;
    return m;
}

} // namespace

TEST_CASE("group labels") {
    CHECK(group_label(member(300, Sex::female, true)) == "Lactation (F) 19-30 y");
    CHECK(group_label(member(60, Sex::male)) == "Child (M) 4-8 y");
    CHECK(group_label(member(6, Sex::female)) == "Infant (all) 6 months-1 y");
    CHECK(group_label(member(35, Sex::male)) == "Child (all) 1-2 y");
    CHECK(group_label(member(36, Sex::female)) == "Child (F) 3 y");
    CHECK(group_label(member(900, Sex::male)) == "Older Adult (M) 70+ y");
    CHECK_THROWS_AS(group_label(member(3, Sex::male)), RequirementError);
    CHECK_THROWS_AS(group_label(member(800, Sex::female, true)), RequirementError);
    CHECK(standard_group_labels().size() == 21);
}

TEST_CASE("classify looks the label up in the table") {
    std::vector<RequirementRow> table = {make_row("Child (M) 4-8 y", 1500, 10, 40, 0.4, 3, 25, 1900)};
    CHECK(classify(member(60, Sex::male), table).energy_kcal == 1500);
    CHECK_THROWS_AS(classify(member(60, Sex::female), table), RequirementError);
}

TEST_CASE("partial meals scale every bound") {
    auto row = make_row("g", 2400, 18, 45, 0.9, 10, 75, 2300);
    CHECK(scale_partial(row, 1.0) == row);
    auto half = scale_partial(row, 0.5);
    CHECK(half.energy_kcal == 1200);
    CHECK(*half.min_need[1] == 9);
    CHECK(*half.max_tolerance[1] == 22.5);
    CHECK(*half.min_need[3] == 37.5);
    CHECK(*half.max_tolerance[4] == 1150);
    CHECK_FALSE(half.min_need[4]);
    CHECK_THROWS_AS(scale_partial(row, 1.5), std::invalid_argument);
}

TEST_CASE("partition by age and meals share") {
    HouseholdRecord h;
    h.members = {member(2, Sex::female), member(360, Sex::female), member(48, Sex::male)};
    auto p = partition(h);
    REQUIRE(p.excluded.size() == 1);
    CHECK(p.excluded[0]->age_months == 2);
    CHECK(p.addon_children.empty());
    CHECK(p.shared_pool.size() == 2);

    h.members = {member(18, Sex::male)};
    p = partition(h);
    CHECK(p.shared_pool.empty());
    CHECK(p.addon_children.size() == 1);

    h.members = {member(400, Sex::male, false, 0.0), member(20, Sex::male, false, 0.0)};
    p = partition(h);
    CHECK(p.excluded.size() == 2);
}

TEST_CASE("shared bounds use the extreme densities") {
    auto cat = small_catalog();
    std::vector<RequirementRow> pool = {make_row("a", 2000, 18, 45, 0.9, 8, 75, 2300),
                                        make_row("b", 2500, 8, 45, 0.9, 5, 90, 2300)};
    auto s = shared_requirements(pool, cat);
    CHECK(s.energy_total == 4500);
    CHECK(*s.lower[1] == doctest::Approx(40.5).epsilon(1e-14));
    CHECK(*s.upper[2] == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(*s.upper[2] < 8 + 5);
    CHECK_FALSE(s.upper[3]);
    CHECK_FALSE(s.lower[4]);
    CHECK_FALSE(s.lower[0]);
    CHECK_FALSE(s.structurally_infeasible());

    std::vector<RequirementRow> one = {pool[0]};
    auto single = shared_requirements(one, cat);
    for (std::size_t j = 0; j < cat.size(); ++j) {
        CHECK(single.lower[j] == pool[0].min_need[j]);
        CHECK(single.upper[j] == pool[0].max_tolerance[j]);
    }

    std::vector<RequirementRow> conflict = {make_row("a", 2000, 30, 45, 0.9, 8, 75, 2300),
                                            make_row("b", 2000, 8, 20, 0.9, 8, 75, 2300)};
    auto c = shared_requirements(conflict, cat);
    REQUIRE(c.structural_conflicts.size() == 1);
    CHECK(c.structural_conflicts[0] == 1);

    CHECK_THROWS_AS(shared_requirements(std::span<const RequirementRow>{}, cat), std::invalid_argument);
}

TEST_CASE("shared bounds do not depend on pool order and tighten as members join") {
    auto cat = small_catalog();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<RequirementRow> pool;
        int size = 2 + rep % 5;
        for (int i = 0; i < size; ++i) {
            pool.push_back(make_row("g" + std::to_string(i), 2000 * u(rng), 10 * u(rng),
                                    45 * u(rng), 0.9 * u(rng), 8 * u(rng), 60 * u(rng), 2000 * u(rng)));
        }
        auto a = shared_requirements(pool, cat);
        std::shuffle(pool.begin(), pool.end(), rng);
        auto b = shared_requirements(pool, cat);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);

        std::span<const RequirementRow> smaller(pool.data(), pool.size() - 1);
        auto s = shared_requirements(smaller, cat);
        for (std::size_t j = 1; j < cat.size(); ++j) {
            if (a.lower[j]) {
                CHECK(*a.lower[j] / a.energy_total >= *s.lower[j] / s.energy_total * (1 - 1e-15));
            }
            if (a.upper[j]) {
                CHECK(*a.upper[j] / a.energy_total <= *s.upper[j] / s.energy_total * (1 + 1e-15));
            }
        }
    }
}

TEST_CASE("household requirement") {
    auto ds = testing::toy_dataset();
    const auto &h1 = ds.households[0];
    auto req = household_requirement(h1, ds.requirements, ds.catalog);
    CHECK(req.pool.size() == 2);
    CHECK(req.addon_children.empty());
    REQUIRE(req.shared);
    CHECK(req.energy_total == 3600);
    CHECK(req.n_eaters == 2);

    const auto &h3 = ds.households[2];
    req = household_requirement(h3, ds.requirements, ds.catalog);
    CHECK(req.pool.size() == 1);
    REQUIRE(req.addon_children.size() == 1);
    CHECK(req.excluded.size() == 1);
    // The breastfed infant eats nothing from the menu but still counts per capita.
    CHECK(req.n_eaters == 3);
    CHECK(req.energy_total == 3500);
    // 18-month add-on gets the relaxed protein ceiling.
    CHECK(*req.addon_children[0].row.max_tolerance[1] == doctest::Approx(90));

    const auto &h4 = ds.households[3];
    req = household_requirement(h4, ds.requirements, ds.catalog);
    CHECK(req.pool.empty());
    CHECK_FALSE(req.shared);
    CHECK(req.addon_children.size() == 2);
}

TEST_CASE("protein relaxation groups") {
    CHECK(is_relaxed_group("Infant (all) 6 months-1 y"));
    CHECK(is_relaxed_group("Child (all) 1-2 y"));
    CHECK_FALSE(is_relaxed_group("Child (M) 3 y"));
    CHECK_FALSE(is_relaxed_group("Adult (F) 19-30 y"));
}
