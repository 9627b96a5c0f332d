#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dietcost/affordability.h"
#include "support.h"

#include <random>
#include <sstream>

using namespace dietcost;

namespace {

ConaCell optimal_cell(double cost, Scenario s = Scenario::shared) {
    ConaCell c;
    c.scenario = s;
    c.status = CellStatus::optimal;
    c.cost_nominal = cost;
    return c;
}

HouseholdRecord budget(double food, double total) {
    HouseholdRecord h;
    h.household_id = "H";
    h.food_exp_day = food;
    h.total_exp_day = total;
    return h;
}

AccessResult result(const std::string &id, Scenario s, AccessClass c, double weight, std::optional<double> cost,
                    const std::string &cluster) {
    AccessResult r;
    r.household_id = id;
    r.scenario = s;
    r.access_class = c;
    r.weight = weight;
    r.cost_nominal = cost;
    r.status = cost ? CellStatus::optimal : CellStatus::infeasible;
    r.cluster = cluster;
    return r;
}

const WeightedSummary &stat(const std::vector<WeightedSummary> &s, const std::string &scenario,
                            const std::string &name) {
    for (const auto &x : s) {
        if (x.scenario == scenario && x.statistic == name) {
            return x;
        }
    }
    FAIL("missing statistic " << scenario << " " << name);
    throw;
}

} // namespace

TEST_CASE("access classes") {
    auto r = ratios(optimal_cell(7.5), budget(7.5, 10));
    CHECK(*r.ratio_food == 1.0);
    CHECK(*r.ratio_total == 0.75);
    CHECK(r.access_class == AccessClass::food_budget_access);

    CHECK(ratios(optimal_cell(9), budget(7, 10)).access_class == AccessClass::reallocation_access);
    CHECK(ratios(optimal_cell(11), budget(7, 10)).access_class == AccessClass::no_access);
    CHECK(ratios(optimal_cell(10), budget(7, 10)).access_class == AccessClass::reallocation_access);

    ConaCell infeasible;
    infeasible.status = CellStatus::infeasible;
    auto n = ratios(infeasible, budget(7, 10));
    CHECK(n.access_class == AccessClass::no_access);
    CHECK_FALSE(n.ratio_food);
    CHECK_FALSE(n.ratio_total);

    CHECK_THROWS_AS(ratios(optimal_cell(1), budget(0, 10)), std::invalid_argument);
}

TEST_CASE("premium") {
    CHECK(*premium(optimal_cell(9.24), optimal_cell(7.96, Scenario::individualized)) ==
          doctest::Approx(1.161).epsilon(1e-3));
    ConaCell infeasible;
    CHECK_FALSE(premium(infeasible, optimal_cell(7.96, Scenario::individualized)));
}

TEST_CASE("weighted median and mean") {
    std::vector<double> v3 = {1, 2, 3}, w3 = {1, 1, 1};
    CHECK(weighted_median(v3, w3) == 2);
    std::vector<double> v2 = {1, 2}, w2 = {3, 1};
    CHECK(weighted_median(v2, w2) == 1);
    std::vector<double> even = {1, 2}, ew = {1, 1};
    CHECK(weighted_median(even, ew) == 1);
    CHECK(weighted_mean(v2, w2) == 1.25);

    std::vector<double> empty;
    CHECK_THROWS_AS(weighted_median(empty, empty), std::invalid_argument);
    std::vector<double> zero = {0};
    std::vector<double> one = {1};
    CHECK_THROWS_AS(weighted_mean(one, zero), std::invalid_argument);
    CHECK_THROWS_AS(weighted_mean(v2, w3), std::invalid_argument);
}

TEST_CASE("weighted statistics match brute force") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 40);
    std::uniform_int_distribution<int> small(1, 6);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int rep = 0; rep < 2000; ++rep) {
        int n = size(rng);
        std::vector<double> v(n), w(n);
        for (int i = 0; i < n; ++i) {
            v[i] = rep % 2 ? small(rng) : u(rng);
            w[i] = rep % 3 ? small(rng) : u(rng);
        }
        CHECK(weighted_median(v, w) == testing::brute_weighted_median(v, w));
        double sw = 0, swv = 0;
        for (int i = 0; i < n; ++i) {
            sw += w[i];
            swv += w[i] * v[i];
        }
        CHECK(weighted_mean(v, w) == swv / sw);

        std::vector<double> scaled = w;
        for (auto &x : scaled) {
            x *= 4.0;
        }
        CHECK(weighted_median(v, scaled) == weighted_median(v, w));
    }
}

TEST_CASE("population summary shares") {
    std::vector<AccessResult> rs;
    // 10 households of weight 1..10; shared food_budget_access for weights summing to 20% of 55.
    const AccessClass classes[] = {AccessClass::food_budget_access, AccessClass::reallocation_access,
                                   AccessClass::no_access};
    for (int i = 1; i <= 10; ++i) {
        std::string id = "H" + std::to_string(i);
        std::string cl = "EA" + std::to_string(i % 4);
        rs.push_back(result(id, Scenario::individualized, AccessClass::food_budget_access, i, 10.0, cl));
        AccessClass c = (i == 1 || i == 10) ? classes[0] : classes[1 + i % 2];
        rs.push_back(result(id, Scenario::shared, c, i, 10.0 + i, cl));
    }
    auto s = population_summary(rs, {50, 3, 1.9});
    CHECK(stat(s, "individualized", "food_budget_access_pct").value == 100.0);
    CHECK(stat(s, "individualized", "no_access_pct").value == 0.0);
    CHECK(stat(s, "shared", "food_budget_access_pct").value == doctest::Approx(20.0).epsilon(1e-14));
    for (const char *sc : {"individualized", "shared"}) {
        double sum = stat(s, sc, "food_budget_access_pct").value + stat(s, sc, "reallocation_access_pct").value +
                     stat(s, sc, "no_access_pct").value;
        CHECK(std::abs(sum - 100.0) < 1e-10);
    }
    const auto &prem = stat(s, "shared/individualized", "median_premium");
    std::vector<double> v, w;
    for (int i = 1; i <= 10; ++i) {
        v.push_back((10.0 + i) / 10.0);
        w.push_back(i);
    }
    CHECK(prem.value == weighted_median(v, w));
    CHECK(prem.n == 10);
    CHECK(prem.se > 0);

    auto heavier = rs;
    for (auto &r : heavier) {
        r.weight *= 7.5;
    }
    auto s2 = population_summary(heavier, {0, 3, 1.9});
    CHECK(stat(s2, "shared", "food_budget_access_pct").value == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(stat(s2, "shared/individualized", "median_premium").value == prem.value);

    auto again = population_summary(rs, {50, 3, 1.9});
    CHECK(again.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK((again[i].se == s[i].se || (std::isnan(again[i].se) && std::isnan(s[i].se))));
    }
}

TEST_CASE("survey-month access on the toy dataset") {
    auto ds = testing::toy_dataset();
    AffordabilityConfig config;
    config.workers = 2;
    auto rs = survey_month_access(ds, config);
    REQUIRE(rs.size() == 8);
    CHECK(rs[0].household_id == "H1");
    CHECK(rs[0].scenario == Scenario::individualized);
    CHECK(rs[1].scenario == Scenario::shared);
    CHECK(rs[4].status == CellStatus::infeasible_by_vacancy);
    CHECK(rs[4].access_class == AccessClass::no_access);
    for (std::size_t i = 0; i < rs.size(); i += 2) {
        if (rs[i + 1].access_class == AccessClass::food_budget_access) {
            CHECK(rs[i].access_class == AccessClass::food_budget_access);
        }
        if (rs[i].cost_nominal && rs[i + 1].cost_nominal) {
            CHECK(*rs[i + 1].cost_nominal >= *rs[i].cost_nominal - 1e-9);
        }
    }
    CHECK(*rs[2].cost_nominal == doctest::Approx(*rs[3].cost_nominal).epsilon(1e-12));
    CHECK(*rs[0].cost_ppp == doctest::Approx(*rs[0].cost_nominal / 200).epsilon(1e-9));

    std::ostringstream out;
    write_access_csv(rs, out);
    CHECK(out.str().rfind("household_id,scenario,ratio_food,ratio_total,access_class", 0) == 0);

    auto groups = group_cost_summary(ds, {2013, 1}, {2013, 12}, config);
    CHECK(groups.size() == 5);
    for (const auto &g : groups) {
        CHECK(g.n_market_months == 24);
        CHECK(g.months_with_solution_mean == doctest::Approx(100.0 * 11.0 / 12.0 * 0.5 + 50.0));
        CHECK(g.ppp);
    }
}
