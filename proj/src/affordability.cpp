#include "dietcost/affordability.h"

#include "dietcost/requirements.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dietcost {

std::string_view to_string(AccessClass c) noexcept {
    switch (c) {
    case AccessClass::no_access:
        return "no_access";
    case AccessClass::reallocation_access:
        return "reallocation_access";
    case AccessClass::food_budget_access:
        return "food_budget_access";
    }
    return "no_access";
}

AccessResult ratios(const ConaCell &cell, const HouseholdRecord &household) {
    if (!(household.food_exp_day > 0.0) || !(household.total_exp_day > 0.0)) {
        throw std::invalid_argument("household " + household.household_id + " has nonpositive expenditure");
    }
    AccessResult r;
    r.household_id = household.household_id;
    r.survey = household.survey;
    r.scenario = cell.scenario;
    r.status = cell.status;
    r.weight = household.weight;
    r.cluster = household.cluster();
    r.cost_nominal = cell.cost_nominal;
    r.cost_ppp = cell.cost_ppp;
    r.per_capita = cell.per_capita;
    r.per_1000kcal = cell.per_1000kcal;
    if (!cell.optimal()) {
        r.access_class = AccessClass::no_access;
        return r;
    }
    r.ratio_food = *cell.cost_nominal / household.food_exp_day;
    r.ratio_total = *cell.cost_nominal / household.total_exp_day;
    if (*r.ratio_total > 1.0) {
        r.access_class = AccessClass::no_access;
    } else if (*r.ratio_food <= 1.0) {
        r.access_class = AccessClass::food_budget_access;
    } else {
        r.access_class = AccessClass::reallocation_access;
    }
    return r;
}

std::optional<double> premium(const ConaCell &shared, const ConaCell &individualized) {
    if (!shared.optimal() || !individualized.optimal()) {
        return std::nullopt;
    }
    return *shared.cost_nominal / *individualized.cost_nominal;
}

namespace {

void check_weighted(std::span<const double> values, std::span<const double> weights) {
    if (values.empty()) {
        throw std::invalid_argument("weighted statistic of an empty sample");
    }
    if (values.size() != weights.size()) {
        throw std::invalid_argument("values and weights differ in length");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("weights must be positive and finite");
        }
    }
}

} // namespace

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    check_weighted(values, weights);
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    const double half = total / 2.0;
    double cum = 0.0;
    for (auto i : order) {
        cum += weights[i];
        if (cum >= half) {
            return values[i];
        }
    }
    return values[order.back()];
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    check_weighted(values, weights);
    double sw = 0.0, swv = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sw += weights[i];
        swv += weights[i] * values[i];
    }
    return swv / sw;
}

std::vector<AccessResult> survey_month_access(const Dataset &dataset, const AffordabilityConfig &config) {
    const auto ppp = ppp_factors_for(dataset);
    const std::size_t S = config.scenarios.size();
    std::vector<AccessResult> out(dataset.households.size() * S);
    parallel_for(dataset.households.size(), config.workers, [&](std::size_t r) {
        const auto &hh = dataset.households[r];
        const auto req =
            household_requirement(hh, dataset.requirements, dataset.catalog, config.cona.requirements);
        MemberDietCache cache(dataset, dataset.menu(dataset.market_of(hh), hh.survey), config.cona);
        for (std::size_t s = 0; s < S; ++s) {
            ConaCell cell = config.scenarios[s] == Scenario::individualized
                                ? individualized_cona(hh, req, hh.survey, dataset, config.cona, &cache)
                                : shared_cona(hh, req, hh.survey, dataset, config.cona, &cache);
            if (ppp && ppp->factor(hh.survey)) {
                apply_ppp(cell, *ppp, config.orientation);
            }
            out[r * S + s] = ratios(cell, hh);
        }
    });
    return out;
}

namespace {

using Stat = std::function<std::optional<double>(std::span<const AccessResult *const>)>;

struct StatDef {
    std::string scenario;
    std::string name;
    Stat fn;
    std::function<std::size_t(std::span<const AccessResult *const>)> count;
};

std::optional<double> median_of(std::span<const AccessResult *const> rs,
                                const std::function<std::optional<double>(const AccessResult &)> &field) {
    std::vector<double> v, w;
    for (const auto *r : rs) {
        if (auto x = field(*r)) {
            v.push_back(*x);
            w.push_back(r->weight);
        }
    }
    if (v.empty()) {
        return std::nullopt;
    }
    return weighted_median(v, w);
}

} // namespace

std::vector<WeightedSummary> population_summary(std::span<const AccessResult> results,
                                                const SummaryOptions &options) {
    // Scenarios in order of first appearance.
    std::vector<std::string> scenarios;
    for (const auto &r : results) {
        const std::string s(to_string(r.scenario));
        if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end()) {
            scenarios.push_back(s);
        }
    }

    std::vector<StatDef> defs;
    for (const auto &sc : scenarios) {
        auto of_scenario = [sc](const AccessResult &r) { return to_string(r.scenario) == sc; };
        auto count_all = [of_scenario](std::span<const AccessResult *const> rs) {
            return static_cast<std::size_t>(
                std::count_if(rs.begin(), rs.end(), [&](const AccessResult *r) { return of_scenario(*r); }));
        };
        auto count_feasible = [of_scenario](std::span<const AccessResult *const> rs) {
            return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [&](const AccessResult *r) {
                return of_scenario(*r) && r->status == CellStatus::optimal;
            }));
        };
        auto share = [of_scenario](std::function<bool(const AccessResult &)> pred) {
            return [of_scenario, pred](std::span<const AccessResult *const> rs) -> std::optional<double> {
                double tot = 0.0, hit = 0.0;
                for (const auto *r : rs) {
                    if (of_scenario(*r)) {
                        tot += r->weight;
                        if (pred(*r)) {
                            hit += r->weight;
                        }
                    }
                }
                if (tot == 0.0) {
                    return std::nullopt;
                }
                return 100.0 * hit / tot;
            };
        };
        auto med = [of_scenario](std::function<std::optional<double>(const AccessResult &)> field) {
            return [of_scenario, field](std::span<const AccessResult *const> rs) {
                return median_of(rs, [&](const AccessResult &r) -> std::optional<double> {
                    return of_scenario(r) ? field(r) : std::nullopt;
                });
            };
        };
        defs.push_back({sc, "feasible_pct",
                        share([](const AccessResult &r) { return r.status == CellStatus::optimal; }), count_all});
        for (auto c : {AccessClass::food_budget_access, AccessClass::reallocation_access, AccessClass::no_access}) {
            defs.push_back({sc, std::string(to_string(c)) + "_pct",
                            share([c](const AccessResult &r) { return r.access_class == c; }), count_all});
        }
        defs.push_back({sc, "median_cost_nominal_day", med([](const AccessResult &r) { return r.cost_nominal; }),
                        count_feasible});
        defs.push_back({sc, "median_cost_ppp_day", med([](const AccessResult &r) { return r.cost_ppp; }),
                        count_feasible});
        defs.push_back({sc, "median_per_capita_ppp", med([](const AccessResult &r) { return r.per_capita; }),
                        count_feasible});
        defs.push_back({sc, "median_per_1000kcal_ppp", med([](const AccessResult &r) { return r.per_1000kcal; }),
                        count_feasible});
        defs.push_back({sc, "median_ratio_food", med([](const AccessResult &r) { return r.ratio_food; }),
                        count_feasible});
        defs.push_back({sc, "median_ratio_total", med([](const AccessResult &r) { return r.ratio_total; }),
                        count_feasible});
        const double line = options.reference_line;
        defs.push_back({sc, "per_capita_above_reference_line_pct",
                        [of_scenario, line](std::span<const AccessResult *const> rs) -> std::optional<double> {
                            double tot = 0.0, hit = 0.0;
                            for (const auto *r : rs) {
                                if (of_scenario(*r) && r->per_capita) {
                                    tot += r->weight;
                                    hit += *r->per_capita > line ? r->weight : 0.0;
                                }
                            }
                            if (tot == 0.0) {
                                return std::nullopt;
                            }
                            return 100.0 * hit / tot;
                        },
                        count_feasible});
    }

    // Premium pairs shared and individualized results of the same record.
    const bool has_pair = std::find(scenarios.begin(), scenarios.end(), "shared") != scenarios.end() &&
                          std::find(scenarios.begin(), scenarios.end(), "individualized") != scenarios.end();
    // Premium of each shared record, paired once so bootstrap duplicates keep their weight.
    std::map<const AccessResult *, double> premium_of;
    {
        std::map<std::pair<std::string, int>, std::pair<const AccessResult *, const AccessResult *>> pairs;
        for (const auto &r : results) {
            auto &p = pairs[{r.household_id, r.survey.index()}];
            (r.scenario == Scenario::shared ? p.first : p.second) = &r;
        }
        for (const auto &[key, p] : pairs) {
            if (p.first && p.second && p.first->cost_nominal && p.second->cost_nominal) {
                premium_of.emplace(p.first, *p.first->cost_nominal / *p.second->cost_nominal);
            }
        }
    }
    auto premiums = [&premium_of](std::span<const AccessResult *const> rs) {
        std::vector<double> v, w;
        for (const auto *r : rs) {
            if (auto it = premium_of.find(r); it != premium_of.end()) {
                v.push_back(it->second);
                w.push_back(r->weight);
            }
        }
        return std::make_pair(v, w);
    };
    if (has_pair) {
        defs.push_back({"shared/individualized", "median_premium",
                        [&premiums](std::span<const AccessResult *const> rs) -> std::optional<double> {
                            auto [v, w] = premiums(rs);
                            if (v.empty()) {
                                return std::nullopt;
                            }
                            return weighted_median(v, w);
                        },
                        [&premiums](std::span<const AccessResult *const> rs) { return premiums(rs).first.size(); }});
        defs.push_back({"shared/individualized", "mean_premium",
                        [&premiums](std::span<const AccessResult *const> rs) -> std::optional<double> {
                            auto [v, w] = premiums(rs);
                            if (v.empty()) {
                                return std::nullopt;
                            }
                            return weighted_mean(v, w);
                        },
                        [&premiums](std::span<const AccessResult *const> rs) { return premiums(rs).first.size(); }});
    }

    std::vector<const AccessResult *> all;
    all.reserve(results.size());
    for (const auto &r : results) {
        all.push_back(&r);
    }
    std::map<std::string, std::vector<const AccessResult *>> by_cluster;
    for (const auto *r : all) {
        by_cluster[r->cluster].push_back(r);
    }
    std::vector<const std::vector<const AccessResult *> *> clusters;
    for (const auto &[id, rs] : by_cluster) {
        clusters.push_back(&rs);
    }

    std::vector<std::vector<double>> draws(defs.size());
    if (options.bootstrap_reps > 1 && clusters.size() > 1) {
        std::mt19937_64 rng(options.seed);
        std::uniform_int_distribution<std::size_t> pick(0, clusters.size() - 1);
        std::vector<const AccessResult *> sample;
        for (int b = 0; b < options.bootstrap_reps; ++b) {
            sample.clear();
            for (std::size_t c = 0; c < clusters.size(); ++c) {
                const auto *cl = clusters[pick(rng)];
                sample.insert(sample.end(), cl->begin(), cl->end());
            }
            for (std::size_t d = 0; d < defs.size(); ++d) {
                if (auto v = defs[d].fn(sample)) {
                    draws[d].push_back(*v);
                }
            }
        }
    }

    std::vector<WeightedSummary> out;
    for (std::size_t d = 0; d < defs.size(); ++d) {
        WeightedSummary s;
        s.scenario = defs[d].scenario;
        s.statistic = defs[d].name;
        auto v = defs[d].fn(all);
        s.value = v.value_or(std::numeric_limits<double>::quiet_NaN());
        s.n = defs[d].count(all);
        s.se = std::numeric_limits<double>::quiet_NaN();
        if (draws[d].size() > 1) {
            double mean = 0.0;
            for (double x : draws[d]) {
                mean += x / static_cast<double>(draws[d].size());
            }
            double ss = 0.0;
            for (double x : draws[d]) {
                ss += (x - mean) * (x - mean);
            }
            s.se = std::sqrt(ss / static_cast<double>(draws[d].size() - 1));
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

std::string opt(const std::optional<double> &v) { return v ? format_double(*v) : std::string{}; }
std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string{}; }

} // namespace

void write_access_csv(std::span<const AccessResult> results, std::ostream &out) {
    write_csv_row(out, {"household_id", "scenario", "ratio_food", "ratio_total", "access_class", "survey_year",
                        "survey_month", "status", "cost_nominal", "cost_ppp", "per_capita", "per_1000kcal"});
    for (const auto &r : results) {
        write_csv_row(out, {r.household_id, std::string(to_string(r.scenario)), opt(r.ratio_food),
                            opt(r.ratio_total), std::string(to_string(r.access_class)),
                            std::to_string(r.survey.year), std::to_string(r.survey.month),
                            std::string(to_string(r.status)), opt(r.cost_nominal), opt(r.cost_ppp),
                            opt(r.per_capita), opt(r.per_1000kcal)});
    }
}

void write_summary_csv(std::span<const WeightedSummary> summary, std::ostream &out) {
    write_csv_row(out, {"scenario", "statistic", "value", "se", "n"});
    for (const auto &s : summary) {
        write_csv_row(out, {s.scenario, s.statistic, num(s.value), num(s.se), std::to_string(s.n)});
    }
}

std::vector<GroupCostSummary> group_cost_summary(const Dataset &dataset, YearMonth start, YearMonth end,
                                                 const AffordabilityConfig &config) {
    const auto ppp = ppp_factors_for(dataset);
    const int n_months = months_between(start, end);
    const auto &markets = dataset.markets();
    const std::size_t cells = markets.size() * static_cast<std::size_t>(n_months);
    const std::size_t G = dataset.requirements.size();
    // outcome[g * cells + c]: cost when optimal.
    std::vector<std::optional<double>> outcome(G * cells);
    std::vector<RequirementRow> rows;
    for (const auto &row : dataset.requirements) {
        rows.push_back(is_relaxed_group(row.group_id, config.cona.requirements)
                           ? relax_protein(row, dataset.catalog, config.cona.requirements)
                           : row);
    }
    parallel_for(cells, config.workers, [&](std::size_t c) {
        const auto &market = markets[c / n_months];
        const auto when = start.plus_months(static_cast<int>(c % n_months));
        MemberDietCache cache(dataset, dataset.menu(market, when), config.cona);
        const bool vacant = dataset.menu(market, when).empty();
        for (std::size_t g = 0; g < G; ++g) {
            if (vacant) {
                continue;
            }
            auto res = cache.solve(rows[g]);
            if (res.status == DietStatus::optimal) {
                double cost = res.cost;
                if (ppp && ppp->factor(when)) {
                    cost = to_ppp(cost, *ppp->factor(when), config.orientation);
                }
                outcome[g * cells + c] = cost;
            }
        }
    });

    std::map<std::string, double> group_weight;
    double total_weight = 0.0;
    for (const auto &hh : dataset.households) {
        for (const auto &m : hh.members) {
            if (m.age_months < kMinDietAgeMonths) {
                continue;
            }
            group_weight[group_label(m)] += hh.weight;
            total_weight += hh.weight;
        }
    }

    const bool covered = ppp && ppp->factor(start) && ppp->factor(end);
    std::vector<GroupCostSummary> out;
    for (std::size_t g = 0; g < G; ++g) {
        GroupCostSummary s;
        s.group_id = dataset.requirements[g].group_id;
        s.population_share = total_weight > 0.0 ? 100.0 * group_weight[s.group_id] / total_weight : 0.0;
        s.n_market_months = cells;
        s.ppp = covered;
        std::vector<double> costs;
        double feasible = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            if (outcome[g * cells + c]) {
                costs.push_back(*outcome[g * cells + c]);
                feasible += 1.0;
            }
        }
        const double p = cells ? feasible / static_cast<double>(cells) : 0.0;
        s.months_with_solution_mean = 100.0 * p;
        s.months_with_solution_sd =
            cells > 1 ? 100.0 * std::sqrt(p * (1.0 - p) * static_cast<double>(cells) / (cells - 1.0)) : 0.0;
        if (!costs.empty()) {
            std::vector<double> ones(costs.size(), 1.0);
            s.median_cost = weighted_median(costs, ones);
            const double mean = weighted_mean(costs, ones);
            double ss = 0.0;
            for (double x : costs) {
                ss += (x - mean) * (x - mean);
            }
            s.cost_sd = costs.size() > 1 ? std::sqrt(ss / (costs.size() - 1.0)) : 0.0;
        } else {
            s.median_cost = std::numeric_limits<double>::quiet_NaN();
            s.cost_sd = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_group_costs_csv(std::span<const GroupCostSummary> rows, std::ostream &out) {
    write_csv_row(out, {"group_id", "population_share_pct", "months_with_solution_mean_pct",
                        "months_with_solution_sd_pct", "median_cost", "cost_sd", "currency", "n_market_months"});
    for (const auto &r : rows) {
        write_csv_row(out, {r.group_id, num(r.population_share), num(r.months_with_solution_mean),
                            num(r.months_with_solution_sd), num(r.median_cost), num(r.cost_sd),
                            r.ppp ? "ppp" : "nominal", std::to_string(r.n_market_months)});
    }
}

} // namespace dietcost
