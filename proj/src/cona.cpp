#include "dietcost/cona.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace dietcost {

std::string_view to_string(Scenario s) noexcept {
    return s == Scenario::individualized ? "individualized" : "shared";
}

Scenario parse_scenario(std::string_view text) {
    if (text == "individualized") {
        return Scenario::individualized;
    }
    if (text == "shared") {
        return Scenario::shared;
    }
    throw std::invalid_argument("unknown scenario '" + std::string(text) + "'");
}

std::string_view to_string(CellStatus s) noexcept {
    switch (s) {
    case CellStatus::optimal:
        return "optimal";
    case CellStatus::infeasible:
        return "infeasible";
    case CellStatus::infeasible_by_vacancy:
        return "infeasible_by_vacancy";
    case CellStatus::structural_infeasible:
        return "structural_infeasible";
    case CellStatus::numerical_failure:
        return "numerical_failure";
    }
    return "numerical_failure";
}

CellStatus parse_cell_status(std::string_view text) {
    for (auto s : {CellStatus::optimal, CellStatus::infeasible, CellStatus::infeasible_by_vacancy,
                   CellStatus::structural_infeasible, CellStatus::numerical_failure}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw std::invalid_argument("unknown cell status '" + std::string(text) + "'");
}

MemberDietCache::MemberDietCache(const Dataset &dataset, std::span<const MenuEntry> menu,
                                 const ConaOptions &options)
    : dataset_{dataset}, menu_{menu}, options_{options} {}

MemberDietCache::Outcome MemberDietCache::solve(const RequirementRow &row) {
    std::vector<double> key;
    key.reserve(1 + 2 * row.min_need.size());
    key.push_back(row.energy_kcal);
    for (const auto &v : row.min_need) {
        key.push_back(v.value_or(-1.0));
    }
    for (const auto &v : row.max_tolerance) {
        key.push_back(v.value_or(-1.0));
    }
    if (auto it = memo_.find(key); it != memo_.end()) {
        return it->second;
    }
    auto problem = build_problem(bounds_of(row), menu_, dataset_);
    Outcome out{DietStatus::infeasible, 0.0};
    if (problem) {
        auto sol = solve_certified(*problem, options_.solver, options_.certificate_tol);
        out = {sol.status, sol.cost};
    }
    memo_.emplace(std::move(key), out);
    return out;
}

namespace {

ConaCell blank_cell(const HouseholdRecord &hh, const HouseholdRequirement &req, YearMonth when,
                    Scenario scenario, const Dataset &dataset) {
    ConaCell c;
    c.household_id = hh.household_id;
    c.market_id = dataset.market_of(hh);
    c.when = when;
    c.scenario = scenario;
    c.energy_total = req.energy_total;
    c.n_eaters = req.n_eaters;
    return c;
}

// Worst status wins: a numerical failure is never reported as infeasibility.
void merge_status(CellStatus &acc, DietStatus s) {
    if (s == DietStatus::numerical_failure) {
        acc = CellStatus::numerical_failure;
    } else if (s == DietStatus::infeasible && acc == CellStatus::optimal) {
        acc = CellStatus::infeasible;
    }
}

MemberDietCache::Outcome solve_member(const RequirementRow &row, std::span<const MenuEntry> menu,
                                      const Dataset &dataset, const ConaOptions &options,
                                      MemberDietCache *cache) {
    if (cache) {
        return cache->solve(row);
    }
    MemberDietCache local(dataset, menu, options);
    return local.solve(row);
}

} // namespace

ConaCell individualized_cona(const HouseholdRecord &hh, const HouseholdRequirement &req, YearMonth when,
                             const Dataset &dataset, const ConaOptions &options,
                             MemberDietCache *cache) {
    ConaCell cell = blank_cell(hh, req, when, Scenario::individualized, dataset);
    auto menu = dataset.menu(cell.market_id, when);
    if (menu.empty()) {
        cell.status = CellStatus::infeasible_by_vacancy;
        return cell;
    }
    CellStatus status = CellStatus::optimal;
    double total = 0.0;
    auto add = [&](const MemberRequirement &m) {
        auto out = solve_member(m.row, menu, dataset, options, cache);
        merge_status(status, out.status);
        if (out.status == DietStatus::optimal) {
            total += out.cost;
        } else {
            cell.failing_members.push_back(m.person_id);
        }
    };
    for (const auto &m : req.pool) {
        add(m);
    }
    for (const auto &m : req.addon_children) {
        add(m);
    }
    cell.status = status;
    if (status == CellStatus::optimal) {
        cell.cost_nominal = total;
    }
    return cell;
}

ConaCell shared_cona(const HouseholdRecord &hh, const HouseholdRequirement &req, YearMonth when,
                     const Dataset &dataset, const ConaOptions &options, MemberDietCache *cache) {
    ConaCell cell = blank_cell(hh, req, when, Scenario::shared, dataset);
    auto menu = dataset.menu(cell.market_id, when);
    if (menu.empty()) {
        cell.status = CellStatus::infeasible_by_vacancy;
        return cell;
    }
    if (req.shared && req.shared->structurally_infeasible()) {
        cell.status = CellStatus::structural_infeasible;
        cell.failing_members.push_back("shared");
        return cell;
    }
    CellStatus status = CellStatus::optimal;
    double total = 0.0;
    if (req.shared) {
        DietBounds bounds{req.shared->lower, req.shared->upper, req.shared->energy_total};
        auto problem = build_problem(bounds, menu, dataset);
        auto sol = solve_certified(*problem, options.solver, options.certificate_tol);
        merge_status(status, sol.status);
        if (sol.status == DietStatus::optimal) {
            total += sol.cost;
        } else {
            cell.failing_members.push_back("shared");
        }
    } else {
        cell.addon_only = true;
    }
    for (const auto &m : req.addon_children) {
        auto out = solve_member(m.row, menu, dataset, options, cache);
        merge_status(status, out.status);
        if (out.status == DietStatus::optimal) {
            total += out.cost;
        } else {
            cell.failing_members.push_back(m.person_id);
        }
    }
    cell.status = status;
    if (status == CellStatus::optimal) {
        cell.cost_nominal = total;
    }
    return cell;
}

void apply_ppp(ConaCell &cell, const PpFactorSeries &factors, PppOrientation orientation) {
    if (!cell.cost_nominal) {
        cell.cost_ppp.reset();
        cell.per_capita.reset();
        cell.per_1000kcal.reset();
        return;
    }
    auto f = factors.factor(cell.when);
    if (!f) {
        throw std::out_of_range("no PPP conversion factor for " + cell.when.to_string());
    }
    cell.cost_ppp = to_ppp(*cell.cost_nominal, *f, orientation);
    cell.per_capita = *cell.cost_ppp / cell.n_eaters;
    cell.per_1000kcal = *cell.cost_ppp * 1000.0 / cell.energy_total;
}

std::size_t record_for_month(std::span<const HouseholdRecord *const> records, YearMonth when,
                             const std::optional<YearMonth> &switch_date) {
    if (records.size() == 1 || !switch_date) {
        return 0;
    }
    std::optional<std::size_t> before, after;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i]->survey < *switch_date) {
            before = i;
        } else if (!after) {
            after = i;
        }
    }
    if (when < *switch_date) {
        return before ? *before : *after;
    }
    return after ? *after : *before;
}

std::optional<PpFactorSeries> ppp_factors_for(const Dataset &dataset) {
    if (dataset.ppp_annual.empty()) {
        return std::nullopt;
    }
    return denton_monthly_factors(dataset.ppp_annual);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &fn) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
                return;
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(body);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

ConaPanel cona_panel(const Dataset &dataset, const PanelConfig &config) {
    if (config.end < config.start) {
        throw std::invalid_argument("panel horizon end precedes start");
    }
    ConaPanel panel;
    panel.household_ids = dataset.household_ids();
    panel.scenarios = config.scenarios;
    panel.start = config.start;
    panel.n_months = months_between(config.start, config.end);
    panel.cells.resize(panel.household_ids.size() * panel.scenarios.size() * panel.n_months);

    auto ppp = ppp_factors_for(dataset);
    if (ppp && (config.start < ppp->start || ppp->end() < config.end)) {
        throw ValidationError(ErrorKind::rule, "ppp_annual.csv", 0,
                              "conversion factors do not cover the panel horizon " +
                                  config.start.to_string() + " to " + config.end.to_string());
    }

    std::vector<HouseholdRequirement> reqs;
    reqs.reserve(dataset.households.size());
    for (const auto &hh : dataset.households) {
        reqs.push_back(household_requirement(hh, dataset.requirements, dataset.catalog,
                                             config.cona.requirements));
    }
    // Records per household id; dataset.households is sorted by id then survey.
    std::vector<std::vector<const HouseholdRecord *>> records(panel.household_ids.size());
    std::vector<std::vector<std::size_t>> record_index(panel.household_ids.size());
    for (std::size_t r = 0, h = 0; r < dataset.households.size(); ++r) {
        while (dataset.households[r].household_id != panel.household_ids[h]) {
            ++h;
        }
        records[h].push_back(&dataset.households[r]);
        record_index[h].push_back(r);
    }

    struct WorkItem {
        std::size_t household;
        std::size_t record;
        int month;
    };
    std::map<std::pair<std::string, int>, std::vector<WorkItem>> buckets;
    for (std::size_t h = 0; h < records.size(); ++h) {
        for (int t = 0; t < panel.n_months; ++t) {
            const auto when = config.start.plus_months(t);
            const auto k = record_for_month(records[h], when, config.switch_date);
            const auto r = record_index[h][k];
            buckets[{dataset.market_of(dataset.households[r]), t}].push_back({h, r, t});
        }
    }
    std::vector<const std::vector<WorkItem> *> tasks;
    std::vector<std::pair<std::string, int>> task_keys;
    for (const auto &[key, items] : buckets) {
        tasks.push_back(&items);
        task_keys.push_back(key);
    }

    parallel_for(tasks.size(), config.workers, [&](std::size_t task) {
        const auto &[market, t] = task_keys[task];
        const auto when = config.start.plus_months(t);
        MemberDietCache cache(dataset, dataset.menu(market, when), config.cona);
        for (const auto &item : *tasks[task]) {
            const auto &hh = dataset.households[item.record];
            const auto &req = reqs[item.record];
            for (std::size_t s = 0; s < panel.scenarios.size(); ++s) {
                ConaCell cell = panel.scenarios[s] == Scenario::individualized
                                    ? individualized_cona(hh, req, when, dataset, config.cona, &cache)
                                    : shared_cona(hh, req, when, dataset, config.cona, &cache);
                if (ppp) {
                    apply_ppp(cell, *ppp, config.orientation);
                }
                panel.cells[(item.household * panel.scenarios.size() + s) * panel.n_months + item.month] =
                    std::move(cell);
            }
        }
    });
    return panel;
}

namespace {

std::string opt(const std::optional<double> &v) { return v ? format_double(*v) : std::string{}; }

} // namespace

void write_panel_csv(const ConaPanel &panel, std::ostream &out) {
    write_csv_row(out, {"household_id", "market_id", "year", "month", "scenario", "status",
                        "cost_nominal", "cost_ppp", "per_capita", "per_1000kcal", "flags"});
    for (const auto &c : panel.cells) {
        std::string flags;
        if (c.addon_only) {
            flags = "addon_only";
        }
        if (!c.failing_members.empty()) {
            if (!flags.empty()) {
                flags += ';';
            }
            flags += "failing=";
            for (std::size_t i = 0; i < c.failing_members.size(); ++i) {
                flags += (i ? "|" : "") + c.failing_members[i];
            }
        }
        write_csv_row(out, {c.household_id, c.market_id, std::to_string(c.when.year),
                            std::to_string(c.when.month), std::string(to_string(c.scenario)),
                            std::string(to_string(c.status)), opt(c.cost_nominal), opt(c.cost_ppp),
                            opt(c.per_capita), opt(c.per_1000kcal), flags});
    }
}

ConaPanel read_panel_csv(const std::filesystem::path &path) {
    auto t = CsvTable::read(path);
    auto c_hh = t.column("household_id");
    auto c_m = t.column("market_id");
    auto c_y = t.column("year");
    auto c_mo = t.column("month");
    auto c_s = t.column("scenario");
    auto c_st = t.column("status");
    auto c_cost = t.column("cost_nominal");
    auto c_ppp = t.column("cost_ppp");
    auto c_pc = t.column("per_capita");
    auto c_pk = t.column("per_1000kcal");
    auto c_flags = t.find_column("flags");

    ConaPanel panel;
    std::vector<ConaCell> cells;
    std::set<int> months;
    std::set<Scenario> scenarios;
    std::set<std::string> ids;
    for (std::size_t r = 0; r < t.size(); ++r) {
        ConaCell c;
        c.household_id = t.cell(r, c_hh);
        c.market_id = t.cell(r, c_m);
        c.when = YearMonth{static_cast<int>(t.integer(r, c_y)), static_cast<int>(t.integer(r, c_mo))};
        try {
            c.scenario = parse_scenario(t.cell(r, c_s));
            c.status = parse_cell_status(t.cell(r, c_st));
        } catch (const std::invalid_argument &e) {
            throw t.error(ErrorKind::schema, t.line_of(r), e.what());
        }
        c.cost_nominal = t.optional_number(r, c_cost);
        c.cost_ppp = t.optional_number(r, c_ppp);
        c.per_capita = t.optional_number(r, c_pc);
        c.per_1000kcal = t.optional_number(r, c_pk);
        if (c_flags) {
            c.addon_only = t.cell(r, *c_flags).find("addon_only") != std::string::npos;
        }
        if (c.cost_nominal.has_value() != c.optimal()) {
            throw t.error(ErrorKind::rule, t.line_of(r), "cost present iff status is optimal");
        }
        months.insert(c.when.index());
        scenarios.insert(c.scenario);
        ids.insert(c.household_id);
        cells.push_back(std::move(c));
    }
    if (cells.empty()) {
        throw t.error(ErrorKind::rule, 0, "panel is empty");
    }
    panel.household_ids.assign(ids.begin(), ids.end());
    panel.scenarios.assign(scenarios.begin(), scenarios.end());
    panel.start = YearMonth::from_index(*months.begin());
    panel.n_months = *months.rbegin() - *months.begin() + 1;
    const std::size_t expected = panel.household_ids.size() * panel.scenarios.size() * panel.n_months;
    if (cells.size() != expected) {
        throw t.error(ErrorKind::rule, 0, "panel is not a complete household x scenario x month grid");
    }
    panel.cells.resize(expected);
    std::map<std::string, std::size_t> hh_index;
    for (std::size_t i = 0; i < panel.household_ids.size(); ++i) {
        hh_index[panel.household_ids[i]] = i;
    }
    std::vector<char> filled(expected, 0);
    for (auto &c : cells) {
        std::size_t s = std::find(panel.scenarios.begin(), panel.scenarios.end(), c.scenario) -
                        panel.scenarios.begin();
        std::size_t slot = (hh_index[c.household_id] * panel.scenarios.size() + s) * panel.n_months +
                           (c.when.index() - panel.start.index());
        if (filled[slot]) {
            throw t.error(ErrorKind::rule, 0, "duplicate panel cell for " + c.household_id);
        }
        filled[slot] = 1;
        panel.cells[slot] = std::move(c);
    }
    return panel;
}

void write_ppp_factors_csv(const PpFactorSeries &series, std::ostream &out) {
    write_csv_row(out, {"year", "month", "factor"});
    for (std::size_t t = 0; t < series.factors.size(); ++t) {
        auto when = series.start.plus_months(static_cast<int>(t));
        write_csv_row(out, {std::to_string(when.year), std::to_string(when.month),
                            format_double(series.factors[t])});
    }
}

void write_structural_report(const Dataset &dataset, const RequirementOptions &options, std::ostream &out) {
    write_csv_row(out, {"household_id", "survey_year", "nutrient_id", "lower", "upper"});
    for (const auto &hh : dataset.households) {
        auto req = household_requirement(hh, dataset.requirements, dataset.catalog, options);
        if (!req.shared) {
            continue;
        }
        for (auto j : req.shared->structural_conflicts) {
            write_csv_row(out, {hh.household_id, std::to_string(hh.survey.year), dataset.catalog[j].id,
                                format_double(*req.shared->lower[j]), format_double(*req.shared->upper[j])});
        }
    }
}

} // namespace dietcost
