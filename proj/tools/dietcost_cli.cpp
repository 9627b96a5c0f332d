// dietcost: least-cost nutrient-adequate household diets, seasonality and
// affordability from CSV inputs.

#include "dietcost/affordability.h"
#include "dietcost/cona.h"
#include "dietcost/data_io.h"
#include "dietcost/requirements.h"
#include "dietcost/seasonality.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace dietcost;

namespace {

struct RunConfig {
    std::string data_dir{"data"};
    std::string out_dir{"out"};
    std::string panel_file;
    unsigned workers{0};
    std::uint64_t seed{1};
    std::string start{"2013-01"};
    std::string end{"2017-07"};
    std::string switch_date{"2016-01"};
    std::string scenario{"both"};
    std::string impute{"on"};
    std::string orientation{"lcu_per_ppp"};
    bool exclude_vacancy{false};
    double feasibility_tol{1e-8};
    double optimality_tol{1e-9};
    double pivot_tol{1e-10};
    int bland_after{200};
    double certificate_tol{1e-6};
    int bootstrap_reps{200};
    double reference_line{1.90};
    // synth
    int markets{25};
    int items{51};
    int households{500};
    double amplitude{0.1};
    double missingness{0.1};
    double noise_sd{0.05};
    double lean_odds{4.0};
    std::string lean_months{"12,1,2"};
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

YearMonth parse_month(const std::string &text, const char *flag) {
    try {
        return YearMonth::parse(text);
    } catch (const std::invalid_argument &) {
        throw UsageError(std::string(flag) + ": expected YYYY-MM, got '" + text + "'");
    }
}

std::vector<Scenario> scenarios_of(const RunConfig &c) {
    if (c.scenario == "both") {
        return {Scenario::individualized, Scenario::shared};
    }
    return {parse_scenario(c.scenario)};
}

ConaOptions cona_options(const RunConfig &c) {
    if (!(c.feasibility_tol > 0) || !(c.optimality_tol > 0) || !(c.pivot_tol > 0) || !(c.certificate_tol > 0)) {
        throw UsageError("tolerances must be > 0");
    }
    ConaOptions o;
    o.solver.feasibility_tol = c.feasibility_tol;
    o.solver.optimality_tol = c.optimality_tol;
    o.solver.pivot_tol = c.pivot_tol;
    o.solver.bland_after = c.bland_after;
    o.certificate_tol = c.certificate_tol;
    return o;
}

PppOrientation orientation_of(const RunConfig &c) {
    return c.orientation == "ppp_per_lcu" ? PppOrientation::ppp_per_lcu : PppOrientation::lcu_per_ppp;
}

PanelConfig panel_config(const RunConfig &c) {
    PanelConfig p;
    p.start = parse_month(c.start, "--start");
    p.end = parse_month(c.end, "--end");
    if (p.end < p.start) {
        throw UsageError("--end precedes --start");
    }
    if (c.switch_date == "none" || c.switch_date.empty()) {
        p.switch_date.reset();
    } else {
        p.switch_date = parse_month(c.switch_date, "--switch-date");
    }
    p.scenarios = scenarios_of(c);
    p.workers = c.workers;
    p.orientation = orientation_of(c);
    p.cona = cona_options(c);
    return p;
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return f;
}

void write_resolved_config(const CLI::App &app, const fs::path &dir) {
    fs::create_directories(dir);
    auto f = open_out(dir / "resolved_config.ini");
    f << app.config_to_str(true, false);
}

std::string status_counts(const ConaPanel &panel) {
    std::ostringstream s;
    for (std::size_t k = 0; k < panel.scenarios.size(); ++k) {
        std::map<std::string, std::size_t> counts;
        for (std::size_t h = 0; h < panel.household_ids.size(); ++h) {
            for (int t = 0; t < panel.n_months; ++t) {
                ++counts[std::string(to_string(panel.at(h, k, t).status))];
            }
        }
        s << to_string(panel.scenarios[k]) << ':';
        for (const auto &[status, n] : counts) {
            s << ' ' << status << '=' << n;
        }
        s << '\n';
    }
    return s.str();
}

int cmd_synth(const RunConfig &c) {
    SynthParams p;
    p.seed = c.seed;
    p.n_markets = c.markets;
    p.n_items = c.items;
    p.n_households = c.households;
    p.start = parse_month(c.start, "--start");
    p.end = parse_month(c.end, "--end");
    p.price_seasonal_amplitude = c.amplitude;
    p.missingness_rate = c.missingness;
    p.price_noise_sd = c.noise_sd;
    p.lean_missingness_odds = c.lean_odds;
    p.lean_season_months.clear();
    std::stringstream ss(c.lean_months);
    for (std::string tok; std::getline(ss, tok, ',');) {
        if (!tok.empty()) {
            p.lean_season_months.insert(std::stoi(tok));
        }
    }
    if (c.switch_date == "none" || c.switch_date.empty()) {
        p.second_wave.reset();
    } else {
        p.second_wave = parse_month(c.switch_date, "--switch-date");
    }
    SynthResult r;
    try {
        r = synth_generate(p);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    write_dataset(r.dataset, c.out_dir);
    auto f = open_out(fs::path(c.out_dir) / "synth_truth.csv");
    write_csv_row(f, {"food_group", "phase", "amplitude"});
    for (const auto &[group, phase] : r.group_phase) {
        write_csv_row(f, {group, format_double(phase), format_double(r.amplitude)});
    }
    std::cout << "synth: " << r.dataset.markets().size() << " markets, " << r.dataset.foods.size() << " items, "
              << r.dataset.household_ids().size() << " households, " << r.dataset.prices.size()
              << " price rows -> " << c.out_dir << '\n';
    return 0;
}

ConaPanel run_solve(const Dataset &ds, const RunConfig &c, std::ostream &log) {
    const fs::path out(c.out_dir);
    const auto cfg = panel_config(c);
    auto panel = cona_panel(ds, cfg);
    {
        auto f = open_out(out / "cona_panel.csv");
        write_panel_csv(panel, f);
    }
    if (auto ppp = ppp_factors_for(ds)) {
        auto f = open_out(out / "ppp_factors.csv");
        write_ppp_factors_csv(*ppp, f);
    }
    {
        auto f = open_out(out / "structural_report.csv");
        write_structural_report(ds, cfg.cona.requirements, f);
    }
    {
        auto f = open_out(out / "availability.csv");
        write_availability_csv(availability_matrix(ds), f);
    }
    log << "solve: " << panel.cells.size() << " cells (" << panel.household_ids.size() << " households x "
        << panel.scenarios.size() << " scenarios x " << panel.n_months << " months)\n"
        << status_counts(panel);
    return panel;
}

void run_seasonality(const Dataset &ds, const ConaPanel &panel, const RunConfig &c, std::ostream &log) {
    if (c.impute != "on" && c.impute != "off") {
        throw UsageError("--impute must be on or off");
    }
    const bool impute = c.impute == "on";
    const auto clusters = household_clusters(ds);
    std::vector<LabeledFit> fits;
    auto try_fit = [&](const std::string &label, auto &&fn) {
        try {
            fits.push_back({label, fn()});
        } catch (const std::invalid_argument &e) {
            log << "seasonality: " << label << " skipped: " << e.what() << '\n';
        }
    };
    for (std::size_t s = 0; s < panel.scenarios.size(); ++s) {
        const std::string name(to_string(panel.scenarios[s]));
        LpmOptions lpm;
        lpm.exclude_vacancy = c.exclude_vacancy;
        try_fit(name, [&] { return feasibility_lpm(panel, s, lpm, clusters); });
        const auto feasible = cost_series(panel, s, false, clusters);
        try_fit(name, [&] { return fit_stochastic_dummy(feasible); });
        try_fit(name, [&] { return fit_trigonometric(feasible); });
        if (impute) {
            ImputationReport rep;
            const auto imputed = cost_series(panel, s, true, clusters, &rep);
            log << "seasonality: " << name << " imputed " << rep.imputed_cells << " cells";
            if (!rep.undefined_months.empty()) {
                log << ", no optimal cell in " << rep.undefined_months.size() << " months (left out)";
            }
            log << '\n';
            try_fit(name + "_imputed", [&] { return fit_stochastic_dummy(imputed); });
            try_fit(name + "_imputed", [&] { return fit_trigonometric(imputed); });
        }
    }
    for (const auto &[group, items] : items_by_group(ds)) {
        const auto series = price_series(ds, items);
        try_fit("group:" + group, [&] { return fit_trigonometric(series); });
        try_fit("group:" + group, [&] { return fit_stochastic_dummy(series); });
    }
    for (const auto &f : ds.foods) {
        const std::string id[] = {f.item_id};
        const auto series = price_series(ds, id);
        try_fit("item:" + f.item_id, [&] { return fit_trigonometric(series); });
    }
    const fs::path out(c.out_dir);
    {
        auto f = open_out(out / "seasonal_factors.csv");
        write_seasonal_factors_csv(fits, f);
    }
    {
        auto f = open_out(out / "seasonal_gaps.csv");
        write_seasonal_gaps_csv(fits, f);
    }
    {
        auto f = open_out(out / "fit_stats.csv");
        write_fit_stats_csv(fits, f);
    }
    for (const auto &[label, fit] : fits) {
        if (label.rfind("item:", 0) == 0 || label.rfind("group:", 0) == 0) {
            continue;
        }
        log << "seasonality: " << to_string(fit.method) << ' ' << label << " gap=" << format_double(fit.gap)
            << " n=" << fit.n_obs << '\n';
    }
}

void run_afford(const Dataset &ds, const RunConfig &c, std::ostream &log) {
    AffordabilityConfig cfg;
    cfg.scenarios = scenarios_of(c);
    cfg.orientation = orientation_of(c);
    cfg.cona = cona_options(c);
    cfg.workers = c.workers;
    const auto results = survey_month_access(ds, cfg);
    SummaryOptions so;
    so.bootstrap_reps = c.bootstrap_reps;
    so.seed = c.seed;
    so.reference_line = c.reference_line;
    const auto summary = population_summary(results, so);
    const auto pc = panel_config(c);
    const auto groups = group_cost_summary(ds, pc.start, pc.end, cfg);
    const fs::path out(c.out_dir);
    {
        auto f = open_out(out / "access.csv");
        write_access_csv(results, f);
    }
    {
        auto f = open_out(out / "summary.csv");
        write_summary_csv(summary, f);
    }
    {
        auto f = open_out(out / "group_costs.csv");
        write_group_costs_csv(groups, f);
    }
    for (const auto &s : summary) {
        log << "afford: " << s.scenario << ' ' << s.statistic << " = "
            << (std::isfinite(s.value) ? format_double(s.value) : std::string("NA")) << '\n';
    }
}

ConaPanel panel_for(const Dataset &ds, const RunConfig &c, std::ostream &log) {
    if (!c.panel_file.empty()) {
        return read_panel_csv(c.panel_file);
    }
    return run_solve(ds, c, log);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Least-cost nutrient-adequate household diets"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "key=value configuration file");
    RunConfig c;
    app.add_option("--data", c.data_dir, "Input dataset directory");
    app.add_option("--out", c.out_dir, "Output directory (dataset directory for synth)");
    app.add_option("--panel", c.panel_file, "Existing cona_panel.csv for seasonality");
    app.add_option("--workers", c.workers, "Worker threads (0 = all cores)");
    app.add_option("--seed", c.seed, "Seed for synth and bootstrap");
    app.add_option("--start", c.start, "Horizon start YYYY-MM");
    app.add_option("--end", c.end, "Horizon end YYYY-MM");
    app.add_option("--switch-date", c.switch_date, "Composition switch YYYY-MM, or none");
    app.add_option("--scenario", c.scenario, "individualized, shared or both")
        ->check(CLI::IsMember({"individualized", "shared", "both"}));
    app.add_option("--impute", c.impute, "Impute infeasible months in cost seasonality")
        ->check(CLI::IsMember({"on", "off"}));
    app.add_option("--orientation", c.orientation, "PPP factor orientation")
        ->check(CLI::IsMember({"lcu_per_ppp", "ppp_per_lcu"}));
    app.add_flag("--exclude-vacancy", c.exclude_vacancy, "Drop vacant market-months from the feasibility model");
    app.add_option("--feasibility-tol", c.feasibility_tol);
    app.add_option("--optimality-tol", c.optimality_tol);
    app.add_option("--pivot-tol", c.pivot_tol);
    app.add_option("--bland-after", c.bland_after);
    app.add_option("--certificate-tol", c.certificate_tol);
    app.add_option("--bootstrap-reps", c.bootstrap_reps);
    app.add_option("--reference-line", c.reference_line, "Per-capita PPP reference line");
    app.add_option("--markets", c.markets);
    app.add_option("--items", c.items);
    app.add_option("--households", c.households);
    app.add_option("--amplitude", c.amplitude, "Injected log-price seasonal amplitude");
    app.add_option("--missingness", c.missingness);
    app.add_option("--noise-sd", c.noise_sd);
    app.add_option("--lean-odds", c.lean_odds);
    app.add_option("--lean-months", c.lean_months, "Comma-separated months");

    auto *synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    auto *solve = app.add_subcommand("solve", "Build the diet cost panel");
    auto *season = app.add_subcommand("seasonality", "Seasonal factors, gaps and fit statistics");
    auto *afford = app.add_subcommand("afford", "Affordability in the survey month");
    auto *report = app.add_subcommand("report", "Run solve, seasonality and afford");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        const fs::path out(c.out_dir);
        if (synth->parsed()) {
            fs::create_directories(out);
            const int rc = cmd_synth(c);
            write_resolved_config(app, out);
            return rc;
        }
        const Dataset ds = load_catalog(c.data_dir);
        fs::create_directories(out);
        write_resolved_config(app, out);
        if (solve->parsed()) {
            run_solve(ds, c, std::cout);
        } else if (season->parsed()) {
            run_seasonality(ds, panel_for(ds, c, std::cout), c, std::cout);
        } else if (afford->parsed()) {
            run_afford(ds, c, std::cout);
        } else if (report->parsed()) {
            std::ostringstream log;
            const auto panel = panel_for(ds, c, log);
            run_seasonality(ds, panel, c, log);
            run_afford(ds, c, log);
            auto f = open_out(out / "report.txt");
            f << log.str();
            std::cout << log.str();
        }
        return 0;
    } catch (const ValidationError &e) {
        std::cerr << "validation error (" << to_string(e.kind()) << "): " << e.file();
        if (e.row() > 0) {
            std::cerr << " row " << e.row();
        }
        std::cerr << ": " << e.rule() << '\n';
        return 2;
    } catch (const RequirementError &e) {
        std::cerr << "validation error (requirements): " << e.what() << '\n';
        return 2;
    } catch (const UsageError &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
