#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dietcost/seasonality.h"
#include "support.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace dietcost;

namespace {

constexpr double kMonth = std::numbers::pi / 6.0;

std::array<double, 12> demeaned(const std::array<double, 12> &p, double scale = 100.0) {
    double mean = std::accumulate(p.begin(), p.end(), 0.0) / 12.0;
    std::array<double, 12> out{};
    for (int m = 0; m < 12; ++m) {
        out[m] = (p[m] - mean) * scale;
    }
    return out;
}

ConaCell cell(const std::string &hh, const std::string &market, YearMonth when, std::optional<double> cost,
              CellStatus status = CellStatus::infeasible) {
    ConaCell c;
    c.household_id = hh;
    c.market_id = market;
    c.when = when;
    c.scenario = Scenario::shared;
    c.status = cost ? CellStatus::optimal : status;
    c.cost_nominal = cost;
    return c;
}

double circular_month_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 12.0);
    return std::min(d, 12.0 - d);
}

} // namespace

TEST_CASE("differencing across gaps") {
    MonthlySeries s{"u", "c", {{{2013, 1}, 1.0}, {{2013, 2}, 1.5}, {{2013, 5}, 2.5}}};
    std::vector<MonthlySeries> v = {s};
    auto obs = difference_with_gaps(v);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].k == 0);
    CHECK(obs[0].dy == 0.5);
    CHECK(obs[0].trend == 1);
    CHECK(obs[0].dummies[1] == 1);
    CHECK(obs[0].dummies[0] == -1);
    CHECK(obs[1].k == 2);
    CHECK(obs[1].trend == 3);
    CHECK(obs[1].dummies[4] == 1);
    CHECK(obs[1].dummies[1] == -1);
    CHECK(std::accumulate(obs[1].dummies.begin(), obs[1].dummies.end(), 0.0) == 0);

    MonthlySeries once{"v", "c", {{{2013, 1}, 1.0}}};
    std::vector<MonthlySeries> w = {once};
    CHECK(difference_with_gaps(w).empty());

    MonthlySeries bad{"u", "c", {{{2013, 2}, 1.0}, {{2013, 1}, 1.5}}};
    std::vector<MonthlySeries> b = {bad};
    CHECK_THROWS_AS(difference_with_gaps(b), std::invalid_argument);
}

TEST_CASE("dummy model reproduces a deterministic pattern") {
    std::mt19937_64 rng(10);
    testing::PatternPanel setup;
    setup.pattern = {0.03, -0.02, 0.11, 0.0, -0.07, 0.05, 0.02, -0.04, 0.09, -0.01, 0.06, -0.08};
    auto expected = demeaned(setup.pattern);

    auto full = fit_stochastic_dummy(testing::pattern_panel(setup, rng));
    for (int m = 0; m < 12; ++m) {
        CHECK(std::abs(full.factors[m] - expected[m]) < 1e-6);
    }
    CHECK(full.gamma == doctest::Approx(0.004));
    CHECK(std::abs(factor_sum(full.factors)) < 1e-9);

    setup.drop_rate = 0.2;
    auto gappy = fit_stochastic_dummy(testing::pattern_panel(setup, rng));
    for (int m = 0; m < 12; ++m) {
        CHECK(std::abs(gappy.factors[m] - expected[m]) < 1e-6);
    }

    setup.drop_rate = 0.6;
    setup.drop_months = {6, 7, 8};
    auto lean = fit_stochastic_dummy(testing::pattern_panel(setup, rng));
    CHECK(std::abs(lean.gap - seasonal_gap(expected)) <= 0.05 * seasonal_gap(expected));
}

TEST_CASE("sinusoid on the month grid: dummy gap is twice the amplitude") {
    std::mt19937_64 rng(11);
    testing::PatternPanel setup;
    setup.pattern = testing::cosine_pattern(0.1, 4 * kMonth);
    auto fit = fit_stochastic_dummy(testing::pattern_panel(setup, rng));
    CHECK(std::abs(fit.gap - 20.0) < 1e-6);

    setup.pattern = std::array<double, 12>{};
    auto flat = fit_stochastic_dummy(testing::pattern_panel(setup, rng));
    CHECK(std::abs(flat.gap) < 1e-9);
}

TEST_CASE("trigonometric model recovers amplitude and phase") {
    std::mt19937_64 rng(12);
    testing::PatternPanel setup;
    setup.pattern = testing::cosine_pattern(0.105, 2.3);
    auto fit = fit_trigonometric(testing::pattern_panel(setup, rng));
    CHECK(fit.gap == doctest::Approx(21.0).epsilon(1e-9));
    CHECK(fit.lambda == doctest::Approx(0.105).epsilon(1e-9));
    CHECK(fit.omega == doctest::Approx(2.3).epsilon(1e-9));
    CHECK(fit.peak_month == doctest::Approx(2.3 / kMonth).epsilon(1e-9));

    setup.pattern = testing::cosine_pattern(0.105, 2.3 + 3 * kMonth);
    auto shifted = fit_trigonometric(testing::pattern_panel(setup, rng));
    CHECK(shifted.lambda == doctest::Approx(fit.lambda).epsilon(1e-9));
    double shift = std::remainder(shifted.omega - fit.omega, 2 * std::numbers::pi);
    CHECK(shift == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));

    setup.pattern = testing::cosine_pattern(0.105, 2.3);
    setup.noise_sd = 0.105 / 2;
    setup.units = 40;
    auto noisy = fit_trigonometric(testing::pattern_panel(setup, rng));
    CHECK(std::abs(noisy.gap - 21.0) <= 0.05 * 21.0);
    CHECK(circular_month_distance(noisy.peak_month, 2.3 / kMonth) < 0.5);
    CHECK(noisy.seasonal_test.p_value < 1e-6);
}

TEST_CASE("white noise has no significant gap") {
    std::mt19937_64 rng(13);
    testing::PatternPanel setup;
    setup.noise_sd = 0.05;
    setup.units = 60;
    auto fit = fit_trigonometric(testing::pattern_panel(setup, rng));
    CHECK(fit.gap < 2 * fit.gap_se);
}

TEST_CASE("reference seasonal factor columns") {
    const std::vector<double> col2_ind = {-1.7, 3.3, -0.1, 0.9, 7.2, 4.9, -1.0, -5.4, -6.6, -3.7, 2.6, -0.3};
    const std::vector<double> col2_sh = {0.6, 3.1, 0.7, 2.3, 4.3, 2.5, -1.8, -4.4, -5.8, -2.1, 0.8, -0.2};
    const std::vector<double> col3_ind = {4.2, -3.6, -10.9, -13.4, -0.4, 18.5, 8.3, -4.9, 5.1, -11.7, -1.6, 10.5};
    const std::vector<double> col3_sh = {42.2, 31.3, -8.0, -9.5, -11.7, 21.8, -18.4, -51.5, -38.6, -33.4, 11.6, 64.1};
    const std::vector<double> col1_ind = {91.2, 89.7, 88.8, 92.0, 96.2, 95.2, 93.1, 93.9, 89.2, 90.7, 94.4, 93.8};
    const std::vector<double> col1_sh = {58.4, 52.5, 52.3, 52.0, 57.3, 52.4, 48.3, 52.6, 53.3, 59.7, 67.5, 65.3};

    CHECK(std::abs(seasonal_gap(col1_ind) - 7.4) <= 0.15);
    CHECK(std::abs(seasonal_gap(col1_sh) - 19.2) <= 0.15);
    CHECK(std::abs(seasonal_gap(col2_ind) - 13.8) <= 0.15);
    CHECK(std::abs(seasonal_gap(col2_sh) - 10.1) <= 0.15);
    CHECK(std::abs(seasonal_gap(col3_ind) - 31.9) <= 0.15);
    CHECK(std::abs(seasonal_gap(col3_sh) - 115.7) <= 0.15);
    for (const auto *col : {&col2_ind, &col2_sh, &col3_ind, &col3_sh}) {
        CHECK(std::abs(factor_sum(*col)) <= 0.3);
    }
    const std::vector<double> equal(12, 4.0);
    CHECK(seasonal_gap(equal) == 0);
    CHECK_THROWS_AS(seasonal_gap(std::vector<double>(11, 0.0)), std::invalid_argument);
}

TEST_CASE("imputation uses the month's highest optimal cost") {
    ConaPanel panel;
    panel.household_ids = {"A", "B", "C"};
    panel.scenarios = {Scenario::shared};
    panel.start = {2013, 1};
    panel.n_months = 2;
    panel.cells = {cell("A", "M1", {2013, 1}, 8.0),  cell("A", "M1", {2013, 2}, 9.0),
                   cell("B", "M1", {2013, 1}, 11.2), cell("B", "M1", {2013, 2}, std::nullopt),
                   cell("C", "M2", {2013, 1}, std::nullopt, CellStatus::infeasible_by_vacancy),
                   cell("C", "M2", {2013, 2}, 7.0)};

    ImputationReport rep;
    auto plain = cost_series(panel, 0, false, {}, &rep);
    CHECK(rep.imputed_cells == 0);
    CHECK(plain[1].points.size() == 1);
    CHECK(plain[2].points.size() == 1);

    auto imputed = cost_series(panel, 0, true, {{"A", "EA1"}}, &rep);
    CHECK(rep.imputed_cells == 2);
    CHECK(imputed[0].cluster_id == "EA1");
    CHECK(imputed[1].cluster_id == "B");
    REQUIRE(imputed[1].points.size() == 2);
    CHECK(imputed[1].points[1].value == std::log(9.0));
    REQUIRE(imputed[2].points.size() == 2);
    CHECK(imputed[2].points[0].value == std::log(11.2));
    CHECK(imputed[0].points[0].value == std::log(8.0));

    panel.cells[3] = cell("B", "M1", {2013, 2}, 8.5);
    panel.cells[4] = cell("C", "M2", {2013, 1}, 7.5);
    auto full = cost_series(panel, 0, true, {}, &rep);
    CHECK(rep.imputed_cells == 0);
    for (std::size_t h = 0; h < 3; ++h) {
        CHECK(full[h].points.size() == 2);
    }
}

TEST_CASE("feasibility LPM") {
    ConaPanel panel;
    panel.scenarios = {Scenario::shared};
    panel.start = {2013, 1};
    panel.n_months = 24;
    const int share[12] = {9, 8, 7, 7, 6, 5, 5, 6, 7, 8, 9, 10};
    for (int h = 0; h < 20; ++h) {
        std::string id = "H" + std::to_string(100 + h);
        panel.household_ids.push_back(id);
        for (int t = 0; t < 24; ++t) {
            auto when = panel.start.plus_months(t);
            bool ok = h % 10 < share[when.month - 1];
            panel.cells.push_back(cell(id, h < 10 ? "M1" : "M2", when, ok ? std::optional<double>(5.0) : std::nullopt));
        }
    }
    auto fit = feasibility_lpm(panel, 0);
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.method == SeasonalMethod::feasibility_lpm);
    std::array<double, 12> levels{};
    for (int m = 0; m < 12; ++m) {
        levels[m] = share[m] * 10.0;
        CHECK(fit.levels[m] == doctest::Approx(levels[m]).epsilon(1e-9));
    }
    auto factors = demeaned(levels, 1.0);
    for (int m = 0; m < 12; ++m) {
        CHECK(fit.factors[m] == doctest::Approx(factors[m]).epsilon(1e-9));
    }
    CHECK(fit.gap == doctest::Approx(50));

    for (auto &c : panel.cells) {
        c = cell(c.household_id, c.market_id, c.when, 5.0);
    }
    auto flat = feasibility_lpm(panel, 0);
    CHECK(flat.degenerate);
    CHECK(flat.gap == 0);
    for (double f : flat.factors) {
        CHECK(f == 0);
    }
}

TEST_CASE("price series and writers") {
    auto ds = testing::toy_dataset();
    auto series = price_series(ds);
    CHECK(series.size() == 10);
    CHECK(series[0].unit_id == "F1@M1");
    CHECK(series[0].cluster_id == "M1");
    CHECK(series[0].points.size() == 12);
    CHECK(series[1].points.size() == 11);
    std::vector<std::string> only = {"F2"};
    CHECK(price_series(ds, only).size() == 2);
    auto groups = items_by_group(ds);
    CHECK(groups.at("legumes") == std::vector<std::string>{"F2"});

    std::vector<LabeledFit> fits = {{"all", fit_trigonometric(series)}, {"all", fit_stochastic_dummy(series)}};
    std::ostringstream factors, gaps, stats;
    write_seasonal_factors_csv(fits, factors);
    write_seasonal_gaps_csv(fits, gaps);
    write_fit_stats_csv(fits, stats);
    auto f = factors.str();
    auto g = gaps.str();
    auto s = stats.str();
    CHECK(f.rfind("model,scenario_or_group,month,factor,se\n", 0) == 0);
    CHECK(std::count(f.begin(), f.end(), '\n') == 25);
    CHECK(std::count(g.begin(), g.end(), '\n') == 3);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
    CHECK((s.find(",yes,") != std::string::npos));
    CHECK((s.find(",no,") != std::string::npos));
}
