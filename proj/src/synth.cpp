#include "dietcost/data_io.h"
#include "dietcost/requirements.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dietcost {

namespace {

enum Nut : std::size_t {
    energy,
    carbohydrate,
    protein,
    lipids,
    vitamin_a,
    retinol,
    vitamin_c,
    vitamin_e,
    thiamin,
    riboflavin,
    niacin,
    vitamin_b6,
    folate,
    vitamin_b12,
    calcium,
    copper,
    iron,
    magnesium,
    phosphorus,
    selenium,
    zinc,
    sodium,
    n_nutrients
};

// Reference adult densities per 1000 kcal.
constexpr double kLower[n_nutrients] = {0,   52,  22,  22,  360, 0,   36,  6,   0.48, 0.52, 6.4,
                                        0.52, 160, 0.96, 400, 0.36, 3.2, 168, 280,  22,   4.4, 0};
constexpr double kUpper[n_nutrients] = {0,   162, 87,  39, 0,    1200, 800, 400, 0, 0, 0,
                                        40,  0,   0,   1000, 4, 18,   0,   1600, 160, 16, 920};

struct GroupProfile {
    const char *id;
    double carb, prot, fat; // energy shares
    double kcal_lo, kcal_hi; // per 100 g
    double price_per_1000kcal;
    double missing_weight;
    std::vector<Nut> rich;
    std::vector<Nut> moderate;
    double rich_level;
    double retinol;
    double sodium;
};

const std::vector<GroupProfile> &profiles() {
    static const std::vector<GroupProfile> p = {
        {"cereals", .82, .10, .08, 330, 370, 150, 0.2, {}, {thiamin, niacin, magnesium, phosphorus, copper, iron, zinc, selenium, vitamin_b6}, 3, 0, 0.02},
        {"legumes", .55, .27, .18, 330, 570, 380, 1.0, {folate, thiamin, magnesium, phosphorus, copper, iron, zinc, selenium}, {riboflavin, niacin, vitamin_b6, calcium}, 3, 0, 0.02},
        {"dark_green_leafy_vegetables", .55, .35, .10, 20, 45, 1500, 3.0, {vitamin_a, vitamin_c, vitamin_e, riboflavin, vitamin_b6, folate, calcium, copper, iron, magnesium, zinc, selenium}, {phosphorus, niacin, thiamin}, 8, 0, 0.1},
        {"flesh_meat", 0, .45, .55, 120, 300, 3000, 0.5, {vitamin_b12, niacin, zinc, iron, phosphorus, selenium, riboflavin}, {thiamin, vitamin_b6}, 3, 0.08, 0.1},
        {"roots_tubers", .90, .06, .04, 80, 150, 260, 0.6, {}, {vitamin_c, vitamin_b6, copper, magnesium}, 3, 0, 0.02},
        {"vitamin_a_rich_fruits", .85, .07, .08, 30, 70, 1500, 3.0, {vitamin_a, vitamin_c, copper}, {vitamin_e, vitamin_b6, folate, calcium, selenium}, 8, 0, 0.02},
        {"fish_seafood", 0, .65, .35, 100, 350, 1800, 0.6, {vitamin_b12, calcium, niacin, phosphorus, selenium, iron, zinc, riboflavin}, {vitamin_b6, magnesium, copper}, 3, 0.02, 0.6},
        {"other_vegetables", .70, .20, .10, 20, 45, 2000, 3.0, {vitamin_c, folate, vitamin_b6, copper, calcium, iron, magnesium, selenium, zinc}, {thiamin, riboflavin, niacin, phosphorus}, 8, 0, 0.1},
        {"milk_products", .30, .25, .45, 60, 500, 1800, 0.6, {calcium, riboflavin, vitamin_b12, phosphorus, vitamin_a}, {zinc, magnesium, selenium}, 3, 0.35, 0.25},
        {"oils_fats", 0, 0, 1, 880, 900, 300, 0.4, {vitamin_e, vitamin_a}, {}, 3, 0.4, 0},
        {"other_fruits", .85, .05, .10, 50, 160, 1200, 3.0, {vitamin_c, vitamin_b6, copper}, {magnesium, folate, vitamin_e}, 4, 0, 0.02},
        {"eggs", .03, .35, .62, 140, 160, 2500, 0.6, {vitamin_b12, riboflavin, selenium, phosphorus, vitamin_a}, {iron, zinc, folate, vitamin_e}, 3, 0.5, 0.3},
        {"vitamin_a_rich_vegetables", .80, .12, .08, 25, 40, 1200, 3.0, {vitamin_a, vitamin_c, vitamin_e, copper}, {vitamin_b6, magnesium, folate}, 8, 0, 0.02},
        {"sweets", .85, .05, .10, 380, 450, 250, 0.6, {}, {vitamin_a}, 3, 0.1, 0.2},
        {"salty_fried", .55, .07, .38, 250, 400, 500, 0.6, {}, {thiamin, niacin, iron}, 3, 0, 1.5},
    };
    return p;
}

struct GroupSpec {
    const char *label;
    Sex sex;
    int lo, hi; // age months
    bool lactating;
    double share; // population share, %
    double energy;
    double lower_mult;
    double upper_mult;
    std::vector<std::pair<Nut, double>> lower_over{};
    std::vector<std::pair<Nut, double>> upper_over{};
};

const std::vector<GroupSpec> &group_specs() {
    using V = std::vector<std::pair<Nut, double>>;
    const V young_upper = {{zinc, 0.45}, {copper, 0.5}, {selenium, 0.6}, {retinol, 0.5}, {sodium, 0.6}, {iron, 0.9}};
    const V young_lower = {{iron, 1.6}, {zinc, 1.4}, {calcium, 1.3}, {vitamin_a, 1.4}};
    const V child_upper = {{zinc, 0.45}, {copper, 0.45}, {selenium, 0.5}, {retinol, 0.45}, {sodium, 0.5}, {iron, 0.55}};
    const V teen_upper = {{zinc, 0.65}, {copper, 0.65}, {retinol, 0.6}, {iron, 0.8}};
    const V older_lower = {{calcium, 1.8}, {zinc, 1.4}, {vitamin_b6, 1.5}, {vitamin_b12, 1.3}, {magnesium, 1.3}};
    const V woman_lower = {{iron, 2.6}, {folate, 1.3}};
    const V lactation_lower = {{vitamin_a, 2.4}, {vitamin_c, 1.8}, {zinc, 1.8}, {vitamin_b6, 1.4}, {folate, 1.3},
                               {vitamin_b12, 1.3}, {riboflavin, 1.4}, {iron, 1.3}};
    static const std::vector<GroupSpec> g = {
        {"Infant (all) 6 months-1 y", Sex::male, 6, 11, false, 1.35, 700, 1.2, 0.8, young_lower, young_upper},
        {"Child (all) 1-2 y", Sex::male, 12, 35, false, 5.45, 1000, 1.2, 0.8, young_lower, young_upper},
        {"Child (M) 3 y", Sex::male, 36, 47, false, 1.57, 1250, 1.1, 0.85, young_lower, child_upper},
        {"Child (F) 3 y", Sex::female, 36, 47, false, 1.82, 1200, 1.1, 0.85, young_lower, child_upper},
        {"Child (M) 4-8 y", Sex::male, 48, 107, false, 8.15, 1500, 1.05, 0.9, {}, child_upper},
        {"Child (F) 4-8 y", Sex::female, 48, 107, false, 8.46, 1400, 1.05, 0.9, {}, child_upper},
        {"Adolescent (M) 9-13 y", Sex::male, 108, 167, false, 7.92, 2100, 1.0, 0.95, {}, teen_upper},
        {"Adolescent (M) 14-18 y", Sex::male, 168, 227, false, 5.91, 2800, 0.9, 1.0},
        {"Adult (M) 19-30 y", Sex::male, 228, 371, false, 8.14, 2700, 0.85, 1.0},
        {"Adult (M) 31-50 y", Sex::male, 372, 611, false, 8.19, 2600, 0.85, 1.0},
        {"Adult (M) 51-70 y", Sex::male, 612, 851, false, 3.04, 2300, 0.95, 1.0, older_lower},
        {"Older Adult (M) 70+ y", Sex::male, 852, 1080, false, 0.99, 2000, 1.15, 0.9, older_lower},
        {"Adolescent (F) 9-13 y", Sex::female, 108, 167, false, 7.76, 1900, 1.05, 0.95, {}, teen_upper},
        {"Adolescent (F) 14-18 y", Sex::female, 168, 227, false, 5.53, 2100, 1.05, 1.0, woman_lower},
        {"Adult (F) 19-30 y", Sex::female, 228, 371, false, 6.84, 2100, 1.0, 1.0, woman_lower},
        {"Adult (F) 31-50 y", Sex::female, 372, 611, false, 7.31, 2000, 1.0, 1.0, woman_lower},
        {"Adult (F) 51-70 y", Sex::female, 612, 851, false, 3.58, 1800, 1.1, 1.0, older_lower},
        {"Older Adult (F) 70+ y", Sex::female, 852, 1080, false, 1.25, 1600, 1.2, 0.9, older_lower},
        {"Lactation (F) 14-18 y", Sex::female, 168, 227, true, 0.28, 2500, 1.2, 1.0, lactation_lower},
        {"Lactation (F) 19-30 y", Sex::female, 228, 371, true, 3.41, 2450, 1.2, 1.0, lactation_lower},
        {"Lactation (F) 31-50 y", Sex::female, 372, 611, true, 1.64, 2400, 1.2, 1.0, lactation_lower},
    };
    return g;
}

double multiplier(const std::vector<std::pair<Nut, double>> &over, std::size_t j, double fallback) {
    for (const auto &[n, v] : over) {
        if (n == j) {
            return v;
        }
    }
    return fallback;
}

bool is_macro(std::size_t j) { return j == carbohydrate || j == protein || j == lipids; }

RequirementRow requirement_row(const GroupSpec &g, const NutrientCatalog &catalog) {
    RequirementRow row;
    row.group_id = g.label;
    row.energy_kcal = g.energy;
    row.min_need.resize(catalog.size());
    row.max_tolerance.resize(catalog.size());
    const double scale = g.energy / 1000.0;
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        const auto kind = catalog[j].bound_kind;
        double a = is_macro(j) ? 1.0 : multiplier(g.lower_over, j, g.lower_mult);
        double b = is_macro(j) ? 1.0 : multiplier(g.upper_over, j, g.upper_mult);
        if (j == protein && g.hi <= 47) {
            b = 0.6;
        }
        if (has_lower(kind) && kind != BoundKind::equality) {
            row.min_need[j] = kLower[j] * a * scale;
        }
        if (has_upper(kind) && kind != BoundKind::equality) {
            row.max_tolerance[j] = kUpper[j] * b * scale;
        }
    }
    return row;
}

std::string padded(const char *prefix, int value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return prefix + digits;
}

int digits_for(int n) { return std::max(2, static_cast<int>(std::to_string(n).size())); }

void check_params(const SynthParams &p) {
    if (p.n_markets < 1 || p.n_items < 1 || p.n_households < 1) {
        throw std::invalid_argument("synth: counts must be positive");
    }
    if (!p.start.valid() || !p.end.valid() || p.end < p.start) {
        throw std::invalid_argument("synth: invalid horizon");
    }
    if (!(p.price_seasonal_amplitude >= 0.0)) {
        throw std::invalid_argument("synth: amplitude must be >= 0");
    }
    if (!(p.missingness_rate >= 0.0 && p.missingness_rate < 1.0)) {
        throw std::invalid_argument("synth: missingness_rate must be in [0,1)");
    }
    if (!(p.lean_missingness_odds > 0.0) || !(p.price_noise_sd >= 0.0) || !(p.price_trend_sd >= 0.0) ||
        !std::isfinite(p.price_drift)) {
        throw std::invalid_argument("synth: invalid noise or odds parameter");
    }
    for (int m : p.lean_season_months) {
        if (m < 1 || m > 12) {
            throw std::invalid_argument("synth: lean months must be 1-12");
        }
    }
}

} // namespace

SynthResult synth_generate(const SynthParams &params) {
    check_params(params);
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SynthResult out;
    Dataset &ds = out.dataset;
    ds.catalog = NutrientCatalog::malawi_default();
    const auto &groups = profiles();
    out.amplitude = params.price_seasonal_amplitude;
    for (const auto &g : groups) {
        out.group_phase[g.id] = 2.0 * std::numbers::pi * unif(rng);
    }

    // Foods
    const int item_width = digits_for(params.n_items);
    std::vector<std::size_t> item_group(params.n_items);
    std::vector<double> item_price_per_kg(params.n_items);
    for (int i = 0; i < params.n_items; ++i) {
        const std::size_t gi = static_cast<std::size_t>(i) % groups.size();
        const auto &g = groups[gi];
        item_group[i] = gi;
        FoodItem f;
        f.item_id = padded("F", i + 1, item_width);
        f.name = std::string(g.id) + " item " + std::to_string(i / groups.size() + 1);
        f.food_group = g.id;
        const double kcal = g.kcal_lo + (g.kcal_hi - g.kcal_lo) * unif(rng);
        std::vector<double> per_1000(n_nutrients, 0.0);
        double carb = g.carb * std::exp(0.15 * normal(rng));
        double prot = g.prot * std::exp(0.15 * normal(rng));
        double fat = g.fat * std::exp(0.15 * normal(rng));
        const double total = carb + prot + fat;
        per_1000[energy] = 1000.0;
        per_1000[carbohydrate] = carb / total * 1000.0 / 4.0;
        per_1000[protein] = prot / total * 1000.0 / 4.0;
        per_1000[lipids] = fat / total * 1000.0 / 9.0;
        for (std::size_t j = 0; j < n_nutrients; ++j) {
            if (j == energy || is_macro(j) || j == retinol || j == sodium) {
                continue;
            }
            double level = 0.15;
            if (std::find(g.rich.begin(), g.rich.end(), static_cast<Nut>(j)) != g.rich.end()) {
                level = g.rich_level;
            } else if (std::find(g.moderate.begin(), g.moderate.end(), static_cast<Nut>(j)) !=
                       g.moderate.end()) {
                level = 1.0;
            }
            per_1000[j] = kLower[j] * level * std::exp(0.5 * normal(rng));
        }
        per_1000[retinol] = kUpper[retinol] * g.retinol * std::exp(0.3 * normal(rng));
        per_1000[sodium] = kUpper[sodium] * g.sodium * std::exp(0.3 * normal(rng));
        f.per_100g.resize(n_nutrients);
        for (std::size_t j = 0; j < n_nutrients; ++j) {
            f.per_100g[j] = per_1000[j] * kcal / 1000.0;
        }
        item_price_per_kg[i] = g.price_per_1000kcal * kcal * 10.0 / 1000.0 * std::exp(0.3 * normal(rng));
        ds.foods.push_back(std::move(f));
    }

    // Markets and districts
    const int market_width = digits_for(params.n_markets);
    std::vector<std::string> markets;
    for (int m = 0; m < params.n_markets; ++m) {
        markets.push_back(padded("M", m + 1, market_width));
    }
    const int n_districts = params.n_markets + params.n_markets / 3;
    const int district_width = digits_for(n_districts);
    std::vector<std::string> districts;
    for (int d = 0; d < n_districts; ++d) {
        districts.push_back(padded("D", d + 1, district_width));
        ds.market_map[districts.back()] = markets[d % params.n_markets];
    }

    // Prices
    const int n_months = months_between(params.start, params.end);
    const double lambda = params.price_seasonal_amplitude;
    struct Cell {
        int market, item, month;
        double price;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(params.n_markets) * params.n_items * n_months);
    for (int m = 0; m < params.n_markets; ++m) {
        const double market_effect = 0.1 * normal(rng);
        for (int i = 0; i < params.n_items; ++i) {
            const double omega = out.group_phase[groups[item_group[i]].id];
            const double base = std::log(item_price_per_kg[i]) + market_effect + 0.05 * normal(rng);
            double walk = 0.0;
            for (int t = 0; t < n_months; ++t) {
                const YearMonth ym = params.start.plus_months(t);
                if (t > 0) {
                    walk += params.price_trend_sd * normal(rng);
                }
                const double season = lambda * std::cos(ym.month * std::numbers::pi / 6.0 - omega);
                const double noise = params.price_noise_sd * normal(rng);
                const double logp = base + params.price_drift * t + walk + season + noise;
                cells.push_back({m, i, t, std::exp(logp)});
            }
        }
    }

    // Missingness: exactly round(rate * N) cells removed, drawn by weighted
    // sampling without replacement (key u^(1/w), keep the largest keys).
    const std::size_t n_missing =
        static_cast<std::size_t>(std::llround(params.missingness_rate * static_cast<double>(cells.size())));
    std::vector<char> missing(cells.size(), 0);
    if (n_missing > 0) {
        std::vector<std::pair<double, std::size_t>> keys(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto &cell = cells[c];
            const int month = params.start.plus_months(cell.month).month;
            double w = groups[item_group[cell.item]].missing_weight;
            if (params.lean_season_months.count(month)) {
                w *= params.lean_missingness_odds;
            }
            double u = unif(rng);
            while (u <= 0.0) {
                u = unif(rng);
            }
            keys[c] = {std::log(u) / w, c};
        }
        std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_missing), keys.end(),
                         [](const auto &a, const auto &b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
        for (std::size_t k = 0; k < n_missing; ++k) {
            missing[keys[k].second] = 1;
        }
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (missing[c]) {
            continue;
        }
        const auto &cell = cells[c];
        ds.prices.push_back({markets[cell.market], params.start.plus_months(cell.month),
                             ds.foods[cell.item].item_id, cell.price});
    }

    // Requirements
    const auto &specs = group_specs();
    for (const auto &g : specs) {
        ds.requirements.push_back(requirement_row(g, ds.catalog));
    }

    // Reference cost per 1000 kcal for expenditure draws.
    std::vector<double> per_kcal_prices;
    for (int i = 0; i < params.n_items; ++i) {
        per_kcal_prices.push_back(item_price_per_kg[i] / (ds.foods[i].per_100g[energy] * 10.0) * 1000.0);
    }
    std::sort(per_kcal_prices.begin(), per_kcal_prices.end());
    const double ref_cost_1000 = 0.5 * per_kcal_prices[per_kcal_prices.size() / 2];

    // Households
    std::vector<double> shares;
    for (const auto &g : specs) {
        shares.push_back(g.share);
    }
    std::discrete_distribution<std::size_t> pick_group(shares.begin(), shares.end());
    std::vector<std::size_t> adult_groups;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        if (specs[k].lo >= 228 && specs[k].hi <= 851) {
            adult_groups.push_back(k);
        }
    }
    std::poisson_distribution<int> extra_members(3.2);

    auto draw_member = [&](const GroupSpec &g, std::string id) {
        MemberRecord m;
        m.person_id = std::move(id);
        m.sex = g.sex;
        if (g.label == std::string_view("Infant (all) 6 months-1 y") ||
            g.label == std::string_view("Child (all) 1-2 y")) {
            m.sex = unif(rng) < 0.5 ? Sex::male : Sex::female;
        }
        m.age_months = g.lo + static_cast<int>(unif(rng) * (g.hi - g.lo + 1));
        m.age_months = std::min(m.age_months, g.hi);
        m.lactating = g.lactating;
        return m;
    };
    auto meals_share = [&]() {
        const double u = unif(rng);
        if (u < 0.03) {
            return 0.0;
        }
        if (u < 0.15) {
            return static_cast<double>(7 + static_cast<int>(unif(rng) * 14)) / 21.0;
        }
        return 1.0;
    };

    const int span1 = std::min(12, n_months);
    const bool two_waves = params.second_wave && params.start < *params.second_wave &&
                           *params.second_wave <= params.end;
    const int hh_width = digits_for(params.n_households) + 1;
    for (int h = 0; h < params.n_households; ++h) {
        HouseholdRecord hh;
        hh.household_id = padded("H", h + 1, hh_width);
        const int d = static_cast<int>(unif(rng) * n_districts) % n_districts;
        hh.district_id = districts[d];
        hh.cluster_id = "EA" + districts[d].substr(1) + "-" + std::to_string(1 + static_cast<int>(unif(rng) * 3) % 3);
        hh.weight = std::exp(0.5 * normal(rng)) * 1000.0;
        hh.survey = params.start.plus_months(static_cast<int>(unif(rng) * span1) % span1);

        const auto &head = specs[adult_groups[static_cast<std::size_t>(unif(rng) * adult_groups.size()) %
                                             adult_groups.size()]];
        hh.members.push_back(draw_member(head, hh.household_id + "-P01"));
        hh.members.back().meals_share = 1.0;
        const int n_extra = std::min(extra_members(rng), 9);
        for (int k = 0; k < n_extra; ++k) {
            std::string pid = hh.household_id + "-P" + (k + 2 < 10 ? "0" : "") + std::to_string(k + 2);
            MemberRecord m;
            if (unif(rng) < 0.03) {
                m.person_id = pid;
                m.sex = unif(rng) < 0.5 ? Sex::male : Sex::female;
                m.age_months = static_cast<int>(unif(rng) * 6) % 6;
                m.meals_share = 1.0;
            } else {
                m = draw_member(specs[pick_group(rng)], pid);
                m.meals_share = meals_share();
            }
            hh.members.push_back(m);
        }

        auto expenditures = [&](HouseholdRecord &rec) {
            double kcal = 0.0;
            for (const auto &m : rec.members) {
                if (m.age_months >= kMinDietAgeMonths && m.meals_share > 0.0) {
                    kcal += classify(m, ds.requirements).energy_kcal * m.meals_share;
                }
            }
            const int t = rec.survey.index() - params.start.index();
            const double level = std::exp(params.price_drift * t);
            rec.food_exp_day = kcal / 1000.0 * ref_cost_1000 * level * std::exp(0.45 * normal(rng));
            rec.total_exp_day = rec.food_exp_day / (0.55 + 0.3 * unif(rng));
        };
        expenditures(hh);
        ds.households.push_back(hh);

        if (two_waves) {
            HouseholdRecord w2 = hh;
            const int span2 = std::min(12, months_between(*params.second_wave, params.end));
            w2.survey = params.second_wave->plus_months(static_cast<int>(unif(rng) * span2) % span2);
            const int elapsed = w2.survey.index() - hh.survey.index();
            for (auto &m : w2.members) {
                m.age_months += elapsed;
                m.lactating = m.sex == Sex::female && m.age_months >= 168 && m.age_months <= 611 &&
                              unif(rng) < 0.12;
            }
            if (w2.members.size() > 2 && unif(rng) < 0.1) {
                w2.members.pop_back();
            }
            expenditures(w2);
            ds.households.push_back(std::move(w2));
        }
    }

    // PPP conversion factors: local currency per PPP dollar.
    for (int y = params.start.year; y <= params.end.year; ++y) {
        ds.ppp_annual[y] = 200.0 * std::pow(1.12, y - params.start.year);
    }

    ds.validate_and_index();
    return out;
}

} // namespace dietcost
