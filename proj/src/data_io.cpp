#include "dietcost/data_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

namespace dietcost {

namespace fs = std::filesystem;

std::string_view to_string(BoundKind kind) noexcept {
    switch (kind) {
    case BoundKind::lower_only:
        return "lower_only";
    case BoundKind::upper_only:
        return "upper_only";
    case BoundKind::both:
        return "both";
    case BoundKind::equality:
        return "equality";
    }
    return "both";
}

BoundKind parse_bound_kind(std::string_view text) {
    if (text == "lower_only") {
        return BoundKind::lower_only;
    }
    if (text == "upper_only") {
        return BoundKind::upper_only;
    }
    if (text == "both") {
        return BoundKind::both;
    }
    if (text == "equality") {
        return BoundKind::equality;
    }
    throw std::invalid_argument("unknown bound_kind '" + std::string(text) + "'");
}

NutrientCatalog::NutrientCatalog(std::vector<NutrientDef> nutrients)
    : nutrients_{std::move(nutrients)} {
    std::size_t n_energy = 0;
    for (std::size_t i = 0; i < nutrients_.size(); ++i) {
        if (nutrients_[i].bound_kind == BoundKind::equality) {
            energy_index_ = i;
            ++n_energy;
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (nutrients_[k].id == nutrients_[i].id) {
                throw std::invalid_argument("duplicate nutrient_id '" + nutrients_[i].id + "'");
            }
        }
    }
    if (n_energy != 1) {
        throw std::invalid_argument("exactly one nutrient must have bound_kind 'equality' (energy), found " +
                                    std::to_string(n_energy));
    }
}

NutrientCatalog NutrientCatalog::malawi_default() {
    using K = BoundKind;
    return NutrientCatalog({
        {"energy", "Energy", "kcal", K::equality},
        {"carbohydrate", "Carbohydrate", "g", K::both},
        {"protein", "Protein", "g", K::both},
        {"lipids", "Lipids", "g", K::both},
        {"vitamin_a", "Vitamin A", "µg", K::lower_only},
        {"retinol", "Retinol", "µg", K::upper_only},
        {"vitamin_c", "Vitamin C", "mg", K::both},
        {"vitamin_e", "Vitamin E", "mg", K::both},
        {"thiamin", "Thiamin", "mg", K::lower_only},
        {"riboflavin", "Riboflavin", "mg", K::lower_only},
        {"niacin", "Niacin", "mg", K::lower_only},
        {"vitamin_b6", "Vitamin B6", "mg", K::both},
        {"folate", "Folate", "µg", K::lower_only},
        {"vitamin_b12", "Vitamin B12", "µg", K::lower_only},
        {"calcium", "Calcium", "mg", K::both},
        {"copper", "Copper", "mg", K::both},
        {"iron", "Iron", "mg", K::both},
        {"magnesium", "Magnesium", "mg", K::lower_only},
        {"phosphorus", "Phosphorus", "mg", K::both},
        {"selenium", "Selenium", "µg", K::both},
        {"zinc", "Zinc", "mg", K::both},
        {"sodium", "Sodium", "mg", K::upper_only},
    });
}

std::optional<std::size_t> NutrientCatalog::find(std::string_view id) const {
    for (std::size_t i = 0; i < nutrients_.size(); ++i) {
        if (nutrients_[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t NutrientCatalog::lower_count() const noexcept {
    return std::count_if(nutrients_.begin(), nutrients_.end(),
                         [](const auto &n) { return has_lower(n.bound_kind); });
}

std::size_t NutrientCatalog::upper_count() const noexcept {
    return std::count_if(nutrients_.begin(), nutrients_.end(),
                         [](const auto &n) { return has_upper(n.bound_kind); });
}

namespace {

constexpr const char *kFoods = "foods.csv";
constexpr const char *kNutrients = "nutrients.csv";
constexpr const char *kPrices = "prices.csv";
constexpr const char *kMarketMap = "market_map.csv";
constexpr const char *kHouseholds = "households.csv";
constexpr const char *kMembers = "members.csv";
constexpr const char *kRequirements = "requirements.csv";
constexpr const char *kPpp = "ppp_annual.csv";

// Lactation rows exist for 14-50 years.
constexpr int kLactationMinMonths = 14 * 12;
constexpr int kLactationMaxMonths = 51 * 12 - 1;

ValidationError file_error(ErrorKind kind, const char *file, std::size_t row, std::string rule) {
    return ValidationError(kind, file, row, std::move(rule));
}

Sex parse_sex(const CsvTable &t, std::size_t r, std::size_t c) {
    const auto &s = t.cell(r, c);
    if (s == "M" || s == "m" || s == "male") {
        return Sex::male;
    }
    if (s == "F" || s == "f" || s == "female") {
        return Sex::female;
    }
    throw t.error(ErrorKind::schema, t.line_of(r), "sex must be M or F, got '" + s + "'");
}

bool parse_flag(const CsvTable &t, std::size_t r, std::size_t c) {
    const auto &s = t.cell(r, c);
    if (s == "1" || s == "true" || s == "TRUE") {
        return true;
    }
    if (s == "0" || s == "false" || s == "FALSE" || s.empty()) {
        return false;
    }
    throw t.error(ErrorKind::schema, t.line_of(r), "flag must be 0 or 1, got '" + s + "'");
}

int parse_month(const CsvTable &t, std::size_t r, std::size_t c) {
    auto m = t.integer(r, c);
    if (m < 1 || m > 12) {
        throw t.error(ErrorKind::schema, t.line_of(r), "month must be in 1-12");
    }
    return static_cast<int>(m);
}

NutrientCatalog read_nutrients(const fs::path &dir) {
    auto t = CsvTable::read(dir / kNutrients);
    auto c_id = t.column("nutrient_id");
    auto c_name = t.column("name");
    auto c_unit = t.column("unit");
    auto c_kind = t.column("bound_kind");
    std::vector<NutrientDef> defs;
    for (std::size_t r = 0; r < t.size(); ++r) {
        NutrientDef d{t.cell(r, c_id), t.cell(r, c_name), t.cell(r, c_unit), BoundKind::both};
        try {
            d.bound_kind = parse_bound_kind(t.cell(r, c_kind));
        } catch (const std::invalid_argument &e) {
            throw t.error(ErrorKind::schema, t.line_of(r), e.what());
        }
        defs.push_back(std::move(d));
    }
    try {
        return NutrientCatalog(std::move(defs));
    } catch (const std::invalid_argument &e) {
        throw t.error(ErrorKind::rule, 0, e.what());
    }
}

std::vector<FoodItem> read_foods(const fs::path &dir, const NutrientCatalog &catalog) {
    auto t = CsvTable::read(dir / kFoods);
    auto c_id = t.column("item_id");
    auto c_name = t.column("name");
    auto c_group = t.column("food_group");
    std::vector<std::size_t> cols;
    for (const auto &n : catalog.nutrients()) {
        cols.push_back(t.column(n.id));
    }
    std::vector<FoodItem> foods;
    for (std::size_t r = 0; r < t.size(); ++r) {
        FoodItem f{t.cell(r, c_id), t.cell(r, c_name), t.cell(r, c_group), {}, {}};
        for (std::size_t j = 0; j < cols.size(); ++j) {
            double v = t.number(r, cols[j]);
            if (v < 0.0) {
                throw t.error(ErrorKind::unit, t.line_of(r),
                              "negative content for nutrient '" + catalog[j].id + "'");
            }
            f.per_100g.push_back(v);
        }
        foods.push_back(std::move(f));
    }
    return foods;
}

std::vector<PriceObservation> read_prices(const fs::path &dir, const std::vector<FoodItem> &foods,
                                         const NutrientCatalog &catalog,
                                         const std::map<std::string, std::string> &market_map) {
    std::map<std::string, const FoodItem *> items;
    for (const auto &f : foods) {
        items.emplace(f.item_id, &f);
    }
    std::set<std::string> markets;
    for (const auto &[d, m] : market_map) {
        markets.insert(m);
    }
    auto t = CsvTable::read(dir / kPrices);
    auto c_market = t.column("market_id");
    auto c_year = t.column("year");
    auto c_month = t.column("month");
    auto c_item = t.column("item_id");
    auto c_price = t.column("price_per_kg");
    std::vector<PriceObservation> prices;
    prices.reserve(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) {
        PriceObservation p{t.cell(r, c_market),
                           YearMonth{static_cast<int>(t.integer(r, c_year)), parse_month(t, r, c_month)},
                           t.cell(r, c_item), t.number(r, c_price)};
        if (!(p.price_per_kg > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r), "price_per_kg must be > 0");
        }
        auto item = items.find(p.item_id);
        if (item == items.end()) {
            throw t.error(ErrorKind::referential, t.line_of(r), "unknown item_id '" + p.item_id + "'");
        }
        if (!(item->second->per_100g[catalog.energy_index()] > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r),
                          "priced item '" + p.item_id + "' has no energy content");
        }
        if (!markets.contains(p.market_id)) {
            throw t.error(ErrorKind::referential, t.line_of(r),
                          "market '" + p.market_id + "' is not in market_map.csv");
        }
        prices.push_back(std::move(p));
    }
    return prices;
}

std::map<std::string, std::string> read_market_map(const fs::path &dir) {
    auto t = CsvTable::read(dir / kMarketMap);
    auto c_d = t.column("district_id");
    auto c_m = t.column("market_id");
    std::map<std::string, std::string> map;
    for (std::size_t r = 0; r < t.size(); ++r) {
        if (!map.emplace(t.cell(r, c_d), t.cell(r, c_m)).second) {
            throw t.error(ErrorKind::rule, t.line_of(r),
                          "district '" + t.cell(r, c_d) + "' is mapped more than once");
        }
    }
    return map;
}

std::vector<HouseholdRecord> read_households(const fs::path &dir,
                                             const std::map<std::string, std::string> &market_map) {
    auto t = CsvTable::read(dir / kHouseholds);
    auto c_id = t.column("household_id");
    auto c_d = t.column("district_id");
    auto c_y = t.column("survey_year");
    auto c_m = t.column("survey_month");
    auto c_food = t.column("food_exp_day");
    auto c_total = t.column("total_exp_day");
    auto c_w = t.column("weight");
    auto c_cluster = t.find_column("cluster_id");
    std::vector<HouseholdRecord> out;
    for (std::size_t r = 0; r < t.size(); ++r) {
        HouseholdRecord h;
        h.household_id = t.cell(r, c_id);
        h.district_id = t.cell(r, c_d);
        h.survey = YearMonth{static_cast<int>(t.integer(r, c_y)), parse_month(t, r, c_m)};
        h.food_exp_day = t.number(r, c_food);
        h.total_exp_day = t.number(r, c_total);
        h.weight = t.number(r, c_w);
        if (c_cluster) {
            h.cluster_id = t.cell(r, *c_cluster);
        }
        if (!(h.food_exp_day > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r), "food_exp_day must be > 0");
        }
        if (h.total_exp_day < h.food_exp_day) {
            throw t.error(ErrorKind::unit, t.line_of(r), "total_exp_day must be >= food_exp_day");
        }
        if (!(h.weight > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r), "weight must be > 0");
        }
        if (!market_map.contains(h.district_id)) {
            throw t.error(ErrorKind::referential, t.line_of(r),
                          "district '" + h.district_id + "' has no market in market_map.csv");
        }
        out.push_back(std::move(h));
    }
    return out;
}

void read_members(const fs::path &dir, std::vector<HouseholdRecord> &households) {
    auto t = CsvTable::read(dir / kMembers);
    auto c_hh = t.column("household_id");
    auto c_p = t.column("person_id");
    auto c_age = t.column("age_months");
    auto c_sex = t.column("sex");
    auto c_lact = t.column("lactating");
    auto c_share = t.column("meals_share");
    auto c_wave = t.find_column("survey_year");

    std::multimap<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < households.size(); ++i) {
        by_id.emplace(households[i].household_id, i);
    }
    for (std::size_t r = 0; r < t.size(); ++r) {
        MemberRecord m;
        m.person_id = t.cell(r, c_p);
        auto age = t.integer(r, c_age);
        if (age < 0) {
            throw t.error(ErrorKind::unit, t.line_of(r), "age_months must be >= 0");
        }
        m.age_months = static_cast<int>(age);
        m.sex = parse_sex(t, r, c_sex);
        m.lactating = parse_flag(t, r, c_lact);
        m.meals_share = t.number(r, c_share);
        if (m.meals_share < 0.0 || m.meals_share > 1.0) {
            throw t.error(ErrorKind::unit, t.line_of(r), "meals_share must be in [0,1]");
        }
        if (m.lactating && (m.sex != Sex::female || m.age_months < kLactationMinMonths ||
                            m.age_months > kLactationMaxMonths)) {
            throw t.error(ErrorKind::rule, t.line_of(r),
                          "lactating is only valid for females aged 14-50 years");
        }
        auto [lo, hi] = by_id.equal_range(t.cell(r, c_hh));
        if (lo == hi) {
            throw t.error(ErrorKind::referential, t.line_of(r),
                          "unknown household_id '" + t.cell(r, c_hh) + "'");
        }
        std::optional<long> wave;
        if (c_wave && !t.cell(r, *c_wave).empty()) {
            wave = t.integer(r, *c_wave);
        }
        bool attached = false;
        for (auto it = lo; it != hi; ++it) {
            auto &hh = households[it->second];
            if (wave && hh.survey.year != *wave) {
                continue;
            }
            for (const auto &other : hh.members) {
                if (other.person_id == m.person_id) {
                    throw t.error(ErrorKind::rule, t.line_of(r),
                                  "duplicate person_id '" + m.person_id + "' in household");
                }
            }
            hh.members.push_back(m);
            attached = true;
        }
        if (!attached) {
            throw t.error(ErrorKind::referential, t.line_of(r),
                          "no survey record of household '" + t.cell(r, c_hh) + "' in year " +
                              std::to_string(*wave));
        }
    }
}

std::vector<RequirementRow> read_requirements(const fs::path &dir, const NutrientCatalog &catalog) {
    auto t = CsvTable::read(dir / kRequirements);
    auto c_g = t.column("group_id");
    auto c_e = t.column("energy_kcal");
    std::vector<std::optional<std::size_t>> c_min(catalog.size()), c_max(catalog.size());
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        if (j == catalog.energy_index()) {
            continue;
        }
        c_min[j] = t.find_column("min_" + catalog[j].id);
        c_max[j] = t.find_column("max_" + catalog[j].id);
        if (has_lower(catalog[j].bound_kind) && !c_min[j]) {
            throw t.error(ErrorKind::schema, 1, "missing column 'min_" + catalog[j].id + "'");
        }
        if (has_upper(catalog[j].bound_kind) && !c_max[j]) {
            throw t.error(ErrorKind::schema, 1, "missing column 'max_" + catalog[j].id + "'");
        }
    }
    std::vector<RequirementRow> rows;
    for (std::size_t r = 0; r < t.size(); ++r) {
        RequirementRow row;
        row.group_id = t.cell(r, c_g);
        row.energy_kcal = t.number(r, c_e);
        if (!(row.energy_kcal > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r), "energy_kcal must be > 0");
        }
        row.min_need.resize(catalog.size());
        row.max_tolerance.resize(catalog.size());
        for (std::size_t j = 0; j < catalog.size(); ++j) {
            if (j == catalog.energy_index()) {
                continue;
            }
            const auto kind = catalog[j].bound_kind;
            if (c_min[j]) {
                row.min_need[j] = t.optional_number(r, *c_min[j]);
            }
            if (c_max[j]) {
                row.max_tolerance[j] = t.optional_number(r, *c_max[j]);
            }
            if (has_lower(kind) != row.min_need[j].has_value() ||
                has_upper(kind) != row.max_tolerance[j].has_value()) {
                throw t.error(ErrorKind::rule, t.line_of(r),
                              "bounds for '" + catalog[j].id + "' must match bound_kind " +
                                  std::string(to_string(kind)));
            }
            if ((row.min_need[j] && *row.min_need[j] < 0.0) ||
                (row.max_tolerance[j] && *row.max_tolerance[j] < 0.0)) {
                throw t.error(ErrorKind::unit, t.line_of(r),
                              "negative bound for '" + catalog[j].id + "'");
            }
            if (kind == BoundKind::both && *row.min_need[j] > *row.max_tolerance[j]) {
                throw t.error(ErrorKind::rule, t.line_of(r),
                              "min exceeds max for '" + catalog[j].id + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::map<int, double> read_ppp(const fs::path &dir) {
    std::map<int, double> out;
    if (!fs::exists(dir / kPpp)) {
        return out;
    }
    auto t = CsvTable::read(dir / kPpp);
    auto c_y = t.column("year");
    auto c_f = t.column("factor");
    for (std::size_t r = 0; r < t.size(); ++r) {
        double f = t.number(r, c_f);
        if (!(f > 0.0)) {
            throw t.error(ErrorKind::unit, t.line_of(r), "factor must be > 0");
        }
        if (!out.emplace(static_cast<int>(t.integer(r, c_y)), f).second) {
            throw t.error(ErrorKind::rule, t.line_of(r), "duplicate year");
        }
    }
    return out;
}

} // namespace

void Dataset::validate_and_index() {
    for (auto &f : foods) {
        if (f.per_100g.size() != catalog.size()) {
            throw file_error(ErrorKind::schema, kFoods, 0,
                             "item '" + f.item_id + "' does not cover the nutrient catalog");
        }
        f.per_kg.resize(f.per_100g.size());
        for (std::size_t j = 0; j < f.per_100g.size(); ++j) {
            if (!std::isfinite(f.per_100g[j]) || f.per_100g[j] < 0.0) {
                throw file_error(ErrorKind::unit, kFoods, 0,
                                 "item '" + f.item_id + "' has invalid content for '" +
                                     catalog[j].id + "'");
            }
            f.per_kg[j] = f.per_100g[j] * 10.0;
        }
    }
    std::sort(foods.begin(), foods.end(),
              [](const auto &a, const auto &b) { return a.item_id < b.item_id; });
    item_index_.clear();
    for (std::size_t i = 0; i < foods.size(); ++i) {
        if (!item_index_.emplace(foods[i].item_id, i).second) {
            throw file_error(ErrorKind::rule, kFoods, 0, "duplicate item_id '" + foods[i].item_id + "'");
        }
    }

    std::set<std::string> known_markets;
    for (const auto &[district, market] : market_map) {
        known_markets.insert(market);
    }
    markets_.assign(known_markets.begin(), known_markets.end());

    std::sort(prices.begin(), prices.end(), [](const auto &a, const auto &b) {
        return std::tie(a.market_id, a.when, a.item_id) < std::tie(b.market_id, b.when, b.item_id);
    });
    menus_.clear();
    for (std::size_t r = 0; r < prices.size(); ++r) {
        const auto &p = prices[r];
        auto item = find_item(p.item_id);
        if (!item) {
            throw file_error(ErrorKind::referential, kPrices, 0,
                             "unknown item_id '" + p.item_id + "'");
        }
        if (!known_markets.contains(p.market_id)) {
            throw file_error(ErrorKind::referential, kPrices, 0,
                             "market '" + p.market_id + "' is not in market_map.csv");
        }
        if (!(p.price_per_kg > 0.0) || !std::isfinite(p.price_per_kg)) {
            throw file_error(ErrorKind::unit, kPrices, 0, "price_per_kg must be > 0");
        }
        if (!(foods[*item].per_kg[catalog.energy_index()] > 0.0)) {
            throw file_error(ErrorKind::unit, kPrices, 0,
                             "priced item '" + p.item_id + "' has no energy content");
        }
        if (r > 0 && prices[r - 1].market_id == p.market_id && prices[r - 1].when == p.when &&
            prices[r - 1].item_id == p.item_id) {
            throw file_error(ErrorKind::rule, kPrices, 0,
                             "duplicate price for " + p.market_id + " " + p.when.to_string() +
                                 " " + p.item_id);
        }
        menus_[{p.market_id, p.when.index()}].push_back(MenuEntry{*item, p.price_per_kg});
    }

    std::sort(households.begin(), households.end(), [](const auto &a, const auto &b) {
        return std::tie(a.household_id, a.survey) < std::tie(b.household_id, b.survey);
    });
    for (std::size_t i = 0; i < households.size(); ++i) {
        const auto &h = households[i];
        if (!market_map.contains(h.district_id)) {
            throw file_error(ErrorKind::referential, kHouseholds, 0,
                             "household '" + h.household_id + "' is in unmapped district '" +
                                 h.district_id + "'");
        }
        if (i > 0 && households[i - 1].household_id == h.household_id &&
            households[i - 1].survey.year == h.survey.year) {
            throw file_error(ErrorKind::rule, kHouseholds, 0,
                             "household '" + h.household_id + "' surveyed twice in one year");
        }
        if (h.members.empty()) {
            throw file_error(ErrorKind::rule, kMembers, 0,
                             "household '" + h.household_id + "' has no members");
        }
        bool eligible = std::any_of(h.members.begin(), h.members.end(), [](const auto &m) {
            return m.age_months >= 6 && m.meals_share > 0.0;
        });
        if (!eligible) {
            throw file_error(ErrorKind::rule, kMembers, 0,
                             "household '" + h.household_id +
                                 "' has no member aged 6 months or more eating in the household");
        }
    }

    std::set<std::string> groups;
    for (const auto &row : requirements) {
        if (!groups.insert(row.group_id).second) {
            throw file_error(ErrorKind::rule, kRequirements, 0,
                             "duplicate group_id '" + row.group_id + "'");
        }
        if (row.min_need.size() != catalog.size() || row.max_tolerance.size() != catalog.size()) {
            throw file_error(ErrorKind::schema, kRequirements, 0,
                             "group '" + row.group_id + "' does not cover the nutrient catalog");
        }
    }
}

std::optional<std::size_t> Dataset::find_item(std::string_view item_id) const {
    auto it = item_index_.find(std::string(item_id));
    if (it == item_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string &Dataset::market_of(const HouseholdRecord &hh) const {
    return market_map.at(hh.district_id);
}

std::span<const MenuEntry> Dataset::menu(const std::string &market_id, YearMonth when) const {
    auto it = menus_.find({market_id, when.index()});
    if (it == menus_.end()) {
        return {};
    }
    return it->second;
}

std::pair<YearMonth, YearMonth> Dataset::price_span() const {
    if (prices.empty()) {
        return {YearMonth{}, YearMonth{}};
    }
    auto [lo, hi] = std::minmax_element(prices.begin(), prices.end(),
                                        [](const auto &a, const auto &b) { return a.when < b.when; });
    return {lo->when, hi->when};
}

std::vector<std::string> Dataset::household_ids() const {
    std::vector<std::string> ids;
    for (const auto &h : households) {
        if (ids.empty() || ids.back() != h.household_id) {
            ids.push_back(h.household_id);
        }
    }
    return ids;
}

const RequirementRow *Dataset::find_requirement(std::string_view group_id) const {
    for (const auto &row : requirements) {
        if (row.group_id == group_id) {
            return &row;
        }
    }
    return nullptr;
}

Dataset load_catalog(const fs::path &dir) {
    Dataset ds;
    ds.catalog = read_nutrients(dir);
    ds.foods = read_foods(dir, ds.catalog);
    ds.market_map = read_market_map(dir);
    ds.prices = read_prices(dir, ds.foods, ds.catalog, ds.market_map);
    ds.households = read_households(dir, ds.market_map);
    read_members(dir, ds.households);
    ds.requirements = read_requirements(dir, ds.catalog);
    ds.ppp_annual = read_ppp(dir);
    ds.validate_and_index();
    return ds;
}

namespace {

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::string opt(const std::optional<double> &v) { return v ? format_double(*v) : std::string{}; }

} // namespace

void write_dataset(const Dataset &ds, const fs::path &dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / kNutrients);
        write_csv_row(out, {"nutrient_id", "name", "unit", "bound_kind"});
        for (const auto &n : ds.catalog.nutrients()) {
            write_csv_row(out, {n.id, n.name, n.unit, std::string(to_string(n.bound_kind))});
        }
    }
    {
        auto out = open_out(dir / kFoods);
        std::vector<std::string> header{"item_id", "name", "food_group"};
        for (const auto &n : ds.catalog.nutrients()) {
            header.push_back(n.id);
        }
        write_csv_row(out, header);
        for (const auto &f : ds.foods) {
            std::vector<std::string> row{f.item_id, f.name, f.food_group};
            for (double v : f.per_100g) {
                row.push_back(format_double(v));
            }
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_out(dir / kPrices);
        write_csv_row(out, {"market_id", "year", "month", "item_id", "price_per_kg"});
        for (const auto &p : ds.prices) {
            write_csv_row(out, {p.market_id, std::to_string(p.when.year), std::to_string(p.when.month),
                                p.item_id, format_double(p.price_per_kg)});
        }
    }
    {
        auto out = open_out(dir / kMarketMap);
        write_csv_row(out, {"district_id", "market_id"});
        for (const auto &[d, m] : ds.market_map) {
            write_csv_row(out, {d, m});
        }
    }
    bool clusters = std::any_of(ds.households.begin(), ds.households.end(),
                                [](const auto &h) { return !h.cluster_id.empty(); });
    {
        auto out = open_out(dir / kHouseholds);
        std::vector<std::string> header{"household_id", "district_id", "survey_year", "survey_month",
                                        "food_exp_day", "total_exp_day", "weight"};
        if (clusters) {
            header.push_back("cluster_id");
        }
        write_csv_row(out, header);
        for (const auto &h : ds.households) {
            std::vector<std::string> row{h.household_id,
                                         h.district_id,
                                         std::to_string(h.survey.year),
                                         std::to_string(h.survey.month),
                                         format_double(h.food_exp_day),
                                         format_double(h.total_exp_day),
                                         format_double(h.weight)};
            if (clusters) {
                row.push_back(h.cluster_id);
            }
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_out(dir / kMembers);
        write_csv_row(out, {"household_id", "person_id", "age_months", "sex", "lactating",
                            "meals_share", "survey_year"});
        for (const auto &h : ds.households) {
            for (const auto &m : h.members) {
                write_csv_row(out, {h.household_id, m.person_id, std::to_string(m.age_months),
                                    m.sex == Sex::male ? "M" : "F", m.lactating ? "1" : "0",
                                    format_double(m.meals_share), std::to_string(h.survey.year)});
            }
        }
    }
    {
        auto out = open_out(dir / kRequirements);
        std::vector<std::string> header{"group_id", "energy_kcal"};
        for (std::size_t j = 0; j < ds.catalog.size(); ++j) {
            const auto &n = ds.catalog[j];
            if (has_lower(n.bound_kind)) {
                header.push_back("min_" + n.id);
            }
            if (has_upper(n.bound_kind)) {
                header.push_back("max_" + n.id);
            }
        }
        write_csv_row(out, header);
        for (const auto &r : ds.requirements) {
            std::vector<std::string> row{r.group_id, format_double(r.energy_kcal)};
            for (std::size_t j = 0; j < ds.catalog.size(); ++j) {
                const auto &n = ds.catalog[j];
                if (has_lower(n.bound_kind)) {
                    row.push_back(opt(r.min_need[j]));
                }
                if (has_upper(n.bound_kind)) {
                    row.push_back(opt(r.max_tolerance[j]));
                }
            }
            write_csv_row(out, row);
        }
    }
    if (!ds.ppp_annual.empty()) {
        auto out = open_out(dir / kPpp);
        write_csv_row(out, {"year", "factor"});
        for (const auto &[y, f] : ds.ppp_annual) {
            write_csv_row(out, {std::to_string(y), format_double(f)});
        }
    }
}

std::vector<AvailabilityCell> availability_matrix(const Dataset &ds) {
    std::vector<AvailabilityCell> cells;
    if (ds.prices.empty()) {
        return cells;
    }
    auto [first, last] = ds.price_span();
    const int n_months = months_between(first, last);
    std::vector<int> counts(ds.foods.size() * n_months, 0);
    for (const auto &p : ds.prices) {
        auto item = *ds.find_item(p.item_id);
        ++counts[item * n_months + (p.when.index() - first.index())];
    }
    cells.reserve(counts.size());
    for (std::size_t i = 0; i < ds.foods.size(); ++i) {
        for (int t = 0; t < n_months; ++t) {
            cells.push_back({ds.foods[i].item_id, first.plus_months(t), counts[i * n_months + t]});
        }
    }
    return cells;
}

void write_availability_csv(const std::vector<AvailabilityCell> &cells, std::ostream &out) {
    write_csv_row(out, {"item_id", "year", "month", "n_markets_observed"});
    for (const auto &c : cells) {
        write_csv_row(out, {c.item_id, std::to_string(c.when.year), std::to_string(c.when.month),
                            std::to_string(c.n_markets_observed)});
    }
}

} // namespace dietcost
