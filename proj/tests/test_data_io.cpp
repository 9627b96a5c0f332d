#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dietcost/data_io.h"
#include "support.h"

#include <filesystem>
#include <sstream>

using namespace dietcost;
namespace fs = std::filesystem;

namespace {

ValidationError load_error(const fs::path &dir) {
    try {
        load_catalog(dir);
    } catch (const ValidationError &e) {
        return e;
    }
    FAIL("expected a validation error");
    throw;
}

} // namespace

TEST_CASE("toy dataset loads") {
    auto ds = testing::toy_dataset();
    CHECK(ds.markets().size() == 2);
    CHECK(ds.foods.size() == 5);
    CHECK(ds.household_ids().size() == 4);
    CHECK(ds.catalog.size() == 5);
    CHECK(ds.catalog.energy_index() == 0);

    auto f1 = ds.find_item("F1");
    REQUIRE(f1);
    CHECK(ds.foods[*f1].per_kg[0] == doctest::Approx(3600));
    CHECK(ds.foods[*f1].per_100g[0] == 360);

    CHECK(ds.market_of(ds.households[1]) == "M1");
    CHECK(ds.menu("M1", {2013, 6}).size() == 5);
    CHECK(ds.menu("M2", {2013, 6}).empty());
    CHECK(ds.ppp_annual.at(2013) == 200);
}

TEST_CASE("zero price is a unit error citing the row") {
    auto dir = testing::scratch_dir("zero_price");
    testing::write_toy_dataset(dir);
    auto text = testing::read_text(dir / "prices.csv");
    auto first_nl = text.find('\n');
    auto second_nl = text.find('\n', first_nl + 1);
    auto line = text.substr(first_nl + 1, second_nl - first_nl - 1);
    auto comma = line.rfind(',');
    text.replace(first_nl + 1, second_nl - first_nl - 1, line.substr(0, comma + 1) + "0");
    testing::write_text(dir / "prices.csv", text);

    auto e = load_error(dir);
    CHECK(e.kind() == ErrorKind::unit);
    CHECK(e.file() == "prices.csv");
    CHECK(e.row() == 2);
    fs::remove_all(dir);
}

TEST_CASE("household in an unmapped district is a referential error") {
    auto dir = testing::scratch_dir("unmapped");
    testing::write_toy_dataset(dir);
    testing::write_text(dir / "market_map.csv", "district_id,market_id\nD1,M1\nD3,M2\n");
    auto e = load_error(dir);
    CHECK(e.kind() == ErrorKind::referential);
    CHECK(e.file() == "households.csv");
    fs::remove_all(dir);
}

TEST_CASE("schema and rule errors") {
    auto dir = testing::scratch_dir("schema");
    testing::write_toy_dataset(dir);

    SUBCASE("missing column") {
        testing::write_text(dir / "market_map.csv", "district,market_id\nD1,M1\n");
        CHECK(load_error(dir).kind() == ErrorKind::schema);
    }
    SUBCASE("non-numeric price") {
        auto text = testing::read_text(dir / "prices.csv");
        text += "M1,2014,1,F1,abc\n";
        testing::write_text(dir / "prices.csv", text);
        CHECK(load_error(dir).kind() == ErrorKind::schema);
    }
    SUBCASE("unknown item") {
        auto text = testing::read_text(dir / "prices.csv");
        text += "M1,2014,1,F9,10\n";
        testing::write_text(dir / "prices.csv", text);
        CHECK(load_error(dir).kind() == ErrorKind::referential);
    }
    SUBCASE("duplicate price") {
        auto text = testing::read_text(dir / "prices.csv");
        text += "M1,2013,1,F1,10\n";
        testing::write_text(dir / "prices.csv", text);
        CHECK(load_error(dir).kind() == ErrorKind::rule);
    }
    SUBCASE("negative composition") {
        auto text = testing::read_text(dir / "foods.csv");
        text += "F6,salt,other,-1,0,0,0,0\n";
        testing::write_text(dir / "foods.csv", text);
        CHECK(load_error(dir).kind() == ErrorKind::unit);
    }
    SUBCASE("duplicate district") {
        testing::write_text(dir / "market_map.csv", "district_id,market_id\nD1,M1\nD2,M1\nD3,M2\nD1,M2\n");
        CHECK(load_error(dir).kind() == ErrorKind::rule);
    }
    fs::remove_all(dir);
}

TEST_CASE("write then load reproduces the dataset") {
    auto ds = testing::toy_dataset();
    auto dir = testing::scratch_dir("roundtrip");
    write_dataset(ds, dir);
    auto back = load_catalog(dir);
    CHECK(back == ds);

    SynthParams p;
    p.seed = 11;
    p.n_households = 12;
    auto synth = synth_generate(p).dataset;
    write_dataset(synth, dir);
    CHECK(load_catalog(dir) == synth);
    fs::remove_all(dir);
}

TEST_CASE("availability counts markets per item and month") {
    auto ds = testing::toy_dataset();
    auto cells = availability_matrix(ds);
    CHECK(cells.size() == 5 * 12);
    for (const auto &c : cells) {
        CHECK(c.n_markets_observed == (c.when.month == 6 ? 1 : 2));
    }

    SynthParams p;
    p.seed = 4;
    p.n_markets = 6;
    p.n_items = 10;
    p.n_households = 10;
    p.missingness_rate = 0.0;
    auto synth = synth_generate(p).dataset;
    std::erase_if(synth.prices, [](const PriceObservation &o) {
        return o.market_id == "M03" && o.when == YearMonth{2014, 3};
    });
    synth.validate_and_index();
    for (const auto &c : availability_matrix(synth)) {
        CHECK(c.n_markets_observed == (c.when == YearMonth{2014, 3} ? 5 : 6));
    }
}

TEST_CASE("item with no price rows has an all-zero availability row") {
    auto dir = testing::scratch_dir("unpriced");
    testing::write_toy_dataset(dir);
    auto text = testing::read_text(dir / "foods.csv");
    text += "F6,salt,other,1,0,0,0,39000\n";
    testing::write_text(dir / "foods.csv", text);
    auto ds = load_catalog(dir);
    int seen = 0;
    for (const auto &c : availability_matrix(ds)) {
        if (c.item_id == "F6") {
            CHECK(c.n_markets_observed == 0);
            ++seen;
        }
    }
    CHECK(seen == 12);
    fs::remove_all(dir);
}

TEST_CASE("synthetic generator") {
    SynthParams p;
    p.seed = 21;
    p.n_markets = 8;
    p.n_items = 40;
    p.n_households = 30;
    p.missingness_rate = 0.15;

    SUBCASE("deterministic for a fixed seed") {
        auto a = synth_generate(p);
        auto b = synth_generate(p);
        CHECK(a.dataset == b.dataset);
        auto da = testing::scratch_dir("synth_a");
        auto db = testing::scratch_dir("synth_b");
        write_dataset(a.dataset, da);
        write_dataset(b.dataset, db);
        for (const auto &entry : fs::directory_iterator(da)) {
            CHECK(testing::read_text(entry.path()) == testing::read_text(db / entry.path().filename()));
        }
        fs::remove_all(da);
        fs::remove_all(db);
        p.seed = 22;
        CHECK_FALSE(synth_generate(p).dataset == a.dataset);
    }

    SUBCASE("missingness rate within one point") {
        auto ds = synth_generate(p).dataset;
        const double cells = 8.0 * 40.0 * months_between(p.start, p.end);
        REQUIRE(cells >= 10000);
        double rate = 1.0 - static_cast<double>(ds.prices.size()) / cells;
        CHECK(std::abs(rate - 0.15) <= 0.01);
    }

    SUBCASE("missingness is concentrated in lean months") {
        auto ds = synth_generate(p).dataset;
        std::array<int, 13> observed{};
        for (const auto &o : ds.prices) {
            ++observed[o.when.month];
        }
        const int months = months_between(p.start, p.end);
        auto missing_rate = [&](int month) {
            int n = 0;
            for (int t = 0; t < months; ++t) {
                n += p.start.plus_months(t).month == month;
            }
            return 1.0 - observed[month] / (8.0 * 40.0 * n);
        };
        CHECK(missing_rate(1) > 2.0 * missing_rate(7));
    }

    SUBCASE("households use standard groups and two waves") {
        auto ds = synth_generate(p).dataset;
        CHECK(ds.households.size() == 60);
        CHECK(ds.requirements.size() == 21);
        CHECK(ds.markets().size() == 8);
        CHECK(ds.catalog == NutrientCatalog::malawi_default());
    }

    SUBCASE("bad parameters") {
        p.missingness_rate = 1.0;
        CHECK_THROWS_AS(synth_generate(p), std::invalid_argument);
        p.missingness_rate = 0.1;
        p.price_seasonal_amplitude = -0.1;
        CHECK_THROWS_AS(synth_generate(p), std::invalid_argument);
        p.price_seasonal_amplitude = 0.1;
        p.n_markets = 0;
        CHECK_THROWS_AS(synth_generate(p), std::invalid_argument);
    }
}
