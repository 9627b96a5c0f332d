#include "support.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace testing {

fs::path scratch_dir(const std::string &name) {
    auto dir = fs::temp_directory_path() / ("dietcost_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_toy_dataset(const fs::path &dir) {
    fs::create_directories(dir);
    write_text(dir / "nutrients.csv", "nutrient_id,name,unit,bound_kind\n"
                                      "energy,Energy,kcal,equality\n"
                                      "protein,Protein,g,both\n"
                                      "iron,Iron,mg,both\n"
                                      "vitamin_c,Vitamin C,mg,lower_only\n"
                                      "sodium,Sodium,mg,upper_only\n");
    write_text(dir / "foods.csv", "item_id,name,food_group,energy,protein,iron,vitamin_c,sodium\n"
                                  "F1,maize flour,cereals,360,9,2.5,0,5\n"
                                  "F2,beans,legumes,340,22,8,2,20\n"
                                  "F3,pumpkin leaves,dark_green_leafy_vegetables,30,3,3,40,30\n"
                                  "F4,dried fish,fish_seafood,120,20,1.5,0,150\n"
                                  "F5,vegetable oil,oils_fats,880,0,0,0,0\n");
    write_text(dir / "market_map.csv", "district_id,market_id\nD1,M1\nD2,M1\nD3,M2\n");

    const double base[] = {300, 900, 500, 2000, 1500};
    std::ostringstream prices;
    prices << "market_id,year,month,item_id,price_per_kg\n";
    for (int m = 0; m < 2; ++m) {
        for (int month = 1; month <= 12; ++month) {
            if (m == 1 && month == 6) {
                continue;
            }
            for (int i = 0; i < 5; ++i) {
                double p = base[i] * (1.0 + 0.1 * m) * (1.0 + 0.05 * std::cos(month * 0.5 + i));
                prices << "M" << m + 1 << ",2013," << month << ",F" << i + 1 << "," << p << "\n";
            }
        }
    }
    write_text(dir / "prices.csv", prices.str());

    write_text(dir / "households.csv",
               "household_id,district_id,survey_year,survey_month,food_exp_day,total_exp_day,weight,cluster_id\n"
               "H1,D1,2013,3,1500,2500,1.5,EA1\n"
               "H2,D2,2013,5,900,1200,2,EA1\n"
               "H3,D3,2013,6,2000,3000,1,EA2\n"
               "H4,D3,2013,9,800,1000,0.5,EA2\n");
    write_text(dir / "members.csv", "household_id,person_id,age_months,sex,lactating,meals_share\n"
                                    "H1,H1-1,300,F,0,1\n"
                                    "H1,H1-2,60,M,0,1\n"
                                    "H2,H2-1,400,M,0,1\n"
                                    "H3,H3-1,300,F,1,1\n"
                                    "H3,H3-2,18,F,0,1\n"
                                    "H3,H3-3,3,M,0,1\n"
                                    "H4,H4-1,18,M,0,1\n"
                                    "H4,H4-2,30,F,0,1\n");
    write_text(dir / "requirements.csv",
               "group_id,energy_kcal,min_protein,max_protein,min_iron,max_iron,min_vitamin_c,max_sodium\n"
               "Adult (F) 19-30 y,2100,46,180,18,45,75,2300\n"
               "Lactation (F) 19-30 y,2500,71,200,9,45,120,2300\n"
               "Adult (M) 31-50 y,2600,56,200,8,45,90,2300\n"
               "Child (M) 4-8 y,1500,19,100,10,40,25,1900\n"
               "Child (all) 1-2 y,1000,13,60,7,40,15,1500\n");
    write_text(dir / "ppp_annual.csv", "year,factor\n2013,200\n");
}

dietcost::Dataset toy_dataset() {
    auto dir = scratch_dir("toy");
    write_toy_dataset(dir);
    auto ds = dietcost::load_catalog(dir);
    fs::remove_all(dir);
    return ds;
}

int run(const std::string &command) {
    int status = std::system(command.c_str());
    if (status == -1 || !WIFEXITED(status)) {
        return -1;
    }
    return WEXITSTATUS(status);
}

std::optional<double> vertex_enumeration(std::span<const double> cost,
                                         std::span<const dietcost::lp::LinearRow> rows, double tol) {
    using dietcost::lp::Sense;
    const std::size_t n = cost.size();
    const std::size_t m = rows.size();
    // Constraint k < m is row k; k >= m is x_{k-m} >= 0.
    const std::size_t total = m + n;
    Eigen::MatrixXd G(total, n);
    Eigen::VectorXd h(total);
    G.setZero();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            G(i, j) = rows[i].coeffs[j];
        }
        h(i) = rows[i].rhs;
    }
    for (std::size_t j = 0; j < n; ++j) {
        G(m + j, j) = 1.0;
        h(m + j) = 0.0;
    }

    std::optional<double> best;
    std::vector<bool> pick(total, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(std::min(n, total)), true);
    do {
        Eigen::MatrixXd M(n, n);
        Eigen::VectorXd r(n);
        std::size_t k = 0;
        for (std::size_t c = 0; c < total; ++c) {
            if (pick[c]) {
                M.row(static_cast<long>(k)) = G.row(static_cast<long>(c));
                r(static_cast<long>(k)) = h(static_cast<long>(c));
                ++k;
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rank() < static_cast<long>(n)) {
            continue;
        }
        Eigen::VectorXd x = lu.solve(r);
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            ok = x(static_cast<long>(j)) >= -tol;
        }
        for (std::size_t i = 0; i < m && ok; ++i) {
            double lhs = G.row(static_cast<long>(i)).dot(x);
            double slack = tol * std::max(1.0, std::abs(rows[i].rhs));
            switch (rows[i].sense) {
            case Sense::greater_equal:
                ok = lhs >= rows[i].rhs - slack;
                break;
            case Sense::less_equal:
                ok = lhs <= rows[i].rhs + slack;
                break;
            case Sense::equal:
                ok = std::abs(lhs - rows[i].rhs) <= slack;
                break;
            }
        }
        if (!ok) {
            continue;
        }
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            c += cost[j] * x(static_cast<long>(j));
        }
        if (!best || c < *best) {
            best = c;
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return best;
}

Eigen::VectorXd equality_constrained_lsq(const Eigen::MatrixXd &A, const Eigen::VectorXd &b,
                                         const Eigen::MatrixXd &C, const Eigen::VectorXd &d) {
    const long n = A.cols();
    const long p = C.rows();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd R1 = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    Eigen::VectorXd y1 = R1.transpose().triangularView<Eigen::Lower>().solve(d);
    Eigen::MatrixXd Q1 = Q.leftCols(p);
    Eigen::MatrixXd Q2 = Q.rightCols(n - p);
    Eigen::VectorXd x0 = Q1 * y1;
    Eigen::VectorXd y2 = (A * Q2).colPivHouseholderQr().solve(b - A * x0);
    return x0 + Q2 * y2;
}

dietcost::DietProblem random_diet_problem(std::mt19937_64 &rng) {
    using namespace dietcost;
    std::uniform_int_distribution<int> n_items(1, 4);
    std::uniform_int_distribution<int> n_nutrients(0, 3);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const int n = n_items(rng);
    const int k = n_nutrients(rng);
    std::vector<NutrientDef> defs = {{"energy", "Energy", "kcal", BoundKind::equality}};
    const BoundKind kinds[] = {BoundKind::lower_only, BoundKind::upper_only, BoundKind::both};
    for (int j = 0; j < k; ++j) {
        defs.push_back({"n" + std::to_string(j), "n", "mg", kinds[kind(rng)]});
    }
    NutrientCatalog catalog(defs);

    std::vector<PricedFood> menu;
    for (int i = 0; i < n; ++i) {
        PricedFood f;
        f.item_id = "F" + std::to_string(i);
        f.price_per_kg = 50.0 + 3000.0 * u(rng);
        f.per_kg.push_back(300.0 + 8000.0 * u(rng));
        for (int j = 0; j < k; ++j) {
            f.per_kg.push_back(u(rng) < 0.25 ? 0.0 : 100.0 * u(rng));
        }
        menu.push_back(std::move(f));
    }

    const double energy = 1000.0 + 2000.0 * u(rng);
    DietBounds b;
    b.energy = energy;
    b.lower.assign(catalog.size(), std::nullopt);
    b.upper.assign(catalog.size(), std::nullopt);
    for (int j = 1; j <= k; ++j) {
        // Densities per kcal bracket the items' own so both verdicts occur.
        double lo = 1e300, hi = 0.0;
        for (const auto &f : menu) {
            double d = f.per_kg[j] / f.per_kg[0];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        double a = lo + (hi - lo) * (1.3 * u(rng) - 0.15);
        double c = a + (hi - lo) * 0.6 * u(rng);
        if (has_lower(catalog[j].bound_kind)) {
            b.lower[j] = std::max(0.0, a) * energy;
        }
        if (has_upper(catalog[j].bound_kind)) {
            b.upper[j] = std::max(0.0, has_lower(catalog[j].bound_kind) ? c : a) * energy;
        }
    }
    return *build_problem(b, catalog, menu);
}

std::vector<dietcost::MonthlySeries> pattern_panel(const PatternPanel &setup, std::mt19937_64 &rng) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<dietcost::MonthlySeries> out;
    const dietcost::YearMonth start{2008, 1};
    for (int i = 0; i < setup.units; ++i) {
        dietcost::MonthlySeries s;
        s.unit_id = "u" + std::to_string(i);
        s.cluster_id = "c" + std::to_string(i % std::max(2, setup.units / 2));
        const double level = 5.0 + u(rng);
        for (int t = 0; t < 12 * setup.years; ++t) {
            auto when = start.plus_months(t);
            bool eligible = setup.drop_months.empty() || setup.drop_months.contains(when.month);
            if (eligible && u(rng) < setup.drop_rate) {
                continue;
            }
            double y = level + setup.trend * t + setup.pattern[when.month - 1] + setup.noise_sd * z(rng);
            s.points.push_back({when, y});
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::array<double, 12> cosine_pattern(double lambda, double omega) {
    std::array<double, 12> p{};
    for (int m = 1; m <= 12; ++m) {
        p[m - 1] = lambda * std::cos(m * std::numbers::pi / 6.0 - omega);
    }
    return p;
}

double brute_weighted_median(std::span<const double> values, std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    std::optional<double> best;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double below = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] <= values[i]) {
                below += weights[j];
            }
        }
        if (below >= total / 2.0 && (!best || values[i] < *best)) {
            best = values[i];
        }
    }
    return best.value();
}

} // namespace testing
