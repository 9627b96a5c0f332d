#pragma once

#include "dietcost/data_io.h"
#include "dietcost/diet_problem.h"
#include "dietcost/seasonality.h"
#include "dietcost/simplex.h"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace testing {

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string &name);

void write_text(const std::filesystem::path &path, const std::string &text);
std::string read_text(const std::filesystem::path &path);

/// 2 markets, 5 items, 4 households over 2013; market M2 has no prices in
/// 2013-06. Catalog: energy, protein, iron, vitamin_c, sodium.
void write_toy_dataset(const std::filesystem::path &dir);
dietcost::Dataset toy_dataset();

/// Exit status of a shell command.
int run(const std::string &command);

/// Minimum cost over all basic feasible points of {rows, x >= 0}, found by
/// trying every choice of n tight constraints. nullopt when none is feasible.
std::optional<double> vertex_enumeration(std::span<const double> cost,
                                         std::span<const dietcost::lp::LinearRow> rows,
                                         double tol = 1e-9);

/// argmin |A x - b|^2 subject to C x = d, by the null-space method.
Eigen::VectorXd equality_constrained_lsq(const Eigen::MatrixXd &A, const Eigen::VectorXd &b,
                                         const Eigen::MatrixXd &C, const Eigen::VectorXd &d);

/// Diet LP with up to 4 items, up to 3 nutrients of random bound kinds and
/// an energy equality. Roughly a third of draws are infeasible.
dietcost::DietProblem random_diet_problem(std::mt19937_64 &rng);

struct PatternPanel {
    int units{20};
    int years{10};
    /// Seasonal component of month m (1-12), in log points.
    std::array<double, 12> pattern{};
    double trend{0.004};
    double noise_sd{0.0};
    /// Share of unit-months dropped at random.
    double drop_rate{0.0};
    /// When non-empty, drops fall only in these months.
    std::set<int> drop_months;
};

/// Log series y = trend * t + unit level + pattern[m] + noise, from 2008-01.
std::vector<dietcost::MonthlySeries> pattern_panel(const PatternPanel &setup, std::mt19937_64 &rng);

std::array<double, 12> cosine_pattern(double lambda, double omega);

/// Smallest v_i with sum_{j : v_j <= v_i} w_j >= total / 2.
double brute_weighted_median(std::span<const double> values, std::span<const double> weights);

} // namespace testing
