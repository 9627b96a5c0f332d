#pragma once

#include "dietcost/data_io.h"
#include "dietcost/simplex.h"

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dietcost {

/// Per-nutrient daily bounds (catalog order) plus the energy target.
struct DietBounds {
    std::vector<std::optional<double>> lower;
    std::vector<std::optional<double>> upper;
    double energy{};
};

DietBounds bounds_of(const RequirementRow &row);

/// Least-cost diet LP: minimize sum p_f q_f subject to nutrient rows
/// (lower-bounded nutrients as >=, upper-bounded as <=, energy as =) and q >= 0.
struct DietProblem {
    std::vector<std::string> item_ids;
    std::vector<double> prices;      // per kg
    std::vector<lp::LinearRow> rows; // >= rows, then <= rows, then the energy row
};

struct PricedFood {
    std::string item_id;
    double price_per_kg{};
    std::vector<double> per_kg; // catalog order
};

/// nullopt when the menu is empty (nothing priced: infeasible by vacancy).
/// Columns follow menu order.
std::optional<DietProblem> build_problem(const DietBounds &bounds, const NutrientCatalog &catalog,
                                         std::span<const PricedFood> menu);

std::optional<DietProblem> build_problem(const DietBounds &bounds, std::span<const MenuEntry> menu,
                                         const Dataset &dataset);

enum class DietStatus { optimal, infeasible, numerical_failure };

std::string_view to_string(DietStatus status) noexcept;

struct DietSolution {
    DietStatus status{DietStatus::numerical_failure};
    std::vector<double> quantities; // kg/day, aligned with item_ids
    double cost{};
    std::vector<double> duals;      // aligned with rows
    double phase1_objective{};
    std::vector<double> farkas;
    int iterations{};
    std::string diagnostic;
};

DietSolution solve(const DietProblem &problem, const lp::SolverOptions &options = {});

/// Independent optimality check recomputed from the problem data.
struct CertificateReport {
    double max_primal_violation{};  // relative to max(1, |rhs|)
    double max_dual_violation{};    // sign and reduced-cost violations, relative to max(1, price)
    double max_complementarity{};   // |y_i * slack_i| and |q_j * reduced_j|, relative to max(1, cost)
    double duality_gap{};           // |c'q - b'y| / max(1, |c'q|)
    double dual_objective{};

    bool passed(double tol) const noexcept {
        return max_primal_violation <= tol && max_dual_violation <= tol &&
               max_complementarity <= tol && duality_gap <= tol;
    }
};

CertificateReport verify(const DietProblem &problem, std::span<const double> quantities,
                         std::span<const double> duals);

inline CertificateReport verify(const DietProblem &problem, const DietSolution &solution) {
    return verify(problem, solution.quantities, solution.duals);
}

/// Checks a Farkas certificate: y'b > 0, A'y <= 0, sign conditions.
/// Returns y'b normalized by |y|_1 (positive means a valid certificate).
double verify_farkas(const DietProblem &problem, std::span<const double> farkas, double tol = 1e-7);

/// Solves, verifies, and re-solves once with tighter tolerances and Bland's
/// rule from the first pivot if the certificate fails.
DietSolution solve_certified(const DietProblem &problem, const lp::SolverOptions &options = {},
                             double certificate_tol = 1e-6);

/// Plain-text LP dump (CPLEX LP-like) for cross-checking with other solvers.
void dump_lp(const DietProblem &problem, std::ostream &out);

} // namespace dietcost
