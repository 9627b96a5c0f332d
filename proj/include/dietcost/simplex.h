#pragma once

#include <span>
#include <string>
#include <vector>

namespace dietcost::lp {

enum class Sense { greater_equal, less_equal, equal };

struct LinearRow {
    std::string name;
    Sense sense{Sense::greater_equal};
    double rhs{};
    std::vector<double> coeffs;
};

enum class LpStatus { optimal, infeasible, numerical_failure };

std::string_view to_string(LpStatus status) noexcept;

struct SolverOptions {
    /// Absolute feasibility tolerance on row-scaled constraints.
    double feasibility_tol{1e-8};
    /// Reduced-cost threshold for optimality, on the scaled objective.
    double optimality_tol{1e-9};
    /// Smallest admissible pivot element.
    double pivot_tol{1e-10};
    /// Pivots with Dantzig pricing before switching to Bland's rule.
    int bland_after{200};
    int max_iterations{20000};
    /// Scale every row by its right-hand side magnitude.
    bool row_scaling{true};
    /// Relative residual above which an "optimal" answer is rejected.
    double acceptance_tol{1e-6};
};

struct LpResult {
    LpStatus status{LpStatus::numerical_failure};
    std::vector<double> x;
    double objective{};
    /// Shadow price per row, original units: >= 0 on >= rows, <= 0 on <= rows.
    std::vector<double> duals;
    /// Phase-1 optimum in scaled units; positive when infeasible.
    double phase1_objective{};
    /// For infeasible problems: y with y'b > 0, A'y <= 0 and row-sense signs.
    std::vector<double> farkas;
    int iterations{};
    bool bland_engaged{false};
    std::string diagnostic;
};

/// Minimizes cost'x subject to `rows` and x >= 0 with a dense two-phase
/// simplex. Dantzig pricing switches to Bland's rule after
/// `bland_after` pivots, which guarantees termination. Deterministic for a
/// fixed input. Throws std::logic_error if the objective is unbounded below,
/// which cannot happen with nonnegative costs.
LpResult solve_lp(std::span<const double> cost, std::span<const LinearRow> rows,
                  const SolverOptions &options = {});

} // namespace dietcost::lp
