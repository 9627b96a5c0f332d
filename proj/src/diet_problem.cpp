#include "dietcost/diet_problem.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dietcost {

DietBounds bounds_of(const RequirementRow &row) {
    return DietBounds{row.min_need, row.max_tolerance, row.energy_kcal};
}

std::string_view to_string(DietStatus status) noexcept {
    switch (status) {
    case DietStatus::optimal:
        return "optimal";
    case DietStatus::infeasible:
        return "infeasible";
    case DietStatus::numerical_failure:
        return "numerical_failure";
    }
    return "numerical_failure";
}

std::optional<DietProblem> build_problem(const DietBounds &bounds, const NutrientCatalog &catalog,
                                         std::span<const PricedFood> menu) {
    if (menu.empty()) {
        return std::nullopt;
    }
    if (!(bounds.energy > 0.0)) {
        throw std::invalid_argument("diet problem needs a positive energy target");
    }
    DietProblem p;
    for (const auto &f : menu) {
        if (!(f.price_per_kg > 0.0)) {
            throw std::invalid_argument("menu item '" + f.item_id + "' has a nonpositive price");
        }
        p.item_ids.push_back(f.item_id);
        p.prices.push_back(f.price_per_kg);
    }
    auto column = [&](std::size_t j) {
        std::vector<double> coeffs;
        coeffs.reserve(menu.size());
        for (const auto &f : menu) {
            coeffs.push_back(f.per_kg[j]);
        }
        return coeffs;
    };
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        if (has_lower(catalog[j].bound_kind)) {
            p.rows.push_back({"min_" + catalog[j].id, lp::Sense::greater_equal,
                              bounds.lower.at(j).value(), column(j)});
        }
    }
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        if (has_upper(catalog[j].bound_kind)) {
            p.rows.push_back({"max_" + catalog[j].id, lp::Sense::less_equal,
                              bounds.upper.at(j).value(), column(j)});
        }
    }
    const auto e = catalog.energy_index();
    p.rows.push_back({catalog[e].id, lp::Sense::equal, bounds.energy, column(e)});
    return p;
}

std::optional<DietProblem> build_problem(const DietBounds &bounds, std::span<const MenuEntry> menu,
                                         const Dataset &dataset) {
    std::vector<PricedFood> foods;
    foods.reserve(menu.size());
    for (const auto &entry : menu) {
        const auto &f = dataset.foods[entry.item];
        foods.push_back({f.item_id, entry.price_per_kg, f.per_kg});
    }
    return build_problem(bounds, dataset.catalog, foods);
}

DietSolution solve(const DietProblem &problem, const lp::SolverOptions &options) {
    auto r = lp::solve_lp(problem.prices, problem.rows, options);
    DietSolution s;
    switch (r.status) {
    case lp::LpStatus::optimal:
        s.status = DietStatus::optimal;
        break;
    case lp::LpStatus::infeasible:
        s.status = DietStatus::infeasible;
        break;
    case lp::LpStatus::numerical_failure:
        s.status = DietStatus::numerical_failure;
        break;
    }
    s.quantities = std::move(r.x);
    s.cost = r.objective;
    s.duals = std::move(r.duals);
    s.phase1_objective = r.phase1_objective;
    s.farkas = std::move(r.farkas);
    s.iterations = r.iterations;
    s.diagnostic = std::move(r.diagnostic);
    return s;
}

CertificateReport verify(const DietProblem &problem, std::span<const double> q,
                         std::span<const double> y) {
    const std::size_t n = problem.prices.size();
    const std::size_t m = problem.rows.size();
    if (q.size() != n || y.size() != m) {
        throw std::invalid_argument("solution does not match the problem dimensions");
    }
    CertificateReport rep;
    double primal_cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        primal_cost += problem.prices[j] * q[j];
        rep.max_primal_violation = std::max(rep.max_primal_violation, std::max(0.0, -q[j]));
    }
    const double cost_scale = std::max(1.0, std::abs(primal_cost));

    std::vector<double> reduced(problem.prices.begin(), problem.prices.end());
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto &row = problem.rows[i];
        double activity = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            activity += row.coeffs[j] * q[j];
            reduced[j] -= row.coeffs[j] * y[i];
        }
        const double slack = activity - row.rhs;
        const double rel = 1.0 / std::max(1.0, std::abs(row.rhs));
        switch (row.sense) {
        case lp::Sense::greater_equal:
            rep.max_primal_violation = std::max(rep.max_primal_violation, std::max(0.0, -slack) * rel);
            rep.max_dual_violation = std::max(rep.max_dual_violation, std::max(0.0, -y[i]) / cost_scale);
            break;
        case lp::Sense::less_equal:
            rep.max_primal_violation = std::max(rep.max_primal_violation, std::max(0.0, slack) * rel);
            rep.max_dual_violation = std::max(rep.max_dual_violation, std::max(0.0, y[i]) / cost_scale);
            break;
        case lp::Sense::equal:
            rep.max_primal_violation = std::max(rep.max_primal_violation, std::abs(slack) * rel);
            break;
        }
        if (row.sense != lp::Sense::equal) {
            rep.max_complementarity =
                std::max(rep.max_complementarity, std::abs(y[i] * slack) / cost_scale);
        }
        dual_obj += row.rhs * y[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double scale = std::max(1.0, problem.prices[j]);
        rep.max_dual_violation = std::max(rep.max_dual_violation, std::max(0.0, -reduced[j]) / scale);
        rep.max_complementarity =
            std::max(rep.max_complementarity, std::abs(q[j] * reduced[j]) / cost_scale);
    }
    rep.dual_objective = dual_obj;
    rep.duality_gap = std::abs(primal_cost - dual_obj) / cost_scale;
    return rep;
}

double verify_farkas(const DietProblem &problem, std::span<const double> y, double tol) {
    const std::size_t n = problem.prices.size();
    if (y.size() != problem.rows.size()) {
        return -1.0;
    }
    double norm = 0.0, yb = 0.0;
    std::vector<double> aty(n, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto &row = problem.rows[i];
        // Compare in row-scaled units so rows of different magnitude are comparable.
        const double s = std::max(1.0, std::abs(row.rhs));
        const double yi = y[i] * s;
        if ((row.sense == lp::Sense::greater_equal && yi < -tol) ||
            (row.sense == lp::Sense::less_equal && yi > tol)) {
            return -1.0;
        }
        norm += std::abs(yi);
        yb += y[i] * row.rhs;
        for (std::size_t j = 0; j < n; ++j) {
            aty[j] += row.coeffs[j] * y[i];
        }
    }
    if (norm == 0.0) {
        return -1.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double colmax = 0.0;
        for (const auto &row : problem.rows) {
            colmax = std::max(colmax, std::abs(row.coeffs[j]) / std::max(1.0, std::abs(row.rhs)));
        }
        if (aty[j] > tol * std::max(1.0, colmax) * norm) {
            return -1.0;
        }
    }
    return yb / norm;
}

DietSolution solve_certified(const DietProblem &problem, const lp::SolverOptions &options,
                             double certificate_tol) {
    auto first = solve(problem, options);
    if (first.status == DietStatus::optimal && verify(problem, first).passed(certificate_tol)) {
        return first;
    }
    if (first.status == DietStatus::infeasible) {
        return first;
    }
    auto tight = options;
    tight.bland_after = 0;
    tight.pivot_tol = options.pivot_tol * 1e-2;
    tight.feasibility_tol = options.feasibility_tol * 1e-1;
    auto second = solve(problem, tight);
    if (second.status == DietStatus::optimal && !verify(problem, second).passed(certificate_tol)) {
        second.status = DietStatus::numerical_failure;
        second.diagnostic = "certificate failed after re-solve";
    }
    return second;
}

void dump_lp(const DietProblem &p, std::ostream &out) {
    auto term = [&](double coef, std::size_t j, bool first) {
        if (coef == 0.0) {
            return false;
        }
        if (!first || coef < 0.0) {
            out << (coef < 0.0 ? " - " : " + ");
        }
        out << std::abs(coef) << ' ' << p.item_ids[j];
        return true;
    };
    out.precision(17);
    out << "Minimize\n obj:";
    bool first = true;
    for (std::size_t j = 0; j < p.prices.size(); ++j) {
        out << (first ? " " : "");
        if (term(p.prices[j], j, first)) {
            first = false;
        }
    }
    out << "\nSubject To\n";
    for (const auto &row : p.rows) {
        out << ' ' << row.name << ':';
        bool f = true;
        for (std::size_t j = 0; j < row.coeffs.size(); ++j) {
            out << (f ? " " : "");
            if (term(row.coeffs[j], j, f)) {
                f = false;
            }
        }
        if (f) {
            out << " 0 " << p.item_ids.front();
        }
        switch (row.sense) {
        case lp::Sense::greater_equal:
            out << " >= ";
            break;
        case lp::Sense::less_equal:
            out << " <= ";
            break;
        case lp::Sense::equal:
            out << " = ";
            break;
        }
        out << row.rhs << '\n';
    }
    out << "End\n";
}

} // namespace dietcost
