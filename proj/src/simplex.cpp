#include "dietcost/simplex.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dietcost::lp {

std::string_view to_string(LpStatus status) noexcept {
    switch (status) {
    case LpStatus::optimal:
        return "optimal";
    case LpStatus::infeasible:
        return "infeasible";
    case LpStatus::numerical_failure:
        return "numerical_failure";
    }
    return "numerical_failure";
}

namespace {

enum class ColumnKind { structural, slack, artificial };

/// Dense tableau with the reduced-cost row kept separately.
class Tableau {
  public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_{rows}, n_{cols}, a_((rows) * (cols + 1), 0.0), d_(cols + 1, 0.0), basis_(rows) {}

    double &at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
    double &rhs(std::size_t i) { return a_[i * (n_ + 1) + n_]; }
    double rhs(std::size_t i) const { return a_[i * (n_ + 1) + n_]; }
    double &reduced(std::size_t j) { return d_[j]; }
    /// Current objective value (the reduced row stores its negative).
    double objective() const { return -d_[n_]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t> &basis() { return basis_; }

    void pivot(std::size_t r, std::size_t q) {
        double *row_r = &a_[r * (n_ + 1)];
        const double inv = 1.0 / row_r[q];
        for (std::size_t j = 0; j <= n_; ++j) {
            row_r[j] *= inv;
        }
        row_r[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double *row_i = &a_[i * (n_ + 1)];
            const double f = row_i[q];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j <= n_; ++j) {
                row_i[j] -= f * row_r[j];
            }
            row_i[q] = 0.0;
        }
        const double f = d_[q];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= n_; ++j) {
                d_[j] -= f * row_r[j];
            }
            d_[q] = 0.0;
        }
        basis_[r] = q;
    }

    /// Sets the reduced-cost row for cost vector `c` given the current basis.
    void price(const std::vector<double> &c) {
        for (std::size_t j = 0; j < n_; ++j) {
            d_[j] = c[j];
        }
        d_[n_] = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = c[basis_[i]];
            if (cb == 0.0) {
                continue;
            }
            const double *row_i = &a_[i * (n_ + 1)];
            for (std::size_t j = 0; j <= n_; ++j) {
                d_[j] -= cb * row_i[j];
            }
        }
    }

  private:
    std::size_t m_, n_;
    std::vector<double> a_;
    std::vector<double> d_;
    std::vector<std::size_t> basis_;
};

enum class IterateResult { optimal, unbounded, iteration_limit };

struct Engine {
    Tableau &t;
    const std::vector<ColumnKind> &kinds;
    const SolverOptions &opt;
    int iterations{0};
    bool bland{false};

    bool can_enter(std::size_t j) const { return kinds[j] != ColumnKind::artificial; }

    IterateResult run() {
        std::vector<char> in_basis(t.cols(), 0);
        while (true) {
            if (iterations >= opt.max_iterations) {
                return IterateResult::iteration_limit;
            }
            if (!bland && iterations >= opt.bland_after) {
                bland = true;
            }
            std::fill(in_basis.begin(), in_basis.end(), 0);
            for (auto b : t.basis()) {
                in_basis[b] = 1;
            }
            // Entering column.
            std::size_t q = t.cols();
            double best = -opt.optimality_tol;
            for (std::size_t j = 0; j < t.cols(); ++j) {
                if (in_basis[j] || !can_enter(j)) {
                    continue;
                }
                const double dj = t.reduced(j);
                if (dj < best) {
                    q = j;
                    if (bland) {
                        break;
                    }
                    best = dj;
                }
            }
            if (q == t.cols()) {
                return IterateResult::optimal;
            }
            // Leaving row: minimum ratio, ties to the smallest basic index under
            // Bland, otherwise to the largest pivot element.
            std::size_t r = t.rows();
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < t.rows(); ++i) {
                const double a = t.at(i, q);
                if (a <= opt.pivot_tol) {
                    continue;
                }
                const double ratio = std::max(t.rhs(i), 0.0) / a;
                if (r == t.rows() || ratio < best_ratio - 1e-12 * std::max(1.0, best_ratio)) {
                    r = i;
                    best_ratio = ratio;
                } else if (ratio <= best_ratio + 1e-12 * std::max(1.0, best_ratio)) {
                    bool take = bland ? t.basis()[i] < t.basis()[r] : a > t.at(r, q);
                    if (take) {
                        r = i;
                        best_ratio = std::min(best_ratio, ratio);
                    }
                }
            }
            if (r == t.rows()) {
                return IterateResult::unbounded;
            }
            t.pivot(r, q);
            ++iterations;
        }
    }
};

} // namespace

LpResult solve_lp(std::span<const double> cost, std::span<const LinearRow> rows,
                  const SolverOptions &opt) {
    const std::size_t m = rows.size();
    const std::size_t n = cost.size();
    LpResult result;
    result.x.assign(n, 0.0);
    result.duals.assign(m, 0.0);

    // Row scaling and sign normalization so every rhs is >= 0.
    std::vector<double> scale(m, 1.0);
    std::vector<Sense> sense(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].coeffs.size() != n) {
            throw std::invalid_argument("row '" + rows[i].name + "' has the wrong number of coefficients");
        }
        double s = 1.0;
        if (opt.row_scaling) {
            double mag = std::abs(rows[i].rhs);
            if (mag == 0.0) {
                for (double a : rows[i].coeffs) {
                    mag = std::max(mag, std::abs(a));
                }
            }
            if (mag > 0.0) {
                s = 1.0 / mag;
            }
        }
        sense[i] = rows[i].sense;
        if (rows[i].rhs < 0.0) {
            s = -s;
            if (sense[i] == Sense::greater_equal) {
                sense[i] = Sense::less_equal;
            } else if (sense[i] == Sense::less_equal) {
                sense[i] = Sense::greater_equal;
            }
        }
        scale[i] = s;
    }
    double cost_scale = 0.0;
    for (double c : cost) {
        cost_scale = std::max(cost_scale, std::abs(c));
    }
    cost_scale = cost_scale > 0.0 ? 1.0 / cost_scale : 1.0;

    // Column layout: structural | slacks | artificials.
    std::vector<ColumnKind> kinds(n, ColumnKind::structural);
    std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
    for (std::size_t i = 0; i < m; ++i) {
        if (sense[i] != Sense::equal) {
            slack_col[i] = kinds.size();
            kinds.push_back(ColumnKind::slack);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (sense[i] != Sense::less_equal) {
            art_col[i] = kinds.size();
            kinds.push_back(ColumnKind::artificial);
        }
    }
    const std::size_t cols = kinds.size();
    Tableau t(m, cols);
    std::vector<std::size_t> initial_col(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            t.at(i, j) = rows[i].coeffs[j] * scale[i];
        }
        t.rhs(i) = rows[i].rhs * scale[i];
        if (slack_col[i] != SIZE_MAX) {
            t.at(i, slack_col[i]) = sense[i] == Sense::less_equal ? 1.0 : -1.0;
        }
        if (art_col[i] != SIZE_MAX) {
            t.at(i, art_col[i]) = 1.0;
        }
        initial_col[i] = sense[i] == Sense::less_equal ? slack_col[i] : art_col[i];
        t.basis()[i] = initial_col[i];
    }

    // Phase 1: minimize the sum of artificials.
    std::vector<double> c1(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        if (kinds[j] == ColumnKind::artificial) {
            c1[j] = 1.0;
        }
    }
    t.price(c1);
    Engine engine{t, kinds, opt};
    auto phase1 = engine.run();
    result.iterations = engine.iterations;
    result.bland_engaged = engine.bland;
    if (phase1 == IterateResult::iteration_limit) {
        result.diagnostic = "phase 1 iteration limit reached";
        return result;
    }
    if (phase1 == IterateResult::unbounded) {
        result.diagnostic = "phase 1 reported an unbounded ray";
        return result;
    }
    result.phase1_objective = std::max(t.objective(), 0.0);
    if (result.phase1_objective > opt.feasibility_tol) {
        result.status = LpStatus::infeasible;
        result.farkas.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t k = initial_col[i];
            const double y = c1[k] - t.reduced(k);
            result.farkas[i] = y * scale[i];
        }
        return result;
    }

    // Drive zero-level artificials out of the basis; rows with no eligible
    // pivot are redundant and keep their artificial at zero.
    for (std::size_t i = 0; i < m; ++i) {
        if (kinds[t.basis()[i]] != ColumnKind::artificial) {
            continue;
        }
        std::size_t q = cols;
        double best = opt.pivot_tol;
        for (std::size_t j = 0; j < cols; ++j) {
            if (kinds[j] == ColumnKind::artificial) {
                continue;
            }
            if (std::abs(t.at(i, j)) > best) {
                best = std::abs(t.at(i, j));
                q = j;
            }
        }
        if (q != cols) {
            t.pivot(i, q);
        }
    }

    // Phase 2.
    std::vector<double> c2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        c2[j] = cost[j] * cost_scale;
    }
    t.price(c2);
    auto phase2 = engine.run();
    result.iterations = engine.iterations;
    result.bland_engaged = engine.bland;
    if (phase2 == IterateResult::unbounded) {
        throw std::logic_error("diet LP reported an unbounded objective; costs must be nonnegative");
    }
    if (phase2 == IterateResult::iteration_limit) {
        result.diagnostic = "phase 2 iteration limit reached";
        return result;
    }

    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t b = t.basis()[i];
        if (b < n) {
            result.x[b] = std::max(t.rhs(i), 0.0);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = initial_col[i];
        const double y = c2[k] - t.reduced(k);
        result.duals[i] = y * scale[i] / cost_scale;
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        result.objective += cost[j] * result.x[j];
    }

    // Reject answers whose residuals on the original rows are too large.
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            ax += rows[i].coeffs[j] * result.x[j];
        }
        const double denom = std::max(1.0, std::abs(rows[i].rhs));
        double v = 0.0;
        switch (rows[i].sense) {
        case Sense::greater_equal:
            v = std::max(0.0, rows[i].rhs - ax);
            break;
        case Sense::less_equal:
            v = std::max(0.0, ax - rows[i].rhs);
            break;
        case Sense::equal:
            v = std::abs(ax - rows[i].rhs);
            break;
        }
        worst = std::max(worst, v / denom);
    }
    if (worst > opt.acceptance_tol) {
        result.diagnostic = "primal residual " + std::to_string(worst) + " exceeds acceptance tolerance";
        return result;
    }
    result.status = LpStatus::optimal;
    return result;
}

} // namespace dietcost::lp
