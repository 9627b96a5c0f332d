#pragma once

#include "dietcost/year_month.h"

#include <map>
#include <optional>
#include <vector>

namespace dietcost {

/// Monthly currency/PPP conversion factors over whole calendar years.
struct PpFactorSeries {
    YearMonth start;
    std::vector<double> factors;

    std::optional<double> factor(YearMonth when) const;
    YearMonth end() const { return start.plus_months(static_cast<int>(factors.size()) - 1); }
};

/// Denton benchmarking of annual levels onto months: minimizes
///   sum_t ((x_t - x_{t-1}) / A_{y(t-1)})^2
/// subject to each year's twelve months averaging to its annual factor A_y.
/// Dividing by the annual level makes the penalty a first-order
/// approximation of the squared proportional change (x_t / x_{t-1} - 1)^2,
/// which keeps the problem a linear KKT solve.
/// Requires contiguous years and positive factors (std::invalid_argument).
PpFactorSeries denton_monthly_factors(const std::map<int, double> &annual);

/// Sum over consecutive months of (x_t / x_{t-1} - 1)^2.
double proportional_roughness(const std::vector<double> &series);

/// Declares whether factors are local currency per PPP dollar (divide) or
/// PPP dollars per local currency unit (multiply).
enum class PppOrientation { lcu_per_ppp, ppp_per_lcu };

double to_ppp(double nominal, double factor, PppOrientation orientation) noexcept;

} // namespace dietcost
