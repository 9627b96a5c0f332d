#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dietcost {

/// Calendar month. Ordering and arithmetic go through a linear month index.
struct YearMonth {
    int year{2013};
    int month{1};

    constexpr int index() const noexcept { return year * 12 + (month - 1); }

    static constexpr YearMonth from_index(int idx) noexcept {
        return YearMonth{idx / 12, idx % 12 + 1};
    }

    constexpr YearMonth plus_months(int n) const noexcept { return from_index(index() + n); }

    constexpr bool valid() const noexcept { return month >= 1 && month <= 12; }

    friend constexpr bool operator==(const YearMonth &, const YearMonth &) = default;
    friend constexpr auto operator<=>(const YearMonth &a, const YearMonth &b) noexcept {
        return a.index() <=> b.index();
    }

    /// "YYYY-MM"
    std::string to_string() const;

    /// Parses "YYYY-MM" or "YYYY-M". Throws std::invalid_argument.
    static YearMonth parse(std::string_view text);
};

/// Inclusive number of months from `start` to `end`; 0 when end < start.
constexpr int months_between(YearMonth start, YearMonth end) noexcept {
    return end.index() < start.index() ? 0 : end.index() - start.index() + 1;
}

} // namespace dietcost
