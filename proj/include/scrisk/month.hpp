#pragma once

#include <compare>
#include <string>

namespace scrisk {

// Calendar month at year+month granularity, stored as months since year 0.
// All dataset dates use this resolution.
struct Month {
    int index = 0;

    Month() = default;
    Month(int year, int month);

    static Month parse(const std::string& text);  // "YYYY-MM"
    std::string str() const;

    int year() const { return index / 12; }
    int month() const { return index % 12 + 1; }

    Month plus(int months) const { Month m; m.index = index + months; return m; }

    auto operator<=>(const Month&) const = default;
};

// Half-open month interval [start, end).
struct MonthWindow {
    Month start;
    Month end;

    bool contains(Month m) const { return start <= m && m < end; }
    int length() const { return end.index - start.index; }
};

}  // namespace scrisk
