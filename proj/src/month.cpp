#include "scrisk/month.hpp"

#include <cstdio>

#include "scrisk/error.hpp"

namespace scrisk {

Month::Month(int year, int month) {
    require(month >= 1 && month <= 12, "month out of range: " + std::to_string(month));
    index = year * 12 + (month - 1);
}

Month Month::parse(const std::string& text) {
    if (text.size() != 7 || text[4] != '-') {
        throw ValidationError("bad month '" + text + "', expected YYYY-MM");
    }
    for (int i : {0, 1, 2, 3, 5, 6}) {
        if (text[i] < '0' || text[i] > '9') {
            throw ValidationError("bad month '" + text + "', expected YYYY-MM");
        }
    }
    int year = std::stoi(text.substr(0, 4));
    int month = std::stoi(text.substr(5, 2));
    require(month >= 1 && month <= 12, "bad month '" + text + "': month out of range");
    return Month(year, month);
}

std::string Month::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year(), month());
    return buf;
}

}  // namespace scrisk
