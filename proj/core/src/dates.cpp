#include "logvol/dates.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace logvol {

namespace {

int parse_int(std::string_view s, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("invalid date component: ") + what);
    }
    return value;
}

}  // namespace

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw std::invalid_argument("date not in YYYY-MM-DD form: " + std::string(iso));
    }
    const int y = parse_int(iso.substr(0, 4), "year");
    const int m = parse_int(iso.substr(5, 2), "month");
    const int d = parse_int(iso.substr(8, 2), "day");

    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date: " + std::string(iso));
    }
    const std::chrono::sys_days sd{ymd};
    return Date{static_cast<std::int32_t>(sd.time_since_epoch().count())};
}

std::string Date::to_string() const {
    const std::chrono::sys_days sd{std::chrono::days{days}};
    const std::chrono::year_month_day ymd{sd};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

bool Date::is_weekend() const {
    const std::chrono::sys_days sd{std::chrono::days{days}};
    const std::chrono::weekday wd{sd};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::next_weekday() const {
    Date d{days + 1};
    while (d.is_weekend()) {
        ++d.days;
    }
    return d;
}

}  // namespace logvol
