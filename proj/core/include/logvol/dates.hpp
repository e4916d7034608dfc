#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace logvol {

// Calendar date stored as days since 1970-01-01. Comparable, hashable via
// the raw count, and cheap to keep in sorted vectors.
struct Date {
    std::int32_t days = 0;

    // Parses strict ISO-8601 "YYYY-MM-DD". Throws std::invalid_argument on
    // malformed input or an invalid calendar date.
    static Date parse(std::string_view iso);

    std::string to_string() const;

    Date next_weekday() const;
    bool is_weekend() const;

    auto operator<=>(const Date&) const = default;
};

}  // namespace logvol
