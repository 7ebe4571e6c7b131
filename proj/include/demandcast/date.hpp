#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace demandcast {

/// Proleptic Gregorian calendar day, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, int month, int day);

    /// Accepts `YYYY-MM-DD`, optionally followed by `T` or a space and a
    /// time-of-day suffix, which is ignored.
    static std::optional<Date> parse(std::string_view text);
    static Date parse_or_throw(std::string_view text);

    constexpr std::int32_t days() const noexcept { return days_; }

    int year() const noexcept;
    int month() const noexcept;  // 1..12
    int day() const noexcept;    // 1..31

    /// 0 = Monday ... 6 = Sunday.
    constexpr int weekday() const noexcept {
        // 1970-01-01 was a Thursday (index 3).
        const int w = (days_ + 3) % 7;
        return w < 0 ? w + 7 : w;
    }

    std::string iso() const;

    constexpr Date operator+(std::int32_t n) const noexcept { return Date(days_ + n); }
    constexpr Date operator-(std::int32_t n) const noexcept { return Date(days_ - n); }
    constexpr std::int32_t operator-(Date other) const noexcept { return days_ - other.days_; }
    constexpr Date& operator++() noexcept { ++days_; return *this; }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

bool is_valid_ymd(int year, int month, int day) noexcept;

} // namespace demandcast
