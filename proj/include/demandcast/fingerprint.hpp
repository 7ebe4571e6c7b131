#pragma once

#include "demandcast/sales_table.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace demandcast {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
class Fingerprint {
public:
    void update(std::string_view bytes) noexcept;
    void update(double value) noexcept;
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint(std::string_view bytes);
std::string fingerprint(const SalesTable& table);

} // namespace demandcast
