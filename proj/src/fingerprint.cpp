#include "demandcast/fingerprint.hpp"

#include <cstdio>
#include <cstring>

namespace demandcast {

void Fingerprint::update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
}

void Fingerprint::update(double value) noexcept {
    char raw[sizeof value];
    std::memcpy(raw, &value, sizeof value);
    update(std::string_view(raw, sizeof raw));
}

std::string Fingerprint::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

std::string fingerprint(std::string_view bytes) {
    Fingerprint f;
    f.update(bytes);
    return f.hex();
}

std::string fingerprint(const SalesTable& table) {
    Fingerprint f;
    for (const auto& r : table.records()) {
        f.update(r.date.iso());
        f.update(r.key.store);
        f.update("\x1f");
        f.update(r.key.item);
        f.update(r.quantity);
        f.update(r.imputed ? "1" : "0");
        for (double e : r.extras) f.update(e);
    }
    return f.hex();
}

} // namespace demandcast
