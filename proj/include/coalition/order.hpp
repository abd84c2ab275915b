#pragma once

#include <compare>
#include <string>

namespace coalition {

enum class UnitKind { army, fleet };

enum class OrderType { hold, move, support_hold, support_move };

// One unit's order for a movement round. `dest` is set for move and
// support_move; `target` names the supported unit (by unit id) for the two
// support variants.
struct Order {
    OrderType type = OrderType::hold;
    std::string dest;
    std::string target;

    friend bool operator==(const Order&, const Order&) = default;
    friend auto operator<=>(const Order&, const Order&) = default;
};

inline Order make_hold() { return {}; }
inline Order make_move(std::string dest) { return {OrderType::move, std::move(dest), {}}; }
inline Order make_support_hold(std::string target) {
    return {OrderType::support_hold, {}, std::move(target)};
}
inline Order make_support_move(std::string target, std::string dest) {
    return {OrderType::support_move, std::move(dest), std::move(target)};
}

inline const char* kind_letter(UnitKind k) { return k == UnitKind::army ? "A" : "F"; }

} // namespace coalition
