#pragma once

#include <map>
#include <string>

#include "coalition/order.hpp"

namespace coalition {

struct UnitInfo {
    std::string power;
    UnitKind kind = UnitKind::army;
    std::string province;

    friend bool operator==(const UnitInfo&, const UnitInfo&) = default;
};

// Snapshot of the board: unit id -> unit, plus current owner of each owned
// supply center (unowned centers are simply absent).
struct GameState {
    int round = 0;
    std::map<std::string, UnitInfo> units;
    std::map<std::string, std::string> sc_ownership;

    friend bool operator==(const GameState&, const GameState&) = default;
};

// One order per unit id. Adjudication requires exactly one entry for every
// unit alive in the state.
struct JointAction {
    std::map<std::string, Order> orders;

    friend bool operator==(const JointAction&, const JointAction&) = default;
};

// Canonical serialization of the position (units + ownership, round excluded).
// Used as the key for tabular value storage.
std::string state_key(const GameState& state);

} // namespace coalition
