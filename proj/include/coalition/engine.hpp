#pragma once

#include <map>
#include <string>
#include <vector>

#include "coalition/map.hpp"
#include "coalition/state.hpp"

namespace coalition {

// Starting position: units from the map's start list (ids "<POWER>.<n>" in
// declaration order), supply centers owned by their initial occupants.
GameState initial_state(const MapGraph& map);

// Canonical notation, e.g. "A PAR H", "A PAR - BUR", "F ION S F EAS",
// "F ION S A APU - ALB". Support targets are rendered by their current
// kind and province.
std::string format_order(const GameState& state, const std::string& unit_id, const Order& order);

// Sort key for deterministic order enumeration and tie-breaking: holds first,
// then moves, then support-holds, then support-moves, each tier ordered by
// notation text.
std::string order_sort_key(const GameState& state, const std::string& unit_id, const Order& order);

// Inverse of format_order for a known unit. Throws ParseError when the text
// does not denote a well-formed order for that unit at this state.
Order parse_order(const GameState& state, const std::string& unit_id, const std::string& text);

bool is_legal_order(const MapGraph& map, const GameState& state, const std::string& unit_id,
                    const Order& order);

// Every legal order for the unit, sorted by order_sort_key. Hold is always
// present. Throws ValidationError for unknown units.
std::vector<Order> legal_orders(const MapGraph& map, const GameState& state,
                                const std::string& unit_id);

// Simultaneous resolution of one movement round. Rule subset:
//   - strength = 1 + valid uncut supports; a support is valid when the
//     supported unit actually ordered the supported action (a support-hold is
//     void if its target ordered any move), and is cut by any move against the
//     supporting unit from a province other than the one the support is
//     directed into, regardless of the attacker's power or success;
//   - a move succeeds only if its strength strictly exceeds every competing
//     move into the same province and, when the destination stays occupied,
//     the defender's strength: hold strength for stationary units, 1 for a
//     unit whose own move bounced, and in a head-to-head swap always the
//     counter-move's full strength;
//   - a power never dislodges its own unit, and supports given by the
//     defender's power do not count toward the dislodgement comparison;
//   - equal-strength contests bounce everyone; dislodged units are removed
//     (no retreats); move cycles of length >= 3 rotate.
// Afterwards the round counter increments and each occupied supply center
// passes to its occupant (unoccupied centers keep their previous owner).
GameState adjudicate(const MapGraph& map, const GameState& state, const JointAction& joint);

// Supply-center share per power, in [0,1], summing to at most 1.
std::map<std::string, double> reward(const MapGraph& map, const GameState& state);

} // namespace coalition
