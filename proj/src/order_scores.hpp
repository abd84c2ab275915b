#pragma once

// Internal: heuristic per-order scoring shared by the intent backend and the
// equilibrium proposal policy. Not installed.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coalition/intent.hpp"

namespace coalition::detail {

// Softmax support over the unit's legal orders from the heuristic features
// (supply-center gain, adjacency safety, support coherence); orders touching
// a province in `mentioned` get the mention boost.
std::vector<std::pair<Order, double>> heuristic_support(const MapGraph& map,
                                                        const GameState& state,
                                                        const std::string& power,
                                                        const std::string& unit,
                                                        const HeuristicParams& params,
                                                        const std::set<std::string>& mentioned);

} // namespace coalition::detail
