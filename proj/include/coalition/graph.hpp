#pragma once

#include <set>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/map.hpp"
#include "coalition/state.hpp"

namespace coalition {

// A bilateral pact: u1 (of power_i) plays a1 while u2 (of power_j) plays a2,
// agreed for one specific round. Orientation is presentational; the mirrored
// agreement denotes the same pact.
struct Agreement {
    std::string power_i, power_j;
    std::string u1, u2;
    Order a1, a2;
    int round = 0;

    friend bool operator==(const Agreement&, const Agreement&) = default;
};

// The same agreement seen from the other side.
Agreement flipped(const Agreement& a);

// One parallel edge of the coalition multigraph. Order texts are fixed in
// canonical notation when the edge is added, so rendering never needs the
// round's state again.
struct CoalitionEdge {
    Agreement agreement; // normalized: power_i < power_j
    std::string a1_text, a2_text;
    double weight = 0.0;
    bool weighted = false;

    // Deterministic identity and sort key.
    std::string key() const;
};

struct HonorFlags {
    bool honored_i = false, honored_j = false;
    // Set when the corresponding unit is absent from the joint action
    // (disbanded before the round); that side counts as not honored.
    bool missing_i = false, missing_j = false;
};

// Undirected multigraph of agreements between powers. Value semantics:
// mutating operations return new structures.
class CoalitionStructure {
public:
    CoalitionStructure() = default;
    explicit CoalitionStructure(std::set<std::string> players) : players_(std::move(players)) {}

    const std::set<std::string>& players() const { return players_; }
    const std::vector<CoalitionEdge>& edges() const { return edges_; }

    // Edges between two powers, orientation-insensitive.
    std::vector<CoalitionEdge> edges_between(const std::string& a, const std::string& b) const;

    friend CoalitionStructure add_agreement(const MapGraph& map, const GameState& round_state,
                                            CoalitionStructure s, Agreement a);
    friend CoalitionStructure set_weight(CoalitionStructure s, const Agreement& edge, double w);

private:
    std::set<std::string> players_;
    std::vector<CoalitionEdge> edges_; // sorted by key, duplicates collapsed
};

// Validates the agreement against the state of its round (ownership, order
// legality, distinct powers, matching round) and returns the structure with
// the edge added. Byte-identical duplicates collapse; the mirrored agreement
// is recognized as the same edge.
CoalitionStructure add_agreement(const MapGraph& map, const GameState& round_state,
                                 CoalitionStructure s, Agreement a);

// Whether each side's unit was ordered exactly its agreed order.
HonorFlags honored(const Agreement& a, const JointAction& joint);

// Stores a weight in [0,1] on an existing edge (either orientation).
CoalitionStructure set_weight(CoalitionStructure s, const Agreement& edge, double w);

// Graphviz text: one node statement per player, one edge line per agreement
// labeled "u1:a1 | u2:a2 | wt=<2 decimals>", everything sorted.
std::string export_dot(const CoalitionStructure& s);

} // namespace coalition
