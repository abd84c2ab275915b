#include "coalition/graph.hpp"

#include <algorithm>
#include <cstdio>

#include "coalition/errors.hpp"

namespace coalition {

Agreement flipped(const Agreement& a) {
    Agreement out = a;
    std::swap(out.power_i, out.power_j);
    std::swap(out.u1, out.u2);
    std::swap(out.a1, out.a2);
    return out;
}

std::string CoalitionEdge::key() const {
    char round_buf[16];
    std::snprintf(round_buf, sizeof round_buf, "%08d", agreement.round);
    return agreement.power_i + "|" + agreement.power_j + "|" + round_buf + "|" + agreement.u1 +
           "|" + a1_text + "|" + agreement.u2 + "|" + a2_text;
}

std::vector<CoalitionEdge> CoalitionStructure::edges_between(const std::string& a,
                                                             const std::string& b) const {
    const std::string& lo = std::min(a, b);
    const std::string& hi = std::max(a, b);
    std::vector<CoalitionEdge> out;
    for (const auto& e : edges_)
        if (e.agreement.power_i == lo && e.agreement.power_j == hi) out.push_back(e);
    return out;
}

CoalitionStructure add_agreement(const MapGraph& map, const GameState& round_state,
                                 CoalitionStructure s, Agreement a) {
    if (a.power_i == a.power_j)
        throw ValidationError("agreement: both sides are '" + a.power_i + "'");
    if (a.round != round_state.round)
        throw ValidationError("agreement: round " + std::to_string(a.round) +
                              " does not match the provided state (round " +
                              std::to_string(round_state.round) + ")");
    if (a.power_j < a.power_i) a = flipped(a);

    for (const auto& [unit, power] : {std::pair{a.u1, a.power_i}, std::pair{a.u2, a.power_j}}) {
        auto it = round_state.units.find(unit);
        if (it == round_state.units.end())
            throw ValidationError("agreement: no unit '" + unit + "' in the round's state");
        if (it->second.power != power)
            throw ValidationError("agreement: unit '" + unit + "' is not owned by '" + power +
                                  "'");
    }
    if (!is_legal_order(map, round_state, a.u1, a.a1))
        throw ValidationError("agreement: order '" + format_order(round_state, a.u1, a.a1) +
                              "' is illegal for '" + a.u1 + "'");
    if (!is_legal_order(map, round_state, a.u2, a.a2))
        throw ValidationError("agreement: order '" + format_order(round_state, a.u2, a.a2) +
                              "' is illegal for '" + a.u2 + "'");

    CoalitionEdge edge;
    edge.agreement = a;
    edge.a1_text = format_order(round_state, a.u1, a.a1);
    edge.a2_text = format_order(round_state, a.u2, a.a2);

    s.players_.insert(a.power_i);
    s.players_.insert(a.power_j);
    auto pos = std::lower_bound(s.edges_.begin(), s.edges_.end(), edge,
                                [](const CoalitionEdge& x, const CoalitionEdge& y) {
                                    return x.key() < y.key();
                                });
    if (pos != s.edges_.end() && pos->key() == edge.key()) return s; // identical duplicate
    s.edges_.insert(pos, std::move(edge));
    return s;
}

HonorFlags honored(const Agreement& a, const JointAction& joint) {
    HonorFlags out;
    auto side = [&](const std::string& unit, const Order& agreed, bool& honored_side,
                    bool& missing_side) {
        auto it = joint.orders.find(unit);
        if (it == joint.orders.end()) {
            missing_side = true;
            honored_side = false;
            return;
        }
        honored_side = it->second == agreed;
    };
    side(a.u1, a.a1, out.honored_i, out.missing_i);
    side(a.u2, a.a2, out.honored_j, out.missing_j);
    return out;
}

CoalitionStructure set_weight(CoalitionStructure s, const Agreement& edge, double w) {
    if (!(w >= 0.0 && w <= 1.0))
        throw ValidationError("set_weight: weight " + std::to_string(w) + " outside [0,1]");
    Agreement want = edge.power_j < edge.power_i ? flipped(edge) : edge;
    for (auto& e : s.edges_) {
        if (e.agreement == want) {
            e.weight = w;
            e.weighted = true;
            return s;
        }
    }
    throw ValidationError("set_weight: no such edge between '" + want.power_i + "' and '" +
                          want.power_j + "'");
}

std::string export_dot(const CoalitionStructure& s) {
    std::string out = "graph coalition {\n";
    for (const auto& p : s.players()) out += "  \"" + p + "\";\n";
    // edges_ is already key-sorted
    for (const auto& e : s.edges()) {
        char wt[32];
        std::snprintf(wt, sizeof wt, "%.2f", e.weight);
        out += "  \"" + e.agreement.power_i + "\" -- \"" + e.agreement.power_j + "\" [label=\"" +
               e.agreement.u1 + ":" + e.a1_text + " | " + e.agreement.u2 + ":" + e.a2_text +
               " | wt=" + wt + "\"];\n";
    }
    out += "}\n";
    return out;
}

} // namespace coalition
