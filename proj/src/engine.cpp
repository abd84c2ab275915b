#include "coalition/engine.hpp"

#include <algorithm>
#include <sstream>

#include "coalition/errors.hpp"

namespace coalition {

GameState initial_state(const MapGraph& map) {
    GameState state;
    std::map<std::string, int> counter;
    for (const auto& su : map.start_units) {
        int n = ++counter[su.power];
        std::string id = su.power + "." + std::to_string(n);
        state.units[id] = UnitInfo{su.power, su.kind, su.province};
        if (map.provinces.at(su.province).supply_center)
            state.sc_ownership[su.province] = su.power;
    }
    return state;
}

std::string state_key(const GameState& state) {
    std::ostringstream out;
    for (const auto& [id, u] : state.units)
        out << id << ':' << kind_letter(u.kind) << ':' << u.province << ';';
    out << '|';
    for (const auto& [prov, power] : state.sc_ownership) out << prov << ':' << power << ';';
    return out.str();
}

namespace {

const UnitInfo& unit_at(const GameState& state, const std::string& unit_id, const char* op) {
    auto it = state.units.find(unit_id);
    if (it == state.units.end())
        throw ValidationError(std::string(op) + ": unknown unit '" + unit_id + "'");
    return it->second;
}

} // namespace

std::string format_order(const GameState& state, const std::string& unit_id, const Order& order) {
    const UnitInfo& u = unit_at(state, unit_id, "format_order");
    std::string head = std::string(kind_letter(u.kind)) + " " + u.province;
    switch (order.type) {
    case OrderType::hold:
        return head + " H";
    case OrderType::move:
        return head + " - " + order.dest;
    case OrderType::support_hold: {
        const UnitInfo& t = unit_at(state, order.target, "format_order");
        return head + " S " + kind_letter(t.kind) + " " + t.province;
    }
    case OrderType::support_move: {
        const UnitInfo& t = unit_at(state, order.target, "format_order");
        return head + " S " + kind_letter(t.kind) + " " + t.province + " - " + order.dest;
    }
    }
    throw ValidationError("format_order: bad order type");
}

std::string order_sort_key(const GameState& state, const std::string& unit_id, const Order& order) {
    // Tier digit first: hold < move < support-hold < support-move.
    return std::to_string(static_cast<int>(order.type)) + "|" +
           format_order(state, unit_id, order);
}

namespace {

std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

// Unit lookup by (kind letter, province) for parsing support targets. One
// unit per province, so the pair is unambiguous.
std::string unit_by_position(const GameState& state, const std::string& kind,
                             const std::string& province, const std::string& text) {
    for (const auto& [id, u] : state.units)
        if (u.province == province && kind == kind_letter(u.kind)) return id;
    throw ParseError("parse_order: no unit '" + kind + " " + province + "' in '" + text + "'");
}

} // namespace

Order parse_order(const GameState& state, const std::string& unit_id, const std::string& text) {
    const UnitInfo& u = unit_at(state, unit_id, "parse_order");
    auto tok = split_ws(text);
    auto fail = [&](const char* why) {
        throw ParseError(std::string("parse_order: ") + why + " in '" + text + "'");
    };
    if (tok.size() < 3) fail("too few tokens");
    if (tok[0] != kind_letter(u.kind)) fail("unit kind mismatch");
    if (tok[1] != u.province) fail("unit province mismatch");
    if (tok[2] == "H") {
        if (tok.size() != 3) fail("trailing tokens after hold");
        return make_hold();
    }
    if (tok[2] == "-") {
        if (tok.size() != 4) fail("malformed move");
        return make_move(tok[3]);
    }
    if (tok[2] == "S") {
        if (tok.size() == 5) {
            return make_support_hold(unit_by_position(state, tok[3], tok[4], text));
        }
        if (tok.size() == 7 && tok[5] == "-") {
            return make_support_move(unit_by_position(state, tok[3], tok[4], text), tok[6]);
        }
        fail("malformed support");
    }
    fail("unknown order form");
    return {};
}

bool is_legal_order(const MapGraph& map, const GameState& state, const std::string& unit_id,
                    const Order& order) {
    auto uit = state.units.find(unit_id);
    if (uit == state.units.end()) return false;
    const UnitInfo& u = uit->second;
    auto reachable = [&](const UnitInfo& who, const std::string& prov) {
        return map.adjacent(who.province, prov) && can_occupy(who.kind, map.provinces.at(prov).kind);
    };
    switch (order.type) {
    case OrderType::hold:
        return order.dest.empty() && order.target.empty();
    case OrderType::move:
        return order.target.empty() && map.has_province(order.dest) && reachable(u, order.dest);
    case OrderType::support_hold: {
        if (!order.dest.empty() || order.target == unit_id) return false;
        auto tit = state.units.find(order.target);
        if (tit == state.units.end()) return false;
        // Supporter must itself be able to enter the defended province.
        return reachable(u, tit->second.province);
    }
    case OrderType::support_move: {
        if (order.target == unit_id) return false;
        auto tit = state.units.find(order.target);
        if (tit == state.units.end()) return false;
        if (!map.has_province(order.dest)) return false;
        if (order.dest == u.province) return false;
        // The supported move must be legal for the target, and the supporter
        // must be able to enter the destination itself.
        return reachable(u, order.dest) && reachable(tit->second, order.dest);
    }
    }
    return false;
}

std::vector<Order> legal_orders(const MapGraph& map, const GameState& state,
                                const std::string& unit_id) {
    const UnitInfo& u = unit_at(state, unit_id, "legal_orders");
    std::vector<Order> out;
    out.push_back(make_hold());
    auto nbrs = map.adjacency.find(u.province);
    if (nbrs != map.adjacency.end())
        for (const auto& d : nbrs->second) {
            Order o = make_move(d);
            if (is_legal_order(map, state, unit_id, o)) out.push_back(o);
        }
    for (const auto& [tid, t] : state.units) {
        if (tid == unit_id) continue;
        Order sh = make_support_hold(tid);
        if (is_legal_order(map, state, unit_id, sh)) out.push_back(sh);
        if (nbrs != map.adjacency.end())
            for (const auto& d : nbrs->second) {
                Order sm = make_support_move(tid, d);
                if (is_legal_order(map, state, unit_id, sm)) out.push_back(sm);
            }
    }
    std::sort(out.begin(), out.end(), [&](const Order& a, const Order& b) {
        return order_sort_key(state, unit_id, a) < order_sort_key(state, unit_id, b);
    });
    return out;
}

namespace {

enum class Fate { undecided, fails, succeeds };

struct MoveRec {
    std::string unit;
    std::string from;
    std::string to;
    // Powers of the units whose valid uncut supports back this move.
    std::vector<std::string> support_powers;
    Fate fate = Fate::undecided;

    int full_strength() const { return 1 + static_cast<int>(support_powers.size()); }
    int dislodge_strength(const std::string& defender_power) const {
        int s = 1;
        for (const auto& p : support_powers)
            if (p != defender_power) ++s;
        return s;
    }
};

} // namespace

GameState adjudicate(const MapGraph& map, const GameState& state, const JointAction& joint) {
    // Totality and legality first.
    for (const auto& [uid, order] : joint.orders)
        if (!state.units.count(uid))
            throw ValidationError("adjudicate: order for unknown unit '" + uid + "'");
    for (const auto& [uid, u] : state.units) {
        auto it = joint.orders.find(uid);
        if (it == joint.orders.end())
            throw ValidationError("adjudicate: missing order for unit '" + uid + "'");
        if (!is_legal_order(map, state, uid, it->second))
            throw ValidationError("adjudicate: illegal order '" + format_order(state, uid, it->second) +
                                  "' for unit '" + uid + "'");
    }

    std::map<std::string, std::string> occupant; // province -> unit id
    for (const auto& [uid, u] : state.units) occupant[u.province] = uid;

    auto order_of = [&](const std::string& uid) -> const Order& { return joint.orders.at(uid); };

    // A support stands when the supported unit actually ordered the supported
    // action and no unit moves against the supporter from a province other
    // than the one the support is directed into.
    auto support_stands = [&](const std::string& sid) {
        const Order& so = order_of(sid);
        const UnitInfo& s = state.units.at(sid);
        std::string into;
        if (so.type == OrderType::support_move) {
            const Order& to = order_of(so.target);
            if (!(to.type == OrderType::move && to.dest == so.dest)) return false;
            into = so.dest;
        } else {
            if (order_of(so.target).type == OrderType::move) return false;
            into = state.units.at(so.target).province;
        }
        for (const auto& [aid, a] : state.units) {
            if (aid == sid) continue;
            const Order& ao = order_of(aid);
            if (ao.type == OrderType::move && ao.dest == s.province && a.province != into)
                return false;
        }
        return true;
    };

    std::map<std::string, MoveRec> moves; // mover unit id -> record
    for (const auto& [uid, u] : state.units) {
        const Order& o = order_of(uid);
        if (o.type != OrderType::move) continue;
        MoveRec rec;
        rec.unit = uid;
        rec.from = u.province;
        rec.to = o.dest;
        for (const auto& [sid, s] : state.units) {
            const Order& so = order_of(sid);
            if (so.type == OrderType::support_move && so.target == uid && so.dest == o.dest &&
                support_stands(sid))
                rec.support_powers.push_back(s.power);
        }
        moves[uid] = rec;
    }

    // Hold strength of a unit that stays put: 1 plus standing support-holds.
    // A unit whose own move bounced defends with bare strength 1.
    auto hold_strength = [&](const std::string& uid) {
        if (order_of(uid).type == OrderType::move) return 1;
        int s = 1;
        for (const auto& [sid, so] : joint.orders)
            if (so.type == OrderType::support_hold && so.target == uid && support_stands(sid)) ++s;
        return s;
    };

    // Phase 1: destination competition. Only a strict-strength winner may
    // proceed; ties knock out every contender.
    for (auto& [uid, rec] : moves) {
        for (const auto& [vid, other] : moves) {
            if (vid == uid || other.to != rec.to) continue;
            if (other.full_strength() >= rec.full_strength()) {
                rec.fate = Fate::fails;
                break;
            }
        }
    }

    // Phase 2: head-to-head swaps. Each pair is processed once, symmetrically:
    // a side wins only if it survived the destination competition, the powers
    // differ, and its strength (minus the opponent power's supports) strictly
    // exceeds the opponent's full move strength. Anything else bounces both.
    std::set<std::string> swap_done;
    for (auto& [uid, rec] : moves) {
        if (swap_done.count(uid)) continue;
        auto occ = occupant.find(rec.to);
        if (occ == occupant.end()) continue;
        auto vit = moves.find(occ->second);
        if (vit == moves.end() || vit->second.to != rec.from) continue;
        MoveRec& a = rec;
        MoveRec& b = vit->second;
        swap_done.insert(a.unit);
        swap_done.insert(b.unit);
        const std::string pa = state.units.at(a.unit).power;
        const std::string pb = state.units.at(b.unit).power;
        bool a_wins = a.fate == Fate::undecided && pa != pb &&
                      a.dislodge_strength(pb) > b.full_strength();
        bool b_wins = b.fate == Fate::undecided && pb != pa &&
                      b.dislodge_strength(pa) > a.full_strength();
        if (a_wins) {
            a.fate = Fate::succeeds;
            b.fate = Fate::fails;
        } else if (b_wins) {
            b.fate = Fate::succeeds;
            a.fate = Fate::fails;
        } else {
            if (a.fate == Fate::undecided) a.fate = Fate::fails;
            if (b.fate == Fate::undecided) b.fate = Fate::fails;
        }
    }

    // Phase 3: vacancy chains. Iterate to a fixed point; whatever remains
    // undecided is a rotation cycle, which resolves in everyone's favour.
    auto resolve_against_stayer = [&](MoveRec& rec, const std::string& vid) {
        const std::string my_power = state.units.at(rec.unit).power;
        const std::string their_power = state.units.at(vid).power;
        bool ok = my_power != their_power &&
                  rec.dislodge_strength(their_power) > hold_strength(vid);
        rec.fate = ok ? Fate::succeeds : Fate::fails;
    };
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto& [uid, rec] : moves) {
            if (rec.fate != Fate::undecided) continue;
            auto occ = occupant.find(rec.to);
            if (occ == occupant.end()) {
                rec.fate = Fate::succeeds;
                progress = true;
                continue;
            }
            const std::string vid = occ->second;
            auto vit = moves.find(vid);
            if (vit == moves.end()) {
                resolve_against_stayer(rec, vid);
                progress = true;
                continue;
            }
            if (vit->second.fate == Fate::succeeds) {
                rec.fate = Fate::succeeds;
                progress = true;
            } else if (vit->second.fate == Fate::fails) {
                // Bounced movers defend their origin with strength 1.
                resolve_against_stayer(rec, vid);
                progress = true;
            }
        }
    }
    for (auto& [uid, rec] : moves)
        if (rec.fate == Fate::undecided) rec.fate = Fate::succeeds;

    // Apply: successful movers relocate, everyone else stays, stayers in a
    // conquered province are dislodged and removed.
    GameState next;
    next.round = state.round + 1;
    std::set<std::string> entered;
    for (const auto& [uid, rec] : moves)
        if (rec.fate == Fate::succeeds) entered.insert(rec.to);
    for (const auto& [uid, u] : state.units) {
        auto mit = moves.find(uid);
        bool moved = mit != moves.end() && mit->second.fate == Fate::succeeds;
        std::string place = moved ? mit->second.to : u.province;
        if (!moved && entered.count(u.province)) continue; // dislodged
        UnitInfo nu = u;
        nu.province = place;
        next.units[uid] = nu;
    }

    next.sc_ownership = state.sc_ownership;
    for (const auto& [uid, u] : next.units)
        if (map.provinces.at(u.province).supply_center) next.sc_ownership[u.province] = u.power;
    return next;
}

std::map<std::string, double> reward(const MapGraph& map, const GameState& state) {
    std::map<std::string, double> out;
    for (const auto& p : map.powers) out[p] = 0.0;
    auto centers = map.supply_centers();
    if (centers.empty()) return out;
    for (const auto& [prov, power] : state.sc_ownership) {
        auto it = out.find(power);
        if (it != out.end()) it->second += 1.0;
    }
    for (auto& [power, v] : out) v /= static_cast<double>(centers.size());
    return out;
}

} // namespace coalition
