#include "coalition/agents.hpp"

#include <algorithm>

#include "coalition/errors.hpp"

namespace coalition {

namespace {

std::vector<std::string> units_of(const GameState& state, const std::string& power) {
    std::vector<std::string> out;
    for (const auto& [uid, u] : state.units)
        if (u.power == power) out.push_back(uid);
    return out;
}

Order random_legal(const MapGraph& map, const GameState& state, const std::string& unit,
                   Rng& rng) {
    auto legal = legal_orders(map, state, unit);
    return legal[rng.bounded(legal.size())];
}

// Any legal order other than `avoid`; falls back to `avoid` when the unit has
// no real choice.
Order alternative_order(const MapGraph& map, const GameState& state, const std::string& unit,
                        const Order& avoid, Rng& rng) {
    auto legal = legal_orders(map, state, unit);
    std::vector<Order> other;
    for (const auto& o : legal)
        if (!(o == avoid)) other.push_back(o);
    if (other.empty()) return avoid;
    return other[rng.bounded(other.size())];
}

} // namespace

std::map<std::string, Order> HoldAgent::act(const MapGraph&, const GameState& state,
                                            const std::string& power, int, const DialogueRound&,
                                            Rng&) {
    std::map<std::string, Order> orders;
    for (const auto& uid : units_of(state, power)) orders[uid] = make_hold();
    return orders;
}

std::map<std::string, Order> RandomAgent::act(const MapGraph& map, const GameState& state,
                                              const std::string& power, int,
                                              const DialogueRound&, Rng& rng) {
    std::map<std::string, Order> orders;
    for (const auto& uid : units_of(state, power))
        orders[uid] = rng.chance(hold_bias_) ? make_hold() : random_legal(map, state, uid, rng);
    return orders;
}

namespace {

struct PactOption {
    int priority = 0; // lower is better
    std::string u1, u2;
    Order a1, a2;
};

// Enumerates pact templates for one unit pair, both orientations: one side
// moves (or holds) while the other supports, or both move in a coordinated
// but non-colliding way.
void pact_options_for(const MapGraph& map, const GameState& state, const std::string& power_i,
                      const std::string& u1, const std::string& u2,
                      std::vector<PactOption>& out) {
    struct Side {
        std::string mover, backer;
        bool mover_is_first;
    };
    for (const Side& side : {Side{u1, u2, true}, Side{u2, u1, false}}) {
        const auto& mover_prov = state.units.at(side.mover).province;
        auto nbrs = map.adjacency.find(mover_prov);
        if (nbrs != map.adjacency.end()) {
            for (const auto& dest : nbrs->second) {
                Order mv = make_move(dest);
                Order sup = make_support_move(side.mover, dest);
                if (!is_legal_order(map, state, side.mover, mv)) continue;
                if (!is_legal_order(map, state, side.backer, sup)) continue;
                const auto& info = map.provinces.at(dest);
                auto owner = state.sc_ownership.find(dest);
                const std::string& mover_power = state.units.at(side.mover).power;
                bool gain = info.supply_center &&
                            (owner == state.sc_ownership.end() || owner->second != mover_power);
                PactOption opt;
                opt.priority = gain ? 0 : 1;
                opt.u1 = u1;
                opt.u2 = u2;
                (side.mover_is_first ? opt.a1 : opt.a2) = mv;
                (side.mover_is_first ? opt.a2 : opt.a1) = sup;
                out.push_back(opt);
            }
        }
        Order sh = make_support_hold(side.mover);
        if (is_legal_order(map, state, side.backer, sh)) {
            PactOption opt;
            opt.priority = 2;
            opt.u1 = u1;
            opt.u2 = u2;
            (side.mover_is_first ? opt.a1 : opt.a2) = make_hold();
            (side.mover_is_first ? opt.a2 : opt.a1) = sh;
            out.push_back(opt);
        }
    }
    // Coordinated non-colliding moves.
    const auto& p1 = state.units.at(u1).province;
    const auto& p2 = state.units.at(u2).province;
    auto n1 = map.adjacency.find(p1);
    auto n2 = map.adjacency.find(p2);
    if (n1 != map.adjacency.end() && n2 != map.adjacency.end()) {
        for (const auto& d1 : n1->second) {
            if (d1 == p2) continue;
            if (!is_legal_order(map, state, u1, make_move(d1))) continue;
            for (const auto& d2 : n2->second) {
                if (d2 == p1 || d2 == d1) continue;
                if (!is_legal_order(map, state, u2, make_move(d2))) continue;
                out.push_back(PactOption{3, u1, u2, make_move(d1), make_move(d2)});
            }
        }
    }
    (void)power_i;
}

const char* kProposals[] = {
    "Proposal for this turn: I will order %A1%. In return, please order %A2%.",
    "Shall we coordinate? My plan is %A1%. Yours would be %A2%.",
    "I suggest we act together around %FOCUS%: I order %A1%, you order %A2%.",
};

const char* kAcceptances[] = {
    "Agreed. I will order %A2%.",
    "Deal. Expect %A2% from me this round.",
    "Very well, %FOCUS% it is. I commit to %A2%.",
};

const char* kDistractors[] = {
    "Also, keep an eye on %OTHER%; I do not trust anyone there.",
    "Unrelated, but %OTHER% worries me this year.",
};

const char* kChatterPlain[] = {
    "Quiet season ahead, I expect.",
    "Nothing to report on my side.",
    "Let us keep the peace a while longer.",
};

const char* kChatterMention[] = {
    "I hear troops are massing near %NEAR%.",
    "Rumour says %NEAR% will change hands soon.",
};

const char* kReplies[] = {
    "Understood.",
    "We will see.",
    "Noted, friend.",
};

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

} // namespace

void NegotiationScript::plan_round(const MapGraph& map, const GameState& state, int round) {
    if (round <= planned_until_) return;
    planned_until_ = round;
    Rng rng(derive_seed(seed_, {0x70ac7ULL, static_cast<std::uint64_t>(round)}));

    // Aliases by province, for flavoured mentions (identity entries excluded).
    std::map<std::string, std::vector<std::string>> names;
    for (const auto& [alias, id] : lexicon_.aliases)
        if (alias != id) names[id].push_back(alias);
    auto province_name = [&](const std::string& id) {
        auto it = names.find(id);
        if (it == names.end() || !rng.chance(config_.alias_rate)) return id;
        return it->second[rng.bounded(it->second.size())];
    };

    std::set<std::string> used_units;
    for (std::size_t i = 0; i < map.powers.size(); ++i) {
        for (std::size_t j = i + 1; j < map.powers.size(); ++j) {
            const std::string& pi = map.powers[i];
            const std::string& pj = map.powers[j];
            if (!rng.chance(config_.pair_talk_rate)) continue;

            std::vector<PactOption> options;
            if (rng.chance(config_.pact_rate)) {
                for (const auto& u1 : units_of(state, pi)) {
                    if (used_units.count(u1)) continue;
                    for (const auto& u2 : units_of(state, pj)) {
                        if (used_units.count(u2)) continue;
                        int d = map.distance(state.units.at(u1).province,
                                             state.units.at(u2).province);
                        if (d < 0 || d > config_.max_pact_distance) continue;
                        pact_options_for(map, state, pi, u1, u2, options);
                    }
                }
            }

            if (!options.empty()) {
                int best = options[0].priority;
                for (const auto& o : options) best = std::min(best, o.priority);
                std::vector<PactOption> pool;
                for (const auto& o : options)
                    if (o.priority == best) pool.push_back(o);
                const PactOption& pick = pool[rng.bounded(pool.size())];

                PactRecord pact;
                pact.round = round;
                pact.power_i = pi;
                pact.power_j = pj;
                pact.u1 = pick.u1;
                pact.u2 = pick.u2;
                pact.a1 = pick.a1;
                pact.a2 = pick.a2;
                pact.honored_1 = rng.chance(config_.honesty);
                pact.honored_2 = rng.chance(config_.honesty);
                pact.played_a1 = pact.honored_1
                                     ? pact.a1
                                     : alternative_order(map, state, pact.u1, pact.a1, rng);
                pact.played_a2 = pact.honored_2
                                     ? pact.a2
                                     : alternative_order(map, state, pact.u2, pact.a2, rng);
                used_units.insert(pact.u1);
                used_units.insert(pact.u2);

                std::string a1 = format_order(state, pact.u1, pact.a1);
                std::string a2 = format_order(state, pact.u2, pact.a2);
                std::string focus = !pact.a1.dest.empty()   ? pact.a1.dest
                                    : !pact.a2.dest.empty() ? pact.a2.dest
                                                            : state.units.at(pact.u1).province;
                std::set<std::string> involved{state.units.at(pact.u1).province,
                                               state.units.at(pact.u2).province, focus};
                auto fill = [&](const char* tpl) {
                    std::string text = tpl;
                    text = replace_all(text, "%A1%", a1);
                    text = replace_all(text, "%A2%", a2);
                    text = replace_all(text, "%FOCUS%", province_name(focus));
                    return text;
                };
                messages_[round][pi].push_back(
                    {pi, pj, fill(kProposals[rng.bounded(std::size(kProposals))])});
                messages_[round][pj].push_back(
                    {pj, pi, fill(kAcceptances[rng.bounded(std::size(kAcceptances))])});
                if (rng.chance(config_.distractor_rate)) {
                    std::vector<std::string> others;
                    for (const auto& [prov, info] : map.provinces)
                        if (!involved.count(prov)) others.push_back(prov);
                    if (!others.empty()) {
                        std::string other = province_name(others[rng.bounded(others.size())]);
                        std::string text = replace_all(
                            kDistractors[rng.bounded(std::size(kDistractors))], "%OTHER%", other);
                        messages_[round][pj].push_back({pj, pi, text});
                    }
                }
                pacts_.push_back(pact);
                continue;
            }

            // No pact: idle chatter, sometimes naming a province near the pair
            // so mention noise reaches the candidate filter.
            if (rng.chance(config_.chatter_mention_rate)) {
                std::set<std::string> near;
                for (const auto& power : {pi, pj})
                    for (const auto& uid : units_of(state, power)) {
                        const auto& prov = state.units.at(uid).province;
                        near.insert(prov);
                        auto nbrs = map.adjacency.find(prov);
                        if (nbrs != map.adjacency.end())
                            near.insert(nbrs->second.begin(), nbrs->second.end());
                    }
                std::vector<std::string> pool(near.begin(), near.end());
                std::string prov = province_name(pool[rng.bounded(pool.size())]);
                std::string text = replace_all(
                    kChatterMention[rng.bounded(std::size(kChatterMention))], "%NEAR%", prov);
                messages_[round][pi].push_back({pi, pj, text});
            } else {
                messages_[round][pi].push_back(
                    {pi, pj, kChatterPlain[rng.bounded(std::size(kChatterPlain))]});
            }
            if (rng.chance(0.5)) {
                messages_[round][pj].push_back(
                    {pj, pi, kReplies[rng.bounded(std::size(kReplies))]});
            }
        }
    }
}

std::vector<Message> NegotiationScript::messages_for(const std::string& power, int round) const {
    auto rit = messages_.find(round);
    if (rit == messages_.end()) return {};
    auto pit = rit->second.find(power);
    if (pit == rit->second.end()) return {};
    return pit->second;
}

const Order* NegotiationScript::pact_order(const std::string& unit, int round) const {
    for (const auto& p : pacts_) {
        if (p.round != round) continue;
        if (p.u1 == unit) return &p.played_a1;
        if (p.u2 == unit) return &p.played_a2;
    }
    return nullptr;
}

std::vector<Message> NegotiatorAgent::negotiate(const MapGraph& map, const GameState& state,
                                                const std::string& power, int round, Rng&) {
    script_->plan_round(map, state, round);
    return script_->messages_for(power, round);
}

std::map<std::string, Order> NegotiatorAgent::act(const MapGraph& map, const GameState& state,
                                                  const std::string& power, int round,
                                                  const DialogueRound&, Rng& rng) {
    script_->plan_round(map, state, round);
    std::map<std::string, Order> orders;
    for (const auto& uid : units_of(state, power)) {
        if (const Order* scripted = script_->pact_order(uid, round)) {
            orders[uid] = *scripted;
        } else {
            orders[uid] = rng.chance(script_->config().hold_bias)
                              ? make_hold()
                              : random_legal(map, state, uid, rng);
        }
    }
    return orders;
}

Play simulate(std::shared_ptr<const MapGraph> map,
              const std::map<std::string, std::shared_ptr<Agent>>& agents, int rounds,
              std::uint64_t seed) {
    if (!map) throw ValidationError("simulate: null map");
    if (rounds < 1) throw ValidationError("simulate: rounds must be positive");
    for (const auto& power : map->powers)
        if (!agents.count(power) || !agents.at(power))
            throw ValidationError("simulate: no agent for power '" + power + "'");

    Play play;
    play.map = map;
    GameState state = initial_state(*map);
    for (int t = 0; t < rounds; ++t) {
        PlayRound round;
        round.state = state;
        for (std::size_t idx = 0; idx < map->powers.size(); ++idx) {
            const std::string& power = map->powers[idx];
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t), 0, idx}));
            for (auto& msg : agents.at(power)->negotiate(*map, state, power, t, rng)) {
                if (msg.from != power)
                    throw ValidationError("simulate: agent for '" + power +
                                          "' sent a message from '" + msg.from + "'");
                if (msg.to == power || !map->has_power(msg.to))
                    throw ValidationError("simulate: message to invalid power '" + msg.to + "'");
                round.dialogue.messages.push_back(std::move(msg));
            }
        }
        JointAction joint;
        for (std::size_t idx = 0; idx < map->powers.size(); ++idx) {
            const std::string& power = map->powers[idx];
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t), 1, idx}));
            auto orders = agents.at(power)->act(*map, state, power, t, round.dialogue, rng);
            for (const auto& [uid, order] : orders) {
                auto uit = state.units.find(uid);
                if (uit == state.units.end() || uit->second.power != power)
                    throw ValidationError("simulate: agent for '" + power +
                                          "' ordered foreign or unknown unit '" + uid + "'");
                if (!is_legal_order(*map, state, uid, order))
                    throw ValidationError("simulate: illegal order '" +
                                          format_order(state, uid, order) + "' for unit '" + uid +
                                          "'");
                joint.orders[uid] = order;
            }
        }
        for (const auto& [uid, u] : state.units)
            if (!joint.orders.count(uid))
                throw ValidationError("simulate: missing order for unit '" + uid + "'");
        round.action = joint;
        play.rounds.push_back(std::move(round));
        state = adjudicate(*map, state, joint);
    }
    PlayRound last;
    last.state = state;
    play.rounds.push_back(std::move(last));
    play.terminal = true;
    return play;
}

} // namespace coalition
