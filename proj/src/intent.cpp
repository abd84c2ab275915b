#include "coalition/intent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coalition/errors.hpp"
#include "order_scores.hpp"

namespace coalition {

namespace {

int type_tier(OrderType t) {
    switch (t) {
    case OrderType::hold: return 0;
    case OrderType::move: return 1;
    case OrderType::support_hold: return 2;
    case OrderType::support_move: return 3;
    }
    return 4;
}

bool canonical_less(const WeightedOrder& a, const WeightedOrder& b) {
    int ta = type_tier(a.order.type), tb = type_tier(b.order.type);
    if (ta != tb) return ta < tb;
    return a.text < b.text;
}

} // namespace

ActionDistribution make_distribution(const MapGraph& map, const GameState& state,
                                     const std::string& unit,
                                     std::vector<std::pair<Order, double>> support) {
    ActionDistribution dist;
    dist.unit = unit;
    double sum = 0.0;
    for (auto& [order, p] : support) {
        if (p < 0.0)
            throw ValidationError("distribution: negative probability for unit '" + unit + "'");
        if (!is_legal_order(map, state, unit, order))
            throw ValidationError("distribution: illegal order '" +
                                  format_order(state, unit, order) + "' for unit '" + unit + "'");
        sum += p;
        dist.support.push_back({order, format_order(state, unit, order), p});
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("distribution: probabilities for unit '" + unit + "' sum to " +
                              std::to_string(sum));
    std::sort(dist.support.begin(), dist.support.end(), canonical_less);
    for (std::size_t i = 1; i < dist.support.size(); ++i)
        if (dist.support[i - 1].order == dist.support[i].order)
            throw ValidationError("distribution: duplicate order '" + dist.support[i].text +
                                  "' for unit '" + unit + "'");
    return dist;
}

HypergameView filter_view(const Play& play, const std::string& power_i,
                          const std::string& power_j) {
    if (!play.map) throw ValidationError("filter_view: play has no map");
    for (const auto& p : {power_i, power_j})
        if (!play.map->has_power(p)) throw ValidationError("filter_view: unknown power '" + p + "'");

    HypergameView view;
    view.power_i = power_i;
    view.power_j = power_j;
    view.play = play;
    for (auto& round : view.play.rounds) {
        std::vector<Message> kept;
        for (auto& m : round.dialogue.messages) {
            bool between = (m.from == power_i && m.to == power_j) ||
                           (m.from == power_j && m.to == power_i);
            if (between) kept.push_back(std::move(m));
        }
        round.dialogue.messages = std::move(kept);
    }
    return view;
}

std::vector<std::pair<Order, double>> detail::heuristic_support(
    const MapGraph& map, const GameState& state, const std::string& power,
    const std::string& unit, const HeuristicParams& params,
    const std::set<std::string>& mentioned) {
    auto enemies_adjacent = [&](const std::string& prov) {
        int n = 0;
        for (const auto& [id, u] : state.units)
            if (u.power != power && map.adjacent(u.province, prov)) ++n;
        return n;
    };
    auto unowned_sc = [&](const std::string& prov) {
        if (!map.provinces.at(prov).supply_center) return false;
        auto it = state.sc_ownership.find(prov);
        return it == state.sc_ownership.end() || it->second != power;
    };

    const std::string& home = state.units.at(unit).province;
    auto legal = legal_orders(map, state, unit);
    std::vector<double> logits;
    logits.reserve(legal.size());
    for (const auto& order : legal) {
        double sc_gain = 0.0, safety = 0.0, coherence = 0.0;
        std::set<std::string> touched; // provinces that make dialogue relevant
        switch (order.type) {
        case OrderType::hold:
            sc_gain = unowned_sc(home) ? 1.0 : 0.0;
            safety = -0.5 * enemies_adjacent(home);
            touched = {home};
            break;
        case OrderType::move:
            sc_gain = unowned_sc(order.dest) ? 1.0 : 0.0;
            safety = -0.5 * enemies_adjacent(order.dest);
            touched = {order.dest};
            break;
        case OrderType::support_hold:
        case OrderType::support_move: {
            safety = -0.5 * enemies_adjacent(home);
            const auto& target = state.units.at(order.target);
            coherence = target.power == power ? 1.0 : 0.5;
            touched = {target.province};
            if (order.type == OrderType::support_move) touched.insert(order.dest);
            break;
        }
        }
        double score = params.sc_gain_weight * sc_gain + params.safety_weight * safety +
                       params.coherence_weight * coherence;
        for (const auto& prov : touched)
            if (mentioned.count(prov)) {
                score += params.mention_boost;
                break;
            }
        logits.push_back(score / params.temperature);
    }

    double max_logit = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        z += l;
    }
    std::vector<std::pair<Order, double>> support;
    for (std::size_t i = 0; i < legal.size(); ++i) support.push_back({legal[i], logits[i] / z});
    return support;
}

ActionDistribution HeuristicBackend::intent_distribution(const HypergameView& view,
                                                         const std::string& power,
                                                         const std::string& unit,
                                                         bool use_dialogue) const {
    const MapGraph& map = *view.play.map;
    const GameState& state = view.last_state();
    auto uit = state.units.find(unit);
    if (uit == state.units.end() || uit->second.power != power)
        throw ValidationError("intent: unit '" + unit + "' is not owned by '" + power + "'");

    std::set<std::string> mentioned;
    if (use_dialogue && !view.play.rounds.empty()) {
        const Lexicon lex = lexicon_ ? *lexicon_ : identity_lexicon(map);
        mentioned = extract_mentions(view.play.rounds.back().dialogue.messages, lex).provinces;
    }

    return make_distribution(map, state, unit,
                             detail::heuristic_support(map, state, power, unit, params_, mentioned));
}

void TableBackend::set(const Key& key, std::vector<std::pair<std::string, double>> support) {
    entries_[key] = std::move(support);
}

TableBackend TableBackend::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("intent table: ") + e.what());
    }
    TableBackend table;
    try {
        for (const auto& entry : doc.at("entries")) {
            Key key{entry.at("game").get<std::string>(), entry.at("round").get<std::size_t>(),
                    entry.at("unit").get<std::string>(), entry.at("use_dialogue").get<bool>()};
            std::vector<std::pair<std::string, double>> support;
            for (const auto& row : entry.at("support"))
                support.push_back({row.at("order").get<std::string>(), row.at("p").get<double>()});
            table.set(key, std::move(support));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("intent table: ") + e.what());
    }
    return table;
}

TableBackend TableBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("intent table: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string TableBackend::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, support] : entries_) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [order, p] : support) rows.push_back({{"order", order}, {"p", p}});
        entries.push_back({{"game", key.game},
                           {"round", key.round},
                           {"unit", key.unit},
                           {"use_dialogue", key.use_dialogue},
                           {"support", rows}});
    }
    return nlohmann::json{{"entries", entries}}.dump(2);
}

ActionDistribution TableBackend::intent_distribution(const HypergameView& view,
                                                     const std::string& power,
                                                     const std::string& unit,
                                                     bool use_dialogue) const {
    const MapGraph& map = *view.play.map;
    const GameState& state = view.last_state();
    auto uit = state.units.find(unit);
    if (uit == state.units.end() || uit->second.power != power)
        throw ValidationError("intent: unit '" + unit + "' is not owned by '" + power + "'");

    auto it = entries_.find(Key{view.play.source_id, view.round(), unit, use_dialogue});
    if (it == entries_.end()) {
        auto legal = legal_orders(map, state, unit);
        std::vector<std::pair<Order, double>> uniform;
        for (const auto& o : legal) uniform.push_back({o, 1.0 / static_cast<double>(legal.size())});
        return make_distribution(map, state, unit, std::move(uniform));
    }
    std::vector<std::pair<Order, double>> support;
    for (const auto& [text, p] : it->second)
        support.push_back({parse_order(state, unit, text), p});
    return make_distribution(map, state, unit, std::move(support));
}

double entropy(const ActionDistribution& dist) {
    double h = 0.0;
    for (const auto& e : dist.support)
        if (e.p > 0.0) h -= e.p * std::log2(e.p);
    return h;
}

const WeightedOrder& top_action(const ActionDistribution& dist) {
    if (dist.support.empty()) throw ValidationError("top_action: empty distribution");
    const WeightedOrder* best = &dist.support[0];
    for (const auto& e : dist.support) {
        if (e.p > best->p || (e.p == best->p && canonical_less(e, *best))) best = &e;
    }
    return *best;
}

} // namespace coalition
