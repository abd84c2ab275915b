#include "coalition/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "coalition/errors.hpp"
#include "coalition/rng.hpp"

namespace coalition {

namespace {

using nlohmann::json;

json state_to_json(const GameState& state) {
    json units = json::object();
    for (const auto& [uid, u] : state.units)
        units[uid] = {{"power", u.power},
                      {"kind", u.kind == UnitKind::army ? "army" : "fleet"},
                      {"province", u.province}};
    json owners = json::object();
    for (const auto& [prov, power] : state.sc_ownership) owners[prov] = power;
    return json{{"units", units}, {"sc_ownership", owners}};
}

GameState state_from_json(const json& doc, int round) {
    GameState state;
    state.round = round;
    for (const auto& [uid, u] : doc.at("units").items()) {
        UnitInfo info;
        info.power = u.at("power").get<std::string>();
        std::string kind = u.at("kind").get<std::string>();
        if (kind != "army" && kind != "fleet")
            throw ParseError("game log: unknown unit kind '" + kind + "'");
        info.kind = kind == "army" ? UnitKind::army : UnitKind::fleet;
        info.province = u.at("province").get<std::string>();
        state.units[uid] = info;
    }
    for (const auto& [prov, power] : doc.at("sc_ownership").items())
        state.sc_ownership[prov] = power.get<std::string>();
    return state;
}

json messages_to_json(const DialogueRound& dialogue) {
    json msgs = json::array();
    for (const auto& m : dialogue.messages)
        msgs.push_back({{"from", m.from}, {"to", m.to}, {"text", m.text}});
    return msgs;
}

std::vector<Message> messages_from_json(const json& doc) {
    std::vector<Message> out;
    for (const auto& m : doc)
        out.push_back({m.at("from").get<std::string>(), m.at("to").get<std::string>(),
                       m.at("text").get<std::string>()});
    return out;
}

json round_to_json(const PlayRound& round, bool terminal) {
    json rec{{"round", round.state.round}, {"state", state_to_json(round.state)}};
    if (round.action) {
        rec["messages"] = messages_to_json(round.dialogue);
        json orders = json::object();
        for (const auto& [uid, order] : round.action->orders)
            orders[uid] = format_order(round.state, uid, order);
        rec["orders"] = orders;
    } else {
        rec["messages"] = messages_to_json(round.dialogue);
        rec["terminal"] = terminal;
    }
    return rec;
}

} // namespace

std::string play_rounds_to_json(const Play& play) {
    json rounds = json::array();
    for (std::size_t i = 0; i < play.rounds.size(); ++i)
        rounds.push_back(round_to_json(play.rounds[i],
                                       play.terminal && i + 1 == play.rounds.size()));
    return rounds.dump();
}

void save_game_log(const GameLog& log, std::ostream& out) {
    if (!log.play.map) throw ValidationError("game log: play has no map");
    for (std::size_t i = 0; i + 1 < log.play.rounds.size(); ++i)
        if (!log.play.rounds[i].action)
            throw ValidationError("game log: round " + std::to_string(i) +
                                  " lacks an action but is not final");
    if (!log.play.rounds.empty() && log.play.rounds.back().action)
        throw ValidationError("game log: final round must carry no action");

    json header{{"game_id", log.play.source_id},
                {"map", json::parse(map_to_json(*log.play.map))},
                {"generator", log.generator},
                {"seed", log.seed}};
    out << header.dump() << "\n";
    for (std::size_t i = 0; i < log.play.rounds.size(); ++i)
        out << round_to_json(log.play.rounds[i],
                             log.play.terminal && i + 1 == log.play.rounds.size())
                   .dump()
            << "\n";
}

GameLog load_game_log(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("game log: empty document");

    GameLog log;
    try {
        json header = json::parse(line);
        log.play.source_id = header.at("game_id").get<std::string>();
        log.generator = header.at("generator").get<std::string>();
        log.seed = header.at("seed").get<std::uint64_t>();
        log.play.map = std::make_shared<MapGraph>(load_map(header.at("map").dump()));
    } catch (const json::exception& e) {
        throw ParseError(std::string("game log: header: ") + e.what());
    }

    int expected_round = 0;
    bool saw_final = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (saw_final)
            throw ParseError("game log: round " + std::to_string(expected_round) +
                             ": records after the terminal state");
        PlayRound round;
        try {
            json rec = json::parse(line);
            int r = rec.at("round").get<int>();
            if (r != expected_round)
                throw ParseError("game log: round record " + std::to_string(r) + " where " +
                                 std::to_string(expected_round) + " was expected");
            round.state = state_from_json(rec.at("state"), r);
            if (rec.contains("messages"))
                round.dialogue.messages = messages_from_json(rec.at("messages"));
            if (rec.contains("orders")) {
                JointAction joint;
                for (const auto& [uid, text] : rec.at("orders").items())
                    joint.orders[uid] = parse_order(round.state, uid, text.get<std::string>());
                round.action = joint;
            } else {
                saw_final = true;
                log.play.terminal = rec.value("terminal", false);
            }
        } catch (const json::exception& e) {
            throw ParseError("game log: round record " + std::to_string(expected_round) + ": " +
                             e.what());
        }
        log.play.rounds.push_back(std::move(round));
        ++expected_round;
    }
    if (log.play.rounds.empty()) throw ParseError("game log: no round records");
    if (!saw_final) throw ParseError("game log: missing terminal state record");
    validate_chaining(log.play);
    return log;
}

void save_game_log_file(const GameLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("game log: cannot open '" + path + "' for writing");
    save_game_log(log, out);
}

GameLog load_game_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("game log: cannot open '" + path + "'");
    return load_game_log(in);
}

namespace {

constexpr const char* kTupleHeader =
    "game_id\tround\tpower1\tpower2\tunit\tlabel\tagreed_order\tsplit";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void save_labeled_tuples(const std::vector<LabeledTuple>& tuples, std::ostream& out) {
    out << kTupleHeader << "\n";
    for (const auto& t : tuples)
        out << t.game_id << "\t" << t.round << "\t" << t.power1 << "\t" << t.power2 << "\t"
            << t.unit << "\t" << (t.label ? '1' : '0') << "\t" << t.agreed_order << "\t"
            << t.split << "\n";
}

std::vector<LabeledTuple> load_labeled_tuples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTupleHeader)
        throw ParseError("labeled tuples: bad or missing header");
    std::vector<LabeledTuple> out;
    std::set<std::string> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 8)
            throw ParseError("labeled tuples: line " + std::to_string(lineno) + ": expected 8 "
                             "columns, found " + std::to_string(fields.size()));
        LabeledTuple t;
        t.game_id = fields[0];
        try {
            t.round = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw ParseError("labeled tuples: line " + std::to_string(lineno) + ": bad round '" +
                             fields[1] + "'");
        }
        t.power1 = fields[2];
        t.power2 = fields[3];
        t.unit = fields[4];
        if (fields[5] != "0" && fields[5] != "1")
            throw ParseError("labeled tuples: line " + std::to_string(lineno) + ": bad label '" +
                             fields[5] + "'");
        t.label = fields[5] == "1";
        t.agreed_order = fields[6];
        t.split = fields[7];
        if (t.power2 < t.power1)
            throw ParseError("labeled tuples: line " + std::to_string(lineno) +
                             ": powers not normalized");
        std::string key = t.game_id + "\t" + fields[1] + "\t" + t.power1 + "\t" + t.power2 +
                          "\t" + t.unit;
        if (!seen.insert(key).second)
            throw ParseError("labeled tuples: line " + std::to_string(lineno) +
                             ": duplicate key for unit '" + t.unit + "'");
        out.push_back(std::move(t));
    }
    return out;
}

void save_labeled_tuples_file(const std::vector<LabeledTuple>& tuples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("labeled tuples: cannot open '" + path + "' for writing");
    save_labeled_tuples(tuples, out);
}

std::vector<LabeledTuple> load_labeled_tuples_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("labeled tuples: cannot open '" + path + "'");
    return load_labeled_tuples(in);
}

void annotate_honored(std::vector<LabeledTuple>& tuples, const std::vector<GameLog>& games) {
    std::map<std::string, const Play*> by_id;
    for (const auto& g : games) by_id[g.play.source_id] = &g.play;
    for (auto& t : tuples) {
        t.honored = false;
        if (!t.label) continue;
        auto it = by_id.find(t.game_id);
        if (it == by_id.end()) continue;
        const Play& play = *it->second;
        auto r = static_cast<std::size_t>(t.round);
        if (r >= play.rounds.size() || !play.rounds[r].action) continue;
        const auto& orders = play.rounds[r].action->orders;
        auto oit = orders.find(t.unit);
        if (oit == orders.end()) continue;
        t.honored = format_order(play.rounds[r].state, t.unit, oit->second) == t.agreed_order;
    }
}

DatasetStats dataset_stats(const std::vector<LabeledTuple>& tuples) {
    if (tuples.empty()) throw ValidationError("dataset_stats: empty tuple list");
    DatasetStats s;
    s.n = tuples.size();
    for (const auto& t : tuples) {
        if (!t.label) continue;
        ++s.positives;
        if (t.honored) ++s.honored;
    }
    s.positive_rate = static_cast<double>(s.positives) / static_cast<double>(s.n);
    s.honored_rate =
        s.positives ? static_cast<double>(s.honored) / static_cast<double>(s.positives) : 0.0;
    return s;
}

std::pair<std::vector<LabeledTuple>, std::vector<LabeledTuple>> split_train_test(
    std::vector<LabeledTuple> tuples, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ValidationError("split: ratio " + std::to_string(ratio) + " outside (0,1)");
    std::vector<LabeledTuple> classes[2];
    for (auto& t : tuples) classes[t.label ? 1 : 0].push_back(std::move(t));
    for (int label = 0; label < 2; ++label)
        if (classes[label].size() < 2)
            throw ValidationError(std::string("split: label class '") + (label ? "1" : "0") +
                                  "' has fewer than 2 members");

    std::vector<LabeledTuple> train, test;
    for (int label = 0; label < 2; ++label) {
        auto& pool = classes[label];
        Rng rng(derive_seed(seed, {0x5B117ULL, static_cast<std::uint64_t>(label)}));
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.bounded(i)]);
        auto train_n = static_cast<std::size_t>(
            std::llround(ratio * static_cast<double>(pool.size())));
        train_n = std::min(train_n, pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto& t = pool[i];
            t.split = i < train_n ? "train" : "test";
            (i < train_n ? train : test).push_back(std::move(t));
        }
    }
    auto canonical = [](const LabeledTuple& a, const LabeledTuple& b) {
        return std::tie(a.game_id, a.round, a.power1, a.power2, a.unit) <
               std::tie(b.game_id, b.round, b.power1, b.power2, b.unit);
    };
    std::sort(train.begin(), train.end(), canonical);
    std::sort(test.begin(), test.end(), canonical);
    return {std::move(train), std::move(test)};
}

namespace {

// Everything produced for one game; merged in game order afterwards.
struct GameOutput {
    GameLog log;
    std::vector<LabeledTuple> tuples;
    std::vector<std::pair<TableBackend::Key, std::vector<std::pair<std::string, double>>>>
        intent_entries;
};

std::vector<std::pair<std::string, double>> concentrated_support(const MapGraph& map,
                                                                 const GameState& state,
                                                                 const std::string& unit,
                                                                 const Order& peak,
                                                                 double concentration) {
    auto legal = legal_orders(map, state, unit);
    std::vector<std::pair<std::string, double>> rows;
    if (legal.size() == 1) {
        rows.push_back({format_order(state, unit, legal[0]), 1.0});
        return rows;
    }
    double rest = (1.0 - concentration) / static_cast<double>(legal.size() - 1);
    for (const auto& o : legal)
        rows.push_back({format_order(state, unit, o), o == peak ? concentration : rest});
    return rows;
}

GameOutput generate_one_game(std::shared_ptr<const MapGraph> map, const Lexicon& lexicon,
                             double honesty, std::uint64_t corpus_seed, int index,
                             const CorpusGenParams& params) {
    const std::uint64_t game_seed =
        derive_seed(corpus_seed, {0x9A4EULL, static_cast<std::uint64_t>(index)});
    NegotiationConfig cfg = params.negotiation;
    cfg.honesty = honesty;
    auto script = std::make_shared<NegotiationScript>(cfg, lexicon, game_seed);
    std::map<std::string, std::shared_ptr<Agent>> agents;
    for (const auto& power : map->powers)
        agents[power] = std::make_shared<NegotiatorAgent>(power, script);

    GameOutput out;
    out.log.play = simulate(map, agents, params.rounds, game_seed);
    out.log.play.source_id = "g" + std::to_string(corpus_seed) + "-" + std::to_string(index);
    out.log.generator = "scripted";
    out.log.seed = game_seed;
    const std::string& game_id = out.log.play.source_id;
    const Play& play = out.log.play;

    // Positive tuples and concentrated intent entries per pact side.
    std::set<std::string> positive_keys; // round|power1|power2|unit
    std::set<std::pair<int, std::string>> pact_units;
    for (const auto& p : script->pacts()) {
        const auto& state = play.rounds[static_cast<std::size_t>(p.round)].state;
        struct SideRef {
            const std::string& unit;
            const Order& agreed;
            const Order& played;
            bool honored;
        };
        for (const SideRef side : {SideRef{p.u1, p.a1, p.played_a1, p.honored_1},
                                   SideRef{p.u2, p.a2, p.played_a2, p.honored_2}}) {
            LabeledTuple t;
            t.game_id = game_id;
            t.round = p.round;
            t.power1 = p.power_i;
            t.power2 = p.power_j;
            t.unit = side.unit;
            t.label = true;
            t.agreed_order = format_order(state, side.unit, side.agreed);
            t.honored = side.honored;
            out.tuples.push_back(std::move(t));
            positive_keys.insert(std::to_string(p.round) + "|" + p.power_i + "|" + p.power_j +
                                 "|" + side.unit);
            pact_units.insert({p.round, side.unit});
            out.intent_entries.push_back(
                {TableBackend::Key{game_id, static_cast<std::size_t>(p.round), side.unit, true},
                 concentrated_support(*map, state, side.unit, side.played,
                                      params.concentration)});
        }
    }

    // Negatives: every other unit of every pair that exchanged messages.
    for (std::size_t r = 0; r + 1 < play.rounds.size(); ++r) {
        const auto& round = play.rounds[r];
        std::set<std::pair<std::string, std::string>> talked;
        for (const auto& m : round.dialogue.messages)
            talked.insert({std::min(m.from, m.to), std::max(m.from, m.to)});
        for (const auto& [p1, p2] : talked) {
            for (const auto& [uid, u] : round.state.units) {
                if (u.power != p1 && u.power != p2) continue;
                std::string key = std::to_string(r) + "|" + p1 + "|" + p2 + "|" + uid;
                if (positive_keys.count(key)) continue;
                LabeledTuple t;
                t.game_id = game_id;
                t.round = static_cast<int>(r);
                t.power1 = p1;
                t.power2 = p2;
                t.unit = uid;
                t.label = false;
                out.tuples.push_back(std::move(t));
            }
        }
    }

    // Decoy intent shifts on units no proximity filter would keep: they fool
    // a filterless classifier while staying invisible to the filtered path.
    Rng noise_rng(derive_seed(corpus_seed, {0xFA12ULL, static_cast<std::uint64_t>(index)}));
    for (std::size_t r = 0; r + 1 < play.rounds.size(); ++r) {
        const auto& state = play.rounds[r].state;
        for (const auto& [uid, u] : state.units) {
            if (pact_units.count({static_cast<int>(r), uid})) continue;
            int nearest = -1;
            for (const auto& [oid, other] : state.units) {
                if (other.power == u.power) continue;
                int d = map->distance(u.province, other.province);
                if (d >= 0 && (nearest < 0 || d < nearest)) nearest = d;
            }
            bool far = nearest < 0 || nearest > cfg.max_pact_distance;
            if (!far || !noise_rng.chance(params.noise_rate)) continue;
            auto legal = legal_orders(*map, state, uid);
            const Order& decoy = legal[noise_rng.bounded(legal.size())];
            out.intent_entries.push_back(
                {TableBackend::Key{game_id, r, uid, true},
                 concentrated_support(*map, state, uid, decoy, params.concentration)});
        }
    }

    auto canonical = [](const LabeledTuple& a, const LabeledTuple& b) {
        return std::tie(a.round, a.power1, a.power2, a.unit, a.game_id) <
               std::tie(b.round, b.power1, b.power2, b.unit, b.game_id);
    };
    std::sort(out.tuples.begin(), out.tuples.end(), canonical);
    return out;
}

} // namespace

Corpus generate_labeled_corpus(std::shared_ptr<const MapGraph> map, const Lexicon& lexicon,
                               int n_games, double honesty, std::uint64_t seed,
                               const CorpusGenParams& params) {
    if (!map) throw ValidationError("corpus: null map");
    if (n_games < 1) throw ValidationError("corpus: n_games must be at least 1");
    if (!(honesty >= 0.0 && honesty <= 1.0))
        throw ValidationError("corpus: honesty outside [0,1]");

    std::vector<GameOutput> outputs(static_cast<std::size_t>(n_games));
    for_each_index(static_cast<std::size_t>(n_games), params.exec, [&](std::size_t g) {
        outputs[g] = generate_one_game(map, lexicon, honesty, seed, static_cast<int>(g), params);
    });

    Corpus corpus;
    for (auto& out : outputs) {
        corpus.games.push_back(std::move(out.log));
        for (auto& t : out.tuples) corpus.tuples.push_back(std::move(t));
        for (auto& [key, rows] : out.intent_entries) corpus.intent_table.set(key, std::move(rows));
    }
    return corpus;
}

} // namespace coalition
