#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coalition/lexicon.hpp"
#include "coalition/play.hpp"
#include "coalition/rng.hpp"

namespace coalition {

// Per-power policy driving simulation. Implementations must be deterministic
// given the Rng they are handed.
class Agent {
public:
    virtual ~Agent() = default;
    virtual std::vector<Message> negotiate(const MapGraph& map, const GameState& state,
                                           const std::string& power, int round, Rng& rng) {
        (void)map;
        (void)state;
        (void)power;
        (void)round;
        (void)rng;
        return {};
    }
    virtual std::map<std::string, Order> act(const MapGraph& map, const GameState& state,
                                             const std::string& power, int round,
                                             const DialogueRound& dialogue, Rng& rng) = 0;
};

// Silent agent; every unit holds.
class HoldAgent : public Agent {
public:
    std::map<std::string, Order> act(const MapGraph&, const GameState& state,
                                     const std::string& power, int, const DialogueRound&,
                                     Rng&) override;
};

// Silent agent; each unit picks hold with probability hold_bias, otherwise a
// uniform legal order.
class RandomAgent : public Agent {
public:
    explicit RandomAgent(double hold_bias = 0.5) : hold_bias_(hold_bias) {}
    std::map<std::string, Order> act(const MapGraph& map, const GameState& state,
                                     const std::string& power, int round, const DialogueRound&,
                                     Rng& rng) override;

private:
    double hold_bias_;
};

struct NegotiationConfig {
    double honesty = 1.0;          // probability each pact side plays its agreed order
    double pair_talk_rate = 0.9;   // pair exchanges messages in a round
    double pact_rate = 0.6;        // given talk, the pair forms a pact
    double alias_rate = 0.5;       // name provinces by alias instead of id
    double distractor_rate = 0.35; // pact dialogue adds an unrelated-province remark
    double chatter_mention_rate = 0.6; // idle chatter names a province near the pair
    int max_pact_distance = 2;     // unit proximity required to form a pact
    double hold_bias = 0.55;       // default policy: hold probability for non-pact units
};

// One bilateral agreement arranged by the scripted negotiators. u1 belongs to
// power_i, u2 to power_j, power_i < power_j. played_* is what the owner will
// actually order (differs from a1/a2 when the honesty coin failed).
struct PactRecord {
    int round = 0;
    std::string power_i, power_j;
    std::string u1, u2;
    Order a1, a2;
    Order played_a1, played_a2;
    bool honored_1 = true, honored_2 = true;
};

// Shared playbook for a set of NegotiatorAgents in one simulated game. Plans
// each round's pacts, dialogue, and honesty coin flips deterministically from
// the game seed; the agents only read from it. At most one pact per power
// pair per round and one per unit per round.
class NegotiationScript {
public:
    NegotiationScript(NegotiationConfig config, Lexicon lexicon, std::uint64_t seed)
        : config_(config), lexicon_(std::move(lexicon)), seed_(seed) {}

    // Idempotent for a given round; called lazily by the agents.
    void plan_round(const MapGraph& map, const GameState& state, int round);

    std::vector<Message> messages_for(const std::string& power, int round) const;
    // Scripted final order for a pact unit, if the unit is in a pact this round.
    const Order* pact_order(const std::string& unit, int round) const;

    const std::vector<PactRecord>& pacts() const { return pacts_; }
    const NegotiationConfig& config() const { return config_; }

private:
    NegotiationConfig config_;
    Lexicon lexicon_;
    std::uint64_t seed_ = 0;
    int planned_until_ = -1;
    std::vector<PactRecord> pacts_;
    // round -> sender power -> messages in emission order
    std::map<int, std::map<std::string, std::vector<Message>>> messages_;
};

// Agent that follows a shared NegotiationScript for pact units and the
// hold-biased default policy for the rest.
class NegotiatorAgent : public Agent {
public:
    NegotiatorAgent(std::string power, std::shared_ptr<NegotiationScript> script)
        : power_(std::move(power)), script_(std::move(script)) {}

    std::vector<Message> negotiate(const MapGraph& map, const GameState& state,
                                   const std::string& power, int round, Rng& rng) override;
    std::map<std::string, Order> act(const MapGraph& map, const GameState& state,
                                     const std::string& power, int round,
                                     const DialogueRound& dialogue, Rng& rng) override;

private:
    std::string power_;
    std::shared_ptr<NegotiationScript> script_;
};

// Runs `rounds` alternating negotiation/action phases. Every power needs an
// agent; every emitted order is validated (errors name the unit and order).
// Fully reproducible from the seed.
Play simulate(std::shared_ptr<const MapGraph> map,
              const std::map<std::string, std::shared_ptr<Agent>>& agents, int rounds,
              std::uint64_t seed);

} // namespace coalition
