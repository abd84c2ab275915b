#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/map.hpp"
#include "coalition/state.hpp"

namespace coalition {

struct Message {
    std::string from;
    std::string to;
    std::string text;

    friend bool operator==(const Message&, const Message&) = default;
};

// All messages exchanged during one round's negotiation phase, in emission
// order.
struct DialogueRound {
    std::vector<Message> messages;

    friend bool operator==(const DialogueRound&, const DialogueRound&) = default;
};

// One round of a play. The final round of a prediction-point play carries no
// action.
struct PlayRound {
    GameState state;
    DialogueRound dialogue;
    std::optional<JointAction> action;
};

// A (possibly partial) game trajectory. States chain: each action's successor
// is the next round's state.
struct Play {
    std::shared_ptr<const MapGraph> map;
    std::string source_id; // originating game id; empty for ad-hoc plays
    std::vector<PlayRound> rounds;
    bool terminal = false;

    // Number of acted rounds.
    std::size_t length() const;
    const GameState& last_state() const;
};

// Re-adjudicates every acted round and throws ValidationError naming the
// first round whose recorded successor does not match.
void validate_chaining(const Play& play);

// Copy of the play truncated to round index t (inclusive), with round t's
// action dropped so the result ends at a prediction point.
Play truncate(const Play& play, std::size_t t);

} // namespace coalition
