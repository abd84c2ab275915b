#include "coalition/play.hpp"

#include "coalition/errors.hpp"

namespace coalition {

std::size_t Play::length() const {
    std::size_t n = 0;
    for (const auto& r : rounds)
        if (r.action) ++n;
    return n;
}

const GameState& Play::last_state() const {
    if (rounds.empty()) throw ValidationError("play: no rounds");
    return rounds.back().state;
}

void validate_chaining(const Play& play) {
    if (!play.map) throw ValidationError("play: missing map");
    for (std::size_t i = 0; i < play.rounds.size(); ++i) {
        const auto& r = play.rounds[i];
        if (!r.action) continue;
        if (i + 1 >= play.rounds.size())
            throw ValidationError("play: round " + std::to_string(i) +
                                  " has an action but no successor round");
        GameState next = adjudicate(*play.map, r.state, *r.action);
        if (!(next == play.rounds[i + 1].state))
            throw ValidationError("play: round " + std::to_string(i) +
                                  ": recorded successor does not match adjudication");
    }
}

Play truncate(const Play& play, std::size_t t) {
    if (t >= play.rounds.size())
        throw ValidationError("truncate: round " + std::to_string(t) + " out of range");
    Play out;
    out.map = play.map;
    out.source_id = play.source_id;
    out.rounds.assign(play.rounds.begin(), play.rounds.begin() + static_cast<long>(t) + 1);
    out.rounds.back().action.reset();
    out.terminal = false;
    return out;
}

} // namespace coalition
