#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coalition/lexicon.hpp"
#include "coalition/map.hpp"
#include "coalition/play.hpp"

namespace coalition {

// One order with its probability and canonical notation. The text is fixed at
// construction so downstream consumers (ranking, tie-breaks) never need the
// originating state.
struct WeightedOrder {
    Order order;
    std::string text;
    double p = 0.0;

    friend bool operator==(const WeightedOrder&, const WeightedOrder&) = default;
};

// Probability distribution over a unit's orders: entries distinct, legal,
// non-negative, summing to 1 (1e-9 tolerance), sorted canonically.
struct ActionDistribution {
    std::string unit;
    std::vector<WeightedOrder> support;
};

// Validates and canonically sorts a raw support list into a distribution.
ActionDistribution make_distribution(const MapGraph& map, const GameState& state,
                                     const std::string& unit,
                                     std::vector<std::pair<Order, double>> support);

// A play as one power pair perceives it: dialogue reduced to their exchange,
// states and actions untouched.
struct HypergameView {
    Play play;
    std::string power_i, power_j;

    const GameState& last_state() const { return play.last_state(); }
    // Round index of the prediction point.
    std::size_t round() const { return play.rounds.empty() ? 0 : play.rounds.size() - 1; }
};

// Keeps exactly the i<->j messages of every round, in their original order.
// Idempotent; throws ValidationError for powers not on the map.
HypergameView filter_view(const Play& play, const std::string& power_i,
                          const std::string& power_j);

// Pluggable per-unit intent model. use_dialogue=false is the "before
// dialogue" distribution: the same model conditioned on the view with its
// dialogue emptied.
class IntentBackend {
public:
    virtual ~IntentBackend() = default;
    virtual ActionDistribution intent_distribution(const HypergameView& view,
                                                   const std::string& power,
                                                   const std::string& unit,
                                                   bool use_dialogue) const = 0;
};

struct HeuristicParams {
    double temperature = 1.0;
    double mention_boost = 2.0; // additive logit for orders touching mentioned provinces
    // Weights for the per-order features.
    double sc_gain_weight = 1.0;
    double safety_weight = 1.0;
    double coherence_weight = 0.5;
};

// Stateless scorer: softmax over per-order features.
//   sc gain:   1 when the order ends on a supply center its power does not
//              own (moves and holds), else 0
//   safety:    minus the number of enemy units adjacent to the province the
//              unit would end on, scaled by 0.5
//   coherence: 1 for supporting one's own power, 0.5 for supporting a
//              foreign unit, 0 otherwise
// With dialogue, orders whose destination or supported province was mentioned
// in the view's last dialogue round get the mention boost. Mentions for holds
// are matched against the unit's own province.
class HeuristicBackend : public IntentBackend {
public:
    explicit HeuristicBackend(HeuristicParams params = {},
                              std::optional<Lexicon> lexicon = std::nullopt)
        : params_(params), lexicon_(std::move(lexicon)) {}

    ActionDistribution intent_distribution(const HypergameView& view, const std::string& power,
                                           const std::string& unit,
                                           bool use_dialogue) const override;

private:
    HeuristicParams params_;
    std::optional<Lexicon> lexicon_; // identity lexicon of the view's map when absent
};

// Fixture-driven backend: exact support lists keyed by (game, round, unit,
// use_dialogue); anything unkeyed falls back to uniform over legal orders.
class TableBackend : public IntentBackend {
public:
    struct Key {
        std::string game;
        std::size_t round = 0;
        std::string unit;
        bool use_dialogue = false;

        friend auto operator<=>(const Key&, const Key&) = default;
    };

    TableBackend() = default;

    void set(const Key& key, std::vector<std::pair<std::string, double>> support);
    std::size_t size() const { return entries_.size(); }

    // JSON document: {"entries": [{"game", "round", "unit", "use_dialogue",
    // "support": [{"order", "p"}]}]}.
    static TableBackend from_json(const std::string& text);
    static TableBackend from_file(const std::string& path);
    std::string to_json() const;

    ActionDistribution intent_distribution(const HypergameView& view, const std::string& power,
                                           const std::string& unit,
                                           bool use_dialogue) const override;

private:
    // Support entries hold canonical order text; orders are re-parsed against
    // the queried state so one table serves any number of views.
    std::map<Key, std::vector<std::pair<std::string, double>>> entries_;
};

// Shannon entropy in bits, 0 log 0 := 0.
double entropy(const ActionDistribution& dist);

// Highest-probability entry; exact ties go to the canonically first order.
// Permutation-invariant in the support list.
const WeightedOrder& top_action(const ActionDistribution& dist);

} // namespace coalition
