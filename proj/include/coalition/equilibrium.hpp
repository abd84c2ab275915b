#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/graph.hpp"
#include "coalition/intent.hpp"
#include "coalition/map.hpp"
#include "coalition/matrix_game.hpp"
#include "coalition/parallel.hpp"
#include "coalition/play.hpp"
#include "coalition/state.hpp"

namespace coalition {

// Per-power state value. Two modes: a linear model over hand features of the
// position, and an exact table keyed by state_key for tiny fixtures.
// Evaluation is clamped to [0,1] per power; the raw prediction stays
// available so gradient steps keep working when the clamp saturates.
class ValueFunction {
public:
    // "bias", "sc_share", "unit_share", "centrality", "sc_distance"
    static const std::vector<std::string>& feature_names();

    // Feature vector for one power, aligned with feature_names():
    //   bias        1
    //   sc_share    owned supply centers / total supply centers
    //   unit_share  own units / all units alive
    //   centrality  mean over own units of degree(province) / max degree
    //   sc_distance mean over own units of hops to the nearest supply
    //               center, divided by the map diameter (unreachable counts
    //               as the diameter); 0 when the power has no units
    static std::vector<double> features(const MapGraph& map, const GameState& state,
                                        const std::string& power);

    // Zero-weight linear model / empty table over the map's powers. Unseen
    // tabular states evaluate to 0.
    static ValueFunction linear(const MapGraph& map);
    static ValueFunction tabular(const MapGraph& map);

    bool is_tabular() const { return tabular_; }
    double gamma() const { return gamma_; }
    void set_gamma(double g) { gamma_ = g; }
    const std::vector<std::string>& powers() const { return powers_; }

    // Clamped to [0,1]. Throws ValidationError for powers the function does
    // not cover.
    double evaluate(const MapGraph& map, const GameState& state, const std::string& power) const;
    // Unclamped prediction (stored value in tabular mode).
    double raw(const MapGraph& map, const GameState& state, const std::string& power) const;

    // Direct table assignment; fixtures pin successor values this way.
    // Throws ValidationError in linear mode.
    void set_value(const GameState& state, const std::string& power, double v);

    const std::vector<double>& weights(const std::string& power) const;
    void set_weights(const std::string& power, std::vector<double> w);

    // {"powers", "features", "weights": {power: [...]}, "gamma"}; tabular
    // mode replaces "weights" with "mode": "tabular" and "table": {power:
    // {state key: value}}. Round-trips bit-exactly.
    static ValueFunction from_json(const std::string& text);
    static ValueFunction from_file(const std::string& path);
    std::string to_json() const;
    void save_file(const std::string& path) const;

private:
    bool tabular_ = false;
    double gamma_ = 0.99;
    std::vector<std::string> powers_;
    std::map<std::string, std::vector<double>> weights_;
    std::map<std::string, std::map<std::string, double>> table_;
};

// Heuristic stand-in for a learned order-proposal policy: the dialogue-free
// order scorer shared with the heuristic intent backend.
struct PolicyProposal {
    HeuristicParams params;
};

// Proposal distribution over one unit's legal orders at this state.
ActionDistribution proposal_distribution(const MapGraph& map, const GameState& state,
                                         const std::string& unit,
                                         const PolicyProposal& proposal);

// A complete order assignment for one power's units, with the proposal
// log-likelihood used for ranking and a canonical key for deduplication.
struct CandidateAssignment {
    std::map<std::string, Order> orders;
    double log_likelihood = 0.0;
    std::string key; // "unit=notation;..." over units in id order

    friend bool operator==(const CandidateAssignment&, const CandidateAssignment&) = default;
};

// Samples m assignments from the per-unit proposal (units independent),
// deduplicates, and keeps the k most likely; when the full cross-product has
// at most m elements it is enumerated instead, so small cases are exact.
// The all-hold assignment is always included, displacing the lowest-ranked
// candidate if needed; k = 1 returns the proposal's modal assignment (the
// one exception to the all-hold guarantee). Orders in `pins` are forced into
// every candidate (including all-hold and modal) and excluded from the
// likelihood; used to condition on an agreement. Deterministic given seed.
std::vector<CandidateAssignment> sample_candidates(const MapGraph& map, const GameState& state,
                                                   const std::string& power, std::size_t k,
                                                   const PolicyProposal& proposal,
                                                   std::uint64_t seed, std::size_t m = 256,
                                                   const std::map<std::string, Order>& pins = {});

// Matrix subgame rooted at one state: participating powers' candidate lists,
// the payoff tensor, and the background orders that every unit of a
// non-participating power plays in every cell (its proposal-modal order).
struct SubgameMatrix {
    GameState state;
    std::vector<std::string> powers; // participating, ascending
    std::vector<std::vector<CandidateAssignment>> candidates;
    std::map<std::string, Order> background;
    double gamma = 0.99;
    MatrixGame game;

    // Full joint action of one cell: candidate orders plus background.
    JointAction cell_action(const std::vector<std::size_t>& cell) const;
};

// Adjudicates every cell once; payoff per power = reward(state) + gamma *
// value_fn(successor). Cells are independent, so Exec::parallel fans them
// out. Throws ValidationError for empty or duplicate candidate lists,
// assignments that do not cover exactly the power's units, or illegal
// orders.
SubgameMatrix build_subgame(const MapGraph& map, const GameState& state,
                            const std::map<std::string, std::vector<CandidateAssignment>>& candidates,
                            const ValueFunction& value_fn, double gamma = 0.99,
                            const PolicyProposal& proposal = {}, Exec exec = Exec::parallel);

// One bootstrap step per participating power toward
//   target = r(s) + gamma * sum_a sigma(a) V(T(s, a)),
// the expectation taken under the product of the solution's averaged
// strategies: tabular mode stores the exact blend (1 - beta) V(s) + beta *
// target; linear mode takes one gradient step of the squared error toward
// the same blend. beta must lie in (0, 1].
ValueFunction dora_update(const ValueFunction& value_fn, const MapGraph& map,
                          const SubgameMatrix& matrix, const SubgameSolution& solution,
                          double beta, double learning_rate = 0.1);

struct EquilibriumConfig {
    std::size_t k = 8;        // candidates kept per power
    std::size_t m = 256;      // proposal samples drawn before dedupe
    std::size_t iters = 2000; // regret-matching iterations
    double gamma = 0.99;
    double beta = 0.1;
    double learning_rate = 0.1;
    int horizon = 8; // rounds per self-play episode
    bool tabular = false;
    PolicyProposal proposal;
    Exec exec = Exec::parallel;
};

// Self-play value learning: from the starting position, repeatedly sample
// candidates for every power, solve the subgame, apply dora_update, then
// step the state with a joint action drawn from the averaged strategies,
// until the horizon; `episodes` such rollouts. Deterministic given seed.
ValueFunction train_values(const MapGraph& map, std::size_t episodes,
                           const EquilibriumConfig& config = {}, std::uint64_t seed = 0);

// One joint action with its probability under the solved subgame.
struct JointOutcome {
    JointAction action;
    double p = 0.0;
};

// Joint-action distribution conditioned on both sides honoring the
// agreement: u1 is pinned to a1 and u2 to a2 in every candidate of their
// owners, the subgame over all powers is solved, and the product
// distribution over candidate profiles is returned, descending by
// probability (canonical-notation tie-break). Every support element assigns
// a1 to u1 and a2 to u2. Throws ValidationError when the pinned orders are
// illegal at the play's last state or the units are not owned as claimed.
std::vector<JointOutcome> conditioned_joint_distribution(const Play& play,
                                                         const Agreement& agreement,
                                                         const ValueFunction& value_fn,
                                                         const EquilibriumConfig& config,
                                                         std::uint64_t seed);

} // namespace coalition
