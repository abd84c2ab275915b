#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace coalition {

// N-player normal-form game over per-power candidate lists referenced by
// index. The payoff tensor is flat with the last power's index varying
// fastest; payoffs[cell][p] is power p's payoff in that cell.
struct MatrixGame {
    std::vector<std::string> powers;
    std::vector<std::size_t> counts;          // candidates per power, all >= 1
    std::vector<std::vector<double>> payoffs; // one entry per cell, one value per power

    std::size_t cell_count() const;
    std::size_t flat_index(const std::vector<std::size_t>& cell) const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;
};

// Shape check: one count per power, every count >= 1, tensor complete with a
// payoff per power in every cell. Throws ValidationError.
void validate_matrix(const MatrixGame& game);

// Time-averaged regret-matching strategies, one distribution per power.
struct SubgameSolution {
    std::vector<std::vector<double>> strategies;
    std::size_t iterations = 0;
    // max over powers of best-response payoff minus achieved payoff
    double exploitability = 0.0;
};

// Expected payoff for powers[power] playing `candidate` against everyone
// else mixing per `strategies` (the power's own row is ignored).
double response_value(const MatrixGame& game, std::size_t power, std::size_t candidate,
                      const std::vector<std::vector<double>>& strategies);

// max over powers of (best pure-response payoff - achieved payoff), floored
// at zero against rounding. Strategies must be one distribution per power.
double exploitability(const MatrixGame& game,
                      const std::vector<std::vector<double>>& strategies);

// Simultaneous-update regret matching from uniform initial play: each
// iteration every power plays proportionally to its positive cumulative
// regrets (uniform when none are positive) against the others' current
// strategies, then accumulates instantaneous regrets against its expected
// payoff. The iterates are exact expectations, so the dynamics are
// deterministic; the seed is accepted for interface stability and unused.
// Throws ValidationError for iters == 0 or a malformed game.
SubgameSolution regret_matching(const MatrixGame& game, std::size_t iters,
                                std::uint64_t seed = 0);

} // namespace coalition
