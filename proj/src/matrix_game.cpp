#include "coalition/matrix_game.hpp"

#include <algorithm>

#include "coalition/errors.hpp"

namespace coalition {

std::size_t MatrixGame::cell_count() const {
    std::size_t n = 1;
    for (std::size_t c : counts) n *= c;
    return n;
}

std::size_t MatrixGame::flat_index(const std::vector<std::size_t>& cell) const {
    std::size_t flat = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) flat = flat * counts[p] + cell[p];
    return flat;
}

std::vector<std::size_t> MatrixGame::unflatten(std::size_t flat) const {
    std::vector<std::size_t> cell(counts.size(), 0);
    for (std::size_t p = counts.size(); p-- > 0;) {
        cell[p] = flat % counts[p];
        flat /= counts[p];
    }
    return cell;
}

void validate_matrix(const MatrixGame& game) {
    if (game.powers.empty()) throw ValidationError("matrix game: no powers");
    if (game.counts.size() != game.powers.size())
        throw ValidationError("matrix game: counts do not match powers");
    for (std::size_t c : game.counts)
        if (c == 0) throw ValidationError("matrix game: empty candidate list");
    if (game.payoffs.size() != game.cell_count())
        throw ValidationError("matrix game: payoff tensor incomplete");
    for (const auto& cell : game.payoffs)
        if (cell.size() != game.powers.size())
            throw ValidationError("matrix game: payoff cell missing a power");
}

namespace {

void check_strategies(const MatrixGame& game,
                      const std::vector<std::vector<double>>& strategies) {
    if (strategies.size() != game.powers.size())
        throw ValidationError("matrix game: strategy profile does not match powers");
    for (std::size_t p = 0; p < strategies.size(); ++p)
        if (strategies[p].size() != game.counts[p])
            throw ValidationError("matrix game: strategy length does not match candidates");
}

// u[c] = expected payoff for power p playing candidate c while everyone else
// follows `strategies`; one pass over the tensor with an odometer cell index.
std::vector<double> candidate_values(const MatrixGame& game, std::size_t p,
                                     const std::vector<std::vector<double>>& strategies) {
    std::vector<double> u(game.counts[p], 0.0);
    const std::size_t np = game.counts.size();
    const std::size_t n = game.cell_count();
    std::vector<std::size_t> cell(np, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        double w = 1.0;
        for (std::size_t q = 0; q < np; ++q)
            if (q != p) w *= strategies[q][cell[q]];
        u[cell[p]] += w * game.payoffs[flat][p];
        for (std::size_t q = np; q-- > 0;) {
            if (++cell[q] < game.counts[q]) break;
            cell[q] = 0;
        }
    }
    return u;
}

} // namespace

double response_value(const MatrixGame& game, std::size_t power, std::size_t candidate,
                      const std::vector<std::vector<double>>& strategies) {
    validate_matrix(game);
    check_strategies(game, strategies);
    if (power >= game.powers.size() || candidate >= game.counts[power])
        throw ValidationError("matrix game: power or candidate index out of range");
    return candidate_values(game, power, strategies)[candidate];
}

double exploitability(const MatrixGame& game,
                      const std::vector<std::vector<double>>& strategies) {
    validate_matrix(game);
    check_strategies(game, strategies);
    double worst = 0.0;
    for (std::size_t p = 0; p < game.powers.size(); ++p) {
        std::vector<double> u = candidate_values(game, p, strategies);
        double achieved = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) achieved += strategies[p][c] * u[c];
        double best = *std::max_element(u.begin(), u.end());
        worst = std::max(worst, best - achieved);
    }
    return std::max(worst, 0.0);
}

SubgameSolution regret_matching(const MatrixGame& game, std::size_t iters, std::uint64_t) {
    validate_matrix(game);
    if (iters == 0) throw ValidationError("regret matching: iters must be >= 1");

    const std::size_t np = game.powers.size();
    std::vector<std::vector<double>> regrets(np), current(np), sums(np);
    for (std::size_t p = 0; p < np; ++p) {
        regrets[p].assign(game.counts[p], 0.0);
        current[p].assign(game.counts[p], 1.0 / static_cast<double>(game.counts[p]));
        sums[p].assign(game.counts[p], 0.0);
    }

    for (std::size_t t = 0; t < iters; ++t) {
        // All powers update simultaneously: strategies for this iteration are
        // fixed from the regrets before any of this iteration's payoffs land.
        for (std::size_t p = 0; p < np; ++p) {
            double positive = 0.0;
            for (double r : regrets[p]) positive += std::max(r, 0.0);
            if (positive > 0.0) {
                for (std::size_t c = 0; c < game.counts[p]; ++c)
                    current[p][c] = std::max(regrets[p][c], 0.0) / positive;
            } else {
                std::fill(current[p].begin(), current[p].end(),
                          1.0 / static_cast<double>(game.counts[p]));
            }
        }
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<double> u = candidate_values(game, p, current);
            double achieved = 0.0;
            for (std::size_t c = 0; c < game.counts[p]; ++c) achieved += current[p][c] * u[c];
            for (std::size_t c = 0; c < game.counts[p]; ++c) {
                regrets[p][c] += u[c] - achieved;
                sums[p][c] += current[p][c];
            }
        }
    }

    SubgameSolution solution;
    solution.iterations = iters;
    solution.strategies.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        solution.strategies[p].resize(game.counts[p]);
        for (std::size_t c = 0; c < game.counts[p]; ++c)
            solution.strategies[p][c] = sums[p][c] / static_cast<double>(iters);
    }
    solution.exploitability = exploitability(game, solution.strategies);
    return solution;
}

} // namespace coalition
