#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coalition/equilibrium.hpp"
#include "coalition/graph.hpp"
#include "coalition/intent.hpp"
#include "coalition/map.hpp"
#include "coalition/play.hpp"

namespace coalition {

// An agreement with every component of its rationalizability score.
//   v_i, v_j        expected successor value for each party, conditioned on
//                   both sides honoring the agreement
//   v_hat_i, v_hat_j  the same values min-max normalized across the
//                   candidate set (a constant set normalizes to all 1.0)
//   b_ji            the honoring mass i ascribes to j: how much of j's
//                   dialogue-conditioned intent for u2 lands on a2
//   b_ij            symmetric, j's perception of i
//   wt_i = v_hat_i * b_ji, wt_j = v_hat_j * b_ij, wt = wt_i * wt_j
// All components lie in [0, 1]; rank is the 0-based position after sorting
// by descending wt (ties broken by ascending canonical order notation).
struct ScoredAgreement {
    Agreement agreement;
    double v_i = 0.0, v_j = 0.0;
    double v_hat_i = 0.0, v_hat_j = 0.0;
    double b_ji = 0.0, b_ij = 0.0;
    double wt_i = 0.0, wt_j = 0.0, wt = 0.0;
    std::size_t rank = 0;
};

struct ScoringConfig {
    EquilibriumConfig equilibrium;
    std::uint64_t seed = 0;
    // Candidates are the parallel axis; each candidate's subgame runs
    // serially inside its slot.
    Exec exec = Exec::parallel;
};

// Expected value of the agreement for one party: the mean successor value
// under the joint-action distribution conditioned on both sides honoring.
// perspective must be one of the agreement's powers.
double agreement_value(const Play& play, const Agreement& agreement,
                       const ValueFunction& value_fn, const EquilibriumConfig& config,
                       const std::string& perspective, std::uint64_t seed = 0);

// Honoring mass `of` puts on its half of the agreement under the
// dialogue-conditioned intent distribution of the view. of must be one of
// the agreement's powers and own the corresponding unit.
double perceived_value(const HypergameView& view, const IntentBackend& backend,
                       const Agreement& agreement, const std::string& of);

// Scores a candidate set sharing one (power pair, round): conditioned values
// per candidate, min-max normalization across the set, honoring masses from
// the backend, and the composed weights, ranked by descending wt.
// Deterministic given config.seed regardless of execution mode or candidate
// input order (up to the final sort).
std::vector<ScoredAgreement> score_agreement_set(const Play& play,
                                                 const std::vector<Agreement>& candidates,
                                                 const ValueFunction& value_fn,
                                                 const IntentBackend& backend,
                                                 const ScoringConfig& config = {});

// Candidate universe for ranking experiments: the original agreement first,
// then up to k distinct alternatives drawn without replacement from the
// legal (a1, a2) cross-product minus the original. exhausted reports that
// fewer than k alternatives exist (all of them are then returned).
struct AgreementAlternatives {
    std::vector<Agreement> candidates;
    bool exhausted = false;
};

AgreementAlternatives sample_alternatives(const MapGraph& map, const GameState& state,
                                          const Agreement& agreement, std::size_t k,
                                          std::uint64_t seed);

} // namespace coalition
