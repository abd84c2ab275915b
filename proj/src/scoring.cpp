#include "coalition/scoring.hpp"

#include <algorithm>
#include <utility>

#include "coalition/engine.hpp"
#include "coalition/errors.hpp"
#include "coalition/parallel.hpp"
#include "coalition/rng.hpp"

namespace coalition {

namespace {

void check_half(const MapGraph& map, const GameState& state, const std::string& unit,
                const std::string& power, const Order& order, const char* op) {
    auto it = state.units.find(unit);
    if (it == state.units.end() || it->second.power != power)
        throw ValidationError(std::string(op) + ": unit '" + unit + "' is not owned by " + power);
    if (!is_legal_order(map, state, unit, order))
        throw ValidationError(std::string(op) + ": illegal agreement order '" +
                              format_order(state, unit, order) + "' for unit '" + unit + "'");
}

// Canonical identity of a candidate inside its set; also the tie-break key.
std::string candidate_key(const GameState& state, const Agreement& a) {
    return format_order(state, a.u1, a.a1) + "|" + format_order(state, a.u2, a.a2);
}

// Min-max to [0,1]; a constant column carries no ranking signal and maps to 1.
void normalize(std::vector<ScoredAgreement>& scored, double ScoredAgreement::*raw,
               double ScoredAgreement::*hat) {
    double lo = scored.front().*raw, hi = lo;
    for (const auto& s : scored) {
        lo = std::min(lo, s.*raw);
        hi = std::max(hi, s.*raw);
    }
    for (auto& s : scored) s.*hat = hi > lo ? (s.*raw - lo) / (hi - lo) : 1.0;
}

} // namespace

double agreement_value(const Play& play, const Agreement& agreement,
                       const ValueFunction& value_fn, const EquilibriumConfig& config,
                       const std::string& perspective, std::uint64_t seed) {
    if (perspective != agreement.power_i && perspective != agreement.power_j)
        throw ValidationError("agreement value: '" + perspective +
                              "' is not a party to the agreement");
    const auto outcomes = conditioned_joint_distribution(play, agreement, value_fn, config, seed);
    const MapGraph& map = *play.map;
    const GameState& state = play.last_state();
    double value = 0.0;
    for (const auto& outcome : outcomes) {
        const GameState next = adjudicate(map, state, outcome.action);
        value += outcome.p * value_fn.evaluate(map, next, perspective);
    }
    return value;
}

double perceived_value(const HypergameView& view, const IntentBackend& backend,
                       const Agreement& agreement, const std::string& of) {
    std::string unit;
    Order order;
    if (of == agreement.power_j) {
        unit = agreement.u2;
        order = agreement.a2;
    } else if (of == agreement.power_i) {
        unit = agreement.u1;
        order = agreement.a1;
    } else {
        throw ValidationError("perceived value: '" + of + "' is not a party to the agreement");
    }
    const GameState& state = view.last_state();
    auto it = state.units.find(unit);
    if (it == state.units.end() || it->second.power != of)
        throw ValidationError("perceived value: unit '" + unit + "' is not owned by " + of);

    const ActionDistribution dist = backend.intent_distribution(view, of, unit, true);
    double mass = 0.0;
    for (const auto& entry : dist.support)
        if (entry.order == order) mass += entry.p;
    return mass;
}

std::vector<ScoredAgreement> score_agreement_set(const Play& play,
                                                 const std::vector<Agreement>& candidates,
                                                 const ValueFunction& value_fn,
                                                 const IntentBackend& backend,
                                                 const ScoringConfig& config) {
    if (candidates.empty()) throw ValidationError("scoring: empty candidate set");
    if (!play.map) throw ValidationError("scoring: play has no map");
    const MapGraph& map = *play.map;
    const GameState& state = play.last_state();

    const Agreement& first = candidates.front();
    for (const auto& c : candidates)
        if (c.power_i != first.power_i || c.power_j != first.power_j || c.round != first.round)
            throw ValidationError("scoring: candidates must share one power pair and round");
    if (first.power_i == first.power_j)
        throw ValidationError("scoring: agreement powers must differ");
    // Everything the parallel pass needs is validated here; the subgame
    // solves involve every map power, so coverage is checked up front.
    for (const auto& power : map.powers)
        if (std::find(value_fn.powers().begin(), value_fn.powers().end(), power) ==
            value_fn.powers().end())
            throw ValidationError("scoring: value function does not cover power '" + power + "'");
    for (const auto& c : candidates) {
        check_half(map, state, c.u1, c.power_i, c.a1, "scoring");
        check_half(map, state, c.u2, c.power_j, c.a2, "scoring");
    }

    const std::size_t n = candidates.size();
    std::vector<ScoredAgreement> scored(n);
    std::vector<std::string> keys(n);
    const HypergameView view = filter_view(play, first.power_i, first.power_j);
    for (std::size_t i = 0; i < n; ++i) {
        scored[i].agreement = candidates[i];
        keys[i] = candidate_key(state, candidates[i]);
        // backends may do I/O and need not be thread safe: keep them serial
        scored[i].b_ji = perceived_value(view, backend, candidates[i], first.power_j);
        scored[i].b_ij = perceived_value(view, backend, candidates[i], first.power_i);
    }

    // Common random numbers: every candidate's conditioned solve runs from
    // the same seed, so the sampled opposition is held fixed and value
    // differences across the set isolate the pinned orders. This also keeps
    // scores independent of candidate input order.
    EquilibriumConfig inner = config.equilibrium;
    inner.exec = Exec::serial;
    for_each_index(n, config.exec, [&](std::size_t i) {
        const auto outcomes =
            conditioned_joint_distribution(play, candidates[i], value_fn, inner, config.seed);
        double v_i = 0.0, v_j = 0.0;
        for (const auto& outcome : outcomes) {
            const GameState next = adjudicate(map, state, outcome.action);
            v_i += outcome.p * value_fn.evaluate(map, next, first.power_i);
            v_j += outcome.p * value_fn.evaluate(map, next, first.power_j);
        }
        scored[i].v_i = v_i;
        scored[i].v_j = v_j;
    });

    normalize(scored, &ScoredAgreement::v_i, &ScoredAgreement::v_hat_i);
    normalize(scored, &ScoredAgreement::v_j, &ScoredAgreement::v_hat_j);
    for (auto& s : scored) {
        s.wt_i = s.v_hat_i * s.b_ji;
        s.wt_j = s.v_hat_j * s.b_ij;
        s.wt = s.wt_i * s.wt_j;
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].wt != scored[b].wt) return scored[a].wt > scored[b].wt;
        return keys[a] < keys[b];
    });
    std::vector<ScoredAgreement> ranked;
    ranked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ranked.push_back(std::move(scored[order[i]]));
        ranked.back().rank = i;
    }
    return ranked;
}

AgreementAlternatives sample_alternatives(const MapGraph& map, const GameState& state,
                                          const Agreement& agreement, std::size_t k,
                                          std::uint64_t seed) {
    if (k == 0) throw ValidationError("alternatives: k must be >= 1");
    check_half(map, state, agreement.u1, agreement.power_i, agreement.a1, "alternatives");
    check_half(map, state, agreement.u2, agreement.power_j, agreement.a2, "alternatives");

    const auto legal1 = legal_orders(map, state, agreement.u1);
    const auto legal2 = legal_orders(map, state, agreement.u2);
    std::vector<Agreement> pool;
    pool.reserve(legal1.size() * legal2.size());
    for (const auto& o1 : legal1)
        for (const auto& o2 : legal2) {
            if (o1 == agreement.a1 && o2 == agreement.a2) continue;
            Agreement alt = agreement;
            alt.a1 = o1;
            alt.a2 = o2;
            pool.push_back(std::move(alt));
        }

    Rng rng(seed);
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.bounded(i)]);

    AgreementAlternatives out;
    out.exhausted = pool.size() < k;
    if (pool.size() > k) pool.resize(k);
    out.candidates.reserve(pool.size() + 1);
    out.candidates.push_back(agreement);
    out.candidates.insert(out.candidates.end(), pool.begin(), pool.end());
    return out;
}

} // namespace coalition
