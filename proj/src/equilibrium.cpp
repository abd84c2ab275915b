#include "coalition/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coalition/errors.hpp"
#include "coalition/rng.hpp"
#include "order_scores.hpp"

namespace coalition {

namespace {

// Canonical identity of an order assignment at one state. Unit ids ascend
// because the orders live in a std::map.
std::string assignment_key(const GameState& state, const std::map<std::string, Order>& orders) {
    std::string key;
    for (const auto& [unit, order] : orders) {
        key += unit;
        key += '=';
        key += format_order(state, unit, order);
        key += ';';
    }
    return key;
}

} // namespace

const std::vector<std::string>& ValueFunction::feature_names() {
    static const std::vector<std::string> names{"bias", "sc_share", "unit_share", "centrality",
                                                "sc_distance"};
    return names;
}

std::vector<double> ValueFunction::features(const MapGraph& map, const GameState& state,
                                            const std::string& power) {
    if (!map.has_power(power))
        throw ValidationError("value function: unknown power '" + power + "'");

    double total_sc = 0.0, owned = 0.0;
    for (const auto& [id, info] : map.provinces)
        if (info.supply_center) total_sc += 1.0;
    for (const auto& [prov, owner] : state.sc_ownership)
        if (owner == power) owned += 1.0;
    const double sc_share = total_sc > 0.0 ? owned / total_sc : 0.0;

    std::size_t max_degree = 0;
    for (const auto& [id, neighbours] : map.adjacency)
        max_degree = std::max(max_degree, neighbours.size());
    const auto centers = map.supply_centers();
    const int diameter = map.diameter();

    double mine = 0.0, centrality = 0.0, sc_distance = 0.0;
    for (const auto& [id, unit] : state.units) {
        if (unit.power != power) continue;
        mine += 1.0;
        if (max_degree > 0) {
            auto it = map.adjacency.find(unit.province);
            const std::size_t degree = it == map.adjacency.end() ? 0 : it->second.size();
            centrality += static_cast<double>(degree) / static_cast<double>(max_degree);
        }
        if (!centers.empty() && diameter > 0) {
            int best = -1;
            for (const auto& sc : centers) {
                const int d = map.distance(unit.province, sc);
                if (d >= 0 && (best < 0 || d < best)) best = d;
            }
            const double hops = best < 0 ? static_cast<double>(diameter) : static_cast<double>(best);
            sc_distance += hops / static_cast<double>(diameter);
        }
    }
    const double unit_share =
        state.units.empty() ? 0.0 : mine / static_cast<double>(state.units.size());
    if (mine > 0.0) {
        centrality /= mine;
        sc_distance /= mine;
    }
    return {1.0, sc_share, unit_share, centrality, sc_distance};
}

ValueFunction ValueFunction::linear(const MapGraph& map) {
    ValueFunction fn;
    fn.powers_ = map.powers;
    std::sort(fn.powers_.begin(), fn.powers_.end());
    for (const auto& p : fn.powers_)
        fn.weights_[p] = std::vector<double>(feature_names().size(), 0.0);
    return fn;
}

ValueFunction ValueFunction::tabular(const MapGraph& map) {
    ValueFunction fn;
    fn.tabular_ = true;
    fn.powers_ = map.powers;
    std::sort(fn.powers_.begin(), fn.powers_.end());
    for (const auto& p : fn.powers_) fn.table_[p];
    return fn;
}

double ValueFunction::raw(const MapGraph& map, const GameState& state,
                          const std::string& power) const {
    if (std::find(powers_.begin(), powers_.end(), power) == powers_.end())
        throw ValidationError("value function: unknown power '" + power + "'");
    if (tabular_) {
        auto pit = table_.find(power);
        if (pit == table_.end()) return 0.0;
        auto it = pit->second.find(state_key(state));
        return it == pit->second.end() ? 0.0 : it->second;
    }
    const auto phi = features(map, state, power);
    const auto& w = weights_.at(power);
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * phi[i];
    return v;
}

double ValueFunction::evaluate(const MapGraph& map, const GameState& state,
                               const std::string& power) const {
    return std::clamp(raw(map, state, power), 0.0, 1.0);
}

void ValueFunction::set_value(const GameState& state, const std::string& power, double v) {
    if (!tabular_) throw ValidationError("value function: set_value requires tabular mode");
    if (std::find(powers_.begin(), powers_.end(), power) == powers_.end())
        throw ValidationError("value function: unknown power '" + power + "'");
    table_[power][state_key(state)] = v;
}

const std::vector<double>& ValueFunction::weights(const std::string& power) const {
    if (tabular_) throw ValidationError("value function: weights require linear mode");
    auto it = weights_.find(power);
    if (it == weights_.end())
        throw ValidationError("value function: unknown power '" + power + "'");
    return it->second;
}

void ValueFunction::set_weights(const std::string& power, std::vector<double> w) {
    if (tabular_) throw ValidationError("value function: weights require linear mode");
    if (weights_.find(power) == weights_.end())
        throw ValidationError("value function: unknown power '" + power + "'");
    if (w.size() != feature_names().size())
        throw ValidationError("value function: expected " +
                              std::to_string(feature_names().size()) + " weights");
    weights_[power] = std::move(w);
}

ValueFunction ValueFunction::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("value function: ") + e.what());
    }
    ValueFunction fn;
    try {
        fn.powers_ = doc.at("powers").get<std::vector<std::string>>();
        if (fn.powers_.empty()) throw ParseError("value function: no powers");
        if (std::set<std::string>(fn.powers_.begin(), fn.powers_.end()).size() !=
            fn.powers_.size())
            throw ParseError("value function: duplicate power");
        const auto features = doc.at("features").get<std::vector<std::string>>();
        if (features != feature_names())
            throw ParseError("value function: unexpected feature list");
        fn.gamma_ = doc.at("gamma").get<double>();
        if (!(fn.gamma_ > 0.0 && fn.gamma_ <= 1.0))
            throw ParseError("value function: gamma must be in (0, 1]");

        const std::string mode = doc.value("mode", "linear");
        if (mode == "tabular") {
            fn.tabular_ = true;
            const auto& table = doc.at("table");
            for (const auto& power : fn.powers_) {
                if (!table.contains(power))
                    throw ParseError("value function: table missing power '" + power + "'");
                auto& entries = fn.table_[power];
                for (const auto& [key, value] : table.at(power).items()) {
                    const double v = value.get<double>();
                    if (!std::isfinite(v))
                        throw ParseError("value function: non-finite table value");
                    entries[key] = v;
                }
            }
            if (table.size() != fn.powers_.size())
                throw ParseError("value function: table lists an unknown power");
        } else if (mode == "linear") {
            const auto& weights = doc.at("weights");
            for (const auto& power : fn.powers_) {
                if (!weights.contains(power))
                    throw ParseError("value function: weights missing power '" + power + "'");
                auto w = weights.at(power).get<std::vector<double>>();
                if (w.size() != feature_names().size())
                    throw ParseError("value function: wrong weight count for '" + power + "'");
                for (double v : w)
                    if (!std::isfinite(v)) throw ParseError("value function: non-finite weight");
                fn.weights_[power] = std::move(w);
            }
            if (weights.size() != fn.powers_.size())
                throw ParseError("value function: weights list an unknown power");
        } else {
            throw ParseError("value function: unknown mode '" + mode + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("value function: ") + e.what());
    }
    return fn;
}

ValueFunction ValueFunction::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("value function: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string ValueFunction::to_json() const {
    nlohmann::json doc;
    doc["powers"] = powers_;
    doc["features"] = feature_names();
    doc["gamma"] = gamma_;
    if (tabular_) {
        doc["mode"] = "tabular";
        nlohmann::json table = nlohmann::json::object();
        for (const auto& power : powers_) {
            nlohmann::json entries = nlohmann::json::object();
            auto it = table_.find(power);
            if (it != table_.end())
                for (const auto& [key, v] : it->second) entries[key] = v;
            table[power] = std::move(entries);
        }
        doc["table"] = std::move(table);
    } else {
        nlohmann::json weights = nlohmann::json::object();
        for (const auto& power : powers_) weights[power] = weights_.at(power);
        doc["weights"] = std::move(weights);
    }
    return doc.dump(2);
}

void ValueFunction::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("value function: cannot write '" + path + "'");
    out << to_json() << '\n';
}

ActionDistribution proposal_distribution(const MapGraph& map, const GameState& state,
                                         const std::string& unit,
                                         const PolicyProposal& proposal) {
    auto it = state.units.find(unit);
    if (it == state.units.end())
        throw ValidationError("proposal: unknown unit '" + unit + "'");
    return make_distribution(
        map, state, unit,
        detail::heuristic_support(map, state, it->second.power, unit, proposal.params, {}));
}

std::vector<CandidateAssignment> sample_candidates(const MapGraph& map, const GameState& state,
                                                   const std::string& power, std::size_t k,
                                                   const PolicyProposal& proposal,
                                                   std::uint64_t seed, std::size_t m,
                                                   const std::map<std::string, Order>& pins) {
    if (!map.has_power(power))
        throw ValidationError("candidates: unknown power '" + power + "'");
    if (k == 0) throw ValidationError("candidates: k must be >= 1");
    if (m == 0) throw ValidationError("candidates: m must be >= 1");
    for (const auto& [unit, order] : pins) {
        auto it = state.units.find(unit);
        if (it == state.units.end() || it->second.power != power)
            throw ValidationError("candidates: pinned unit '" + unit + "' is not owned by " +
                                  power);
        if (!is_legal_order(map, state, unit, order))
            throw ValidationError("candidates: illegal pinned order '" +
                                  format_order(state, unit, order) + "' for unit '" + unit +
                                  "'");
    }

    std::vector<std::string> free_units;
    std::vector<ActionDistribution> dists;
    for (const auto& [unit, info] : state.units) {
        if (info.power != power || pins.count(unit)) continue;
        free_units.push_back(unit);
        dists.push_back(proposal_distribution(map, state, unit, proposal));
    }

    auto with_pins = [&](std::map<std::string, Order> orders) {
        for (const auto& [unit, order] : pins) orders[unit] = order;
        return orders;
    };
    // Log-likelihood covers the free units only; pins contribute the same
    // constant factor everywhere, so rankings are unaffected.
    auto finish = [&](std::map<std::string, Order> orders) {
        CandidateAssignment cand;
        for (std::size_t i = 0; i < free_units.size(); ++i) {
            const Order& o = orders.at(free_units[i]);
            for (const auto& e : dists[i].support)
                if (e.order == o) {
                    cand.log_likelihood += std::log(e.p);
                    break;
                }
        }
        cand.orders = std::move(orders);
        cand.key = assignment_key(state, cand.orders);
        return cand;
    };

    if (k == 1) {
        std::map<std::string, Order> orders;
        for (std::size_t i = 0; i < free_units.size(); ++i)
            orders[free_units[i]] = top_action(dists[i]).order;
        return {finish(with_pins(std::move(orders)))};
    }

    std::map<std::string, CandidateAssignment> pool;
    std::size_t space = 1;
    for (const auto& d : dists) {
        space *= d.support.size();
        if (space > m) break; // only the <= m comparison matters; avoids overflow
    }
    if (space <= m) {
        std::vector<std::size_t> idx(dists.size(), 0);
        for (;;) {
            std::map<std::string, Order> orders;
            for (std::size_t i = 0; i < free_units.size(); ++i)
                orders[free_units[i]] = dists[i].support[idx[i]].order;
            auto cand = finish(with_pins(std::move(orders)));
            pool.emplace(cand.key, std::move(cand));
            std::size_t i = idx.size();
            while (i-- > 0) {
                if (++idx[i] < dists[i].support.size()) break;
                idx[i] = 0;
            }
            if (i == static_cast<std::size_t>(-1)) break;
        }
    } else {
        Rng rng(seed);
        for (std::size_t s = 0; s < m; ++s) {
            std::map<std::string, Order> orders;
            for (std::size_t i = 0; i < free_units.size(); ++i) {
                const double r = rng.real();
                double acc = 0.0;
                const auto& support = dists[i].support;
                const WeightedOrder* pick = &support.back();
                for (const auto& e : support) {
                    acc += e.p;
                    if (r < acc) {
                        pick = &e;
                        break;
                    }
                }
                orders[free_units[i]] = pick->order;
            }
            auto cand = finish(with_pins(std::move(orders)));
            pool.emplace(cand.key, std::move(cand));
        }
    }

    std::vector<CandidateAssignment> ranked;
    ranked.reserve(pool.size());
    for (auto& [key, cand] : pool) ranked.push_back(std::move(cand));
    auto better = [](const CandidateAssignment& a, const CandidateAssignment& b) {
        if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
        return a.key < b.key;
    };
    std::sort(ranked.begin(), ranked.end(), better);
    if (ranked.size() > k) ranked.resize(k);

    std::map<std::string, Order> holds;
    for (const auto& u : free_units) holds[u] = make_hold();
    auto all_hold = finish(with_pins(std::move(holds)));
    const bool present = std::any_of(ranked.begin(), ranked.end(), [&](const auto& c) {
        return c.key == all_hold.key;
    });
    if (!present) {
        if (ranked.size() == k) ranked.pop_back();
        ranked.push_back(std::move(all_hold));
        std::sort(ranked.begin(), ranked.end(), better);
    }
    return ranked;
}

JointAction SubgameMatrix::cell_action(const std::vector<std::size_t>& cell) const {
    JointAction joint;
    joint.orders = background;
    for (std::size_t p = 0; p < powers.size(); ++p)
        for (const auto& [unit, order] : candidates[p][cell[p]].orders)
            joint.orders[unit] = order;
    return joint;
}

SubgameMatrix build_subgame(
    const MapGraph& map, const GameState& state,
    const std::map<std::string, std::vector<CandidateAssignment>>& candidates,
    const ValueFunction& value_fn, double gamma, const PolicyProposal& proposal, Exec exec) {
    if (candidates.empty()) throw ValidationError("subgame: no participating powers");
    if (!(gamma >= 0.0)) throw ValidationError("subgame: gamma must be >= 0");

    SubgameMatrix matrix;
    matrix.state = state;
    matrix.gamma = gamma;
    for (const auto& [power, list] : candidates) {
        if (!map.has_power(power))
            throw ValidationError("subgame: unknown power '" + power + "'");
        if (std::find(value_fn.powers().begin(), value_fn.powers().end(), power) ==
            value_fn.powers().end())
            throw ValidationError("subgame: value function does not cover power '" + power + "'");
        if (list.empty())
            throw ValidationError("subgame: empty candidate list for " + power);
        std::set<std::string> own;
        for (const auto& [unit, info] : state.units)
            if (info.power == power) own.insert(unit);
        std::set<std::string> seen;
        for (const auto& cand : list) {
            for (const auto& [unit, order] : cand.orders) {
                if (!own.count(unit))
                    throw ValidationError("subgame: candidate for " + power +
                                          " orders foreign unit '" + unit + "'");
                if (!is_legal_order(map, state, unit, order))
                    throw ValidationError("subgame: illegal candidate order '" +
                                          format_order(state, unit, order) + "'");
            }
            if (cand.orders.size() != own.size())
                throw ValidationError("subgame: candidate for " + power +
                                      " does not cover every unit");
            // identity recomputed from content so stale keys cannot mask duplicates
            if (!seen.insert(assignment_key(state, cand.orders)).second)
                throw ValidationError("subgame: duplicate candidate for " + power);
        }
        matrix.powers.push_back(power);
        matrix.candidates.push_back(list);
    }

    for (const auto& [unit, info] : state.units) {
        if (candidates.count(info.power)) continue;
        matrix.background[unit] = top_action(proposal_distribution(map, state, unit, proposal)).order;
    }

    matrix.game.powers = matrix.powers;
    for (const auto& list : matrix.candidates) matrix.game.counts.push_back(list.size());
    const std::size_t cells = matrix.game.cell_count();
    matrix.game.payoffs.assign(cells, {});
    const auto base = reward(map, state);
    for_each_index(cells, exec, [&](std::size_t flat) {
        const auto cell = matrix.game.unflatten(flat);
        const GameState next = adjudicate(map, state, matrix.cell_action(cell));
        std::vector<double> row(matrix.powers.size(), 0.0);
        for (std::size_t p = 0; p < matrix.powers.size(); ++p)
            row[p] =
                base.at(matrix.powers[p]) + gamma * value_fn.evaluate(map, next, matrix.powers[p]);
        matrix.game.payoffs[flat] = std::move(row);
    });
    return matrix;
}

ValueFunction dora_update(const ValueFunction& value_fn, const MapGraph& map,
                          const SubgameMatrix& matrix, const SubgameSolution& solution,
                          double beta, double learning_rate) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw ValidationError("dora update: beta must be in (0, 1]");
    validate_matrix(matrix.game);
    if (solution.strategies.size() != matrix.powers.size())
        throw ValidationError("dora update: solution does not match the subgame");
    for (std::size_t p = 0; p < solution.strategies.size(); ++p)
        if (solution.strategies[p].size() != matrix.game.counts[p])
            throw ValidationError("dora update: solution does not match the subgame");

    // The expected payoff under the product of averaged strategies is exactly
    // the bootstrap target r(s) + gamma * E_sigma[V(T(s, a))].
    std::vector<double> targets(matrix.powers.size(), 0.0);
    const std::size_t cells = matrix.game.cell_count();
    std::vector<std::size_t> cell(matrix.powers.size(), 0);
    for (std::size_t flat = 0; flat < cells; ++flat) {
        double w = 1.0;
        for (std::size_t q = 0; q < matrix.powers.size(); ++q)
            w *= solution.strategies[q][cell[q]];
        for (std::size_t p = 0; p < matrix.powers.size(); ++p)
            targets[p] += w * matrix.game.payoffs[flat][p];
        for (std::size_t q = matrix.powers.size(); q-- > 0;) {
            if (++cell[q] < matrix.game.counts[q]) break;
            cell[q] = 0;
        }
    }

    ValueFunction next = value_fn;
    for (std::size_t p = 0; p < matrix.powers.size(); ++p) {
        const std::string& power = matrix.powers[p];
        if (next.is_tabular()) {
            const double old = value_fn.raw(map, matrix.state, power);
            next.set_value(matrix.state, power, (1.0 - beta) * old + beta * targets[p]);
        } else {
            const auto phi = ValueFunction::features(map, matrix.state, power);
            std::vector<double> w = value_fn.weights(power);
            double pred = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) pred += w[i] * phi[i];
            // step toward the blend (1 - beta) pred + beta target, using the
            // raw prediction so a saturated clamp still learns
            const double residual = beta * (pred - targets[p]);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * residual * phi[i];
            next.set_weights(power, std::move(w));
        }
    }
    return next;
}

ValueFunction train_values(const MapGraph& map, std::size_t episodes,
                           const EquilibriumConfig& config, std::uint64_t seed) {
    if (episodes == 0) throw ValidationError("train values: episodes must be >= 1");
    if (config.horizon < 1) throw ValidationError("train values: horizon must be >= 1");
    if (!(config.beta > 0.0 && config.beta <= 1.0))
        throw ValidationError("train values: beta must be in (0, 1]");

    ValueFunction values =
        config.tabular ? ValueFunction::tabular(map) : ValueFunction::linear(map);
    values.set_gamma(config.gamma);

    std::vector<std::string> powers(map.powers);
    std::sort(powers.begin(), powers.end());

    for (std::size_t e = 0; e < episodes; ++e) {
        GameState state = initial_state(map);
        for (int t = 0; t < config.horizon; ++t) {
            std::map<std::string, std::vector<CandidateAssignment>> candidates;
            for (std::size_t pi = 0; pi < powers.size(); ++pi)
                candidates[powers[pi]] = sample_candidates(
                    map, state, powers[pi], config.k, config.proposal,
                    derive_seed(seed, {0xCA9D1DULL, e, static_cast<std::uint64_t>(t), pi}),
                    config.m);
            const SubgameMatrix matrix = build_subgame(map, state, candidates, values,
                                                       config.gamma, config.proposal, config.exec);
            const SubgameSolution solution = regret_matching(matrix.game, config.iters);
            values = dora_update(values, map, matrix, solution, config.beta,
                                 config.learning_rate);

            Rng step_rng(derive_seed(seed, {0x57E9ULL, e, static_cast<std::uint64_t>(t)}));
            std::vector<std::size_t> cell(matrix.powers.size(), 0);
            for (std::size_t p = 0; p < matrix.powers.size(); ++p) {
                const double r = step_rng.real();
                double acc = 0.0;
                cell[p] = solution.strategies[p].size() - 1;
                for (std::size_t c = 0; c < solution.strategies[p].size(); ++c) {
                    acc += solution.strategies[p][c];
                    if (r < acc) {
                        cell[p] = c;
                        break;
                    }
                }
            }
            state = adjudicate(map, state, matrix.cell_action(cell));
        }
    }
    return values;
}

std::vector<JointOutcome> conditioned_joint_distribution(const Play& play,
                                                         const Agreement& agreement,
                                                         const ValueFunction& value_fn,
                                                         const EquilibriumConfig& config,
                                                         std::uint64_t seed) {
    if (!play.map) throw ValidationError("conditioned distribution: play has no map");
    const MapGraph& map = *play.map;
    const GameState& state = play.last_state();
    if (agreement.power_i == agreement.power_j)
        throw ValidationError("conditioned distribution: agreement powers must differ");
    auto check_pin = [&](const std::string& unit, const std::string& power, const Order& order) {
        auto it = state.units.find(unit);
        if (it == state.units.end() || it->second.power != power)
            throw ValidationError("conditioned distribution: unit '" + unit +
                                  "' is not owned by " + power);
        if (!is_legal_order(map, state, unit, order))
            throw ValidationError("conditioned distribution: illegal pinned order '" +
                                  format_order(state, unit, order) + "' for unit '" + unit +
                                  "'");
    };
    check_pin(agreement.u1, agreement.power_i, agreement.a1);
    check_pin(agreement.u2, agreement.power_j, agreement.a2);

    std::vector<std::string> powers(map.powers);
    std::sort(powers.begin(), powers.end());
    std::map<std::string, std::vector<CandidateAssignment>> candidates;
    for (std::size_t pi = 0; pi < powers.size(); ++pi) {
        std::map<std::string, Order> pins;
        if (powers[pi] == agreement.power_i) pins[agreement.u1] = agreement.a1;
        if (powers[pi] == agreement.power_j) pins[agreement.u2] = agreement.a2;
        candidates[powers[pi]] =
            sample_candidates(map, state, powers[pi], config.k, config.proposal,
                              derive_seed(seed, {0xA96EEULL, pi}), config.m, pins);
    }
    const SubgameMatrix matrix =
        build_subgame(map, state, candidates, value_fn, config.gamma, config.proposal, config.exec);
    const SubgameSolution solution = regret_matching(matrix.game, config.iters, seed);

    std::vector<std::pair<std::string, JointOutcome>> decorated;
    const std::size_t cells = matrix.game.cell_count();
    decorated.reserve(cells);
    for (std::size_t flat = 0; flat < cells; ++flat) {
        const auto cell = matrix.game.unflatten(flat);
        double p = 1.0;
        for (std::size_t q = 0; q < matrix.powers.size(); ++q)
            p *= solution.strategies[q][cell[q]];
        if (p <= 0.0) continue;
        JointOutcome outcome{matrix.cell_action(cell), p};
        decorated.push_back({assignment_key(state, outcome.action.orders), std::move(outcome)});
    }
    std::sort(decorated.begin(), decorated.end(), [](const auto& a, const auto& b) {
        if (a.second.p != b.second.p) return a.second.p > b.second.p;
        return a.first < b.first;
    });
    std::vector<JointOutcome> outcomes;
    outcomes.reserve(decorated.size());
    for (auto& [key, outcome] : decorated) outcomes.push_back(std::move(outcome));
    return outcomes;
}

} // namespace coalition
