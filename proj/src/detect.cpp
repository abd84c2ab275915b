#include "coalition/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "coalition/engine.hpp"
#include "coalition/errors.hpp"

namespace coalition {

namespace {

using nlohmann::json;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Provinces an order involves for mention relevance. Support targets are
// unit ids; they contribute the supported unit's province.
std::set<std::string> involved_provinces(const GameState& state, const std::string& unit,
                                         const Order& order) {
    switch (order.type) {
    case OrderType::hold: return {state.units.at(unit).province};
    case OrderType::move: return {order.dest};
    case OrderType::support_hold: return {state.units.at(order.target).province};
    case OrderType::support_move: return {state.units.at(order.target).province, order.dest};
    }
    return {};
}

} // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names{"p_star_before", "p_star_after", "delta_p",
                                                "h_before",      "h_after",      "delta_h"};
    return names;
}

std::vector<double> feature_vector(const IntentFeatures& f) {
    return {f.p_star_before, f.p_star_after, f.delta_p, f.h_before, f.h_after, f.delta_h};
}

IntentFeatures compute_features(const ActionDistribution& before,
                                const ActionDistribution& after) {
    if (before.unit != after.unit)
        throw ValidationError("features: distributions describe '" + before.unit + "' and '" +
                              after.unit + "'");
    const WeightedOrder& star = top_action(after);
    IntentFeatures f;
    f.p_star_after = star.p;
    for (const auto& w : before.support)
        if (w.order == star.order) f.p_star_before = w.p;
    f.delta_p = f.p_star_after - f.p_star_before;
    f.h_before = entropy(before);
    f.h_after = entropy(after);
    f.delta_h = f.h_after - f.h_before;
    return f;
}

bool candidate_filter(const MapGraph& map, const GameState& state, const std::string& p1,
                      const std::string& p2, const std::string& unit,
                      const std::set<std::string>& mentions) {
    auto uit = state.units.find(unit);
    if (uit == state.units.end())
        throw ValidationError("filter: unknown unit '" + unit + "'");
    const std::string& owner = uit->second.power;
    if (owner != p1 && owner != p2)
        throw ValidationError("filter: unit '" + unit + "' belongs to neither " + p1 + " nor " +
                              p2);
    const std::string& other = owner == p1 ? p2 : p1;

    bool near = false;
    for (const auto& [oid, o] : state.units) {
        if (o.power != other) continue;
        int d = map.distance(uit->second.province, o.province);
        if (d >= 0 && d <= 2) {
            near = true;
            break;
        }
    }
    if (!near || mentions.empty()) return false;

    for (const auto& order : legal_orders(map, state, unit))
        for (const auto& prov : involved_provinces(state, unit, order))
            if (mentions.count(prov)) return true;
    return false;
}

LogisticModel::LogisticModel()
    : weights_(feature_names().size(), 0.0),
      mean_(feature_names().size(), 0.0),
      std_(feature_names().size(), 1.0) {}

double LogisticModel::logit(const IntentFeatures& f) const {
    auto x = feature_vector(f);
    double z = bias_;
    for (std::size_t i = 0; i < weights_.size(); ++i)
        z += weights_[i] * (x[i] - mean_[i]) / std_[i];
    return z;
}

double LogisticModel::probability(const IntentFeatures& f) const { return sigmoid(logit(f)); }

std::string LogisticModel::to_json() const {
    json doc{{"features", feature_names()},
             {"weights", weights_},
             {"bias", bias_},
             {"threshold", threshold_},
             {"standardization", {{"mean", mean_}, {"std", std_}}}};
    return doc.dump();
}

LogisticModel LogisticModel::from_json(const std::string& text) {
    LogisticModel model;
    try {
        json doc = json::parse(text);
        auto features = doc.at("features").get<std::vector<std::string>>();
        if (features != feature_names())
            throw ParseError("classifier model: unexpected feature list");
        model.weights_ = doc.at("weights").get<std::vector<double>>();
        model.bias_ = doc.at("bias").get<double>();
        model.threshold_ = doc.at("threshold").get<double>();
        model.mean_ = doc.at("standardization").at("mean").get<std::vector<double>>();
        model.std_ = doc.at("standardization").at("std").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("classifier model: ") + e.what());
    }
    const std::size_t n = feature_names().size();
    if (model.weights_.size() != n || model.mean_.size() != n || model.std_.size() != n)
        throw ParseError("classifier model: vector sizes do not match the feature list");
    if (!(model.threshold_ > 0.0 && model.threshold_ < 1.0))
        throw ParseError("classifier model: threshold outside (0,1)");
    for (double s : model.std_)
        if (!(s > 0.0)) throw ParseError("classifier model: non-positive standard deviation");
    return model;
}

LogisticModel LogisticModel::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("classifier model: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void LogisticModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("classifier model: cannot open '" + path + "' for writing");
    out << to_json() << "\n";
}

LogisticModel train_classifier(const std::vector<std::pair<IntentFeatures, bool>>& examples,
                               std::uint64_t /*seed*/, const TrainConfig& config) {
    const std::size_t n = examples.size();
    const std::size_t dims = feature_names().size();
    std::size_t positives = 0;
    for (const auto& [f, y] : examples) {
        for (double v : feature_vector(f))
            if (!std::isfinite(v)) throw ValidationError("train: non-finite feature value");
        positives += y;
    }
    if (positives == 0 || positives == n)
        throw ValidationError("train: need both classes, got " + std::to_string(positives) +
                              " positives out of " + std::to_string(n));

    LogisticModel model;
    std::vector<std::vector<double>> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = feature_vector(examples[i].first);
    for (std::size_t j = 0; j < dims; ++j) {
        double mean = 0.0;
        for (const auto& x : raw) mean += x[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& x : raw) var += (x[j] - mean) * (x[j] - mean);
        double sd = std::sqrt(var / static_cast<double>(n));
        model.mean_[j] = mean;
        model.std_[j] = sd > 0.0 ? sd : 1.0;
    }
    std::vector<std::vector<double>> z(n, std::vector<double>(dims));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dims; ++j)
            z[i][j] = (raw[i][j] - model.mean_[j]) / model.std_[j];

    for (int iter = 0; iter < config.iterations; ++iter) {
        std::vector<double> grad(dims, 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(model.bias_ +
                               std::inner_product(z[i].begin(), z[i].end(),
                                                  model.weights_.begin(), 0.0));
            double r = p - (examples[i].second ? 1.0 : 0.0);
            for (std::size_t j = 0; j < dims; ++j) grad[j] += r * z[i][j];
            grad_bias += r;
        }
        for (std::size_t j = 0; j < dims; ++j) {
            grad[j] = grad[j] / static_cast<double>(n) + config.l2 * model.weights_[j];
            model.weights_[j] -= config.learning_rate * grad[j];
        }
        model.bias_ -= config.learning_rate * grad_bias / static_cast<double>(n);
    }

    // Threshold: argmax F1 on the training predictions, ties to the lower
    // threshold (strict improvement required to move up).
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) probs[i] = model.probability(examples[i].first);
    double best_f1 = -1.0;
    for (int step = 1; step <= 99; ++step) {
        double t = static_cast<double>(step) / 100.0;
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool pred = probs[i] >= t;
            if (pred && examples[i].second) ++tp;
            if (pred && !examples[i].second) ++fp;
            if (!pred && examples[i].second) ++fn;
        }
        double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                             : 0.0;
        if (f1 > best_f1) {
            best_f1 = f1;
            model.threshold_ = t;
        }
    }
    return model;
}

namespace {

// Shared per-pair prediction context: the filtered view at the prediction
// point and that round's mentions.
struct PairContext {
    HypergameView view;
    std::set<std::string> mentions;
};

PairContext pair_context(const Play& play, std::size_t round, const std::string& p1,
                         const std::string& p2, const Lexicon& lexicon) {
    if (round >= play.rounds.size())
        throw ValidationError("detect: round " + std::to_string(round) + " out of range");
    PairContext ctx{filter_view(truncate(play, round), p1, p2), {}};
    ctx.mentions =
        extract_mentions(ctx.view.play.rounds[round].dialogue.messages, lexicon).provinces;
    return ctx;
}

} // namespace

std::vector<DetectionResult> detect(const Play& play, std::size_t round, const std::string& p1,
                                    const std::string& p2, const IntentBackend& backend,
                                    const LogisticModel& model, const Lexicon& lexicon) {
    const std::string lo = std::min(p1, p2), hi = std::max(p1, p2);
    PairContext ctx = pair_context(play, round, lo, hi, lexicon);
    const GameState& state = ctx.view.last_state();
    const MapGraph& map = *play.map;

    std::vector<DetectionResult> results;
    for (const auto& [uid, unit] : state.units) {
        if (unit.power != lo && unit.power != hi) continue;
        DetectionResult r;
        r.power1 = lo;
        r.power2 = hi;
        r.unit = uid;
        r.passed_filter = candidate_filter(map, state, lo, hi, uid, ctx.mentions);
        if (r.passed_filter) {
            try {
                auto before = backend.intent_distribution(ctx.view, unit.power, uid, false);
                auto after = backend.intent_distribution(ctx.view, unit.power, uid, true);
                auto features = compute_features(before, after);
                r.probability = model.probability(features);
                r.label = r.probability >= model.threshold();
                r.a_star = top_action(after);
            } catch (const ProtocolError&) {
                r.failed = true;
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<Agreement> construct_agreements(const Play& play, std::size_t round,
                                            const std::vector<DetectionResult>& results,
                                            const IntentBackend& backend) {
    if (results.empty()) return {};
    const std::string& p1 = results.front().power1;
    const std::string& p2 = results.front().power2;
    if (round >= play.rounds.size())
        throw ValidationError("agreements: round " + std::to_string(round) + " out of range");
    HypergameView view = filter_view(truncate(play, round), p1, p2);
    const GameState& state = view.last_state();
    const MapGraph& map = *play.map;

    std::map<std::string, const DetectionResult*> by_unit;
    for (const auto& r : results) by_unit[r.unit] = &r;

    auto after_top = [&](const std::string& unit) -> WeightedOrder {
        auto it = by_unit.find(unit);
        if (it != by_unit.end() && it->second->passed_filter && !it->second->failed)
            return it->second->a_star;
        const std::string& owner = state.units.at(unit).power;
        return top_action(backend.intent_distribution(view, owner, unit, true));
    };

    CoalitionStructure structure(std::set<std::string>{p1, p2});
    for (const auto& r : results) {
        if (!r.label || r.failed) continue;
        const std::string& owner = state.units.at(r.unit).power;
        const std::string& other = owner == p1 ? p2 : p1;

        std::string counterpart;
        if (r.a_star.order.type == OrderType::support_hold ||
            r.a_star.order.type == OrderType::support_move) {
            auto tit = state.units.find(r.a_star.order.target);
            if (tit != state.units.end() && tit->second.power == other)
                counterpart = r.a_star.order.target;
        }
        if (counterpart.empty()) {
            double best = -1.0;
            for (const auto& o : results) {
                if (!o.label || o.failed || o.unit == r.unit) continue;
                if (state.units.at(o.unit).power != other) continue;
                if (o.probability > best) {
                    best = o.probability;
                    counterpart = o.unit;
                }
            }
        }
        if (counterpart.empty()) {
            int best = -1;
            const std::string& from = state.units.at(r.unit).province;
            for (const auto& [uid, u] : state.units) {
                if (u.power != other) continue;
                int d = map.distance(from, u.province);
                if (d >= 0 && (best < 0 || d < best)) {
                    best = d;
                    counterpart = uid;
                }
            }
        }
        if (counterpart.empty()) continue; // the other power has no units left

        Agreement agreement;
        agreement.power_i = owner;
        agreement.power_j = other;
        agreement.u1 = r.unit;
        agreement.u2 = counterpart;
        agreement.a1 = r.a_star.order;
        agreement.a2 = after_top(counterpart).order;
        agreement.round = static_cast<int>(round);
        structure = add_agreement(map, state, std::move(structure), std::move(agreement));
    }

    std::vector<Agreement> out;
    for (const auto& e : structure.edges()) out.push_back(e.agreement);
    return out;
}

std::vector<FeaturizedExample> featurize_tuples(const std::vector<GameLog>& games,
                                                const std::vector<LabeledTuple>& tuples,
                                                const IntentBackend& backend,
                                                const Lexicon& lexicon, Exec exec) {
    std::map<std::string, const Play*> plays;
    for (const auto& g : games) plays[g.play.source_id] = &g.play;
    for (const auto& t : tuples) {
        auto it = plays.find(t.game_id);
        if (it == plays.end())
            throw ValidationError("featurize: unknown game '" + t.game_id + "'");
        if (t.round < 0 || static_cast<std::size_t>(t.round) >= it->second->rounds.size())
            throw ValidationError("featurize: tuple round " + std::to_string(t.round) +
                                  " outside game '" + t.game_id + "'");
    }

    std::vector<FeaturizedExample> out(tuples.size());
    std::vector<std::string> errors(tuples.size());
    for_each_index(tuples.size(), exec, [&](std::size_t i) {
        const LabeledTuple& t = tuples[i];
        FeaturizedExample& ex = out[i];
        ex.tuple = t;
        try {
            const Play& play = *plays.at(t.game_id);
            auto round = static_cast<std::size_t>(t.round);
            PairContext ctx = pair_context(play, round, t.power1, t.power2, lexicon);
            const GameState& state = ctx.view.last_state();
            ex.passed_filter =
                candidate_filter(*play.map, state, t.power1, t.power2, t.unit, ctx.mentions);
            if (ex.passed_filter) {
                const std::string& owner = state.units.at(t.unit).power;
                auto before = backend.intent_distribution(ctx.view, owner, t.unit, false);
                auto after = backend.intent_distribution(ctx.view, owner, t.unit, true);
                ex.features = compute_features(before, after);
            }
        } catch (const ProtocolError&) {
            ex.failed = true;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw ValidationError("featurize: " + e);
    return out;
}

} // namespace coalition
