#include "coalition/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "coalition/engine.hpp"
#include "coalition/errors.hpp"
#include "coalition/graph.hpp"
#include "coalition/parallel.hpp"
#include "coalition/rng.hpp"

namespace coalition {

namespace {

void check_cases(const std::vector<RankedCase>& cases, const char* op) {
    if (cases.empty()) throw ValidationError(std::string(op) + ": no cases");
    for (const auto& c : cases) {
        if (c.rank >= c.universe)
            throw ValidationError(std::string(op) + ": rank " + std::to_string(c.rank) +
                                  " outside a universe of " + std::to_string(c.universe));
        if (!(c.p >= 0.0 && c.p <= 1.0))
            throw ValidationError(std::string(op) + ": score outside [0,1]");
    }
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

} // namespace

double mrr_at_k(const std::vector<RankedCase>& cases, std::size_t k) {
    check_cases(cases, "mrr");
    if (k == 0) throw ValidationError("mrr: k must be >= 1");
    double sum = 0.0;
    for (const auto& c : cases)
        if (c.rank < k) sum += 1.0 / static_cast<double>(c.rank + 1);
    return sum / static_cast<double>(cases.size());
}

BrierSplit brier_by_group(const std::vector<RankedCase>& cases) {
    check_cases(cases, "brier");
    double sum[2] = {0.0, 0.0};
    std::size_t n[2] = {0, 0};
    for (const auto& c : cases) {
        const int g = c.honored ? 1 : 0;
        // honored agreements should have scored near 1
        const double target = c.honored ? 1.0 : 0.0;
        sum[g] += (target - c.p) * (target - c.p);
        ++n[g];
    }
    BrierSplit out;
    if (n[1] > 0) out.honored = sum[1] / static_cast<double>(n[1]);
    if (n[0] > 0) out.violated = sum[0] / static_cast<double>(n[0]);
    return out;
}

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
    if (predictions.size() != labels.size())
        throw ValidationError("prf1: " + std::to_string(predictions.size()) +
                              " predictions against " + std::to_string(labels.size()) +
                              " labels");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] && labels[i]) ++tp;
        else if (predictions[i]) ++fp;
        else if (labels[i]) ++fn;
    }
    Prf1 out;
    out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

EvalReport aggregate_ranking(const std::vector<RankedCase>& cases) {
    check_cases(cases, "aggregate");
    EvalReport report;
    report.ranking_cases = cases.size();
    std::vector<RankedCase> honored_cases, violated_cases;
    for (const auto& c : cases) (c.honored ? honored_cases : violated_cases).push_back(c);
    report.honored_cases = honored_cases.size();
    report.violated_cases = violated_cases.size();
    if (!honored_cases.empty()) {
        report.mrr1_honored = mrr_at_k(honored_cases, 1);
        report.mrr5_honored = mrr_at_k(honored_cases, 5);
    }
    if (!violated_cases.empty()) {
        report.mrr1_violated = mrr_at_k(violated_cases, 1);
        report.mrr5_violated = mrr_at_k(violated_cases, 5);
    }
    const BrierSplit brier = brier_by_group(cases);
    report.brier_honored = brier.honored;
    report.brier_violated = brier.violated;
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::json doc;
    doc["ranking"] = {{"cases", ranking_cases},
                      {"honored", honored_cases},
                      {"violated", violated_cases},
                      {"mrr1_honored", opt_json(mrr1_honored)},
                      {"mrr5_honored", opt_json(mrr5_honored)},
                      {"mrr1_violated", opt_json(mrr1_violated)},
                      {"mrr5_violated", opt_json(mrr5_violated)},
                      {"brier_honored", opt_json(brier_honored)},
                      {"brier_violated", opt_json(brier_violated)}};
    doc["detection"] = {{"examples", detection_examples},
                        {"positives", detection_positives},
                        {"precision", detection.precision},
                        {"recall", detection.recall},
                        {"f1", detection.f1}};
    return doc.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("eval report: ") + e.what());
    }
    EvalReport report;
    try {
        const auto& r = doc.at("ranking");
        report.ranking_cases = r.at("cases").get<std::size_t>();
        report.honored_cases = r.at("honored").get<std::size_t>();
        report.violated_cases = r.at("violated").get<std::size_t>();
        report.mrr1_honored = opt_from(r.at("mrr1_honored"));
        report.mrr5_honored = opt_from(r.at("mrr5_honored"));
        report.mrr1_violated = opt_from(r.at("mrr1_violated"));
        report.mrr5_violated = opt_from(r.at("mrr5_violated"));
        report.brier_honored = opt_from(r.at("brier_honored"));
        report.brier_violated = opt_from(r.at("brier_violated"));
        const auto& d = doc.at("detection");
        report.detection_examples = d.at("examples").get<std::size_t>();
        report.detection_positives = d.at("positives").get<std::size_t>();
        report.detection.precision = d.at("precision").get<double>();
        report.detection.recall = d.at("recall").get<double>();
        report.detection.f1 = d.at("f1").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("eval report: ") + e.what());
    }
    return report;
}

namespace {

// One reconstructed pact with everything the scoring stage needs.
struct RankingCase {
    std::size_t game = 0;
    int round = 0;
    Agreement agreement;
    bool honored = false;
};

double combine(ValueBaseline baseline, double v_i, double v_j) {
    switch (baseline) {
    case ValueBaseline::sum: return v_i + v_j;
    case ValueBaseline::product: return v_i * v_j;
    case ValueBaseline::own: return v_i;
    }
    throw ValidationError("ranking experiment: unknown value baseline");
}

std::string case_tag(const RankingCase& c) {
    return c.agreement.power_i + "/" + c.agreement.power_j + " round " +
           std::to_string(c.round);
}

} // namespace

RankingExperimentResult run_ranking_experiment(const Corpus& corpus,
                                               const ValueFunction& value_fn,
                                               const IntentBackend& backend,
                                               const RankingConfig& config, std::uint64_t seed) {
    if (config.k_alternatives == 0)
        throw ValidationError("ranking experiment: k_alternatives must be >= 1");

    std::map<std::string, std::size_t> game_index;
    for (std::size_t g = 0; g < corpus.games.size(); ++g)
        game_index[corpus.games[g].play.source_id] = g;

    // Pair up the two positive tuples of each pact, in a deterministic
    // (game, round, pair) order.
    std::map<std::tuple<std::string, int, std::string, std::string>,
             std::vector<const LabeledTuple*>>
        groups;
    for (const auto& t : corpus.tuples)
        if (t.label) groups[{t.game_id, t.round, t.power1, t.power2}].push_back(&t);

    std::vector<RankingCase> cases;
    for (const auto& [key, members] : groups) {
        const auto& [game_id, round, power1, power2] = key;
        auto git = game_index.find(game_id);
        if (git == game_index.end())
            throw ValidationError("ranking experiment: tuples reference unknown game '" +
                                  game_id + "'");
        const Play& play = corpus.games[git->second].play;
        if (round < 0 || static_cast<std::size_t>(round) >= play.rounds.size() ||
            !play.rounds[static_cast<std::size_t>(round)].action)
            throw ValidationError("ranking experiment: game '" + game_id +
                                  "' has no acted round " + std::to_string(round));
        const PlayRound& at = play.rounds[static_cast<std::size_t>(round)];

        RankingCase rc;
        rc.game = git->second;
        rc.round = round;
        rc.agreement.power_i = power1;
        rc.agreement.power_j = power2;
        rc.agreement.round = round;
        for (const LabeledTuple* t : members) {
            auto uit = at.state.units.find(t->unit);
            if (uit == at.state.units.end())
                throw ValidationError("ranking experiment: pact unit '" + t->unit +
                                      "' missing from game '" + game_id + "' round " +
                                      std::to_string(round));
            const Order order = parse_order(at.state, t->unit, t->agreed_order);
            if (uit->second.power == power1) {
                rc.agreement.u1 = t->unit;
                rc.agreement.a1 = order;
            } else if (uit->second.power == power2) {
                rc.agreement.u2 = t->unit;
                rc.agreement.a2 = order;
            }
        }
        if (members.size() != 2 || rc.agreement.u1.empty() || rc.agreement.u2.empty())
            throw ValidationError("ranking experiment: pact of " + game_id + " " + case_tag(rc) +
                                  " does not name one unit per power");
        const HonorFlags flags = honored(rc.agreement, *at.action);
        rc.honored = flags.honored_i && flags.honored_j;

        const MapGraph& map = *play.map;
        for (const auto& power : map.powers)
            if (std::find(value_fn.powers().begin(), value_fn.powers().end(), power) ==
                value_fn.powers().end())
                throw ValidationError("ranking experiment: value function does not cover '" +
                                      power + "'");
        cases.push_back(std::move(rc));
    }
    if (cases.empty()) throw ValidationError("ranking experiment: corpus has no pacts");

    RankingExperimentResult result;
    result.r_cases.resize(cases.size());
    result.value_cases.resize(cases.size());
    std::vector<std::exception_ptr> failures(cases.size());

    for_each_index(cases.size(), config.exec, [&](std::size_t i) {
        try {
            const RankingCase& rc = cases[i];
            const Play& full = corpus.games[rc.game].play;
            const Play play = truncate(full, static_cast<std::size_t>(rc.round));
            const GameState& state = play.last_state();

            const auto universe =
                sample_alternatives(*play.map, state, rc.agreement, config.k_alternatives,
                                    derive_seed(seed, {0xA17u, i}));
            ScoringConfig scoring = config.scoring;
            scoring.seed = derive_seed(seed, {0x5C0u, i});
            // cases are the parallel axis; candidates inside stay serial
            scoring.exec = Exec::serial;
            scoring.equilibrium.exec = Exec::serial;
            const auto ranked =
                score_agreement_set(play, universe.candidates, value_fn, backend, scoring);

            const auto key = [&](const Agreement& a) {
                return format_order(state, a.u1, a.a1) + "|" + format_order(state, a.u2, a.a2);
            };

            // value-only baseline: same candidates re-ranked by raw values
            std::vector<std::size_t> order(ranked.size());
            std::vector<double> combined(ranked.size());
            for (std::size_t c = 0; c < ranked.size(); ++c) {
                order[c] = c;
                combined[c] = combine(config.baseline, ranked[c].v_i, ranked[c].v_j);
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (combined[a] != combined[b]) return combined[a] > combined[b];
                return key(ranked[a].agreement) < key(ranked[b].agreement);
            });

            const auto minmax = [](double x, double lo, double hi) {
                return hi > lo ? (x - lo) / (hi - lo) : 1.0;
            };
            double wt_lo = ranked.front().wt, wt_hi = wt_lo;
            double cb_lo = combined.front(), cb_hi = cb_lo;
            for (std::size_t c = 0; c < ranked.size(); ++c) {
                wt_lo = std::min(wt_lo, ranked[c].wt);
                wt_hi = std::max(wt_hi, ranked[c].wt);
                cb_lo = std::min(cb_lo, combined[c]);
                cb_hi = std::max(cb_hi, combined[c]);
            }

            RankedCase r, v;
            r.universe = v.universe = ranked.size();
            r.honored = v.honored = rc.honored;
            bool found = false;
            for (std::size_t c = 0; c < ranked.size(); ++c) {
                if (ranked[c].agreement == rc.agreement) {
                    r.rank = ranked[c].rank;
                    r.p = minmax(ranked[c].wt, wt_lo, wt_hi);
                    found = true;
                }
                if (ranked[order[c]].agreement == rc.agreement) {
                    v.rank = c;
                    v.p = minmax(combined[order[c]], cb_lo, cb_hi);
                }
            }
            if (!found)
                throw ValidationError("ranking experiment: original pact missing from the "
                                      "scored set");
            result.r_cases[i] = r;
            result.value_cases[i] = v;
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    result.r_score = aggregate_ranking(result.r_cases);
    result.value_baseline = aggregate_ranking(result.value_cases);
    return result;
}

DetectionExperimentResult run_detection_experiment(const Corpus& corpus,
                                                   const IntentBackend& backend,
                                                   const Lexicon& lexicon, double split_ratio,
                                                   const TrainConfig& train, std::uint64_t seed,
                                                   Exec exec) {
    if (corpus.tuples.empty()) throw ValidationError("detection experiment: corpus has no tuples");

    auto [train_tuples, test_tuples] =
        split_train_test(corpus.tuples, split_ratio, derive_seed(seed, {0x5B1u}));
    const auto train_set = featurize_tuples(corpus.games, train_tuples, backend, lexicon, exec);
    const auto test_set = featurize_tuples(corpus.games, test_tuples, backend, lexicon, exec);

    const auto examples = [](const std::vector<FeaturizedExample>& set, bool filtered_only) {
        std::vector<std::pair<IntentFeatures, bool>> out;
        for (const auto& e : set) {
            if (e.failed) continue;
            if (filtered_only && !e.passed_filter) continue;
            out.push_back({e.features, e.tuple.label});
        }
        return out;
    };

    DetectionExperimentResult result;
    result.model = train_classifier(examples(train_set, true), seed, train);
    const LogisticModel unfiltered = train_classifier(examples(train_set, false), seed, train);

    std::vector<bool> labels, hybrid, classifier_only, filter_only;
    for (const auto& e : test_set) {
        labels.push_back(e.tuple.label);
        hybrid.push_back(e.passed_filter && !e.failed && result.model.classify(e.features));
        classifier_only.push_back(!e.failed && unfiltered.classify(e.features));
        filter_only.push_back(e.passed_filter);
    }
    result.hybrid = prf1(hybrid, labels);
    result.classifier_only = prf1(classifier_only, labels);
    result.filter_only = prf1(filter_only, labels);
    result.train_size = train_tuples.size();
    result.test_size = test_tuples.size();
    for (const auto& t : train_tuples) result.train_positives += t.label ? 1 : 0;
    for (const auto& t : test_tuples) result.test_positives += t.label ? 1 : 0;
    return result;
}

} // namespace coalition
