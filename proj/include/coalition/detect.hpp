#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coalition/corpus.hpp"
#include "coalition/graph.hpp"
#include "coalition/intent.hpp"
#include "coalition/lexicon.hpp"
#include "coalition/map.hpp"
#include "coalition/parallel.hpp"
#include "coalition/play.hpp"

namespace coalition {

// How one unit's intent model moved between the dialogue-blind and
// dialogue-conditioned distributions. a* is the most likely action after
// dialogue; p_star_* are its probabilities under both distributions.
struct IntentFeatures {
    double p_star_before = 0.0;
    double p_star_after = 0.0;
    double delta_p = 0.0; // p_star_after - p_star_before
    double h_before = 0.0;
    double h_after = 0.0;
    double delta_h = 0.0; // h_after - h_before

    friend bool operator==(const IntentFeatures&, const IntentFeatures&) = default;
};

// Fixed feature order shared by training, prediction, and model files.
const std::vector<std::string>& feature_names();
std::vector<double> feature_vector(const IntentFeatures& f);

// Derives the features; throws when the distributions describe different
// units. An a* absent from the before-distribution counts as probability 0.
IntentFeatures compute_features(const ActionDistribution& before,
                                const ActionDistribution& after);

// Candidate gate: true iff the unit sits within graph distance 2 of some
// unit of the pair's other power, and at least one of its legal orders
// involves a mentioned province (its own, a move destination, or a support
// target or destination).
bool candidate_filter(const MapGraph& map, const GameState& state, const std::string& p1,
                      const std::string& p2, const std::string& unit,
                      const std::set<std::string>& mentions);

struct TrainConfig {
    double learning_rate = 0.1;
    int iterations = 2000;
    double l2 = 1e-3; // not applied to the bias
};

// Logistic regression over standardized intent features, with a decision
// threshold tuned for F1. A default-constructed model has zero weights and
// answers 0.5 everywhere.
class LogisticModel {
public:
    LogisticModel();

    double logit(const IntentFeatures& f) const;
    double probability(const IntentFeatures& f) const;
    bool classify(const IntentFeatures& f) const { return probability(f) >= threshold_; }

    double threshold() const { return threshold_; }
    double bias() const { return bias_; }
    const std::vector<double>& weights() const { return weights_; }

    // Structured text document: {"features", "weights", "bias", "threshold",
    // "standardization": {"mean", "std"}}. Saving what was loaded reproduces
    // the bytes exactly.
    std::string to_json() const;
    static LogisticModel from_json(const std::string& text);
    static LogisticModel from_file(const std::string& path);
    void save_file(const std::string& path) const;

    friend LogisticModel train_classifier(
        const std::vector<std::pair<IntentFeatures, bool>>& examples, std::uint64_t seed,
        const TrainConfig& config);

private:
    std::vector<double> weights_;
    double bias_ = 0.0;
    double threshold_ = 0.5;
    std::vector<double> mean_;
    std::vector<double> std_;
};

// Full-batch gradient descent on standardized features, then threshold =
// argmax F1 over {0.01, ..., 0.99} on the training set (ties take the lower
// threshold). Needs both classes and finite features. Deterministic; the
// seed is accepted for interface stability but the zero initialization never
// consumes it.
LogisticModel train_classifier(const std::vector<std::pair<IntentFeatures, bool>>& examples,
                               std::uint64_t seed, const TrainConfig& config = {});

// Verdict for one unit of a pair at a prediction point.
struct DetectionResult {
    std::string power1, power2; // normalized: power1 < power2
    std::string unit;
    bool passed_filter = false;
    bool failed = false;      // backend error; the unit stays in the output
    double probability = 0.0; // classifier output when the filter passed
    bool label = false;       // probability >= threshold, filtered units only
    WeightedOrder a_star;     // after-dialogue top action; set when scored

    friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

// Runs the staged detector for one pair at round t of the play: mention
// extraction on that round's filtered dialogue, candidate filtering, intent
// features, classification. One result per unit of either power, sorted by
// unit id; symmetric in the pair arguments.
std::vector<DetectionResult> detect(const Play& play, std::size_t round, const std::string& p1,
                                    const std::string& p2, const IntentBackend& backend,
                                    const LogisticModel& model, const Lexicon& lexicon);

// Pairs positive detections into concrete agreements. A support a* binds to
// the supported unit when the other power owns it; anything else pairs with
// the other side's most probable positive unit, or with its nearest unit
// when it has no positives. Mirrored pairings collapse; every agreement is
// validated against the round's state.
std::vector<Agreement> construct_agreements(const Play& play, std::size_t round,
                                            const std::vector<DetectionResult>& results,
                                            const IntentBackend& backend);

// One corpus tuple turned into classifier food.
struct FeaturizedExample {
    LabeledTuple tuple;
    bool passed_filter = false;
    bool failed = false;
    IntentFeatures features;
};

// Computes filter verdicts and intent features for every tuple against its
// game log. Tuples are independent, so this parallelizes; output order
// matches the input.
std::vector<FeaturizedExample> featurize_tuples(const std::vector<GameLog>& games,
                                                const std::vector<LabeledTuple>& tuples,
                                                const IntentBackend& backend,
                                                const Lexicon& lexicon,
                                                Exec exec = Exec::parallel);

} // namespace coalition
