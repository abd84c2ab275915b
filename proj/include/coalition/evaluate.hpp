#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalition/corpus.hpp"
#include "coalition/detect.hpp"
#include "coalition/scoring.hpp"

namespace coalition {

// One ranking trial: where the ground-truth agreement landed among its
// candidate universe, and its score normalized to [0,1] within that case.
struct RankedCase {
    std::size_t universe = 0;
    std::size_t rank = 0; // 0-based; rank < universe
    bool honored = false;
    double p = 0.0;

    friend bool operator==(const RankedCase&, const RankedCase&) = default;
};

// Mean reciprocal rank with cutoff: mean of 1/(rank+1) when rank < k, else 0.
double mrr_at_k(const std::vector<RankedCase>& cases, std::size_t k);

// Mean (1 - p)^2 per ground-truth group. Honored agreements should score
// near 1 (small Brier), violated ones near 0 (large Brier). An empty group
// has no metric.
struct BrierSplit {
    std::optional<double> honored;
    std::optional<double> violated;
};
BrierSplit brier_by_group(const std::vector<RankedCase>& cases);

struct Prf1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const Prf1&, const Prf1&) = default;
};

// Harmonic mean, 0 when precision + recall is 0.
double f1_score(double precision, double recall);

// Standard precision/recall/F1 with 0/0 -> 0 conventions.
Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& labels);

// Aggregated experiment metrics. Ranking metrics are split by whether the
// ground-truth agreement was honored in play; a side with no cases keeps its
// metrics absent (null in JSON). The detection block mirrors prf1 output.
struct EvalReport {
    std::size_t ranking_cases = 0;
    std::size_t honored_cases = 0;
    std::size_t violated_cases = 0;
    std::optional<double> mrr1_honored, mrr5_honored;
    std::optional<double> mrr1_violated, mrr5_violated;
    std::optional<double> brier_honored, brier_violated;

    std::size_t detection_examples = 0;
    std::size_t detection_positives = 0;
    Prf1 detection;

    std::string to_json() const; // round-trips bit-exactly
    static EvalReport from_json(const std::string& text);

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Builds the ranking half of an EvalReport from per-case results.
EvalReport aggregate_ranking(const std::vector<RankedCase>& cases);

// How the value-only baseline combines (v_i, v_j) into its ranking score.
enum class ValueBaseline { sum, product, own };

struct RankingConfig {
    // scoring.seed is ignored: every case derives its own scoring seed from
    // the experiment seed, and candidates inside a case run serially because
    // cases are the parallel axis.
    ScoringConfig scoring;
    std::size_t k_alternatives = 10;
    ValueBaseline baseline = ValueBaseline::sum;
    Exec exec = Exec::parallel;
};

struct RankingExperimentResult {
    EvalReport r_score;
    EvalReport value_baseline;
    std::vector<RankedCase> r_cases;
    std::vector<RankedCase> value_cases;
};

// For every pact in the corpus: truncate its game at the pact round, build a
// candidate universe (the pact plus sampled alternatives), score it, and
// record where the true agreement ranks under the full rationalizability
// score and under the value-only baseline. Ground truth (honored/violated)
// is re-derived from the played joint action. Deterministic given seed.
// Throws when the corpus contains no pacts.
RankingExperimentResult run_ranking_experiment(const Corpus& corpus,
                                               const ValueFunction& value_fn,
                                               const IntentBackend& backend,
                                               const RankingConfig& config, std::uint64_t seed);

struct DetectionExperimentResult {
    Prf1 hybrid;          // proximity filter gating the in-distribution classifier
    Prf1 classifier_only; // classifier trained and applied without the filter
    Prf1 filter_only;     // the proximity filter as the sole detector
    LogisticModel model;  // the hybrid's classifier
    std::size_t train_size = 0, test_size = 0;
    std::size_t train_positives = 0, test_positives = 0;
};

// Splits the corpus tuples, trains the detector variants on the train side,
// and compares all three on the test side. Deterministic given seed.
DetectionExperimentResult run_detection_experiment(const Corpus& corpus,
                                                   const IntentBackend& backend,
                                                   const Lexicon& lexicon, double split_ratio,
                                                   const TrainConfig& train, std::uint64_t seed,
                                                   Exec exec = Exec::parallel);

} // namespace coalition
