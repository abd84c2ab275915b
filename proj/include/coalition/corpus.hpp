#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "coalition/agents.hpp"
#include "coalition/intent.hpp"
#include "coalition/lexicon.hpp"
#include "coalition/map.hpp"
#include "coalition/parallel.hpp"
#include "coalition/play.hpp"

namespace coalition {

// A stored game: the play plus provenance.
struct GameLog {
    Play play; // play.source_id is the game id
    std::string generator = "scripted";
    std::uint64_t seed = 0;
};

// Newline-delimited records: a header with game id, map document, and
// provenance; one record per acted round; a final record with the terminal
// state. Loading re-validates chaining, so errors name the offending round.
void save_game_log(const GameLog& log, std::ostream& out);
GameLog load_game_log(std::istream& in);
void save_game_log_file(const GameLog& log, const std::string& path);
GameLog load_game_log_file(const std::string& path);

// The game-log round records of a play as a JSON array (the wire format for
// remote intent queries).
std::string play_rounds_to_json(const Play& play);

// One (state, power pair, unit) detection example. `honored` is derived
// bookkeeping: it is reconstructed from game logs on load, not serialized.
struct LabeledTuple {
    std::string game_id;
    int round = 0;
    std::string power1, power2; // normalized: power1 < power2
    std::string unit;           // owned by power1 or power2
    bool label = false;         // an agreement names this unit in this pair's dialogue
    std::string agreed_order;   // canonical text; empty for negatives
    std::string split;          // "train", "test", or empty before splitting
    bool honored = false;       // positives only: the agreed order was actually played

    friend bool operator==(const LabeledTuple&, const LabeledTuple&) = default;
};

// Tab-separated with a fixed 8-column header; bit-exact round trips.
void save_labeled_tuples(const std::vector<LabeledTuple>& tuples, std::ostream& out);
std::vector<LabeledTuple> load_labeled_tuples(std::istream& in);
void save_labeled_tuples_file(const std::vector<LabeledTuple>& tuples, const std::string& path);
std::vector<LabeledTuple> load_labeled_tuples_file(const std::string& path);

// Restores the honored flag of positive tuples by comparing each agreed order
// with what the logged play actually ordered that round.
void annotate_honored(std::vector<LabeledTuple>& tuples, const std::vector<GameLog>& games);

struct DatasetStats {
    std::size_t n = 0;
    std::size_t positives = 0;
    std::size_t honored = 0;
    double positive_rate = 0.0;
    double honored_rate = 0.0; // among positives
};

DatasetStats dataset_stats(const std::vector<LabeledTuple>& tuples);

// Stratified split: each label class is shuffled with its own derived seed
// and cut at round(ratio * class size); split tags are stamped on the output.
// A class with fewer than two members cannot be stratified.
std::pair<std::vector<LabeledTuple>, std::vector<LabeledTuple>> split_train_test(
    std::vector<LabeledTuple> tuples, double ratio, std::uint64_t seed);

struct CorpusGenParams {
    int rounds = 8;
    // Intent-table concentration on the played order of pact units.
    double concentration = 0.9;
    // Probability that a unit far from every other power gets a decoy intent
    // shift (invisible to proximity filtering, visible to classifiers).
    double noise_rate = 0.25;
    NegotiationConfig negotiation; // honesty is overridden by the argument
    Exec exec = Exec::parallel;    // games are independent; merging is ordered
};

struct Corpus {
    std::vector<GameLog> games;
    std::vector<LabeledTuple> tuples;
    // Oracle intents: dialogue-conditioned entries concentrated on each pact
    // unit's played order, plus decoy shifts per noise_rate. Units without
    // entries fall back to uniform.
    TableBackend intent_table;
};

// Scripted negotiating agents play n_games games; every pact yields two
// positive tuples and every other unit of a message-exchanging pair that
// round yields a negative. Deterministic function of the inputs.
Corpus generate_labeled_corpus(std::shared_ptr<const MapGraph> map, const Lexicon& lexicon,
                               int n_games, double honesty, std::uint64_t seed,
                               const CorpusGenParams& params = {});

} // namespace coalition
