#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/errors.hpp"
#include "coalition/intent.hpp"
#include "coalition/map.hpp"
#include "coalition/scoring.hpp"
#include "test_util.hpp"

using namespace coalition;

namespace {

std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(FIXTURES_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::shared_ptr<const MapGraph> trio_map() {
    return std::make_shared<const MapGraph>(load_map(read_fixture("map_trio.json")));
}

Play one_round_play(std::shared_ptr<const MapGraph> map, std::string source_id = "") {
    Play play;
    play.map = std::move(map);
    play.source_id = std::move(source_id);
    play.rounds.push_back({initial_state(*play.map), {}, std::nullopt});
    return play;
}

Agreement trio_pact(const Order& a1, const Order& a2, int round = 0) {
    Agreement a;
    a.power_i = "AUS";
    a.power_j = "ITA";
    a.u1 = "AUS.1";
    a.u2 = "ITA.1";
    a.a1 = a1;
    a.a2 = a2;
    a.round = round;
    return a;
}

std::string pact_key(const GameState& state, const Agreement& a) {
    return format_order(state, a.u1, a.a1) + "|" + format_order(state, a.u2, a.a2);
}

// Trio value function with distinct nonzero weights per power so candidate
// values actually spread.
ValueFunction spread_values(const MapGraph& map) {
    ValueFunction vf = ValueFunction::linear(map);
    vf.set_weights("AUS", {0.05, 1.0, 0.4, 0.2, -0.3});
    vf.set_weights("ITA", {0.10, 0.8, 0.5, 0.1, -0.2});
    vf.set_weights("TUR", {0.15, 0.9, 0.3, 0.3, -0.1});
    vf.set_gamma(0.9);
    return vf;
}

EquilibriumConfig small_config() {
    EquilibriumConfig config;
    config.k = 2;
    config.m = 32;
    config.iters = 128;
    config.gamma = 0.9;
    config.exec = Exec::serial;
    return config;
}

bool same_scored(const ScoredAgreement& a, const ScoredAgreement& b) {
    return a.agreement == b.agreement && a.v_i == b.v_i && a.v_j == b.v_j &&
           a.v_hat_i == b.v_hat_i && a.v_hat_j == b.v_hat_j && a.b_ji == b.b_ji &&
           a.b_ij == b.b_ij && a.wt_i == b.wt_i && a.wt_j == b.wt_j && a.wt == b.wt &&
           a.rank == b.rank;
}

} // namespace

TEST_CASE("perceived value reads honoring mass from the backend") {
    auto map = trio_map();
    const Play play = one_round_play(map, "g1");
    const GameState& s0 = play.last_state();
    const HypergameView view = filter_view(play, "AUS", "ITA");

    const Agreement pact = trio_pact(parse_order(s0, "AUS.1", "A VIE - TRI"),
                                     parse_order(s0, "ITA.1", "A VEN - APU"));

    TableBackend table;
    table.set({"g1", 0, "ITA.1", true}, {{"A VEN - APU", 0.6}, {"A VEN H", 0.4}});

    SUBCASE("mass on the agreed order") {
        CHECK(perceived_value(view, table, pact, "ITA") == 0.6);
    }

    SUBCASE("full confidence") {
        TableBackend sure;
        sure.set({"g1", 0, "AUS.1", true}, {{"A VIE - TRI", 1.0}});
        CHECK(perceived_value(view, sure, pact, "AUS") == 1.0);
    }

    SUBCASE("agreement outside the support scores zero") {
        const Agreement other =
            trio_pact(pact.a1, parse_order(s0, "ITA.1", "A VEN - ROM"));
        CHECK(perceived_value(view, table, other, "ITA") == 0.0);
    }

    SUBCASE("missing table entry falls back to uniform mass") {
        // no AUS.1 entry: the table backend answers uniform over legal orders
        const double n = static_cast<double>(legal_orders(*map, s0, "AUS.1").size());
        CHECK(perceived_value(view, table, pact, "AUS") == 1.0 / n);
    }

    SUBCASE("non-party rejected") {
        CHECK_THROWS_AS(perceived_value(view, table, pact, "TUR"), ValidationError);
    }

    SUBCASE("unit owned by the wrong power rejected") {
        Agreement bad = pact;
        bad.u1 = "ITA.2"; // claimed for AUS
        CHECK_THROWS_AS(perceived_value(view, table, bad, "AUS"), ValidationError);
    }
}

TEST_CASE("agreement value matches the conditioned-distribution expectation") {
    auto map = trio_map();
    const Play play = one_round_play(map);
    const GameState& s0 = play.last_state();

    const Agreement pact =
        trio_pact(parse_order(s0, "AUS.1", "A VIE - TRI"),
                  parse_order(s0, "ITA.1", "A VEN S A VIE - TRI"));
    const EquilibriumConfig config = small_config();

    SUBCASE("zero value function yields zero") {
        CHECK(agreement_value(play, pact, ValueFunction::linear(*map), config, "AUS", 4) == 0.0);
    }

    SUBCASE("equals the hand expectation over the same distribution") {
        const ValueFunction vf = spread_values(*map);
        for (const std::string power : {"AUS", "ITA"}) {
            const auto outcomes = conditioned_joint_distribution(play, pact, vf, config, 4);
            double expect = 0.0;
            for (const auto& o : outcomes)
                expect += o.p * vf.evaluate(*map, adjudicate(*map, s0, o.action), power);
            CHECK(agreement_value(play, pact, vf, config, power, 4) == expect);
        }
    }

    SUBCASE("point-mass case reduces to the successor value") {
        EquilibriumConfig solo = config;
        solo.k = 1;
        ValueFunction vf = ValueFunction::tabular(*map);
        const auto outcomes = conditioned_joint_distribution(play, pact, vf, solo, 11);
        REQUIRE(outcomes.size() == 1);
        REQUIRE(outcomes[0].p == 1.0);
        const GameState successor = adjudicate(*map, s0, outcomes[0].action);
        vf.set_value(successor, "ITA", 0.7);
        // k=1 keeps the distribution a point mass whatever the table holds
        CHECK(agreement_value(play, pact, vf, solo, "ITA", 11) == 0.7);
    }

    SUBCASE("perspective must be a party") {
        CHECK_THROWS_AS(
            agreement_value(play, pact, ValueFunction::linear(*map), config, "TUR", 4),
            ValidationError);
    }
}

TEST_CASE("alternative sampling covers the legal cross-product") {
    auto map = trio_map();
    const GameState s0 = initial_state(*map);
    const Agreement orig = trio_pact(make_hold(), make_hold());

    const std::size_t n1 = legal_orders(*map, s0, "AUS.1").size();
    const std::size_t n2 = legal_orders(*map, s0, "ITA.1").size();
    const std::size_t pool = n1 * n2 - 1;
    REQUIRE(pool > 10);

    SUBCASE("k below the pool samples without replacement, original first") {
        const auto alts = sample_alternatives(*map, s0, orig, 3, 5);
        CHECK_FALSE(alts.exhausted);
        REQUIRE(alts.candidates.size() == 4);
        CHECK(alts.candidates[0] == orig);
        std::set<std::string> keys;
        for (const auto& c : alts.candidates) {
            CHECK(c.power_i == "AUS");
            CHECK(c.power_j == "ITA");
            CHECK(c.round == 0);
            CHECK(is_legal_order(*map, s0, c.u1, c.a1));
            CHECK(is_legal_order(*map, s0, c.u2, c.a2));
            keys.insert(pact_key(s0, c));
        }
        CHECK(keys.size() == alts.candidates.size()); // original never resampled
    }

    SUBCASE("k at the pool size is not exhausted; beyond it is") {
        CHECK_FALSE(sample_alternatives(*map, s0, orig, pool, 5).exhausted);
        const auto all = sample_alternatives(*map, s0, orig, pool + 5, 5);
        CHECK(all.exhausted);
        REQUIRE(all.candidates.size() == pool + 1);

        std::set<std::string> got;
        for (const auto& c : all.candidates) got.insert(pact_key(s0, c));
        std::set<std::string> want;
        for (const auto& o1 : legal_orders(*map, s0, "AUS.1"))
            for (const auto& o2 : legal_orders(*map, s0, "ITA.1")) {
                Agreement c = orig;
                c.a1 = o1;
                c.a2 = o2;
                want.insert(pact_key(s0, c));
            }
        CHECK(got == want);
    }

    SUBCASE("deterministic in the seed") {
        const auto a = sample_alternatives(*map, s0, orig, pool, 3);
        const auto b = sample_alternatives(*map, s0, orig, pool, 3);
        const auto c = sample_alternatives(*map, s0, orig, pool, 4);
        REQUIRE(a.candidates.size() == b.candidates.size());
        bool same = true, same_other_seed = true;
        for (std::size_t i = 0; i < a.candidates.size(); ++i) {
            same = same && a.candidates[i] == b.candidates[i];
            same_other_seed = same_other_seed && a.candidates[i] == c.candidates[i];
        }
        CHECK(same);
        CHECK_FALSE(same_other_seed); // a different permutation of a large pool
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(sample_alternatives(*map, s0, orig, 0, 5), ValidationError);
        Agreement stranger = orig;
        stranger.u1 = "TUR.1";
        CHECK_THROWS_AS(sample_alternatives(*map, s0, stranger, 3, 5), ValidationError);
        Agreement illegal = orig;
        illegal.a1 = make_move("SMY"); // not adjacent to VIE
        CHECK_THROWS_AS(sample_alternatives(*map, s0, illegal, 3, 5), ValidationError);
    }
}

TEST_CASE("scored agreement sets satisfy the weight algebra") {
    auto map = trio_map();
    const Play play = one_round_play(map, "g1");
    const GameState& s0 = play.last_state();
    const ValueFunction vf = spread_values(*map);
    const HeuristicBackend backend;

    const Agreement orig = trio_pact(parse_order(s0, "AUS.1", "A VIE - TRI"),
                                     parse_order(s0, "ITA.1", "A VEN S A VIE - TRI"));
    const auto universe = sample_alternatives(*map, s0, orig, 9, 21).candidates;
    REQUIRE(universe.size() == 10);

    ScoringConfig config;
    config.equilibrium = small_config();
    config.seed = 7;
    config.exec = Exec::serial;

    const auto ranked = score_agreement_set(play, universe, vf, backend, config);
    REQUIRE(ranked.size() == universe.size());

    SUBCASE("components composed and bounded, ranks sorted") {
        bool one_hat_i = false, one_hat_j = false;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            const auto& s = ranked[i];
            CHECK(s.rank == i);
            CHECK(s.wt_i == s.v_hat_i * s.b_ji);
            CHECK(s.wt_j == s.v_hat_j * s.b_ij);
            CHECK(s.wt == s.wt_i * s.wt_j);
            for (double x : {s.v_hat_i, s.v_hat_j, s.b_ji, s.b_ij, s.wt_i, s.wt_j, s.wt}) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
            one_hat_i = one_hat_i || s.v_hat_i == 1.0;
            one_hat_j = one_hat_j || s.v_hat_j == 1.0;
            if (i > 0) {
                CHECK(ranked[i - 1].wt >= s.wt);
                if (ranked[i - 1].wt == s.wt)
                    CHECK(pact_key(s0, ranked[i - 1].agreement) < pact_key(s0, s.agreement));
            }
        }
        // min-max always pins a maximum at 1
        CHECK(one_hat_i);
        CHECK(one_hat_j);
    }

    SUBCASE("v columns equal direct agreement values under the shared seed") {
        // common random numbers: every candidate solves from config.seed
        for (const auto& s : ranked) {
            CHECK(s.v_i ==
                  agreement_value(play, s.agreement, vf, config.equilibrium, "AUS", config.seed));
            CHECK(s.v_j ==
                  agreement_value(play, s.agreement, vf, config.equilibrium, "ITA", config.seed));
        }
    }

    SUBCASE("b columns equal direct perceived values") {
        const HypergameView view = filter_view(play, "AUS", "ITA");
        for (const auto& s : ranked) {
            CHECK(s.b_ji == perceived_value(view, backend, s.agreement, "ITA"));
            CHECK(s.b_ij == perceived_value(view, backend, s.agreement, "AUS"));
        }
    }

    SUBCASE("deterministic and independent of candidate input order") {
        const auto again = score_agreement_set(play, universe, vf, backend, config);
        auto shuffled = universe;
        std::reverse(shuffled.begin(), shuffled.end());
        const auto reordered = score_agreement_set(play, shuffled, vf, backend, config);
        REQUIRE(again.size() == ranked.size());
        REQUIRE(reordered.size() == ranked.size());
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            CHECK(same_scored(ranked[i], again[i]));
            CHECK(same_scored(ranked[i], reordered[i]));
        }
    }

    SUBCASE("parallel execution is bit-identical to serial") {
        ScoringConfig par = config;
        par.exec = Exec::parallel;
        const auto parallel = score_agreement_set(play, universe, vf, backend, par);
        REQUIRE(parallel.size() == ranked.size());
        for (std::size_t i = 0; i < ranked.size(); ++i)
            CHECK(same_scored(ranked[i], parallel[i]));
    }

    SUBCASE("constant values normalize to one, weights collapse to masses") {
        const auto flat =
            score_agreement_set(play, universe, ValueFunction::linear(*map), backend, config);
        for (const auto& s : flat) {
            CHECK(s.v_i == 0.0);
            CHECK(s.v_hat_i == 1.0);
            CHECK(s.v_hat_j == 1.0);
            CHECK(s.wt_i == s.b_ji);
            CHECK(s.wt_j == s.b_ij);
        }
    }

    SUBCASE("single candidate gets rank zero and unit normalization") {
        const auto solo =
            score_agreement_set(play, {orig}, vf, backend, config);
        REQUIRE(solo.size() == 1);
        CHECK(solo[0].rank == 0);
        CHECK(solo[0].v_hat_i == 1.0);
        CHECK(solo[0].v_hat_j == 1.0);
        CHECK(solo[0].agreement == orig);
    }
}

TEST_CASE("scoring rejects malformed candidate sets") {
    auto map = trio_map();
    const Play play = one_round_play(map);
    const GameState& s0 = play.last_state();
    const ValueFunction vf = ValueFunction::linear(*map);
    const HeuristicBackend backend;
    const Agreement orig = trio_pact(make_hold(), make_hold());

    CHECK_THROWS_AS(score_agreement_set(play, {}, vf, backend, {}), ValidationError);

    Play unmapped = play;
    unmapped.map = nullptr;
    CHECK_THROWS_AS(score_agreement_set(unmapped, {orig}, vf, backend, {}), ValidationError);

    SUBCASE("mixed pairs and rounds") {
        Agreement other_pair = orig;
        other_pair.power_j = "TUR";
        other_pair.u2 = "TUR.1";
        CHECK_THROWS_AS(score_agreement_set(play, {orig, other_pair}, vf, backend, {}),
                        ValidationError);
        Agreement other_round = orig;
        other_round.round = 3;
        CHECK_THROWS_AS(score_agreement_set(play, {orig, other_round}, vf, backend, {}),
                        ValidationError);
    }

    SUBCASE("powers must differ") {
        Agreement self = orig;
        self.power_j = "AUS";
        self.u2 = "AUS.2";
        CHECK_THROWS_AS(score_agreement_set(play, {self}, vf, backend, {}), ValidationError);
    }

    SUBCASE("value function must cover every map power") {
        ValueFunction narrow = ValueFunction::from_json(
            R"({"powers":["AUS","ITA"],"features":["bias","sc_share","unit_share","centrality","sc_distance"],)"
            R"("weights":{"AUS":[0,0,0,0,0],"ITA":[0,0,0,0,0]},"gamma":0.9})");
        CHECK_THROWS_AS(score_agreement_set(play, {orig}, narrow, backend, {}), ValidationError);
    }

    SUBCASE("ownership and legality checked per candidate") {
        Agreement stolen = orig;
        stolen.u2 = "TUR.2"; // still claimed for ITA
        CHECK_THROWS_AS(score_agreement_set(play, {stolen}, vf, backend, {}), ValidationError);
        Agreement illegal = orig;
        illegal.a2 = make_move("SMY"); // VEN is not adjacent to SMY
        CHECK_THROWS_AS(score_agreement_set(play, {orig, illegal}, vf, backend, {}),
                        ValidationError);
    }

    SUBCASE("validation references the play's last state, not the agreement round") {
        // same pact round recorded, but the unit no longer exists at the
        // prediction point once it is removed from the state
        Play moved = play;
        moved.rounds[0].state.units.erase("AUS.1");
        CHECK_THROWS_AS(score_agreement_set(moved, {orig}, vf, backend, {}), ValidationError);
    }
}

TEST_CASE("table-backed scoring reproduces the mass product and ranks the pact first") {
    auto map = trio_map();
    const Play play = one_round_play(map, "g1");
    const GameState& s0 = play.last_state();

    const Agreement orig = trio_pact(parse_order(s0, "AUS.1", "A VIE - TRI"),
                                     parse_order(s0, "ITA.1", "A VEN - APU"));

    // Dialogue-conditioned beliefs concentrate on the agreed orders.
    TableBackend table;
    table.set({"g1", 0, "AUS.1", true}, {{"A VIE - TRI", 0.9}, {"A VIE H", 0.1}});
    table.set({"g1", 0, "ITA.1", true}, {{"A VEN - APU", 0.9}, {"A VEN H", 0.1}});
    const std::map<std::string, double> mass1{{"A VIE - TRI", 0.9}, {"A VIE H", 0.1}};
    const std::map<std::string, double> mass2{{"A VEN - APU", 0.9}, {"A VEN H", 0.1}};
    const auto lookup = [](const std::map<std::string, double>& m, const std::string& key) {
        auto it = m.find(key);
        return it == m.end() ? 0.0 : it->second;
    };

    const auto universe = sample_alternatives(*map, s0, orig, 9, 13).candidates;
    ScoringConfig config;
    config.equilibrium = small_config();
    config.seed = 2;

    // zero value function: v_hat is 1 everywhere, so wt is the pure product
    // of perceived honoring masses
    const auto ranked =
        score_agreement_set(play, universe, ValueFunction::linear(*map), table, config);
    REQUIRE(ranked.size() == universe.size());

    CHECK(ranked[0].agreement == orig);
    CHECK(ranked[0].rank == 0);
    CHECK(ranked[0].wt == 0.9 * 0.9);

    std::vector<std::pair<double, std::string>> oracle; // (-wt, key) ascending == rank order
    for (const auto& s : ranked) {
        const double m1 = lookup(mass1, format_order(s0, s.agreement.u1, s.agreement.a1));
        const double m2 = lookup(mass2, format_order(s0, s.agreement.u2, s.agreement.a2));
        CHECK(s.b_ij == m1);
        CHECK(s.b_ji == m2);
        CHECK(s.wt == m2 * m1 * 1.0); // wt_i = 1*m2 times wt_j = 1*m1
        oracle.push_back({-s.wt, pact_key(s0, s.agreement)});
    }
    auto sorted = oracle;
    std::sort(sorted.begin(), sorted.end());
    CHECK(oracle == sorted);
}
