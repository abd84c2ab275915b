#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/errors.hpp"
#include "coalition/graph.hpp"
#include "test_util.hpp"

using namespace coalition;
using namespace testutil;

namespace {

// Independent mini DOT reader: extracts node names and edges with labels.
// Deliberately naive; it only understands the subset the exporter promises.
struct DotDoc {
    std::set<std::string> nodes;
    struct Edge {
        std::string a, b, label;
    };
    std::vector<Edge> edges;
};

DotDoc reparse_dot(const std::string& text) {
    DotDoc doc;
    std::size_t pos = 0;
    auto quoted = [&](std::size_t& at) {
        std::size_t open = text.find('"', at);
        std::size_t close = text.find('"', open + 1);
        REQUIRE(open != std::string::npos);
        REQUIRE(close != std::string::npos);
        at = close + 1;
        return text.substr(open + 1, close - open - 1);
    };
    while (true) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.find('"') == std::string::npos) continue;
        std::size_t at = 0;
        if (line.find("--") == std::string::npos) {
            std::size_t local = 0;
            std::string name = line;
            doc.nodes.insert([&] {
                std::size_t open = name.find('"');
                std::size_t close = name.find('"', open + 1);
                return name.substr(open + 1, close - open - 1);
            }());
            (void)at;
            (void)local;
            continue;
        }
        DotDoc::Edge e;
        std::size_t cursor = pos - (nl - pos);
        (void)cursor;
        std::size_t p = 0;
        auto q = [&](std::size_t& i) {
            std::size_t open = line.find('"', i);
            std::size_t close = line.find('"', open + 1);
            i = close + 1;
            return line.substr(open + 1, close - open - 1);
        };
        e.a = q(p);
        e.b = q(p);
        std::size_t lbl = line.find("label=\"", p);
        REQUIRE(lbl != std::string::npos);
        std::size_t start = lbl + 7;
        std::size_t end = line.find('"', start);
        e.label = line.substr(start, end - start);
        doc.edges.push_back(e);
    }
    return doc;
}

struct Fixture {
    MapGraph map;
    GameState state;

    Fixture()
        : map(load_map(map_json({"A", "B", "C", "D"}, {"A-B", "B-C", "C-D", "B-D"},
                                {"P1", "P2", "P3"},
                                {"P1:army:A", "P2:army:B", "P2:army:C", "P3:army:D"}))),
          state(initial_state(map)) {}

    Agreement pact(const std::string& u1_prov, const std::string& a1, const std::string& u2_prov,
                   const std::string& a2) const {
        Agreement a;
        a.u1 = unit_in(state, u1_prov);
        a.u2 = unit_in(state, u2_prov);
        a.power_i = state.units.at(a.u1).power;
        a.power_j = state.units.at(a.u2).power;
        a.a1 = parse_order(state, a.u1, a1);
        a.a2 = parse_order(state, a.u2, a2);
        a.round = 0;
        return a;
    }
};

} // namespace

TEST_CASE("graph: agreements accumulate as parallel edges, duplicates collapse") {
    Fixture f;
    CoalitionStructure s;
    auto a1 = f.pact("A", "A A - B", "B", "A B - C");
    auto a2 = f.pact("A", "A A H", "B", "A B S A A");

    s = add_agreement(f.map, f.state, s, a1);
    CHECK(s.edges().size() == 1);
    s = add_agreement(f.map, f.state, s, a1); // byte-identical duplicate
    CHECK(s.edges().size() == 1);
    s = add_agreement(f.map, f.state, s, a2); // distinct pact, same pair
    CHECK(s.edges().size() == 2);
    CHECK(s.players() == std::set<std::string>{"P1", "P2"});
    CHECK(s.edges_between("P1", "P2").size() == 2);
    CHECK(s.edges_between("P2", "P1").size() == 2); // orientation-insensitive
    CHECK(s.edges_between("P1", "P3").empty());
}

TEST_CASE("graph: the mirrored agreement is the same edge") {
    Fixture f;
    CoalitionStructure s;
    auto a = f.pact("A", "A A - B", "B", "A B - C");
    s = add_agreement(f.map, f.state, s, a);
    s = add_agreement(f.map, f.state, s, flipped(a));
    CHECK(s.edges().size() == 1);
    // Stored normalized with the lesser power first.
    CHECK(s.edges()[0].agreement.power_i == "P1");
    CHECK(s.edges()[0].agreement.power_j == "P2");
}

TEST_CASE("graph: invalid agreements are rejected") {
    Fixture f;
    CoalitionStructure s;

    auto wrong_owner = f.pact("A", "A A - B", "B", "A B - C");
    std::swap(wrong_owner.u1, wrong_owner.u2); // u1 now owned by power_j
    std::swap(wrong_owner.a1, wrong_owner.a2);
    CHECK_THROWS_AS(add_agreement(f.map, f.state, s, wrong_owner), ValidationError);

    auto same_power = f.pact("B", "A B H", "C", "A C H"); // both P2
    CHECK_THROWS_AS(add_agreement(f.map, f.state, s, same_power), ValidationError);

    auto illegal = f.pact("A", "A A - B", "B", "A B - C");
    illegal.a1 = make_move("D"); // A is not adjacent to D
    CHECK_THROWS_AS(add_agreement(f.map, f.state, s, illegal), ValidationError);

    auto ghost = f.pact("A", "A A - B", "B", "A B - C");
    ghost.u1 = "P1.9";
    CHECK_THROWS_AS(add_agreement(f.map, f.state, s, ghost), ValidationError);

    auto stale = f.pact("A", "A A - B", "B", "A B - C");
    stale.round = 3; // state is round 0
    CHECK_THROWS_AS(add_agreement(f.map, f.state, s, stale), ValidationError);
}

TEST_CASE("graph: honored inspects exactly the two agreed units") {
    Fixture f;
    auto a = f.pact("A", "A A - B", "B", "A B - C");

    JointAction joint;
    joint.orders[a.u1] = a.a1;
    joint.orders[a.u2] = a.a2;
    joint.orders[unit_in(f.state, "C")] = make_move("D");
    joint.orders[unit_in(f.state, "D")] = make_hold();

    auto h = honored(a, joint);
    CHECK(h.honored_i);
    CHECK(h.honored_j);
    CHECK_FALSE(h.missing_i);
    CHECK_FALSE(h.missing_j);

    // Other units' orders are irrelevant.
    joint.orders[unit_in(f.state, "C")] = make_hold();
    auto h2 = honored(a, joint);
    CHECK((h2.honored_i && h2.honored_j));

    joint.orders[a.u1] = make_hold(); // deviation
    auto h3 = honored(a, joint);
    CHECK_FALSE(h3.honored_i);
    CHECK(h3.honored_j);

    joint.orders.erase(a.u2); // disbanded
    auto h4 = honored(a, joint);
    CHECK_FALSE(h4.honored_j);
    CHECK(h4.missing_j);
    CHECK_FALSE(h4.missing_i);
}

TEST_CASE("graph: weights are stored on existing edges only, within range") {
    Fixture f;
    CoalitionStructure s;
    auto a = f.pact("A", "A A - B", "B", "A B - C");
    s = add_agreement(f.map, f.state, s, a);

    s = set_weight(s, a, 0.42);
    CHECK(s.edges()[0].weighted);
    CHECK(s.edges()[0].weight == doctest::Approx(0.42));

    s = set_weight(s, flipped(a), 0.7); // either orientation addresses the edge
    CHECK(s.edges()[0].weight == doctest::Approx(0.7));

    CHECK_THROWS_AS(set_weight(s, a, 1.5), ValidationError);
    CHECK_THROWS_AS(set_weight(s, a, -0.1), ValidationError);
    auto other = f.pact("A", "A A H", "B", "A B H");
    CHECK_THROWS_AS(set_weight(s, other, 0.5), ValidationError);
}

TEST_CASE("graph: DOT export is deterministic and reparses to the same shape") {
    Fixture f;
    CoalitionStructure s(std::set<std::string>{"P1", "P2", "P3", "P4"}); // P4 stays isolated
    auto a1 = f.pact("A", "A A - B", "B", "A B - C");
    auto a2 = f.pact("A", "A A H", "B", "A B S A A");
    auto a3 = f.pact("C", "A C H", "D", "A D S A C");
    s = add_agreement(f.map, f.state, s, a1);
    s = add_agreement(f.map, f.state, s, a2);
    s = add_agreement(f.map, f.state, s, a3);
    s = set_weight(s, a1, 0.42);

    auto text = export_dot(s);
    CHECK(text == export_dot(s)); // deterministic
    CHECK(text.find("wt=0.42") != std::string::npos);

    auto doc = reparse_dot(text);
    CHECK(doc.nodes == std::set<std::string>{"P1", "P2", "P3", "P4"});
    REQUIRE(doc.edges.size() == 3);
    int p1p2 = 0, p2p3 = 0;
    for (const auto& e : doc.edges) {
        if (e.a == "P1" && e.b == "P2") ++p1p2;
        if (e.a == "P2" && e.b == "P3") ++p2p3;
        CHECK(e.label.find(" | wt=") != std::string::npos);
        CHECK(e.label.find(':') != std::string::npos);
    }
    CHECK(p1p2 == 2);
    CHECK(p2p3 == 1);

    // Unweighted edges render a zero weight rather than omitting the field.
    bool has_zero = false;
    for (const auto& e : doc.edges)
        if (e.label.find("wt=0.00") != std::string::npos) has_zero = true;
    CHECK(has_zero);

    // Exact formatting contract for one line.
    std::string expected = "  \"P1\" -- \"P2\" [label=\"" + a1.u1 + ":A A - B | " + a1.u2 +
                           ":A B - C | wt=0.42\"];";
    CHECK(text.find(expected) != std::string::npos);
}
