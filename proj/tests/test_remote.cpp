#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "coalition/agents.hpp"
#include "coalition/engine.hpp"
#include "coalition/errors.hpp"
#include "coalition/intent.hpp"
#include "coalition/lexicon.hpp"
#include "coalition/remote.hpp"
#include "test_util.hpp"

using namespace coalition;
using nlohmann::json;

static std::string fixture(const std::string& name) {
    return std::string(FIXTURES_DIR) + "/" + name;
}

static std::shared_ptr<const MapGraph> trio_map() {
    return std::make_shared<MapGraph>(load_map_file(fixture("map_trio.json")));
}

// A two-round hold play with hand-planted dialogue, viewed as the AUS-ITA
// pair. Holding keeps every unit on its start province, so the canned server
// distributions below stay legal at the prediction point.
static HypergameView aus_ita_view(std::shared_ptr<const MapGraph> map) {
    std::map<std::string, std::shared_ptr<Agent>> agents;
    for (const auto& p : map->powers) agents[p] = std::make_shared<HoldAgent>();
    Play play = simulate(map, agents, 2, 5);
    play.rounds[0].dialogue.messages = {{"AUS", "ITA", "hello Venice"},
                                        {"ITA", "AUS", "hello Vienna"},
                                        {"AUS", "TUR", "ignore this"}};
    play.rounds[1].dialogue.messages = {{"TUR", "ITA", "and this"}};
    return filter_view(play, "AUS", "ITA");
}

namespace {

// In-process HTTP service; each test installs routes before start().
struct TestServer {
    httplib::Server svr;
    int port = 0;
    std::thread th;

    void start() {
        port = svr.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
    ~TestServer() {
        svr.stop();
        if (th.joinable()) th.join();
    }
};

RemoteConfig quick_config(const std::string& endpoint, int retries = 1) {
    RemoteConfig cfg;
    cfg.endpoint = endpoint;
    cfg.timeout_s = 2.0;
    cfg.retries = retries;
    return cfg;
}

// Accepts TCP connections and immediately drops them, counting attempts.
// Lets tests observe the transport retry without any HTTP machinery.
struct DroppingListener {
    int fd = -1;
    int port = 0;
    std::atomic<int> accepts{0};
    std::thread th;

    void start() {
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
        port = ntohs(addr.sin_port);
        REQUIRE(::listen(fd, 16) == 0);
        th = std::thread([this] {
            for (;;) {
                int c = ::accept(fd, nullptr, nullptr);
                if (c < 0) return;
                ++accepts;
                ::close(c);
            }
        });
    }
    ~DroppingListener() {
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
        if (th.joinable()) th.join();
    }
};

} // namespace

TEST_CASE("remote: intent queries round-trip and carry the filtered view") {
    auto map = trio_map();
    auto view = aus_ita_view(map);

    TestServer server;
    std::mutex mu;
    std::string last_body;
    server.svr.Post("/v1/intent", [&](const httplib::Request& req, httplib::Response& res) {
        {
            std::lock_guard<std::mutex> lock(mu);
            last_body = req.body;
        }
        bool dialogue = json::parse(req.body).at("use_dialogue").get<bool>();
        json support = dialogue ? json::array({{{"order", "A VIE - TRI"}, {"p", 0.75}},
                                               {{"order", "A VIE H"}, {"p", 0.25}}})
                                : json::array({{{"order", "A VIE H"}, {"p", 1.0}}});
        res.set_content(json{{"support", support}}.dump(), "application/json");
    });
    server.start();

    RemoteBackend backend(quick_config(server.endpoint()));
    auto after = backend.intent_distribution(view, "AUS", "AUS.1", true);
    REQUIRE(after.support.size() == 2);
    CHECK(after.unit == "AUS.1");
    CHECK(after.support[0].text == "A VIE H"); // canonical sorting, hold first
    CHECK(after.support[0].p == doctest::Approx(0.25));
    CHECK(after.support[1].text == "A VIE - TRI");
    CHECK(after.support[1].p == doctest::Approx(0.75));

    // The request body carries the query and exactly the pair's dialogue.
    json req;
    {
        std::lock_guard<std::mutex> lock(mu);
        req = json::parse(last_body);
    }
    CHECK(req.at("power") == "AUS");
    CHECK(req.at("unit") == "AUS.1");
    CHECK(req.at("use_dialogue") == true);
    REQUIRE(req.at("view").is_array());
    CHECK(req.at("view").size() == 3); // two acted rounds plus the terminal state
    std::size_t kept = 0;
    for (const auto& round : req.at("view"))
        for (const auto& m : round.at("messages")) {
            std::set<std::string> pair{m.at("from").get<std::string>(),
                                       m.at("to").get<std::string>()};
            CHECK(pair == std::set<std::string>{"AUS", "ITA"});
            ++kept;
        }
    CHECK(kept == 2);

    auto before = backend.intent_distribution(view, "AUS", "AUS.1", false);
    REQUIRE(before.support.size() == 1);
    CHECK(before.support[0].text == "A VIE H");
    CHECK(before.support[0].p == doctest::Approx(1.0));
}

TEST_CASE("remote: ownership is checked before anything goes on the wire") {
    auto map = trio_map();
    auto view = aus_ita_view(map);
    // Nothing listens here; reaching the network would raise ProtocolError
    // instead of the expected validation failure.
    RemoteBackend backend(quick_config("http://127.0.0.1:9", 0));
    CHECK_THROWS_AS(backend.intent_distribution(view, "AUS", "ITA.1", true), ValidationError);
    CHECK_THROWS_AS(backend.intent_distribution(view, "AUS", "GHOST.9", true), ValidationError);
    CHECK_THROWS_AS(RemoteBackend(quick_config("")), ValidationError);
}

TEST_CASE("remote: bad answers are protocol errors") {
    auto map = trio_map();
    auto view = aus_ita_view(map);

    TestServer server;
    server.svr.Post("/v1/intent", [&](const httplib::Request& req, httplib::Response& res) {
        std::string mode = json::parse(req.body).at("power").get<std::string>();
        // The queried power selects the malformation under test.
        if (mode == "AUS") {
            res.status = 500;
        } else if (mode == "ITA") {
            res.set_content("not json", "text/plain");
        } else {
            res.set_content(json{{"support", json::array({{{"order", "A CON - VEN"}, {"p", 1.0}}})}}
                                .dump(),
                            "application/json");
        }
    });
    server.svr.Post("/v1/other", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{}", "application/json");
    });
    server.start();

    RemoteBackend backend(quick_config(server.endpoint()));
    CHECK_THROWS_WITH_AS(backend.intent_distribution(view, "AUS", "AUS.1", true),
                         doctest::Contains("status 500"), ProtocolError);
    CHECK_THROWS_WITH_AS(backend.intent_distribution(view, "ITA", "ITA.1", true),
                         doctest::Contains("malformed"), ProtocolError);
    // CON is not adjacent to VEN, so the served order is illegal for TUR.1.
    CHECK_THROWS_AS(backend.intent_distribution(view, "TUR", "TUR.1", true), ProtocolError);
}

TEST_CASE("remote: distributions that fail validation are protocol errors") {
    auto map = trio_map();
    auto view = aus_ita_view(map);

    TestServer server;
    server.svr.Post("/v1/intent", [&](const httplib::Request& req, httplib::Response& res) {
        bool dialogue = json::parse(req.body).at("use_dialogue").get<bool>();
        json support = dialogue
                           ? json::array({{{"order", "A VIE H"}, {"p", 0.5}}}) // sums to 0.5
                           : json::array();                                    // empty support
        res.set_content(json{{"support", support}}.dump(), "application/json");
    });
    server.start();

    RemoteBackend backend(quick_config(server.endpoint()));
    CHECK_THROWS_AS(backend.intent_distribution(view, "AUS", "AUS.1", true), ProtocolError);
    CHECK_THROWS_AS(backend.intent_distribution(view, "AUS", "AUS.1", false), ProtocolError);
}

TEST_CASE("remote: transport failures are retried exactly once") {
    auto map = trio_map();
    auto view = aus_ita_view(map);

    DroppingListener listener;
    listener.start();

    RemoteBackend retrying(quick_config("http://127.0.0.1:" + std::to_string(listener.port), 1));
    CHECK_THROWS_AS(retrying.intent_distribution(view, "AUS", "AUS.1", true), ProtocolError);
    CHECK(listener.accepts.load() == 2); // first attempt plus one retry

    RemoteBackend single(quick_config("http://127.0.0.1:" + std::to_string(listener.port), 0));
    CHECK_THROWS_AS(single.intent_distribution(view, "AUS", "AUS.1", true), ProtocolError);
    CHECK(listener.accepts.load() == 3);
}

TEST_CASE("remote: in-flight requests stay within the configured bound") {
    auto map = trio_map();
    auto view = aus_ita_view(map);

    TestServer server;
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
    std::atomic<int> hits{0};
    server.svr.Post("/v1/intent", [&](const httplib::Request&, httplib::Response& res) {
        int now = ++active;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(60));
        --active;
        ++hits;
        res.set_content(
            json{{"support", json::array({{{"order", "A VIE H"}, {"p", 1.0}}})}}.dump(),
            "application/json");
    });
    server.start();

    auto cfg = quick_config(server.endpoint());
    cfg.max_in_flight = 2;
    RemoteBackend backend(cfg);

    std::vector<std::thread> callers;
    std::atomic<int> ok{0};
    for (int i = 0; i < 6; ++i)
        callers.emplace_back([&] {
            auto dist = backend.intent_distribution(view, "AUS", "AUS.1", true);
            if (dist.support.size() == 1) ++ok;
        });
    for (auto& t : callers) t.join();

    CHECK(ok.load() == 6);
    CHECK(hits.load() == 6);
    CHECK(peak.load() <= 2);
}

TEST_CASE("remote: mention service answers are used, anything else falls back") {
    auto map = trio_map();
    auto lexicon = load_lexicon_file(*map, fixture("aliases_trio.json"));
    std::vector<Message> messages{{"AUS", "ITA", "meet me in Vienna"},
                                  {"ITA", "AUS", "fine, GRE after"}};
    auto rule_based = extract_mentions(messages, lexicon).provinces;
    REQUIRE(rule_based == std::set<std::string>{"VIE", "GRE"});

    TestServer server;
    std::mutex mu;
    std::string last_body;
    std::string reply = R"({"mentions":["CON"]})";
    int status = 200;
    server.svr.Post("/v1/mentions", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(mu);
        last_body = req.body;
        res.status = status;
        res.set_content(reply, "application/json");
    });
    server.start();
    auto cfg = quick_config(server.endpoint());

    // A healthy answer wins even where rule-based extraction disagrees.
    CHECK(remote_mentions(cfg, messages, lexicon) == std::set<std::string>{"CON"});
    {
        std::lock_guard<std::mutex> lock(mu);
        json req = json::parse(last_body);
        CHECK(req.at("messages").size() == 2);
        CHECK(req.at("messages")[0].at("text") == "meet me in Vienna");
        CHECK(req.at("provinces").size() == map->provinces.size());
        CHECK(req.at("aliases").at("Vienna") == "VIE");
    }

    // Unknown ids, malformed bodies, and error statuses all fall back.
    reply = R"({"mentions":["ATLANTIS"]})";
    CHECK(remote_mentions(cfg, messages, lexicon) == rule_based);
    reply = "not json";
    CHECK(remote_mentions(cfg, messages, lexicon) == rule_based);
    reply = R"({"wrong":"shape"})";
    CHECK(remote_mentions(cfg, messages, lexicon) == rule_based);
    reply = R"({"mentions":["CON"]})";
    status = 503;
    CHECK(remote_mentions(cfg, messages, lexicon) == rule_based);

    // No service at all.
    CHECK(remote_mentions(quick_config("http://127.0.0.1:9", 0), messages, lexicon) ==
          rule_based);
}
