#include "coalition/remote.hpp"

#include <chrono>
#include <cmath>
#include <semaphore>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "coalition/corpus.hpp"
#include "coalition/engine.hpp"
#include "coalition/errors.hpp"

namespace coalition {

namespace {

using nlohmann::json;

void apply_timeouts(httplib::Client& cli, double timeout_s) {
    auto ms = std::chrono::milliseconds(std::llround(timeout_s * 1000.0));
    cli.set_connection_timeout(ms);
    cli.set_read_timeout(ms);
    cli.set_write_timeout(ms);
}

// One POST with the configured transport retry. Returns the definitive
// response; throws ProtocolError when none arrives.
httplib::Response post_with_retry(const RemoteConfig& config, const std::string& path,
                                  const std::string& body) {
    std::string last_error;
    for (int attempt = 0; attempt <= std::max(config.retries, 0); ++attempt) {
        httplib::Client cli(config.endpoint);
        apply_timeouts(cli, config.timeout_s);
        auto res = cli.Post(path, body, "application/json");
        if (res) return *res;
        last_error = httplib::to_string(res.error());
    }
    throw ProtocolError("remote " + path + ": no response from " + config.endpoint + " (" +
                        last_error + ")");
}

} // namespace

struct RemoteBackend::Slots {
    std::counting_semaphore<> sem;
    explicit Slots(int n) : sem(n > 0 ? n : 1) {}
};

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), slots_(std::make_unique<Slots>(config_.max_in_flight)) {
    if (config_.endpoint.empty()) throw ValidationError("remote backend: empty endpoint");
}

RemoteBackend::~RemoteBackend() = default;

ActionDistribution RemoteBackend::intent_distribution(const HypergameView& view,
                                                      const std::string& power,
                                                      const std::string& unit,
                                                      bool use_dialogue) const {
    const GameState& state = view.last_state();
    auto uit = state.units.find(unit);
    if (uit == state.units.end() || uit->second.power != power)
        throw ValidationError("intent: unit '" + unit + "' is not owned by " + power);

    json request{{"view", json::parse(play_rounds_to_json(view.play))},
                 {"power", power},
                 {"unit", unit},
                 {"use_dialogue", use_dialogue}};

    slots_->sem.acquire();
    struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
    } release{slots_->sem};

    auto res = post_with_retry(config_, "/v1/intent", request.dump());
    if (res.status / 100 != 2)
        throw ProtocolError("remote /v1/intent: status " + std::to_string(res.status));

    std::vector<std::pair<Order, double>> support;
    try {
        json doc = json::parse(res.body);
        for (const auto& row : doc.at("support"))
            support.push_back({parse_order(state, unit, row.at("order").get<std::string>()),
                               row.at("p").get<double>()});
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("remote /v1/intent: malformed response: ") + e.what());
    } catch (const ValidationError& e) {
        throw ProtocolError(std::string("remote /v1/intent: malformed response: ") + e.what());
    }
    try {
        return make_distribution(*view.play.map, state, unit, std::move(support));
    } catch (const ValidationError& e) {
        throw ProtocolError(std::string("remote /v1/intent: invalid distribution: ") + e.what());
    }
}

std::set<std::string> remote_mentions(const RemoteConfig& config,
                                      const std::vector<Message>& messages,
                                      const Lexicon& lexicon) {
    std::set<std::string> provinces;
    for (const auto& [alias, id] : lexicon.aliases) provinces.insert(id);

    auto fallback = [&] { return extract_mentions(messages, lexicon).provinces; };

    json request{{"messages", json::array()},
                 {"provinces", provinces},
                 {"aliases", lexicon.aliases}};
    for (const auto& m : messages)
        request["messages"].push_back({{"from", m.from}, {"to", m.to}, {"text", m.text}});

    try {
        auto res = post_with_retry(config, "/v1/mentions", request.dump());
        if (res.status / 100 != 2) return fallback();
        json doc = json::parse(res.body);
        std::set<std::string> out;
        for (const auto& id : doc.at("mentions")) {
            auto s = id.get<std::string>();
            if (!provinces.count(s)) return fallback();
            out.insert(s);
        }
        return out;
    } catch (const ProtocolError&) {
        return fallback();
    } catch (const json::exception&) {
        return fallback();
    }
}

} // namespace coalition
