#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "coalition/intent.hpp"
#include "coalition/lexicon.hpp"

namespace coalition {

// Connection settings for the wire services. Immutable once constructed and
// safe to share across threads; every request opens its own connection.
struct RemoteConfig {
    std::string endpoint; // base URL, e.g. "http://127.0.0.1:8080"
    double timeout_s = 10.0;
    int retries = 1;       // extra attempts after a transport failure
    int max_in_flight = 4; // bound on concurrent outstanding requests
};

// Wire-backed intent source. POSTs the filtered view and query to
// <endpoint>/v1/intent and expects {"support": [{"order", "p"}]} over the
// unit's legal orders. A request that gets no answer (connect or read
// failure) is retried; a definitive answer is never retried, and non-2xx
// statuses or malformed bodies raise ProtocolError.
class RemoteBackend : public IntentBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;

    RemoteBackend(const RemoteBackend&) = delete;
    RemoteBackend& operator=(const RemoteBackend&) = delete;

    ActionDistribution intent_distribution(const HypergameView& view, const std::string& power,
                                           const std::string& unit,
                                           bool use_dialogue) const override;

    const RemoteConfig& config() const { return config_; }

private:
    RemoteConfig config_;
    struct Slots; // in-flight bound
    std::unique_ptr<Slots> slots_;
};

// Asks <endpoint>/v1/mentions which provinces the messages reference. The
// request carries the messages, the known province ids, and the alias table;
// the answer must be a subset of those ids. Any failure (transport after the
// retry, non-2xx, malformed or unknown ids) falls back to rule-based
// extraction, so this never throws on service trouble.
std::set<std::string> remote_mentions(const RemoteConfig& config,
                                      const std::vector<Message>& messages,
                                      const Lexicon& lexicon);

} // namespace coalition
