#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "coalition/map.hpp"
#include "coalition/play.hpp"

namespace coalition {

// Alias table mapping surface forms (possibly multi-word) to province ids.
// Matching is case-insensitive on word boundaries, longest alias first.
struct Lexicon {
    std::map<std::string, std::string> aliases;
};

// Every province id names itself.
Lexicon identity_lexicon(const MapGraph& map);

// Identity lexicon extended with aliases from a JSON object {alias: id}.
// Unknown target provinces are a validation error naming the alias.
Lexicon load_lexicon(const MapGraph& map, const std::string& json_text);
Lexicon load_lexicon_file(const MapGraph& map, const std::string& path);

struct MentionSet {
    std::set<std::string> provinces;
    // Parallel to the scanned message list.
    std::vector<std::set<std::string>> per_message;
};

// Scans dialogue for province mentions. Tokens are maximal alphanumeric runs;
// an alias matches only as a whole token sequence, so no partial-word hits.
// Overlapping candidates resolve longest-first, then alphabetically.
MentionSet extract_mentions(const std::vector<Message>& messages, const Lexicon& lexicon);

} // namespace coalition
