#include "coalition/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coalition/errors.hpp"

namespace coalition {

namespace {

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

Lexicon identity_lexicon(const MapGraph& map) {
    Lexicon lex;
    for (const auto& [id, info] : map.provinces) lex.aliases[id] = id;
    return lex;
}

Lexicon load_lexicon(const MapGraph& map, const std::string& json_text) {
    Lexicon lex = identity_lexicon(map);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("lexicon: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("lexicon: document must be an object");
    for (const auto& [alias, target] : doc.items()) {
        std::string id = target.get<std::string>();
        if (!map.has_province(id))
            throw ValidationError("lexicon: alias '" + alias + "': unknown province '" + id + "'");
        lex.aliases[alias] = id;
    }
    return lex;
}

Lexicon load_lexicon_file(const MapGraph& map, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("lexicon: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_lexicon(map, ss.str());
}

MentionSet extract_mentions(const std::vector<Message>& messages, const Lexicon& lexicon) {
    // Pre-tokenized aliases, longest first so multi-word names win over their
    // component words, alphabetical among equals for determinism.
    struct Entry {
        std::vector<std::string> tokens;
        std::string id;
    };
    std::vector<Entry> entries;
    for (const auto& [alias, id] : lexicon.aliases) {
        Entry e{word_tokens(alias), id};
        if (!e.tokens.empty()) entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.tokens.size() > b.tokens.size(); });

    MentionSet out;
    for (const auto& msg : messages) {
        std::set<std::string> found;
        auto tokens = word_tokens(msg.text);
        std::size_t i = 0;
        while (i < tokens.size()) {
            bool matched = false;
            for (const auto& e : entries) {
                if (i + e.tokens.size() > tokens.size()) continue;
                if (std::equal(e.tokens.begin(), e.tokens.end(), tokens.begin() + static_cast<long>(i))) {
                    found.insert(e.id);
                    i += e.tokens.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) ++i;
        }
        out.provinces.insert(found.begin(), found.end());
        out.per_message.push_back(std::move(found));
    }
    return out;
}

} // namespace coalition
