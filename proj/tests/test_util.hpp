#pragma once

#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coalition/engine.hpp"
#include "coalition/map.hpp"
#include "coalition/state.hpp"

namespace testutil {

// Builds a map document from terse specs: provinces as "ID:kind[:SC]",
// edges as "A-B", units as "POWER:kind:PROV".
inline std::string map_json(const std::vector<std::string>& provinces,
                            const std::vector<std::string>& edges,
                            const std::vector<std::string>& powers,
                            const std::vector<std::string>& units) {
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        parts.push_back(cur);
        return parts;
    };
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& e : edges) {
        auto p = split(e, '-');
        adj[p[0]].insert(p[1]);
        adj[p[1]].insert(p[0]);
    }
    std::ostringstream out;
    out << "{\"provinces\":[";
    bool first = true;
    for (const auto& spec : provinces) {
        auto p = split(spec, ':');
        if (!first) out << ',';
        first = false;
        out << "{\"id\":\"" << p[0] << "\",\"kind\":\"" << (p.size() > 1 ? p[1] : "land")
            << "\",\"supply\":" << (p.size() > 2 && p[2] == "SC" ? "true" : "false")
            << ",\"adjacent\":[";
        bool f2 = true;
        for (const auto& n : adj[p[0]]) {
            if (!f2) out << ',';
            f2 = false;
            out << '"' << n << '"';
        }
        out << "]}";
    }
    out << "],\"powers\":[";
    first = true;
    for (const auto& p : powers) {
        if (!first) out << ',';
        first = false;
        out << '"' << p << '"';
    }
    out << "],\"start_units\":[";
    first = true;
    for (const auto& spec : units) {
        auto p = split(spec, ':');
        if (!first) out << ',';
        first = false;
        out << "{\"power\":\"" << p[0] << "\",\"kind\":\"" << p[1] << "\",\"province\":\"" << p[2]
            << "\"}";
    }
    out << "]}";
    return out.str();
}

// Independent BFS distance oracle (the library has its own; tests must not
// trust it for derived expectations).
inline int bfs_oracle(const coalition::MapGraph& map, const std::string& from,
                      const std::string& to) {
    if (from == to) return 0;
    std::map<std::string, int> dist{{from, 0}};
    std::deque<std::string> q{from};
    while (!q.empty()) {
        auto cur = q.front();
        q.pop_front();
        auto it = map.adjacency.find(cur);
        if (it == map.adjacency.end()) continue;
        for (const auto& n : it->second) {
            if (dist.count(n)) continue;
            dist[n] = dist[cur] + 1;
            if (n == to) return dist[n];
            q.push_back(n);
        }
    }
    return -1;
}

// Unit id of the single unit a power starts with in province prov.
inline std::string unit_in(const coalition::GameState& state, const std::string& prov) {
    for (const auto& [uid, u] : state.units)
        if (u.province == prov) return uid;
    return {};
}

} // namespace testutil
