#include "coalition/map.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coalition/errors.hpp"

namespace coalition {

using nlohmann::json;

bool MapGraph::adjacent(const std::string& a, const std::string& b) const {
    auto it = adjacency.find(a);
    return it != adjacency.end() && it->second.count(b) != 0;
}

bool MapGraph::has_power(const std::string& p) const {
    return std::find(powers.begin(), powers.end(), p) != powers.end();
}

int MapGraph::distance(const std::string& from, const std::string& to) const {
    if (!has_province(from) || !has_province(to))
        throw ValidationError("distance: unknown province '" + (has_province(from) ? to : from) + "'");
    if (from == to) return 0;
    std::map<std::string, int> dist{{from, 0}};
    std::deque<std::string> queue{from};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        auto it = adjacency.find(cur);
        if (it == adjacency.end()) continue;
        for (const auto& next : it->second) {
            if (dist.count(next)) continue;
            dist[next] = dist[cur] + 1;
            if (next == to) return dist[next];
            queue.push_back(next);
        }
    }
    return -1;
}

int MapGraph::diameter() const {
    int best = 0;
    for (const auto& [a, infoa] : provinces)
        for (const auto& [b, infob] : provinces) {
            int d = distance(a, b);
            best = std::max(best, d);
        }
    return best;
}

std::vector<std::string> MapGraph::supply_centers() const {
    std::vector<std::string> out;
    for (const auto& [id, info] : provinces)
        if (info.supply_center) out.push_back(id);
    return out;
}

void MapGraph::validate() const {
    if (provinces.empty()) throw ValidationError("map: no provinces");
    if (powers.size() < 2) throw ValidationError("map: powers: need at least 2 powers");
    {
        std::set<std::string> seen;
        for (const auto& p : powers)
            if (!seen.insert(p).second)
                throw ValidationError("map: powers: duplicate power '" + p + "'");
    }
    for (const auto& [id, nbrs] : adjacency) {
        if (!has_province(id))
            throw ValidationError("map: adjacency: unknown province '" + id + "'");
        for (const auto& n : nbrs) {
            if (!has_province(n))
                throw ValidationError("map: adjacency: unknown province '" + n + "' listed for '" +
                                      id + "'");
            if (n == id) throw ValidationError("map: adjacency: self-loop on '" + id + "'");
            if (!adjacent(n, id))
                throw ValidationError("map: adjacency: asymmetric edge '" + id + "-" + n + "'");
        }
    }
    std::set<std::string> occupied;
    for (const auto& su : start_units) {
        if (!has_province(su.province))
            throw ValidationError("map: start_units: unknown province '" + su.province + "'");
        if (!has_power(su.power))
            throw ValidationError("map: start_units: unknown power '" + su.power + "'");
        if (!can_occupy(su.kind, provinces.at(su.province).kind))
            throw ValidationError("map: start_units: unit kind cannot occupy '" + su.province + "'");
        if (!occupied.insert(su.province).second)
            throw ValidationError("map: start_units: province '" + su.province +
                                  "' occupied twice");
    }
}

namespace {

Terrain parse_terrain(const std::string& s, const std::string& id) {
    if (s == "land") return Terrain::land;
    if (s == "sea") return Terrain::sea;
    if (s == "coast") return Terrain::coast;
    throw ParseError("map: provinces: '" + id + "': unknown kind '" + s + "'");
}

UnitKind parse_unit_kind(const std::string& s, const std::string& ctx) {
    if (s == "army") return UnitKind::army;
    if (s == "fleet") return UnitKind::fleet;
    throw ParseError("map: " + ctx + ": unknown unit kind '" + s + "'");
}

} // namespace

MapGraph load_map(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("map: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("map: document must be an object");
    for (const char* key : {"provinces", "powers", "start_units"})
        if (!doc.contains(key)) throw ParseError(std::string("map: missing key '") + key + "'");

    MapGraph map;
    // First pass: province records. 'adjacent' may be omitted entirely; a
    // declared list is remembered so symmetry can be enforced against it.
    std::map<std::string, std::set<std::string>> declared;
    std::set<std::string> has_list;
    for (const auto& p : doc.at("provinces")) {
        if (!p.is_object() || !p.contains("id"))
            throw ParseError("map: provinces: record missing 'id'");
        std::string id = p.at("id").get<std::string>();
        if (map.provinces.count(id))
            throw ParseError("map: provinces: duplicate id '" + id + "'");
        ProvinceInfo info;
        info.kind = parse_terrain(p.value("kind", std::string("land")), id);
        info.supply_center = p.value("supply", false);
        map.provinces[id] = info;
        if (p.contains("adjacent")) {
            has_list.insert(id);
            for (const auto& n : p.at("adjacent"))
                declared[id].insert(n.get<std::string>());
        }
    }
    for (const auto& [id, nbrs] : declared)
        for (const auto& n : nbrs) {
            if (!map.has_province(n))
                throw ParseError("map: provinces: '" + id + "': unknown adjacent province '" + n +
                                 "'");
            if (n == id) throw ParseError("map: provinces: '" + id + "': self-adjacency");
            // A record that declares its own list must list the edge back.
            if (has_list.count(n) && !declared[n].count(id))
                throw ValidationError("map: adjacency: asymmetric edge '" + id + "-" + n + "'");
            map.adjacency[id].insert(n);
            map.adjacency[n].insert(id);
        }

    for (const auto& p : doc.at("powers")) map.powers.push_back(p.get<std::string>());

    for (const auto& su : doc.at("start_units")) {
        StartUnit s;
        s.power = su.at("power").get<std::string>();
        s.kind = parse_unit_kind(su.at("kind").get<std::string>(), "start_units");
        s.province = su.at("province").get<std::string>();
        map.start_units.push_back(s);
    }

    map.validate();
    return map;
}

MapGraph load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("map: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_map(ss.str());
}

std::string map_to_json(const MapGraph& map) {
    json provinces = json::array();
    for (const auto& [id, info] : map.provinces) {
        json rec;
        rec["id"] = id;
        rec["kind"] = info.kind == Terrain::land   ? "land"
                      : info.kind == Terrain::sea ? "sea"
                                                  : "coast";
        rec["supply"] = info.supply_center;
        json adj = json::array();
        auto it = map.adjacency.find(id);
        if (it != map.adjacency.end())
            for (const auto& n : it->second) adj.push_back(n);
        rec["adjacent"] = adj;
        provinces.push_back(rec);
    }
    json start = json::array();
    for (const auto& su : map.start_units) {
        start.push_back({{"power", su.power},
                         {"kind", su.kind == UnitKind::army ? "army" : "fleet"},
                         {"province", su.province}});
    }
    json doc;
    doc["provinces"] = provinces;
    doc["powers"] = map.powers;
    doc["start_units"] = start;
    return doc.dump();
}

} // namespace coalition
