#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "coalition/order.hpp"

namespace coalition {

enum class Terrain { land, sea, coast };

struct ProvinceInfo {
    Terrain kind = Terrain::land;
    bool supply_center = false;
};

struct StartUnit {
    std::string power;
    UnitKind kind = UnitKind::army;
    std::string province;
};

// Static board description. Adjacency is stored symmetric and irreflexive;
// powers keep the order they were declared in.
struct MapGraph {
    std::map<std::string, ProvinceInfo> provinces;
    std::map<std::string, std::set<std::string>> adjacency;
    std::vector<std::string> powers;
    std::vector<StartUnit> start_units;

    bool has_province(const std::string& id) const { return provinces.count(id) != 0; }
    bool adjacent(const std::string& a, const std::string& b) const;
    bool has_power(const std::string& p) const;

    // Hop count between provinces, ignoring terrain. Returns -1 if unreachable.
    int distance(const std::string& from, const std::string& to) const;

    // Longest finite pairwise distance; 0 for single-province maps.
    int diameter() const;

    std::vector<std::string> supply_centers() const;

    // Checks every structural invariant and throws ValidationError naming the
    // offending field on the first violation.
    void validate() const;
};

inline bool can_occupy(UnitKind kind, Terrain t) {
    if (t == Terrain::coast) return true;
    return kind == UnitKind::army ? t == Terrain::land : t == Terrain::sea;
}

// Parses a map document. Province records may omit "adjacent" entirely, in
// which case their neighbours are derived from the other records; a record
// that does declare a list must agree with every edge pointing at it, so a
// one-sided listing between two declared lists is rejected as asymmetric.
MapGraph load_map(const std::string& json_text);
MapGraph load_map_file(const std::string& path);

std::string map_to_json(const MapGraph& map);

} // namespace coalition
