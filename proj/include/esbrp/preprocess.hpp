#pragma once

#include "esbrp/instance.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace esbrp {

// Per-bus-type arc admissibility. Rules only ever clear bits; an arc that is
// off stays off.
struct ArcMask {
    int n = 0;
    int types = 0;
    std::vector<uint8_t> bits; // [type][i][j]

    ArcMask() = default;
    ArcMask(int side, int type_count, bool value)
        : n(side), types(type_count),
          bits(static_cast<size_t>(side) * side * type_count, value ? 1 : 0) {}

    bool allowed(int type, int i, int j) const {
        return bits[(static_cast<size_t>(type) * n + i) * n + j] != 0;
    }
    void set(int type, int i, int j, bool v) {
        bits[(static_cast<size_t>(type) * n + i) * n + j] = v ? 1 : 0;
    }
    bool operator==(const ArcMask& other) const = default;
};

// Removal counts per bus type and rule (1-6); an arc killed by several rules
// is charged to the lowest-numbered one.
struct EliminationStats {
    std::vector<std::array<int, 7>> removed_by_rule; // [type][rule], index 0 unused
    std::string csv() const;                         // columns: type,rule,removed_count
};

// Structural arcs only: i in {depot, stops, chargers}, j in {stops, chargers,
// school}, i != j. No rule applied yet.
ArcMask structural_mask(const Instance& inst);

// Applies the six static elimination rules on top of the structural mask:
//   1. energy: consumption * d_ij exceeds the battery
//   2. timing: departing i at its earliest can no longer meet j's window
//   3. depot -> charger (buses leave fully charged)
//   4. charger -> school (a charged bus goes on to serve stops)
//   5. charger -> charger
//   6. depot -> school, school -> anything, self loops
ArcMask eliminate_arcs(const Instance& inst, EliminationStats* stats = nullptr);

struct ConnectivityReport {
    struct TypeReport {
        int type = 0;
        std::vector<int> stranded; // stop node ids unreachable from the depot
                                   // or unable to reach the school
    };
    std::vector<TypeReport> per_type;
    bool ok() const;
    std::string str() const;
};

// Graph reachability over allowed arcs: every stop must be reachable from the
// depot and must reach the school, per bus type.
ConnectivityReport connectivity_report(const Instance& inst, const ArcMask& mask);

} // namespace esbrp
