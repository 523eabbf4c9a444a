#pragma once

#include "esbrp/instance.hpp"

#include <cstdint>
#include <vector>

namespace esbrp {

struct GenSpec {
    int stops = 5;
    uint64_t seed = 1;
    int charger_sites = 1;
    int copies_per_site = 2;
    // 0 leaves sites at the demand centroids; 1 moves them onto the school.
    double charger_pull = 0.0;
    double extent = 40.0; // stops scatter over [0, extent]^2
    int demand_min = 5;
    int demand_max = 20;
    double service_time = 45.0;
    double speed = 1.0;
    double window_width = 600.0; // stop window length
    double bell_earliest = 900.0;
    double bell_latest = 1200.0;
    double max_ride_time = 1200.0;
    std::vector<int> catalog_types; // rows of default_bus_catalog; empty = {0}
    FleetMode fleet_mode = FleetMode::Homogeneous;
};

// Reproducible random instance: uniform stop coordinates, Euclidean
// distances, windows laid out backwards from the bell so a greedy start is
// likely feasible, charger sites at demand centroids. Identical spec gives
// byte-identical serialized output.
Instance gen_instance(const GenSpec& spec);

// Restriction of an instance to a subset of its stops (depot, school, and all
// chargers retained). Useful for carving oracle-sized pieces out of larger
// networks.
Instance sub_instance(const Instance& inst, const std::vector<int>& stop_ids);

} // namespace esbrp
