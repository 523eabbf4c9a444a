#pragma once

#include "esbrp/generator.hpp"
#include "esbrp/instance.hpp"
#include "esbrp/instance_io.hpp"

#include <cmath>
#include <string>

namespace esbrp::test {

inline std::string data_path(const std::string& name) {
    return std::string(ESBRP_SOURCE_DIR) + "/data/" + name;
}

inline Instance table4() { return load_instance_file(data_path("table4_network.json")); }
inline Instance tight_bell() { return load_instance_file(data_path("tight_bell.json")); }
inline Instance one_stop() { return load_instance_file(data_path("one_stop.json")); }

// Independent annuity oracle: final loan balance after n years of paying a,
// with the balance growing at `rate` first. The annuity zeroes the balance.
inline double balance_after(double principal, double rate, int years, double a) {
    double balance = principal;
    for (int i = 0; i < years; ++i) balance = balance * (1.0 + rate) - a;
    return balance;
}

inline double annuity_by_simulation(double principal, double rate, int years) {
    double lo = 0.0, hi = principal * (1.0 + rate);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (balance_after(principal, rate, years, mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Small random instance for oracle comparisons: brute-force territory.
inline Instance oracle_instance(uint64_t seed, int stops, int types = 1) {
    GenSpec spec;
    spec.stops = stops;
    spec.seed = seed;
    spec.charger_sites = 1;
    spec.copies_per_site = static_cast<int>(seed % 3); // 0, 1 or 2 copies
    // Without a charger, keep the box small enough that the fleet can cover it.
    spec.extent = spec.copies_per_site == 0 ? 28.0 + static_cast<double>(seed % 5) * 4.0
                                            : 35.0 + static_cast<double>(seed % 5) * 8.0;
    spec.window_width = 400.0 + static_cast<double>(seed % 7) * 60.0;
    for (int t = 0; t < types; ++t) spec.catalog_types.push_back(t);
    spec.fleet_mode = types > 1 ? FleetMode::Heterogeneous : FleetMode::Homogeneous;
    return gen_instance(spec);
}

} // namespace esbrp::test
