#pragma once

#include "esbrp/exact_solver.hpp"
#include "esbrp/lns_solver.hpp"

#include <string>
#include <vector>

namespace esbrp {

enum class SolverChoice { Exact, Lns };

struct SolveOptions {
    double time_limit = 600.0; // per exact solve
    uint64_t seed = 1;         // base seed; row i runs with seed + i
    int iterations = 10000;    // per LNS solve
};

struct SweepRow {
    double swept = 0;
    uint64_t seed = 0;
    std::string status; // optimal | feasible | infeasible
    double total = 0;
    double fleet_cost = 0;
    double travel_cost = 0;
    double charge_cost = 0;
    int fleet_count = 0;
    double distance = 0;
    double travel_time = 0;
    int chargers_used = 0;
    std::vector<double> charges;

    // compare_charging extras
    std::string full_status;
    double full_total = 0;
    double savings = 0;
    double flexibility_seconds = 0;
    std::string note;
};

struct SweepReport {
    std::string kind; // battery | mrt | charging
    std::vector<SweepRow> rows;
    std::string csv() const;
};

// The bus type a battery size induces: an exact catalog row when one matches,
// otherwise costs from the stock pricing rule with the remaining parameters
// interpolated between the neighboring stock types.
BusType bus_type_for_battery(const Instance& inst, double kwh);

// One homogeneous solve per battery size; component costs exposed so the
// size/cost trade-off is visible. Infeasible sizes mark their row and the
// sweep continues.
SweepReport sweep_battery(const Instance& inst, const std::vector<double>& sizes, SolverChoice solver,
                          const SolveOptions& opts = {});

// One solve per ride-time cap; the fleet-count column exhibits the plateau.
SweepReport sweep_mrt(const Instance& inst, const std::vector<double>& mrts, SolverChoice solver,
                      const SolveOptions& opts = {});

// Paired partial/full-charging solves per battery size. Savings is full minus
// partial; flexibility is the charging time a partial policy saves on the
// partial solution's own charger visits. Sizes default to the stock catalog.
SweepReport compare_charging(const Instance& inst, SolverChoice solver, const SolveOptions& opts = {},
                             std::vector<double> sizes = {});

} // namespace esbrp
