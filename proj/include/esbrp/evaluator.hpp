#pragma once

#include "esbrp/instance.hpp"
#include "esbrp/preprocess.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace esbrp {

// Feasibility comparisons tolerate this much numerical slack.
inline constexpr double kFeasEps = 1e-9;

enum class ChargePolicy { Partial, Full };
enum class ObjectiveForm { Nonlinear, Linearized };

// One bus: ordered node ids from depot to school plus the energy taken on at
// each visited charger.
struct Route {
    int bus_type = 0;
    std::vector<int> visits;
    std::map<int, double> charge_amounts; // charger node id -> kWh

    double charge_at(int node_id) const {
        auto it = charge_amounts.find(node_id);
        return it == charge_amounts.end() ? 0.0 : it->second;
    }
};

struct Solution {
    std::vector<Route> routes;
};

enum class ViolationKind {
    MalformedRoute,
    UnknownNode,
    InvalidBusType,
    StopUncovered,
    StopRepeated,
    ChargerReused,
    ChargeAtNonCharger,
    NegativeCharge,
    FleetExceeded,
    ArcBanned,
    WindowMissed,
    BellTimeMissed,
    CapacityExceeded,
    BatteryDepleted,
    BatteryOvercharged,
    RideTimeExceeded,
};

const char* to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    int node = -1;  // node id where detected, -1 if not tied to a node
    int route = -1; // route index, -1 for solution-level violations
    std::string detail;

    std::string str() const;
};

// Witness that a route satisfies every operating constraint: per visit the
// service time, load on departure, and battery level in/out. Times follow the
// latest-feasible schedule up to the first stop and run tight afterwards,
// which realizes the shortest achievable student ride.
struct RouteTrace {
    struct Visit {
        int node = 0; // node id
        double arrival = 0;
        double departure = 0;
        int load = 0;
        double soc_in = 0;
        double soc_out = 0;
        double charge = 0; // kWh taken on, chargers only
    };
    std::vector<Visit> visits;
    double ride_time = 0; // school arrival minus departure from first stop
    double total_distance = 0;
    double total_travel_time = 0; // arc travel only, no service or charging
    double total_charge = 0;

    std::string csv() const; // columns: visit,t,load,soc_in,soc_out
};

using SimulateOutcome = std::variant<RouteTrace, Violation>;

// Forward simulation of one route. Under Partial the stored charge amounts
// apply; under Full every visited charger tops the battery up to capacity.
// Returns the first violation encountered, if any. A mask, when given, bans
// arcs the preprocessing removed.
SimulateOutcome simulate_route(const Instance& inst, const Route& route, ChargePolicy policy,
                               const ArcMask* mask = nullptr);

struct MinChargeResult {
    bool feasible = false;
    std::map<int, double> charges; // charger node id -> kWh
    int binding_node = -1;         // node id that made it infeasible
    std::string reason;
};

// Smallest per-charger amounts that keep the battery inside [0, B] over the
// whole route: each charger takes on just enough to reach the next charger
// (or the school). Infeasible when a segment needs more than a full battery
// or when the added charging time breaks a time window.
MinChargeResult min_charge_amounts(const Instance& inst, const Route& route);

struct CostBreakdown {
    double fleet_cost = 0;
    double travel_time_cost = 0;
    double charging_cost = 0;      // en-route fast charging incl. waiting-time cost
    double depot_charge_cost = 0;  // overnight slow top-up; informational, not in total
    double total = 0;              // fleet + travel + charging

    std::string csv() const;
};

// Operating cost of a feasible solution. The Nonlinear form prices charging
// from the traced battery levels, (soc_out - soc_in) * z; the Linearized form
// prices the stored charge amounts directly. Throws std::invalid_argument if
// any route fails simulation.
CostBreakdown objective(const Instance& inst, const Solution& sol, ObjectiveForm form,
                        const ArcMask* mask = nullptr);

// Full audit: coverage of every stop, single use of each charger copy, fleet
// limits, and per-route simulation. Collects everything instead of stopping
// at the first problem.
std::vector<Violation> check_solution(const Instance& inst, const Solution& sol,
                                      const ArcMask* mask = nullptr);

// Seconds needed to take on the given energy.
inline double charge_time(double recharge_rate, double amount) { return recharge_rate * amount; }

// Time saved at one charger by a partial charge instead of a full top-up.
inline double charge_flexibility(double recharge_rate, double battery, double soc_in,
                                 double partial_amount) {
    return recharge_rate * ((battery - soc_in) - partial_amount);
}

// Nudges a charge amount so that soc_in + p - soc_in reproduces p exactly in
// floating point; keeps the two objective forms bit-identical.
double snap_charge(double soc_in, double amount);

} // namespace esbrp
