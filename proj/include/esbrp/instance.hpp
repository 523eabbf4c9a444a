#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace esbrp {

enum class NodeKind { Depot, Stop, Charger, School };

const char* to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct Node {
    int id = 0;
    NodeKind kind = NodeKind::Stop;
    double x = std::numeric_limits<double>::quiet_NaN();
    double y = std::numeric_limits<double>::quiet_NaN();
    int demand = 0;            // students waiting, stops only
    double service_time = 0.0; // seconds, stops only
    double earliest = 0.0;     // window open, seconds
    double latest = 0.0;       // window close, seconds

    bool has_coords() const { return !std::isnan(x) && !std::isnan(y); }
};

struct BusType {
    double battery = 0.0;     // kWh
    int capacity = 0;         // seats
    double capital = 0.0;     // purchase cost incl. battery
    double time_cost = 0.0;   // currency per second of travel
    double consumption = 0.0; // kWh per distance unit
    int count = 0;            // vehicles of this type at the depot
};

struct GlobalParams {
    double recharge_rate = 3.47;       // seconds per kWh
    double enroute_charge_cost = 0.25; // currency per kWh at fast chargers
    double depot_charge_cost = 0.10;   // currency per kWh, overnight slow charge
    double speed = 1.0;                // distance units per second
    double max_ride_time = 1200.0;     // seconds, first pickup to school
    double bell_earliest = 900.0;      // school delivery window, seconds
    double bell_latest = 1200.0;
    int services_per_year = 360;
    double bus_depreciation_rate = 0.05;
    double battery_depreciation_rate = 0.06;
    int useful_life_years = 12;
    double battery_price_per_kwh = 700.0;
    // When set, the objective charges the full purchase price per dispatched
    // bus instead of the per-service annuity share.
    bool use_raw_fleet_cost = false;
};

enum class FleetMode { Homogeneous, Heterogeneous };

struct Matrix {
    int n = 0;
    std::vector<double> cells;

    Matrix() = default;
    explicit Matrix(int side, double fill = 0.0) : n(side), cells(static_cast<size_t>(side) * side, fill) {}
    double& at(int i, int j) { return cells[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return cells[static_cast<size_t>(i) * n + j]; }
    bool empty() const { return n == 0; }
};

// The full problem: node set, travel matrices, fleet catalog, and the global
// operating parameters. Immutable after finalize(); solvers share it read-only.
struct Instance {
    std::vector<Node> nodes;
    Matrix dist; // distance units
    Matrix time; // seconds; derived as dist/speed when not supplied
    std::vector<BusType> bus_catalog;
    GlobalParams params;
    FleetMode fleet_mode = FleetMode::Heterogeneous;
    std::string description;

    // Caches, filled by finalize().
    int depot = -1;  // node index, not id
    int school = -1; // node index
    std::vector<int> stop_idx;
    std::vector<int> charger_idx;

    void finalize();

    int size() const { return static_cast<int>(nodes.size()); }
    int index_of(int node_id) const;
    const Node& by_id(int node_id) const { return nodes[static_cast<size_t>(index_of(node_id))]; }
    int total_demand() const;

    // Number of vehicles of the given catalog type the solvers may dispatch.
    // A dispatched bus serves at least one stop, so the stop count caps it.
    int usable_count(int type) const;
    // Catalog types in play: all of them in heterogeneous mode, the first
    // one only in homogeneous mode.
    std::vector<int> active_types() const;

  private:
    std::unordered_map<int, int> index_by_id_;
};

struct ValidationIssue {
    std::string where; // "node 7", "bus_type 2", "params", "dist"
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string str() const;
};

// Checks every structural invariant without mutating. load_instance calls it
// and refuses invalid files; solvers may assume a clean report.
ValidationReport validate(const Instance& inst);

// Annuity A for principal P at the given annual rate over n years:
// A = P * r / (1 - (1+r)^-n). Throws std::domain_error for rate outside (0,1).
double amortized_capital(double principal, double rate, int years);

// Purchase price of a bus: chassis plus battery pack.
double fleet_capital_cost(double base, double battery_kwh, double price_per_kwh);

// Annuitized purchase cost of one bus divided over the services it performs
// per year. The chassis and the battery depreciate at their own rates.
double per_service_fleet_cost(const BusType& bt, const GlobalParams& p);

// Fixed cost charged per dispatched bus in the objective; honors
// use_raw_fleet_cost.
double dispatch_cost(const BusType& bt, const GlobalParams& p);

// The five stock bus types bundled with the suite (60-110 kWh).
std::vector<BusType> default_bus_catalog();

} // namespace esbrp
