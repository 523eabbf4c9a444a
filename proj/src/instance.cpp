#include "esbrp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace esbrp {

const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::Depot: return "depot";
    case NodeKind::Stop: return "stop";
    case NodeKind::Charger: return "charger";
    case NodeKind::School: return "school";
    }
    return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "depot") return NodeKind::Depot;
    if (s == "stop") return NodeKind::Stop;
    if (s == "charger") return NodeKind::Charger;
    if (s == "school") return NodeKind::School;
    throw std::runtime_error("unknown node kind '" + s + "'");
}

void Instance::finalize() {
    depot = school = -1;
    stop_idx.clear();
    charger_idx.clear();
    index_by_id_.clear();
    for (int i = 0; i < size(); ++i) {
        const Node& nd = nodes[static_cast<size_t>(i)];
        index_by_id_.emplace(nd.id, i);
        switch (nd.kind) {
        case NodeKind::Depot: depot = i; break;
        case NodeKind::School: school = i; break;
        case NodeKind::Stop: stop_idx.push_back(i); break;
        case NodeKind::Charger: charger_idx.push_back(i); break;
        }
    }
    if (time.empty() && !dist.empty() && params.speed > 0) {
        time = Matrix(dist.n);
        for (int i = 0; i < dist.n; ++i)
            for (int j = 0; j < dist.n; ++j)
                time.at(i, j) = dist.at(i, j) / params.speed;
    }
}

int Instance::index_of(int node_id) const {
    auto it = index_by_id_.find(node_id);
    if (it == index_by_id_.end())
        throw std::out_of_range("no node with id " + std::to_string(node_id));
    return it->second;
}

int Instance::total_demand() const {
    int q = 0;
    for (int i : stop_idx) q += nodes[static_cast<size_t>(i)].demand;
    return q;
}

int Instance::usable_count(int type) const {
    int stops = static_cast<int>(stop_idx.size());
    return std::min(bus_catalog[static_cast<size_t>(type)].count, stops);
}

std::vector<int> Instance::active_types() const {
    if (fleet_mode == FleetMode::Homogeneous && !bus_catalog.empty()) return {0};
    std::vector<int> all(bus_catalog.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
}

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (const auto& is : issues) os << is.where << ": " << is.message << "\n";
    return os.str();
}

namespace {

bool same_place(const Node& a, const Node& b) {
    return a.has_coords() && b.has_coords() && a.x == b.x && a.y == b.y;
}

} // namespace

ValidationReport validate(const Instance& inst) {
    ValidationReport rep;
    auto bad = [&rep](const std::string& where, const std::string& msg) {
        rep.issues.push_back({where, msg});
    };

    int depots = 0, schools = 0;
    std::unordered_map<int, int> seen_ids;
    for (const Node& nd : inst.nodes) {
        std::string where = "node " + std::to_string(nd.id);
        if (++seen_ids[nd.id] == 2) bad(where, "duplicate node id");
        if (nd.kind == NodeKind::Depot) ++depots;
        if (nd.kind == NodeKind::School) ++schools;
        if (nd.earliest < 0) bad(where, "earliest < 0");
        if (nd.earliest > nd.latest) bad(where, "earliest exceeds latest");
        if (nd.demand < 0) bad(where, "demand is negative");
        if (nd.kind != NodeKind::Stop && nd.demand != 0) bad(where, "demand on a non-stop node");
        if (nd.service_time < 0) bad(where, "service_time is negative");
        if (nd.kind != NodeKind::Stop && nd.service_time != 0) bad(where, "service_time on a non-stop node");
    }
    if (depots != 1) bad("nodes", "exactly one depot required, found " + std::to_string(depots));
    if (schools != 1) bad("nodes", "exactly one school required, found " + std::to_string(schools));

    for (size_t t = 0; t < inst.bus_catalog.size(); ++t) {
        const BusType& bt = inst.bus_catalog[t];
        std::string where = "bus_type " + std::to_string(t);
        if (bt.battery <= 0) bad(where, "battery must be positive");
        if (bt.capacity <= 0) bad(where, "capacity must be positive");
        if (bt.capital <= 0) bad(where, "capital must be positive");
        if (bt.time_cost <= 0) bad(where, "time_cost must be positive");
        if (bt.consumption <= 0) bad(where, "consumption must be positive");
        if (bt.count <= 0) bad(where, "count must be positive");
    }
    if (inst.bus_catalog.empty()) bad("bus_types", "at least one bus type required");

    const GlobalParams& p = inst.params;
    if (p.recharge_rate <= 0) bad("params", "recharge_rate must be positive");
    if (p.speed <= 0) bad("params", "speed must be positive");
    if (p.max_ride_time <= 0) bad("params", "max_ride_time must be positive");
    if (p.bell_earliest > p.bell_latest) bad("params", "bell_earliest exceeds bell_latest");
    if (p.services_per_year < 1) bad("params", "services_per_year must be at least 1");
    if (p.useful_life_years < 1) bad("params", "useful_life_years must be at least 1");
    if (p.bus_depreciation_rate <= 0 || p.bus_depreciation_rate >= 1)
        bad("params", "bus_depreciation_rate outside (0,1)");
    if (p.battery_depreciation_rate <= 0 || p.battery_depreciation_rate >= 1)
        bad("params", "battery_depreciation_rate outside (0,1)");
    if (p.battery_price_per_kwh <= 0) bad("params", "battery_price_per_kwh must be positive");

    int n = inst.size();
    if (inst.dist.empty()) {
        bad("dist", "distance matrix missing");
    } else if (inst.dist.n != n) {
        bad("dist", "matrix side does not match node count");
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double d = inst.dist.at(i, j);
                if (i == j && d != 0)
                    bad("dist", "diagonal entry (" + std::to_string(i) + ") must be 0");
                if (i != j && d < 0)
                    bad("dist", "negative entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
                if (i != j && d == 0) {
                    // Charger copies share a physical site, so zero distance
                    // between co-located copies is legitimate.
                    const Node& a = inst.nodes[static_cast<size_t>(i)];
                    const Node& b = inst.nodes[static_cast<size_t>(j)];
                    bool copies = a.kind == NodeKind::Charger && b.kind == NodeKind::Charger &&
                                  (same_place(a, b) || (!a.has_coords() && !b.has_coords()));
                    if (!copies)
                        bad("dist", "zero entry at (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") between distinct non-copy nodes");
                }
            }
        }
    }
    if (!inst.time.empty()) {
        if (inst.time.n != n) {
            bad("time", "matrix side does not match node count");
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (inst.time.at(i, j) < 0)
                        bad("time", "negative entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    } else {
        bad("time", "time matrix missing (supply one or let it derive from dist/speed)");
    }

    if (inst.school >= 0) {
        const Node& sc = inst.nodes[static_cast<size_t>(inst.school)];
        if (sc.earliest != p.bell_earliest || sc.latest != p.bell_latest)
            bad("node " + std::to_string(sc.id), "school window differs from params bell window");
    }
    return rep;
}

double amortized_capital(double principal, double rate, int years) {
    if (rate <= 0 || rate >= 1) throw std::domain_error("depreciation rate must lie in (0,1)");
    if (principal <= 0) throw std::domain_error("principal must be positive");
    if (years < 1) throw std::domain_error("years must be at least 1");
    return principal * rate / (1.0 - std::pow(1.0 + rate, -years));
}

double fleet_capital_cost(double base, double battery_kwh, double price_per_kwh) {
    return base + battery_kwh * price_per_kwh;
}

double per_service_fleet_cost(const BusType& bt, const GlobalParams& p) {
    double battery_cost = bt.battery * p.battery_price_per_kwh;
    double base = bt.capital - battery_cost;
    double annual = amortized_capital(base, p.bus_depreciation_rate, p.useful_life_years) +
                    amortized_capital(battery_cost, p.battery_depreciation_rate, p.useful_life_years);
    return annual / p.services_per_year;
}

double dispatch_cost(const BusType& bt, const GlobalParams& p) {
    return p.use_raw_fleet_cost ? bt.capital : per_service_fleet_cost(bt, p);
}

std::vector<BusType> default_bus_catalog() {
    // Battery, seats, purchase price (300k chassis + 700/kWh pack), travel
    // time cost, consumption, vehicles available.
    return {
        {75.0, 78, 352500.0, 1.75, 1.00, 10},
        {60.0, 50, 342000.0, 1.50, 0.90, 10},
        {90.0, 80, 363000.0, 2.00, 1.15, 10},
        {100.0, 82, 370000.0, 2.10, 1.25, 10},
        {110.0, 85, 377000.0, 2.15, 1.30, 10},
    };
}

} // namespace esbrp
