#include "esbrp/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace esbrp {

const char* to_string(ViolationKind k) {
    switch (k) {
    case ViolationKind::MalformedRoute: return "malformed-route";
    case ViolationKind::UnknownNode: return "unknown-node";
    case ViolationKind::InvalidBusType: return "invalid-bus-type";
    case ViolationKind::StopUncovered: return "stop-uncovered";
    case ViolationKind::StopRepeated: return "stop-repeated";
    case ViolationKind::ChargerReused: return "charger-reused";
    case ViolationKind::ChargeAtNonCharger: return "charge-at-non-charger";
    case ViolationKind::NegativeCharge: return "negative-charge";
    case ViolationKind::FleetExceeded: return "fleet-exceeded";
    case ViolationKind::ArcBanned: return "arc-banned";
    case ViolationKind::WindowMissed: return "window-missed";
    case ViolationKind::BellTimeMissed: return "bell-time-missed";
    case ViolationKind::CapacityExceeded: return "capacity-exceeded";
    case ViolationKind::BatteryDepleted: return "battery-depleted";
    case ViolationKind::BatteryOvercharged: return "battery-overcharged";
    case ViolationKind::RideTimeExceeded: return "ride-time-exceeded";
    }
    return "?";
}

std::string Violation::str() const {
    std::ostringstream os;
    os << to_string(kind);
    if (route >= 0) os << " [route " << route << "]";
    if (node >= 0) os << " [node " << node << "]";
    if (!detail.empty()) os << ": " << detail;
    return os.str();
}

std::string RouteTrace::csv() const {
    std::ostringstream os;
    os << "visit,t,load,soc_in,soc_out\n";
    char buf[160];
    for (const Visit& v : visits) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,%.6f,%.6f\n", v.node, v.arrival, v.load, v.soc_in,
                      v.soc_out);
        os << buf;
    }
    return os.str();
}

std::string CostBreakdown::csv() const {
    std::ostringstream os;
    os << "fleet_cost,travel_time_cost,charging_cost,depot_charge_cost,total\n";
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f\n", fleet_cost, travel_time_cost,
                  charging_cost, depot_charge_cost, total);
    os << buf;
    return os.str();
}

double snap_charge(double soc_in, double amount) {
    double p = amount;
    for (int i = 0; i < 8; ++i) {
        double next = (soc_in + p) - soc_in;
        if (next == p) break;
        p = next;
    }
    return p;
}

namespace {

struct RouteShape {
    std::vector<int> idx;   // node indices along the route
    int first_stop_pos = -1;
    std::optional<Violation> problem;
};

RouteShape shape_of(const Instance& inst, const Route& route, int route_no) {
    RouteShape rs;
    auto fail = [&](ViolationKind k, int node, const std::string& d) {
        rs.problem = Violation{k, node, route_no, d};
        return rs;
    };
    if (route.bus_type < 0 || route.bus_type >= static_cast<int>(inst.bus_catalog.size()))
        return fail(ViolationKind::InvalidBusType, -1, "bus_type " + std::to_string(route.bus_type));
    if (route.visits.size() < 2)
        return fail(ViolationKind::MalformedRoute, -1, "fewer than two visits");

    std::vector<char> seen(static_cast<size_t>(inst.size()), 0);
    for (size_t pos = 0; pos < route.visits.size(); ++pos) {
        int id = route.visits[pos];
        int i;
        try {
            i = inst.index_of(id);
        } catch (const std::out_of_range&) {
            return fail(ViolationKind::UnknownNode, id, "");
        }
        if (seen[static_cast<size_t>(i)])
            return fail(ViolationKind::MalformedRoute, id, "node visited twice in one route");
        seen[static_cast<size_t>(i)] = 1;
        const Node& nd = inst.nodes[static_cast<size_t>(i)];
        if (pos == 0 && nd.kind != NodeKind::Depot)
            return fail(ViolationKind::MalformedRoute, id, "route must start at the depot");
        if (pos + 1 == route.visits.size() && nd.kind != NodeKind::School)
            return fail(ViolationKind::MalformedRoute, id, "route must end at the school");
        if (pos > 0 && pos + 1 < route.visits.size() && nd.kind != NodeKind::Stop &&
            nd.kind != NodeKind::Charger)
            return fail(ViolationKind::MalformedRoute, id, "interior visits must be stops or chargers");
        if (rs.first_stop_pos < 0 && nd.kind == NodeKind::Stop) rs.first_stop_pos = static_cast<int>(pos);
        rs.idx.push_back(i);
    }
    for (const auto& [id, kwh] : route.charge_amounts) {
        int i;
        try {
            i = inst.index_of(id);
        } catch (const std::out_of_range&) {
            return fail(ViolationKind::UnknownNode, id, "charge at unknown node");
        }
        if (inst.nodes[static_cast<size_t>(i)].kind != NodeKind::Charger)
            return fail(ViolationKind::ChargeAtNonCharger, id, "");
        if (!seen[static_cast<size_t>(i)])
            return fail(ViolationKind::ChargeAtNonCharger, id, "charge at a charger this route never visits");
        if (kwh < -kFeasEps) return fail(ViolationKind::NegativeCharge, id, "");
    }
    return rs;
}

} // namespace

SimulateOutcome simulate_route(const Instance& inst, const Route& route, ChargePolicy policy,
                               const ArcMask* mask) {
    RouteShape rs = shape_of(inst, route, -1);
    if (rs.problem) return *rs.problem;
    const BusType& bt = inst.bus_catalog[static_cast<size_t>(route.bus_type)];
    const GlobalParams& par = inst.params;
    size_t len = rs.idx.size();

    if (mask) {
        for (size_t pos = 0; pos + 1 < len; ++pos)
            if (!mask->allowed(route.bus_type, rs.idx[pos], rs.idx[pos + 1]))
                return Violation{ViolationKind::ArcBanned, route.visits[pos + 1], -1,
                                 "arc " + std::to_string(route.visits[pos]) + " -> " +
                                     std::to_string(route.visits[pos + 1])};
    }

    // Battery pass (independent of the clock).
    std::vector<double> soc_in(len), soc_out(len), charge(len, 0.0);
    soc_in[0] = soc_out[0] = bt.battery;
    for (size_t pos = 1; pos < len; ++pos) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        double used = bt.consumption * inst.dist.at(rs.idx[pos - 1], rs.idx[pos]);
        soc_in[pos] = soc_out[pos - 1] - used;
        if (soc_in[pos] < -kFeasEps)
            return Violation{ViolationKind::BatteryDepleted, nd.id, -1,
                             "soc " + std::to_string(soc_in[pos])};
        soc_out[pos] = soc_in[pos];
        if (nd.kind == NodeKind::Charger) {
            if (policy == ChargePolicy::Full) {
                charge[pos] = bt.battery - soc_in[pos];
                soc_out[pos] = bt.battery;
            } else {
                charge[pos] = route.charge_at(nd.id);
                soc_out[pos] = soc_in[pos] + charge[pos];
            }
            if (soc_out[pos] > bt.battery + kFeasEps)
                return Violation{ViolationKind::BatteryOvercharged, nd.id, -1,
                                 "soc_out " + std::to_string(soc_out[pos])};
        }
    }

    // Load pass.
    std::vector<int> load(len, 0);
    for (size_t pos = 1; pos < len; ++pos) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        load[pos] = load[pos - 1] + (nd.kind == NodeKind::Stop ? nd.demand : 0);
        if (load[pos] > bt.capacity)
            return Violation{ViolationKind::CapacityExceeded, nd.id, -1,
                             std::to_string(load[pos]) + " > " + std::to_string(bt.capacity)};
    }

    // Dwell at each visit: service at stops, charging time at chargers.
    auto dwell = [&](size_t pos) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        if (nd.kind == NodeKind::Stop) return nd.service_time;
        if (nd.kind == NodeKind::Charger) return charge_time(par.recharge_rate, charge[pos]);
        return 0.0;
    };
    auto arc_time = [&](size_t pos) { return inst.time.at(rs.idx[pos], rs.idx[pos + 1]); };

    // Earliest feasible service times; early arrivals wait for the window.
    std::vector<double> earliest(len);
    earliest[0] = inst.nodes[static_cast<size_t>(rs.idx[0])].earliest;
    for (size_t pos = 1; pos < len; ++pos) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        earliest[pos] = std::max(nd.earliest, earliest[pos - 1] + dwell(pos - 1) + arc_time(pos - 1));
        if (earliest[pos] > nd.latest + kFeasEps) {
            auto kind = nd.kind == NodeKind::School ? ViolationKind::BellTimeMissed
                                                    : ViolationKind::WindowMissed;
            return Violation{kind, nd.id, -1,
                             "earliest arrival " + std::to_string(earliest[pos]) + " > latest " +
                                 std::to_string(nd.latest)};
        }
    }

    // Latest service times that keep the rest of the route inside windows.
    std::vector<double> latest(len);
    latest[len - 1] = inst.nodes[static_cast<size_t>(rs.idx[len - 1])].latest;
    for (size_t pos = len - 1; pos-- > 0;) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        latest[pos] = std::min(nd.latest, latest[pos + 1] - arc_time(pos) - dwell(pos));
    }

    // Schedule: hold back as long as possible up to the first pickup, then run
    // tight. This minimizes the first student's time aboard.
    std::vector<double> sched(len);
    size_t fs = rs.first_stop_pos >= 0 ? static_cast<size_t>(rs.first_stop_pos) : 0;
    if (rs.first_stop_pos < 0) {
        sched = earliest;
    } else {
        for (size_t pos = 0; pos <= fs; ++pos) sched[pos] = std::max(earliest[pos], latest[pos]);
        for (size_t pos = fs + 1; pos < len; ++pos) {
            const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
            sched[pos] = std::max(nd.earliest, sched[pos - 1] + dwell(pos - 1) + arc_time(pos - 1));
        }
    }

    RouteTrace trace;
    trace.visits.resize(len);
    for (size_t pos = 0; pos < len; ++pos) {
        RouteTrace::Visit& v = trace.visits[pos];
        v.node = route.visits[pos];
        v.arrival = sched[pos];
        v.departure = sched[pos] + dwell(pos);
        v.load = load[pos];
        v.soc_in = soc_in[pos];
        v.soc_out = soc_out[pos];
        v.charge = charge[pos];
        if (pos + 1 < len) {
            trace.total_distance += inst.dist.at(rs.idx[pos], rs.idx[pos + 1]);
            trace.total_travel_time += arc_time(pos);
        }
        trace.total_charge += charge[pos];
    }
    if (rs.first_stop_pos >= 0) {
        trace.ride_time = sched[len - 1] - trace.visits[fs].departure;
        if (trace.ride_time > par.max_ride_time + kFeasEps)
            return Violation{ViolationKind::RideTimeExceeded, route.visits[fs], -1,
                             "ride " + std::to_string(trace.ride_time) + " > " +
                                 std::to_string(par.max_ride_time)};
    }
    return trace;
}

MinChargeResult min_charge_amounts(const Instance& inst, const Route& route) {
    MinChargeResult res;
    RouteShape rs = shape_of(inst, route, -1);
    if (rs.problem) {
        res.reason = rs.problem->str();
        res.binding_node = rs.problem->node;
        return res;
    }
    const BusType& bt = inst.bus_catalog[static_cast<size_t>(route.bus_type)];
    size_t len = rs.idx.size();

    // Take on just enough at each charger to reach the next charger or the
    // school; a later charger covers everything past it.
    double soc = bt.battery;
    size_t last_charger = len; // position of the most recent charger
    std::map<int, double> charges;
    for (size_t pos = 1; pos < len; ++pos) {
        const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
        soc -= bt.consumption * inst.dist.at(rs.idx[pos - 1], rs.idx[pos]);
        if (soc < -kFeasEps) {
            if (last_charger == len) {
                res.binding_node = nd.id;
                res.reason = "battery empty before the first charger";
                return res;
            }
            // Retroactively charge at the last charger passed.
            const Node& ch = inst.nodes[static_cast<size_t>(rs.idx[last_charger])];
            double deficit = -soc;
            double& p = charges[ch.id];
            double soc_in_ch = 0.0; // filled below
            p += deficit;
            soc = 0.0;
            // Recompute the charger's arrival soc to verify headroom.
            double probe = bt.battery;
            for (size_t q = 1; q <= last_charger; ++q) {
                probe -= bt.consumption * inst.dist.at(rs.idx[q - 1], rs.idx[q]);
                if (q < last_charger) {
                    auto it = charges.find(inst.nodes[static_cast<size_t>(rs.idx[q])].id);
                    if (it != charges.end()) probe += it->second;
                }
            }
            soc_in_ch = probe;
            if (soc_in_ch + p > bt.battery + kFeasEps) {
                res.binding_node = nd.id;
                res.reason = "segment needs more than a full battery (headroom " +
                             std::to_string(bt.battery - soc_in_ch) + " < " + std::to_string(p) + ")";
                return res;
            }
        }
        if (nd.kind == NodeKind::Charger) last_charger = pos;
    }

    // Snap amounts so downstream soc arithmetic cancels exactly.
    Route charged = route;
    charged.charge_amounts.clear();
    {
        double s = bt.battery;
        for (size_t pos = 1; pos < len; ++pos) {
            const Node& nd = inst.nodes[static_cast<size_t>(rs.idx[pos])];
            s -= bt.consumption * inst.dist.at(rs.idx[pos - 1], rs.idx[pos]);
            if (nd.kind == NodeKind::Charger) {
                auto it = charges.find(nd.id);
                if (it != charges.end() && it->second > 0) {
                    double p = snap_charge(s, it->second);
                    charged.charge_amounts[nd.id] = p;
                    s += p;
                }
            }
        }
    }

    SimulateOutcome sim = simulate_route(inst, charged, ChargePolicy::Partial);
    if (const Violation* v = std::get_if<Violation>(&sim)) {
        res.binding_node = v->node;
        res.reason = "charging time breaks the schedule: " + v->str();
        return res;
    }
    res.feasible = true;
    res.charges = std::move(charged.charge_amounts);
    return res;
}

namespace {

struct RouteCost {
    double travel = 0;
    double charge_linear = 0;    // priced from stored amounts
    double charge_nonlinear = 0; // priced from traced battery levels
    double consumed = 0;
};

RouteCost route_cost(const Instance& inst, const Route& route, const RouteTrace& trace) {
    const BusType& bt = inst.bus_catalog[static_cast<size_t>(route.bus_type)];
    const GlobalParams& par = inst.params;
    RouteCost rc;
    double unit = par.enroute_charge_cost + par.recharge_rate * bt.time_cost;
    rc.travel = bt.time_cost * trace.total_travel_time;
    for (const auto& v : trace.visits) {
        const Node& nd = inst.by_id(v.node);
        if (nd.kind == NodeKind::Charger) {
            rc.charge_nonlinear += unit * (v.soc_out - v.soc_in);
            rc.charge_linear += unit * v.charge;
        }
    }
    rc.consumed = bt.consumption * trace.total_distance;
    return rc;
}

} // namespace

CostBreakdown objective(const Instance& inst, const Solution& sol, ObjectiveForm form,
                        const ArcMask* mask) {
    CostBreakdown out;
    for (size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        SimulateOutcome sim = simulate_route(inst, route, ChargePolicy::Partial, mask);
        if (const Violation* v = std::get_if<Violation>(&sim))
            throw std::invalid_argument("route " + std::to_string(r) + " infeasible: " + v->str());
        const RouteTrace& trace = std::get<RouteTrace>(sim);
        RouteCost rc = route_cost(inst, route, trace);
        out.fleet_cost += dispatch_cost(inst.bus_catalog[static_cast<size_t>(route.bus_type)], inst.params);
        out.travel_time_cost += rc.travel;
        out.charging_cost += form == ObjectiveForm::Nonlinear ? rc.charge_nonlinear : rc.charge_linear;
        out.depot_charge_cost += inst.params.depot_charge_cost * (rc.consumed - trace.total_charge);
    }
    out.total = out.fleet_cost + out.travel_time_cost + out.charging_cost;
    return out;
}

std::vector<Violation> check_solution(const Instance& inst, const Solution& sol, const ArcMask* mask) {
    std::vector<Violation> out;
    std::vector<int> stop_cover(static_cast<size_t>(inst.size()), 0);
    std::vector<int> charger_use(static_cast<size_t>(inst.size()), 0);
    std::vector<int> per_type(inst.bus_catalog.size(), 0);

    for (size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        RouteShape rs = shape_of(inst, route, static_cast<int>(r));
        if (rs.problem) {
            out.push_back(*rs.problem);
            continue;
        }
        ++per_type[static_cast<size_t>(route.bus_type)];
        for (int i : rs.idx) {
            const Node& nd = inst.nodes[static_cast<size_t>(i)];
            if (nd.kind == NodeKind::Stop && ++stop_cover[static_cast<size_t>(i)] == 2)
                out.push_back({ViolationKind::StopRepeated, nd.id, static_cast<int>(r),
                               "stop appears in more than one route"});
            if (nd.kind == NodeKind::Charger && ++charger_use[static_cast<size_t>(i)] == 2)
                out.push_back({ViolationKind::ChargerReused, nd.id, static_cast<int>(r),
                               "charger copy used by more than one route"});
        }
        SimulateOutcome sim = simulate_route(inst, route, ChargePolicy::Partial, mask);
        if (Violation* v = std::get_if<Violation>(&sim)) {
            v->route = static_cast<int>(r);
            out.push_back(*v);
        }
    }
    for (int i : inst.stop_idx)
        if (stop_cover[static_cast<size_t>(i)] == 0)
            out.push_back({ViolationKind::StopUncovered, inst.nodes[static_cast<size_t>(i)].id, -1, ""});
    for (size_t t = 0; t < per_type.size(); ++t)
        if (per_type[t] > inst.bus_catalog[t].count)
            out.push_back({ViolationKind::FleetExceeded, -1, -1,
                           "type " + std::to_string(t) + " uses " + std::to_string(per_type[t]) +
                               " of " + std::to_string(inst.bus_catalog[t].count) + " buses"});
    return out;
}

} // namespace esbrp
