#include "esbrp/model.hpp"

#include "esbrp/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace esbrp {

int Model::var_index(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw std::out_of_range("no variable named '" + name + "'");
    return it->second;
}

std::optional<int> Model::find_var(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

void Model::rebuild_index() {
    index.clear();
    for (size_t i = 0; i < vars.size(); ++i) index.emplace(vars[i].name, static_cast<int>(i));
}

std::string instance_hash(const Instance& inst) {
    std::string doc = serialize(inst);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : doc) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string node_token(const Instance& inst, int idx) {
    const Node& nd = inst.nodes[static_cast<size_t>(idx)];
    switch (nd.kind) {
    case NodeKind::Depot: return "D";
    case NodeKind::School: return "E";
    case NodeKind::Charger: return "ch" + std::to_string(nd.id);
    case NodeKind::Stop: return std::to_string(nd.id);
    }
    return "?";
}

struct Builder {
    const Instance& inst;
    const ArcMask& mask;
    Model m;
    bool partial;

    std::string slot_suffix(int k) const {
        return m.meta.slot_suffix ? "_" + std::to_string(k) : "";
    }
    int add_var(const std::string& name, double lo, double up, bool binary) {
        m.vars.push_back({name, lo, up, binary});
        return static_cast<int>(m.vars.size()) - 1;
    }
    void add_row(std::string name, std::string family, std::vector<std::pair<int, double>> terms,
                 char sense, double rhs) {
        m.rows.push_back({std::move(name), std::move(family), std::move(terms), sense, rhs});
    }

    std::string xname(int i, int j, int k) const {
        return "x_" + node_token(inst, i) + "_" + node_token(inst, j) + slot_suffix(k);
    }
    std::string vname(const char* kind, int i, int k) const {
        return std::string(kind) + "_" + node_token(inst, i) + slot_suffix(k);
    }
};

} // namespace

Model build_model(const Instance& inst, const ArcMask& mask, FleetMode fleet, ChargePolicy policy) {
    std::vector<int> types;
    if (fleet == FleetMode::Homogeneous)
        types = {0};
    else
        for (size_t t = 0; t < inst.bus_catalog.size(); ++t) types.push_back(static_cast<int>(t));

    // Every stop must be servable by at least one active type.
    ConnectivityReport conn = connectivity_report(inst, mask);
    for (int s : inst.stop_idx) {
        int id = inst.nodes[static_cast<size_t>(s)].id;
        bool reachable = false;
        for (int t : types) {
            const auto& stranded = conn.per_type[static_cast<size_t>(t)].stranded;
            if (std::find(stranded.begin(), stranded.end(), id) == stranded.end()) {
                reachable = true;
                break;
            }
        }
        if (!reachable)
            throw std::invalid_argument("stop " + std::to_string(id) +
                                        " is unreachable under the arc mask; no feasible model");
    }

    Builder b{inst, mask, {}, policy == ChargePolicy::Partial};
    Model& m = b.m;
    m.meta.instance_hash = instance_hash(inst);
    m.meta.fleet_mode = fleet;
    m.meta.policy = policy;
    for (const Node& nd : inst.nodes) m.meta.node_ids.push_back(nd.id);
    m.meta.depot_id = inst.nodes[static_cast<size_t>(inst.depot)].id;
    m.meta.school_id = inst.nodes[static_cast<size_t>(inst.school)].id;

    for (int t : types) {
        int count = inst.usable_count(t);
        for (int c = 0; c < count; ++c) m.meta.slot_type.push_back(t);
    }
    int slots = static_cast<int>(m.meta.slot_type.size());
    if (slots == 0) throw std::invalid_argument("no vehicles available");
    m.meta.slot_suffix = slots > 1;

    const GlobalParams& par = inst.params;
    int n = inst.size();
    int depot = inst.depot, school = inst.school;

    // Big-M valid for every sequencing row: latest school bell plus the
    // largest dwell, hop, and full-battery charge durations.
    double max_s = 0, max_t = 0, max_b = 0;
    for (const Node& nd : inst.nodes) max_s = std::max(max_s, nd.service_time);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) max_t = std::max(max_t, inst.time.at(i, j));
    for (int t : types) max_b = std::max(max_b, inst.bus_catalog[static_cast<size_t>(t)].battery);
    double big_m = inst.nodes[static_cast<size_t>(school)].latest + max_s + max_t +
                   par.recharge_rate * max_b;
    m.meta.big_m = big_m;

    // Arc list per slot honoring the per-type mask; tails are depot, stops,
    // and chargers, heads are stops, chargers, and the school.
    auto arcs_of = [&](int type) {
        std::vector<std::pair<int, int>> arcs;
        for (int i = 0; i < n; ++i) {
            NodeKind ki = inst.nodes[static_cast<size_t>(i)].kind;
            if (ki == NodeKind::School) continue;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                NodeKind kj = inst.nodes[static_cast<size_t>(j)].kind;
                if (kj == NodeKind::Depot) continue;
                if (mask.allowed(type, i, j)) arcs.emplace_back(i, j);
            }
        }
        return arcs;
    };

    // Variables, slot-major, fixed kind order.
    std::vector<std::vector<std::pair<int, int>>> slot_arcs(static_cast<size_t>(slots));
    for (int k = 0; k < slots; ++k) {
        int type = m.meta.slot_type[static_cast<size_t>(k)];
        const BusType& bt = inst.bus_catalog[static_cast<size_t>(type)];
        slot_arcs[static_cast<size_t>(k)] = arcs_of(type);
        for (auto [i, j] : slot_arcs[static_cast<size_t>(k)]) b.add_var(b.xname(i, j, k), 0, 1, true);
        for (int i = 0; i < n; ++i) {
            const Node& nd = inst.nodes[static_cast<size_t>(i)];
            if (i == depot)
                b.add_var(b.vname("t", i, k), nd.earliest, nd.latest, false);
            else
                b.add_var(b.vname("t", i, k), 0, nd.latest, false);
        }
        for (int i = 0; i < n; ++i)
            b.add_var(b.vname("v", i, k), i == depot ? bt.battery : 0.0, bt.battery, false);
        for (int i : inst.charger_idx) {
            if (b.partial) b.add_var(b.vname("y", i, k), 0, bt.battery, false);
            b.add_var(b.vname("z", i, k), 0, 1, true);
            b.add_var(b.vname("p", i, k), 0, bt.battery, false);
        }
    }
    m.rebuild_index();

    auto X = [&](int i, int j, int k) { return m.var_index(b.xname(i, j, k)); };
    auto T = [&](int i, int k) { return m.var_index(b.vname("t", i, k)); };
    auto V = [&](int i, int k) { return m.var_index(b.vname("v", i, k)); };
    auto Y = [&](int i, int k) { return m.var_index(b.vname("y", i, k)); };
    auto Z = [&](int i, int k) { return m.var_index(b.vname("z", i, k)); };
    auto P = [&](int i, int k) { return m.var_index(b.vname("p", i, k)); };

    // Objective: dispatch cost on depot-leaving arcs, travel time cost on
    // every arc, charging energy and charging wait cost on p.
    std::vector<double> obj(m.vars.size(), 0.0);
    for (int k = 0; k < slots; ++k) {
        const BusType& bt = inst.bus_catalog[static_cast<size_t>(m.meta.slot_type[static_cast<size_t>(k)])];
        double fixed = dispatch_cost(bt, par);
        for (auto [i, j] : slot_arcs[static_cast<size_t>(k)]) {
            obj[static_cast<size_t>(X(i, j, k))] += bt.time_cost * inst.time.at(i, j);
            if (i == depot) obj[static_cast<size_t>(X(i, j, k))] += fixed;
        }
        for (int i : inst.charger_idx)
            obj[static_cast<size_t>(P(i, k))] +=
                par.enroute_charge_cost + par.recharge_rate * bt.time_cost;
    }
    for (size_t i = 0; i < obj.size(); ++i)
        if (obj[i] != 0) m.objective.emplace_back(static_cast<int>(i), obj[i]);

    // Outgoing arcs per tail node, per slot, reused below.
    auto out_arcs = [&](int k, int i) {
        std::vector<int> js;
        for (auto [a, bj] : slot_arcs[static_cast<size_t>(k)])
            if (a == i) js.push_back(bj);
        return js;
    };
    auto in_arcs = [&](int k, int j) {
        std::vector<int> is;
        for (auto [a, bj] : slot_arcs[static_cast<size_t>(k)])
            if (bj == j) is.push_back(a);
        return is;
    };

    // Each stop is served exactly once across the fleet.
    for (int i : inst.stop_idx) {
        std::vector<std::pair<int, double>> terms;
        for (int k = 0; k < slots; ++k)
            for (int j : out_arcs(k, i)) terms.emplace_back(X(i, j, k), 1.0);
        b.add_row("visit_once_" + node_token(inst, i), "visit_once", std::move(terms), 'E', 1.0);
    }

    // Each charger copy serves at most one bus.
    for (int i : inst.charger_idx) {
        std::vector<std::pair<int, double>> terms;
        for (int k = 0; k < slots; ++k) terms.emplace_back(Z(i, k), 1.0);
        b.add_row("charger_once_" + node_token(inst, i), "charger_once", std::move(terms), 'L', 1.0);
    }

    for (int k = 0; k < slots; ++k) {
        int type = m.meta.slot_type[static_cast<size_t>(k)];
        const BusType& bt = inst.bus_catalog[static_cast<size_t>(type)];
        std::string suf = b.slot_suffix(k);

        // Flow conservation at stops and chargers.
        for (int p : inst.stop_idx) {
            std::vector<std::pair<int, double>> terms;
            for (int i : in_arcs(k, p)) terms.emplace_back(X(i, p, k), 1.0);
            for (int j : out_arcs(k, p)) terms.emplace_back(X(p, j, k), -1.0);
            b.add_row("flow_" + node_token(inst, p) + suf, "flow", std::move(terms), 'E', 0.0);
        }
        for (int p : inst.charger_idx) {
            std::vector<std::pair<int, double>> terms;
            for (int i : in_arcs(k, p)) terms.emplace_back(X(i, p, k), 1.0);
            for (int j : out_arcs(k, p)) terms.emplace_back(X(p, j, k), -1.0);
            b.add_row("flow_" + node_token(inst, p) + suf, "flow", std::move(terms), 'E', 0.0);
        }

        // A vehicle leaves the depot at most once.
        {
            std::vector<std::pair<int, double>> terms;
            for (int j : out_arcs(k, depot)) terms.emplace_back(X(depot, j, k), 1.0);
            if (!terms.empty()) b.add_row("depart_once" + suf, "depart_once", std::move(terms), 'L', 1.0);
        }

        // Service-time propagation from the depot and stops.
        for (auto [i, j] : slot_arcs[static_cast<size_t>(k)]) {
            const Node& from = inst.nodes[static_cast<size_t>(i)];
            if (from.kind == NodeKind::Charger) {
                // Charging adds g*p to the clock before the hop.
                b.add_row("seq_charge_" + node_token(inst, i) + "_" + node_token(inst, j) + suf,
                          "seq_charge",
                          {{T(i, k), 1.0},
                           {X(i, j, k), inst.time.at(i, j) + big_m},
                           {P(i, k), par.recharge_rate},
                           {T(j, k), -1.0}},
                          'L', big_m);
            } else {
                b.add_row("seq_" + node_token(inst, i) + "_" + node_token(inst, j) + suf, "seq",
                          {{T(i, k), 1.0},
                           {X(i, j, k), inst.time.at(i, j) + from.service_time + big_m},
                           {T(j, k), -1.0}},
                          'L', big_m);
            }
        }

        // Visited nodes sit inside their windows, unvisited ones pin to zero.
        for (int j = 0; j < n; ++j) {
            if (j == depot) continue;
            const Node& nd = inst.nodes[static_cast<size_t>(j)];
            auto ins = in_arcs(k, j);
            std::vector<std::pair<int, double>> lo, hi;
            for (int i : ins) lo.emplace_back(X(i, j, k), nd.earliest);
            lo.emplace_back(T(j, k), -1.0);
            b.add_row("window_lo_" + node_token(inst, j) + suf, "window_lo", std::move(lo), 'L', 0.0);
            hi.emplace_back(T(j, k), 1.0);
            for (int i : ins) hi.emplace_back(X(i, j, k), -nd.latest);
            b.add_row("window_hi_" + node_token(inst, j) + suf, "window_hi", std::move(hi), 'L', 0.0);
        }

        // Seats.
        {
            std::vector<std::pair<int, double>> terms;
            for (int i : inst.stop_idx) {
                double q = inst.nodes[static_cast<size_t>(i)].demand;
                for (int j : out_arcs(k, i)) terms.emplace_back(X(i, j, k), q);
            }
            b.add_row("capacity" + suf, "capacity", std::move(terms), 'L', bt.capacity);
        }

        // Battery drain along arcs; tails at the depot or stops carry v, tails
        // at chargers carry the post-charge level.
        for (auto [i, j] : slot_arcs[static_cast<size_t>(k)]) {
            const Node& from = inst.nodes[static_cast<size_t>(i)];
            double drain = bt.consumption * inst.dist.at(i, j);
            std::string rowname =
                "soc_" + node_token(inst, i) + "_" + node_token(inst, j) + suf;
            if (from.kind == NodeKind::Charger) {
                if (policy == ChargePolicy::Partial) {
                    b.add_row(rowname, "soc_charge",
                              {{V(j, k), 1.0}, {Y(i, k), -1.0}, {X(i, j, k), drain + bt.battery}}, 'L',
                              bt.battery);
                } else {
                    // Full top-up: the bus leaves any charger at capacity.
                    b.add_row(rowname, "soc_charge_full",
                              {{V(j, k), 1.0}, {X(i, j, k), drain + bt.battery}}, 'L',
                              2.0 * bt.battery);
                }
            } else {
                b.add_row(rowname, "soc_step",
                          {{V(j, k), 1.0}, {V(i, k), -1.0}, {X(i, j, k), drain + bt.battery}}, 'L',
                          bt.battery);
            }
        }

        for (int i : inst.charger_idx) {
            std::string tok = node_token(inst, i);
            if (policy == ChargePolicy::Partial)
                b.add_row("soc_order_" + tok + suf, "soc_order", {{V(i, k), 1.0}, {Y(i, k), -1.0}},
                          'L', 0.0);
            // A charger is "used" exactly when an arc leaves it.
            std::vector<std::pair<int, double>> link{{Z(i, k), 1.0}};
            for (int j : out_arcs(k, i)) link.emplace_back(X(i, j, k), -1.0);
            b.add_row("charge_link_" + tok + suf, "charge_link", std::move(link), 'E', 0.0);
            b.add_row("charge_cap_" + tok + suf, "charge_cap",
                      {{P(i, k), 1.0}, {Z(i, k), -bt.battery}}, 'L', 0.0);
            if (policy == ChargePolicy::Partial) {
                b.add_row("charge_ub_" + tok + suf, "charge_ub",
                          {{P(i, k), 1.0}, {Y(i, k), -1.0}, {V(i, k), 1.0}}, 'L', 0.0);
                b.add_row("charge_lb_" + tok + suf, "charge_lb",
                          {{P(i, k), 1.0}, {Y(i, k), -1.0}, {V(i, k), 1.0}, {Z(i, k), -bt.battery}},
                          'G', -bt.battery);
            } else {
                b.add_row("charge_ub_" + tok + suf, "charge_ub", {{P(i, k), 1.0}, {V(i, k), 1.0}},
                          'L', bt.battery);
                b.add_row("charge_lb_" + tok + suf, "charge_lb",
                          {{P(i, k), 1.0}, {V(i, k), 1.0}, {Z(i, k), -bt.battery}}, 'G', 0.0);
            }
        }

        // Ride-time cap measured from the first pickup. Under the standard
        // mask the depot's successor is always a stop.
        for (int j : out_arcs(k, depot)) {
            const Node& nd = inst.nodes[static_cast<size_t>(j)];
            if (nd.kind != NodeKind::Stop) continue;
            b.add_row("ride_" + node_token(inst, j) + suf, "ride",
                      {{T(school, k), 1.0}, {T(j, k), -1.0}, {X(depot, j, k), big_m}}, 'L',
                      big_m + par.max_ride_time + nd.service_time);
        }
    }
    return m;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void append_terms(std::string& out, const Model& model, std::vector<std::pair<int, double>> terms,
                  bool sort_by_name) {
    if (sort_by_name)
        std::sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
            return model.vars[static_cast<size_t>(a.first)].name <
                   model.vars[static_cast<size_t>(b.first)].name;
        });
    bool first = true;
    for (const auto& [idx, coeff] : terms) {
        if (coeff == 0) continue;
        double mag = coeff < 0 ? -coeff : coeff;
        if (first) {
            if (coeff < 0) out += "- ";
            first = false;
        } else {
            out += coeff < 0 ? " - " : " + ";
        }
        if (mag != 1.0) {
            out += fmt(mag);
            out += " ";
        }
        out += model.vars[static_cast<size_t>(idx)].name;
    }
    if (first) out += "0";
}

} // namespace

std::string emit_lp(const Model& model) {
    std::string out;
    out += "\\ ESBRP model " + model.meta.instance_hash;
    out += model.meta.fleet_mode == FleetMode::Homogeneous ? " fleet=ho" : " fleet=he";
    out += model.meta.policy == ChargePolicy::Partial ? " policy=partial" : " policy=full";
    out += " bigM=" + fmt(model.meta.big_m) + "\n";
    out += "Minimize\n obj: ";
    append_terms(out, model, model.objective, true);
    out += "\nSubject To\n";
    for (const ModelRow& row : model.rows) {
        out += " " + row.name + ": ";
        append_terms(out, model, row.terms, true);
        out += row.sense == 'L' ? " <= " : (row.sense == 'G' ? " >= " : " = ");
        out += fmt(row.rhs);
        out += "\n";
    }
    out += "Bounds\n";
    std::vector<int> order(model.vars.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return model.vars[static_cast<size_t>(a)].name < model.vars[static_cast<size_t>(b)].name;
    });
    for (int i : order) {
        const ModelVar& v = model.vars[static_cast<size_t>(i)];
        if (v.binary) continue;
        if (v.lower == v.upper)
            out += " " + v.name + " = " + fmt(v.lower) + "\n";
        else
            out += " " + fmt(v.lower) + " <= " + v.name + " <= " + fmt(v.upper) + "\n";
    }
    out += "Binaries\n";
    std::string line = "";
    for (int i : order) {
        const ModelVar& v = model.vars[static_cast<size_t>(i)];
        if (!v.binary) continue;
        if (line.size() + v.name.size() + 1 > 78) {
            out += " " + line + "\n";
            line.clear();
        }
        if (!line.empty()) line += " ";
        line += v.name;
    }
    if (!line.empty()) out += " " + line + "\n";
    out += "End\n";
    return out;
}

ModelStats model_stats(const Model& model) {
    ModelStats st;
    for (const ModelVar& v : model.vars) {
        ++st.vars_by_kind[v.name.substr(0, v.name.find('_'))];
        ++st.n_vars;
        if (v.binary) ++st.n_binary;
    }
    for (const ModelRow& r : model.rows) {
        ++st.rows_by_family[r.family];
        ++st.n_rows;
    }
    st.big_m = model.meta.big_m;
    return st;
}

std::string ModelStats::csv() const {
    std::ostringstream os;
    os << "section,key,count\n";
    for (const auto& [k, v] : vars_by_kind) os << "variables," << k << "," << v << "\n";
    for (const auto& [k, v] : rows_by_family) os << "rows," << k << "," << v << "\n";
    os << "totals,variables," << n_vars << "\n";
    os << "totals,binaries," << n_binary << "\n";
    os << "totals,rows," << n_rows << "\n";
    os << "totals,big_m," << big_m << "\n";
    return os.str();
}

namespace {

double value_of(const Assignment& a, const std::string& name) {
    auto it = a.find(name);
    return it == a.end() ? 0.0 : it->second;
}

// Variable names are kind_token[_token]_slot; split into pieces.
std::vector<std::string> split_name(const std::string& name) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= name.size()) {
        size_t us = name.find('_', start);
        if (us == std::string::npos) {
            parts.push_back(name.substr(start));
            break;
        }
        parts.push_back(name.substr(start, us - start));
        start = us + 1;
    }
    return parts;
}

} // namespace

Solution extract_solution(const Model& model, const Assignment& assignment) {
    constexpr double tol = 1e-6;
    int slots = static_cast<int>(model.meta.slot_type.size());

    // Collect the chosen arcs per slot, validating integrality on the way.
    std::vector<std::map<std::string, std::string>> next(static_cast<size_t>(slots));
    for (const ModelVar& var : model.vars) {
        if (!var.binary) continue;
        double val = value_of(assignment, var.name);
        if (std::abs(val) > tol && std::abs(val - 1.0) > tol)
            throw BrokenFlowError("binary variable " + var.name + " has fractional value " + fmt(val));
        if (std::abs(val - 1.0) > tol) continue;
        auto parts = split_name(var.name);
        if (parts[0] != "x") continue;
        int k = model.meta.slot_suffix ? std::stoi(parts.back()) : 0;
        const std::string& from = parts[1];
        const std::string& to = parts[2];
        auto [it, fresh] = next[static_cast<size_t>(k)].emplace(from, to);
        if (!fresh)
            throw BrokenFlowError("node " + from + " has two outgoing arcs in slot " +
                                  std::to_string(k));
    }

    Solution sol;
    std::set<std::string> covered;
    for (int k = 0; k < slots; ++k) {
        auto& arcs = next[static_cast<size_t>(k)];
        if (arcs.empty()) continue;
        auto at_depot = arcs.find("D");
        if (at_depot == arcs.end())
            throw BrokenFlowError("slot " + std::to_string(k) + " has arcs but never leaves the depot");
        Route route;
        route.bus_type = model.meta.slot_type[static_cast<size_t>(k)];
        std::string cur = "D";
        size_t steps = 0;
        std::vector<std::string> tokens{"D"};
        while (cur != "E") {
            auto it = arcs.find(cur);
            if (it == arcs.end())
                throw BrokenFlowError("path of slot " + std::to_string(k) + " dead-ends at " + cur);
            cur = it->second;
            tokens.push_back(cur);
            arcs.erase(it);
            if (++steps > model.meta.node_ids.size())
                throw BrokenFlowError("path of slot " + std::to_string(k) + " does not reach the school");
        }
        if (!arcs.empty())
            throw BrokenFlowError("slot " + std::to_string(k) + " has arcs disconnected from its path");
        for (const std::string& tok : tokens) {
            if (tok.rfind("ch", 0) == 0) {
                int id = std::stoi(tok.substr(2));
                route.visits.push_back(id);
                std::string pname = "p_" + tok + (model.meta.slot_suffix ? "_" + std::to_string(k) : "");
                double p = value_of(assignment, pname);
                if (p > 1e-9) route.charge_amounts[id] = p;
            } else if (tok == "D") {
                route.visits.push_back(model.meta.depot_id);
            } else if (tok == "E") {
                route.visits.push_back(model.meta.school_id);
            } else {
                route.visits.push_back(std::stoi(tok));
                covered.insert(tok);
            }
        }
        sol.routes.push_back(std::move(route));
    }
    // Every stop token must appear on some path. Stop variables exist for
    // every stop (the mask never strands one), so count them directly.
    size_t stop_count = 0;
    std::set<int> stop_ids;
    for (int id : model.meta.node_ids)
        if (id != model.meta.depot_id && id != model.meta.school_id) stop_ids.insert(id);
    for (int id : stop_ids) {
        // Charger ids are also in node_ids; they appear as ch tokens in
        // variable names, so probe for a stop-style t variable.
        std::string tname = "t_" + std::to_string(id);
        if (model.meta.slot_suffix) tname += "_0";
        if (model.find_var(tname)) ++stop_count;
    }
    if (covered.size() < stop_count)
        throw BrokenFlowError("solution covers " + std::to_string(covered.size()) + " of " +
                              std::to_string(stop_count) + " stops");
    return sol;
}

Assignment solution_assignment(const Model& model, const Instance& inst, const Solution& sol) {
    Assignment a;
    const ArcMask* no_mask = nullptr;
    int slots = static_cast<int>(model.meta.slot_type.size());
    auto suffix = [&](int k) { return model.meta.slot_suffix ? "_" + std::to_string(k) : ""; };

    // Defaults: everything at zero except fixed depot variables.
    for (const ModelVar& var : model.vars)
        a[var.name] = var.lower == var.upper ? var.lower : 0.0;
    for (int k = 0; k < slots; ++k) {
        const Node& dep = inst.nodes[static_cast<size_t>(inst.depot)];
        a["t_D" + suffix(k)] = dep.earliest;
    }

    // Hand each route the first free slot of its type.
    std::vector<bool> used(static_cast<size_t>(slots), false);
    for (const Route& route : sol.routes) {
        int slot = -1;
        for (int k = 0; k < slots; ++k)
            if (!used[static_cast<size_t>(k)] &&
                model.meta.slot_type[static_cast<size_t>(k)] == route.bus_type) {
                slot = k;
                break;
            }
        if (slot < 0)
            throw std::invalid_argument("no free vehicle slot for a route of type " +
                                        std::to_string(route.bus_type));
        used[static_cast<size_t>(slot)] = true;

        SimulateOutcome sim = simulate_route(inst, route, ChargePolicy::Partial, no_mask);
        std::vector<double> times, soc_in, soc_out, charge;
        if (const RouteTrace* trace = std::get_if<RouteTrace>(&sim)) {
            for (const auto& v : trace->visits) {
                times.push_back(v.arrival);
                soc_in.push_back(v.soc_in);
                soc_out.push_back(v.soc_out);
                charge.push_back(v.charge);
            }
        } else {
            // Infeasible route: earliest-arrival schedule and raw battery
            // levels so the violated row is visible in the assignment.
            const BusType& bt = inst.bus_catalog[static_cast<size_t>(route.bus_type)];
            double t = inst.nodes[static_cast<size_t>(inst.depot)].earliest;
            double soc = bt.battery;
            for (size_t pos = 0; pos < route.visits.size(); ++pos) {
                const Node& nd = inst.by_id(route.visits[pos]);
                if (pos > 0) {
                    int i = inst.index_of(route.visits[pos - 1]);
                    int j = inst.index_of(route.visits[pos]);
                    const Node& prev = inst.by_id(route.visits[pos - 1]);
                    double dwell = prev.kind == NodeKind::Stop
                                       ? prev.service_time
                                       : (prev.kind == NodeKind::Charger
                                              ? inst.params.recharge_rate * charge[pos - 1]
                                              : 0.0);
                    t = std::max(nd.earliest, t + dwell + inst.time.at(i, j));
                    soc -= inst.bus_catalog[static_cast<size_t>(route.bus_type)].consumption *
                           inst.dist.at(i, j);
                }
                times.push_back(t);
                soc_in.push_back(soc);
                double c = nd.kind == NodeKind::Charger ? route.charge_at(nd.id) : 0.0;
                charge.push_back(c);
                soc += c;
                soc_out.push_back(soc);
            }
        }

        for (size_t pos = 0; pos < route.visits.size(); ++pos) {
            const Node& nd = inst.by_id(route.visits[pos]);
            std::string tok = nd.kind == NodeKind::Depot    ? "D"
                              : nd.kind == NodeKind::School ? "E"
                              : nd.kind == NodeKind::Charger
                                  ? "ch" + std::to_string(nd.id)
                                  : std::to_string(nd.id);
            a["t_" + tok + suffix(slot)] = times[pos];
            a["v_" + tok + suffix(slot)] = std::max(0.0, soc_in[pos]);
            if (nd.kind == NodeKind::Charger) {
                if (auto y = model.find_var("y_" + tok + suffix(slot)))
                    a[model.vars[static_cast<size_t>(*y)].name] = soc_out[pos];
                a["z_" + tok + suffix(slot)] = 1.0;
                a["p_" + tok + suffix(slot)] = charge[pos];
            }
            if (pos > 0) {
                const Node& prev = inst.by_id(route.visits[pos - 1]);
                std::string ptok = prev.kind == NodeKind::Depot ? "D"
                                   : prev.kind == NodeKind::Charger
                                       ? "ch" + std::to_string(prev.id)
                                       : std::to_string(prev.id);
                std::string xn = "x_" + ptok + "_" + tok + suffix(slot);
                if (!model.find_var(xn))
                    throw std::invalid_argument("route uses arc outside the model: " + xn);
                a[xn] = 1.0;
            }
        }
    }
    return a;
}

double eval_objective(const Model& model, const Assignment& assignment) {
    double total = 0;
    for (const auto& [idx, coeff] : model.objective)
        total += coeff * value_of(assignment, model.vars[static_cast<size_t>(idx)].name);
    return total;
}

std::optional<std::string> check_assignment(const Model& model, const Assignment& assignment,
                                            double tol) {
    for (const ModelVar& var : model.vars) {
        double val = value_of(assignment, var.name);
        if (val < var.lower - tol || val > var.upper + tol)
            return "bounds of " + var.name;
        if (var.binary && std::abs(val) > tol && std::abs(val - 1.0) > tol)
            return "integrality of " + var.name;
    }
    for (const ModelRow& row : model.rows) {
        double lhs = 0;
        for (const auto& [idx, coeff] : row.terms)
            lhs += coeff * value_of(assignment, model.vars[static_cast<size_t>(idx)].name);
        bool ok = row.sense == 'L'   ? lhs <= row.rhs + tol
                  : row.sense == 'G' ? lhs >= row.rhs - tol
                                     : std::abs(lhs - row.rhs) <= tol;
        if (!ok) return row.name;
    }
    return std::nullopt;
}

} // namespace esbrp
