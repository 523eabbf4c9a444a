#include "esbrp/exact_solver.hpp"

#include "esbrp/lns_solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace esbrp {

namespace {

constexpr double kTieEps = 1e-12;

double cheapest_time_cost(const Instance& inst) {
    double c = std::numeric_limits<double>::infinity();
    for (int t : inst.active_types()) c = std::min(c, inst.bus_catalog[static_cast<size_t>(t)].time_cost);
    return c;
}

} // namespace

double lower_bound(const SearchNode& state, const Instance& inst) {
    double bound = state.committed_cost;
    auto types = inst.active_types();

    // Cheapest way anything can enter each unplaced stop.
    double min_ct = cheapest_time_cost(inst);
    for (int s : state.unassigned) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < inst.size(); ++i) {
            if (i == s) continue;
            bool any = false;
            if (state.mask) {
                for (int t : types)
                    if (state.mask->allowed(t, i, s)) {
                        any = true;
                        break;
                    }
            } else {
                any = inst.nodes[static_cast<size_t>(i)].kind != NodeKind::School;
            }
            if (any) best = std::min(best, inst.time.at(i, s));
        }
        if (std::isfinite(best)) bound += best * min_ct;
    }

    // Demand that no open seat can absorb forces more buses.
    int remaining = 0;
    for (int s : state.unassigned) remaining += inst.nodes[static_cast<size_t>(s)].demand;
    remaining -= state.open_free_seats;
    if (remaining > 0) {
        int max_cap = 0;
        double min_fleet = std::numeric_limits<double>::infinity();
        for (int t : types) {
            max_cap = std::max(max_cap, inst.bus_catalog[static_cast<size_t>(t)].capacity);
            min_fleet = std::min(min_fleet, dispatch_cost(inst.bus_catalog[static_cast<size_t>(t)], inst.params));
        }
        if (max_cap > 0) bound += std::ceil(static_cast<double>(remaining) / max_cap) * min_fleet;
    }
    return bound;
}

namespace {

using Clock = std::chrono::steady_clock;

// Fills a route's charge amounts under the given policy and validates the
// result. Partial takes the minimal amounts, Full tops up to capacity at
// every visited charger.
bool resolve_charges(const Instance& inst, ChargePolicy policy, const ArcMask& mask, Route& r) {
    if (policy == ChargePolicy::Partial) {
        MinChargeResult mc = min_charge_amounts(inst, r);
        if (!mc.feasible) return false;
        r.charge_amounts = std::move(mc.charges);
        SimulateOutcome sim = simulate_route(inst, r, ChargePolicy::Partial, &mask);
        return std::holds_alternative<RouteTrace>(sim);
    }
    r.charge_amounts.clear();
    SimulateOutcome sim = simulate_route(inst, r, ChargePolicy::Full, &mask);
    const RouteTrace* tr = std::get_if<RouteTrace>(&sim);
    if (!tr) return false;
    for (const auto& v : tr->visits)
        if (v.charge > 0) r.charge_amounts[v.node] = v.charge;
    return true;
}

// Dense min-cost assignment via shortest augmenting paths (Jonker-Volgenant
// flavor). cost is row-major m x t, t >= m; unreachable pairs carry kInf.
// Returns the optimal total or kInf when no perfect matching exists.
constexpr double kInf = std::numeric_limits<double>::infinity();

double min_assignment_cost(int rows, int cols, const std::vector<double>& a) {
    if (rows == 0) return 0.0;
    if (rows > cols) return kInf;
    // 1-indexed potentials; p[j] is the row matched to column j.
    std::vector<double> u(static_cast<size_t>(rows) + 1, 0.0);
    std::vector<double> v(static_cast<size_t>(cols) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(cols) + 1, 0);
    std::vector<int> way(static_cast<size_t>(cols) + 1, 0);
    auto cost = [&](int i, int j) { return a[static_cast<size_t>(i - 1) * cols + (j - 1)]; };
    for (int i = 1; i <= rows; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(cols) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(cols) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            int i0 = p[static_cast<size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= cols; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                double cur = cost(i0, j) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            if (!(delta < kInf)) return kInf; // no augmenting path: infeasible
            for (int j = 0; j <= cols; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= cols; ++j)
        if (p[static_cast<size_t>(j)] != 0) total += cost(p[static_cast<size_t>(j)], j);
    return total;
}

// Canonical key for deterministic tie-breaking between equal-cost solutions.
std::vector<std::vector<int>> solution_key(const Solution& sol) {
    std::vector<std::vector<int>> key;
    for (const Route& r : sol.routes) {
        std::vector<int> row{r.bus_type};
        row.insert(row.end(), r.visits.begin(), r.visits.end());
        key.push_back(std::move(row));
    }
    return key;
}

struct Incumbent {
    bool found = false;
    Solution solution;
    CostBreakdown cost;
    std::vector<std::vector<int>> key;

    // Returns true when the candidate replaces the incumbent.
    bool offer(const Solution& sol, const CostBreakdown& cb) {
        if (found && cb.total > cost.total - kTieEps) {
            if (std::abs(cb.total - cost.total) <= kTieEps) {
                auto k = solution_key(sol);
                if (k < key) {
                    solution = sol;
                    cost = cb;
                    key = std::move(k);
                    return true;
                }
            }
            return false;
        }
        found = true;
        solution = sol;
        cost = cb;
        key = solution_key(sol);
        return true;
    }
};

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Searcher {
    const Instance& inst;
    const ArcMask& mask;
    ChargePolicy policy;
    double deadline_s;
    Clock::time_point t0;

    std::vector<int> types;
    std::vector<int> counts_used;
    std::vector<int> stops_edd;       // stop indices, earliest deadline first
    std::vector<char> assigned;       // by node index
    std::vector<char> charger_used;   // by node index
    std::vector<double> cheap_in;     // per node index, min entry time * min c_t
    std::vector<double> cheap_out;    // per node index, min exit time * min c_t
    std::vector<double> sym_w;        // symmetric relaxed hop cost between node pairs
    double min_ct = 0;

    Incumbent incumbent;
    long long nodes = 0;
    bool out_of_time = false;
    double min_abandoned_bound = std::numeric_limits<double>::infinity();
    std::ostringstream log;

    // Label dominance: identical (stop set, route head, fleet usage) states
    // collapse to their Pareto frontier over cost and resources. A state that
    // is no better than a stored one on every axis cannot lead anywhere a
    // stored completion could not.
    struct DomKey {
        uint64_t assigned_bits = 0;
        uint64_t charger_bits = 0;
        uint64_t counts_packed = 0;
        int head = -1; // node index of the open route head, -1 when closed
        int open_type = -1;
        bool operator==(const DomKey&) const = default;
    };
    struct DomKeyHash {
        size_t operator()(const DomKey& k) const {
            uint64_t h = 1469598103934665603ull;
            auto mix = [&h](uint64_t v) {
                h ^= v;
                h *= 1099511628211ull;
            };
            mix(k.assigned_bits);
            mix(k.charger_bits);
            mix(k.counts_packed);
            mix(static_cast<uint64_t>(k.head) << 32 | static_cast<uint32_t>(k.open_type));
            return static_cast<size_t>(h);
        }
    };
    // Frontier entries: cost, earliest, load, -soc_full, -first_latest_dep,
    // and the rank of the canonical-order cursor (a smaller cursor leaves
    // more ways to open the next route).
    std::unordered_map<DomKey, std::vector<std::array<double, 6>>, DomKeyHash> frontier;
    long long dom_hits = 0;
    bool dominance_on = true;
    size_t dominance_cap = 20'000'000;

    bool dominated_state() {
        if (!dominance_on) return false;
        DomKey key;
        for (size_t i = 0; i < stops_edd.size(); ++i)
            if (assigned[static_cast<size_t>(stops_edd[i])]) key.assigned_bits |= 1ull << i;
        for (size_t i = 0; i < inst.charger_idx.size(); ++i)
            if (charger_used[static_cast<size_t>(inst.charger_idx[i])]) key.charger_bits |= 1ull << i;
        for (size_t t = 0; t < counts_used.size() && t < 8; ++t)
            key.counts_packed |= static_cast<uint64_t>(counts_used[t] & 0xff) << (8 * t);
        key.head = open.active ? open.visits.back() : -1;
        key.open_type = open.active ? open.type : -1;
        double prev_rank = static_cast<double>(
            (static_cast<int64_t>(prev_route_key.first + 1) << 20) + prev_route_key.second);

        std::array<double, 6> label{committed,
                                    open.active ? open.earliest : 0.0,
                                    open.active ? static_cast<double>(open.load) : 0.0,
                                    open.active ? -open.soc_full : 0.0,
                                    open.active ? -open.first_latest_dep : 0.0,
                                    prev_rank};
        auto& entries = frontier[key];
        for (const auto& e : entries) {
            bool dom = true;
            for (int d = 0; d < 6; ++d)
                if (e[static_cast<size_t>(d)] > label[static_cast<size_t>(d)] + 1e-12) {
                    dom = false;
                    break;
                }
            if (dom) {
                ++dom_hits;
                return true;
            }
        }
        // Keep the frontier tight: drop entries the new label dominates.
        entries.erase(std::remove_if(entries.begin(), entries.end(),
                                     [&](const std::array<double, 6>& e) {
                                         for (int d = 0; d < 6; ++d)
                                             if (label[static_cast<size_t>(d)] >
                                                 e[static_cast<size_t>(d)] + 1e-12)
                                                 return false;
                                         return true;
                                     }),
                      entries.end());
        if (frontier.size() < dominance_cap) entries.push_back(label);
        return false;
    }

    // Open route state.
    struct Open {
        bool active = false;
        int type = -1;
        std::vector<int> visits; // node indices
        int load = 0;
        double earliest = 0;     // service start, charging assumed instant
        double soc_full = 0;     // battery assuming full top-up at chargers
        int first_stop = -1;
        double first_latest_dep = 0;
    } open;

    std::vector<Route> closed;
    double committed = 0;
    std::pair<int, int> prev_route_key{-1, -1}; // (type, first stop id), canonical order

    Searcher(const Instance& in, const ArcMask& mk, ChargePolicy pol, double limit)
        : inst(in), mask(mk), policy(pol), deadline_s(limit), t0(Clock::now()) {
        types = inst.active_types();
        counts_used.assign(inst.bus_catalog.size(), 0);
        assigned.assign(static_cast<size_t>(inst.size()), 0);
        charger_used.assign(static_cast<size_t>(inst.size()), 0);
        stops_edd = inst.stop_idx;
        std::sort(stops_edd.begin(), stops_edd.end(), [&](int a, int b) {
            const Node& na = inst.nodes[static_cast<size_t>(a)];
            const Node& nb = inst.nodes[static_cast<size_t>(b)];
            return na.latest != nb.latest ? na.latest < nb.latest : na.id < nb.id;
        });
        int max_id = 0;
        for (const Node& nd : inst.nodes) max_id = std::max(max_id, nd.id);
        dominance_on = inst.stop_idx.size() <= 64 && inst.charger_idx.size() <= 64 &&
                       inst.bus_catalog.size() <= 8 && max_id < (1 << 20);
        min_ct = cheapest_time_cost(inst);
        cheap_in.assign(static_cast<size_t>(inst.size()), 0.0);
        cheap_out.assign(static_cast<size_t>(inst.size()), 0.0);
        for (int v = 0; v < inst.size(); ++v) {
            double best_in = std::numeric_limits<double>::infinity();
            double best_out = std::numeric_limits<double>::infinity();
            for (int i = 0; i < inst.size(); ++i) {
                if (i == v) continue;
                for (int t : types) {
                    if (mask.allowed(t, i, v)) best_in = std::min(best_in, inst.time.at(i, v));
                    if (mask.allowed(t, v, i)) best_out = std::min(best_out, inst.time.at(v, i));
                }
            }
            cheap_in[static_cast<size_t>(v)] = std::isfinite(best_in) ? best_in * min_ct : 0.0;
            cheap_out[static_cast<size_t>(v)] = std::isfinite(best_out) ? best_out * min_ct : 0.0;
        }

        // Relaxed symmetric hop costs for the spanning-tree bound: cheapest
        // direction, cheapest type, optionally routed through one or two
        // charger copies.
        int n = inst.size();
        auto arc_ok = [&](int i, int j) {
            for (int t : types)
                if (mask.allowed(t, i, j)) return true;
            return false;
        };
        std::vector<double> direct(static_cast<size_t>(n) * n,
                                   std::numeric_limits<double>::infinity());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && arc_ok(i, j))
                    direct[static_cast<size_t>(i) * n + j] = inst.time.at(i, j);
        std::vector<double> hop = direct;
        for (int c : inst.charger_idx)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double via = direct[static_cast<size_t>(i) * n + c] +
                                 direct[static_cast<size_t>(c) * n + j];
                    hop[static_cast<size_t>(i) * n + j] =
                        std::min(hop[static_cast<size_t>(i) * n + j], via);
                }
        std::vector<double> hop2 = hop;
        for (int c : inst.charger_idx)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double via = hop[static_cast<size_t>(i) * n + c] +
                                 direct[static_cast<size_t>(c) * n + j];
                    hop2[static_cast<size_t>(i) * n + j] =
                        std::min(hop2[static_cast<size_t>(i) * n + j], via);
                }
        sym_w.assign(static_cast<size_t>(n) * n, std::numeric_limits<double>::infinity());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                sym_w[static_cast<size_t>(i) * n + j] =
                    std::min(hop2[static_cast<size_t>(i) * n + j],
                             hop2[static_cast<size_t>(j) * n + i]) *
                    min_ct;
    }

    // Assignment relaxation: every unplaced stop is entered through its own
    // arc, and tails (stops, the open head, free chargers, fresh buses from
    // the depot) each feed at most one head.
    double assignment_bound(const std::vector<int>& todo) {
        std::vector<int> heads = todo;
        if (open.active) heads.push_back(inst.school);
        int m = static_cast<int>(heads.size());
        if (m == 0) return 0.0;
        std::vector<int> tails = todo;
        if (open.active) tails.push_back(open.visits.back());
        for (int c : inst.charger_idx)
            if (!charger_used[static_cast<size_t>(c)]) tails.push_back(c);
        int fixed = static_cast<int>(tails.size());
        int t = fixed + m; // depot feeds any number of fresh routes
        std::vector<double> cost(static_cast<size_t>(m) * t, kInf);
        auto arc_cost = [&](int a, int h) {
            if (a == h) return kInf;
            for (int ty : types)
                if (mask.allowed(ty, a, h)) return inst.time.at(a, h) * min_ct;
            return kInf;
        };
        for (int hi = 0; hi < m; ++hi) {
            int h = heads[static_cast<size_t>(hi)];
            for (int ti = 0; ti < fixed; ++ti)
                cost[static_cast<size_t>(hi) * t + ti] = arc_cost(tails[static_cast<size_t>(ti)], h);
            double dep = arc_cost(inst.depot, h);
            for (int k = fixed; k < t; ++k) cost[static_cast<size_t>(hi) * t + k] = dep;
        }
        return min_assignment_cost(m, t, cost);
    }

    // Spanning-tree relaxation: any completion's remaining travel connects
    // every unplaced stop to the tour structure.
    double mst_bound(const std::vector<int>& todo) {
        if (todo.empty()) return 0.0;
        int n = inst.size();
        size_t m = todo.size();
        std::vector<double> key(m, std::numeric_limits<double>::infinity());
        std::vector<char> done(m, 0);
        for (size_t i = 0; i < m; ++i) {
            // Connection to the fixed part: the open route's head, the depot
            // (a fresh bus), or the school.
            double t = sym_w[static_cast<size_t>(inst.depot) * n + todo[i]];
            t = std::min(t, sym_w[static_cast<size_t>(inst.school) * n + todo[i]]);
            if (open.active)
                t = std::min(t, sym_w[static_cast<size_t>(open.visits.back()) * n + todo[i]]);
            key[i] = t;
        }
        double total = 0.0;
        for (size_t round = 0; round < m; ++round) {
            size_t best = m;
            for (size_t i = 0; i < m; ++i)
                if (!done[i] && (best == m || key[i] < key[best])) best = i;
            if (best == m || !std::isfinite(key[best])) return total;
            done[best] = 1;
            total += key[best];
            for (size_t i = 0; i < m; ++i)
                if (!done[i])
                    key[i] = std::min(key[i], sym_w[static_cast<size_t>(todo[best]) * n + todo[i]]);
        }
        return total;
    }

    bool time_up() {
        if (out_of_time) return true;
        if ((nodes & 1023) == 0) {
            double el = std::chrono::duration<double>(Clock::now() - t0).count();
            if (el > deadline_s) out_of_time = true;
        }
        return out_of_time;
    }

    double bound_here() {
        double base = committed;
        double halves = 0.0;
        std::vector<int> todo;
        int remaining_demand = 0;
        for (int s : stops_edd)
            if (!assigned[static_cast<size_t>(s)]) {
                halves += 0.5 * (cheap_in[static_cast<size_t>(s)] + cheap_out[static_cast<size_t>(s)]);
                remaining_demand += inst.nodes[static_cast<size_t>(s)].demand;
                todo.push_back(s);
            }
        if (open.active) {
            halves += 0.5 * cheap_out[static_cast<size_t>(open.visits.back())];
            halves += 0.5 * cheap_in[static_cast<size_t>(inst.school)];
        }
        int free_seats = 0;
        if (open.active)
            free_seats = inst.bus_catalog[static_cast<size_t>(open.type)].capacity - open.load;
        remaining_demand -= free_seats;
        if (remaining_demand > 0) {
            int max_cap = 0;
            double min_fleet = std::numeric_limits<double>::infinity();
            for (int t : types) {
                max_cap = std::max(max_cap, inst.bus_catalog[static_cast<size_t>(t)].capacity);
                min_fleet = std::min(min_fleet, dispatch_cost(inst.bus_catalog[static_cast<size_t>(t)], inst.params));
            }
            base += std::ceil(static_cast<double>(remaining_demand) / max_cap) * min_fleet;
        }
        double b = base + halves;
        // The relaxation bounds cost more to evaluate; consult them only
        // while the cheap bound fails to prune.
        if (incumbent.found && b < incumbent.cost.total)
            b = std::max(b, base + mst_bound(todo));
        if (incumbent.found && b < incumbent.cost.total)
            b = std::max(b, base + assignment_bound(todo));
        return b;
    }

    // Equal-cost completions prune; float drift between the incremental cost
    // and the evaluator's sum stays far below the 1e-9 reporting tolerance.
    bool prunable(double b) { return incumbent.found && b >= incumbent.cost.total; }

    void complete() {
        Solution sol;
        sol.routes = closed;
        CostBreakdown cb;
        try {
            cb = objective(inst, sol, ObjectiveForm::Linearized, &mask);
        } catch (const std::invalid_argument&) {
            return; // defensive; extensions were checked incrementally
        }
        if (incumbent.offer(sol, cb)) {
            char line[96];
            std::snprintf(line, sizeof(line), "nodes=%lld incumbent=%.6f\n", nodes, cb.total);
            log << line;
        }
    }

    // Try to finish the open route at the school; recurses on success.
    void try_close() {
        int u = open.visits.back();
        if (!mask.allowed(open.type, u, inst.school)) return;
        Route r;
        r.bus_type = open.type;
        for (int i : open.visits) r.visits.push_back(inst.nodes[static_cast<size_t>(i)].id);
        r.visits.push_back(inst.nodes[static_cast<size_t>(inst.school)].id);
        if (!resolve_charges(inst, policy, mask, r)) return;

        const BusType& bt = inst.bus_catalog[static_cast<size_t>(open.type)];
        double unit = inst.params.enroute_charge_cost + inst.params.recharge_rate * bt.time_cost;
        double add = bt.time_cost * inst.time.at(u, inst.school);
        for (const auto& [node, p] : r.charge_amounts) add += unit * p;

        Open saved_open = open;
        open.active = false;
        closed.push_back(std::move(r));
        committed += add;
        dfs();
        committed -= add;
        closed.pop_back();
        open = saved_open;
    }

    // Extend the open route to node w (stop or charger).
    void try_extend(int w) {
        int u = open.visits.back();
        if (!mask.allowed(open.type, u, w)) return;
        const Node& nd = inst.nodes[static_cast<size_t>(w)];
        const BusType& bt = inst.bus_catalog[static_cast<size_t>(open.type)];

        double soc = open.soc_full - bt.consumption * inst.dist.at(u, w);
        if (soc < -kFeasEps) return;
        double arr = std::max(nd.earliest, open.earliest + dwell_of(u) + inst.time.at(u, w));
        if (arr > nd.latest + kFeasEps) return;
        int load = open.load + (nd.kind == NodeKind::Stop ? nd.demand : 0);
        if (load > bt.capacity) return;
        if (open.first_stop >= 0 && arr - open.first_latest_dep > inst.params.max_ride_time + kFeasEps)
            return;

        Open saved = open;
        double travel = bt.time_cost * inst.time.at(u, w);
        open.visits.push_back(w);
        open.load = load;
        open.earliest = arr;
        open.soc_full = nd.kind == NodeKind::Charger ? bt.battery : soc;
        if (nd.kind == NodeKind::Stop) {
            assigned[static_cast<size_t>(w)] = 1;
            if (open.first_stop < 0) {
                open.first_stop = w;
                open.first_latest_dep = nd.latest + nd.service_time;
            }
        } else {
            charger_used[static_cast<size_t>(w)] = 1;
        }
        committed += travel;
        dfs();
        committed -= travel;
        if (nd.kind == NodeKind::Stop)
            assigned[static_cast<size_t>(w)] = 0;
        else
            charger_used[static_cast<size_t>(w)] = 0;
        open = saved;
    }

    double dwell_of(int node_idx) const {
        const Node& nd = inst.nodes[static_cast<size_t>(node_idx)];
        return nd.kind == NodeKind::Stop ? nd.service_time : 0.0; // chargers optimistic at zero
    }

    void dfs() {
        ++nodes;
        if (time_up()) {
            min_abandoned_bound = std::min(min_abandoned_bound, bound_here());
            return;
        }
        double b = bound_here();
        if (prunable(b)) return;
        if (dominated_state()) return;

        if (open.active) {
            // Earliest-deadline stops first, then chargers, then the school.
            for (int s : stops_edd) {
                if (!assigned[static_cast<size_t>(s)]) try_extend(s);
            }
            const BusType& bt = inst.bus_catalog[static_cast<size_t>(open.type)];
            if (open.soc_full < bt.battery - kFeasEps) {
                for (int c : inst.charger_idx)
                    if (!charger_used[static_cast<size_t>(c)]) try_extend(c);
            }
            if (open.first_stop >= 0) try_close();
            return;
        }

        bool all_assigned = true;
        for (int s : stops_edd)
            if (!assigned[static_cast<size_t>(s)]) {
                all_assigned = false;
                break;
            }
        if (all_assigned) {
            complete();
            return;
        }

        // Open a new bus: types in catalog order, first stops by deadline.
        // Routes are generated in increasing (type, first stop id) order so
        // each route multiset appears exactly once.
        for (int t : types) {
            if (counts_used[static_cast<size_t>(t)] >= inst.usable_count(t)) continue;
            const BusType& bt = inst.bus_catalog[static_cast<size_t>(t)];
            double fixed = dispatch_cost(bt, inst.params);
            for (int s : stops_edd) {
                if (assigned[static_cast<size_t>(s)]) continue;
                const Node& nd = inst.nodes[static_cast<size_t>(s)];
                std::pair<int, int> key{t, nd.id};
                if (key <= prev_route_key) continue;
                if (!mask.allowed(t, inst.depot, s)) continue;
                const Node& dep = inst.nodes[static_cast<size_t>(inst.depot)];
                double soc = bt.battery - bt.consumption * inst.dist.at(inst.depot, s);
                if (soc < -kFeasEps) continue;
                double arr = std::max(nd.earliest, dep.earliest + inst.time.at(inst.depot, s));
                if (arr > nd.latest + kFeasEps) continue;
                if (nd.demand > bt.capacity) continue;

                Open saved = open;
                auto saved_key = prev_route_key;
                open = Open{};
                open.active = true;
                open.type = t;
                open.visits = {inst.depot, s};
                open.load = nd.demand;
                open.earliest = arr;
                open.soc_full = soc;
                open.first_stop = s;
                open.first_latest_dep = nd.latest + nd.service_time;
                prev_route_key = key;
                assigned[static_cast<size_t>(s)] = 1;
                ++counts_used[static_cast<size_t>(t)];
                committed += fixed + bt.time_cost * inst.time.at(inst.depot, s);
                dfs();
                committed -= fixed + bt.time_cost * inst.time.at(inst.depot, s);
                --counts_used[static_cast<size_t>(t)];
                assigned[static_cast<size_t>(s)] = 0;
                prev_route_key = saved_key;
                open = saved;
            }
        }
    }
};

} // namespace

SolveResult solve_exact(const Instance& inst, const ArcMask& mask, double time_limit_seconds,
                        ChargePolicy policy) {
    auto start = Clock::now();
    SolveResult res;

    ConnectivityReport conn = connectivity_report(inst, mask);
    for (int s : inst.stop_idx) {
        int id = inst.nodes[static_cast<size_t>(s)].id;
        bool ok = false;
        for (int t : inst.active_types()) {
            const auto& tr = conn.per_type[static_cast<size_t>(t)].stranded;
            if (std::find(tr.begin(), tr.end(), id) == tr.end()) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            res.status = "infeasible";
            res.search_log = "stop " + std::to_string(id) + " unreachable under the arc mask";
            return res;
        }
    }

    Searcher sr(inst, mask, policy, time_limit_seconds);
    {
        LnsConfig warm;
        warm.seed = 0xE5B;
        warm.iterations = std::min(4000, 250 * static_cast<int>(inst.stop_idx.size()));
        SolveResult head_start = solve_lns(inst, mask, warm, policy);
        if (head_start.feasible) {
            sr.incumbent.offer(head_start.solution, head_start.objective);
            sr.log << "warm-start incumbent=" << head_start.objective.total << "\n";
        }
    }
    sr.dfs();

    res.nodes_explored = sr.nodes;
    res.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    sr.log << "dominance hits=" << sr.dom_hits << " keys=" << sr.frontier.size() << "\n";
    res.search_log = sr.log.str();
    if (!sr.incumbent.found) {
        res.status = sr.out_of_time ? "unknown" : "infeasible";
        return res;
    }
    res.feasible = true;
    res.solution = sr.incumbent.solution;
    res.objective = sr.incumbent.cost;
    if (sr.out_of_time) {
        res.proven_optimal = false;
        res.lower_bound = std::min(sr.min_abandoned_bound, res.objective.total);
        res.gap = res.objective.total > 0 ? (res.objective.total - res.lower_bound) / res.objective.total : 0;
        res.status = "feasible";
    } else {
        res.proven_optimal = true;
        res.lower_bound = res.objective.total;
        res.gap = 0;
        res.status = "optimal";
    }
    return res;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle
// ---------------------------------------------------------------------------

namespace {

struct BruteForcer {
    const Instance& inst;
    const ArcMask& mask;
    ChargePolicy policy;
    Incumbent incumbent;
    long long evaluated = 0;

    std::vector<std::vector<int>> blocks; // current partition, stop node ids
    std::vector<int> stop_ids;

    void run() {
        for (int s : inst.stop_idx) stop_ids.push_back(inst.nodes[static_cast<size_t>(s)].id);
        std::sort(stop_ids.begin(), stop_ids.end());
        partition(0);
    }

    // Restricted-growth enumeration of set partitions.
    void partition(size_t pos) {
        if (pos == stop_ids.size()) {
            permute_blocks(0, {});
            return;
        }
        for (size_t b = 0; b < blocks.size(); ++b) {
            blocks[b].push_back(stop_ids[pos]);
            partition(pos + 1);
            blocks[b].pop_back();
        }
        blocks.push_back({stop_ids[pos]});
        partition(pos + 1);
        blocks.pop_back();
    }

    // All visit orders within each block.
    void permute_blocks(size_t b, std::vector<std::vector<int>> ordered) {
        if (b == blocks.size()) {
            assign_types(0, ordered, {});
            return;
        }
        std::vector<int> perm = blocks[b];
        std::sort(perm.begin(), perm.end());
        do {
            ordered.push_back(perm);
            permute_blocks(b + 1, ordered);
            ordered.pop_back();
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    void assign_types(size_t b, const std::vector<std::vector<int>>& ordered, std::vector<int> types) {
        if (b == ordered.size()) {
            std::vector<int> used(inst.bus_catalog.size(), 0);
            for (int t : types)
                if (++used[static_cast<size_t>(t)] > inst.bus_catalog[static_cast<size_t>(t)].count) return;
            place_chargers(ordered, types);
            return;
        }
        for (int t : inst.active_types()) {
            types.push_back(t);
            assign_types(b + 1, ordered, types);
            types.pop_back();
        }
    }

    void place_chargers(const std::vector<std::vector<int>>& ordered, const std::vector<int>& types) {
        // Base solution without chargers.
        Solution base;
        int depot_id = inst.nodes[static_cast<size_t>(inst.depot)].id;
        int school_id = inst.nodes[static_cast<size_t>(inst.school)].id;
        for (size_t b = 0; b < ordered.size(); ++b) {
            Route r;
            r.bus_type = types[b];
            r.visits.push_back(depot_id);
            for (int id : ordered[b]) r.visits.push_back(id);
            r.visits.push_back(school_id);
            base.routes.push_back(std::move(r));
        }
        std::vector<int> copies;
        for (int c : inst.charger_idx) copies.push_back(inst.nodes[static_cast<size_t>(c)].id);
        insert_copies(base, copies, 0);
    }

    // Each charger copy goes unused or into one gap of one route.
    void insert_copies(Solution sol, const std::vector<int>& copies, size_t ci) {
        if (ci == copies.size()) {
            evaluate(sol);
            return;
        }
        insert_copies(sol, copies, ci + 1);
        for (size_t r = 0; r < sol.routes.size(); ++r) {
            size_t len = sol.routes[r].visits.size();
            for (size_t gap = 1; gap < len; ++gap) {
                Solution next = sol;
                auto& vis = next.routes[r].visits;
                vis.insert(vis.begin() + static_cast<long>(gap), copies[ci]);
                insert_copies(std::move(next), copies, ci + 1);
            }
        }
    }

    void evaluate(Solution& sol) {
        ++evaluated;
        for (Route& r : sol.routes)
            if (!resolve_charges(inst, policy, mask, r)) return;
        CostBreakdown cb = objective(inst, sol, ObjectiveForm::Linearized, &mask);
        incumbent.offer(sol, cb);
    }
};

} // namespace

SolveResult brute_force(const Instance& inst, const ArcMask& mask, ChargePolicy policy) {
    if (inst.stop_idx.size() > 5)
        throw std::invalid_argument("brute_force handles at most 5 stops");
    if (inst.charger_idx.size() > 2)
        throw std::invalid_argument("brute_force handles at most 2 charger copies");

    auto start = Clock::now();
    BruteForcer bf{inst, mask, policy, {}, 0, {}, {}};
    bf.run();

    SolveResult res;
    res.nodes_explored = bf.evaluated;
    res.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    if (!bf.incumbent.found) {
        res.status = "infeasible";
        return res;
    }
    res.feasible = true;
    res.proven_optimal = true;
    res.solution = bf.incumbent.solution;
    res.objective = bf.incumbent.cost;
    res.lower_bound = res.objective.total;
    res.status = "optimal";
    return res;
}

} // namespace esbrp
