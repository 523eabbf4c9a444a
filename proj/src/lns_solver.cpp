#include "esbrp/lns_solver.hpp"

#include "esbrp/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace esbrp {

namespace {

struct RouteState {
    Route route;
    double op_cost = 0; // travel + charging, fleet excluded
};

struct EvalOut {
    bool feasible = false;
    bool energy_bound = false; // failed because the battery ran out
    Route route;
    double op_cost = 0;
};

// Costs a visit sequence with minimal charging; infeasible sequences report
// feasible = false.
EvalOut eval_route(const Instance& inst, const ArcMask& mask, ChargePolicy policy, int type,
                   const std::vector<int>& visits) {
    EvalOut out;
    Route r;
    r.bus_type = type;
    r.visits = visits;
    if (policy == ChargePolicy::Partial) {
        MinChargeResult mc = min_charge_amounts(inst, r);
        if (!mc.feasible) {
            out.energy_bound = mc.reason.find("battery") != std::string::npos ||
                               mc.reason.find("full battery") != std::string::npos;
            return out;
        }
        r.charge_amounts = std::move(mc.charges);
    }
    SimulateOutcome sim = simulate_route(inst, r, policy, &mask);
    if (const Violation* v = std::get_if<Violation>(&sim)) {
        out.energy_bound = v->kind == ViolationKind::BatteryDepleted;
        return out;
    }
    const RouteTrace* trace = std::get_if<RouteTrace>(&sim);
    if (policy == ChargePolicy::Full)
        for (const auto& v : trace->visits)
            if (v.charge > 0) r.charge_amounts[v.node] = v.charge;
    const BusType& bt = inst.bus_catalog[static_cast<size_t>(type)];
    double unit = inst.params.enroute_charge_cost + inst.params.recharge_rate * bt.time_cost;
    out.feasible = true;
    out.op_cost = bt.time_cost * trace->total_travel_time + unit * trace->total_charge;
    out.route = std::move(r);
    return out;
}

// Strips charger visits whose minimal charge is zero; re-costs the route.
// Infeasible remainders (possible with non-metric matrices) report failure.
bool normalize_route(const Instance& inst, const ArcMask& mask, ChargePolicy policy, RouteState& rs) {
    std::vector<int> visits;
    for (int id : rs.route.visits) {
        const Node& nd = inst.by_id(id);
        if (nd.kind == NodeKind::Charger && rs.route.charge_at(id) <= kFeasEps) continue;
        visits.push_back(id);
    }
    for (;;) {
        EvalOut ev = eval_route(inst, mask, policy, rs.route.bus_type, visits);
        if (!ev.feasible) return false;
        // Another pass may free further chargers.
        std::vector<int> pruned;
        for (int id : visits) {
            const Node& nd = inst.by_id(id);
            if (nd.kind == NodeKind::Charger && ev.route.charge_at(id) <= kFeasEps) continue;
            pruned.push_back(id);
        }
        if (pruned.size() == visits.size()) {
            rs.route = std::move(ev.route);
            rs.op_cost = ev.op_cost;
            return true;
        }
        visits = std::move(pruned);
    }
}

struct Plan {
    bool ok = false;
    int route_idx = -1; // -1: open a new route
    int new_type = -1;
    std::vector<int> visits;
    double delta = std::numeric_limits<double>::infinity();
    EvalOut eval;
};

struct Lns {
    const Instance& inst;
    const ArcMask& mask;
    ChargePolicy policy;
    std::vector<RouteState> routes;
    std::vector<char> charger_free; // by node index

    Lns(const Instance& in, const ArcMask& mk, ChargePolicy pol) : inst(in), mask(mk), policy(pol) {
        charger_free.assign(static_cast<size_t>(inst.size()), 0);
        for (int c : inst.charger_idx) charger_free[static_cast<size_t>(c)] = 1;
    }

    int type_in_use(int type) const {
        int n = 0;
        for (const RouteState& rs : routes)
            if (rs.route.bus_type == type) ++n;
        return n;
    }

    double total_cost() const {
        double t = 0;
        for (const RouteState& rs : routes)
            t += rs.op_cost + dispatch_cost(inst.bus_catalog[static_cast<size_t>(rs.route.bus_type)], inst.params);
        return t;
    }

    void claim_chargers(const Route& r, bool used) {
        for (int id : r.visits) {
            const Node& nd = inst.by_id(id);
            if (nd.kind == NodeKind::Charger) charger_free[static_cast<size_t>(inst.index_of(id))] = !used;
        }
    }

    // Best feasible way to add one stop, charger repair included.
    Plan best_insertion(int stop_id) {
        Plan best;
        auto consider = [&](int ridx, int type, const std::vector<int>& visits, double base_cost,
                            double fleet_add) {
            EvalOut ev = eval_route(inst, mask, policy, type, visits);
            if (!ev.feasible) return false;
            double delta = ev.op_cost - base_cost + fleet_add;
            if (delta < best.delta - 1e-12) {
                best.ok = true;
                best.route_idx = ridx;
                best.new_type = type;
                best.visits = visits;
                best.delta = delta;
                best.eval = std::move(ev);
            }
            return true;
        };

        // Insertions into existing routes; when a spot fails on energy, retry
        // it with one free charger spliced in.
        for (size_t ridx = 0; ridx < routes.size(); ++ridx) {
            const RouteState& rs = routes[static_cast<size_t>(ridx)];
            for (size_t gap = 1; gap < rs.route.visits.size(); ++gap) {
                std::vector<int> with_stop = rs.route.visits;
                with_stop.insert(with_stop.begin() + static_cast<long>(gap), stop_id);
                EvalOut plain = eval_route(inst, mask, policy, rs.route.bus_type, with_stop);
                if (plain.feasible) {
                    double delta = plain.op_cost - rs.op_cost;
                    if (delta < best.delta - 1e-12) {
                        best.ok = true;
                        best.route_idx = static_cast<int>(ridx);
                        best.new_type = rs.route.bus_type;
                        best.visits = with_stop;
                        best.delta = delta;
                        best.eval = std::move(plain);
                    }
                    continue;
                }
                if (!plain.energy_bound) continue;
                for (int c : inst.charger_idx) {
                    if (!charger_free[static_cast<size_t>(c)]) continue;
                    int cid = inst.nodes[static_cast<size_t>(c)].id;
                    for (size_t h = 1; h < with_stop.size(); ++h) {
                        std::vector<int> visits = with_stop;
                        visits.insert(visits.begin() + static_cast<long>(h), cid);
                        consider(static_cast<int>(ridx), rs.route.bus_type, visits, rs.op_cost, 0.0);
                    }
                }
            }
        }
        // A fresh bus.
        int depot_id = inst.nodes[static_cast<size_t>(inst.depot)].id;
        int school_id = inst.nodes[static_cast<size_t>(inst.school)].id;
        for (int t : inst.active_types()) {
            if (type_in_use(t) >= inst.usable_count(t)) continue;
            consider(-1, t, {depot_id, stop_id, school_id}, 0.0,
                     dispatch_cost(inst.bus_catalog[static_cast<size_t>(t)], inst.params));
        }
        return best;
    }

    // Applies a plan; returns the node ids of chargers newly claimed.
    void apply(const Plan& plan) {
        if (plan.route_idx < 0) {
            RouteState rs;
            rs.route = plan.eval.route;
            rs.op_cost = plan.eval.op_cost;
            claim_chargers(rs.route, true);
            routes.push_back(std::move(rs));
        } else {
            RouteState& rs = routes[static_cast<size_t>(plan.route_idx)];
            claim_chargers(rs.route, false);
            rs.route = plan.eval.route;
            rs.op_cost = plan.eval.op_cost;
            claim_chargers(rs.route, true);
        }
    }

    Solution snapshot() const {
        Solution sol;
        for (const RouteState& rs : routes) sol.routes.push_back(rs.route);
        return sol;
    }

    void restore(const Solution& sol) {
        routes.clear();
        for (int c : inst.charger_idx) charger_free[static_cast<size_t>(c)] = 1;
        for (const Route& r : sol.routes) {
            RouteState rs;
            rs.route = r;
            EvalOut ev = eval_route(inst, mask, policy, r.bus_type, r.visits);
            rs.route = ev.route;
            rs.op_cost = ev.op_cost;
            claim_chargers(rs.route, true);
            routes.push_back(std::move(rs));
        }
    }
};

std::vector<int> stops_by_deadline(const Instance& inst) {
    std::vector<int> ids;
    for (int s : inst.stop_idx) ids.push_back(inst.nodes[static_cast<size_t>(s)].id);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        const Node& na = inst.by_id(a);
        const Node& nb = inst.by_id(b);
        return na.latest != nb.latest ? na.latest < nb.latest : a < b;
    });
    return ids;
}

} // namespace

SolveResult greedy_construct_result(const Instance& inst, const ArcMask& mask, ChargePolicy policy) {
    auto start = std::chrono::steady_clock::now();
    SolveResult res;
    Lns state(inst, mask, policy);
    for (int stop_id : stops_by_deadline(inst)) {
        Plan plan = state.best_insertion(stop_id);
        if (!plan.ok) {
            res.status = "infeasible-start";
            res.search_log = "greedy construction cannot place stop " + std::to_string(stop_id);
            return res;
        }
        state.apply(plan);
    }
    res.feasible = true;
    res.solution = state.snapshot();
    res.objective = objective(inst, res.solution, ObjectiveForm::Linearized, &mask);
    res.status = "feasible";
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

Solution greedy_construct(const Instance& inst, const ArcMask& mask, ChargePolicy policy) {
    SolveResult res = greedy_construct_result(inst, mask, policy);
    if (!res.feasible) throw std::runtime_error(res.search_log);
    return res.solution;
}

SolveResult solve_lns(const Instance& inst, const ArcMask& mask, const LnsConfig& cfg,
                      ChargePolicy policy) {
    auto start = std::chrono::steady_clock::now();
    SolveResult res = greedy_construct_result(inst, mask, policy);
    if (!res.feasible) return res;

    Lns state(inst, mask, policy);
    state.restore(res.solution);

    Solution best = res.solution;
    double best_cost = res.objective.total;
    double cur_cost = best_cost;

    Rng rng(cfg.seed);
    double t0 = std::max(1e-9, cfg.sa_t0_fraction * best_cost);
    double temp = t0;
    double wsum = cfg.w_random_removal + cfg.w_worst_removal + cfg.w_route_removal;

    int stop_count = static_cast<int>(inst.stop_idx.size());
    int q = std::max(1, static_cast<int>(std::lround(cfg.destroy_fraction * stop_count)));

    int stale = 0;
    for (int iter = 0; iter < cfg.iterations; ++iter, temp *= cfg.sa_cooling) {
        if (cfg.accept == LnsConfig::Accept::SimulatedAnnealing && ++stale >= 2000) {
            temp = t0; // reheat a stalled search
            stale = 0;
        }
        Solution backup = state.snapshot();

        // --- destroy ---------------------------------------------------
        std::vector<int> removed;
        double pick = rng.unit() * (wsum > 0 ? wsum : 1.0);
        if (pick < cfg.w_random_removal || state.routes.empty()) {
            std::vector<int> pool;
            for (const RouteState& rs : state.routes)
                for (int id : rs.route.visits)
                    if (inst.by_id(id).kind == NodeKind::Stop) pool.push_back(id);
            std::sort(pool.begin(), pool.end());
            for (int i = 0; i < q && !pool.empty(); ++i) {
                int at = rng.below(static_cast<int>(pool.size()));
                removed.push_back(pool[static_cast<size_t>(at)]);
                pool.erase(pool.begin() + at);
            }
        } else if (pick < cfg.w_random_removal + cfg.w_worst_removal) {
            // Rank stops by the saving their removal buys.
            std::vector<std::pair<double, int>> savings;
            for (const RouteState& rs : state.routes) {
                for (int id : rs.route.visits) {
                    if (inst.by_id(id).kind != NodeKind::Stop) continue;
                    std::vector<int> without;
                    for (int v : rs.route.visits)
                        if (v != id) without.push_back(v);
                    EvalOut ev = eval_route(inst, mask, policy, rs.route.bus_type, without);
                    double save = ev.feasible ? rs.op_cost - ev.op_cost : 0.0;
                    savings.emplace_back(-save, id);
                }
            }
            std::sort(savings.begin(), savings.end());
            for (int i = 0; i < q && i < static_cast<int>(savings.size()); ++i)
                removed.push_back(savings[static_cast<size_t>(i)].second);
        } else {
            int at = rng.below(static_cast<int>(state.routes.size()));
            for (int id : state.routes[static_cast<size_t>(at)].route.visits)
                if (inst.by_id(id).kind == NodeKind::Stop) removed.push_back(id);
        }
        if (removed.empty()) continue;

        // Rebuild the touched routes without the removed stops.
        std::vector<RouteState> kept;
        std::vector<int> pool = removed;
        for (RouteState& rs : state.routes) {
            std::vector<int> visits;
            bool touched = false;
            for (int id : rs.route.visits) {
                if (std::find(removed.begin(), removed.end(), id) != removed.end()) {
                    touched = true;
                    continue;
                }
                visits.push_back(id);
            }
            bool has_stop = false;
            for (int id : visits)
                if (inst.by_id(id).kind == NodeKind::Stop) has_stop = true;
            if (!has_stop) {
                state.claim_chargers(rs.route, false);
                continue;
            }
            if (touched) {
                state.claim_chargers(rs.route, false);
                RouteState nrs;
                nrs.route.bus_type = rs.route.bus_type;
                nrs.route.visits = visits;
                if (!normalize_route(inst, mask, policy, nrs)) {
                    // Salvage: recycle its stops through the repair pool.
                    for (int id : visits)
                        if (inst.by_id(id).kind == NodeKind::Stop) pool.push_back(id);
                    continue;
                }
                state.claim_chargers(nrs.route, true);
                kept.push_back(std::move(nrs));
            } else {
                kept.push_back(std::move(rs));
            }
        }
        state.routes = std::move(kept);

        // --- repair ----------------------------------------------------
        std::sort(pool.begin(), pool.end(), [&](int a, int b) {
            const Node& na = inst.by_id(a);
            const Node& nb = inst.by_id(b);
            return na.latest != nb.latest ? na.latest < nb.latest : a < b;
        });
        bool failed = false;
        for (int stop_id : pool) {
            Plan plan = state.best_insertion(stop_id);
            if (!plan.ok) {
                failed = true;
                break;
            }
            state.apply(plan);
        }
        if (failed) {
            state.restore(backup);
            continue;
        }

        // --- accept ----------------------------------------------------
        double cand_cost = state.total_cost();
        bool accept = cand_cost < cur_cost - 1e-12;
        if (!accept && cfg.accept == LnsConfig::Accept::SimulatedAnnealing)
            accept = rng.unit() < std::exp(-(cand_cost - cur_cost) / temp);
        if (!accept) {
            state.restore(backup);
            continue;
        }
        cur_cost = cand_cost;
        if (cand_cost < best_cost - 1e-12) {
            best_cost = cand_cost;
            best = state.snapshot();
            stale = 0;
        }
    }

    res.solution = best;
    res.objective = objective(inst, res.solution, ObjectiveForm::Linearized, &mask);
    res.nodes_explored = cfg.iterations;
    res.proven_optimal = false;
    res.status = "feasible";
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace esbrp
