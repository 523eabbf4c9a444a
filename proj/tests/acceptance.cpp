// Acceptance suite: one line per criterion, nonzero exit when any fails.
//
// The criteria pin the suite's load-bearing behavior: exact cost constants,
// the bundled 14-node reference network, solver agreement against the
// exhaustive oracle, objective-form equivalence, the partial-vs-full
// dominance, both sensitivity patterns, scale targets, and deterministic
// model export.

#include "esbrp/exact_solver.hpp"
#include "esbrp/generator.hpp"
#include "esbrp/instance_io.hpp"
#include "esbrp/lns_solver.hpp"
#include "esbrp/model.hpp"
#include "esbrp/reports.hpp"
#include "esbrp/solution_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace esbrp;

namespace {

int failures = 0;
std::vector<std::string> notes;

void report(int number, const std::string& name, bool ok) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", number, name.c_str());
    for (const std::string& n : notes) std::printf("       %s\n", n.c_str());
    notes.clear();
    if (!ok) ++failures;
}

void note(const std::string& msg) { notes.push_back(msg); }

std::string data_path(const std::string& name) {
    return std::string(ESBRP_SOURCE_DIR) + "/data/" + name;
}

Instance oracle_instance(uint64_t seed) {
    GenSpec spec;
    spec.stops = 3 + static_cast<int>(seed % 3);
    spec.seed = seed;
    spec.charger_sites = 1;
    spec.copies_per_site = static_cast<int>(seed % 3);
    spec.extent = spec.copies_per_site == 0 ? 28.0 + static_cast<double>(seed % 5) * 4.0
                                            : 35.0 + static_cast<double>(seed % 5) * 8.0;
    spec.window_width = 400.0 + static_cast<double>(seed % 7) * 60.0;
    if (seed % 2 == 1) spec.catalog_types = {0, 1};
    spec.fleet_mode = seed % 2 == 1 ? FleetMode::Heterogeneous : FleetMode::Homogeneous;
    return gen_instance(spec);
}

// --------------------------------------------------------------------------
// 1. Cost-table reproduction
// --------------------------------------------------------------------------
bool criterion1() {
    bool ok = true;
    const double capitals[5][2] = {
        {75, 352500}, {60, 342000}, {90, 363000}, {100, 370000}, {110, 377000}};
    for (const auto& row : capitals)
        if (fleet_capital_cost(300000.0, row[0], 700.0) != row[1]) {
            note("capital for " + std::to_string(row[0]) + " kWh off");
            ok = false;
        }
    if (std::abs(charge_time(3.47, 85) - 294.95) > 1e-9) ok = false;
    if (std::abs(charge_time(3.47, 55) - 190.85) > 1e-9) ok = false;
    if (std::abs(charge_time(3.47, 85) - charge_time(3.47, 55) - 104.10) > 1e-9) ok = false;
    if (std::abs(charge_flexibility(3.47, 90, 5, 55) - 104.10) > 1e-9) ok = false;
    return ok;
}

// --------------------------------------------------------------------------
// 2. Reference-network feasibility: battery trace and the 56 kWh top-up
// --------------------------------------------------------------------------
bool criterion2() {
    Instance inst = load_instance_file(data_path("table4_network.json"));
    struct Ref {
        Route route;
        std::vector<double> soc_in;
    };
    std::vector<Ref> refs;
    refs.push_back({Route{0, {0, 7, 9, 4, 12, 3, 13}, {{12, 56.0}}}, {75, 58, 28, 23, 2, 46, 0}});
    refs.push_back({Route{0, {0, 6, 5, 8, 13}, {}}, {75, 60, 30, 20, 0}});
    refs.push_back({Route{0, {0, 1, 2, 10, 13}, {}}, {75, 64, 53, 41, 40.6}});

    bool ok = true;
    for (size_t r = 0; r < refs.size(); ++r) {
        SimulateOutcome out = simulate_route(inst, refs[r].route, ChargePolicy::Partial);
        const RouteTrace* tr = std::get_if<RouteTrace>(&out);
        if (!tr) {
            note("route " + std::to_string(r + 1) + " did not simulate: " +
                 std::get<Violation>(out).str());
            ok = false;
            continue;
        }
        for (size_t i = 0; i < tr->visits.size(); ++i) {
            if (std::abs(tr->visits[i].soc_in - refs[r].soc_in[i]) > 1.0) {
                note("route " + std::to_string(r + 1) + " soc at visit " + std::to_string(i) +
                     " = " + std::to_string(tr->visits[i].soc_in));
                ok = false;
            }
            const Node& nd = inst.by_id(tr->visits[i].node);
            if (tr->visits[i].arrival < nd.earliest - 1e-9 ||
                tr->visits[i].arrival > nd.latest + 1e-9) {
                note("route " + std::to_string(r + 1) + " time outside window at node " +
                     std::to_string(nd.id));
                ok = false;
            }
        }
    }
    Route bare = refs[0].route;
    bare.charge_amounts.clear();
    MinChargeResult mc = min_charge_amounts(inst, bare);
    if (!mc.feasible || mc.charges.size() != 1 || mc.charges.count(12) == 0 ||
        mc.charges.at(12) != 56.0) {
        note("minimal charge at the second station is not exactly 56");
        ok = false;
    }
    return ok;
}

// --------------------------------------------------------------------------
// 3. Oracle equivalence over 200 seeded instances, mask soundness included
// --------------------------------------------------------------------------
bool criterion3() {
    bool ok = true;
    int feasible = 0;
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        Instance inst = oracle_instance(seed);
        ArcMask open_mask = structural_mask(inst);
        ArcMask mask = eliminate_arcs(inst);
        SolveResult oracle_open = brute_force(inst, open_mask);
        SolveResult oracle = brute_force(inst, mask);
        SolveResult fast = solve_exact(inst, mask, 120.0);
        if (oracle_open.feasible != oracle.feasible) {
            note("seed " + std::to_string(seed) + ": masking changed feasibility");
            ok = false;
            continue;
        }
        if (oracle.feasible != fast.feasible) {
            note("seed " + std::to_string(seed) + ": solver feasibility disagrees");
            ok = false;
            continue;
        }
        if (!oracle.feasible) continue;
        ++feasible;
        if (std::abs(oracle_open.objective.total - oracle.objective.total) > 1e-9) {
            note("seed " + std::to_string(seed) + ": mask cut the optimum (" +
                 std::to_string(oracle_open.objective.total) + " vs " +
                 std::to_string(oracle.objective.total) + ")");
            ok = false;
        }
        if (!fast.proven_optimal ||
            std::abs(oracle.objective.total - fast.objective.total) > 1e-9) {
            note("seed " + std::to_string(seed) + ": exact " + std::to_string(fast.objective.total) +
                 " oracle " + std::to_string(oracle.objective.total));
            ok = false;
        }
    }
    note(std::to_string(feasible) + " of 200 instances feasible");
    if (feasible < 150) ok = false;
    return ok;
}

// --------------------------------------------------------------------------
// 4. Objective-form equivalence on 1000 random feasible solutions
// --------------------------------------------------------------------------
bool criterion4() {
    bool ok = true;
    int solutions = 0;
    int model_checked = 0;
    for (uint64_t seed = 1; solutions < 1000 && seed <= 400; ++seed) {
        Instance inst = oracle_instance(seed);
        ArcMask mask = eliminate_arcs(inst);
        std::vector<Solution> pool;
        SolveResult greedy = greedy_construct_result(inst, mask);
        if (greedy.feasible) pool.push_back(greedy.solution);
        for (uint64_t s = 0; s < 3; ++s) {
            LnsConfig cfg;
            cfg.seed = seed * 17 + s;
            cfg.iterations = 60;
            SolveResult lns = solve_lns(inst, mask, cfg);
            if (lns.feasible) pool.push_back(lns.solution);
        }
        Model model = build_model(inst, mask, inst.fleet_mode, ChargePolicy::Partial);
        for (const Solution& sol : pool) {
            if (solutions >= 1000) break;
            ++solutions;
            CostBreakdown nl = objective(inst, sol, ObjectiveForm::Nonlinear);
            CostBreakdown lin = objective(inst, sol, ObjectiveForm::Linearized);
            if (nl.total != lin.total || nl.charging_cost != lin.charging_cost) {
                note("seed " + std::to_string(seed) + ": objective forms differ by " +
                     std::to_string(nl.total - lin.total));
                ok = false;
            }
            Assignment a = solution_assignment(model, inst, sol);
            if (check_assignment(model, a).has_value()) {
                note("seed " + std::to_string(seed) + ": feasible solution rejected by the model");
                ok = false;
                continue;
            }
            ++model_checked;
            if (std::abs(eval_objective(model, a) - lin.total) > 1e-9) {
                note("seed " + std::to_string(seed) + ": model objective off by " +
                     std::to_string(eval_objective(model, a) - lin.total));
                ok = false;
            }
        }
    }
    note(std::to_string(solutions) + " solutions compared, " + std::to_string(model_checked) +
         " checked against the model");
    if (solutions < 1000) ok = false;
    return ok;
}

// --------------------------------------------------------------------------
// 5. Partial-versus-full dominance and the two bundled witnesses
// --------------------------------------------------------------------------
bool criterion5() {
    bool ok = true;
    int pairs = 0;
    for (uint64_t seed = 1; seed <= 40; ++seed) {
        Instance inst = oracle_instance(seed);
        if (inst.charger_idx.empty()) continue;
        ArcMask mask = eliminate_arcs(inst);
        SolveResult part = solve_exact(inst, mask, 60.0, ChargePolicy::Partial);
        SolveResult full = solve_exact(inst, mask, 60.0, ChargePolicy::Full);
        if (!part.feasible || !full.feasible || !part.proven_optimal || !full.proven_optimal)
            continue;
        ++pairs;
        if (part.objective.total > full.objective.total + 1e-9) {
            note("seed " + std::to_string(seed) + ": partial " +
                 std::to_string(part.objective.total) + " exceeds full " +
                 std::to_string(full.objective.total));
            ok = false;
        }
    }
    note(std::to_string(pairs) + " proven partial/full pairs compared");
    if (pairs < 10) ok = false;

    // Strictly positive savings on the bundled 14-node network.
    Instance t4 = load_instance_file(data_path("table4_network.json"));
    SolveOptions opts;
    opts.time_limit = 300;
    SweepReport cmp = compare_charging(t4, SolverChoice::Exact, opts, {60, 75, 90, 100, 110});
    bool strict = false;
    for (const SweepRow& row : cmp.rows)
        if (row.status == "optimal" && row.full_status == "optimal" && row.savings > 1e-6)
            strict = true;
    if (!strict) {
        note("no strictly positive savings row on the 14-node network");
        ok = false;
    }

    // The chain network: feasible with a minimal top-up, infeasible when
    // forced to charge fully.
    Instance chain = load_instance_file(data_path("tight_bell.json"));
    ArcMask cmask = eliminate_arcs(chain);
    SolveResult cp = solve_exact(chain, cmask, 60.0, ChargePolicy::Partial);
    SolveResult cf = solve_exact(chain, cmask, 60.0, ChargePolicy::Full);
    if (!cp.feasible || !cp.proven_optimal || cf.feasible) {
        note("chain network did not witness full-infeasible/partial-feasible");
        ok = false;
    }
    return ok;
}

// --------------------------------------------------------------------------
// 6. Ride-time plateau on the 14-node network
// --------------------------------------------------------------------------
bool criterion6() {
    Instance t4 = load_instance_file(data_path("table4_network.json"));
    SolveOptions opts;
    opts.time_limit = 300;
    SweepReport rep = sweep_mrt(t4, {150, 200, 300, 400, 500, 1000}, SolverChoice::Exact, opts);
    bool ok = true;
    int prev = 1 << 30;
    for (const SweepRow& row : rep.rows) {
        if (row.status != "optimal") {
            note("row " + std::to_string(row.swept) + " not proven optimal");
            ok = false;
            continue;
        }
        if (row.fleet_count > prev) {
            note("fleet count rose at cap " + std::to_string(row.swept));
            ok = false;
        }
        prev = row.fleet_count;
    }
    size_t n = rep.rows.size();
    if (n >= 2) {
        const SweepRow& a = rep.rows[n - 2];
        const SweepRow& b = rep.rows[n - 1];
        if (a.fleet_count != b.fleet_count || std::abs(a.total - b.total) > 1e-9) {
            note("no invariant plateau at the tail of the sweep");
            ok = false;
        }
        if (rep.rows.front().fleet_count == b.fleet_count) {
            note("fleet count never moved; the sweep shows no trade-off");
            ok = false;
        }
    }
    return ok;
}

// --------------------------------------------------------------------------
// 7. Battery-size sweep has its interior argmin at 75 kWh
// --------------------------------------------------------------------------
bool criterion7() {
    Instance t4 = load_instance_file(data_path("table4_network.json"));
    SolveOptions opts;
    opts.time_limit = 300;
    SweepReport rep = sweep_battery(t4, {60, 75, 90, 100, 110}, SolverChoice::Exact, opts);
    bool ok = true;
    size_t argmin = 0;
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        if (rep.rows[i].status != "optimal") {
            note("row " + std::to_string(rep.rows[i].swept) + " not proven optimal");
            ok = false;
        }
        if (rep.rows[i].total < rep.rows[argmin].total) argmin = i;
        note("size " + std::to_string(rep.rows[i].swept) + " -> " +
             std::to_string(rep.rows[i].total));
    }
    if (argmin == 0 || argmin + 1 == rep.rows.size()) {
        note("argmin sits on the sweep boundary");
        ok = false;
    }
    if (rep.rows[argmin].swept != 75.0) {
        note("argmin at " + std::to_string(rep.rows[argmin].swept) + " kWh, not 75");
        ok = false;
    }
    return ok;
}

// --------------------------------------------------------------------------
// 8. Scale: prove a 19-node network, route a 90-node one
// --------------------------------------------------------------------------
bool criterion8() {
    bool ok = true;
    {
        GenSpec spec;
        spec.stops = 15;
        spec.seed = 42;
        spec.charger_sites = 1;
        spec.copies_per_site = 2;
        Instance inst = gen_instance(spec);
        if (inst.size() != 19) {
            note("generated network is not 19 nodes");
            ok = false;
        }
        SolveResult res = solve_exact(inst, eliminate_arcs(inst), 600.0);
        note("19-node exact: " + res.status + " total=" + std::to_string(res.objective.total) +
             " nodes=" + std::to_string(res.nodes_explored) + " time=" +
             std::to_string(res.wall_time) + "s");
        if (!res.proven_optimal) {
            note("19-node instance not proven within 600 s");
            ok = false;
        }
    }
    {
        GenSpec spec;
        spec.stops = 80;
        spec.seed = 42;
        spec.charger_sites = 4;
        spec.copies_per_site = 2;
        spec.extent = 45.0;
        Instance inst = gen_instance(spec);
        if (inst.size() != 90) {
            note("generated network is not 90 nodes");
            ok = false;
        }
        ArcMask mask = eliminate_arcs(inst);
        LnsConfig cfg;
        cfg.seed = 1;
        cfg.iterations = 4000;
        SolveResult res = solve_lns(inst, mask, cfg);
        note("90-node heuristic: " + res.status + " total=" + std::to_string(res.objective.total) +
             " buses=" + std::to_string(res.solution.routes.size()) + " time=" +
             std::to_string(res.wall_time) + "s");
        if (!res.feasible || res.wall_time > 300.0) {
            note("90-node instance not routed inside 5 minutes");
            ok = false;
        } else if (!check_solution(inst, res.solution, &mask).empty()) {
            note("90-node solution failed the checker");
            ok = false;
        }
    }
    return ok;
}

// --------------------------------------------------------------------------
// 9. Deterministic model export and variable counts
// --------------------------------------------------------------------------
bool criterion9() {
    bool ok = true;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        GenSpec spec;
        spec.stops = 1 + static_cast<int>(seed % 6);
        spec.seed = seed;
        spec.charger_sites = 1;
        spec.copies_per_site = static_cast<int>(seed % 3);
        if (seed % 2 == 0) spec.catalog_types = {0, 1};
        spec.fleet_mode = seed % 2 == 0 ? FleetMode::Heterogeneous : FleetMode::Homogeneous;
        Instance inst = gen_instance(spec);
        ArcMask mask = eliminate_arcs(inst);
        ChargePolicy policy = seed % 3 == 0 ? ChargePolicy::Full : ChargePolicy::Partial;

        Model a = build_model(inst, mask, inst.fleet_mode, policy);
        Model b = build_model(inst, mask, inst.fleet_mode, policy);
        if (emit_lp(a) != emit_lp(b)) {
            note("seed " + std::to_string(seed) + ": LP text not byte-stable");
            ok = false;
        }

        // Independent index-set enumeration.
        std::vector<int> types;
        if (inst.fleet_mode == FleetMode::Homogeneous)
            types = {0};
        else
            for (size_t t = 0; t < inst.bus_catalog.size(); ++t) types.push_back(static_cast<int>(t));
        long want_x = 0, want_t = 0, want_v = 0, want_y = 0, want_z = 0, want_p = 0;
        for (int t : types) {
            int slots = std::min(inst.bus_catalog[static_cast<size_t>(t)].count,
                                 static_cast<int>(inst.stop_idx.size()));
            long arcs = 0;
            for (int i = 0; i < inst.size(); ++i) {
                if (inst.nodes[static_cast<size_t>(i)].kind == NodeKind::School) continue;
                for (int j = 0; j < inst.size(); ++j) {
                    if (i == j || inst.nodes[static_cast<size_t>(j)].kind == NodeKind::Depot) continue;
                    if (mask.allowed(t, i, j)) ++arcs;
                }
            }
            want_x += slots * arcs;
            want_t += slots * inst.size();
            want_v += slots * inst.size();
            want_z += slots * static_cast<long>(inst.charger_idx.size());
            want_p += slots * static_cast<long>(inst.charger_idx.size());
            if (policy == ChargePolicy::Partial)
                want_y += slots * static_cast<long>(inst.charger_idx.size());
        }
        ModelStats st = model_stats(a);
        auto have = [&](const char* k) {
            return st.vars_by_kind.count(k) ? st.vars_by_kind.at(k) : 0;
        };
        if (have("x") != want_x || have("t") != want_t || have("v") != want_v ||
            have("y") != want_y || have("z") != want_z || have("p") != want_p) {
            note("seed " + std::to_string(seed) + ": variable counts diverge from enumeration");
            ok = false;
        }
    }
    return ok;
}

} // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    report(1, "published fleet capitals and charging times reproduce exactly", criterion1());
    report(2, "14-node reference routes trace within tolerance; top-up is 56 kWh", criterion2());
    report(3, "exact solver matches the exhaustive oracle; masks never cut the optimum",
           criterion3());
    report(4, "nonlinear and linearized objectives agree bit-exactly; model totals match",
           criterion4());
    report(5, "partial charging never loses to full; both bundled witnesses hold", criterion5());
    report(6, "fleet counts fall monotonically to an invariant ride-time plateau", criterion6());
    report(7, "battery sweep bottoms out at 75 kWh in the interior", criterion7());
    report(8, "19-node networks prove within 10 minutes, 90-node networks route within 5",
           criterion8());
    report(9, "LP export is byte-deterministic; variable counts match enumeration", criterion9());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s (%d of 9 criteria failed, %.1f s)\n", failures == 0 ? "ALL PASS" : "FAILURES",
                failures, secs);
    return failures == 0 ? 0 : 1;
}
