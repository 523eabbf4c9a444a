#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esbrp/exact_solver.hpp"
#include "esbrp/lns_solver.hpp"
#include "esbrp/solution_io.hpp"
#include "helpers.hpp"

#include <sstream>

using namespace esbrp;

TEST_CASE("one stop: the only route, proven") {
    Instance inst = test::one_stop();
    ArcMask mask = eliminate_arcs(inst);
    SolveResult res = solve_exact(inst, mask);
    REQUIRE(res.feasible);
    CHECK(res.proven_optimal);
    REQUIRE(res.solution.routes.size() == 1);
    CHECK(res.solution.routes[0].visits == std::vector<int>{0, 1, 2});
    CHECK(res.status == "optimal");
    CHECK(res.gap == 0.0);
}

TEST_CASE("exact equals brute force on small instances") {
    int feasible = 0;
    for (uint64_t seed = 700; seed < 740; ++seed) {
        Instance inst = test::oracle_instance(seed, 3 + static_cast<int>(seed % 3),
                                              seed % 2 == 0 ? 1 : 2);
        ArcMask mask = eliminate_arcs(inst);
        SolveResult oracle = brute_force(inst, mask);
        SolveResult fast = solve_exact(inst, mask);
        REQUIRE_MESSAGE(oracle.feasible == fast.feasible, "seed ", seed);
        if (!oracle.feasible) continue;
        ++feasible;
        CHECK_MESSAGE(std::abs(oracle.objective.total - fast.objective.total) < 1e-9, "seed ", seed,
                      " oracle ", oracle.objective.total, " exact ", fast.objective.total);
        CHECK(fast.proven_optimal);
        CHECK(check_solution(inst, fast.solution, &mask).empty());
    }
    CHECK(feasible >= 30);
}

TEST_CASE("capacity forces a second bus") {
    Instance inst = test::one_stop();
    inst.nodes[1].demand = 100;
    inst.bus_catalog[0].capacity = 60;
    inst.bus_catalog[0].count = 3;
    inst.finalize();
    // One stop cannot split; raise a second stop instead.
    Node extra = inst.nodes[1];
    extra.id = 9;
    extra.x = 11.0;
    extra.demand = 30;
    inst.nodes.push_back(extra);
    inst.nodes[1].demand = 50;
    inst.dist = euclidean_matrix(inst.nodes);
    inst.time = Matrix();
    inst.finalize();
    ArcMask mask = eliminate_arcs(inst);
    SolveResult res = solve_exact(inst, mask);
    REQUIRE(res.feasible);
    CHECK(res.proven_optimal);
    CHECK(res.solution.routes.size() >= 2);
}

TEST_CASE("the completion bound is admissible and tight at leaves") {
    for (uint64_t seed = 800; seed < 830; ++seed) {
        Instance inst = test::oracle_instance(seed, 4);
        ArcMask mask = eliminate_arcs(inst);
        SolveResult oracle = brute_force(inst, mask);
        if (!oracle.feasible) continue;

        SearchNode root;
        root.mask = &mask;
        for (int s : inst.stop_idx) root.unassigned.push_back(s);
        CHECK(lower_bound(root, inst) <= oracle.objective.total + 1e-9);

        SearchNode leaf;
        leaf.mask = &mask;
        leaf.committed_cost = oracle.objective.total;
        CHECK(lower_bound(leaf, inst) == doctest::Approx(oracle.objective.total).epsilon(1e-12));
    }
}

TEST_CASE("removing arcs never lowers the bound") {
    Instance inst = test::oracle_instance(801, 4);
    ArcMask full_mask = structural_mask(inst);
    ArcMask pruned = eliminate_arcs(inst);
    SearchNode a, b;
    for (int s : inst.stop_idx) {
        a.unassigned.push_back(s);
        b.unassigned.push_back(s);
    }
    a.mask = &full_mask;
    b.mask = &pruned;
    CHECK(lower_bound(a, inst) <= lower_bound(b, inst) + 1e-12);
}

TEST_CASE("exact search is deterministic") {
    Instance inst = test::oracle_instance(802, 5);
    ArcMask mask = eliminate_arcs(inst);
    SolveResult a = solve_exact(inst, mask);
    SolveResult b = solve_exact(inst, mask);
    CHECK(a.nodes_explored == b.nodes_explored);
    CHECK(a.objective.total == b.objective.total);
    CHECK(serialize(a.solution) == serialize(b.solution));
}

TEST_CASE("incumbents only improve over the search") {
    Instance inst = test::oracle_instance(803, 5);
    ArcMask mask = eliminate_arcs(inst);
    SolveResult res = solve_exact(inst, mask);
    REQUIRE(res.feasible);
    std::istringstream log(res.search_log);
    std::string line;
    double prev = std::numeric_limits<double>::infinity();
    int count = 0;
    while (std::getline(log, line)) {
        auto at = line.find("incumbent=");
        if (at == std::string::npos) continue;
        double v = std::stod(line.substr(at + 10));
        CHECK(v < prev);
        prev = v;
        ++count;
    }
    CHECK(count >= 1);
}

TEST_CASE("an exhausted budget still reports an incumbent and a gap") {
    GenSpec spec;
    spec.stops = 9;
    spec.seed = 99;
    spec.charger_sites = 1;
    spec.copies_per_site = 2;
    Instance inst = gen_instance(spec);
    ArcMask mask = eliminate_arcs(inst);
    SolveResult res = solve_exact(inst, mask, 0.01);
    if (res.feasible && !res.proven_optimal) {
        CHECK(res.status == "feasible");
        CHECK(res.gap >= 0.0);
        CHECK(res.lower_bound <= res.objective.total + 1e-9);
    }
    // With a fuller budget the same instance proves out.
    SolveResult full = solve_exact(inst, mask, 300.0);
    REQUIRE(full.feasible);
    CHECK(full.proven_optimal);
    if (res.feasible) CHECK(full.objective.total <= res.objective.total + 1e-9);
}

TEST_CASE("brute force guards its input size") {
    GenSpec spec;
    spec.stops = 6;
    spec.seed = 1;
    Instance inst = gen_instance(spec);
    CHECK_THROWS_AS(brute_force(inst, structural_mask(inst)), std::invalid_argument);
    GenSpec wide;
    wide.stops = 3;
    wide.seed = 1;
    wide.charger_sites = 3;
    wide.copies_per_site = 1;
    Instance many = gen_instance(wide);
    CHECK_THROWS_AS(brute_force(many, structural_mask(many)), std::invalid_argument);
}

TEST_CASE("symmetric stops tie deterministically") {
    // Two stops mirrored around the depot-school axis, equal demand/windows.
    Instance inst = test::one_stop();
    Node other = inst.nodes[1];
    other.id = 5;
    other.y = 3.0;
    inst.nodes[1].y = -3.0;
    inst.nodes.push_back(other);
    inst.bus_catalog[0].count = 2;
    inst.dist = euclidean_matrix(inst.nodes);
    inst.time = Matrix();
    inst.finalize();
    ArcMask mask = eliminate_arcs(inst);
    SolveResult a = brute_force(inst, mask);
    SolveResult b = brute_force(inst, mask);
    REQUIRE(a.feasible);
    CHECK(serialize(a.solution) == serialize(b.solution));
    SolveResult ex = solve_exact(inst, mask);
    CHECK(std::abs(ex.objective.total - a.objective.total) < 1e-9);
}

// ---------------------------------------------------------------------------
// LNS
// ---------------------------------------------------------------------------

TEST_CASE("greedy construction handles the bundled networks") {
    for (const Instance& inst : {test::table4(), test::one_stop()}) {
        ArcMask mask = eliminate_arcs(inst);
        SolveResult res = greedy_construct_result(inst, mask);
        REQUIRE(res.feasible);
        CHECK(check_solution(inst, res.solution, &mask).empty());
    }
    // The chain network has no single-stop seed route: every bus must pass
    // the charger between the two stops, so one-at-a-time construction
    // reports the stop it cannot place rather than guessing.
    Instance chain = test::tight_bell();
    SolveResult res = greedy_construct_result(chain, eliminate_arcs(chain));
    CHECK_FALSE(res.feasible);
    CHECK(res.status == "infeasible-start");
}

TEST_CASE("greedy reports the stop it cannot place") {
    Instance inst = test::one_stop();
    inst.bus_catalog[0].battery = 5.0;
    inst.finalize();
    ArcMask mask = eliminate_arcs(inst);
    SolveResult res = greedy_construct_result(inst, mask);
    CHECK_FALSE(res.feasible);
    CHECK(res.status == "infeasible-start");
    CHECK(res.search_log.find("stop 1") != std::string::npos);
    CHECK_THROWS(greedy_construct(inst, mask));
}

TEST_CASE("a far stop pulls in a charger with a positive charge") {
    // A near stop seeds the route, then the far stop only fits with a
    // mid-route top-up: depot(0,0), s1(30,0), charger(40,20), s2(45,40),
    // school(60,0); round trip through s2 runs over the 75 kWh pack.
    Instance inst = test::one_stop();
    inst.nodes[1].x = 30.0;
    inst.nodes[1].latest = 900.0;
    inst.nodes[2].x = 60.0; // school
    Node far = inst.nodes[1];
    far.id = 3;
    far.x = 45.0;
    far.y = 40.0;
    far.latest = 1000.0;
    Node ch = inst.nodes[1];
    ch.id = 4;
    ch.kind = NodeKind::Charger;
    ch.x = 40.0;
    ch.y = 20.0;
    ch.demand = 0;
    ch.service_time = 0.0;
    ch.earliest = 0.0;
    ch.latest = 1200.0;
    inst.nodes.push_back(far);
    inst.nodes.push_back(ch);
    inst.bus_catalog[0].count = 2;
    inst.dist = euclidean_matrix(inst.nodes);
    inst.time = Matrix();
    inst.finalize();
    REQUIRE(validate(inst).ok());

    ArcMask mask = eliminate_arcs(inst);
    Solution sol = greedy_construct(inst, mask);
    CHECK(check_solution(inst, sol, &mask).empty());
    bool charged = false;
    for (const Route& r : sol.routes)
        for (const auto& [node, kwh] : r.charge_amounts) charged |= node == 4 && kwh > 0;
    CHECK(charged);
}

TEST_CASE("zero iterations returns the greedy start unchanged") {
    Instance inst = test::table4();
    ArcMask mask = eliminate_arcs(inst);
    LnsConfig cfg;
    cfg.iterations = 0;
    SolveResult lns = solve_lns(inst, mask, cfg);
    SolveResult greedy = greedy_construct_result(inst, mask);
    REQUIRE(lns.feasible);
    CHECK(serialize(lns.solution) == serialize(greedy.solution));
}

TEST_CASE("the same seed reproduces the same search") {
    Instance inst = test::table4();
    ArcMask mask = eliminate_arcs(inst);
    LnsConfig cfg;
    cfg.seed = 42;
    cfg.iterations = 400;
    SolveResult a = solve_lns(inst, mask, cfg);
    SolveResult b = solve_lns(inst, mask, cfg);
    CHECK(a.objective.total == b.objective.total);
    CHECK(serialize(a.solution) == serialize(b.solution));
}

TEST_CASE("search never ends worse than its greedy start") {
    for (uint64_t seed = 900; seed < 910; ++seed) {
        Instance inst = test::oracle_instance(seed, 5);
        ArcMask mask = eliminate_arcs(inst);
        SolveResult greedy = greedy_construct_result(inst, mask);
        if (!greedy.feasible) continue;
        LnsConfig cfg;
        cfg.seed = seed;
        cfg.iterations = 300;
        SolveResult lns = solve_lns(inst, mask, cfg);
        REQUIRE(lns.feasible);
        CHECK(lns.objective.total <= greedy.objective.total + 1e-9);
        CHECK(check_solution(inst, lns.solution, &mask).empty());
    }
}

TEST_CASE("greedy acceptance works too") {
    Instance inst = test::table4();
    ArcMask mask = eliminate_arcs(inst);
    LnsConfig cfg;
    cfg.accept = LnsConfig::Accept::Greedy;
    cfg.iterations = 300;
    cfg.seed = 7;
    SolveResult res = solve_lns(inst, mask, cfg);
    REQUIRE(res.feasible);
    CHECK(check_solution(inst, res.solution, &mask).empty());
}

TEST_CASE("on oracle-sized inputs the heuristic usually lands on the optimum") {
    Instance inst = test::oracle_instance(7001, 5, 2);
    ArcMask mask = eliminate_arcs(inst);
    SolveResult oracle = brute_force(inst, mask);
    REQUIRE(oracle.feasible);
    int hits = 0;
    const int runs = 100;
    for (int i = 0; i < runs; ++i) {
        LnsConfig cfg;
        cfg.seed = 10000 + static_cast<uint64_t>(i);
        cfg.iterations = 10000;
        SolveResult lns = solve_lns(inst, mask, cfg);
        if (lns.feasible && lns.objective.total <= oracle.objective.total + 1e-6) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("full-charging solves work end to end") {
    Instance inst = test::table4();
    ArcMask mask = eliminate_arcs(inst);
    SolveResult part = solve_exact(inst, mask, 300.0, ChargePolicy::Partial);
    SolveResult full = solve_exact(inst, mask, 300.0, ChargePolicy::Full);
    REQUIRE(part.feasible);
    REQUIRE(full.feasible);
    CHECK(part.proven_optimal);
    CHECK(full.proven_optimal);
    CHECK(part.objective.total <= full.objective.total + 1e-9);

    // The chain network only works with a partial top-up.
    Instance chain = test::tight_bell();
    ArcMask cmask = eliminate_arcs(chain);
    SolveResult cp = solve_exact(chain, cmask, 60.0, ChargePolicy::Partial);
    SolveResult cf = solve_exact(chain, cmask, 60.0, ChargePolicy::Full);
    CHECK(cp.feasible);
    CHECK(cp.proven_optimal);
    CHECK_FALSE(cf.feasible);
}
