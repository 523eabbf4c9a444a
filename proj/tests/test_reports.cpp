#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esbrp/generator.hpp"
#include "esbrp/instance_io.hpp"
#include "esbrp/reports.hpp"
#include "helpers.hpp"

using namespace esbrp;

TEST_CASE("generation is reproducible and valid") {
    GenSpec spec;
    spec.stops = 5;
    spec.seed = 7;
    spec.charger_sites = 1;
    spec.copies_per_site = 2;
    Instance a = gen_instance(spec);
    Instance b = gen_instance(spec);
    CHECK(serialize(a) == serialize(b));
    CHECK(validate(a).ok());

    spec.seed = 8;
    Instance c = gen_instance(spec);
    CHECK(serialize(a) != serialize(c));
}

TEST_CASE("charger copies share their site") {
    GenSpec spec;
    spec.stops = 6;
    spec.seed = 3;
    spec.charger_sites = 2;
    spec.copies_per_site = 2;
    Instance inst = gen_instance(spec);
    REQUIRE(inst.charger_idx.size() == 4);
    const Node& a = inst.nodes[inst.charger_idx[0]];
    const Node& b = inst.nodes[inst.charger_idx[1]];
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(inst.dist.at(inst.charger_idx[0], inst.charger_idx[1]) == 0.0);
    CHECK(validate(inst).ok()); // zero distance between copies is legal
}

TEST_CASE("sub-instances stay solvable oracle pieces") {
    GenSpec spec;
    spec.stops = 10;
    spec.seed = 11;
    spec.charger_sites = 1;
    spec.copies_per_site = 2;
    Instance big = gen_instance(spec);
    Instance small = sub_instance(big, {2, 5, 9});
    CHECK(small.stop_idx.size() == 3);
    CHECK(validate(small).ok());
    SolveResult oracle = brute_force(small, eliminate_arcs(small));
    SolveResult fast = solve_exact(small, eliminate_arcs(small));
    REQUIRE(oracle.feasible == fast.feasible);
    if (oracle.feasible) CHECK(std::abs(oracle.objective.total - fast.objective.total) < 1e-9);
}

TEST_CASE("a single-size sweep equals a plain solve") {
    Instance inst = test::table4();
    SolveOptions opts;
    opts.time_limit = 120;
    SweepReport rep = sweep_battery(inst, {75.0}, SolverChoice::Exact, opts);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].status == "optimal");

    Instance sized = inst;
    sized.bus_catalog = {bus_type_for_battery(inst, 75.0)};
    sized.fleet_mode = FleetMode::Homogeneous;
    sized.finalize();
    SolveResult direct = solve_exact(sized, eliminate_arcs(sized), 120);
    CHECK(rep.rows[0].total == doctest::Approx(direct.objective.total).epsilon(1e-12));
}

TEST_CASE("a size below the longest mandatory hop turns in an infeasible row") {
    Instance inst = test::one_stop(); // hops of 10 units, no chargers
    SweepReport rep = sweep_battery(inst, {5.0, 75.0}, SolverChoice::Exact);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].status == "infeasible");
    CHECK(rep.rows[1].status == "optimal");
    std::string csv = rep.csv();
    CHECK(csv.find("infeasible") != std::string::npos);
}

TEST_CASE("unknown battery sizes synthesize a type with the stock pricing rule") {
    Instance inst = test::table4();
    BusType bt = bus_type_for_battery(inst, 80.0);
    CHECK(bt.battery == 80.0);
    CHECK(bt.capital == fleet_capital_cost(300000.0, 80.0, 700.0));
    CHECK(bt.time_cost > 1.75);
    CHECK(bt.time_cost < 2.00);
}

TEST_CASE("an unconstrained ride-time cap matches the plain solve") {
    Instance inst = test::table4();
    SolveOptions opts;
    opts.time_limit = 300;
    SweepReport rep = sweep_mrt(inst, {10.0, 1e7}, SolverChoice::Exact, opts);
    REQUIRE(rep.rows.size() == 2);
    SolveResult plain = solve_exact(inst, eliminate_arcs(inst), 300);
    CHECK(rep.rows[1].total == doctest::Approx(plain.objective.total).epsilon(1e-12));
    // Stop 3 sits 46 units out, so no ride under 10 seconds can deliver it.
    CHECK(rep.rows[0].status == "infeasible");
}

TEST_CASE("charging comparison on a chargerless network shows zero savings") {
    Instance inst = test::one_stop();
    SweepReport rep = compare_charging(inst, SolverChoice::Exact, {}, {75.0});
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].status == "optimal");
    CHECK(rep.rows[0].full_status == "optimal");
    CHECK(rep.rows[0].savings == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("full-infeasible rows are called out") {
    Instance inst = test::tight_bell();
    SweepReport rep = compare_charging(inst, SolverChoice::Exact, {}, {75.0});
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].status == "optimal");
    CHECK(rep.rows[0].full_status == "infeasible");
    CHECK(rep.rows[0].note.find("full charging infeasible") != std::string::npos);
    CHECK(rep.csv().find("full charging infeasible") != std::string::npos);
}

TEST_CASE("report rows regenerate byte for byte") {
    Instance inst = test::table4();
    SolveOptions opts;
    opts.seed = 5;
    opts.iterations = 500;
    SweepReport a = sweep_battery(inst, {60.0, 75.0}, SolverChoice::Lns, opts);
    SweepReport b = sweep_battery(inst, {60.0, 75.0}, SolverChoice::Lns, opts);
    CHECK(a.csv() == b.csv());

    // A row regenerates alone from its recorded seed.
    SolveOptions row1;
    row1.seed = a.rows[1].seed;
    row1.iterations = 500;
    SweepReport solo = sweep_battery(inst, {75.0}, SolverChoice::Lns, row1);
    CHECK(solo.rows[0].total == doctest::Approx(a.rows[1].total).epsilon(1e-12));
}
