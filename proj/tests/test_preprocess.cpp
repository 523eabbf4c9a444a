#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esbrp/exact_solver.hpp"
#include "esbrp/preprocess.hpp"
#include "helpers.hpp"

using namespace esbrp;

TEST_CASE("hops beyond the battery range disappear") {
    Instance inst = test::one_stop(); // D at 0, stop at 10, school at 20
    inst.bus_catalog[0].battery = 75.0;
    inst.bus_catalog[0].consumption = 1.0;
    inst.dist.at(0, 1) = 80.0; // farther than 75 kWh allows
    inst.finalize();
    ArcMask mask = eliminate_arcs(inst);
    CHECK_FALSE(mask.allowed(0, 0, 1));
    CHECK(mask.allowed(0, 1, 2));
}

TEST_CASE("structural bans: school exits, depot shortcuts, charger pairs") {
    Instance inst = test::table4();
    int ch1 = inst.index_of(11), ch2 = inst.index_of(12);
    ArcMask mask = eliminate_arcs(inst);
    for (int t = 0; t < mask.types; ++t) {
        for (int j = 0; j < inst.size(); ++j) {
            CHECK_FALSE(mask.allowed(t, inst.school, j)); // school is terminal
            CHECK_FALSE(mask.allowed(t, j, inst.depot));  // nothing returns to the depot
            CHECK_FALSE(mask.allowed(t, j, j));           // no self loops
        }
        CHECK_FALSE(mask.allowed(t, inst.depot, inst.school));
        CHECK_FALSE(mask.allowed(t, inst.depot, ch1)); // buses leave fully charged
        CHECK_FALSE(mask.allowed(t, inst.depot, ch2));
        CHECK_FALSE(mask.allowed(t, ch1, inst.school)); // chargers feed stops, not the school
        CHECK_FALSE(mask.allowed(t, ch2, inst.school));
        CHECK_FALSE(mask.allowed(t, ch1, ch2));
        CHECK_FALSE(mask.allowed(t, ch2, ch1));
    }
}

TEST_CASE("surviving arcs are time consistent") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Instance inst = test::oracle_instance(seed, 5, 2);
        ArcMask mask = eliminate_arcs(inst);
        for (int t = 0; t < mask.types; ++t)
            for (int i = 0; i < inst.size(); ++i)
                for (int j = 0; j < inst.size(); ++j)
                    if (mask.allowed(t, i, j)) {
                        const Node& a = inst.nodes[i];
                        const Node& b = inst.nodes[j];
                        CHECK(a.earliest + a.service_time + inst.time.at(i, j) <= b.latest);
                    }
    }
}

TEST_CASE("elimination is deterministic and only removes") {
    Instance inst = test::table4();
    ArcMask once = eliminate_arcs(inst);
    ArcMask twice = eliminate_arcs(inst);
    CHECK(once == twice);
    ArcMask structural = structural_mask(inst);
    for (int t = 0; t < once.types; ++t)
        for (int i = 0; i < inst.size(); ++i)
            for (int j = 0; j < inst.size(); ++j)
                if (once.allowed(t, i, j)) CHECK(structural.allowed(t, i, j));
}

TEST_CASE("removal counts land on the first matching rule") {
    Instance inst = test::table4();
    EliminationStats stats;
    eliminate_arcs(inst, &stats);
    std::string csv = stats.csv();
    CHECK(csv.rfind("type,rule,removed_count", 0) == 0);
    // Five types, six rules each.
    CHECK(stats.removed_by_rule.size() == 5);
    // Rule 5 removes both directions between the two charger copies.
    CHECK(stats.removed_by_rule[0][5] == 2);
    // Rule 6 within this network: depot->school plus the school self-ban is
    // structural; at least the depot->school arc is counted.
    CHECK(stats.removed_by_rule[0][6] >= 1);
}

TEST_CASE("connectivity report flags stranded stops per type") {
    Instance inst = test::one_stop();
    ArcMask mask = eliminate_arcs(inst);
    ConnectivityReport rep = connectivity_report(inst, mask);
    CHECK(rep.ok());

    // Two types: a small battery strands the stop, a large one does not.
    Instance straddle = test::one_stop();
    straddle.fleet_mode = FleetMode::Heterogeneous;
    straddle.bus_catalog.push_back(straddle.bus_catalog[0]);
    straddle.bus_catalog[0].battery = 8.0; // cannot cover the 10-unit hop
    straddle.bus_catalog[1].battery = 75.0;
    straddle.finalize();
    rep = connectivity_report(straddle, eliminate_arcs(straddle));
    REQUIRE(rep.per_type.size() == 2);
    CHECK(rep.per_type[0].stranded == std::vector<int>{1});
    CHECK(rep.per_type[1].stranded.empty());
    CHECK_FALSE(rep.ok());
}

TEST_CASE("masking never cuts the brute-force optimum") {
    int compared = 0;
    for (uint64_t seed = 100; seed < 130; ++seed) {
        Instance inst = test::oracle_instance(seed, 3 + static_cast<int>(seed % 2));
        SolveResult open = brute_force(inst, structural_mask(inst));
        SolveResult masked = brute_force(inst, eliminate_arcs(inst));
        REQUIRE(open.feasible == masked.feasible);
        if (open.feasible) {
            CHECK(std::abs(open.objective.total - masked.objective.total) < 1e-9);
            ++compared;
        }
    }
    CHECK(compared >= 22); // the generator should produce mostly feasible cases
}
