#pragma once

#include "esbrp/evaluator.hpp"
#include "esbrp/instance.hpp"
#include "esbrp/preprocess.hpp"

#include <string>
#include <vector>

namespace esbrp {

struct SolveResult {
    Solution solution;
    CostBreakdown objective;
    bool feasible = false;
    bool proven_optimal = false;
    long long nodes_explored = 0;
    double wall_time = 0;     // seconds
    double lower_bound = 0;   // proven bound at termination
    double gap = 0;           // (total - lower_bound) / total, 0 when proven
    std::string status;       // optimal | feasible | infeasible | infeasible-start
    std::string search_log;   // bound trace, one line per incumbent
};

// What the bound needs to know about a partial assignment.
struct SearchNode {
    double committed_cost = 0;     // dispatched fleet + fixed arc travel + closed-route charging
    std::vector<int> unassigned;   // stop node indices still to place
    int open_free_seats = 0;       // seats left on the route under construction, 0 when none
    const ArcMask* mask = nullptr;
};

// Admissible completion bound: committed cost, plus each unplaced stop's
// cheapest allowed entry arc at the cheapest travel rate, plus the fleet cost
// of the extra buses the leftover demand forces.
double lower_bound(const SearchNode& state, const Instance& inst);

// Depth-first branch-and-bound over route construction. Routes grow one at a
// time in earliest-deadline order; charging amounts resolve per completed
// route. Proves optimality unless the time budget runs out, in which case the
// best incumbent and the remaining bound gap are reported.
SolveResult solve_exact(const Instance& inst, const ArcMask& mask, double time_limit_seconds = 600.0,
                        ChargePolicy policy = ChargePolicy::Partial);

// Exhaustive oracle: every partition of the stops into ordered routes, every
// bus-type assignment, every charger-copy placement. Guarded to at most 5
// stops and 2 charger copies.
SolveResult brute_force(const Instance& inst, const ArcMask& mask,
                        ChargePolicy policy = ChargePolicy::Partial);

} // namespace esbrp
