#pragma once

#include "esbrp/exact_solver.hpp"

namespace esbrp {

struct LnsConfig {
    uint64_t seed = 1;
    int iterations = 10000;
    double destroy_fraction = 0.3; // share of stops removed per iteration

    // Relative weights of the destroy operators.
    double w_random_removal = 1.0;
    double w_worst_removal = 1.0;
    double w_route_removal = 0.5;

    enum class Accept { Greedy, SimulatedAnnealing };
    Accept accept = Accept::SimulatedAnnealing;
    double sa_t0_fraction = 0.02; // T0 as a share of the starting objective
    double sa_cooling = 0.999;
};

// Earliest-deadline construction: stops insert at their cheapest feasible
// position, buses open on demand, chargers slot in once an insertion runs the
// battery dry. Throws no exceptions; an unplaceable stop yields an
// infeasible-start result.
SolveResult greedy_construct_result(const Instance& inst, const ArcMask& mask,
                                    ChargePolicy policy = ChargePolicy::Partial);
Solution greedy_construct(const Instance& inst, const ArcMask& mask,
                          ChargePolicy policy = ChargePolicy::Partial); // throws on failure

// Destroy-and-repair search on top of the greedy start. Deterministic for a
// fixed (instance, mask, config); proven_optimal is always false.
SolveResult solve_lns(const Instance& inst, const ArcMask& mask, const LnsConfig& cfg,
                      ChargePolicy policy = ChargePolicy::Partial);

} // namespace esbrp
