#include "esbrp/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <sstream>

namespace esbrp {

namespace {

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string join_charges(const std::vector<double>& charges) {
    std::string out;
    for (size_t i = 0; i < charges.size(); ++i) {
        if (i) out += ";";
        out += fmt6(charges[i]);
    }
    return out;
}

int env_threads() {
    const char* v = std::getenv("ESBRP_THREADS");
    if (!v) return 1;
    int n = std::atoi(v);
    return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0, n), possibly across threads; results land by index.
template <typename Fn> void run_rows(int n, Fn fn) {
    int threads = std::min(env_threads(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        futs.push_back(std::async(std::launch::async, [&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        }));
    for (auto& f : futs) f.get();
}

struct SolveSummary {
    std::string status = "infeasible";
    bool usable = false;
    SolveResult result;
};

SolveSummary run_solver(const Instance& inst, SolverChoice solver, const SolveOptions& opts,
                        uint64_t row_seed, ChargePolicy policy) {
    SolveSummary sm;
    try {
        ArcMask mask = eliminate_arcs(inst);
        if (solver == SolverChoice::Exact) {
            sm.result = solve_exact(inst, mask, opts.time_limit, policy);
        } else {
            LnsConfig cfg;
            cfg.seed = row_seed;
            cfg.iterations = opts.iterations;
            sm.result = solve_lns(inst, mask, cfg, policy);
        }
    } catch (const std::exception&) {
        return sm;
    }
    if (!sm.result.feasible) return sm;
    sm.usable = true;
    sm.status = sm.result.proven_optimal ? "optimal" : "feasible";
    return sm;
}

// Distance, travel time, and charging actually used by a solution.
void fill_metrics(const Instance& inst, const SolveResult& res, SweepRow& row, ChargePolicy policy) {
    row.total = res.objective.total;
    row.fleet_cost = res.objective.fleet_cost;
    row.travel_cost = res.objective.travel_time_cost;
    row.charge_cost = res.objective.charging_cost;
    row.fleet_count = static_cast<int>(res.solution.routes.size());
    for (const Route& r : res.solution.routes) {
        SimulateOutcome sim = simulate_route(inst, r, policy);
        if (const RouteTrace* tr = std::get_if<RouteTrace>(&sim)) {
            row.distance += tr->total_distance;
            row.travel_time += tr->total_travel_time;
            for (const auto& v : tr->visits)
                if (v.charge > kFeasEps) {
                    ++row.chargers_used;
                    row.charges.push_back(v.charge);
                }
        }
    }
}

Instance with_battery(const Instance& inst, double kwh) {
    Instance out = inst;
    out.bus_catalog = {bus_type_for_battery(inst, kwh)};
    out.fleet_mode = FleetMode::Homogeneous;
    out.finalize();
    return out;
}

} // namespace

BusType bus_type_for_battery(const Instance& inst, double kwh) {
    for (const BusType& bt : inst.bus_catalog)
        if (bt.battery == kwh) return bt;
    auto stock = default_bus_catalog();
    for (const BusType& bt : stock)
        if (bt.battery == kwh) return bt;

    // Synthesize between the neighboring stock rows.
    std::sort(stock.begin(), stock.end(),
              [](const BusType& a, const BusType& b) { return a.battery < b.battery; });
    const BusType* lo = &stock.front();
    const BusType* hi = &stock.back();
    for (const BusType& bt : stock) {
        if (bt.battery <= kwh) lo = &bt;
        if (bt.battery >= kwh) {
            hi = &bt;
            break;
        }
    }
    double f = hi->battery == lo->battery ? 0.0 : (kwh - lo->battery) / (hi->battery - lo->battery);
    f = std::clamp(f, 0.0, 1.0);
    BusType bt;
    bt.battery = kwh;
    bt.capacity = static_cast<int>(std::lround(lo->capacity + f * (hi->capacity - lo->capacity)));
    bt.capital = fleet_capital_cost(300000.0, kwh, inst.params.battery_price_per_kwh);
    bt.time_cost = lo->time_cost + f * (hi->time_cost - lo->time_cost);
    bt.consumption = lo->consumption + f * (hi->consumption - lo->consumption);
    bt.count = std::max(1, static_cast<int>(inst.stop_idx.size()));
    return bt;
}

SweepReport sweep_battery(const Instance& inst, const std::vector<double>& sizes, SolverChoice solver,
                          const SolveOptions& opts) {
    std::vector<double> sorted = sizes;
    std::sort(sorted.begin(), sorted.end());
    SweepReport rep;
    rep.kind = "battery";
    rep.rows.resize(sorted.size());
    run_rows(static_cast<int>(sorted.size()), [&](int i) {
        SweepRow& row = rep.rows[static_cast<size_t>(i)];
        row.swept = sorted[static_cast<size_t>(i)];
        row.seed = opts.seed + static_cast<uint64_t>(i);
        Instance sized = with_battery(inst, row.swept);
        SolveSummary sm = run_solver(sized, solver, opts, row.seed, ChargePolicy::Partial);
        row.status = sm.status;
        if (sm.usable) fill_metrics(sized, sm.result, row, ChargePolicy::Partial);
    });
    return rep;
}

SweepReport sweep_mrt(const Instance& inst, const std::vector<double>& mrts, SolverChoice solver,
                      const SolveOptions& opts) {
    std::vector<double> sorted = mrts;
    std::sort(sorted.begin(), sorted.end());
    SweepReport rep;
    rep.kind = "mrt";
    rep.rows.resize(sorted.size());
    run_rows(static_cast<int>(sorted.size()), [&](int i) {
        SweepRow& row = rep.rows[static_cast<size_t>(i)];
        row.swept = sorted[static_cast<size_t>(i)];
        row.seed = opts.seed + static_cast<uint64_t>(i);
        Instance capped = inst;
        capped.params.max_ride_time = row.swept;
        capped.finalize();
        SolveSummary sm = run_solver(capped, solver, opts, row.seed, ChargePolicy::Partial);
        row.status = sm.status;
        if (sm.usable) fill_metrics(capped, sm.result, row, ChargePolicy::Partial);
    });
    return rep;
}

SweepReport compare_charging(const Instance& inst, SolverChoice solver, const SolveOptions& opts,
                             std::vector<double> sizes) {
    if (sizes.empty())
        for (const BusType& bt : default_bus_catalog()) sizes.push_back(bt.battery);
    std::sort(sizes.begin(), sizes.end());
    SweepReport rep;
    rep.kind = "charging";
    rep.rows.resize(sizes.size());
    run_rows(static_cast<int>(sizes.size()), [&](int i) {
        SweepRow& row = rep.rows[static_cast<size_t>(i)];
        row.swept = sizes[static_cast<size_t>(i)];
        row.seed = opts.seed + static_cast<uint64_t>(i);
        Instance sized = with_battery(inst, row.swept);
        SolveSummary part = run_solver(sized, solver, opts, row.seed, ChargePolicy::Partial);
        SolveSummary full = run_solver(sized, solver, opts, row.seed, ChargePolicy::Full);
        row.status = part.status;
        row.full_status = full.status;
        if (part.usable) {
            fill_metrics(sized, part.result, row, ChargePolicy::Partial);
            const BusType& bt = sized.bus_catalog[0];
            for (const Route& r : part.result.solution.routes) {
                SimulateOutcome sim = simulate_route(sized, r, ChargePolicy::Partial);
                if (const RouteTrace* tr = std::get_if<RouteTrace>(&sim))
                    for (const auto& v : tr->visits)
                        if (v.charge > kFeasEps)
                            row.flexibility_seconds += charge_flexibility(
                                sized.params.recharge_rate, bt.battery, v.soc_in, v.charge);
            }
        }
        if (full.usable) row.full_total = full.result.objective.total;
        if (part.usable && full.usable) {
            row.savings = row.full_total - row.total;
        } else if (part.usable && !full.usable) {
            row.note = "full charging infeasible, partial feasible";
        }
    });
    return rep;
}

std::string SweepReport::csv() const {
    std::ostringstream os;
    if (kind == "charging") {
        os << "battery_kwh,seed,partial_status,partial_total,full_status,full_total,savings,"
              "flexibility_seconds,fleet_count,chargers_used,partial_charges,note\n";
        for (const SweepRow& r : rows) {
            os << fmt6(r.swept) << "," << r.seed << "," << r.status << ","
               << (r.status != "infeasible" ? fmt6(r.total) : "") << "," << r.full_status << ","
               << (r.full_status != "infeasible" ? fmt6(r.full_total) : "") << ","
               << (r.status != "infeasible" && r.full_status != "infeasible" ? fmt6(r.savings) : "")
               << "," << fmt6(r.flexibility_seconds) << "," << r.fleet_count << "," << r.chargers_used
               << "," << join_charges(r.charges) << "," << r.note << "\n";
        }
        return os.str();
    }
    os << (kind == "battery" ? "battery_kwh" : "mrt_seconds")
       << ",seed,status,total,fleet_cost,travel_cost,charge_cost,fleet_count,distance,travel_time,"
          "chargers_used,charges\n";
    for (const SweepRow& r : rows) {
        os << fmt6(r.swept) << "," << r.seed << "," << r.status << ",";
        if (r.status != "infeasible")
            os << fmt6(r.total) << "," << fmt6(r.fleet_cost) << "," << fmt6(r.travel_cost) << ","
               << fmt6(r.charge_cost) << "," << r.fleet_count << "," << fmt6(r.distance) << ","
               << fmt6(r.travel_time) << "," << r.chargers_used << "," << join_charges(r.charges);
        else
            os << ",,,,,,,";
        os << "\n";
    }
    return os.str();
}

} // namespace esbrp
