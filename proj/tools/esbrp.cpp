// Command-line front end for the ESBRP solver suite.
//
// Exit codes: 0 success, 1 infeasible, 2 input error.

#include "esbrp/exact_solver.hpp"
#include "esbrp/generator.hpp"
#include "esbrp/instance_io.hpp"
#include "esbrp/lns_solver.hpp"
#include "esbrp/model.hpp"
#include "esbrp/reports.hpp"
#include "esbrp/solution_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace esbrp;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

ChargePolicy policy_of(const std::string& s) {
    if (s == "partial") return ChargePolicy::Partial;
    if (s == "full") return ChargePolicy::Full;
    throw CLI::ValidationError("--charge must be 'partial' or 'full'");
}

FleetMode fleet_of(const std::string& s, const Instance& inst) {
    if (s == "ho") return FleetMode::Homogeneous;
    if (s == "he") return FleetMode::Heterogeneous;
    if (s == "instance") return inst.fleet_mode;
    throw CLI::ValidationError("--fleet must be 'ho', 'he' or 'instance'");
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Electric school bus routing: exact and heuristic solvers, "
                 "model export, and sensitivity reports"};
    app.require_subcommand(1);

    std::string instance_path, solution_path, out_path, out_stats, out_trace, out_log;
    std::string fleet = "instance", charge = "partial";
    double time_limit = 600.0;
    uint64_t seed = 1;
    int iterations = 10000;

    // check -------------------------------------------------------------
    auto* c_check = app.add_subcommand("check", "validate an instance and, optionally, a solution");
    c_check->add_option("--instance", instance_path)->required();
    c_check->add_option("--solution", solution_path);

    // preprocess ---------------------------------------------------------
    auto* c_pre = app.add_subcommand("preprocess", "arc elimination counts per bus type and rule");
    c_pre->add_option("--instance", instance_path)->required();
    c_pre->add_option("-o,--out", out_path, "write the CSV here instead of stdout");

    // solve ---------------------------------------------------------------
    auto* c_solve = app.add_subcommand("solve", "solve an instance");
    bool use_exact = false, use_lns = false;
    c_solve->add_option("--instance", instance_path)->required();
    c_solve->add_flag("--exact", use_exact, "prove optimality by branch and bound");
    c_solve->add_flag("--lns", use_lns, "large neighborhood search");
    c_solve->add_option("--fleet", fleet, "ho | he | instance (default: instance)");
    c_solve->add_option("--charge", charge, "partial | full (default: partial)");
    c_solve->add_option("--time-limit", time_limit, "seconds for the exact search");
    c_solve->add_option("--seed", seed, "LNS seed");
    c_solve->add_option("--iters", iterations, "LNS iterations");
    c_solve->add_option("-o,--out", out_path, "solution file (default: solution.json)");
    c_solve->add_option("--costs", out_stats, "cost breakdown CSV");
    c_solve->add_option("--trace", out_trace, "per-visit trace CSV");
    c_solve->add_option("--log", out_log, "search log");

    // emit-lp ---------------------------------------------------------------
    auto* c_lp = app.add_subcommand("emit-lp", "compile the model and write LP text");
    c_lp->add_option("--instance", instance_path)->required();
    c_lp->add_option("--fleet", fleet);
    c_lp->add_option("--charge", charge);
    c_lp->add_option("-o,--out", out_path, "LP file (default: model.lp)");
    c_lp->add_option("--stats", out_stats, "model stats CSV sidecar");

    // sweeps ----------------------------------------------------------------
    std::string sizes_csv = "60,75,90,100,110", mrts_csv, solver_name = "exact";
    auto* c_bat = app.add_subcommand("sweep-battery", "battery-size sensitivity report");
    c_bat->add_option("--instance", instance_path)->required();
    c_bat->add_option("--sizes", sizes_csv, "comma-separated kWh list");
    c_bat->add_option("--solver", solver_name, "exact | lns");
    c_bat->add_option("--time-limit", time_limit);
    c_bat->add_option("--seed", seed);
    c_bat->add_option("--iters", iterations);
    c_bat->add_option("-o,--out", out_path, "report CSV (default: stdout)");

    auto* c_mrt = app.add_subcommand("sweep-mrt", "maximum-ride-time sensitivity report");
    c_mrt->add_option("--instance", instance_path)->required();
    c_mrt->add_option("--mrts", mrts_csv, "comma-separated seconds list")->required();
    c_mrt->add_option("--solver", solver_name);
    c_mrt->add_option("--time-limit", time_limit);
    c_mrt->add_option("--seed", seed);
    c_mrt->add_option("--iters", iterations);
    c_mrt->add_option("-o,--out", out_path);

    auto* c_cmp = app.add_subcommand("compare-charging", "partial vs full charging report");
    c_cmp->add_option("--instance", instance_path)->required();
    c_cmp->add_option("--sizes", sizes_csv);
    c_cmp->add_option("--solver", solver_name);
    c_cmp->add_option("--time-limit", time_limit);
    c_cmp->add_option("--seed", seed);
    c_cmp->add_option("--iters", iterations);
    c_cmp->add_option("-o,--out", out_path);

    // gen ---------------------------------------------------------------------
    GenSpec gen;
    std::string gen_fleet = "ho";
    int gen_types = 1;
    auto* c_gen = app.add_subcommand("gen", "generate a reproducible random instance");
    c_gen->add_option("--stops", gen.stops)->required();
    c_gen->add_option("--seed", gen.seed);
    c_gen->add_option("--charger-sites", gen.charger_sites);
    c_gen->add_option("--copies", gen.copies_per_site);
    c_gen->add_option("--extent", gen.extent);
    c_gen->add_option("--types", gen_types, "how many stock bus types to include");
    c_gen->add_option("--fleet", gen_fleet, "ho | he");
    c_gen->add_option("-o,--out", out_path, "instance file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // ---- check ----
    if (*c_check) {
        Instance inst = load_instance_file(instance_path); // throws on invalid
        if (!solution_path.empty()) {
            Solution sol = load_solution_file(solution_path);
            auto violations = check_solution(inst, sol);
            if (!violations.empty()) {
                for (const auto& v : violations) std::cerr << v.str() << "\n";
                return 1;
            }
        }
        std::cout << "ok\n";
        return 0;
    }

    // ---- preprocess ----
    if (*c_pre) {
        Instance inst = load_instance_file(instance_path);
        EliminationStats stats;
        eliminate_arcs(inst, &stats);
        if (out_path.empty())
            std::cout << stats.csv();
        else
            write_file(out_path, stats.csv());
        return 0;
    }

    // ---- solve ----
    if (*c_solve) {
        if (use_exact == use_lns) throw CLI::ValidationError("pick exactly one of --exact / --lns");
        Instance inst = load_instance_file(instance_path);
        inst.fleet_mode = fleet_of(fleet, inst);
        ChargePolicy pol = policy_of(charge);
        ArcMask mask = eliminate_arcs(inst);
        SolveResult res;
        if (use_exact) {
            res = solve_exact(inst, mask, time_limit, pol);
        } else {
            LnsConfig cfg;
            cfg.seed = seed;
            cfg.iterations = iterations;
            res = solve_lns(inst, mask, cfg, pol);
        }
        if (!res.feasible) {
            std::cerr << "infeasible: " << res.search_log << "\n";
            return 1;
        }
        save_solution(res.solution, out_path.empty() ? "solution.json" : out_path);
        if (!out_stats.empty()) write_file(out_stats, res.objective.csv());
        if (!out_trace.empty()) write_file(out_trace, traces_csv(inst, res.solution, pol));
        if (!out_log.empty())
            write_file(out_log, res.search_log + "nodes=" + std::to_string(res.nodes_explored) +
                                    " status=" + res.status + "\n");
        std::cout << res.status << " total=" << res.objective.total
                  << " buses=" << res.solution.routes.size() << " nodes=" << res.nodes_explored
                  << "\n";
        return 0;
    }

    // ---- emit-lp ----
    if (*c_lp) {
        Instance inst = load_instance_file(instance_path);
        FleetMode fm = fleet_of(fleet, inst);
        ArcMask mask = eliminate_arcs(inst);
        Model model = build_model(inst, mask, fm, policy_of(charge));
        write_file(out_path.empty() ? "model.lp" : out_path, emit_lp(model));
        if (!out_stats.empty()) write_file(out_stats, model_stats(model).csv());
        return 0;
    }

    // ---- sweeps ----
    auto solver_choice = [&]() {
        if (solver_name == "exact") return SolverChoice::Exact;
        if (solver_name == "lns") return SolverChoice::Lns;
        throw CLI::ValidationError("--solver must be 'exact' or 'lns'");
    };
    SolveOptions opts;
    opts.time_limit = time_limit;
    opts.seed = seed;
    opts.iterations = iterations;

    if (*c_bat || *c_mrt || *c_cmp) {
        Instance inst = load_instance_file(instance_path);
        SweepReport rep;
        if (*c_bat)
            rep = sweep_battery(inst, parse_list(sizes_csv), solver_choice(), opts);
        else if (*c_mrt)
            rep = sweep_mrt(inst, parse_list(mrts_csv), solver_choice(), opts);
        else
            rep = compare_charging(inst, solver_choice(), opts, parse_list(sizes_csv));
        if (out_path.empty())
            std::cout << rep.csv();
        else
            write_file(out_path, rep.csv());
        bool any_feasible = false;
        for (const auto& row : rep.rows)
            if (row.status != "infeasible") any_feasible = true;
        return any_feasible ? 0 : 1;
    }

    // ---- gen ----
    if (*c_gen) {
        for (int t = 0; t < gen_types; ++t) gen.catalog_types.push_back(t);
        gen.fleet_mode = gen_fleet == "he" ? FleetMode::Heterogeneous : FleetMode::Homogeneous;
        Instance inst = gen_instance(gen);
        if (out_path.empty())
            std::cout << serialize(inst);
        else
            save_instance(inst, out_path);
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error&) {
        return 2;
    } catch (const esbrp::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const esbrp::SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
