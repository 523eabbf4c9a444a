#pragma once

#include "esbrp/evaluator.hpp"
#include "esbrp/instance.hpp"
#include "esbrp/preprocess.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace esbrp {

struct ModelVar {
    std::string name;
    double lower = 0;
    double upper = 0;
    bool binary = false;
};

struct ModelRow {
    std::string name;
    std::string family; // constraint family, see build_model
    std::vector<std::pair<int, double>> terms;
    char sense = 'L'; // 'L' <=, 'E' =, 'G' >=
    double rhs = 0;
};

// Solver-agnostic MILP. One vehicle slot per available bus (types expand into
// count-many slots, capped at the stop count); variable names carry the node
// tokens and the slot index, e.g. x_D_7_0, t_ch11_2, p_ch11_2. With a single
// slot the suffix is dropped.
struct Model {
    std::vector<ModelVar> vars;
    std::vector<ModelRow> rows;
    std::vector<std::pair<int, double>> objective; // minimize

    struct Meta {
        std::string instance_hash;
        FleetMode fleet_mode = FleetMode::Heterogeneous;
        ChargePolicy policy = ChargePolicy::Partial;
        double big_m = 0;
        std::vector<int> slot_type; // catalog type per vehicle slot
        bool slot_suffix = true;
        std::vector<int> node_ids; // instance node ids, model order
        int depot_id = -1;
        int school_id = -1;
    } meta;

    int var_index(const std::string& name) const;
    std::optional<int> find_var(const std::string& name) const;

    std::unordered_map<std::string, int> index;
    void rebuild_index();
};

struct BrokenFlowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Compiles the routing model over the masked arc set. Stops that no active
// bus type can reach make the model infeasible and are rejected up front.
Model build_model(const Instance& inst, const ArcMask& mask, FleetMode fleet, ChargePolicy policy);

// Portable LP text (Minimize / Subject To / Bounds / Binaries / End). Output
// is byte-deterministic for a given model.
std::string emit_lp(const Model& model);

struct ModelStats {
    std::map<std::string, int> vars_by_kind;   // x, t, v, y, z, p
    std::map<std::string, int> rows_by_family;
    int n_vars = 0;
    int n_rows = 0;
    int n_binary = 0;
    double big_m = 0;
    std::string csv() const;
};

ModelStats model_stats(const Model& model);

using Assignment = std::map<std::string, double>;

// Follows x = 1 arcs from the depot per slot and rebuilds the routes; charge
// amounts come from the p variables. Throws BrokenFlowError when the arcs do
// not form depot-to-school paths covering every stop. Binary values must be
// integral within 1e-6.
Solution extract_solution(const Model& model, const Assignment& assignment);

// Inverse of extract_solution: the assignment a solution induces (traced
// times and battery levels, zeros elsewhere). Routes that fail simulation are
// encoded with their earliest-arrival schedule so the violated row shows.
Assignment solution_assignment(const Model& model, const Instance& inst, const Solution& sol);

// Objective value at an assignment; missing variables count as zero.
double eval_objective(const Model& model, const Assignment& assignment);

// First violated bound or row at the given tolerance, if any.
std::optional<std::string> check_assignment(const Model& model, const Assignment& assignment,
                                            double tol = 1e-6);

// FNV-1a hash of the canonical instance document, hex-encoded.
std::string instance_hash(const Instance& inst);

} // namespace esbrp
