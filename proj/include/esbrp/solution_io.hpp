#pragma once

#include "esbrp/evaluator.hpp"

#include <string>

namespace esbrp {

// Solution documents: routes as node-id sequences plus per-charger amounts.
Solution load_solution(const std::string& text);
Solution load_solution_file(const std::string& path);
std::string serialize(const Solution& sol);
void save_solution(const Solution& sol, const std::string& path);

// Trace dump for a whole solution, one CSV block per route.
std::string traces_csv(const Instance& inst, const Solution& sol, ChargePolicy policy);

} // namespace esbrp
