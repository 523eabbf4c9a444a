#include "esbrp/solution_io.hpp"

#include "esbrp/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace esbrp {

using nlohmann::json;
using nlohmann::ordered_json;

Solution load_solution(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level: expected an object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "format_version" && it.key() != "routes")
            throw ParseError("top level: unknown field '" + it.key() + "'");
    if (!doc.contains("format_version") || doc["format_version"] != 1)
        throw ParseError("format_version: only version 1 is supported");
    if (!doc.contains("routes") || !doc["routes"].is_array())
        throw ParseError("routes: expected an array");

    Solution sol;
    int counter = 0;
    for (const json& jr : doc["routes"]) {
        std::string where = "routes[" + std::to_string(counter++) + "]";
        if (!jr.is_object()) throw ParseError(where + ": expected an object");
        for (auto it = jr.begin(); it != jr.end(); ++it)
            if (it.key() != "bus_type" && it.key() != "visits" && it.key() != "charges")
                throw ParseError(where + ": unknown field '" + it.key() + "'");
        Route route;
        if (!jr.contains("bus_type") || !jr["bus_type"].is_number_integer())
            throw ParseError(where + ".bus_type: expected an integer");
        route.bus_type = jr["bus_type"].get<int>();
        if (!jr.contains("visits") || !jr["visits"].is_array())
            throw ParseError(where + ".visits: expected an array");
        for (const json& v : jr["visits"]) {
            if (!v.is_number_integer()) throw ParseError(where + ".visits: expected node ids");
            route.visits.push_back(v.get<int>());
        }
        if (jr.contains("charges")) {
            if (!jr["charges"].is_array()) throw ParseError(where + ".charges: expected an array");
            for (const json& jc : jr["charges"]) {
                if (!jc.is_object() || !jc.contains("node") || !jc.contains("kwh"))
                    throw ParseError(where + ".charges: expected {node, kwh} pairs");
                for (auto it = jc.begin(); it != jc.end(); ++it)
                    if (it.key() != "node" && it.key() != "kwh")
                        throw ParseError(where + ".charges: unknown field '" + it.key() + "'");
                route.charge_amounts[jc["node"].get<int>()] = jc["kwh"].get<double>();
            }
        }
        sol.routes.push_back(std::move(route));
    }
    return sol;
}

Solution load_solution_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_solution(buf.str());
}

std::string serialize(const Solution& sol) {
    ordered_json doc;
    doc["format_version"] = 1;
    doc["routes"] = ordered_json::array();
    for (const Route& route : sol.routes) {
        ordered_json jr;
        jr["bus_type"] = route.bus_type;
        jr["visits"] = route.visits;
        ordered_json charges = ordered_json::array();
        for (const auto& [node, kwh] : route.charge_amounts) {
            ordered_json jc;
            jc["node"] = node;
            jc["kwh"] = kwh;
            charges.push_back(jc);
        }
        jr["charges"] = charges;
        doc["routes"].push_back(jr);
    }
    return doc.dump(2) + "\n";
}

void save_solution(const Solution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << serialize(sol);
}

std::string traces_csv(const Instance& inst, const Solution& sol, ChargePolicy policy) {
    std::ostringstream os;
    os << "route,visit,t,load,soc_in,soc_out\n";
    char buf[200];
    for (size_t r = 0; r < sol.routes.size(); ++r) {
        SimulateOutcome sim = simulate_route(inst, sol.routes[r], policy);
        if (const Violation* v = std::get_if<Violation>(&sim)) {
            os << r << ",VIOLATION: " << v->str() << ",,,,\n";
            continue;
        }
        for (const auto& vis : std::get<RouteTrace>(sim).visits) {
            std::snprintf(buf, sizeof(buf), "%zu,%d,%.6f,%d,%.6f,%.6f\n", r, vis.node, vis.arrival,
                          vis.load, vis.soc_in, vis.soc_out);
            os << buf;
        }
    }
    return os.str();
}

} // namespace esbrp
