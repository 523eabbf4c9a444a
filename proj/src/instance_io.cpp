#include "esbrp/instance_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace esbrp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError(where + ": unknown field '" + it.key() + "'");
}

const json& field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

double num(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
    return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string str(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

Matrix parse_matrix(const json& rows, int n, const std::string& where) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
        throw ParseError(where + ": expected " + std::to_string(n) + " rows");
    Matrix m(n);
    for (int i = 0; i < n; ++i) {
        const json& row = rows[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ParseError(where + " row " + std::to_string(i) + ": expected " + std::to_string(n) + " entries");
        for (int j = 0; j < n; ++j) {
            const json& v = row[static_cast<size_t>(j)];
            if (!v.is_number()) throw ParseError(where + ": non-numeric entry");
            m.at(i, j) = v.get<double>();
        }
    }
    return m;
}

} // namespace

Matrix euclidean_matrix(const std::vector<Node>& nodes) {
    int n = static_cast<int>(nodes.size());
    Matrix m(n);
    for (int i = 0; i < n; ++i) {
        if (!nodes[static_cast<size_t>(i)].has_coords())
            throw SchemaError("node " + std::to_string(nodes[static_cast<size_t>(i)].id) +
                              ": coordinates required when dist is omitted");
        for (int j = 0; j < n; ++j)
            m.at(i, j) = std::hypot(nodes[static_cast<size_t>(i)].x - nodes[static_cast<size_t>(j)].x,
                                    nodes[static_cast<size_t>(i)].y - nodes[static_cast<size_t>(j)].y);
    }
    return m;
}

Instance load_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level: expected an object");
    reject_unknown(doc,
                   {"format_version", "description", "fleet_mode", "nodes", "dist", "time", "bus_types", "params"},
                   "top level");

    int version = integer(doc, "format_version", "top level");
    if (version != 1) throw ParseError("format_version: only version 1 is supported");

    Instance inst;
    if (doc.contains("description")) {
        if (!doc["description"].is_string()) throw ParseError("description: expected a string");
        inst.description = doc["description"].get<std::string>();
    }

    std::string mode = str(doc, "fleet_mode", "top level");
    if (mode == "homogeneous")
        inst.fleet_mode = FleetMode::Homogeneous;
    else if (mode == "heterogeneous")
        inst.fleet_mode = FleetMode::Heterogeneous;
    else
        throw ParseError("fleet_mode: expected 'homogeneous' or 'heterogeneous'");

    const json& nodes = field(doc, "nodes", "top level");
    if (!nodes.is_array() || nodes.empty()) throw ParseError("nodes: expected a non-empty array");
    int counter = 0;
    for (const json& jn : nodes) {
        std::string where = "nodes[" + std::to_string(counter++) + "]";
        if (!jn.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(jn, {"id", "kind", "x", "y", "demand", "service_time", "earliest", "latest"}, where);
        Node nd;
        nd.id = integer(jn, "id", where);
        nd.kind = node_kind_from_string(str(jn, "kind", where));
        if (jn.contains("x") != jn.contains("y")) throw ParseError(where + ": x and y must come together");
        if (jn.contains("x")) {
            nd.x = jn["x"].get<double>();
            nd.y = jn["y"].get<double>();
        }
        nd.demand = integer(jn, "demand", where);
        nd.service_time = num(jn, "service_time", where);
        nd.earliest = num(jn, "earliest", where);
        nd.latest = num(jn, "latest", where);
        inst.nodes.push_back(nd);
    }
    int n = inst.size();

    const json& types = field(doc, "bus_types", "top level");
    if (!types.is_array() || types.empty()) throw ParseError("bus_types: expected a non-empty array");
    counter = 0;
    for (const json& jt : types) {
        std::string where = "bus_types[" + std::to_string(counter++) + "]";
        if (!jt.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(jt, {"battery", "capacity", "capital", "time_cost", "consumption", "count"}, where);
        BusType bt;
        bt.battery = num(jt, "battery", where);
        bt.capacity = integer(jt, "capacity", where);
        bt.capital = num(jt, "capital", where);
        bt.time_cost = num(jt, "time_cost", where);
        bt.consumption = num(jt, "consumption", where);
        bt.count = integer(jt, "count", where);
        inst.bus_catalog.push_back(bt);
    }

    const json& jp = field(doc, "params", "top level");
    if (!jp.is_object()) throw ParseError("params: expected an object");
    reject_unknown(jp,
                   {"recharge_rate", "enroute_charge_cost", "depot_charge_cost", "speed", "max_ride_time",
                    "bell_earliest", "bell_latest", "services_per_year", "bus_depreciation_rate",
                    "battery_depreciation_rate", "useful_life_years", "battery_price_per_kwh",
                    "use_raw_fleet_cost"},
                   "params");
    GlobalParams& p = inst.params;
    p.recharge_rate = num(jp, "recharge_rate", "params");
    p.enroute_charge_cost = num(jp, "enroute_charge_cost", "params");
    p.depot_charge_cost = num(jp, "depot_charge_cost", "params");
    p.speed = num(jp, "speed", "params");
    p.max_ride_time = num(jp, "max_ride_time", "params");
    p.bell_earliest = num(jp, "bell_earliest", "params");
    p.bell_latest = num(jp, "bell_latest", "params");
    p.services_per_year = integer(jp, "services_per_year", "params");
    p.bus_depreciation_rate = num(jp, "bus_depreciation_rate", "params");
    p.battery_depreciation_rate = num(jp, "battery_depreciation_rate", "params");
    p.useful_life_years = integer(jp, "useful_life_years", "params");
    p.battery_price_per_kwh = num(jp, "battery_price_per_kwh", "params");
    if (jp.contains("use_raw_fleet_cost")) {
        if (!jp["use_raw_fleet_cost"].is_boolean()) throw ParseError("params.use_raw_fleet_cost: expected a boolean");
        p.use_raw_fleet_cost = jp["use_raw_fleet_cost"].get<bool>();
    }

    if (doc.contains("dist"))
        inst.dist = parse_matrix(doc["dist"], n, "dist");
    else
        inst.dist = euclidean_matrix(inst.nodes);
    if (doc.contains("time")) inst.time = parse_matrix(doc["time"], n, "time");

    inst.finalize();
    ValidationReport rep = validate(inst);
    if (!rep.ok()) throw SchemaError("invalid instance:\n" + rep.str());
    return inst;
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_instance(buf.str());
}

std::string serialize(const Instance& inst) {
    ordered_json doc;
    doc["format_version"] = 1;
    if (!inst.description.empty()) doc["description"] = inst.description;
    doc["fleet_mode"] = inst.fleet_mode == FleetMode::Homogeneous ? "homogeneous" : "heterogeneous";
    doc["nodes"] = ordered_json::array();
    for (const Node& nd : inst.nodes) {
        ordered_json jn;
        jn["id"] = nd.id;
        jn["kind"] = to_string(nd.kind);
        if (nd.has_coords()) {
            jn["x"] = nd.x;
            jn["y"] = nd.y;
        }
        jn["demand"] = nd.demand;
        jn["service_time"] = nd.service_time;
        jn["earliest"] = nd.earliest;
        jn["latest"] = nd.latest;
        doc["nodes"].push_back(jn);
    }
    auto matrix_rows = [](const Matrix& m) {
        ordered_json rows = ordered_json::array();
        for (int i = 0; i < m.n; ++i) {
            ordered_json row = ordered_json::array();
            for (int j = 0; j < m.n; ++j) row.push_back(m.at(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    doc["dist"] = matrix_rows(inst.dist);
    doc["time"] = matrix_rows(inst.time);
    doc["bus_types"] = ordered_json::array();
    for (const BusType& bt : inst.bus_catalog) {
        ordered_json jt;
        jt["battery"] = bt.battery;
        jt["capacity"] = bt.capacity;
        jt["capital"] = bt.capital;
        jt["time_cost"] = bt.time_cost;
        jt["consumption"] = bt.consumption;
        jt["count"] = bt.count;
        doc["bus_types"].push_back(jt);
    }
    const GlobalParams& p = inst.params;
    ordered_json jp;
    jp["recharge_rate"] = p.recharge_rate;
    jp["enroute_charge_cost"] = p.enroute_charge_cost;
    jp["depot_charge_cost"] = p.depot_charge_cost;
    jp["speed"] = p.speed;
    jp["max_ride_time"] = p.max_ride_time;
    jp["bell_earliest"] = p.bell_earliest;
    jp["bell_latest"] = p.bell_latest;
    jp["services_per_year"] = p.services_per_year;
    jp["bus_depreciation_rate"] = p.bus_depreciation_rate;
    jp["battery_depreciation_rate"] = p.battery_depreciation_rate;
    jp["useful_life_years"] = p.useful_life_years;
    jp["battery_price_per_kwh"] = p.battery_price_per_kwh;
    jp["use_raw_fleet_cost"] = p.use_raw_fleet_cost;
    doc["params"] = jp;
    return doc.dump(2) + "\n";
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << serialize(inst);
}

} // namespace esbrp
