#include "esbrp/generator.hpp"

#include "esbrp/instance_io.hpp"
#include "esbrp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace esbrp {

namespace {

// Plain Lloyd iterations, deterministically seeded with the first k stops.
std::vector<std::pair<double, double>> centroids(const std::vector<Node>& stops, int k) {
    std::vector<std::pair<double, double>> centers;
    for (int i = 0; i < k; ++i)
        centers.emplace_back(stops[static_cast<size_t>(i % stops.size())].x,
                             stops[static_cast<size_t>(i % stops.size())].y);
    for (int round = 0; round < 12; ++round) {
        std::vector<double> sx(static_cast<size_t>(k), 0), sy(static_cast<size_t>(k), 0);
        std::vector<int> cnt(static_cast<size_t>(k), 0);
        for (const Node& s : stops) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = std::hypot(s.x - centers[static_cast<size_t>(c)].first,
                                      s.y - centers[static_cast<size_t>(c)].second);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            sx[static_cast<size_t>(best)] += s.x;
            sy[static_cast<size_t>(best)] += s.y;
            ++cnt[static_cast<size_t>(best)];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[static_cast<size_t>(c)] > 0)
                centers[static_cast<size_t>(c)] = {sx[static_cast<size_t>(c)] / cnt[static_cast<size_t>(c)],
                                                   sy[static_cast<size_t>(c)] / cnt[static_cast<size_t>(c)]};
    }
    return centers;
}

} // namespace

Instance gen_instance(const GenSpec& spec) {
    if (spec.stops < 1) throw std::invalid_argument("gen_instance needs at least one stop");
    Rng rng(spec.seed);
    Instance inst;
    inst.fleet_mode = spec.fleet_mode;

    GlobalParams& p = inst.params;
    p.speed = spec.speed;
    p.max_ride_time = spec.max_ride_time;
    p.bell_earliest = spec.bell_earliest;
    p.bell_latest = spec.bell_latest;

    auto catalog = default_bus_catalog();
    std::vector<int> rows = spec.catalog_types.empty() ? std::vector<int>{0} : spec.catalog_types;
    for (int r : rows) {
        BusType bt = catalog.at(static_cast<size_t>(r));
        bt.count = spec.stops; // never the binding constraint
        inst.bus_catalog.push_back(bt);
    }

    // Depot in one corner, school in the opposite one, stops in between.
    Node depot;
    depot.id = 0;
    depot.kind = NodeKind::Depot;
    depot.x = 0.0;
    depot.y = 0.0;
    depot.earliest = 0.0;
    depot.latest = spec.bell_latest;
    inst.nodes.push_back(depot);

    std::vector<Node> stops;
    for (int i = 0; i < spec.stops; ++i) {
        Node nd;
        nd.id = i + 1;
        nd.kind = NodeKind::Stop;
        nd.x = rng.uniform(0.0, spec.extent);
        nd.y = rng.uniform(0.0, spec.extent);
        nd.demand = rng.between(spec.demand_min, spec.demand_max);
        nd.service_time = spec.service_time;
        stops.push_back(nd);
    }

    Node school;
    school.id = spec.stops + spec.charger_sites * spec.copies_per_site + 1;
    school.kind = NodeKind::School;
    school.x = spec.extent;
    school.y = spec.extent;
    school.earliest = spec.bell_earliest;
    school.latest = spec.bell_latest;

    // Windows laid out backwards from the bell: a bus serving the stop last
    // can still make the school on time.
    for (Node& nd : stops) {
        double to_school = std::hypot(nd.x - school.x, nd.y - school.y) / spec.speed;
        double latest = spec.bell_latest - to_school - nd.service_time;
        latest = std::max(latest, 60.0);
        double earliest = std::max(0.0, latest - spec.window_width);
        nd.earliest = earliest;
        nd.latest = latest;
        inst.nodes.push_back(nd);
    }

    int next_id = spec.stops + 1;
    if (spec.charger_sites > 0 && spec.copies_per_site > 0) {
        auto sites = centroids(stops, spec.charger_sites);
        for (auto& [cx, cy] : sites) {
            cx += spec.charger_pull * (school.x - cx);
            cy += spec.charger_pull * (school.y - cy);
        }
        for (const auto& [cx, cy] : sites) {
            for (int c = 0; c < spec.copies_per_site; ++c) {
                Node ch;
                ch.id = next_id++;
                ch.kind = NodeKind::Charger;
                ch.x = cx;
                ch.y = cy;
                ch.earliest = 0.0;
                ch.latest = spec.bell_latest;
                inst.nodes.push_back(ch);
            }
        }
    } else {
        next_id = spec.stops + 1;
    }
    school.id = next_id;
    inst.nodes.push_back(school);

    inst.dist = euclidean_matrix(inst.nodes);
    inst.finalize();
    return inst;
}

Instance sub_instance(const Instance& inst, const std::vector<int>& stop_ids) {
    Instance out;
    out.bus_catalog = inst.bus_catalog;
    out.params = inst.params;
    out.fleet_mode = inst.fleet_mode;
    out.description = inst.description;

    std::vector<int> keep; // node indices in original order
    for (int i = 0; i < inst.size(); ++i) {
        const Node& nd = inst.nodes[static_cast<size_t>(i)];
        bool take = nd.kind != NodeKind::Stop ||
                    std::find(stop_ids.begin(), stop_ids.end(), nd.id) != stop_ids.end();
        if (take) {
            keep.push_back(i);
            out.nodes.push_back(nd);
        }
    }
    int n = static_cast<int>(keep.size());
    out.dist = Matrix(n);
    out.time = Matrix(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            out.dist.at(a, b) = inst.dist.at(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
            out.time.at(a, b) = inst.time.at(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
        }
    out.finalize();
    return out;
}

} // namespace esbrp
