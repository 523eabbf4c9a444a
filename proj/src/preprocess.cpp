#include "esbrp/preprocess.hpp"

#include <deque>
#include <sstream>

namespace esbrp {

std::string EliminationStats::csv() const {
    std::ostringstream os;
    os << "type,rule,removed_count\n";
    for (size_t t = 0; t < removed_by_rule.size(); ++t)
        for (int r = 1; r <= 6; ++r)
            os << t << "," << r << "," << removed_by_rule[t][static_cast<size_t>(r)] << "\n";
    return os.str();
}

ArcMask structural_mask(const Instance& inst) {
    int n = inst.size();
    int types = static_cast<int>(inst.bus_catalog.size());
    ArcMask mask(n, types, false);
    for (int t = 0; t < types; ++t) {
        for (int i = 0; i < n; ++i) {
            const Node& from = inst.nodes[static_cast<size_t>(i)];
            if (from.kind == NodeKind::School) continue;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const Node& to = inst.nodes[static_cast<size_t>(j)];
                if (to.kind == NodeKind::Depot) continue;
                mask.set(t, i, j, true);
            }
        }
    }
    return mask;
}

ArcMask eliminate_arcs(const Instance& inst, EliminationStats* stats) {
    int n = inst.size();
    int types = static_cast<int>(inst.bus_catalog.size());
    ArcMask mask = structural_mask(inst);
    if (stats) stats->removed_by_rule.assign(static_cast<size_t>(types), {});

    auto kill = [&](int t, int i, int j, int rule) {
        if (!mask.allowed(t, i, j)) return;
        mask.set(t, i, j, false);
        if (stats) ++stats->removed_by_rule[static_cast<size_t>(t)][static_cast<size_t>(rule)];
    };

    for (int t = 0; t < types; ++t) {
        const BusType& bt = inst.bus_catalog[static_cast<size_t>(t)];
        for (int i = 0; i < n; ++i) {
            const Node& from = inst.nodes[static_cast<size_t>(i)];
            for (int j = 0; j < n; ++j) {
                if (i == j || !mask.allowed(t, i, j)) continue;
                const Node& to = inst.nodes[static_cast<size_t>(j)];

                // 1. A single hop may never exceed the battery range.
                if (bt.consumption * inst.dist.at(i, j) > bt.battery) {
                    kill(t, i, j, 1);
                    continue;
                }
                // 2. Even the earliest possible departure from i misses j.
                if (from.earliest + from.service_time + inst.time.at(i, j) > to.latest) {
                    kill(t, i, j, 2);
                    continue;
                }
                // 3. Buses leave the depot fully charged.
                if (from.kind == NodeKind::Depot && to.kind == NodeKind::Charger) {
                    kill(t, i, j, 3);
                    continue;
                }
                // 4. After charging the bus serves stops, it does not head in
                // to the school.
                if (from.kind == NodeKind::Charger && to.kind == NodeKind::School) {
                    kill(t, i, j, 4);
                    continue;
                }
                // 5. Charger to charger trips carry no students and no need.
                if (from.kind == NodeKind::Charger && to.kind == NodeKind::Charger) {
                    kill(t, i, j, 5);
                    continue;
                }
                // 6. Depot straight to school.
                if (from.kind == NodeKind::Depot && to.kind == NodeKind::School) kill(t, i, j, 6);
            }
        }
    }
    return mask;
}

bool ConnectivityReport::ok() const {
    for (const auto& tr : per_type)
        if (!tr.stranded.empty()) return false;
    return true;
}

std::string ConnectivityReport::str() const {
    std::ostringstream os;
    for (const auto& tr : per_type) {
        os << "type " << tr.type << ": ";
        if (tr.stranded.empty()) {
            os << "all stops connected\n";
        } else {
            os << "stranded stops:";
            for (int id : tr.stranded) os << " " << id;
            os << "\n";
        }
    }
    return os.str();
}

ConnectivityReport connectivity_report(const Instance& inst, const ArcMask& mask) {
    int n = inst.size();
    ConnectivityReport rep;
    for (int t = 0; t < mask.types; ++t) {
        auto reachable = [&](int source, bool forward) {
            std::vector<char> seen(static_cast<size_t>(n), 0);
            std::deque<int> queue{source};
            seen[static_cast<size_t>(source)] = 1;
            while (!queue.empty()) {
                int u = queue.front();
                queue.pop_front();
                for (int w = 0; w < n; ++w) {
                    bool arc = forward ? mask.allowed(t, u, w) : mask.allowed(t, w, u);
                    if (arc && !seen[static_cast<size_t>(w)]) {
                        seen[static_cast<size_t>(w)] = 1;
                        queue.push_back(w);
                    }
                }
            }
            return seen;
        };
        auto from_depot = reachable(inst.depot, true);
        auto to_school = reachable(inst.school, false);
        ConnectivityReport::TypeReport tr;
        tr.type = t;
        for (int s : inst.stop_idx)
            if (!from_depot[static_cast<size_t>(s)] || !to_school[static_cast<size_t>(s)])
                tr.stranded.push_back(inst.nodes[static_cast<size_t>(s)].id);
        rep.per_type.push_back(std::move(tr));
    }
    return rep;
}

} // namespace esbrp
