#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ork/common.hpp"
#include "ork/hybrid_astar.hpp"

namespace ork::planner {

// Plan files: "idx,x,y,heading,edge_cost" rows plus a JSON sidecar carrying
// {mode, w, total_cost, expansions}. Row 0 has no incoming edge (cost 0).

inline void save_plan(const MissionPlan& plan, const std::string& csv_path,
                      const std::string& sidecar_path) {
    std::ofstream os(csv_path);
    if (!os) throw IoError("plan: cannot open for writing: " + csv_path);
    os << "idx,x,y,heading,edge_cost\n";
    for (std::size_t i = 0; i < plan.poses.size(); ++i) {
        const double ec = i == 0 ? 0.0 : plan.edge_costs[i - 1];
        os << i << ',' << fmt_double(plan.poses[i].x) << ',' << fmt_double(plan.poses[i].y) << ','
           << fmt_double(plan.poses[i].heading) << ',' << fmt_double(ec) << '\n';
    }
    if (!os) throw IoError("plan: write failed: " + csv_path);

    nlohmann::ordered_json side;
    side["mode"] = cost_mode_name(plan.mode);
    side["w"] = plan.w;
    side["total_cost"] = plan.total_cost;
    side["expansions"] = plan.expansions;
    std::ofstream js(sidecar_path);
    if (!js) throw IoError("plan: cannot open for writing: " + sidecar_path);
    js << side.dump(2) << '\n';
}

inline MissionPlan load_plan(const std::string& csv_path, const std::string& sidecar_path = {}) {
    std::ifstream is(csv_path);
    if (!is) throw IoError("plan: cannot open: " + csv_path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("idx,x,y,heading,edge_cost", 0) != 0)
        throw IoError("plan: bad header in: " + csv_path);
    MissionPlan plan;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        std::strtol(p, &end, 10);
        if (p == end || *end != ',') throw IoError("plan: malformed row in: " + csv_path);
        p = end + 1;
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            vals[i] = std::strtod(p, &end);
            if (p == end) throw IoError("plan: malformed row in: " + csv_path);
            p = (*end == ',') ? end + 1 : end;
        }
        if (!plan.poses.empty()) plan.edge_costs.push_back(vals[3]);
        plan.poses.push_back({vals[0], vals[1], vals[2]});
    }
    if (!sidecar_path.empty()) {
        std::ifstream js(sidecar_path);
        if (js) {
            nlohmann::json side;
            try {
                js >> side;
                plan.mode = parse_cost_mode(side.value("mode", "DFT"));
                plan.w = side.value("w", 0.0);
                plan.total_cost = side.value("total_cost", 0.0);
                plan.expansions = side.value("expansions", 0L);
            } catch (const nlohmann::json::exception& e) {
                throw IoError(std::string("plan: sidecar parse error: ") + e.what());
            }
        }
    }
    return plan;
}

}  // namespace ork::planner
