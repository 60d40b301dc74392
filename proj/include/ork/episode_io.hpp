#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ork/common.hpp"
#include "ork/excitation.hpp"

namespace ork::sim {

inline constexpr const char* kEpisodeHeader = "t,x,y,yaw,v,delta,v_cmd,delta_cmd,gx,gy,kappa";

inline void save_episode_csv(const EpisodeLog& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("episode: cannot open for writing: " + path);
    os << kEpisodeHeader << ",truncated=" << (log.truncated ? 1 : 0) << ",seed=" << log.seed << '\n';
    for (const EpisodeRow& r : log.rows) {
        os << fmt_double(r.t) << ',' << fmt_double(r.x) << ',' << fmt_double(r.y) << ','
           << fmt_double(r.yaw) << ',' << fmt_double(r.v) << ',' << fmt_double(r.delta) << ','
           << fmt_double(r.v_cmd) << ',' << fmt_double(r.delta_cmd) << ',' << fmt_double(r.gx)
           << ',' << fmt_double(r.gy) << ',' << fmt_double(r.kappa) << '\n';
    }
    if (!os) throw IoError("episode: write failed: " + path);
}

inline EpisodeLog load_episode_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("episode: cannot open: " + path);
    std::string header;
    if (!std::getline(is, header) || header.rfind(kEpisodeHeader, 0) != 0)
        throw IoError("episode: bad header in: " + path);

    EpisodeLog log;
    auto tagpos = header.find("truncated=");
    if (tagpos != std::string::npos) log.truncated = header[tagpos + 10] == '1';
    tagpos = header.find("seed=");
    if (tagpos != std::string::npos)
        log.seed = std::strtoull(header.c_str() + tagpos + 5, nullptr, 10);

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        EpisodeRow r{};
        double* fields[11] = {&r.t,  &r.x,     &r.y,         &r.yaw, &r.v,  &r.delta,
                              &r.v_cmd, &r.delta_cmd, &r.gx,  &r.gy, &r.kappa};
        const char* p = line.c_str();
        char* end = nullptr;
        for (int i = 0; i < 11; ++i) {
            *fields[i] = std::strtod(p, &end);
            if (p == end) throw IoError("episode: malformed row in: " + path);
            p = (*end == ',') ? end + 1 : end;
        }
        log.rows.push_back(r);
    }
    return log;
}

}  // namespace ork::sim
