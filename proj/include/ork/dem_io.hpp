#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ork/common.hpp"
#include "ork/grid.hpp"

namespace ork::terrain {

// DEM files come in two flavors sharing the same header fields:
//   binary: "DEM1 rows cols resolution origin_x origin_y\n" then row-major
//           little-endian 64-bit floats;
//   csv:    "dem_csv,rows,cols,resolution,origin_x,origin_y\n" then one line
//           of comma-separated heights per row.
// The reader sniffs the magic; the writer emits binary unless asked otherwise.

namespace detail {

inline void write_le_double(std::ostream& os, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    os.write(b, 8);
}

inline double read_le_double(std::istream& is) {
    char b[8];
    is.read(b, 8);
    if (!is) throw IoError("dem: truncated binary payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline void save_dem_binary(const HeightGrid& g, const std::string& path) {
    g.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("dem: cannot open for writing: " + path);
    os << "DEM1 " << g.rows << ' ' << g.cols << ' ' << fmt_double(g.resolution) << ' '
       << fmt_double(g.origin_x) << ' ' << fmt_double(g.origin_y) << '\n';
    for (double h : g.heights) detail::write_le_double(os, h);
    if (!os) throw IoError("dem: write failed: " + path);
}

inline void save_dem_csv(const HeightGrid& g, const std::string& path) {
    g.validate();
    std::ofstream os(path);
    if (!os) throw IoError("dem: cannot open for writing: " + path);
    os << "dem_csv," << g.rows << ',' << g.cols << ',' << fmt_double(g.resolution) << ','
       << fmt_double(g.origin_x) << ',' << fmt_double(g.origin_y) << '\n';
    for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
            if (j) os << ',';
            os << fmt_double(g.at(i, j));
        }
        os << '\n';
    }
    if (!os) throw IoError("dem: write failed: " + path);
}

inline HeightGrid load_dem(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("dem: cannot open: " + path);
    std::string header;
    if (!std::getline(is, header)) throw IoError("dem: empty file: " + path);

    HeightGrid g;
    if (header.rfind("DEM1 ", 0) == 0) {
        std::istringstream hs(header.substr(5));
        if (!(hs >> g.rows >> g.cols >> g.resolution >> g.origin_x >> g.origin_y))
            throw IoError("dem: malformed binary header: " + path);
        g.heights.resize(static_cast<std::size_t>(g.rows) * g.cols);
        for (double& h : g.heights) h = detail::read_le_double(is);
    } else if (header.rfind("dem_csv,", 0) == 0) {
        std::istringstream hs(header.substr(8));
        char c;
        if (!(hs >> g.rows >> c >> g.cols >> c >> g.resolution >> c >> g.origin_x >> c >>
              g.origin_y))
            throw IoError("dem: malformed csv header: " + path);
        g.heights.reserve(static_cast<std::size_t>(g.rows) * g.cols);
        std::string line;
        for (int i = 0; i < g.rows; ++i) {
            if (!std::getline(is, line)) throw IoError("dem: missing csv row: " + path);
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) g.heights.push_back(std::strtod(cell.c_str(), nullptr));
        }
    } else {
        throw IoError("dem: unrecognized magic in: " + path);
    }
    g.validate();
    return g;
}

}  // namespace ork::terrain
