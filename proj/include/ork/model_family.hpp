#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ork/common.hpp"
#include "ork/curvature.hpp"
#include "ork/edmd.hpp"
#include "ork/polar.hpp"

namespace ork::koopman {

struct ModelFamily {
    FamilyGeometry geometry;
    std::vector<KoopmanModel> models;

    bool complete() const {
        return static_cast<int>(models.size()) == geometry.q;
    }

    const KoopmanModel& select(double kappa) const {
        if (!complete()) throw ConfigError("ModelFamily: incomplete family");
        return models[geometry.assign_bin(kappa)];
    }
};

inline LiftedState predict(const KoopmanModel& m, const LiftedState& z, const Eigen::Vector2d& u,
                           const Eigen::Vector2d& g) {
    return m.A * z + m.B * u + m.Bg * g;
}

inline Eigen::Vector2d project(const KoopmanModel& m, const LiftedState& z) { return m.C * z; }

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw IoError(std::string("model file: bad row count for ") + what);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw IoError(std::string("model file: bad column count for ") + what);
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace detail

inline nlohmann::ordered_json model_family_to_json(const ModelFamily& family) {
    if (!family.complete()) throw ConfigError("model file: incomplete family");
    nlohmann::ordered_json doc;
    doc["kappa_max"] = family.geometry.kappa_max;
    doc["q"] = family.geometry.q;
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (const KoopmanModel& m : family.models) {
        nlohmann::ordered_json b;
        b["range"] = {m.kappa_lo, m.kappa_hi};
        b["A"] = detail::matrix_to_json(m.A);
        b["B"] = detail::matrix_to_json(m.B);
        b["Bg"] = detail::matrix_to_json(m.Bg);
        b["C"] = detail::matrix_to_json(m.C);
        bins.push_back(std::move(b));
    }
    doc["bins"] = std::move(bins);
    return doc;
}

inline void save_model_family(const ModelFamily& family, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("model file: cannot open for writing: " + path);
    os << model_family_to_json(family).dump(2) << '\n';
    if (!os) throw IoError("model file: write failed: " + path);
}

inline ModelFamily load_model_family(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("model file: cannot open: " + path);
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model file: parse error: ") + e.what());
    }

    ModelFamily family;
    family.geometry.kappa_max = doc.at("kappa_max").get<double>();
    family.geometry.q = doc.at("q").get<int>();
    family.geometry.validate();
    const auto& bins = doc.at("bins");
    if (!bins.is_array() || static_cast<int>(bins.size()) != family.geometry.q)
        throw IoError("model file: bin count does not match q");
    int idx = 0;
    for (const auto& b : bins) {
        KoopmanModel m;
        m.bin_index = idx;
        const auto& range = b.at("range");
        if (!range.is_array() || range.size() != 2) throw IoError("model file: bad bin range");
        m.kappa_lo = range[0].get<double>();
        m.kappa_hi = range[1].get<double>();
        m.A = detail::matrix_from_json(b.at("A"), 7, 7, "A");
        m.B = detail::matrix_from_json(b.at("B"), 7, 2, "B");
        m.Bg = detail::matrix_from_json(b.at("Bg"), 7, 2, "Bg");
        m.C = detail::matrix_from_json(b.at("C"), 2, 7, "C");
        if (!m.finite()) throw IoError("model file: non-finite matrix entries");
        const double expect_lo = family.geometry.edge(idx);
        const double expect_hi = family.geometry.edge(idx + 1);
        if (std::abs(m.kappa_lo - expect_lo) > 1e-9 || std::abs(m.kappa_hi - expect_hi) > 1e-9)
            throw IoError("model file: bin ranges do not partition [-kappa_max, kappa_max]");
        family.models.push_back(std::move(m));
        ++idx;
    }
    return family;
}

}  // namespace ork::koopman
