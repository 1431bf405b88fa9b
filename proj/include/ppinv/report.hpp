#pragma once

#include "ppinv/moments.hpp"
#include "ppinv/pointprocess.hpp"
#include "ppinv/transforms.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace ppinv {

using json = nlohmann::ordered_json;

inline constexpr const char* report_schema_version = "1";

// Everything needed to reproduce a run byte for byte.  No timestamps: reports
// with identical configs must be identical files.
inline json provenance(std::uint64_t seed, long samples, const intensity_measure& m,
                       int workers) {
    json j;
    j["schema_version"] = report_schema_version;
    j["rng"] = rng_algorithm_id;
    j["seed"] = seed;
    j["samples"] = samples;
    j["measure"] = m.name();
    j["quadrature"] = m.scheme().id();
    j["quadrature_nodes"] = m.nodes().size();
    j["total_mass"] = m.total_mass();
    j["workers"] = workers;
    return j;
}

inline json to_json(const moment_estimate& e) {
    json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n_samples"] = e.n_samples;
    j["seed"] = e.seed;
    return j;
}

inline json to_json(const identity_report& r) {
    json j;
    j["identity"] = r.identity;
    j["process"] = r.process;
    j["lhs"] = to_json(r.lhs);
    j["rhs"] = to_json(r.rhs);
    j["diff"] = to_json(r.diff);
    j["z_score"] = r.z_score;
    j["threshold"] = r.threshold;
    j["exact_path"] = r.exact_path;
    j["verdict"] = r.pass ? "pass" : "fail";
    json terms = json::array();
    for (const auto& t : r.terms) {
        json tj;
        tj["label"] = t.label;
        tj["value"] = to_json(t.value);
        terms.push_back(tj);
    }
    j["terms"] = terms;
    return j;
}

// Debug serialization of hull data.
inline json to_json(const hull_data& h) {
    json j;
    j["degenerate"] = h.degenerate;
    j["area"] = h.area;
    json verts = json::array();
    for (const auto& v : h.polygon.vertices) verts.push_back({v.x(), v.y()});
    j["extreme_points"] = verts;
    return j;
}

inline void write_report(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open report file: " + path);
    out << j.dump(2) << "\n";
}

} // namespace ppinv
