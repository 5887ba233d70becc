#pragma once

#include <json.hpp>

#include "levykit/presets.hpp"

namespace levykit {

// ---------------------------------------------------------------------------
// Model declaration schema (JSON):
//
// {
//   "dim": 2,
//   "drift": [0.0, 0.0],
//   "measure": {
//     "variant": "isotropic_stable",        alpha, c
//             | "discretized_stable",       gamma, upsilon, k_min, k_max
//             | "radial_density",           family:"power", c, exponent, one_sided
//             | "tabulated_atoms",          atoms: [{location:[..], weight: w}]
//   }
// }
//
// Parse errors name the offending key.
// ---------------------------------------------------------------------------

using json = nlohmann::json;

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing required key", path + "." + key);
    return *it;
}

inline double require_num(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) throw ConfigError("expected a number", path + "." + key);
    return v.get<double>();
}

}  // namespace detail

inline LevyTriplet triplet_from_json(const json& j, const std::string& path = "model") {
    if (!j.is_object()) throw ConfigError("model must be an object", path);
    int dim = static_cast<int>(detail::require_num(j, "dim", path));
    const json& jd = detail::require(j, "drift", path);
    if (!jd.is_array() || static_cast<int>(jd.size()) != dim)
        throw ConfigError("drift must be an array of length dim", path + ".drift");
    Vec drift(dim);
    for (int i = 0; i < dim; ++i) {
        if (!jd[i].is_number()) throw ConfigError("drift entries must be numbers", path + ".drift");
        drift[i] = jd[i].get<double>();
    }
    const json& jm = detail::require(j, "measure", path);
    const std::string mpath = path + ".measure";
    std::string variant = detail::require(jm, "variant", mpath).get<std::string>();
    try {
        if (variant == "isotropic_stable") {
            double alpha = detail::require_num(jm, "alpha", mpath);
            double c = detail::require_num(jm, "c", mpath);
            return LevyTriplet(dim, drift, LevyMeasure(dim, IsotropicStable{alpha, c}));
        }
        if (variant == "discretized_stable") {
            DiscretizedStable d;
            d.gamma = detail::require_num(jm, "gamma", mpath);
            d.upsilon = detail::require_num(jm, "upsilon", mpath);
            d.k_min = jm.value("k_min", -64);
            d.k_max = jm.value("k_max", 64);
            return LevyTriplet(dim, drift, LevyMeasure(dim, d));
        }
        if (variant == "radial_density") {
            std::string family = detail::require(jm, "family", mpath).get<std::string>();
            if (family != "power")
                throw ConfigError("unsupported radial_density family", mpath + ".family");
            RadialProfile rp;
            rp.family = family;
            rp.par_c = detail::require_num(jm, "c", mpath);
            rp.par_p = detail::require_num(jm, "exponent", mpath);
            rp.one_sided = jm.value("one_sided", false);
            double c = rp.par_c, p = rp.par_p;
            rp.m = [c, p](double r) { return c * std::pow(r, -p); };
            return LevyTriplet(dim, drift, LevyMeasure(dim, rp));
        }
        if (variant == "tabulated_atoms") {
            const json& ja = detail::require(jm, "atoms", mpath);
            if (!ja.is_array() || ja.empty())
                throw ConfigError("atoms must be a non-empty array", mpath + ".atoms");
            TabulatedAtoms ta;
            for (std::size_t i = 0; i < ja.size(); ++i) {
                std::string apath = mpath + ".atoms[" + std::to_string(i) + "]";
                const json& loc = detail::require(ja[i], "location", apath);
                if (!loc.is_array() || static_cast<int>(loc.size()) != dim)
                    throw ConfigError("location must be an array of length dim",
                                      apath + ".location");
                Vec y(dim);
                for (int d = 0; d < dim; ++d) y[d] = loc[d].get<double>();
                double w = detail::require_num(ja[i], "weight", apath);
                ta.atoms.push_back({y, w});
            }
            return LevyTriplet(dim, drift, LevyMeasure(dim, ta));
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), mpath);
    }
    throw ConfigError("unknown measure variant '" + variant + "'", mpath + ".variant");
}

inline json triplet_to_json(const LevyTriplet& tr) {
    json j;
    j["dim"] = tr.dim;
    json drift = json::array();
    for (int i = 0; i < tr.dim; ++i) drift.push_back(tr.drift[i]);
    j["drift"] = drift;
    json m;
    switch (tr.measure.kind()) {
        case MeasureKind::IsotropicStable: {
            m["variant"] = "isotropic_stable";
            m["alpha"] = tr.measure.stable().alpha;
            m["c"] = tr.measure.stable().c;
            break;
        }
        case MeasureKind::DiscretizedStable: {
            const auto& d = tr.measure.shells_spec();
            m["variant"] = "discretized_stable";
            m["gamma"] = d.gamma;
            m["upsilon"] = d.upsilon;
            m["k_min"] = d.k_min;
            m["k_max"] = d.k_max;
            break;
        }
        case MeasureKind::RadialProfile: {
            const auto& rp = tr.measure.radial_profile();
            if (rp.family != "power")
                throw InvalidArgument("triplet_to_json: only power profiles serialise");
            m["variant"] = "radial_density";
            m["family"] = rp.family;
            m["c"] = rp.par_c;
            m["exponent"] = rp.par_p;
            m["one_sided"] = rp.one_sided;
            break;
        }
        case MeasureKind::TabulatedAtoms: {
            m["variant"] = "tabulated_atoms";
            json atoms = json::array();
            for (const auto& [y, w] : tr.measure.atoms().atoms) {
                json a;
                json loc = json::array();
                for (int d = 0; d < tr.dim; ++d) loc.push_back(y[d]);
                a["location"] = loc;
                a["weight"] = w;
                atoms.push_back(a);
            }
            m["atoms"] = atoms;
            break;
        }
    }
    j["measure"] = m;
    return j;
}

// ---------------------------------------------------------------------------
// Run configuration shared by the CLI commands.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string model_name;             // preset name, or empty for inline
    std::optional<json> inline_model;
    std::vector<double> t_values;       // positive, sorted
    std::size_t grid_n = 0;             // 0: auto
    double grid_extent = 0;             // 0: auto
    std::string out_dir;                // empty: stdout
    int threads = 0;
    double tol_quad = 1e-10;
    double tol_scale = 1e-10;
    double eps_decay = 1e-14;
    double eps_tail = 1e-10;
    double noise_floor = 1e-9;

    LevyTriplet resolve_triplet() const {
        if (inline_model) return triplet_from_json(*inline_model);
        if (model_name.empty()) throw ConfigError("no model given", "model");
        return preset(model_name).triplet;
    }

    void validate() const {
        for (double t : t_values)
            if (!(t > 0)) throw ConfigError("t values must be positive", "t");
        for (std::size_t i = 0; i + 1 < t_values.size(); ++i)
            if (!(t_values[i] < t_values[i + 1]))
                throw ConfigError("t values must be strictly increasing", "t");
        if (!(tol_quad > 0) || !(eps_decay > 0) || !(eps_tail > 0))
            throw ConfigError("tolerances must be positive", "tolerances");
    }
};

inline RunConfig run_config_from_json(const json& j) {
    RunConfig rc;
    if (j.contains("model")) {
        if (j["model"].is_string())
            rc.model_name = j["model"].get<std::string>();
        else
            rc.inline_model = j["model"];
    }
    if (j.contains("t")) {
        const json& jt = j["t"];
        if (jt.is_array()) {
            for (const auto& v : jt) rc.t_values.push_back(v.get<double>());
        } else if (jt.is_object()) {
            double lo = detail::require_num(jt, "lo", "t");
            double hi = detail::require_num(jt, "hi", "t");
            int count = static_cast<int>(detail::require_num(jt, "count", "t"));
            if (count < 1) throw ConfigError("count must be >= 1", "t.count");
            for (int i = 0; i < count; ++i)
                rc.t_values.push_back(
                    count == 1 ? lo : lo * std::pow(hi / lo, i / static_cast<double>(count - 1)));
        } else {
            throw ConfigError("t must be an array or {lo,hi,count}", "t");
        }
    }
    if (j.contains("grid")) {
        rc.grid_n = j["grid"].value("n", 0);
        rc.grid_extent = j["grid"].value("extent", 0.0);
    }
    rc.out_dir = j.value("out", "");
    rc.threads = j.value("threads", 0);
    if (j.contains("tolerances")) {
        const json& jt = j["tolerances"];
        rc.tol_quad = jt.value("quad", rc.tol_quad);
        rc.tol_scale = jt.value("scale", rc.tol_scale);
        rc.eps_decay = jt.value("decay", rc.eps_decay);
        rc.eps_tail = jt.value("poisson_tail", rc.eps_tail);
        rc.noise_floor = jt.value("noise_floor", rc.noise_floor);
    }
    rc.validate();
    return rc;
}

}  // namespace levykit
