// config.hpp - JSON run configuration
//
//   {"L": 10, "eta": 1.0, "omega0": 100, "tau": 0.1, "T": 1, "delta_s": 1,
//    "delta_e": 1, "steps": "auto", "coupling_prefactor": 0.5,
//    "model": "collective", "snapshots": 201}
//
// Exactly one of "eta" (number) and "eta_matrix" (L rows of [eta_k^(1), eta_k^(2)]).
// Unknown keys are rejected.

#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stirap/errors.hpp"
#include "stirap/model.hpp"

namespace stirap::config {

using json = nlohmann::json;

namespace detail {

inline double number(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
    return d;
}

inline long long integer(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<long long>();
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    static const std::set<std::string> known{"L",       "eta",     "eta_matrix", "omega0",
                                             "tau",     "T",       "delta_s",    "delta_e",
                                             "steps",   "coupling_prefactor",    "model",
                                             "snapshots"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError(key, "unknown key");
    for (const char* key : {"L", "omega0", "tau", "delta_s", "delta_e"})
        if (!j.contains(key)) throw ConfigError(key, "required key missing");

    RunConfig cfg;
    const long long L = detail::integer(j, "L");
    if (L < 1 || L > 100000) throw ConfigError("L", "must be a positive integer");
    cfg.n_spins = static_cast<int>(L);

    cfg.pulse.omega0 = detail::number(j, "omega0");
    if (!(cfg.pulse.omega0 > 0.0)) throw ConfigError("omega0", "must be > 0");
    cfg.pulse.tau = detail::number(j, "tau");
    if (!(cfg.pulse.tau > 0.0)) throw ConfigError("tau", "must be > 0");
    if (j.contains("T")) {
        cfg.pulse.t_window = detail::number(j, "T");
        if (!(cfg.pulse.t_window > 0.0)) throw ConfigError("T", "must be > 0");
    }
    cfg.delta_s = detail::number(j, "delta_s");
    cfg.delta_e = detail::number(j, "delta_e");

    if (j.contains("model")) {
        const json& m = j.at("model");
        if (m == "collective") cfg.model_kind = ModelKind::COLLECTIVE;
        else if (m == "tensor") cfg.model_kind = ModelKind::TENSOR;
        else throw ConfigError("model", "expected \"collective\" or \"tensor\"");
    }

    const bool has_eta = j.contains("eta");
    const bool has_matrix = j.contains("eta_matrix");
    if (has_eta && has_matrix) throw ConfigError("eta_matrix", "eta and eta_matrix are exclusive");
    if (!has_eta && !has_matrix) throw ConfigError("eta", "one of eta or eta_matrix is required");
    if (has_eta) {
        cfg.coupling = detail::number(j, "eta");
    } else {
        const json& m = j.at("eta_matrix");
        if (!m.is_array() || m.size() != static_cast<std::size_t>(cfg.n_spins))
            throw ConfigError("eta_matrix", "expected L rows");
        EtaMatrix rows;
        for (const json& row : m) {
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
                throw ConfigError("eta_matrix", "each row must be [eta_k^(1), eta_k^(2)]");
            rows.push_back({row[0].get<double>(), row[1].get<double>()});
        }
        cfg.coupling = std::move(rows);
    }

    if (j.contains("steps")) {
        const json& s = j.at("steps");
        if (s.is_string()) {
            if (s != "auto") throw ConfigError("steps", "expected \"auto\" or an integer");
        } else if (s.is_number_integer()) {
            const long long n = s.get<long long>();
            if (n < static_cast<long long>(kMinExplicitSteps))
                throw ConfigError("steps", "explicit step count must be >= 1000");
            cfg.steps = static_cast<std::size_t>(n);
        } else {
            throw ConfigError("steps", "expected \"auto\" or an integer");
        }
    }
    if (j.contains("coupling_prefactor"))
        cfg.coupling_prefactor = detail::number(j, "coupling_prefactor");
    if (j.contains("snapshots")) {
        const long long n = detail::integer(j, "snapshots");
        if (n < 0) throw ConfigError("snapshots", "must be >= 0");
        cfg.snapshot_count = static_cast<std::size_t>(n);
    }

    try {
        cfg.validate();
    } catch (const CapacityError& e) {
        throw ConfigError("L", e.what());
    } catch (const InvalidConfiguration& e) {
        throw ConfigError(has_matrix ? "eta_matrix" : "model", e.what());
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

} // namespace stirap::config
