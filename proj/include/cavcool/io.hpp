#pragma once

// JSON parameter files (trap-unit and SI variants) and oracle-report
// serialization.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "cavcool/oracle.hpp"
#include "cavcool/params.hpp"

namespace cavcool {

using nlohmann::json;

inline json params_to_json(const SystemParams& p) {
    return json{{"delta", p.delta},   {"delta_c", p.delta_c}, {"g", p.g},
                {"omega", p.omega},   {"gamma", p.gamma},     {"kappa", p.kappa},
                {"eta", p.eta},       {"phi_l", p.phi_l},     {"phi_c", p.phi_c},
                {"alpha", p.alpha}};
}

inline SystemParams params_from_json(const json& j) {
    if (!j.is_object()) throw std::domain_error("parameter file: expected a JSON object");
    const bool si = j.contains("units") && j.at("units").get<std::string>() == "si";
    if (si) {
        PhysicalInputs in;
        static const char* keys[] = {"units",   "mass",  "wavenumber", "trap_freq",
                                     "delta",   "delta_c", "g",        "omega",
                                     "gamma",   "kappa", "phi_l",      "phi_c",
                                     "alpha"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw std::domain_error("parameter file: unknown key '" + it.key() + "'");
        }
        in.mass = j.at("mass").get<double>();
        in.wavenumber = j.at("wavenumber").get<double>();
        in.trap_freq = j.at("trap_freq").get<double>();
        in.delta = j.at("delta").get<double>();
        in.delta_c = j.at("delta_c").get<double>();
        in.g = j.at("g").get<double>();
        in.omega = j.at("omega").get<double>();
        in.gamma = j.at("gamma").get<double>();
        in.kappa = j.at("kappa").get<double>();
        in.phi_l = j.value("phi_l", 1.0);
        in.phi_c = j.value("phi_c", 1.0);
        in.alpha = j.value("alpha", 0.4);
        return normalize(in);
    }
    SystemParams p;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "units") {
            if (it.value().get<std::string>() != "trap")
                throw std::domain_error("parameter file: units must be 'trap' or 'si'");
        } else if (k == "delta") p.delta = it.value().get<double>();
        else if (k == "delta_c") p.delta_c = it.value().get<double>();
        else if (k == "g") p.g = it.value().get<double>();
        else if (k == "omega") p.omega = it.value().get<double>();
        else if (k == "gamma") p.gamma = it.value().get<double>();
        else if (k == "kappa") p.kappa = it.value().get<double>();
        else if (k == "eta") p.eta = it.value().get<double>();
        else if (k == "phi_l") p.phi_l = it.value().get<double>();
        else if (k == "phi_c") p.phi_c = it.value().get<double>();
        else if (k == "alpha") p.alpha = it.value().get<double>();
        else throw std::domain_error("parameter file: unknown key '" + k + "'");
    }
    return p;
}

inline SystemParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("cannot open parameter file: " + path);
    json j;
    in >> j;
    return params_from_json(j);
}

// "key=value" override, CLI --set style.
inline void apply_override(SystemParams& p, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::domain_error("--set expects key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    double value = 0.0;
    try {
        std::size_t pos = 0;
        value = std::stod(kv.substr(eq + 1), &pos);
        if (pos != kv.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::domain_error("--set: cannot parse value in '" + kv + "'");
    }
    if (key == "delta") p.delta = value;
    else if (key == "delta_c") p.delta_c = value;
    else if (key == "g") p.g = value;
    else if (key == "omega") p.omega = value;
    else if (key == "gamma") p.gamma = value;
    else if (key == "kappa") p.kappa = value;
    else if (key == "eta") p.eta = value;
    else if (key == "phi_l") p.phi_l = value;
    else if (key == "phi_c") p.phi_c = value;
    else if (key == "alpha") p.alpha = value;
    else throw std::domain_error("--set: unknown parameter '" + key + "'");
}

inline json oracle_report_to_json(const OracleReport& r) {
    return json{{"method", r.method},
                {"a_plus_numeric", r.a_plus_numeric},
                {"a_minus_numeric", r.a_minus_numeric},
                {"a_plus_analytic", r.a_plus_analytic},
                {"a_minus_analytic", r.a_minus_analytic},
                {"rel_err_plus", r.rel_err_plus},
                {"rel_err_minus", r.rel_err_minus},
                {"cavity_dim", r.cavity_dim},
                {"motion_dim", r.motion_dim},
                {"converged", r.converged},
                {"weak_drive_warning", r.weak_drive_warning},
                {"omega", r.omega},
                {"w_numeric", r.w_numeric},
                {"nbar_inf_numeric", r.nbar_inf_numeric},
                {"fit_residual", r.fit_residual}};
}

}  // namespace cavcool
