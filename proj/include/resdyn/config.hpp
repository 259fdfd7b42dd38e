// config.hpp: JSON run configuration -> SystemSpec / RegisterSpec and run parameters
//
// Keys: beta, dim, energies, couplings[].{strength, matrix, form_factor.{p, m, scale}},
// register.{n, J, B, B_interval, lambda1, lambda2, g1, g2}, initial_state, times,
// xi, scaling, verify, convention, bohr_tolerance. Matrix entries are numbers or
// [re, im] pairs, rows first.

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/model.hpp"
#include "resdyn/oracle.hpp"
#include "resdyn/register.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace resdyn {

using json = nlohmann::json;

struct RunConfig {
    std::string text; // raw file contents, hashed into the provenance header
    json doc;
    double beta{1.0};
    std::optional<SystemSpec> system;
    std::optional<RegisterSpec> reg;
    std::pair<double, double> b_interval{1.0, 2.0};
    std::optional<Matrix> initial_state;
    std::vector<double> times;
    std::vector<double> eta;
    std::vector<std::size_t> scaling_n{2, 3, 4, 5, 6, 7, 8};
    std::pair<double, double> scaling_interval{1.0, 1.01};
    VerifyConfig verify;
    Convention convention{Convention::Reference};
    double bohr_tolerance{0.0};
};

namespace config_detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
    fail(ErrorCode::ConfigError, where + ": " + what);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

inline cplx entry(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad(where, "expected a number or an [re, im] pair");
}

inline std::vector<double> reals(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array");
    std::vector<double> v;
    for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
    return v;
}

inline Matrix matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) bad(where, "expected a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) bad(where, "matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c)
            m(r, c) = entry(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

inline FormFactor form_factor(const json& j, const std::string& where) {
    FormFactor g;
    if (j.is_null()) return g;
    if (!j.is_object()) bad(where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        if (k == "p") g.radial_exponent = number(v, where + ".p");
        else if (k == "m") {
            if (!v.is_number_integer()) bad(where + ".m", "expected an integer");
            g.decay_exponent = v.get<int>();
        } else if (k == "scale") g.overall_scale = number(v, where + ".scale");
        else bad(where, "unknown key '" + k + "'");
    }
    return g;
}

// {"start", "stop", "count"} or an explicit list
inline std::vector<double> grid(const json& j, const std::string& where) {
    if (j.is_array()) return reals(j, where);
    if (!j.is_object() || !j.contains("stop") || !j.contains("count")) bad(where, "expected a list or {start, stop, count}");
    const double a = j.contains("start") ? number(j["start"], where + ".start") : 0.0;
    const double b = number(j["stop"], where + ".stop");
    if (!j["count"].is_number_integer() || j["count"].get<long>() < 2) bad(where + ".count", "expected an integer >= 2");
    const auto n = j["count"].get<std::size_t>();
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k) v.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
    return v;
}

inline Convention convention(const json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a string");
    const auto s = j.get<std::string>();
    if (s == "reference") return Convention::Reference;
    if (s == "microscopic") return Convention::Microscopic;
    bad(where, "unknown convention '" + s + "'");
}

inline std::pair<double, double> interval(const json& j, const std::string& where) {
    const auto v = reals(j, where);
    if (v.size() != 2 || !(v[1] >= v[0])) bad(where, "expected [lo, hi] with lo <= hi");
    return {v[0], v[1]};
}

} // namespace config_detail

// Fields omitted from a register are drawn from B_interval with `seed`.
inline RunConfig parse_config(const std::string& text, std::uint64_t seed = 0xD1CE) {
    namespace cd = config_detail;
    RunConfig cfg;
    cfg.text = text;
    try {
        cfg.doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    const json& d = cfg.doc;
    if (!d.is_object()) cd::bad("config", "top level must be an object");
    static const std::vector<std::string> known{"beta",  "dim",  "energies", "couplings", "register", "initial_state", "times",
                                                "xi",    "scaling", "verify", "convention", "bohr_tolerance", "comment"};
    for (const auto& [k, v] : d.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) cd::bad("config", "unknown key '" + k + "'");

    if (d.contains("beta")) cfg.beta = cd::number(d["beta"], "beta");
    if (d.contains("convention")) cfg.convention = cd::convention(d["convention"], "convention");
    if (d.contains("bohr_tolerance")) cfg.bohr_tolerance = cd::number(d["bohr_tolerance"], "bohr_tolerance");

    if (d.contains("energies")) {
        const auto E = cd::reals(d["energies"], "energies");
        if (d.contains("dim") && (!d["dim"].is_number_integer() || d["dim"].get<std::size_t>() != E.size()))
            cd::bad("dim", "does not match the number of energies");
        std::vector<CouplingTerm> cs;
        if (d.contains("couplings")) {
            if (!d["couplings"].is_array()) cd::bad("couplings", "expected an array");
            for (std::size_t r = 0; r < d["couplings"].size(); ++r) {
                const json& c = d["couplings"][r];
                const std::string w = "couplings[" + std::to_string(r) + "]";
                if (!c.is_object() || !c.contains("strength") || !c.contains("matrix"))
                    cd::bad(w, "needs strength and matrix");
                cs.push_back({cd::number(c["strength"], w + ".strength"), cd::matrix(c["matrix"], w + ".matrix"),
                              cd::form_factor(c.value("form_factor", json()), w + ".form_factor")});
            }
        }
        cfg.system = build_system(E, cs, cfg.beta);
    } else if (d.contains("couplings") || d.contains("dim")) {
        cd::bad("config", "couplings and dim need energies");
    }

    if (d.contains("register")) {
        const json& r = d["register"];
        if (!r.is_object()) cd::bad("register", "expected an object");
        std::vector<double> B;
        if (r.contains("B_interval")) cfg.b_interval = cd::interval(r["B_interval"], "register.B_interval");
        if (r.contains("B")) {
            B = cd::reals(r["B"], "register.B");
        } else {
            if (!r.contains("n") || !r["n"].is_number_integer() || r["n"].get<long>() < 1)
                cd::bad("register", "needs B or a positive integer n");
            B = draw_fields(r["n"].get<std::size_t>(), cfg.b_interval.first, cfg.b_interval.second, seed);
        }
        if (r.contains("n") && (!r["n"].is_number_integer() || r["n"].get<std::size_t>() != B.size()))
            cd::bad("register.n", "does not match B");
        RegisterSpec reg = make_register(B, r.contains("lambda1") ? cd::number(r["lambda1"], "register.lambda1") : 0.0,
                                         r.contains("lambda2") ? cd::number(r["lambda2"], "register.lambda2") : 0.0,
                                         cd::form_factor(r.value("g1", json()), "register.g1"),
                                         cd::form_factor(r.value("g2", json()), "register.g2"), cfg.beta);
        if (r.contains("J")) {
            const Matrix J = cd::matrix(r["J"], "register.J");
            if (J.rows() != static_cast<Eigen::Index>(B.size())) cd::bad("register.J", "size does not match B");
            if (J.imag().cwiseAbs().maxCoeff() != 0.0) cd::bad("register.J", "must be real");
            reg.J = J.real();
        }
        reg.validate();
        cfg.reg = std::move(reg);
    }
    if (cfg.system && cfg.reg) cd::bad("config", "give either energies/couplings or register, not both");

    if (d.contains("initial_state")) cfg.initial_state = cd::matrix(d["initial_state"], "initial_state");
    if (d.contains("times")) cfg.times = cd::grid(d["times"], "times");
    if (d.contains("xi")) {
        const json& x = d["xi"];
        cfg.eta = cd::grid(x.is_object() && x.contains("eta") ? x["eta"] : x, "xi.eta");
    }
    if (d.contains("scaling")) {
        const json& s = d["scaling"];
        if (!s.is_object()) cd::bad("scaling", "expected an object");
        if (s.contains("N")) {
            cfg.scaling_n.clear();
            for (double v : cd::reals(s["N"], "scaling.N")) {
                if (!(v >= 1.0) || v != std::floor(v)) cd::bad("scaling.N", "entries must be positive integers");
                cfg.scaling_n.push_back(static_cast<std::size_t>(v));
            }
        }
        if (s.contains("B_interval")) cfg.scaling_interval = cd::interval(s["B_interval"], "scaling.B_interval");
    }
    if (d.contains("verify")) {
        const json& v = d["verify"];
        if (!v.is_object()) cd::bad("verify", "expected an object");
        auto& vc = cfg.verify;
        for (const auto& [k, x] : v.items()) {
            const std::string w = "verify." + k;
            if (k == "M") vc.modes = static_cast<std::size_t>(cd::number(x, w));
            else if (k == "omega_max") vc.omega_max = cd::number(x, w);
            else if (k == "n_max") vc.n_max = static_cast<int>(cd::number(x, w));
            else if (k == "lambdas") vc.lambdas = cd::reals(x, w);
            else if (k == "rate_tolerance") vc.rate_tolerance = cd::number(x, w);
            else if (k == "exponent_tolerance") vc.exponent_tolerance = cd::number(x, w);
            else if (k == "t_max") vc.t_max = cd::number(x, w);
            else if (k == "samples") vc.samples = static_cast<std::size_t>(cd::number(x, w));
            else if (k == "convention") vc.convention = cd::convention(x, w);
            else if (k == "excitation_cap") vc.oracle.excitation_cap = static_cast<int>(cd::number(x, w));
            else cd::bad("verify", "unknown key '" + k + "'");
        }
        if (vc.samples < 20) cd::bad("verify.samples", "need at least 20");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path, std::uint64_t seed = 0xD1CE) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ConfigError, "cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), seed);
}

} // namespace resdyn
