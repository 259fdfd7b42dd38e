// cli.hpp: command-line front end (spectrum, rates, evolve, scaling, xi, verify)
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 verification failure.

#pragma once

#include "resdyn/config.hpp"
#include "resdyn/csv.hpp"
#include "resdyn/dynamics.hpp"
#include "resdyn/errors.hpp"
#include "resdyn/oracle.hpp"
#include "resdyn/parallel.hpp"
#include "resdyn/register.hpp"
#include "resdyn/reservoir.hpp"
#include "resdyn/resonances.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace resdyn::cli {

enum Exit : int { ok = 0, validation = 1, numerical = 2, verification = 3 };

struct Options {
    std::string subcommand;
    std::string config;
    std::string output;
    std::uint64_t seed{0xD1CE};
    std::size_t threads{0};
    std::string convention;
    double bohr_tolerance{-1.0};
    double nonoverlap_threshold{10.0};
    bool check_nonoverlap{false};
    bool attenuate{false};
    std::string elements;
    std::string times;
    std::string eta;
    std::string method{"resonance"};
};

namespace detail {

inline std::vector<double> parse_range(const std::string& s, const char* what) {
    // "start:stop:count"
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, std::string(what) + " must look like start:stop:count");
        }
    }
    if (parts.size() != 3 || parts[2] < 2 || parts[2] != std::floor(parts[2]))
        fail(ErrorCode::InvalidArgument, std::string(what) + " must look like start:stop:count");
    std::vector<double> v;
    const auto n = static_cast<std::size_t>(parts[2]);
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(parts[0] + (parts[1] - parts[0]) * static_cast<double>(k) / static_cast<double>(n - 1));
    return v;
}

// "m,n;m,n" with 1-based indices
inline std::vector<std::pair<std::size_t, std::size_t>> parse_elements(const std::string& s, std::size_t dim) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const auto comma = item.find(',');
        std::size_t m = 0, n = 0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument(item);
            m = std::stoul(item.substr(0, comma));
            n = std::stoul(item.substr(comma + 1));
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "element '" + item + "' must look like m,n");
        }
        if (m < 1 || n < 1 || m > dim || n > dim)
            fail(ErrorCode::InvalidArgument, "element '" + item + "' out of range 1.." + std::to_string(dim));
        out.emplace_back(m - 1, n - 1);
    }
    if (out.empty()) fail(ErrorCode::InvalidArgument, "no elements selected");
    return out;
}

inline void provenance(CsvWriter& w, const Options& o, const RunConfig& cfg, Convention conv) {
    w.comment("resdyn " + std::string(version));
    w.comment("subcommand: " + o.subcommand);
    w.comment("config: " + std::filesystem::path(o.config).filename().string());
    w.comment("config_fnv1a64: " + hex64(fnv1a64(cfg.text)));
    w.comment("seed: " + hex64(o.seed));
    w.comment(std::string("convention: ") + to_string(conv));
}

inline SystemSpec system_of(const RunConfig& cfg) {
    if (cfg.system) return *cfg.system;
    if (cfg.reg) return register_to_system(*cfg.reg);
    fail(ErrorCode::ConfigError, "config defines neither a system nor a register");
}

inline Matrix initial_state(const RunConfig& cfg, std::size_t dim) {
    if (cfg.initial_state) return *cfg.initial_state;
    // uniform superposition
    const auto n = static_cast<Eigen::Index>(dim);
    return Matrix::Constant(n, n, 1.0 / static_cast<double>(dim));
}

inline void warn(std::ostream& err, const std::string& where, const std::string& msg) {
    if (!msg.empty()) err << "WARN: " << where << ": " << msg << '\n';
}

inline std::string message_of(const Error& e) {
    const std::string w = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

// ------------------------------------------------------------- subcommands

inline int spectrum(const Options& o, const RunConfig& cfg, Convention conv, std::ostream& out, std::ostream& err) {
    const SystemSpec spec = system_of(cfg);
    const ResonanceSet res = resonance_energies(spec, {conv, o.threads, o.bohr_tolerance >= 0 ? o.bohr_tolerance : cfg.bohr_tolerance});
    CsvWriter w(out);
    provenance(w, o, cfg, conv);
    w.header({"e", "s", "re_epsilon", "im_epsilon", "nu", "gamma_e", "group_size"});
    for (const auto& g : res.groups) {
        warn(err, "e=" + format_number(g.e), g.warning);
        for (std::size_t s = 0; s < g.epsilons.size(); ++s)
            w.row({CsvWriter::cell(g.e), CsvWriter::cell(static_cast<long long>(s)), CsvWriter::cell(g.epsilons[s].real()),
                   CsvWriter::cell(g.epsilons[s].imag()), CsvWriter::cell(static_cast<long long>(g.nu)),
                   CsvWriter::cell(g.gamma), CsvWriter::cell(static_cast<long long>(g.pairs.size()))});
    }
    if (o.check_nonoverlap) {
        const auto r = check_nonoverlap(res, o.nonoverlap_threshold);
        w.comment("nonoverlap_margin: " + format_number(r.margin));
        w.comment("nonoverlap_min_gap: " + format_number(r.min_gap));
        w.comment("nonoverlap_max_shift: " + format_number(r.max_shift));
        w.comment("nonoverlap_threshold: " + format_number(o.nonoverlap_threshold));
        w.comment(std::string("nonoverlap: ") + (r.pass ? "PASS" : "FAIL"));
    }
    return ok;
}

inline int rates(const Options& o, const RunConfig& cfg, Convention conv, std::ostream& out, std::ostream& err) {
    if (!cfg.reg) fail(ErrorCode::ConfigError, "rates needs a register section");
    const auto rep = decoherence_rates(*cfg.reg, {conv, o.threads, default_max_qubits});
    CsvWriter w(out);
    provenance(w, o, cfg, conv);
    w.comment("B: " + [&] {
        std::string s;
        for (double b : cfg.reg->B) s += (s.empty() ? "" : " ") + format_number(b);
        return s;
    }());
    w.header({"e", "gamma", "gamma_conserving", "gamma_exchange", "gamma_cross", "e0", "hamming", "group_size"});
    std::string last;
    for (const auto& r : rep) {
        if (r.warning != last) warn(err, "e=" + format_number(r.e), r.warning);
        last = r.warning;
        w.row({CsvWriter::cell(r.e), CsvWriter::cell(r.gamma), CsvWriter::cell(r.gamma_conserving),
               CsvWriter::cell(r.gamma_exchange), CsvWriter::cell(r.gamma_cross), CsvWriter::cell(static_cast<long long>(r.e0)),
               CsvWriter::cell(static_cast<long long>(r.hamming)), CsvWriter::cell(static_cast<long long>(r.group_size))});
    }
    return ok;
}

inline int evolve(const Options& o, const RunConfig& cfg, Convention conv, std::ostream& out, std::ostream& err) {
    const SystemSpec spec = system_of(cfg);
    const Matrix rho0 = initial_state(cfg, spec.dim());
    const std::vector<double> times = o.times.empty() ? cfg.times : parse_range(o.times, "--times");
    if (times.empty()) fail(ErrorCode::ConfigError, "evolve needs times in the config or --times");
    std::vector<std::pair<std::size_t, std::size_t>> el;
    if (o.elements.empty()) {
        for (std::size_t k = 0; k < spec.dim(); ++k)
            for (std::size_t l = k; l < spec.dim(); ++l) el.emplace_back(k, l);
    } else {
        el = parse_elements(o.elements, spec.dim());
    }
    Trajectory tr;
    if (o.method == "free") tr = free_evolution(spec, rho0, times);
    else if (o.method == "resonance")
        tr = resonance_evolution(spec, rho0, times, {conv, o.threads, o.bohr_tolerance >= 0 ? o.bohr_tolerance : cfg.bohr_tolerance});
    else fail(ErrorCode::InvalidArgument, "unknown method '" + o.method + "'");
    for (const auto& m : tr.warnings) warn(err, "evolve", m);
    CsvWriter w(out);
    provenance(w, o, cfg, conv);
    w.comment("method: " + o.method);
    std::vector<std::string> cols{"t"};
    for (const auto& [k, l] : el) {
        const std::string tag = std::to_string(k + 1) + "_" + std::to_string(l + 1);
        cols.push_back("re_rho_" + tag);
        cols.push_back("im_rho_" + tag);
    }
    w.header(cols);
    const auto emit = [&](const std::string& first, const Matrix& r) {
        std::vector<std::string> cells{first};
        for (const auto& [k, l] : el) {
            const cplx v = r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            cells.push_back(CsvWriter::cell(v.real()));
            cells.push_back(CsvWriter::cell(v.imag()));
        }
        w.row(cells);
    };
    for (std::size_t s = 0; s < times.size(); ++s) emit(CsvWriter::cell(times[s]), tr.states[s]);
    emit("ergodic", tr.ergodic_mean);
    return ok;
}

inline int scaling(const Options& o, const RunConfig& cfg, Convention conv, std::ostream& out, std::ostream&) {
    if (!cfg.reg) fail(ErrorCode::ConfigError, "scaling needs a register section (couplings and form factors)");
    ScalingOptions so;
    so.b_min = cfg.scaling_interval.first;
    so.b_max = cfg.scaling_interval.second;
    so.seed = o.seed;
    so.attenuate = o.attenuate;
    so.reg = {conv, o.threads, default_max_qubits};
    const auto st = scaling_study(*cfg.reg, cfg.scaling_n, so);
    CsvWriter w(out);
    provenance(w, o, cfg, conv);
    w.comment("B_interval: " + format_number(so.b_min) + " " + format_number(so.b_max));
    w.comment(std::string("attenuate: ") + (o.attenuate ? "yes" : "no"));
    w.header({"N", "max_gamma_conserving", "max_gamma_exchange", "gamma0"});
    for (const auto& r : st.rows)
        w.row({CsvWriter::cell(static_cast<long long>(r.N)), CsvWriter::cell(r.max_gamma_conserving),
               CsvWriter::cell(r.max_gamma_exchange), CsvWriter::cell(r.gamma0)});
    w.comment("fit,exponent,prefactor,r2");
    w.comment("conserving," + format_number(st.conserving.exponent) + "," + format_number(st.conserving.prefactor) + "," +
              format_number(st.conserving.r2));
    w.comment("exchange," + format_number(st.exchange.exponent) + "," + format_number(st.exchange.prefactor) + "," +
              format_number(st.exchange.r2));
    w.comment("gamma0_spread," + format_number(st.gamma0_spread));
    return ok;
}

inline int xi_table(const Options& o, const RunConfig& cfg, Convention conv, std::ostream& out, std::ostream&) {
    FormFactor g;
    if (cfg.system && !cfg.system->couplings().empty()) g = cfg.system->couplings().front().form_factor;
    else if (cfg.reg) g = cfg.reg->g1;
    const std::vector<double> eta = o.eta.empty() ? cfg.eta : parse_range(o.eta, "--eta");
    if (eta.empty()) fail(ErrorCode::ConfigError, "xi needs an eta grid in the config or --eta");
    const double beta = cfg.system ? cfg.system->beta() : cfg.beta;
    const std::vector<double> v = xi_profile(g, beta, eta).values;
    CsvWriter w(out);
    provenance(w, o, cfg, conv);
    w.header({"eta", "xi", "xi_lorentzian_eps1e-3", "abs_diff"});
    for (std::size_t k = 0; k < eta.size(); ++k) {
        const double l = xi_lorentzian_check(g, beta, eta[k], 1e-3);
        w.row({CsvWriter::cell(eta[k]), CsvWriter::cell(v[k]), CsvWriter::cell(l), CsvWriter::cell(std::abs(l - v[k]))});
    }
    return ok;
}

inline int verify_run(const Options& o, const RunConfig& cfg, Convention, std::ostream& out, std::ostream& err) {
    const SystemSpec spec = system_of(cfg);
    Matrix rho0 = initial_state(cfg, spec.dim());
    VerifyConfig vc = cfg.verify;
    if (!o.convention.empty()) vc.convention = o.convention == "microscopic" ? Convention::Microscopic : Convention::Reference;
    const VerifyReport rep = verify(spec, rho0, vc);
    for (const auto& m : rep.warnings) warn(err, "verify", m);
    CsvWriter w(out);
    provenance(w, o, cfg, vc.convention);
    w.header({"check", "measured", "expected", "deviation", "tolerance", "pass", "note"});
    for (const auto& c : rep.checks) {
        w.row({c.name, CsvWriter::cell(c.measured), CsvWriter::cell(c.expected), CsvWriter::cell(c.deviation),
               CsvWriter::cell(c.tolerance), c.pass ? "PASS" : "FAIL", CsvWriter::cell(c.note)});
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-24s %s  measured %.6g  expected %.6g  deviation %.3g (tol %.3g)", c.name.c_str(),
                      c.pass ? "PASS" : "FAIL", c.measured, c.expected, c.deviation, c.tolerance);
        err << buf << (c.note.empty() ? "" : "  [" + c.note + "]") << '\n';
    }
    err << "verify: " << (rep.pass() ? "all checks PASS" : "some checks FAIL") << '\n';
    return rep.pass() ? ok : verification;
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"resdyn: resonance theory of open-system dynamics"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    const auto common = [&](CLI::App* s, bool needs_config = true) {
        auto* c = s->add_option("--config,-c", o.config, "JSON configuration file");
        if (needs_config) c->required();
        s->add_option("--output,-o", o.output, "CSV output path (default stdout)");
        s->add_option("--seed", o.seed, "random seed")->capture_default_str();
        s->add_option("--threads", o.threads, "worker threads (0: RESDYN_THREADS or hardware)");
        s->add_option("--convention", o.convention, "reference | microscopic")->check(CLI::IsMember({"reference", "microscopic"}));
        s->add_option("--bohr-tolerance", o.bohr_tolerance, "Bohr clustering tolerance (0: default)");
    };
    auto* sp = app.add_subcommand("spectrum", "resonance energies per Bohr group");
    common(sp);
    sp->add_flag("--check-nonoverlap", o.check_nonoverlap, "append the non-overlap margin report");
    sp->add_option("--nonoverlap-threshold", o.nonoverlap_threshold, "required margin")->capture_default_str();
    auto* ra = app.add_subcommand("rates", "register decoherence rates with channel attribution");
    common(ra);
    auto* ev = app.add_subcommand("evolve", "reduced density matrix on a time grid");
    common(ev);
    ev->add_option("--elements", o.elements, "1-based elements m,n;m,n (default upper triangle)");
    ev->add_option("--times", o.times, "start:stop:count (overrides the config)");
    ev->add_option("--method", o.method, "resonance | free")->check(CLI::IsMember({"resonance", "free"}))->capture_default_str();
    auto* sc = app.add_subcommand("scaling", "N-scaling of register rates");
    common(sc);
    sc->add_flag("--attenuate", o.attenuate, "scale lambda1 by 1/N and lambda2 by 1/sqrt(N)");
    auto* xs = app.add_subcommand("xi", "xi(eta) with its Lorentzian cross-check");
    common(xs);
    xs->add_option("--eta", o.eta, "start:stop:count (overrides the config)");
    auto* ve = app.add_subcommand("verify", "oracle-versus-theory comparison");
    common(ve);

    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        bool known = false;
        for (auto* s : app.get_subcommands({})) known = known || s->get_name() == args[0];
        if (!known) {
            err << "ERROR[usage]: unknown subcommand '" << args[0] << "'\n" << app.help();
            return validation;
        }
    }
    std::vector<std::string> argv_store{"resdyn"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "ERROR[usage]: " << e.what() << '\n' << app.help();
        return validation;
    }
    for (auto* s : app.get_subcommands()) o.subcommand = s->get_name();
    if (o.threads == 0) o.threads = default_threads();

    try {
        const RunConfig cfg = load_config(o.config, o.seed);
        Convention conv = cfg.convention;
        if (!o.convention.empty()) conv = o.convention == "microscopic" ? Convention::Microscopic : Convention::Reference;
        std::ostringstream body;
        int code = ok;
        if (o.subcommand == "spectrum") code = detail::spectrum(o, cfg, conv, body, err);
        else if (o.subcommand == "rates") code = detail::rates(o, cfg, conv, body, err);
        else if (o.subcommand == "evolve") code = detail::evolve(o, cfg, conv, body, err);
        else if (o.subcommand == "scaling") code = detail::scaling(o, cfg, conv, body, err);
        else if (o.subcommand == "xi") code = detail::xi_table(o, cfg, conv, body, err);
        else code = detail::verify_run(o, cfg, conv, body, err);
        if (o.output.empty()) {
            out << body.str();
        } else {
            std::ofstream f(o.output, std::ios::binary);
            if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + o.output + "'");
            f << body.str();
        }
        return code;
    } catch (const Error& e) {
        err << "ERROR[" << to_string(e.code()) << "]: " << detail::message_of(e) << '\n';
        return is_numerical(e.code()) ? numerical : validation;
    } catch (const std::exception& e) {
        err << "ERROR[internal]: " << e.what() << '\n';
        return numerical;
    }
}

} // namespace resdyn::cli
