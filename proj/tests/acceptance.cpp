// Acceptance run: one PASS/FAIL line per criterion, diagnostics indented below.

#include "resdyn/config.hpp"
#include "resdyn/csv.hpp"
#include "resdyn/dynamics.hpp"
#include "resdyn/oracle.hpp"
#include "resdyn/register.hpp"
#include "resdyn/reservoir.hpp"
#include "resdyn/resonances.hpp"

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace resdyn;

namespace {

const std::string source_dir = RESDYN_SOURCE_DIR;

struct Outcome {
    bool pass{true};
    std::vector<std::string> notes;

    void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, ap);
        va_end(ap);
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
        pass = pass && ok;
    }
    void note(const std::string& s) { notes.push_back("     " + s); }
};

int failures = 0;

void criterion(int id, const char* name, double budget, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.check(false, "exception: %s", e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(dt < budget, "runtime %.2f s (budget %.0f s)", dt, budget);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, name);
    std::fflush(stdout);
    failures += !o.pass;
}

Matrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 0.5);
    const auto k = static_cast<Eigen::Index>(n);
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        m(i, i) = d(rng);
        for (Eigen::Index j = i + 1; j < k; ++j) {
            m(i, j) = cplx(d(rng), d(rng));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

FormFactor form(double p, int m) {
    FormFactor g;
    g.radial_exponent = p;
    g.decay_exponent = m;
    return g;
}

SystemSpec random_system(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> e;
    for (std::size_t k = 0; k < n; ++k) e.push_back(u(rng));
    return build_system(e, {{0.01, random_hermitian(n, rng), form(-0.5, 1)}, {0.005, random_hermitian(n, rng), form(0.5, 2)}},
                        1.3);
}

// 20 random specs shared by criteria 2 and 8
std::vector<SystemSpec> random_specs(std::size_t count, std::vector<std::string>& skipped) {
    std::mt19937_64 rng(0xD1CE);
    std::vector<SystemSpec> out;
    while (out.size() < count) {
        const std::size_t n = 2 + out.size() % 5;
        auto spec = random_system(n, rng);
        try {
            (void)bohr_spectrum(spec);
            out.push_back(std::move(spec));
        } catch (const Error& e) {
            skipped.push_back(e.what());
        }
    }
    return out;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> grid(double tmax, std::size_t n) {
    std::vector<double> t;
    for (std::size_t k = 0; k < n; ++k) t.push_back(tmax * static_cast<double>(k) / static_cast<double>(n - 1));
    return t;
}

} // namespace

int main() {
    std::vector<std::string> skipped;
    const auto specs = random_specs(20, skipped);

    criterion(1, "single-qubit closed form", 1.0, [](Outcome& o) {
        const auto cfg = load_config(source_dir + "/configs/single_qubit.cfg");
        const SystemSpec& spec = *cfg.system;
        const auto& c0 = spec.couplings()[0];
        const double a = c0.matrix(0, 0).real(), b = c0.matrix(1, 1).real(), lam = c0.strength;
        const cplx c = c0.matrix(0, 1);
        const double delta = spec.energies()[1] - spec.energies()[0], beta = spec.beta();
        const FormFactor& g = c0.form_factor;
        const double c2 = std::norm(c), pi2 = pi * pi, l2 = lam * lam;
        const cplx im0 = I * (l2 * pi2 * c2 * xi(g, beta, delta));
        const double R = 0.5 * (b * b - a * a) * mean_inverse_frequency(g) + 0.5 * c2 * pv_energy_shift(g, beta, delta);
        const cplx epsd = delta + l2 * R + 0.5 * I * l2 * pi2 * (c2 * xi(g, beta, delta) + (b - a) * (b - a) * xi(g, beta, 0.0));

        const auto res = resonance_energies(spec);
        const auto& r0 = res.at(0.0);
        const auto& rp = res.at(delta);
        const auto& rm = res.at(-delta);
        o.note("a = " + format_number(a) + ", b = " + format_number(b) + ", |c| = " + format_number(std::abs(c)));
        const double z = std::abs(r0.epsilons[0]);
        o.check(z <= 1e-12, "eps_0 zero mode |eps| = %.2e", z);
        const double d0 = rel(r0.epsilons[1], im0);
        o.check(d0 <= 1e-8, "eps_0 = %.12g i  closed form %.12g i  rel %.2e", r0.epsilons[1].imag(), im0.imag(), d0);
        const double dp = rel(rp.epsilons[0], epsd);
        o.check(dp <= 1e-8, "eps_D = %.12g + %.12g i  closed form %.12g + %.12g i  rel %.2e", rp.epsilons[0].real(),
                rp.epsilons[0].imag(), epsd.real(), epsd.imag(), dp);
        const double dr = std::abs((rp.epsilons[0].real() - delta) / l2 - R) / std::abs(R);
        o.check(dr <= 1e-8, "R = %.12g  closed form %.12g  rel %.2e", (rp.epsilons[0].real() - delta) / l2, R, dr);
        const double dm = rel(rm.epsilons[0], -std::conj(epsd));
        o.check(dm <= 1e-8, "eps_-D against -conj(closed form)  rel %.2e", dm);
    });

    criterion(2, "conjugate pairing on 20 random specs", 10.0, [&](Outcome& o) {
        double worst = 0.0;
        std::size_t groups = 0;
        for (const auto& spec : specs) {
            const auto res = resonance_energies(spec);
            for (const auto& r : res.groups) {
                const auto& m = res.at(-r.e);
                std::vector<cplx> x = r.epsilons, y;
                for (const auto& v : m.epsilons) y.push_back(-std::conj(v));
                if (x.size() != y.size()) {
                    worst = INFINITY;
                    continue;
                }
                // greedy matching
                for (const cplx v : x) {
                    auto it = std::min_element(y.begin(), y.end(), [&](cplx p, cplx q) { return std::abs(p - v) < std::abs(q - v); });
                    worst = std::max(worst, std::abs(*it - v));
                    y.erase(it);
                }
                ++groups;
            }
        }
        o.note(std::to_string(specs.size()) + " specs, N = 2..6, " + std::to_string(groups) + " groups, " +
               std::to_string(skipped.size()) + " draws skipped for ambiguous clustering");
        o.check(worst <= 1e-9, "max |eps_{-e} + conj(eps_e)| = %.2e", worst);
    });

    criterion(3, "oracle rate check (single qubit, M = 150)", 60.0, [](Outcome& o) {
        auto cfg = load_config(source_dir + "/configs/verify_qubit.cfg");
        VerifyConfig vc = cfg.verify;
        vc.modes = 150;
        vc.n_max = 3;
        vc.lambdas = {0.01, 0.02};
        const auto rep = verify(*cfg.system, *cfg.initial_state, vc);
        for (const auto& c : rep.checks) {
            if (c.name.rfind("trajectory_", 0) == 0) continue;
            o.check(c.pass, "%-18s measured %.6g expected %.6g deviation %.3g tol %.3g %s", c.name.c_str(), c.measured,
                    c.expected, c.deviation, c.tolerance, c.note.c_str());
        }
        for (const auto& w : rep.warnings) o.note("warning: " + w);
        // same oracle data against the microscopic normalization, for information
        vc.convention = Convention::Microscopic;
        vc.lambdas = {0.02};
        for (const auto& c : verify(*cfg.system, *cfg.initial_state, vc).checks)
            if (c.name.rfind("rate_", 0) == 0)
                o.note("diagnostic: " + c.name + " against microscopic normalization: measured " + format_number(c.measured) +
                       " expected " + format_number(c.expected) + " deviation " + format_number(c.deviation));
    });

    criterion(4, "pure-dephasing exactness", 30.0, [](Outcome& o) {
        Matrix G(2, 2);
        G << 0.3, 0.0, 0.0, -0.2;
        const FormFactor g;
        Matrix rho0(2, 2);
        rho0 << 0.7, cplx(0.3, 0.2), cplx(0.3, -0.2), 0.3;
        for (const double lam : {0.01, 0.05}) {
            const auto spec = build_system({0.0, 1.0}, {{lam, G, g}}, 1.0);
            const auto fock = discretize_bath(g, 1.0, 4, 0.4, 3);
            const auto tf = discretize_bath(g, 1.0, 150, default_omega_max(g, 1.0), 3);
            for (const auto& [bath, rep] : {std::pair{fock, BathRepresentation::ThermalFock},
                                            std::pair{tf, BathRepresentation::Thermofield}}) {
                const auto tr = exact_evolve(spec, bath, rho0, grid(0.9 * bath.recurrence_time(), 80), {rep});
                double dev = 0.0;
                for (const auto& s : tr.states)
                    dev = std::max({dev, std::abs(s(0, 0) - rho0(0, 0)), std::abs(s(1, 1) - rho0(1, 1))});
                o.check(dev <= 1e-12, "lambda %.2g %-12s M = %3zu  max population drift %.2e", lam, to_string(rep).c_str(),
                        bath.modes(), dev);
            }
            const auto res = resonance_energies(spec);
            double im = 0.0;
            for (const auto& e : res.at(0.0).epsilons) im = std::max(im, std::abs(e.imag()));
            o.check(im <= 1e-12, "lambda %.2g  max |Im eps_0| = %.2e (gamma_0 = %.2e)", lam, im, res.at(0.0).gamma);
            if (!res.at(0.0).warning.empty()) o.note("warning: " + res.at(0.0).warning);
        }
    });

    criterion(5, "register e0^2 law (N = 4, lambda2 = 0)", 30.0, [](Outcome& o) {
        const auto cfg = load_config(source_dir + "/configs/reg4_random_fields.cfg");
        const auto rates = decoherence_rates(*cfg.reg);
        std::vector<double> x, y;
        double zero_max = 0.0;
        std::size_t zero_groups = 0;
        for (const auto& r : rates) {
            if (r.e0 == 0) {
                zero_max = std::max(zero_max, r.gamma);
                ++zero_groups;
            } else {
                x.push_back(static_cast<double>(r.e0 * r.e0));
                y.push_back(r.gamma);
            }
        }
        const double n = static_cast<double>(x.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            sx += x[k];
            sy += y[k];
            sxx += x[k] * x[k];
            sxy += x[k] * y[k];
            syy += y[k] * y[k];
        }
        const double cov = n * sxy - sx * sy;
        const double r2 = cov * cov / ((n * sxx - sx * sx) * (n * syy - sy * sy));
        o.note(std::to_string(x.size()) + " groups with e0 != 0, " + std::to_string(zero_groups) + " with e0 = 0");
        o.check(r2 >= 0.999, "R^2 of gamma on e0^2 = %.12f, slope %.6g", r2, cov / (n * sxx - sx * sx));
        o.check(zero_max <= 1e-12, "max gamma over e0 = 0 groups = %.2e", zero_max);
    });

    criterion(6, "N-scaling of register rates", 300.0, [](Outcome& o) {
        const auto cfg = load_config(source_dir + "/configs/scaling.cfg");
        ScalingOptions so;
        so.b_min = cfg.scaling_interval.first;
        so.b_max = cfg.scaling_interval.second;
        const auto st = scaling_study(*cfg.reg, {2, 3, 4, 5, 6, 7, 8}, so);
        for (const auto& r : st.rows) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "N = %zu  max conserving %.6g  max exchange %.6g  gamma0 %.6g", r.N,
                          r.max_gamma_conserving, r.max_gamma_exchange, r.gamma0);
            o.note(buf);
        }
        o.note("fields uniform on [" + format_number(so.b_min) + ", " + format_number(so.b_max) + "], seed 0xD1CE");
        o.check(std::abs(st.conserving.exponent - 2.0) <= 0.1, "conserving exponent %.6f (R^2 %.6f)", st.conserving.exponent,
                st.conserving.r2);
        o.check(std::abs(st.exchange.exponent - 1.0) <= 0.15, "exchange exponent %.6f (R^2 %.6f)", st.exchange.exponent,
                st.exchange.r2);
        double lo = INFINITY, hi = 0, mean = 0;
        int cnt = 0;
        for (const auto& r : st.rows)
            if (r.N <= 6) {
                lo = std::min(lo, r.gamma0);
                hi = std::max(hi, r.gamma0);
                mean += r.gamma0;
                ++cnt;
            }
        mean /= cnt;
        o.check((hi - lo) / mean <= 0.05, "gamma0 relative spread over N = 2..6: %.4f", (hi - lo) / mean);
    });

    criterion(7, "dynamics reconstruction against the oracle (3 levels)", 120.0, [](Outcome& o) {
        std::mt19937_64 rng(0xD1CE + 7);
        std::uniform_real_distribution<double> u(0.0, 2.5);
        std::vector<double> E{0.0, u(rng), u(rng)};
        std::sort(E.begin(), E.end());
        const FormFactor g;
        const auto spec = build_system(E, {{0.02, random_hermitian(3, rng), g}}, 1.0);
        Matrix rho0 = Matrix::Zero(3, 3);
        {
            Eigen::VectorXcd psi(3);
            psi << 0.6, cplx(0.5, 0.2), cplx(-0.3, 0.4);
            psi.normalize();
            rho0 = 0.8 * psi * psi.adjoint() + 0.2 * Matrix::Identity(3, 3) / 3.0;
        }
        const auto res = resonance_energies(spec);
        double gmin = INFINITY;
        for (const auto& r : res.groups)
            if (r.gamma > 1e-12) gmin = std::min(gmin, r.gamma);
        o.note("energies " + format_number(E[0]) + " " + format_number(E[1]) + " " + format_number(E[2]) +
               ", gamma_min " + format_number(gmin) + ", window [0, " + format_number(5.0 / gmin) + "]");
        const auto times = grid(5.0 / gmin, 200);
        const auto th = resonance_evolution(res, rho0, times);
        const auto bath = discretize_bath(g, 1.0, 150, default_omega_max(g, 1.0), 3);
        const auto ex = exact_evolve(spec, bath, rho0, times);
        for (const auto& w : ex.warnings) o.note("oracle warning: " + w);
        double dev = 0.0, lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < times.size(); ++k) {
            dev = std::max(dev, max_abs(th.states[k] - ex.states[k]));
            for (Eigen::Index i = 0; i < 9; ++i) {
                lo = std::min({lo, ex.states[k](i).real(), ex.states[k](i).imag()});
                hi = std::max({hi, ex.states[k](i).real(), ex.states[k](i).imag()});
            }
        }
        const double tol = std::max(5 * 0.02 * 0.02, 0.05 * (hi - lo));
        o.check(dev <= tol, "max entrywise |theory - oracle| = %.4g (tol %.4g)", dev, tol);

        // block independence: perturbing one group's coordinates leaves all other entries bit-identical
        bool exact = true;
        for (const auto& grp : res.groups) {
            Matrix pert = rho0;
            for (const auto& p : grp.pairs) pert(static_cast<Eigen::Index>(p.n), static_cast<Eigen::Index>(p.m)) += cplx(0.01, -0.02);
            const auto tb = resonance_evolution(res, pert, times);
            for (std::size_t k = 0; k < times.size(); ++k)
                for (Eigen::Index i = 0; i < 3; ++i)
                    for (Eigen::Index j = 0; j < 3; ++j)
                        if (res.bohr.id(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) != grp.group)
                            exact = exact && tb.states[k](i, j) == th.states[k](i, j);
        }
        o.check(exact, "block independence holds exactly over %zu groups", res.groups.size());
        o.check(th.max_trace_defect() <= 1e-10 && th.max_hermiticity_defect() <= 1e-9,
                "theory trace defect %.2e, Hermiticity defect %.2e", th.max_trace_defect(), th.max_hermiticity_defect());
        o.check(ex.max_trace_defect() <= 1e-10 && ex.max_hermiticity_defect() <= 1e-10,
                "oracle trace defect %.2e, Hermiticity defect %.2e", ex.max_trace_defect(), ex.max_hermiticity_defect());

        // inside the recurrence window against the microscopic normalization, for information
        const auto tw = grid(0.9 * bath.recurrence_time(), 120);
        const auto mic = resonance_evolution(resonance_energies(spec, {Convention::Microscopic}), rho0, tw);
        const auto ref = resonance_evolution(res, rho0, tw);
        const auto exw = exact_evolve(spec, bath, rho0, tw);
        double dm = 0.0, dr = 0.0;
        for (std::size_t k = 0; k < tw.size(); ++k) {
            dm = std::max(dm, max_abs(mic.states[k] - exw.states[k]));
            dr = std::max(dr, max_abs(ref.states[k] - exw.states[k]));
        }
        o.note("diagnostic: on [0, " + format_number(tw.back()) + "] max deviation " + format_number(dr) +
               " (reference), " + format_number(dm) + " (microscopic)");
    });

    criterion(8, "property suite", 60.0, [&](Outcome& o) {
        double min_im = INFINITY, worst_zero = 0.0;
        for (const auto& spec : specs)
            for (const auto conv : {Convention::Reference, Convention::Microscopic}) {
                const auto res = resonance_energies(spec, {conv});
                for (const auto& r : res.groups)
                    for (const auto& d : r.deltas) min_im = std::min(min_im, d.imag());
                double z = INFINITY;
                for (const auto& d : res.at(0.0).deltas) z = std::min(z, std::abs(d));
                worst_zero = std::max(worst_zero, z);
            }
        o.check(min_im >= -1e-10, "min Im delta over %zu specs and both normalizations = %.3e", specs.size(), min_im);
        o.check(worst_zero <= 1e-10, "largest smallest |delta| in Lambda_0 = %.2e", worst_zero);

        double xi_min = INFINITY;
        for (const auto& g : {form(-0.5, 1), form(0.0, 1), form(0.5, 2), form(-0.25, 2)})
            for (double beta : {0.5, 1.0, 4.0})
                for (double eta = 0.0; eta <= 6.0; eta += 0.25) xi_min = std::min(xi_min, xi(g, beta, eta));
        o.check(xi_min >= 0.0, "min xi over the grid = %.3e", xi_min);
        {
            const FormFactor g;
            const double target = xi(g, 1.0, 1.0);
            std::vector<double> d;
            for (double eps : {1e-2, 1e-3, 1e-4}) d.push_back(std::abs(xi_lorentzian_check(g, 1.0, 1.0, eps) - target));
            o.check(d[0] > d[1] && d[1] > d[2] && d[2] <= 1e-3 * target,
                    "Lorentzian differences at eps 1e-2, 1e-3, 1e-4: %.2e %.2e %.2e", d[0], d[1], d[2]);
        }

        bool metric = true;
        for (std::size_t n = 1; n <= 4; ++n) {
            std::vector<SpinConfiguration> cs;
            for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) cs.push_back(configuration_of_index(i, n));
            for (const auto& a : cs)
                for (const auto& b : cs) {
                    const int dab = hamming_and_e0(a, b).D;
                    metric = metric && dab == hamming_and_e0(b, a).D && ((dab == 0) == (a == b));
                    for (const auto& c : cs) metric = metric && dab <= hamming_and_e0(a, c).D + hamming_and_e0(c, b).D;
                }
        }
        o.check(metric, "Hamming metric axioms, exhaustive N <= 4");

        const auto rnd = load_config(source_dir + "/configs/reg4_random_fields.cfg");
        const auto cst = load_config(source_dir + "/configs/reg4_constant_fields.cfg");
        const auto pr = generic_field_check(rnd.reg->B), pc = generic_field_check(cst.reg->B);
        std::string wit;
        for (int v : pc.witness) wit += std::to_string(v) + " ";
        o.check(pr.pass, "generic_field_check on random fields: %s", pr.pass ? "PASS" : "FAIL");
        o.check(!pc.pass, "generic_field_check on constant fields: %s, witness %s", pc.pass ? "PASS" : "FAIL", wit.c_str());

        double gauge = 0.0, perm = 0.0;
        for (std::size_t k = 0; k < specs.size(); k += 4) {
            const auto& spec = specs[k];
            const auto a = resonance_energies(spec);
            const auto b = resonance_energies(spec.shifted(3.75));
            for (std::size_t gi = 0; gi < a.groups.size(); ++gi) {
                gauge = std::max(gauge, max_abs(a.groups[gi].Lambda - b.groups[gi].Lambda));
                for (std::size_t s = 0; s < a.groups[gi].epsilons.size(); ++s)
                    gauge = std::max(gauge, std::abs(a.groups[gi].epsilons[s] - b.groups[gi].epsilons[s]));
            }
            // reverse the level order
            const std::size_t n = spec.dim();
            std::vector<double> e;
            for (std::size_t i = 0; i < n; ++i) e.push_back(spec.energies()[n - 1 - i]);
            std::vector<CouplingTerm> cs;
            for (const auto& c : spec.couplings()) cs.push_back({c.strength, c.matrix.reverse().eval(), c.form_factor});
            const auto p = resonance_energies(build_system(e, cs, spec.beta()));
            for (const auto& r : a.groups) {
                const auto& q = p.at(r.e);
                for (std::size_t s = 0; s < r.epsilons.size(); ++s) {
                    double best = INFINITY;
                    for (const auto& v : q.epsilons) best = std::min(best, std::abs(v - r.epsilons[s]));
                    perm = std::max(perm, best);
                }
            }
        }
        o.check(gauge <= 1e-10, "gauge (energy shift) invariance: max change %.2e", gauge);
        o.check(perm <= 1e-10, "permutation invariance of eigenvalues: max change %.2e", perm);
    });

    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
