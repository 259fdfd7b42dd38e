// register.hpp: qubit-register decoherence rates, channel attribution, N-scaling

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/model.hpp"
#include "resdyn/parallel.hpp"
#include "resdyn/resonances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace resdyn {

using PairLabel = std::pair<SpinConfiguration, SpinConfiguration>; // (sigma, tau)

inline double register_bohr(const RegisterSpec& reg, const SpinConfiguration& sigma, const SpinConfiguration& tau) {
    return energy_of_configuration(reg, sigma) - energy_of_configuration(reg, tau);
}

struct HammingInfo {
    int D{0};
    int e0{0};
    int N0{0};
};

inline HammingInfo hamming_and_e0(const SpinConfiguration& sigma, const SpinConfiguration& tau) {
    check_configuration(sigma, sigma.size());
    check_configuration(tau, sigma.size());
    HammingInfo h;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        h.D += std::abs(sigma[j] - tau[j]);
        h.e0 += sigma[j] - tau[j];
        h.N0 += sigma[j] == tau[j];
    }
    if (h.D + 2 * h.N0 != 2 * static_cast<int>(sigma.size()))
        fail(ErrorCode::BadConfiguration, "Hamming identity D + 2 N0 = 2N violated");
    return h;
}

struct GenericFieldReport {
    bool pass{true};
    std::vector<int> witness; // empty on PASS
};

inline constexpr std::size_t max_exhaustive_qubits = 12;

// Exhaustive scan of n in {-n_max..n_max}^N \ {0}. The witness is normalized to a
// positive first nonzero entry and is the smallest in l1 norm, then lexicographically.
inline GenericFieldReport generic_field_check(const std::vector<double>& B, int n_max = 2) {
    const std::size_t N = B.size();
    if (N > max_exhaustive_qubits) fail(ErrorCode::TooLargeForExhaustiveCheck, "generic field check limited to 12 qubits");
    if (n_max < 1) fail(ErrorCode::InvalidArgument, "n_max must be positive");
    double bmax = 0.0;
    for (double b : B) bmax = std::max(bmax, std::abs(b));
    const double tol = 1e-12 * bmax;
    GenericFieldReport rep;
    std::vector<int> n(N, -n_max);
    int best_l1 = 0;
    const auto visit = [&] {
        int first = 0, l1 = 0;
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (first == 0) first = n[j];
            l1 += std::abs(n[j]);
            s += B[j] * n[j];
        }
        if (first <= 0 || std::abs(s) > tol) return; // zero vector or not normalized
        if (rep.pass || l1 < best_l1 || (l1 == best_l1 && n < rep.witness)) {
            rep.pass = false;
            rep.witness = n;
            best_l1 = l1;
        }
    };
    if (N == 0) return rep;
    for (;;) {
        visit();
        std::size_t j = N;
        while (j > 0) {
            --j;
            if (++n[j] <= n_max) break;
            n[j] = -n_max;
            if (j == 0) return rep;
        }
    }
}

struct RateReport {
    double e{0.0};
    double gamma{0.0};
    double gamma_conserving{0.0};
    double gamma_exchange{0.0};
    double gamma_cross{0.0};
    int e0{0};
    int hamming{0};
    std::size_t group_size{0};
    std::vector<PairLabel> group_pairs;
    std::string warning;
};

struct RegisterOptions {
    Convention convention{Convention::Reference};
    std::size_t threads{0};
    std::size_t max_qubits{default_max_qubits};
};

inline std::vector<RateReport> decoherence_rates(const RegisterSpec& reg, RegisterOptions opt = {}) {
    const SystemSpec full = register_to_system(reg, opt.max_qubits);
    ResonanceOptions ro{opt.convention, opt.threads, 0.0};
    const auto r_full = resonance_energies(full, ro);
    const auto r_cons = resonance_energies(full.with_strengths({reg.lambda1, 0.0}), ro);
    const auto r_exch = resonance_energies(full.with_strengths({0.0, reg.lambda2}), ro);

    std::string advisory;
    if (reg.n_qubits <= max_exhaustive_qubits && !generic_field_check(reg.B).pass)
        advisory = "fields are not generic; Bohr groups merge";
    std::vector<RateReport> out;
    for (std::size_t g = 0; g < r_full.groups.size(); ++g) {
        const auto& rf = r_full.groups[g];
        RateReport rep;
        rep.e = rf.e;
        rep.gamma = rf.gamma;
        rep.gamma_conserving = r_cons.groups[g].gamma;
        rep.gamma_exchange = r_exch.groups[g].gamma;
        rep.gamma_cross = rep.gamma - rep.gamma_conserving - rep.gamma_exchange;
        rep.group_size = rf.pairs.size();
        for (const auto& p : rf.pairs)
            rep.group_pairs.emplace_back(configuration_of_index(p.m, reg.n_qubits), configuration_of_index(p.n, reg.n_qubits));
        const auto h = hamming_and_e0(rep.group_pairs.front().first, rep.group_pairs.front().second);
        rep.e0 = h.e0;
        rep.hamming = h.D;
        rep.warning = rf.warning;
        if (!advisory.empty()) rep.warning = rep.warning.empty() ? advisory : advisory + "; " + rep.warning;
        out.push_back(std::move(rep));
    }
    return out;
}

// ------------------------------------------------------------- scaling

struct ScalingRow {
    std::size_t N{0};
    std::vector<double> B;
    double max_gamma_conserving{0.0};
    double max_gamma_exchange{0.0};
    double gamma0{0.0};
};

struct PowerFit {
    double exponent{0.0};
    double prefactor{0.0};
    double r2{0.0};
};

struct ScalingStudy {
    std::vector<ScalingRow> rows;
    PowerFit conserving, exchange;
    double gamma0_spread{0.0}; // (max - min) / mean over the rows
};

struct ScalingOptions {
    double b_min{1.0}, b_max{1.01};
    std::uint64_t seed{0xD1CE};
    bool attenuate{false};
    RegisterOptions reg{};
};

// least-squares line through (log x, log y)
inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "power-law fit needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) fail(ErrorCode::PoorFit, "power-law fit needs positive data");
        const double a = std::log(x[k]), b = std::log(y[k]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        syy += b * b;
    }
    PowerFit f;
    const double vx = n * sxx - sx * sx, vy = n * syy - sy * sy, cxy = n * sxy - sx * sy;
    f.exponent = cxy / vx;
    f.prefactor = std::exp((sy - f.exponent * sx) / n);
    f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    return f;
}

// Fields for a given N: i.i.d. uniform on [b_min, b_max], one stream per (seed, N).
inline std::vector<double> draw_fields(std::size_t N, double b_min, double b_max, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(N)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(b_min, b_max);
    std::vector<double> B(N);
    for (auto& b : B) b = u(rng);
    return B;
}

inline ScalingStudy scaling_study(const RegisterSpec& tmpl, const std::vector<std::size_t>& Ns, ScalingOptions opt = {}) {
    if (Ns.empty()) fail(ErrorCode::InvalidArgument, "empty N list");
    if (!(opt.b_max >= opt.b_min)) fail(ErrorCode::InvalidArgument, "field interval is empty");
    ScalingStudy st;
    st.rows.resize(Ns.size());
    // per-N runs are independent; groups inside each run stay serial
    RegisterOptions inner = opt.reg;
    inner.threads = 1;
    parallel_for(Ns.size(), [&](std::size_t k) {
        const std::size_t N = Ns[k];
        RegisterSpec reg = make_register(draw_fields(N, opt.b_min, opt.b_max, opt.seed), tmpl.lambda1, tmpl.lambda2,
                                         tmpl.g1, tmpl.g2, tmpl.beta);
        if (opt.attenuate) {
            reg.lambda1 /= static_cast<double>(N);
            reg.lambda2 /= std::sqrt(static_cast<double>(N));
        }
        const SystemSpec spec = register_to_system(reg, inner.max_qubits);
        ResonanceOptions ro{inner.convention, 1, 0.0};
        const auto cons = resonance_energies(spec.with_strengths({reg.lambda1, 0.0}), ro);
        const auto exch = resonance_energies(spec.with_strengths({0.0, reg.lambda2}), ro);
        ScalingRow row;
        row.N = N;
        row.B = reg.B;
        for (const auto& r : cons.groups) row.max_gamma_conserving = std::max(row.max_gamma_conserving, r.gamma);
        for (const auto& r : exch.groups) row.max_gamma_exchange = std::max(row.max_gamma_exchange, r.gamma);
        row.gamma0 = exch.groups[exch.bohr.zero_group()].gamma;
        st.rows[k] = std::move(row);
    }, opt.reg.threads);

    std::vector<double> n, c, x, g0;
    for (const auto& r : st.rows) {
        n.push_back(static_cast<double>(r.N));
        c.push_back(r.max_gamma_conserving);
        x.push_back(r.max_gamma_exchange);
        g0.push_back(r.gamma0);
    }
    if (st.rows.size() >= 2) {
        if (tmpl.lambda1 != 0.0) st.conserving = fit_power_law(n, c);
        if (tmpl.lambda2 != 0.0) st.exchange = fit_power_law(n, x);
    }
    const auto [lo, hi] = std::minmax_element(g0.begin(), g0.end());
    double mean = 0.0;
    for (double v : g0) mean += v;
    mean /= static_cast<double>(g0.size());
    st.gamma0_spread = mean > 0.0 ? (*hi - *lo) / mean : 0.0;
    return st;
}

} // namespace resdyn
