// level_shift.hpp: second-order level-shift operators Lambda_e
//
// Lambda_e acts on the coordinates rho_{nm}, (m, n) in I_e. It is the secular
// second-order generator of the reduced dynamics restricted to I_e, written so
// that a mode exp(i t (e + lambda^2 delta)) has Im delta >= 0:
//
//   Lambda rho = sigma [H_LS, rho] - i D[rho]
//   D[rho]     = sum_w K(w) (A(w) rho A(w)^* - 1/2 {A(w)^* A(w), rho})
//   H_LS       = sum_w S(w) A(w)^* A(w)
//
// with A(w) the part of G lowering the energy by w. Convention::Microscopic uses
// the rate of the Hamiltonian model (sigma = -1); Convention::Reference uses the
// normalization of the closed-form qubit resonances (sigma = +1, rate pi times
// larger, pi^2 xi(0) at w = 0).

#pragma once

#include "resdyn/bohr.hpp"
#include "resdyn/errors.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/model.hpp"
#include "resdyn/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace resdyn {

enum class Convention { Reference, Microscopic };

inline const char* to_string(Convention c) { return c == Convention::Reference ? "reference" : "microscopic"; }

namespace detail {

struct SparseEntry {
    std::size_t col;
    cplx value;
};
using SparseRows = std::vector<std::vector<SparseEntry>>;

inline SparseRows sparse_rows(const Matrix& m, double cutoff = 0.0) {
    SparseRows rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > cutoff) rows[static_cast<std::size_t>(i)].push_back({static_cast<std::size_t>(j), m(i, j)});
    return rows;
}

struct ChannelTable {
    double weight{0.0}; // (lambda_r / lambda)^2
    SparseRows g;       // rows of G_r
    std::map<std::size_t, double> rate, shift;
};

} // namespace detail

class LevelShiftBuilder {
public:
    LevelShiftBuilder(const SystemSpec& spec, const BohrSpectrum& bohr, Convention conv = Convention::Reference)
        : bohr_(bohr), conv_(conv), n_(spec.dim()) {
        if (bohr.dim() != n_) fail(ErrorCode::DimensionMismatch, "Bohr spectrum does not match the system");
        lambda_ = spec.coupling_scale();
        const double sigma = conv == Convention::Reference ? 1.0 : -1.0;
        hls_.assign(n_, {});
        xk_.assign(n_, {});
        if (lambda_ == 0.0) return;

        std::map<std::pair<std::size_t, std::size_t>, cplx> h, x;
        for (const auto& c : spec.couplings()) {
            if (c.strength == 0.0 || c.form_factor.is_zero()) continue;
            detail::ChannelTable t;
            t.weight = (c.strength / lambda_) * (c.strength / lambda_);
            t.g = detail::sparse_rows(c.matrix);
            if (std::all_of(t.g.begin(), t.g.end(), [](const auto& r) { return r.empty(); })) continue;
            // K and S at every Bohr frequency E_a - E_j with G_ja != 0
            for (std::size_t j = 0; j < n_; ++j)
                for (const auto& [a, v] : t.g[j]) {
                    const std::size_t gid = bohr.id(a, j);
                    if (t.rate.count(gid)) continue;
                    const double w = bohr.group(gid).e;
                    t.rate[gid] = conv == Convention::Reference ? reference_rate(c.form_factor, spec.beta(), w)
                                                                : microscopic_rate(c.form_factor, spec.beta(), w);
                    t.shift[gid] = lamb_shift_function(c.form_factor, spec.beta(), w);
                }
            // X_ab and H_LS_ab for E_a ~ E_b
            for (std::size_t j = 0; j < n_; ++j)
                for (const auto& [a, ga] : t.g[j])
                    for (const auto& [b, gb] : t.g[j]) {
                        if (bohr.id(a, b) != bohr.zero_group()) continue;
                        const std::size_t gid = bohr.id(a, j);
                        const cplx amp = std::conj(ga) * gb * t.weight;
                        x[{a, b}] += t.rate.at(gid) * amp;
                        h[{a, b}] += sigma * t.shift.at(gid) * amp;
                    }
            tables_.push_back(std::move(t));
        }
        for (const auto& [ab, v] : h)
            if (v != cplx(0.0)) hls_[ab.first].push_back({ab.second, v});
        for (const auto& [ab, v] : x)
            if (v != cplx(0.0)) xk_[ab.first].push_back({ab.second, v});
    }

    double lambda() const { return lambda_; }
    Convention convention() const { return conv_; }
    const BohrSpectrum& bohr() const { return bohr_; }

    // Lambda_e on group g, in the ordering of bohr().group(g).pairs
    Matrix operator()(std::size_t g) const {
        const auto& pairs = bohr_.group(g).pairs;
        const auto d = static_cast<Eigen::Index>(pairs.size());
        Matrix L = Matrix::Zero(d, d);
        if (lambda_ == 0.0) return L;
        // coordinate s holds rho_{k l} with (m, n) = (l, k)
        const auto col = [&](std::size_t k, std::size_t l) {
            if (bohr_.id(l, k) != g)
                fail(ErrorCode::AmbiguousClustering, "coupled coordinate falls outside its Bohr group");
            return static_cast<Eigen::Index>(bohr_.slot(l, k));
        };
        for (Eigen::Index s = 0; s < d; ++s) {
            const std::size_t k = pairs[static_cast<std::size_t>(s)].n;
            const std::size_t l = pairs[static_cast<std::size_t>(s)].m;
            // [H, rho]_{kl} = sum_a H_ka rho_al - sum_b rho_kb H_bl
            for (const auto& [a, v] : hls_[k]) L(s, col(a, l)) += v;
            for (const auto& [b, v] : hls_[l]) L(s, col(k, b)) -= std::conj(v); // H_bl = conj(H_lb)
            // -i * (-1/2 {X, rho})_{kl}
            for (const auto& [a, v] : xk_[k]) L(s, col(a, l)) += 0.5 * I * v;
            for (const auto& [b, v] : xk_[l]) L(s, col(k, b)) += 0.5 * I * std::conj(v);
            // -i * sum K(E_k' - E_k) G_kk' conj(G_ll') rho_k'l'
            for (const auto& t : tables_)
                for (const auto& [kp, gk] : t.g[k]) {
                    const std::size_t wk = bohr_.id(kp, k);
                    for (const auto& [lp, gl] : t.g[l]) {
                        if (bohr_.id(lp, l) != wk) continue;
                        L(s, col(kp, lp)) += -I * t.weight * t.rate.at(wk) * gk * std::conj(gl);
                    }
                }
        }
        return L;
    }

private:
    const BohrSpectrum& bohr_;
    Convention conv_;
    std::size_t n_;
    double lambda_{0.0};
    std::vector<detail::ChannelTable> tables_;
    detail::SparseRows hls_, xk_; // lambda-weighted H_LS (with convention sign) and X
};

inline Matrix level_shift_operator(const SystemSpec& spec, const BohrSpectrum& bohr, std::size_t group,
                                   Convention conv = Convention::Reference) {
    return LevelShiftBuilder(spec, bohr, conv)(group);
}

} // namespace resdyn
