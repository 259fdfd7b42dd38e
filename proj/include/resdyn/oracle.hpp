// oracle.hpp: brute-force reference dynamics of S coupled to a finite bosonic bath
//
// The field is cut to M s-wave modes on a uniform grid. Two exact truncations
// of the bath are available:
//   ThermalFock  - per-mode Fock space up to n_max, initial state the truncated
//                  thermal product state.
//   Thermofield  - each mode doubled into +omega (weight 1+n) and -omega
//                  (weight n) copies in the vacuum, cut at a total number of
//                  excitations. Equivalent to the thermal bath for a linear
//                  coupling before truncation.
// Reduced states come from one eigendecomposition of the truncated H.

#pragma once

#include "resdyn/dynamics.hpp"
#include "resdyn/errors.hpp"
#include "resdyn/form_factor.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/model.hpp"
#include "resdyn/quadrature.hpp"
#include "resdyn/register.hpp"
#include "resdyn/resonances.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace resdyn {

struct TruncatedBath {
    std::vector<double> omega; // mode frequencies, midpoints of the cells
    std::vector<double> kappa; // kappa_k^2 = 4 pi omega_k^2 |g(omega_k)|^2 d omega
    double spacing{0.0};
    double omega_max{0.0};
    int n_max{1};
    double beta{1.0};

    std::size_t modes() const noexcept { return omega.size(); }
    double total_weight() const {
        double s = 0.0;
        for (double k : kappa) s += k * k;
        return s;
    }
    double recurrence_time() const { return 2.0 * pi / spacing; }
};

inline constexpr double bath_weight_tolerance = 0.01;

namespace detail {

inline void require_isotropic(const FormFactor& g) {
    if (!g.angular.is_isotropic())
        fail(ErrorCode::UnsupportedAnisotropy, "bath discretization supports isotropic form factors only");
}

// creation-operator amplitude of phi(g) on each mode (phi = sum (k b^+ + conj(k) b)/sqrt2)
inline std::vector<cplx> mode_amplitudes(const FormFactor& g, const TruncatedBath& bath) {
    require_isotropic(g);
    std::vector<cplx> a(bath.modes(), 0.0);
    if (g.is_zero()) return a;
    const double cell = std::sqrt(4.0 * pi * bath.spacing);
    for (std::size_t k = 0; k < a.size(); ++k)
        a[k] = cell * bath.omega[k] * g.radial(bath.omega[k]) * g.angular.constant();
    return a;
}

inline double bose(double beta, double w) { return 1.0 / std::expm1(beta * w); }

} // namespace detail

inline TruncatedBath discretize_bath(const FormFactor& g, double beta, std::size_t M, double omega_max, int n_max) {
    g.validate();
    detail::require_isotropic(g);
    if (M < 1) fail(ErrorCode::InvalidArgument, "bath needs at least one mode");
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) fail(ErrorCode::InvalidArgument, "omega_max must be positive");
    if (n_max < 1) fail(ErrorCode::InvalidArgument, "Fock cutoff must be at least 1");
    if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorCode::NonPositiveBeta, "beta must be positive");
    TruncatedBath b;
    b.spacing = omega_max / static_cast<double>(M);
    b.omega_max = omega_max;
    b.n_max = n_max;
    b.beta = beta;
    for (std::size_t k = 0; k < M; ++k) b.omega.push_back((static_cast<double>(k) + 0.5) * b.spacing);
    for (const cplx a : detail::mode_amplitudes(g, b)) b.kappa.push_back(std::abs(a));
    if (g.is_zero()) return b;
    const double exact = quad::endpoint_singular([&](double w) { return g.spectral_weight(w); }, 0.0, omega_max);
    const double got = b.total_weight();
    if (!(std::abs(got - exact) <= bath_weight_tolerance * exact)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "discrete weight %.6g differs from continuum %.6g by more than 1%%", got, exact);
        fail(ErrorCode::WeightMismatch, buf);
    }
    return b;
}

// Frequency beyond which the thermal weight J(w) coth(beta w / 2) holds less than
// `tail` of its total.
inline double default_omega_max(const FormFactor& g, double beta, double tail = 1e-4) {
    g.validate();
    if (g.is_zero()) return 1.0;
    const auto f = [&](double w) { return w > 0.0 ? g.spectral_weight(w) / std::tanh(0.5 * beta * w) : 0.0; };
    const double total = quad::half_line(f);
    const auto beyond = [&](double w) { return quad::to_infinity(f, w, {1e-14, 1e-8}); };
    double lo = 0.0, hi = 1.0;
    while (beyond(hi) > tail * total) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (beyond(mid) > tail * total ? lo : hi) = mid;
    }
    return hi;
}

enum class BathRepresentation { Automatic, ThermalFock, Thermofield };

inline std::string to_string(BathRepresentation r) {
    switch (r) {
        case BathRepresentation::ThermalFock: return "thermal-fock";
        case BathRepresentation::Thermofield: return "thermofield";
        default: return "automatic";
    }
}

inline constexpr std::size_t default_oracle_dimension = 2048;
inline constexpr double truncation_warning_level = 1e-4;

struct OracleOptions {
    BathRepresentation representation{BathRepresentation::Automatic};
    int excitation_cap{1}; // thermofield only
    std::size_t max_dimension{default_oracle_dimension};
};

namespace detail {

// Bath basis with the creation moves needed to assemble H.
struct BathSpace {
    struct Move {
        std::size_t from, to, mode;
        double factor; // sqrt(n + 1)
    };
    std::vector<double> energy;      // per basis state
    std::vector<double> probability; // initial bath state, diagonal
    std::vector<Move> moves;
    std::vector<double> mode_energy; // signed
    std::vector<std::size_t> source; // physical mode of each bath mode
    std::vector<double> weight;      // amplitude factor of each bath mode
    std::vector<bool> conjugate;     // negative copies carry conj(kappa)
    std::vector<std::string> warnings;
};

inline double bath_dimension_estimate(BathRepresentation rep, std::size_t M, int n_max, int cap) {
    if (rep == BathRepresentation::ThermalFock) return std::pow(n_max + 1.0, static_cast<double>(M));
    double d = 0.0, term = 1.0; // sum_{j <= cap} C(2M + j - 1, j)
    const double L = 2.0 * static_cast<double>(M);
    for (int j = 0; j <= cap; ++j) {
        if (j > 0) term *= (L + j - 1.0) / j;
        d += term;
    }
    return d;
}

inline BathSpace fock_space(const TruncatedBath& bath) {
    BathSpace s;
    const std::size_t M = bath.modes(), q = static_cast<std::size_t>(bath.n_max) + 1;
    std::size_t B = 1;
    for (std::size_t k = 0; k < M; ++k) B *= q;
    std::vector<std::vector<double>> p(M);
    for (std::size_t k = 0; k < M; ++k) {
        const double w = bath.omega[k];
        s.mode_energy.push_back(w);
        s.source.push_back(k);
        s.weight.push_back(1.0);
        s.conjugate.push_back(false);
        double z = 0.0;
        for (std::size_t n = 0; n < q; ++n) z += std::exp(-bath.beta * w * static_cast<double>(n));
        for (std::size_t n = 0; n < q; ++n) p[k].push_back(std::exp(-bath.beta * w * static_cast<double>(n)) / z);
        const double tail = std::exp(-bath.beta * w * static_cast<double>(q));
        if (tail > truncation_warning_level && s.warnings.empty()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "TruncationWarning: thermal tail %.2e beyond n_max at omega = %.4g", tail, w);
            s.warnings.push_back(buf);
        }
    }
    s.energy.assign(B, 0.0);
    s.probability.assign(B, 1.0);
    for (std::size_t idx = 0; idx < B; ++idx) {
        std::size_t rest = idx, stride = 1;
        for (std::size_t k = 0; k < M; ++k) {
            const std::size_t n = rest % q;
            rest /= q;
            s.energy[idx] += bath.omega[k] * static_cast<double>(n);
            s.probability[idx] *= p[k][n];
            if (n + 1 < q) s.moves.push_back({idx, idx + stride, k, std::sqrt(static_cast<double>(n + 1))});
            stride *= q;
        }
    }
    return s;
}

inline BathSpace thermofield_space(const TruncatedBath& bath, int cap) {
    BathSpace s;
    const std::size_t M = bath.modes();
    for (std::size_t k = 0; k < M; ++k) {
        const double n = bose(bath.beta, bath.omega[k]);
        s.mode_energy.push_back(bath.omega[k]);
        s.source.push_back(k);
        s.weight.push_back(std::sqrt(1.0 + n));
        s.conjugate.push_back(false);
    }
    for (std::size_t k = 0; k < M; ++k) {
        s.mode_energy.push_back(-bath.omega[k]);
        s.source.push_back(k);
        s.weight.push_back(std::sqrt(bose(bath.beta, bath.omega[k])));
        s.conjugate.push_back(true);
    }
    const std::size_t L = 2 * M;
    // states as nondecreasing lists of occupied modes
    using State = std::vector<std::uint16_t>;
    std::vector<State> states{State{}};
    std::map<State, std::size_t> index{{State{}, 0}};
    std::size_t begin = 0;
    for (int level = 1; level <= cap; ++level) {
        const std::size_t end = states.size();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t first = states[i].empty() ? 0 : states[i].back();
            for (std::size_t m = first; m < L; ++m) {
                State t = states[i];
                t.push_back(static_cast<std::uint16_t>(m));
                index.emplace(t, states.size());
                states.push_back(std::move(t));
            }
        }
        begin = end;
    }
    s.energy.assign(states.size(), 0.0);
    s.probability.assign(states.size(), 0.0);
    s.probability[0] = 1.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (auto m : states[i]) s.energy[i] += s.mode_energy[m];
        if (static_cast<int>(states[i].size()) == cap) continue;
        for (std::size_t m = 0; m < L; ++m) {
            State t = states[i];
            t.insert(std::upper_bound(t.begin(), t.end(), static_cast<std::uint16_t>(m)), static_cast<std::uint16_t>(m));
            const auto n = static_cast<double>(std::count(states[i].begin(), states[i].end(), m));
            s.moves.push_back({i, index.at(t), m, std::sqrt(n + 1.0)});
        }
    }
    return s;
}

} // namespace detail

inline Trajectory exact_evolve(const SystemSpec& spec, const TruncatedBath& bath, const Matrix& rho0,
                               const std::vector<double>& times, OracleOptions opt = {}) {
    detail::require_state(spec, rho0);
    detail::require_times(times);
    if (std::abs(spec.beta() - bath.beta) > 1e-12 * spec.beta())
        fail(ErrorCode::InvalidArgument, "bath and system temperatures differ");
    if (opt.excitation_cap < 1) fail(ErrorCode::InvalidArgument, "excitation cap must be at least 1");
    const std::size_t N = spec.dim(), M = bath.modes();
    auto rep = opt.representation;
    if (rep == BathRepresentation::Automatic)
        rep = static_cast<double>(N) * detail::bath_dimension_estimate(BathRepresentation::ThermalFock, M, bath.n_max, 0) <=
                      static_cast<double>(opt.max_dimension)
                  ? BathRepresentation::ThermalFock
                  : BathRepresentation::Thermofield;
    const double dim_estimate =
        static_cast<double>(N) * detail::bath_dimension_estimate(rep, M, bath.n_max, opt.excitation_cap);
    if (dim_estimate > static_cast<double>(opt.max_dimension))
        fail(ErrorCode::DimensionTooLarge, "oracle dimension " + std::to_string(static_cast<long long>(dim_estimate)) +
                                               " exceeds " + std::to_string(opt.max_dimension));
    const detail::BathSpace bs =
        rep == BathRepresentation::ThermalFock ? detail::fock_space(bath) : detail::thermofield_space(bath, opt.excitation_cap);
    const auto Bn = static_cast<Eigen::Index>(bs.energy.size());
    const auto n = static_cast<Eigen::Index>(N);
    const Eigen::Index D = n * Bn;

    // coupling operator per bath mode: X_m = sum_r lambda_r w_m kappa_rm G_r / sqrt2
    std::vector<std::vector<cplx>> amps;
    for (const auto& c : spec.couplings()) amps.push_back(detail::mode_amplitudes(c.form_factor, bath));
    std::vector<Matrix> X(bs.mode_energy.size(), Matrix::Zero(n, n));
    for (std::size_t m = 0; m < X.size(); ++m)
        for (std::size_t r = 0; r < amps.size(); ++r) {
            cplx a = amps[r][bs.source[m]];
            if (bs.conjugate[m]) a = std::conj(a);
            X[m] += (spec.couplings()[r].strength * bs.weight[m] / std::sqrt(2.0)) * a * spec.couplings()[r].matrix;
        }

    Matrix H = Matrix::Zero(D, D);
    for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index b = 0; b < Bn; ++b)
            H(s * Bn + b, s * Bn + b) = spec.energies()[static_cast<std::size_t>(s)] + bs.energy[static_cast<std::size_t>(b)];
    for (const auto& mv : bs.moves) {
        const Matrix& x = X[mv.mode];
        const auto from = static_cast<Eigen::Index>(mv.from), to = static_cast<Eigen::Index>(mv.to);
        for (Eigen::Index s = 0; s < n; ++s)
            for (Eigen::Index sp = 0; sp < n; ++sp) {
                const cplx v = mv.factor * x(s, sp);
                if (v == 0.0) continue;
                H(s * Bn + to, sp * Bn + from) += v;
                H(sp * Bn + from, s * Bn + to) += std::conj(v);
            }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    if (es.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "oracle Hamiltonian diagonalization failed");
    const Matrix& V = es.eigenvectors();
    const Eigen::VectorXd& E = es.eigenvalues();

    // R = V^+ (rho0 (x) p) V
    Matrix Z(D, D);
    for (Eigen::Index a = 0; a < n; ++a) {
        Matrix rows = Matrix::Zero(Bn, D);
        for (Eigen::Index c = 0; c < n; ++c)
            if (rho0(a, c) != 0.0) rows += rho0(a, c) * V.middleRows(c * Bn, Bn);
        for (Eigen::Index b = 0; b < Bn; ++b) rows.row(b) *= bs.probability[static_cast<std::size_t>(b)];
        Z.middleRows(a * Bn, Bn) = rows;
    }
    const Matrix R = V.adjoint() * Z;
    Z.resize(0, 0);

    // rho_S(t)_ab = phi^T P_ab conj(phi), P_ab = R .* (V_a^T conj(V_b)), a <= b
    std::vector<std::pair<Eigen::Index, Eigen::Index>> ab;
    std::vector<Matrix> P;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a; b < n; ++b) {
            ab.emplace_back(a, b);
            Matrix q = V.middleRows(a * Bn, Bn).transpose() * V.middleRows(b * Bn, Bn).conjugate();
            P.push_back(R.cwiseProduct(q));
        }

    Trajectory tr;
    tr.times = times;
    tr.warnings = bs.warnings;
    if (!times.empty() && times.back() > bath.recurrence_time()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "times exceed the bath recurrence time 2 pi / d omega = %.4g", bath.recurrence_time());
        tr.warnings.push_back(buf);
    }
    Eigen::VectorXcd phi(D);
    for (double t : times) {
        for (Eigen::Index i = 0; i < D; ++i) phi(i) = std::exp(-I * (E(i) * t));
        const Eigen::VectorXcd cphi = phi.conjugate();
        Matrix r(n, n);
        for (std::size_t k = 0; k < ab.size(); ++k) {
            const auto [a, b] = ab[k];
            const cplx v = phi.transpose() * (P[k] * cphi);
            r(a, b) = v;
            r(b, a) = std::conj(v);
            if (a == b) r(a, a) = v.real();
        }
        tr.states.push_back(std::move(r));
    }
    // tail average over the last tenth of the grid
    tr.ergodic_mean = Matrix::Zero(n, n);
    if (!tr.states.empty()) {
        const std::size_t from = tr.states.size() - std::max<std::size_t>(1, tr.states.size() / 10);
        for (std::size_t k = from; k < tr.states.size(); ++k) tr.ergodic_mean += tr.states[k];
        tr.ergodic_mean /= static_cast<double>(tr.states.size() - from);
    }
    return tr;
}

// ------------------------------------------------------------- decay fit

struct FitResult {
    double rate{0.0};
    double frequency{0.0};
    double amplitude{0.0};
    cplx asymptote{0.0};
    double residual{0.0};
    std::pair<double, double> window{0.0, 0.0};
};

struct FitOptions {
    double t_min{0.0};
    double max_residual{0.05};
    std::size_t min_samples{20};
};

namespace detail {

// best asymptote and amplitude for z ~ a + A exp((i w - g) t); returns the residual norm^2
inline double project_decay(const std::vector<double>& t, const std::vector<cplx>& z, double w, double g, cplx& a,
                            cplx& A) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Matrix basis(n, 2);
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double tk = t[static_cast<std::size_t>(k)] - t.front();
        basis(k, 0) = 1.0;
        basis(k, 1) = std::exp(cplx(-g, w) * tk);
        rhs(k) = z[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXcd c = basis.colPivHouseholderQr().solve(rhs);
    a = c(0);
    A = c(1);
    return (basis * c - rhs).squaredNorm();
}

} // namespace detail

// Fit of [rho_t]_{kl} (0-based) to a + A exp((i w - g) t). The tail average
// and weighted log-linear slopes seed a Levenberg-Marquardt refinement over (w, g).
inline FitResult fit_decay(const Trajectory& tr, std::size_t k, std::size_t l, FitOptions opt = {}) {
    std::vector<double> t;
    std::vector<cplx> z;
    for (std::size_t s = 0; s < tr.times.size(); ++s)
        if (tr.times[s] >= opt.t_min) {
            t.push_back(tr.times[s]);
            z.push_back(tr.states[s](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
        }
    if (t.size() < opt.min_samples)
        fail(ErrorCode::InvalidArgument, "decay fit needs at least " + std::to_string(opt.min_samples) + " samples");
    FitResult fr;
    fr.window = {t.front(), t.back()};
    const std::size_t n = t.size();
    cplx mean = 0.0;
    double scale = 0.0;
    for (const cplx v : z) mean += v;
    mean /= static_cast<double>(n);
    for (const cplx v : z) scale = std::max(scale, std::abs(v - mean));
    if (scale <= 1e-12 * std::max(1.0, std::abs(mean))) {
        fr.asymptote = mean;
        return fr;
    }

    // seeds
    const std::size_t ntail = std::max<std::size_t>(1, n / 10);
    cplx tail = 0.0;
    for (std::size_t s = n - ntail; s < n; ++s) tail += z[s];
    tail /= static_cast<double>(ntail);
    double sw = 0, st = 0, stt = 0, sl = 0, stl = 0, sp = 0, stp = 0, prev = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const cplx d = z[s] - tail;
        const double w = std::norm(d);
        if (w == 0.0) continue;
        double ph = std::arg(d);
        if (s > 0) ph = prev + std::remainder(ph - prev, 2.0 * pi);
        prev = ph;
        const double ts = t[s] - t.front();
        sw += w;
        st += w * ts;
        stt += w * ts * ts;
        sl += w * std::log(std::abs(d));
        stl += w * ts * std::log(std::abs(d));
        sp += w * ph;
        stp += w * ts * ph;
    }
    const double det = sw * stt - st * st;
    double g = det > 0 ? -(sw * stl - st * sl) / det : 0.0;
    double w = det > 0 ? (sw * stp - st * sp) / det : 0.0;

    cplx a, A;
    auto cost = [&](double ww, double gg) { return detail::project_decay(t, z, ww, gg, a, A); };
    double c0 = cost(w, g);
    const double T = t.back() - t.front();
    double mu = 1e-3;
    for (int it = 0; it < 200; ++it) {
        // finite-difference gradient and Gauss-Newton-like Hessian of the projected cost
        const double hw = 1e-6 / T + 1e-7 * std::abs(w), hg = 1e-6 / T + 1e-7 * std::abs(g);
        const double cwp = cost(w + hw, g), cwm = cost(w - hw, g), cgp = cost(w, g + hg), cgm = cost(w, g - hg);
        const double cpp = cost(w + hw, g + hg), cpm = cost(w + hw, g - hg), cmp = cost(w - hw, g + hg),
                     cmm = cost(w - hw, g - hg);
        const double gw = (cwp - cwm) / (2 * hw), gg = (cgp - cgm) / (2 * hg);
        double Hww = (cwp - 2 * c0 + cwm) / (hw * hw), Hgg = (cgp - 2 * c0 + cgm) / (hg * hg);
        const double Hwg = (cpp - cpm - cmp + cmm) / (4 * hw * hg);
        bool moved = false;
        for (int tries = 0; tries < 30 && !moved; ++tries) {
            const double aww = std::abs(Hww) * (1 + mu) + 1e-300, agg = std::abs(Hgg) * (1 + mu) + 1e-300;
            const double dd = aww * agg - Hwg * Hwg;
            double dw, dg;
            if (dd > 0) {
                dw = -(agg * gw - Hwg * gg) / dd;
                dg = -(aww * gg - Hwg * gw) / dd;
            } else {
                dw = -gw / aww;
                dg = -gg / agg;
            }
            const double c1 = cost(w + dw, g + dg);
            if (c1 < c0) {
                w += dw;
                g += dg;
                const bool small = c0 - c1 <= 1e-15 * c0 + 1e-300;
                c0 = c1;
                mu = std::max(mu / 3, 1e-9);
                moved = true;
                if (small) it = 200;
            } else {
                mu *= 4;
            }
        }
        if (!moved) break;
    }
    c0 = cost(w, g);
    fr.rate = g;
    fr.frequency = w;
    fr.amplitude = std::abs(A);
    fr.asymptote = a;
    fr.residual = std::sqrt(c0 / static_cast<double>(n)) / std::max(std::abs(A), 1e-300);
    if (!(fr.residual <= opt.max_residual)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "relative residual %.3g above %.3g", fr.residual, opt.max_residual);
        fail(ErrorCode::PoorFit, buf);
    }
    if (g < -1e-9 / T) fail(ErrorCode::PoorFit, "fitted amplitude grows");
    fr.rate = std::max(g, 0.0);
    return fr;
}

// ------------------------------------------------------------- verification

struct VerifyConfig {
    std::size_t modes{150};
    double omega_max{0.0}; // 0: default_omega_max
    int n_max{3};
    std::vector<double> lambdas{0.01, 0.02};
    double rate_tolerance{0.2};
    double exponent_tolerance{0.1};
    double t_max{0.0};        // 0: 0.9 of the bath recurrence time
    double fit_from{5.0};     // skip the initial bath transient
    std::size_t samples{400};
    Convention convention{Convention::Reference};
    OracleOptions oracle{};
};

struct VerifyCheck {
    std::string name;
    double measured{0.0};
    double expected{0.0};
    double deviation{0.0};
    double tolerance{0.0};
    bool pass{false};
    std::string note;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    std::vector<std::string> warnings;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
};

namespace detail {

inline std::string lambda_tag(double l) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", l);
    return buf;
}

inline Matrix gibbs_state(const SystemSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.dim());
    const double e0 = *std::min_element(spec.energies().begin(), spec.energies().end());
    Matrix g = Matrix::Zero(n, n);
    double z = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) z += std::exp(-spec.beta() * (spec.energies()[k] - e0));
    for (Eigen::Index k = 0; k < n; ++k) g(k, k) = std::exp(-spec.beta() * (spec.energies()[k] - e0)) / z;
    return g;
}

} // namespace detail

// Oracle-versus-theory comparison for a spec with one coupling channel whose
// strength is replaced by each lambda in turn. Rates are read off element (0, 1).
inline VerifyReport verify(const SystemSpec& tmpl, const Matrix& rho0, const VerifyConfig& cfg = {}) {
    if (tmpl.couplings().size() != 1) fail(ErrorCode::InvalidArgument, "verify expects exactly one coupling channel");
    if (tmpl.dim() < 2) fail(ErrorCode::InvalidArgument, "verify needs at least two levels");
    VerifyReport rep;
    const FormFactor& g = tmpl.couplings()[0].form_factor;
    const double wmax = cfg.omega_max > 0.0 ? cfg.omega_max : default_omega_max(g, tmpl.beta());
    TruncatedBath bath;
    try {
        bath = discretize_bath(g, tmpl.beta(), cfg.modes, wmax, cfg.n_max);
    } catch (const Error& e) {
        rep.checks.push_back({"bath_discretization", 0, 0, 0, bath_weight_tolerance, false, e.what()});
        return rep;
    }
    const double tmax = cfg.t_max > 0.0 ? cfg.t_max : 0.9 * bath.recurrence_time();
    std::vector<double> times;
    for (std::size_t k = 0; k < cfg.samples; ++k)
        times.push_back(tmax * static_cast<double>(k) / static_cast<double>(cfg.samples - 1));
    const Matrix gibbs = detail::gibbs_state(tmpl);
    const double e01 = tmpl.energies()[1] - tmpl.energies()[0];

    std::vector<double> lam, rate;
    for (const double l : cfg.lambdas) {
        const SystemSpec spec = tmpl.with_strengths({l});
        const std::string tag = detail::lambda_tag(l);
        Trajectory ex;
        try {
            ex = exact_evolve(spec, bath, rho0, times, cfg.oracle);
        } catch (const Error& e) {
            rep.checks.push_back({"oracle_lambda_" + tag, 0, 0, 0, 0, false, e.what()});
            continue;
        }
        for (const auto& w : ex.warnings) rep.warnings.push_back("lambda " + tag + ": " + w);
        const ResonanceOptions ro{cfg.convention, 0, 0.0};
        const ResonanceSet res = resonance_energies(spec, ro);
        const Trajectory th = l == 0.0 ? free_evolution(spec, rho0, times) : resonance_evolution(res, rho0, times);

        double dev = 0.0, lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < times.size(); ++k) {
            dev = std::max(dev, max_abs(ex.states[k] - th.states[k]));
            for (Eigen::Index i = 0; i < ex.states[k].size(); ++i) {
                lo = std::min({lo, ex.states[k](i).real(), ex.states[k](i).imag()});
                hi = std::max({hi, ex.states[k](i).real(), ex.states[k](i).imag()});
            }
        }
        const double tol = l == 0.0 ? 1e-10 : std::max(5 * l * l, 0.05 * (hi - lo));
        rep.checks.push_back({"trajectory_lambda_" + tag, dev, 0.0, dev, tol, dev <= tol, ""});
        if (l == 0.0) continue;

        const double expected = res.at(e01).gamma;
        VerifyCheck rc{"rate_lambda_" + tag, 0.0, expected, 0.0, cfg.rate_tolerance, false, ""};
        try {
            FitOptions fo;
            fo.t_min = cfg.fit_from;
            const FitResult f = fit_decay(ex, 0, 1, fo);
            rc.measured = f.rate;
            rc.deviation = expected > 0.0 ? std::abs(f.rate - expected) / expected : std::abs(f.rate);
            rc.pass = rc.deviation <= cfg.rate_tolerance;
            lam.push_back(l);
            rate.push_back(f.rate);
        } catch (const Error& e) {
            rc.note = e.what();
        }
        rep.checks.push_back(rc);

        double pdev = 0.0;
        for (Eigen::Index k = 0; k < gibbs.rows(); ++k)
            pdev = std::max(pdev, std::abs(ex.states.back()(k, k).real() - gibbs(k, k).real()));
        const double ptol = std::max(0.05, 5 * l * l);
        rep.checks.push_back({"gibbs_lambda_" + tag, ex.states.back()(0, 0).real(), gibbs(0, 0).real(), pdev, ptol,
                              pdev <= ptol, "populations at t = " + detail::lambda_tag(tmax)});
    }
    if (lam.size() >= 2) {
        VerifyCheck ec{"lambda_exponent", 0.0, 2.0, 0.0, cfg.exponent_tolerance, false, ""};
        try {
            ec.measured = fit_power_law(lam, rate).exponent;
            ec.deviation = std::abs(ec.measured - 2.0);
            ec.pass = ec.deviation <= cfg.exponent_tolerance;
        } catch (const Error& e) {
            ec.note = e.what();
        }
        rep.checks.push_back(ec);
    }
    return rep;
}

} // namespace resdyn
