// dynamics.hpp: reduced density-matrix evolution from resonance data
//
// Coordinates follow bohr.hpp: rho_{kl} belongs to the group of e = E_l - E_k
// and evolves as exp(i t e) freely, as a combination of exp(i t eps_e^(s)) under
// the coupling. Only the lowest-order reconstruction is computed.

#pragma once

#include "resdyn/bohr.hpp"
#include "resdyn/errors.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/model.hpp"
#include "resdyn/reservoir.hpp"
#include "resdyn/resonances.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace resdyn {

struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> states;
    Matrix ergodic_mean;
    std::vector<std::string> warnings;

    double max_trace_defect() const {
        double d = 0.0;
        for (const auto& s : states) d = std::max(d, std::abs(s.trace() - 1.0));
        return d;
    }
    double max_hermiticity_defect() const {
        double d = 0.0;
        for (const auto& s : states) d = std::max(d, hermiticity_defect(s));
        return d;
    }
    std::vector<cplx> element(std::size_t k, std::size_t l) const {
        std::vector<cplx> v;
        for (const auto& s : states) v.push_back(s(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
        return v;
    }
};

namespace detail {

inline void require_times(const std::vector<double>& times) {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (!std::isfinite(times[k]) || times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1])))
            fail(ErrorCode::InvalidArgument, "times must be finite, nonnegative and increasing");
}

inline void require_state(const SystemSpec& spec, const Matrix& rho) {
    if (static_cast<std::size_t>(rho.rows()) != spec.dim() || rho.rows() != rho.cols())
        fail(ErrorCode::DimensionMismatch, "initial state does not match the system dimension");
}

} // namespace detail

// One Bohr group of the lowest-order propagator.
struct PropagatorBlock {
    std::size_t group{0};
    double e{0.0};
    std::vector<IndexPair> pairs;
    std::vector<cplx> epsilons;
    Matrix right, left;

    // w^{(s)}: the spectral projection of mode s
    Matrix mixing(std::size_t s) const {
        const auto i = static_cast<Eigen::Index>(s);
        return right.col(i) * left.row(i);
    }

    Vector coordinates(const Matrix& rho) const {
        Vector x(static_cast<Eigen::Index>(pairs.size()));
        for (std::size_t s = 0; s < pairs.size(); ++s)
            x(static_cast<Eigen::Index>(s)) = rho(static_cast<Eigen::Index>(pairs[s].n), static_cast<Eigen::Index>(pairs[s].m));
        return x;
    }

    void scatter(const Vector& x, Matrix& rho) const {
        for (std::size_t s = 0; s < pairs.size(); ++s)
            rho(static_cast<Eigen::Index>(pairs[s].n), static_cast<Eigen::Index>(pairs[s].m)) = x(static_cast<Eigen::Index>(s));
    }
};

inline std::vector<PropagatorBlock> propagator_blocks(const ResonanceSet& res) {
    std::vector<PropagatorBlock> blocks;
    for (const auto& r : res.groups) blocks.push_back({r.group, r.e, r.pairs, r.epsilons, r.right, r.left});
    return blocks;
}

inline Trajectory free_evolution(const SystemSpec& spec, const Matrix& rho0, const std::vector<double>& times) {
    detail::require_state(spec, rho0);
    detail::require_times(times);
    const auto& E = spec.energies();
    const auto n = static_cast<Eigen::Index>(spec.dim());
    Trajectory tr;
    tr.times = times;
    for (double t : times) {
        Matrix r(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index l = 0; l < n; ++l) {
                const double e = E[static_cast<std::size_t>(l)] - E[static_cast<std::size_t>(k)];
                r(k, l) = std::exp(I * (t * e)) * rho0(k, l);
            }
        tr.states.push_back(std::move(r));
    }
    const auto bohr = bohr_spectrum(spec);
    tr.ergodic_mean = Matrix::Zero(n, n);
    for (const auto& p : bohr.group(bohr.zero_group()).pairs) {
        const auto k = static_cast<Eigen::Index>(p.n), l = static_cast<Eigen::Index>(p.m);
        tr.ergodic_mean(k, l) = rho0(k, l);
    }
    return tr;
}

// Sum of the eps = 0 mode contributions.
inline Matrix ergodic_mean(const std::vector<PropagatorBlock>& blocks, const Matrix& rho0) {
    Matrix out = Matrix::Zero(rho0.rows(), rho0.cols());
    for (const auto& b : blocks) {
        const Vector c = b.left * b.coordinates(rho0);
        Vector x = Vector::Zero(c.size());
        for (std::size_t s = 0; s < b.epsilons.size(); ++s)
            if (std::abs(b.epsilons[s]) <= zero_resonance_tolerance) x += b.right.col(static_cast<Eigen::Index>(s)) * c(static_cast<Eigen::Index>(s));
        b.scatter(x, out);
    }
    return out;
}

inline Matrix ergodic_mean(const SystemSpec& spec, const Matrix& rho0, ResonanceOptions opt = {}) {
    detail::require_state(spec, rho0);
    return ergodic_mean(propagator_blocks(resonance_energies(spec, opt)), rho0);
}

inline Trajectory resonance_evolution(const ResonanceSet& res, const Matrix& rho0, const std::vector<double>& times) {
    detail::require_times(times);
    if (static_cast<std::size_t>(rho0.rows()) != res.bohr.dim() || rho0.rows() != rho0.cols())
        fail(ErrorCode::DimensionMismatch, "initial state does not match the system dimension");
    Trajectory tr;
    tr.times = times;
    const auto rep = check_nonoverlap(res);
    if (rep.margin < 1.0)
        fail(ErrorCode::InvalidArgument, "resonances overlap (margin " + std::to_string(rep.margin) + " < 1)");
    if (!rep.pass) tr.warnings.push_back("non-overlap margin " + std::to_string(rep.margin) + " below 10");

    const auto blocks = propagator_blocks(res);
    std::vector<Vector> coeff;
    for (const auto& b : blocks) coeff.push_back(b.left * b.coordinates(rho0));
    const auto n = rho0.rows();
    for (double t : times) {
        Matrix r = Matrix::Zero(n, n);
        for (std::size_t g = 0; g < blocks.size(); ++g) {
            const auto& b = blocks[g];
            Vector c = coeff[g];
            for (std::size_t s = 0; s < b.epsilons.size(); ++s) c(static_cast<Eigen::Index>(s)) *= std::exp(I * (t * b.epsilons[s]));
            b.scatter(b.right * c, r);
        }
        tr.states.push_back(std::move(r));
    }
    tr.ergodic_mean = ergodic_mean(blocks, rho0);
    return tr;
}

inline Trajectory resonance_evolution(const SystemSpec& spec, const Matrix& rho0, const std::vector<double>& times,
                                      ResonanceOptions opt = {}) {
    detail::require_state(spec, rho0);
    return resonance_evolution(resonance_energies(spec, opt), rho0, times);
}

// Closed-form second-order qubit resonances in the reference normalization.
struct QubitResonances {
    cplx eps0, eps_delta;
    double R;
};

inline QubitResonances qubit_resonances(double a, double b, cplx c, double delta, const FormFactor& g, double beta,
                                        double lambda) {
    const double c2 = std::norm(c), l2 = lambda * lambda, pi2 = pi * pi;
    const double xd = xi(g, beta, std::abs(delta));
    const double x0 = (a == b) ? 0.0 : xi(g, beta, 0.0);
    const double mif = (a * a == b * b) ? 0.0 : mean_inverse_frequency(g);
    const double R = 0.5 * (b * b - a * a) * mif + 0.5 * c2 * pv_energy_shift(g, beta, delta);
    QubitResonances q;
    q.R = R;
    q.eps0 = I * (l2 * pi2 * c2 * xd);
    q.eps_delta = delta + l2 * R + 0.5 * I * l2 * pi2 * (c2 * xd + (b - a) * (b - a) * x0);
    return q;
}

// Energies (0, delta); populations relax as Gibbs + (p(0) - Gibbs) exp(i t eps_0),
// rho_12 rotates with eps_delta. Remainder terms are dropped.
inline Trajectory single_qubit_closed_form(double a, double b, cplx c, double delta, const FormFactor& g, double beta,
                                           double lambda, const Matrix& rho0, const std::vector<double>& times) {
    detail::require_beta(beta);
    detail::require_times(times);
    if (rho0.rows() != 2 || rho0.cols() != 2) fail(ErrorCode::DimensionMismatch, "qubit state must be 2x2");
    const auto q = qubit_resonances(a, b, c, delta, g, beta, lambda);
    const double z = 1.0 + std::exp(-beta * delta);
    const double gibbs1 = 1.0 / z, gibbs2 = std::exp(-beta * delta) / z;
    Trajectory tr;
    tr.times = times;
    for (double t : times) {
        const cplx decay = std::exp(I * (t * q.eps0));
        Matrix r(2, 2);
        r(0, 0) = gibbs1 + (rho0(0, 0) - gibbs1) * decay;
        r(1, 1) = gibbs2 + (rho0(1, 1) - gibbs2) * decay;
        r(0, 1) = rho0(0, 1) * std::exp(I * (t * q.eps_delta));
        r(1, 0) = rho0(1, 0) * std::exp(I * (t * -std::conj(q.eps_delta)));
        tr.states.push_back(std::move(r));
    }
    tr.ergodic_mean = Matrix::Zero(2, 2);
    if (std::abs(q.eps0) > zero_resonance_tolerance) {
        tr.ergodic_mean(0, 0) = gibbs1;
        tr.ergodic_mean(1, 1) = gibbs2;
    } else {
        tr.ergodic_mean(0, 0) = rho0(0, 0);
        tr.ergodic_mean(1, 1) = rho0(1, 1);
    }
    return tr;
}

} // namespace resdyn
