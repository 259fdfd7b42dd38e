// resonances.hpp: resonance energies eps = e + lambda^2 delta from the level-shift operators

#pragma once

#include "resdyn/bohr.hpp"
#include "resdyn/errors.hpp"
#include "resdyn/level_shift.hpp"
#include "resdyn/linalg.hpp"
#include "resdyn/model.hpp"
#include "resdyn/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace resdyn {

inline constexpr double zero_resonance_tolerance = 1e-12;
inline constexpr double distinct_eigenvalue_tolerance = 1e-10;
inline constexpr double max_eigenvector_condition = 1e8;

struct ResonanceData {
    std::size_t group{0};
    double e{0.0};
    std::vector<IndexPair> pairs;
    Matrix Lambda;
    std::vector<cplx> deltas;
    std::vector<cplx> epsilons;
    std::size_t nu{0};
    Matrix right; // columns: right eigenvectors
    Matrix left;  // rows: dual basis, left * right = 1
    double gamma{0.0};
    double condition{1.0};
    std::string warning;
};

struct ResonanceOptions {
    Convention convention{Convention::Reference};
    std::size_t threads{0};
    double bohr_tolerance{0.0};
};

namespace detail {

// connected components of the sparsity graph of L
inline std::vector<std::vector<Eigen::Index>> components(const Matrix& L) {
    const Eigen::Index d = L.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(d));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    const auto root = [&](Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        return i;
    };
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (i != j && L(i, j) != cplx(0.0)) parent[static_cast<std::size_t>(root(i))] = root(j);
    std::vector<std::vector<Eigen::Index>> out;
    std::vector<Eigen::Index> label(static_cast<std::size_t>(d), -1);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Eigen::Index r = root(i);
        if (label[static_cast<std::size_t>(r)] < 0) {
            label[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(label[static_cast<std::size_t>(r)])].push_back(i);
    }
    return out;
}

inline std::size_t count_distinct(std::vector<cplx> v, double tol) {
    if (v.empty()) return 0;
    // single linkage on the complex plane
    std::vector<int> cluster(v.size(), -1);
    int nc = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (cluster[i] >= 0) continue;
        cluster[i] = nc;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < v.size(); ++b)
                if (cluster[b] < 0 && std::abs(v[a] - v[b]) <= tol) {
                    cluster[b] = nc;
                    stack.push_back(b);
                }
        }
        ++nc;
    }
    return static_cast<std::size_t>(nc);
}

inline ResonanceData diagonalize_group(const LevelShiftBuilder& builder, std::size_t g) {
    const BohrSpectrum& bohr = builder.bohr();
    ResonanceData r;
    r.group = g;
    r.e = bohr.group(g).e;
    r.pairs = bohr.group(g).pairs;
    r.Lambda = builder(g);
    const Eigen::Index d = r.Lambda.rows();
    r.right = Matrix::Zero(d, d);
    r.left = Matrix::Zero(d, d);
    std::vector<cplx> delta(static_cast<std::size_t>(d));

    for (const auto& comp : components(r.Lambda)) {
        const auto k = static_cast<Eigen::Index>(comp.size());
        if (k == 1) {
            const Eigen::Index i = comp[0];
            delta[static_cast<std::size_t>(i)] = r.Lambda(i, i);
            r.right(i, i) = 1.0;
            r.left(i, i) = 1.0;
            continue;
        }
        Matrix sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = r.Lambda(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]);
        Eigen::ComplexEigenSolver<Matrix> es(sub);
        if (es.info() != Eigen::Success) fail(ErrorCode::DefectiveLevelShift, "eigensolver failed");
        Matrix V = es.eigenvectors();
        for (Eigen::Index c = 0; c < k; ++c) V.col(c).normalize();
        Eigen::PartialPivLU<Matrix> lu(V);
        const Matrix W = lu.inverse();
        const double cond = V.cwiseAbs().colwise().sum().maxCoeff() * W.cwiseAbs().colwise().sum().maxCoeff();
        r.condition = std::max(r.condition, cond);
        if (!std::isfinite(cond) || cond > max_eigenvector_condition)
            fail(ErrorCode::DefectiveLevelShift,
                 "level-shift operator at e = " + std::to_string(r.e) + " is not diagonalizable (cond " + std::to_string(cond) + ")");
        // the s-th mode of the component is stored at position comp[s]
        for (Eigen::Index s = 0; s < k; ++s) {
            delta[static_cast<std::size_t>(comp[static_cast<std::size_t>(s)])] = es.eigenvalues()(s);
            for (Eigen::Index a = 0; a < k; ++a) {
                r.right(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(s)]) = V(a, s);
                r.left(comp[static_cast<std::size_t>(s)], comp[static_cast<std::size_t>(a)]) = W(s, a);
            }
        }
    }

    // deterministic mode order: by Im delta, then Re delta
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const cplx x = delta[static_cast<std::size_t>(a)], y = delta[static_cast<std::size_t>(b)];
        if (std::abs(x.imag() - y.imag()) > 1e-14) return x.imag() < y.imag();
        return x.real() < y.real();
    });
    Matrix R(d, d), Lf(d, d);
    const double l2 = builder.lambda() * builder.lambda();
    for (Eigen::Index s = 0; s < d; ++s) {
        const Eigen::Index o = order[static_cast<std::size_t>(s)];
        R.col(s) = r.right.col(o);
        Lf.row(s) = r.left.row(o);
        r.deltas.push_back(delta[static_cast<std::size_t>(o)]);
        r.epsilons.push_back(r.e + l2 * delta[static_cast<std::size_t>(o)]);
    }
    r.right = std::move(R);
    r.left = std::move(Lf);
    r.nu = count_distinct(r.deltas, distinct_eigenvalue_tolerance);

    double gamma = std::numeric_limits<double>::infinity();
    for (const cplx& eps : r.epsilons)
        if (std::abs(eps) > zero_resonance_tolerance) gamma = std::min(gamma, eps.imag());
    if (!std::isfinite(gamma)) {
        r.gamma = 0.0;
        r.warning = "no nonzero resonance in this group";
    } else if (gamma <= zero_resonance_tolerance) {
        r.gamma = std::max(gamma, 0.0);
        r.warning = "second-order decay rate vanishes; true decay is of higher order";
    } else {
        r.gamma = gamma;
    }
    return r;
}

} // namespace detail

struct ResonanceSet {
    BohrSpectrum bohr;
    std::vector<ResonanceData> groups; // sorted by e
    double lambda{0.0};
    Convention convention{Convention::Reference};

    const ResonanceData& at(double e) const {
        const std::size_t g = bohr.find(e);
        if (g >= groups.size()) fail(ErrorCode::InvalidArgument, "no Bohr group at e = " + std::to_string(e));
        return groups[g];
    }
};

inline ResonanceSet resonance_energies(const SystemSpec& spec, ResonanceOptions opt = {}) {
    ResonanceSet out{bohr_spectrum(spec, opt.bohr_tolerance), {}, spec.coupling_scale(), opt.convention};
    const LevelShiftBuilder builder(spec, out.bohr, opt.convention);
    out.groups.resize(out.bohr.size());
    parallel_for(out.bohr.size(), [&](std::size_t g) { out.groups[g] = detail::diagonalize_group(builder, g); },
                 opt.threads);
    return out;
}

struct NonOverlapReport {
    double margin{std::numeric_limits<double>::infinity()};
    double min_gap{std::numeric_limits<double>::infinity()};
    double max_shift{0.0};
    bool pass{true};
};

inline NonOverlapReport check_nonoverlap(const ResonanceSet& res, double threshold = 10.0) {
    NonOverlapReport rep;
    for (std::size_t g = 1; g < res.groups.size(); ++g)
        rep.min_gap = std::min(rep.min_gap, res.groups[g].e - res.groups[g - 1].e);
    const double l2 = res.lambda * res.lambda;
    for (const auto& r : res.groups)
        for (const cplx& d : r.deltas) rep.max_shift = std::max(rep.max_shift, l2 * std::abs(d));
    if (rep.max_shift > 0.0 && std::isfinite(rep.min_gap)) rep.margin = rep.min_gap / rep.max_shift;
    rep.pass = rep.margin >= threshold;
    return rep;
}

inline NonOverlapReport check_nonoverlap(const SystemSpec& spec, ResonanceOptions opt = {}) {
    return check_nonoverlap(resonance_energies(spec, opt));
}

} // namespace resdyn
