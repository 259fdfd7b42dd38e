// bohr.hpp: Bohr frequencies of H_S and the index-pair groups I_e
//
// A pair (m, n) belongs to I_e when E_m - E_n = e. The density-matrix element
// rho_{nm} rotates as exp(i t (E_m - E_n)) under the free dynamics, so it is the
// coordinate of the pair (m, n).

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace resdyn {

struct IndexPair {
    std::size_t m{0};
    std::size_t n{0};
    bool operator==(const IndexPair&) const = default;
};

struct BohrGroup {
    double e{0.0};
    std::vector<IndexPair> pairs; // lexicographic in (m, n)
    double lo{0.0}, hi{0.0};      // span of the raw differences
};

class BohrSpectrum {
public:
    double tolerance() const { return tol_; }
    std::size_t dim() const { return dim_; }
    const std::vector<BohrGroup>& groups() const { return groups_; }
    const BohrGroup& group(std::size_t g) const { return groups_.at(g); }
    std::size_t size() const { return groups_.size(); }

    // group of the difference E_m - E_n
    std::size_t id(std::size_t m, std::size_t n) const { return id_[m * dim_ + n]; }
    // position of (m, n) inside its group
    std::size_t slot(std::size_t m, std::size_t n) const { return slot_[m * dim_ + n]; }

    std::size_t zero_group() const { return zero_; }

    // group whose representative is within tolerance of e; size() if none
    std::size_t find(double e) const {
        for (std::size_t g = 0; g < groups_.size(); ++g)
            if (std::abs(groups_[g].e - e) <= std::max(tol_, groups_[g].hi - groups_[g].lo) + tol_) return g;
        return groups_.size();
    }

    std::vector<double> frequencies() const {
        std::vector<double> f;
        for (const auto& gr : groups_) f.push_back(gr.e);
        return f;
    }

    friend BohrSpectrum bohr_spectrum(const std::vector<double>& energies, double tol);

private:
    double tol_{0.0};
    std::size_t dim_{0};
    std::size_t zero_{0};
    std::vector<BohrGroup> groups_;
    std::vector<std::size_t> id_, slot_;
};

inline double default_bohr_tolerance(const std::vector<double>& energies) {
    if (energies.empty()) return 1e-12;
    const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
    return std::max(1e-9 * (*hi - *lo), 1e-12);
}

// Single-linkage clustering of all N^2 differences; tol <= 0 selects the default.
inline BohrSpectrum bohr_spectrum(const std::vector<double>& energies, double tol = 0.0) {
    const std::size_t n = energies.size();
    if (n == 0) fail(ErrorCode::DimensionMismatch, "empty spectrum");
    if (tol <= 0.0) tol = default_bohr_tolerance(energies);
    if (!std::isfinite(tol)) fail(ErrorCode::InvalidArgument, "Bohr tolerance must be finite");

    struct Diff {
        double d;
        std::size_t m, n;
    };
    std::vector<Diff> diffs;
    diffs.reserve(n * n);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = 0; k < n; ++k) diffs.push_back({energies[m] - energies[k], m, k});
    std::stable_sort(diffs.begin(), diffs.end(), [](const Diff& a, const Diff& b) { return a.d < b.d; });

    // cluster boundaries; a gap within (tol, 10 tol] is ambiguous
    std::vector<std::size_t> starts{0};
    for (std::size_t k = 1; k < diffs.size(); ++k) {
        const double gap = diffs[k].d - diffs[k - 1].d;
        if (gap > tol) {
            if (gap <= 10.0 * tol)
                fail(ErrorCode::AmbiguousClustering, "Bohr frequencies " + std::to_string(diffs[k - 1].d) + " and " +
                                                         std::to_string(diffs[k].d) + " are separated by less than 10 tol");
            starts.push_back(k);
        }
    }
    starts.push_back(diffs.size());

    BohrSpectrum bs;
    bs.tol_ = tol;
    bs.dim_ = n;
    bs.id_.assign(n * n, 0);
    bs.slot_.assign(n * n, 0);
    const std::size_t ng = starts.size() - 1;
    std::vector<double> mean(ng, 0.0);
    for (std::size_t g = 0; g < ng; ++g) {
        BohrGroup gr;
        double sum = 0.0;
        for (std::size_t k = starts[g]; k < starts[g + 1]; ++k) {
            sum += diffs[k].d;
            gr.pairs.push_back({diffs[k].m, diffs[k].n});
        }
        mean[g] = sum / static_cast<double>(starts[g + 1] - starts[g]);
        gr.lo = diffs[starts[g]].d;
        gr.hi = diffs[starts[g + 1] - 1].d;
        std::sort(gr.pairs.begin(), gr.pairs.end(),
                  [](const IndexPair& a, const IndexPair& b) { return a.m != b.m ? a.m < b.m : a.n < b.n; });
        bs.groups_.push_back(std::move(gr));
    }
    // the difference set is exactly antisymmetric, so clusters pair up as g <-> ng-1-g
    for (std::size_t g = 0; g < ng; ++g) bs.groups_[g].e = 0.5 * (mean[g] - mean[ng - 1 - g]);
    for (std::size_t g = 0; g < ng; ++g) {
        const auto& pairs = bs.groups_[g].pairs;
        for (std::size_t s = 0; s < pairs.size(); ++s) {
            bs.id_[pairs[s].m * n + pairs[s].n] = g;
            bs.slot_[pairs[s].m * n + pairs[s].n] = s;
        }
    }
    bs.zero_ = bs.id_[0];
    bs.groups_[bs.zero_].e = 0.0;
    return bs;
}

inline BohrSpectrum bohr_spectrum(const SystemSpec& spec, double tol = 0.0) {
    return bohr_spectrum(spec.energies(), tol);
}

} // namespace resdyn
