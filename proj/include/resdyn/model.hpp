// model.hpp: N-level system and qubit-register specifications
//
// The system Hamiltonian is diagonal, H_S = diag(E_1..E_N), and couples to the
// reservoir through sum_r lambda_r G_r (x) phi(g_r). Each channel r has its own
// independent reservoir field; no cross-channel correlations are modelled.

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/form_factor.hpp"
#include "resdyn/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace resdyn {

inline constexpr double hermiticity_tolerance = 1e-12;

struct CouplingTerm {
    double strength{0.0};  // lambda_r
    Matrix matrix;         // G_r, Hermitian in the energy basis
    FormFactor form_factor;
};

class SystemSpec {
public:
    SystemSpec() = default;

    std::size_t dim() const noexcept { return energies_.size(); }
    const std::vector<double>& energies() const noexcept { return energies_; }
    const std::vector<CouplingTerm>& couplings() const noexcept { return couplings_; }
    double beta() const noexcept { return beta_; }

    // lambda = max_r |lambda_r|
    double coupling_scale() const noexcept {
        double l = 0.0;
        for (const auto& c : couplings_) l = std::max(l, std::abs(c.strength));
        return l;
    }

    // Copy with coupling strengths replaced channel by channel.
    SystemSpec with_strengths(const std::vector<double>& strengths) const {
        if (strengths.size() != couplings_.size())
            fail(ErrorCode::DimensionMismatch, "strength list does not match coupling count");
        SystemSpec s = *this;
        for (std::size_t r = 0; r < strengths.size(); ++r) s.couplings_[r].strength = strengths[r];
        return s;
    }

    // Copy with all energies shifted by a constant.
    SystemSpec shifted(double offset) const {
        SystemSpec s = *this;
        for (auto& e : s.energies_) e += offset;
        return s;
    }

    friend SystemSpec build_system(std::vector<double> energies, std::vector<CouplingTerm> couplings, double beta);

private:
    std::vector<double> energies_;
    std::vector<CouplingTerm> couplings_;
    double beta_{1.0};
};

inline SystemSpec build_system(std::vector<double> energies, std::vector<CouplingTerm> couplings, double beta) {
    if (energies.empty()) fail(ErrorCode::DimensionMismatch, "system needs at least one level");
    for (double e : energies)
        if (!std::isfinite(e)) fail(ErrorCode::InvalidArgument, "energies must be finite");
    if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorCode::NonPositiveBeta, "beta must be positive");
    const auto n = static_cast<Eigen::Index>(energies.size());
    for (std::size_t r = 0; r < couplings.size(); ++r) {
        const auto& c = couplings[r];
        if (c.matrix.rows() != n || c.matrix.cols() != n)
            fail(ErrorCode::DimensionMismatch,
                 "coupling " + std::to_string(r) + " is not " + std::to_string(n) + "x" + std::to_string(n));
        if (!std::isfinite(c.strength)) fail(ErrorCode::InvalidArgument, "coupling strength must be finite");
        if (!c.matrix.allFinite()) fail(ErrorCode::InvalidArgument, "coupling matrix must be finite");
        if (hermiticity_defect(c.matrix) > hermiticity_tolerance)
            fail(ErrorCode::NonHermitianCoupling, "coupling " + std::to_string(r) + " is not Hermitian");
        c.form_factor.validate();
    }
    SystemSpec s;
    s.energies_ = std::move(energies);
    s.couplings_ = std::move(couplings);
    s.beta_ = beta;
    return s;
}

// Reduced density matrix of S. Construction through `from_matrix` validates
// the state axioms; trajectories built by perturbative reconstruction use
// `unchecked` since they satisfy them only to O(lambda^2).
class DensityMatrix {
public:
    static constexpr double tolerance = 1e-10;

    DensityMatrix() = default;

    static DensityMatrix from_matrix(Matrix m) {
        if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::DimensionMismatch, "density matrix must be square");
        if (hermiticity_defect(m) > tolerance) fail(ErrorCode::InvalidArgument, "density matrix must be Hermitian");
        if (std::abs(m.trace() - cplx(1.0)) > tolerance) fail(ErrorCode::InvalidArgument, "density matrix must have unit trace");
        const Matrix h = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tolerance)
            fail(ErrorCode::InvalidArgument, "density matrix must be positive semidefinite");
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix unchecked(Matrix m) { return DensityMatrix(std::move(m)); }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    cplx operator()(Eigen::Index k, Eigen::Index l) const { return m_(k, l); }

private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

// ---------------------------------------------------------------- register

using SpinConfiguration = std::vector<int>; // entries +1 / -1

struct RegisterSpec {
    std::size_t n_qubits{1};
    RealMatrix J;              // symmetric pair couplings; diagonal allowed (constant shift)
    std::vector<double> B;     // local fields
    double lambda1{0.0};       // energy-conserving channel, sum_j S^z_j
    double lambda2{0.0};       // energy-exchange channel, sum_j S^x_j
    FormFactor g1{};
    FormFactor g2{};
    double beta{1.0};

    void validate() const {
        if (n_qubits == 0) fail(ErrorCode::InvalidArgument, "register needs at least one qubit");
        const auto n = static_cast<Eigen::Index>(n_qubits);
        if (J.rows() != n || J.cols() != n) fail(ErrorCode::DimensionMismatch, "J must be N x N");
        if (B.size() != n_qubits) fail(ErrorCode::DimensionMismatch, "B must have N entries");
        if (!J.allFinite()) fail(ErrorCode::InvalidArgument, "J must be finite");
        if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail(ErrorCode::InvalidArgument, "J must be symmetric");
        for (double b : B)
            if (!std::isfinite(b)) fail(ErrorCode::InvalidArgument, "B must be finite");
        if (!std::isfinite(lambda1) || !std::isfinite(lambda2)) fail(ErrorCode::InvalidArgument, "couplings must be finite");
        if (!(beta > 0.0)) fail(ErrorCode::NonPositiveBeta, "beta must be positive");
        g1.validate();
        g2.validate();
    }
};

inline RegisterSpec make_register(std::vector<double> B, double lambda1 = 0.0, double lambda2 = 0.0,
                                  FormFactor g1 = {}, FormFactor g2 = {}, double beta = 1.0) {
    RegisterSpec r;
    r.n_qubits = B.size();
    r.J = RealMatrix::Zero(static_cast<Eigen::Index>(B.size()), static_cast<Eigen::Index>(B.size()));
    r.B = std::move(B);
    r.lambda1 = lambda1;
    r.lambda2 = lambda2;
    r.g1 = std::move(g1);
    r.g2 = std::move(g2);
    r.beta = beta;
    return r;
}

inline void check_configuration(const SpinConfiguration& s, std::size_t n) {
    if (s.size() != n) fail(ErrorCode::BadConfiguration, "configuration has wrong length");
    for (int v : s)
        if (v != 1 && v != -1) fail(ErrorCode::BadConfiguration, "spin entries must be +1 or -1");
}

// Basis index <-> configuration: sigma_1 varies fastest, + before -.
inline SpinConfiguration configuration_of_index(std::size_t index, std::size_t n) {
    SpinConfiguration s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = ((index >> j) & 1u) ? -1 : 1;
    return s;
}

inline std::size_t index_of_configuration(const SpinConfiguration& s) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s[j] == -1) idx |= (std::size_t{1} << j);
    return idx;
}

inline double energy_of_configuration(const RegisterSpec& reg, const SpinConfiguration& s) {
    check_configuration(s, reg.n_qubits);
    double e = 0.0;
    const auto n = reg.n_qubits;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            e += reg.J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * s[i] * s[j];
        e += reg.B[i] * s[i];
    }
    return e;
}

inline constexpr std::size_t default_max_qubits = 10;

// Collective S^z and S^x matrices in the configuration basis.
inline Matrix collective_sz(std::size_t n) {
    const std::size_t d = std::size_t{1} << n;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        int sum = 0;
        for (std::size_t j = 0; j < n; ++j) sum += ((k >> j) & 1u) ? -1 : 1;
        m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = static_cast<double>(sum);
    }
    return m;
}

inline Matrix collective_sx(std::size_t n) {
    const std::size_t d = std::size_t{1} << n;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(k ^ (std::size_t{1} << j)), static_cast<Eigen::Index>(k)) = 1.0;
    return m;
}

inline SystemSpec register_to_system(const RegisterSpec& reg, std::size_t max_qubits = default_max_qubits) {
    reg.validate();
    if (reg.n_qubits > max_qubits)
        fail(ErrorCode::RegisterTooLarge,
             std::to_string(reg.n_qubits) + " qubits exceeds the limit of " + std::to_string(max_qubits));
    const std::size_t d = std::size_t{1} << reg.n_qubits;
    std::vector<double> energies(d);
    for (std::size_t k = 0; k < d; ++k) energies[k] = energy_of_configuration(reg, configuration_of_index(k, reg.n_qubits));
    std::vector<CouplingTerm> couplings;
    couplings.push_back({reg.lambda1, collective_sz(reg.n_qubits), reg.g1});
    couplings.push_back({reg.lambda2, collective_sx(reg.n_qubits), reg.g2});
    return build_system(std::move(energies), std::move(couplings), reg.beta);
}

} // namespace resdyn
