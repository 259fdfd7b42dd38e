#include "resdyn/oracle.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace resdyn;

namespace {

Matrix qubit_coupling(double a, double b, cplx c) {
    Matrix g(2, 2);
    g << a, c, std::conj(c), b;
    return g;
}

Matrix plus_state() {
    Matrix r(2, 2);
    r << 0.5, 0.5, 0.5, 0.5;
    return r;
}

SystemSpec qubit(double lambda, Matrix G, FormFactor g = {}) { return build_system({0.0, 1.0}, {{lambda, G, g}}, 1.0); }

std::vector<double> grid(double tmax, std::size_t n) {
    std::vector<double> t;
    for (std::size_t k = 0; k < n; ++k) t.push_back(tmax * static_cast<double>(k) / static_cast<double>(n - 1));
    return t;
}

// Truncated single mode: h = w n + c (kappa b^+ + conj(kappa) b) / sqrt2 on n <= nmax
Matrix mode_hamiltonian(double w, cplx kappa, double c, int nmax) {
    const int q = nmax + 1;
    Matrix h = Matrix::Zero(q, q);
    for (int n = 0; n < q; ++n) h(n, n) = w * n;
    for (int n = 0; n + 1 < q; ++n) {
        h(n + 1, n) = c * kappa * std::sqrt(n + 1.0) / std::sqrt(2.0);
        h(n, n + 1) = std::conj(h(n + 1, n));
    }
    return h;
}

Matrix unitary(const Matrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Eigen::VectorXcd ph(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * t));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

TEST(Bath, ZeroFormFactor) {
    const auto b = discretize_bath(FormFactor::zero(), 1.0, 10, 5.0, 2);
    ASSERT_EQ(b.modes(), 10u);
    for (double k : b.kappa) EXPECT_EQ(k, 0.0);
}

TEST(Bath, TotalWeightMatchesRadialIntegral) {
    const auto b = discretize_bath(FormFactor{}, 1.0, 200, 10.0, 3);
    const double exact = pi * (1.0 - 21.0 * std::exp(-20.0));
    EXPECT_NEAR(b.total_weight(), exact, 0.01 * exact);
    EXPECT_NEAR(b.omega.front(), 0.025, 1e-15);
    EXPECT_NEAR(b.omega.back(), 9.975, 1e-12);
    EXPECT_NEAR(b.recurrence_time(), 2.0 * pi / 0.05, 1e-9);
}

TEST(Bath, SingleModeAccepted) {
    const auto b = discretize_bath(FormFactor{}, 1.0, 1, 0.02, 1);
    ASSERT_EQ(b.modes(), 1u);
    EXPECT_GT(b.kappa[0], 0.0);
}

TEST(Bath, Errors) {
    EXPECT_THROW(discretize_bath(FormFactor{}, 1.0, 5, 10.0, 3), Error);
    FormFactor aniso;
    aniso.angular = AngularWeight::harmonics({{{1, 0}, 1.0}});
    try {
        discretize_bath(aniso, 1.0, 100, 5.0, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedAnisotropy);
    }
    EXPECT_THROW(discretize_bath(FormFactor{}, 1.0, 0, 5.0, 3), Error);
    EXPECT_THROW(discretize_bath(FormFactor{}, 1.0, 10, -1.0, 3), Error);
    EXPECT_THROW(discretize_bath(FormFactor{}, 1.0, 10, 5.0, 0), Error);
}

TEST(Bath, DefaultCutoffLeavesSmallTail) {
    const FormFactor g;
    const double w = default_omega_max(g, 1.0);
    const auto f = [&](double v) { return g.spectral_weight(v) / std::tanh(0.5 * v); };
    const double total = quad::half_line(f);
    EXPECT_NEAR(quad::to_infinity(f, w) / total, 1e-4, 1e-7);
}

TEST(ExactEvolve, ZeroCouplingIsFreeEvolution) {
    const auto spec = qubit(0.0, qubit_coupling(0.3, -0.3, 0.4));
    const auto bath = discretize_bath(FormFactor{}, 1.0, 40, 6.0, 1);
    const auto times = grid(30.0, 25);
    const auto free = free_evolution(spec, plus_state(), times);
    OracleOptions o;
    o.representation = BathRepresentation::Thermofield;
    const auto tr = exact_evolve(spec, bath, plus_state(), times, o);
    for (std::size_t k = 0; k < times.size(); ++k) EXPECT_LE(max_abs(tr.states[k] - free.states[k]), 1e-12);

    const auto small = discretize_bath(FormFactor{}, 1.0, 1, 0.02, 3);
    const auto tf = exact_evolve(spec, small, plus_state(), times, {BathRepresentation::ThermalFock});
    for (std::size_t k = 0; k < times.size(); ++k) EXPECT_LE(max_abs(tf.states[k] - free.states[k]), 1e-12);
}

TEST(ExactEvolve, PureDephasingMatchesPerModeProduct) {
    const double lambda = 0.3, a = 0.5, b = -0.3;
    const auto spec = qubit(lambda, qubit_coupling(a, b, 0.0));
    const auto bath = discretize_bath(FormFactor{}, 1.0, 4, 0.4, 3);
    const auto times = grid(40.0, 30);
    const auto tr = exact_evolve(spec, bath, plus_state(), times, {BathRepresentation::ThermalFock});
    EXPECT_FALSE(tr.warnings.empty()); // low modes at beta = 1 leak past n_max = 3
    const double kcell = std::sqrt(4.0 * pi * bath.spacing);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const double t = times[s];
        cplx f = 0.5 * std::exp(cplx(0.0, t));
        for (std::size_t k = 0; k < bath.modes(); ++k) {
            const double w = bath.omega[k];
            const cplx kap = kcell * w * FormFactor{}.radial(w);
            Matrix rho = Matrix::Zero(4, 4);
            double z = 0.0;
            for (int n = 0; n < 4; ++n) z += std::exp(-w * n);
            for (int n = 0; n < 4; ++n) rho(n, n) = std::exp(-w * n) / z;
            const Matrix u0 = unitary(mode_hamiltonian(w, kap, lambda * a, 3), t);
            const Matrix u1 = unitary(mode_hamiltonian(w, kap, lambda * b, 3), t);
            f *= (u0 * rho * u1.adjoint()).trace();
        }
        EXPECT_NEAR(std::abs(tr.states[s](0, 1) - f), 0.0, 1e-8) << "t = " << t;
        EXPECT_NEAR(tr.states[s](0, 0).real(), 0.5, 1e-12);
        EXPECT_NEAR(tr.states[s](1, 1).real(), 0.5, 1e-12);
    }
    EXPECT_LE(tr.max_trace_defect(), 1e-10);
    EXPECT_LE(tr.max_hermiticity_defect(), 1e-10);
}

TEST(ExactEvolve, RepresentationsAgreeWhenConverged) {
    // two modes, cold enough that both truncations converge
    const double beta = 3.0;
    const auto spec = build_system({0.0, 1.0}, {{0.15, qubit_coupling(0.3, -0.3, 0.4), {}}}, beta);
    TruncatedBath bath;
    bath.omega = {0.8, 1.3};
    bath.kappa = {0.0, 0.0}; // recomputed from the coupling's form factor
    bath.spacing = 0.5;
    bath.omega_max = 1.55;
    bath.n_max = 7;
    bath.beta = beta;
    const auto times = grid(20.0, 15);
    const auto tf = exact_evolve(spec, bath, plus_state(), times, {BathRepresentation::ThermalFock});
    OracleOptions o{BathRepresentation::Thermofield, 7};
    const auto tt = exact_evolve(spec, bath, plus_state(), times, o);
    for (std::size_t k = 0; k < times.size(); ++k) EXPECT_LE(max_abs(tf.states[k] - tt.states[k]), 1e-6);
}

TEST(ExactEvolve, Invariants) {
    const auto spec = qubit(0.05, qubit_coupling(0.3, -0.3, 0.4));
    const auto bath = discretize_bath(FormFactor{}, 1.0, 60, 5.0, 3);
    const auto tr = exact_evolve(spec, bath, plus_state(), grid(80.0, 50));
    EXPECT_LE(tr.max_trace_defect(), 1e-10);
    EXPECT_LE(tr.max_hermiticity_defect(), 1e-10);
    EXPECT_LE(max_abs(tr.states.front() - plus_state()), 1e-12);
}

TEST(ExactEvolve, Errors) {
    const auto spec = qubit(0.05, qubit_coupling(0.3, -0.3, 0.4));
    const auto bath = discretize_bath(FormFactor{}, 1.0, 60, 5.0, 3);
    try {
        exact_evolve(spec, bath, plus_state(), {0.0}, {BathRepresentation::ThermalFock});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionTooLarge);
    }
    EXPECT_THROW(exact_evolve(spec, bath, plus_state(), {0.0}, {BathRepresentation::Thermofield, 3}), Error);
    const auto hot = build_system({0.0, 1.0}, {{0.05, qubit_coupling(0.3, -0.3, 0.4), {}}}, 2.0);
    EXPECT_THROW(exact_evolve(hot, bath, plus_state(), {0.0}), Error);
}

TEST(ExactEvolve, RecurrenceWarning) {
    const auto spec = qubit(0.05, qubit_coupling(0.0, 0.0, 1.0));
    const auto bath = discretize_bath(FormFactor{}, 1.0, 60, 5.0, 3);
    const auto tr = exact_evolve(spec, bath, plus_state(), {0.0, 1.5 * bath.recurrence_time()});
    ASSERT_FALSE(tr.warnings.empty());
    EXPECT_NE(tr.warnings.back().find("recurrence"), std::string::npos);
}

TEST(FitDecay, SyntheticExponential) {
    Trajectory tr;
    for (double t : grid(80.0, 400)) {
        Matrix r = Matrix::Zero(2, 2);
        r(0, 1) = 0.5 * std::exp(cplx(-0.1, 1.0) * t) + 0.01;
        tr.times.push_back(t);
        tr.states.push_back(r);
    }
    const auto f = fit_decay(tr, 0, 1);
    EXPECT_NEAR(f.rate, 0.1, 1e-3);
    EXPECT_NEAR(f.frequency, 1.0, 1e-3);
    EXPECT_NEAR(std::abs(f.asymptote - 0.01), 0.0, 1e-6);
    EXPECT_LE(f.residual, 1e-6);
}

TEST(FitDecay, ConstantTrajectory) {
    Trajectory tr;
    for (double t : grid(10.0, 30)) {
        tr.times.push_back(t);
        tr.states.push_back(Matrix::Constant(2, 2, 0.5));
    }
    const auto f = fit_decay(tr, 0, 1);
    EXPECT_NEAR(f.rate, 0.0, 1e-9);
}

TEST(FitDecay, RejectsBadInput) {
    Trajectory tr;
    for (double t : grid(10.0, 10)) {
        tr.times.push_back(t);
        tr.states.push_back(Matrix::Constant(2, 2, t));
    }
    EXPECT_THROW(fit_decay(tr, 0, 1), Error);
    tr = {};
    for (double t : grid(40.0, 200)) {
        Matrix r = Matrix::Zero(2, 2);
        r(0, 1) = std::cos(0.3 * t) * std::cos(2.1 * t) + 0.4 * std::sin(0.05 * t * t);
        tr.times.push_back(t);
        tr.states.push_back(r);
    }
    try {
        fit_decay(tr, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PoorFit);
    }
}

// Cross-module: oracle rate of the coherence against the level-shift prediction
// of the same microscopic Hamiltonian.
TEST(OracleRates, CoherenceRateMatchesMicroscopicLevelShift) {
    const FormFactor g;
    const double wmax = default_omega_max(g, 1.0);
    const auto bath = discretize_bath(g, 1.0, 150, wmax, 3);
    const auto spec = qubit(0.02, qubit_coupling(0.0, 0.0, 1.0));
    const auto tr = exact_evolve(spec, bath, plus_state(), grid(0.9 * bath.recurrence_time(), 300));
    const auto f = fit_decay(tr, 0, 1, {.t_min = 5.0});
    const auto res = resonance_energies(spec, {Convention::Microscopic});
    const cplx eps = res.at(1.0).epsilons.front();
    EXPECT_NEAR(f.rate, eps.imag(), 0.2 * eps.imag());
    EXPECT_NEAR(f.frequency, eps.real(), 0.2 * (eps.real() - 1.0));
}

TEST(OracleRates, LambdaSquaredScalingAndBathConvergence) {
    const FormFactor g;
    const double wmax = default_omega_max(g, 1.0);
    const auto bath = discretize_bath(g, 1.0, 150, wmax, 3);
    const auto times = grid(0.9 * bath.recurrence_time(), 250);
    std::vector<double> lam{0.01, 0.02, 0.04}, rate;
    for (double l : lam) {
        const auto tr = exact_evolve(qubit(l, qubit_coupling(0.0, 0.0, 1.0)), bath, plus_state(), times);
        rate.push_back(fit_decay(tr, 0, 1, {.t_min = 5.0}).rate);
    }
    EXPECT_NEAR(fit_power_law(lam, rate).exponent, 2.0, 0.1);

    // halving the resolution at fixed omega_max; same window
    const auto coarse = discretize_bath(g, 1.0, 75, wmax, 3);
    const auto tr = exact_evolve(qubit(0.02, qubit_coupling(0.0, 0.0, 1.0)), coarse, plus_state(),
                                 grid(0.9 * coarse.recurrence_time(), 250));
    EXPECT_NEAR(fit_decay(tr, 0, 1, {.t_min = 5.0}).rate, rate[1], 0.05 * rate[1]);
}

TEST(Verify, ZeroCouplingDeviationsVanish) {
    VerifyConfig c;
    c.lambdas = {0.0};
    c.samples = 60;
    const auto rep = verify(qubit(0.0, qubit_coupling(0.0, 0.0, 1.0)), plus_state(), c);
    ASSERT_FALSE(rep.checks.empty());
    for (const auto& k : rep.checks) EXPECT_LE(k.deviation, 1e-10) << k.name;
    EXPECT_TRUE(rep.pass());
}

TEST(Verify, MicroscopicRatesPass) {
    VerifyConfig c;
    c.convention = Convention::Microscopic;
    c.samples = 250;
    const auto rep = verify(qubit(0.01, qubit_coupling(0.0, 0.0, 1.0)), plus_state(), c);
    int rates = 0;
    for (const auto& k : rep.checks)
        if (k.name.rfind("rate_", 0) == 0 || k.name.rfind("trajectory_", 0) == 0 || k.name == "lambda_exponent") {
            EXPECT_TRUE(k.pass) << k.name << " deviation " << k.deviation;
            ++rates;
        }
    EXPECT_EQ(rates, 5);
}

TEST(Verify, CoarseBathFlagged) {
    VerifyConfig c;
    c.modes = 5;
    c.omega_max = 10.0;
    const auto rep = verify(qubit(0.01, qubit_coupling(0.0, 0.0, 1.0)), plus_state(), c);
    EXPECT_FALSE(rep.pass());
}
