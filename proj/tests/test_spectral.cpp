#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stirap/hamiltonian.hpp"
#include "stirap/spectral.hpp"

using namespace stirap;
using namespace stirap::spectral;

namespace {

RunConfig homogeneous(int L, double eta, double delta_e, ModelKind kind) {
    RunConfig cfg;
    cfg.n_spins = L;
    cfg.coupling = eta;
    cfg.delta_e = delta_e;
    cfg.delta_s = 0.0;  // the one-excitation analysis is for H_E + H_I
    cfg.model_kind = kind;
    return cfg;
}

// Orthogonal projector on the eigenvectors of h whose eigenvalues are the k nearest to 0.
Eigen::MatrixXcd near_zero_projector(const Eigen::MatrixXcd& h, int k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(h.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(es.eigenvalues()(a)) < std::abs(es.eigenvalues()(b));
    });
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
    for (int i = 0; i < k; ++i) {
        const Eigen::VectorXcd v = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
        p += v * v.adjoint();
    }
    return p;
}

} // namespace

TEST(DarkState, Endpoints) {
    EXPECT_TRUE(dark_state(0.0).isApprox(Eigen::Vector3d(1, 0, 0)));
    const Eigen::Vector3d end = dark_state(std::numbers::pi / 2);
    EXPECT_NEAR(std::abs(end(1)), 1.0, 1e-15);
    EXPECT_NEAR(end(0), 0.0, 1e-15);
    EXPECT_EQ(end(2), 0.0);
}

TEST(DarkState, NullVectorOnTimeGrid) {
    const PulseParams p{100.0, 0.1, 1.0};
    for (int i = 0; i < 100; ++i) {
        const double t = -1.0 + 2.0 * i / 99.0;
        const pulses::PulseSample s = pulses::sample(t, p);
        // Explicit 3x3 in (g1, g2, e) order, assembled here independently.
        Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
        h(2, 2) = 1.0;
        h(0, 2) = h(2, 0) = s.omega_p;
        h(1, 2) = h(2, 1) = s.omega_s;
        EXPECT_LE((h * dark_state(s.theta)).norm(), 1e-12 * p.omega0) << "t = " << t;
        EXPECT_NEAR(dark_state(s.theta).norm(), 1.0, 1e-15);
    }
}

TEST(LambdaEigenvalues, Examples) {
    const double om = 100.0;
    auto ev = lambda_eigenvalues(0.0, om / 2, om / 2);
    EXPECT_NEAR(ev[0], -om / std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(ev[1], 0.0, 1e-12);
    EXPECT_NEAR(ev[2], om / std::numbers::sqrt2, 1e-12);
    ev = lambda_eigenvalues(3.0, 0.0, 0.0);
    EXPECT_EQ(ev[0], 0.0);
    EXPECT_EQ(ev[1], 0.0);
    EXPECT_EQ(ev[2], 3.0);
}

TEST(LambdaEigenvalues, CharacteristicPolynomialRoots) {
    // det(H - x) = -x (x^2 - Delta x - (Os^2 + Op^2)) for the Lambda matrix.
    for (double ds : {-4.0, 0.0, 1.0, 250.0})
        for (double os : {0.0, 1e-3, 20.0})
            for (double op : {0.0, 7.0, 50.0}) {
                const auto ev = lambda_eigenvalues(ds, os, op);
                const double scale = std::abs(ds) + os + op + 1.0;
                for (double x : ev) {
                    const double poly = -x * (x * x - ds * x - (os * os + op * op));
                    EXPECT_LE(std::abs(poly), 1e-12 * scale * scale * scale);
                }
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(lambda_hamiltonian(ds, os, op));
                for (int i = 0; i < 3; ++i)
                    EXPECT_NEAR(ev[static_cast<std::size_t>(i)], es.eigenvalues()(i), 1e-12 * scale);
            }
}

TEST(OneExcitation, ResonantHomogeneous) {
    for (int L : {1, 4, 10, 40}) {
        const double eta = 2.3;
        const OneExcitationSystem sys = homogeneous_eigensystem(eta, L, 0.0);
        const double half = 0.5 * eta * std::sqrt(2.0 * L);
        EXPECT_NEAR(sys.e_plus, half, 1e-12 * half);
        EXPECT_NEAR(sys.e_minus, -half, 1e-12 * half);
        EXPECT_EQ(sys.gamma, 0.0);
        EXPECT_NEAR(std::tan(sys.phi_plus), 1.0, 1e-15);
        EXPECT_NEAR(std::tan(sys.phi_minus), -1.0, 1e-15);
        const Eigen::Vector3d bright(0.0, std::sin(sys.chi), std::cos(sys.chi));
        const Eigen::Vector3d e(1.0, 0.0, 0.0);
        EXPECT_LT((sys.phi_vec_plus - (e + bright) / std::numbers::sqrt2).norm(), 1e-15);
        EXPECT_LT((sys.phi_vec_minus - (e - bright) / std::numbers::sqrt2).norm(), 1e-15);
    }
}

TEST(OneExcitation, BranchAngles) {
    for (double de : {-30.0, -1.0, 0.25, 8.0}) {
        const OneExcitationSystem sys = one_excitation_eigensystem(1.5, 0.4, de);
        const double r = std::sqrt(1.0 + sys.gamma * sys.gamma);
        EXPECT_NEAR(std::tan(sys.phi_plus), sys.gamma + r, 1e-12 * (sys.gamma + r + 1));
        EXPECT_NEAR(std::tan(sys.phi_minus), sys.gamma - r, 1e-12 * (r - sys.gamma + 1));
        EXPECT_NEAR(sys.phi_plus - sys.phi_minus, std::numbers::pi / 2, 1e-12);
        EXPECT_GE(sys.e_plus, sys.e_minus);
    }
}

TEST(OneExcitation, GammaAndChiDefinitions) {
    const OneExcitationSystem sys = one_excitation_eigensystem(3.0, 4.0, 2.0);
    // gamma = Delta_E / sqrt(eta1^2 + eta2^2) with the half-strength coupling.
    EXPECT_NEAR(sys.gamma, 2.0 / 5.0, 1e-15);
    EXPECT_NEAR(std::tan(sys.chi), 3.0 / 4.0, 1e-15);
}

TEST(OneExcitation, InvariantsAndResiduals) {
    for (double de : {-3.0, 0.0, 0.7, 25.0, 1e4})
        for (auto [e1, e2] : {std::pair{1.0, 1.0}, {0.0, 2.0}, {3.0, 0.0}, {1e-3, 7.0}}) {
            const OneExcitationSystem sys = one_excitation_eigensystem(e1, e2, de);
            const Eigen::Matrix3d h = restricted_operator(e1, e2, de, kDefaultPrefactor);
            EXPECT_LE((h * sys.phi_vec_plus - sys.e_plus * sys.phi_vec_plus).norm(),
                      1e-12 * (std::abs(sys.e_plus) + 1));
            EXPECT_LE((h * sys.phi_vec_minus - sys.e_minus * sys.phi_vec_minus).norm(),
                      1e-12 * (std::abs(sys.e_minus) + 1));
            EXPECT_LE((h * sys.dark_d - de * sys.dark_d).norm(), 1e-12 * (std::abs(de) + 1));
            EXPECT_LE(std::abs(sys.phi_vec_plus.dot(sys.phi_vec_minus)), 1e-12);
            EXPECT_LE(std::abs(sys.dark_d.dot(sys.phi_vec_plus)), 1e-12);
            EXPECT_LE(std::abs(sys.dark_d.dot(sys.phi_vec_minus)), 1e-12);
            EXPECT_NEAR(sys.phi_vec_plus.norm(), 1.0, 1e-12);
            EXPECT_NEAR(sys.phi_vec_minus.norm(), 1.0, 1e-12);
            const double g2 = 0.25 * (e1 * e1 + e2 * e2);
            EXPECT_NEAR(sys.e_plus + sys.e_minus, de, 1e-12 * (std::abs(de) + std::sqrt(g2)));
            EXPECT_NEAR(sys.e_plus * sys.e_minus, -g2, 1e-12 * g2);
            // The printed eigenvalue formula with the eta_m it is written in.
            const double root = std::sqrt(e1 * e1 + e2 * e2 + de * de);
            EXPECT_NEAR(sys.e_plus, 0.5 * (de + root), 1e-9 * (root + 1));
        }
}

TEST(OneExcitation, DenseTensorBlockL4) {
    const int L = 4;
    const RunConfig cfg = homogeneous(L, 1.0, 0.7, ModelKind::TENSOR);
    const Basis b = tensor_basis(L);
    const hamiltonian::SparseHermitian h0 = hamiltonian::build_static(cfg, b);
    const auto idx = hamiltonian::sector_indices(b, 1);
    ASSERT_EQ(idx.size(), 9u);
    const Eigen::MatrixXcd block = hamiltonian::restrict_to(h0, idx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);

    const OneExcitationSystem sys = homogeneous_eigensystem(1.0, L, 0.7);
    EXPECT_NEAR(es.eigenvalues()(0), sys.e_minus, 1e-12 * std::abs(sys.e_minus));
    EXPECT_NEAR(es.eigenvalues()(8), sys.e_plus, 1e-12 * sys.e_plus);
    for (int i = 1; i < 8; ++i) EXPECT_NEAR(es.eigenvalues()(i), 0.7, 1e-12);

    const EtaMatrix eta = cfg.eta_matrix();
    auto restrict_vec = [&](const Eigen::Vector3d& v) {
        const Eigen::VectorXcd full = embed_one_excitation(v, b, eta);
        Eigen::VectorXcd out(9);
        for (int i = 0; i < 9; ++i) out(i) = full(idx[static_cast<std::size_t>(i)]);
        return out;
    };
    EXPECT_NEAR(std::abs(es.eigenvectors().col(8).dot(restrict_vec(sys.phi_vec_plus))), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(es.eigenvectors().col(0).dot(restrict_vec(sys.phi_vec_minus))), 1.0, 1e-12);
}

TEST(OneExcitation, InhomogeneousTensorResidual) {
    const EtaMatrix eta{{0.3, 1.2}, {-0.8, 0.1}, {2.0, 0.0}, {0.5, -1.7}, {0.0, 0.9}};
    RunConfig cfg;
    cfg.n_spins = 5;
    cfg.coupling = eta;
    cfg.delta_e = -1.3;
    cfg.delta_s = 0.0;
    cfg.model_kind = ModelKind::TENSOR;
    const Basis b = tensor_basis(5);
    const Eigen::MatrixXcd h = hamiltonian::build_static(cfg, b).dense();
    const auto [e1, e2] = leg_couplings(eta);
    const OneExcitationSystem sys = one_excitation_eigensystem(e1, e2, cfg.delta_e);
    for (auto [vec, lam] : {std::pair{sys.phi_vec_plus, sys.e_plus},
                            {sys.phi_vec_minus, sys.e_minus},
                            {sys.dark_d, cfg.delta_e}}) {
        const Eigen::VectorXcd v = embed_one_excitation(vec, b, eta);
        EXPECT_NEAR(v.norm(), 1.0, 1e-12);
        EXPECT_LE((h * v - lam * v).norm(), 1e-10 * (std::abs(lam) + 1));
    }
}

TEST(OneExcitation, Errors) {
    EXPECT_THROW(one_excitation_eigensystem(0.0, 0.0, 1.0), DegenerateInput);
    EXPECT_THROW(one_excitation_eigensystem(-1.0, 1.0, 1.0), InvalidParameter);
    EXPECT_THROW(homogeneous_eigensystem(0.0, 10, 1.0), DegenerateInput);
}

TEST(PerturbedGroundStates, NoDriveNoDressing) {
    const GroundStateCorrection c = perturbed_ground_states(homogeneous_eigensystem(3.0, 10, 1.0), 0.0, 0.0);
    for (const auto& row : c.coeff)
        for (double v : row) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(c.leakage, 0.0);
}

TEST(PerturbedGroundStates, ResonantMagnitudeExample) {
    // Omega0 = 100, t = 0: Omega_p = 50; eta = 50, L = 10, Delta_E = 0.
    const OneExcitationSystem sys = homogeneous_eigensystem(50.0, 10, 0.0);
    const GroundStateCorrection c = perturbed_ground_states(sys, 50.0, 50.0);
    const double expect = (50.0 / std::sqrt(2.0)) / (25.0 * std::sqrt(20.0));
    EXPECT_NEAR(expect, 0.3162, 1e-4);
    for (int m = 0; m < 2; ++m)
        for (int a = 0; a < 2; ++a) EXPECT_NEAR(std::abs(c.coeff[m][a]), expect, 1e-14);
    EXPECT_NEAR(c.leakage, expect, 1e-14);
}

TEST(PerturbedGroundStates, StrongCouplingSuppression) {
    double last = std::numeric_limits<double>::infinity();
    for (double eta : {1.0, 10.0, 100.0, 1e3, 1e4}) {
        const double leak = perturbed_ground_states(homogeneous_eigensystem(eta, 10, 1.0), 50.0, 50.0).leakage;
        EXPECT_LT(leak, last);
        last = leak;
    }
    EXPECT_LT(last, 1e-2);
}

TEST(PerturbedGroundStates, MatchesProjectorDerivative) {
    // d/dlambda of the projector on the two near-zero eigenstates of h0 + lambda V,
    // differenced numerically; no perturbation-theory formula on this side.
    const int L = 10;
    const double eta = 50.0, de = 1.0, om_p = 50.0, om_s = 30.0;
    const RunConfig cfg = homogeneous(L, eta, de, ModelKind::COLLECTIVE);
    const Basis b = collective_basis(L);
    const Eigen::MatrixXcd h0 = hamiltonian::build_static(cfg, b).dense();
    const hamiltonian::PulseCouplers pc = hamiltonian::build_pulse_couplers(b);
    const Eigen::MatrixXcd v = om_p * pc.a_p.dense() + om_s * pc.a_s.dense();

    const double step = 1e-5;
    const Eigen::MatrixXcd dp =
        (near_zero_projector(h0 + step * v, 2) - near_zero_projector(h0 - step * v, 2)) /
        (2.0 * step);

    const OneExcitationSystem sys = homogeneous_eigensystem(eta, L, de);
    const GroundStateCorrection c = perturbed_ground_states(sys, om_p, om_s);
    const EtaMatrix etam = cfg.eta_matrix();
    const std::array<Eigen::VectorXcd, 2> phi{embed_one_excitation(sys.phi_vec_plus, b, etam),
                                              embed_one_excitation(sys.phi_vec_minus, b, etam)};
    for (int m = 0; m < 2; ++m) {
        const Eigen::VectorXcd g = Eigen::VectorXcd::Unit(static_cast<Eigen::Index>(b.dimension()),
                                                          b.index(m == 0 ? SystemLevel::G1 : SystemLevel::G2, 0));
        const Eigen::VectorXcd dg = dp * g;
        for (int a = 0; a < 2; ++a) {
            const cplx oracle = phi[static_cast<std::size_t>(a)].dot(dg);
            EXPECT_NEAR(oracle.imag(), 0.0, 1e-8);
            EXPECT_NEAR(c.coeff[m][a], oracle.real(), 1e-6) << "m = " << m << ", a = " << a;
        }
    }
}

TEST(PerturbedGroundStates, SingularDenominator) {
    OneExcitationSystem sys = homogeneous_eigensystem(1.0, 4, 0.0);
    sys.e_minus = 0.0;
    EXPECT_THROW(perturbed_ground_states(sys, 1.0, 1.0), SingularDenominator);
}

TEST(ZenoRatio, Examples) {
    RunConfig cfg;
    cfg.coupling = 0.0;
    EXPECT_EQ(zeno_ratio(cfg), 0.0);
    cfg.n_spins = 10;
    cfg.coupling = 100.0;
    EXPECT_NEAR(zeno_ratio(cfg), std::sqrt(20.0), 1e-12);
    EXPECT_NEAR(zeno_ratio(cfg), 4.47, 5e-3);
    RunConfig big = cfg;
    big.n_spins = 40;
    EXPECT_NEAR(zeno_ratio(big) / zeno_ratio(cfg), 2.0, 1e-12);
    EXPECT_NEAR(zeno_ratio(cfg, true), std::sqrt(20.0) * std::numbers::sqrt2, 1e-12);
    cfg.delta_e = 500.0;
    EXPECT_NEAR(zeno_ratio(cfg), 100.0 * std::sqrt(20.0) / 500.0, 1e-12);
}
