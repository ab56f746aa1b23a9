// validate.hpp - Self-check suite shipped with the CLI.
//
// quick: analytic residuals (pulse envelopes, dark state, Lambda eigenvalues,
//        kernel and number conservation, one-excitation eigensystem against its
//        own 3x3 restriction and against dense diagonalization of the tensor
//        N = 1 block).
// full:  adds tensor-vs-collective propagation at L = 4 and step halving.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stirap/hamiltonian.hpp"
#include "stirap/model.hpp"
#include "stirap/propagator.hpp"
#include "stirap/pulses.hpp"
#include "stirap/spectral.hpp"

namespace stirap::validate {

enum class Level { QUICK, FULL };

struct Check {
    std::string name;
    double value{0.0};      // measured defect
    double tolerance{0.0};  // pass iff value <= tolerance
    bool passed{false};
};

struct Options {
    Level level{Level::QUICK};
    // Coupling prefactors handed to the two sides of every spectral comparison.
    // They agree in a correct build; tests perturb one to prove mismatches are caught.
    double hamiltonian_prefactor{spectral::kDefaultPrefactor};
    double spectral_prefactor{spectral::kDefaultPrefactor};
};

struct Report {
    std::vector<Check> checks;
    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

namespace detail {

inline void record(Report& r, std::string name, double value, double tol) {
    r.checks.push_back({std::move(name), value, tol, value <= tol});
}

// Record a lower bound: passes iff value >= floor.
inline void record_at_least(Report& r, std::string name, double value, double floor) {
    r.checks.push_back({std::move(name), value, floor, value >= floor});
}

inline RunConfig figure_config(int L, double eta, ModelKind kind) {
    RunConfig cfg;
    cfg.pulse = {100.0, 0.1, 1.0};
    cfg.delta_s = 1.0;
    cfg.delta_e = 1.0;
    cfg.n_spins = L;
    cfg.coupling = eta;
    cfg.model_kind = kind;
    return cfg;
}

inline double max_abs(const Eigen::VectorXcd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct SpectralCase {
    int L;
    EtaMatrix eta;
    double delta_e;
};

inline std::vector<SpectralCase> spectral_cases() {
    std::vector<SpectralCase> cases;
    for (int L : {1, 2, 4, 8}) {
        for (double de : {0.0, 0.7, -3.0, 25.0}) {
            cases.push_back({L, EtaMatrix(static_cast<std::size_t>(L), {1.0, 1.0}), de});
        }
    }
    // Inhomogeneous couplings, fixed seed.
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int L : {3, 5, 8}) {
        EtaMatrix m(static_cast<std::size_t>(L));
        for (auto& row : m) row = {u(rng), u(rng)};
        cases.push_back({L, m, 0.9});
    }
    return cases;
}

} // namespace detail

inline void check_pulses(Report& rep) {
    const PulseParams p{100.0, 0.1, 1.0};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = -1.0 + 2.0 * i / 999.0;
        const double s = pulses::omega_s(t, p);
        const double q = pulses::omega_p(t, p);
        const double sech = 1.0 / std::cosh(t / p.tau);
        const double ref = 0.5 * p.omega0 * p.omega0 * sech * sech;
        if (ref > 0.0) worst = std::max(worst, std::abs(s * s + q * q - ref) / ref);
    }
    detail::record(rep, "pulse envelope identity (relative)", worst, 1e-12);
}

inline void check_dark_state(Report& rep) {
    const PulseParams p{100.0, 0.1, 1.0};
    double null_defect = 0.0;
    double eig_defect = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = -1.0 + 2.0 * i / 99.0;
        const pulses::PulseSample s = pulses::sample(t, p);
        const Eigen::Matrix3d h = spectral::lambda_hamiltonian(1.0, s.omega_s, s.omega_p);
        null_defect = std::max(null_defect, (h * spectral::dark_state(s.theta)).cwiseAbs().maxCoeff());

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
        const auto ev = spectral::lambda_eigenvalues(1.0, s.omega_s, s.omega_p);
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        for (int k = 0; k < 3; ++k)
            eig_defect = std::max(eig_defect, std::abs(es.eigenvalues()(k) - ev[k]) / scale);
    }
    detail::record(rep, "dark state nullity / Omega0", null_defect / p.omega0, 1e-12);
    detail::record(rep, "Lambda eigenvalues vs dense 3x3 (relative)", eig_defect, 1e-12);
}

inline void check_structure(Report& rep) {
    using namespace hamiltonian;
    const double c1r = 0.6, c2r = 0.8;
    double kernel = 0.0;
    double commute = 0.0;
    double coupler_commute = std::numeric_limits<double>::infinity();
    auto probe = [&](const RunConfig& cfg) {
        const Basis b = make_basis(cfg);
        const SparseHermitian h0 = build_static(cfg, b);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.dimension()));
        v(static_cast<Eigen::Index>(b.index(SystemLevel::G1, 0))) = c1r;
        v(static_cast<Eigen::Index>(b.index(SystemLevel::G2, 0))) = cplx{0.0, c2r};
        kernel = std::max(kernel, detail::max_abs(h0.matrix() * v));
        const SparseHermitian n = number_operator(b);
        commute = std::max(commute, commutator_max(h0, n));
        const PulseCouplers pc = build_pulse_couplers(b);
        coupler_commute = std::min(coupler_commute, commutator_max(pc.a_p, n));
    };
    for (int L : {1, 4, 10, 40}) probe(detail::figure_config(L, 3.0, ModelKind::COLLECTIVE));
    for (int L : {1, 4, 8}) probe(detail::figure_config(L, 3.0, ModelKind::TENSOR));
    detail::record(rep, "kernel annihilation |h0 (c1 g1 + c2 g2) down|", kernel, 0.0);
    detail::record(rep, "[h0, N] max entry", commute, 0.0);
    detail::record_at_least(rep, "[a_p, N] max entry (must be nonzero)", coupler_commute, 0.5);

    double sector = 0.0;
    for (int L = 1; L <= 8; ++L) {
        const auto idx = sector_indices(tensor_basis(L), 1);
        sector = std::max(sector, std::abs(static_cast<double>(idx.size()) - (2 * L + 1)));
    }
    detail::record(rep, "one-excitation sector dimension - (2L+1)", sector, 0.0);
}

inline void check_spectral(Report& rep, const Options& opt) {
    double own_resid = 0.0;
    double ortho = 0.0;
    double dark = 0.0;
    double trace_rel = 0.0;
    double tensor_resid = 0.0;
    double tensor_eigs = 0.0;
    double collective_resid = 0.0;

    for (const auto& cs : detail::spectral_cases()) {
        const auto [eta1, eta2] = spectral::leg_couplings(cs.eta);
        const spectral::OneExcitationSystem sys =
            spectral::one_excitation_eigensystem(eta1, eta2, cs.delta_e, opt.spectral_prefactor);

        // Against its own 3x3 restriction, built with the Hamiltonian's prefactor.
        const Eigen::Matrix3d r =
            spectral::restricted_operator(eta1, eta2, cs.delta_e, opt.hamiltonian_prefactor);
        own_resid = std::max(own_resid, (r * sys.phi_vec_plus - sys.e_plus * sys.phi_vec_plus).norm() /
                                            (std::abs(sys.e_plus) + 1.0));
        own_resid = std::max(own_resid, (r * sys.phi_vec_minus - sys.e_minus * sys.phi_vec_minus).norm() /
                                            (std::abs(sys.e_minus) + 1.0));
        ortho = std::max({ortho, std::abs(sys.phi_vec_plus.dot(sys.phi_vec_minus)),
                          std::abs(sys.phi_vec_plus.norm() - 1.0),
                          std::abs(sys.phi_vec_minus.norm() - 1.0),
                          std::abs(sys.dark_d.dot(sys.phi_vec_plus)),
                          std::abs(sys.dark_d.dot(sys.phi_vec_minus))});
        dark = std::max(dark, (r * sys.dark_d - cs.delta_e * sys.dark_d).norm());
        const double s2 = eta1 * eta1 + eta2 * eta2;
        const double g2 = opt.hamiltonian_prefactor * opt.hamiltonian_prefactor * s2;
        trace_rel = std::max(trace_rel, std::abs(sys.e_plus + sys.e_minus - cs.delta_e) /
                                            std::max(1.0, std::abs(cs.delta_e)));
        trace_rel = std::max(trace_rel, std::abs(sys.e_plus * sys.e_minus + g2) / g2);

        // Against the full per-spin Hamiltonian.
        RunConfig cfg = detail::figure_config(cs.L, 0.0, ModelKind::TENSOR);
        cfg.coupling = cs.eta;
        cfg.delta_e = cs.delta_e;
        cfg.coupling_prefactor = opt.hamiltonian_prefactor;
        const Basis b = tensor_basis(cs.L);
        const hamiltonian::SparseHermitian h0 = hamiltonian::build_tensor_full(cfg, b);
        // H_E + H_I excludes the Delta_S |e><e| term; remove it from the N = 1 block.
        const auto idx = hamiltonian::sector_indices(b, 1);
        Eigen::MatrixXcd block = hamiltonian::restrict_to(h0, idx);
        for (Eigen::Index k = 0; k < block.rows(); ++k)
            if (b.label(idx[static_cast<std::size_t>(k)]).level == SystemLevel::E)
                block(k, k) -= cfg.delta_s;
        Eigen::SparseMatrix<cplx> bath_part = h0.matrix();
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(b.bath_dimension()); ++k) {
            const auto e = static_cast<Eigen::Index>(b.index(SystemLevel::E, static_cast<std::size_t>(k)));
            bath_part.coeffRef(e, e) -= cfg.delta_s;
        }
        for (const auto& [vec, e] : {std::pair{sys.phi_vec_plus, sys.e_plus},
                                     std::pair{sys.phi_vec_minus, sys.e_minus},
                                     std::pair{sys.dark_d, cs.delta_e}}) {
            const Eigen::VectorXcd full = spectral::embed_one_excitation(vec, b, cs.eta);
            tensor_resid = std::max(tensor_resid, (bath_part * full - e * full).norm() /
                                                      (std::abs(e) + 1.0));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
        std::vector<double> expect{sys.e_minus, sys.e_plus};
        for (int k = 0; k < 2 * cs.L - 1; ++k) expect.push_back(cs.delta_e);
        std::sort(expect.begin(), expect.end());
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        for (std::size_t k = 0; k < expect.size(); ++k)
            tensor_eigs = std::max(tensor_eigs,
                                   std::abs(es.eigenvalues()(static_cast<Eigen::Index>(k)) - expect[k]) / scale);

        // Homogeneous cases also against the collective sector.
        if (std::all_of(cs.eta.begin(), cs.eta.end(),
                        [&](const auto& row) { return row[0] == 1.0 && row[1] == 1.0; })) {
            RunConfig cc = cfg;
            cc.model_kind = ModelKind::COLLECTIVE;
            cc.coupling = 1.0;
            const Basis cb = collective_basis(cs.L);
            Eigen::SparseMatrix<cplx> ch = hamiltonian::build_static_collective(cc, cb).matrix();
            for (std::size_t k = 0; k < cb.bath_dimension(); ++k) {
                const auto e = static_cast<Eigen::Index>(cb.index(SystemLevel::E, k));
                ch.coeffRef(e, e) -= cc.delta_s;
            }
            for (const auto& [vec, e] : {std::pair{sys.phi_vec_plus, sys.e_plus},
                                         std::pair{sys.phi_vec_minus, sys.e_minus}}) {
                const Eigen::VectorXcd full = spectral::embed_one_excitation(vec, cb, cs.eta);
                collective_resid = std::max(collective_resid,
                                            (ch * full - e * full).norm() / (std::abs(e) + 1.0));
            }
        }
    }
    detail::record(rep, "Phi+- residual, own 3x3 restriction", own_resid, 1e-12);
    detail::record(rep, "Phi+- / D orthonormality", ortho, 1e-12);
    detail::record(rep, "D residual (eigenvalue Delta_E)", dark, 1e-12);
    detail::record(rep, "E+ + E- = Delta_E, E+ E- = -G^2 (relative)", trace_rel, 1e-12);
    detail::record(rep, "Phi+-, D residual vs tensor H_E + H_I (L <= 8)", tensor_resid, 1e-10);
    detail::record(rep, "E+-, Delta_E vs dense tensor N=1 block (relative)", tensor_eigs, 1e-12);
    detail::record(rep, "Phi+- residual vs collective sector", collective_resid, 1e-10);
}

// Max deviation between TENSOR and COLLECTIVE runs over all result scalars and
// all snapshot reduced states.
inline double sector_equivalence_defect(int L, double eta, double prefactor) {
    RunConfig cc = detail::figure_config(L, eta, ModelKind::COLLECTIVE);
    cc.coupling_prefactor = prefactor;
    RunConfig tc = cc;
    tc.model_kind = ModelKind::TENSOR;
    cc.snapshot_count = tc.snapshot_count = 21;
    // Same step count on both sides so any difference is representational.
    const hamiltonian::AffineHamiltonian hc = hamiltonian::build_affine(cc);
    const std::size_t steps = propagator::choose_steps(cc, propagator::norm_bound(hc, cc));
    cc.steps = tc.steps = steps;
    const propagator::RunResult a = propagator::evolve(cc);
    const propagator::RunResult b = propagator::evolve(tc);
    double d = std::max({std::abs(a.p_g1 - b.p_g1), std::abs(a.p_g2 - b.p_g2),
                         std::abs(a.p_e - b.p_e), std::abs(a.purity - b.purity),
                         std::abs(a.jz_mean - b.jz_mean), std::abs(a.jz_var - b.jz_var),
                         std::abs(a.norm_error - b.norm_error)});
    for (std::size_t k = 0; k < std::min(a.snapshots.size(), b.snapshots.size()); ++k)
        d = std::max(d, (a.snapshots[k].rho - b.snapshots[k].rho).cwiseAbs().maxCoeff());
    return d;
}

inline void check_dynamics(Report& rep, const Options& opt) {
    double equiv = 0.0;
    for (double eta : {0.1, 3.0, 100.0})
        equiv = std::max(equiv, sector_equivalence_defect(4, eta, opt.hamiltonian_prefactor));
    detail::record(rep, "tensor vs collective propagation, L = 4 (max-norm)", equiv, 1e-8);

    RunConfig cfg = detail::figure_config(10, 1.0, ModelKind::COLLECTIVE);
    cfg.coupling_prefactor = opt.hamiltonian_prefactor;
    cfg.snapshot_count = 0;
    const propagator::RunResult coarse = propagator::evolve(cfg);
    cfg.steps = 2 * coarse.integrator.steps;
    const propagator::RunResult fine = propagator::evolve(cfg);
    detail::record(rep, "step halving |dP(T)| at eta T = 1", std::abs(coarse.p_g2 - fine.p_g2), 1e-6);
    detail::record(rep, "norm drift over run", std::max(coarse.max_norm_drift, fine.max_norm_drift),
                   propagator::kNormTolerance);
}

inline Report run(const Options& opt = {}) {
    Report rep;
    check_pulses(rep);
    check_dark_state(rep);
    check_structure(rep);
    check_spectral(rep, opt);
    if (opt.level == Level::FULL) check_dynamics(rep, opt);
    return rep;
}

} // namespace stirap::validate
