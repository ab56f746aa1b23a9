// spectral.hpp - Closed-form spectral structure of the Lambda system and of the
// bath + interaction part in the one-excitation sector.
//
// One-excitation sector. With eta_m = sqrt(sum_k [eta_k^(m)]^2) and
// |phi_m> = |g_m> sum_k (eta_k^(m)/eta_m) |..up_k..>, the exchange term
// couples |e, all-down> only to the bright combination
//     |B> = sin(chi)|phi_1> + cos(chi)|phi_2>,  chi = atan(eta_1/eta_2)
// with strength G = c sqrt(eta_1^2 + eta_2^2) (c = coupling prefactor, 1/2 by
// default). The 2x2 block [[0, G], [G, Delta_E]] gives
//     E_pm = (Delta_E pm sqrt(Delta_E^2 + 4 G^2)) / 2
//     |Phi_pm> = cos(phi_pm)|e, all-down> + sin(phi_pm)|B>
//     tan(phi_pm) = gamma pm sqrt(1 + gamma^2),  gamma = Delta_E / (2G)
// and |D> = cos(chi)|phi_1> - sin(chi)|phi_2> has eigenvalue Delta_E.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "stirap/errors.hpp"
#include "stirap/model.hpp"

namespace stirap::spectral {

inline constexpr double kDefaultPrefactor = 0.5;

// Amplitudes on (g1, g2, e).
inline Eigen::Vector3d dark_state(double theta) {
    return {std::cos(theta), -std::sin(theta), 0.0};
}

// 3x3 rotating-frame system Hamiltonian on (g1, g2, e).
inline Eigen::Matrix3d lambda_hamiltonian(double delta_s, double omega_s, double omega_p) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(2, 2) = delta_s;
    h(0, 2) = h(2, 0) = omega_p;
    h(1, 2) = h(2, 1) = omega_s;
    return h;
}

// Sorted {lambda_-, 0, lambda_+} = {(D - s)/2, 0, (D + s)/2}, s = sqrt(D^2 + 4W).
// Evaluated through lambda_+ lambda_- = -W to avoid cancellation.
inline std::array<double, 3> lambda_eigenvalues(double delta_s, double omega_s, double omega_p) {
    const double w = omega_s * omega_s + omega_p * omega_p;
    const double s = std::sqrt(delta_s * delta_s + 4.0 * w);
    double lo = 0.0;
    double hi = 0.0;
    if (delta_s >= 0.0) {
        hi = 0.5 * (delta_s + s);
        lo = hi == 0.0 ? 0.0 : -w / hi;
    } else {
        lo = 0.5 * (delta_s - s);
        hi = -w / lo;
    }
    std::array<double, 3> out{lo, 0.0, hi};
    std::sort(out.begin(), out.end());
    return out;
}

// eta_m = sqrt(sum_k [eta_k^(m)]^2) for m = 1, 2.
inline std::pair<double, double> leg_couplings(const EtaMatrix& eta) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& row : eta) {
        s1 += row[0] * row[0];
        s2 += row[1] * row[1];
    }
    return {std::sqrt(s1), std::sqrt(s2)};
}

struct OneExcitationSystem {
    double eta1{0.0};
    double eta2{0.0};
    double delta_e{0.0};
    double prefactor{kDefaultPrefactor};
    double gamma{0.0};
    double chi{0.0};
    double phi_plus{0.0};
    double phi_minus{0.0};
    double e_plus{0.0};
    double e_minus{0.0};
    // Components on the ordered basis (|e, all-down>, |phi_1>, |phi_2>).
    Eigen::Vector3d phi_vec_plus{Eigen::Vector3d::Zero()};
    Eigen::Vector3d phi_vec_minus{Eigen::Vector3d::Zero()};
    Eigen::Vector3d dark_d{Eigen::Vector3d::Zero()};

    // Bright-state coupling G.
    double bright_coupling() const { return prefactor * std::hypot(eta1, eta2); }
};

inline OneExcitationSystem one_excitation_eigensystem(double eta1, double eta2, double delta_e,
                                                      double prefactor = kDefaultPrefactor) {
    if (!(eta1 >= 0.0) || !(eta2 >= 0.0))
        throw InvalidParameter("leg couplings eta_m are norms and must be >= 0");
    if (eta1 * eta1 + eta2 * eta2 == 0.0 || prefactor == 0.0)
        throw DegenerateInput("one-excitation eigensystem needs nonzero coupling");

    OneExcitationSystem sys;
    sys.eta1 = eta1;
    sys.eta2 = eta2;
    sys.delta_e = delta_e;
    sys.prefactor = prefactor;

    const double g = std::abs(sys.bright_coupling());
    sys.gamma = delta_e / (2.0 * g);
    sys.chi = std::atan2(eta1, eta2);

    // tan(phi_pm) = gamma pm sqrt(1 + gamma^2); product is -1.
    const double r = std::sqrt(1.0 + sys.gamma * sys.gamma);
    double t_plus = 0.0;
    double t_minus = 0.0;
    if (sys.gamma >= 0.0) {
        t_plus = sys.gamma + r;
        t_minus = -1.0 / t_plus;
    } else {
        t_minus = sys.gamma - r;
        t_plus = -1.0 / t_minus;
    }
    sys.phi_plus = std::atan(t_plus);
    sys.phi_minus = std::atan(t_minus);

    const double root = std::sqrt(delta_e * delta_e + 4.0 * g * g);
    if (delta_e >= 0.0) {
        sys.e_plus = 0.5 * (delta_e + root);
        sys.e_minus = -g * g / sys.e_plus;
    } else {
        sys.e_minus = 0.5 * (delta_e - root);
        sys.e_plus = -g * g / sys.e_minus;
    }

    // An overall sign on the coupling flips the bright-state sign only.
    const double sign = sys.bright_coupling() < 0.0 ? -1.0 : 1.0;
    const Eigen::Vector3d bright{0.0, sign * std::sin(sys.chi), sign * std::cos(sys.chi)};
    const Eigen::Vector3d excited{1.0, 0.0, 0.0};
    sys.phi_vec_plus = std::cos(sys.phi_plus) * excited + std::sin(sys.phi_plus) * bright;
    sys.phi_vec_minus = std::cos(sys.phi_minus) * excited + std::sin(sys.phi_minus) * bright;
    sys.dark_d = {0.0, std::cos(sys.chi), -std::sin(sys.chi)};
    return sys;
}

// Homogeneous bath: eta_1 = eta_2 = eta sqrt(L).
inline OneExcitationSystem homogeneous_eigensystem(double eta, int n_spins, double delta_e,
                                                   double prefactor = kDefaultPrefactor) {
    const double leg = std::abs(eta) * std::sqrt(static_cast<double>(n_spins));
    return one_excitation_eigensystem(leg, leg, delta_e, eta < 0.0 ? -prefactor : prefactor);
}

// H_E + H_I restricted to span{|e, all-down>, |phi_1>, |phi_2>}.
inline Eigen::Matrix3d restricted_operator(double eta1, double eta2, double delta_e,
                                           double prefactor) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(1, 1) = h(2, 2) = delta_e;
    h(0, 1) = h(1, 0) = prefactor * eta1;
    h(0, 2) = h(2, 0) = prefactor * eta2;
    return h;
}

// Embed a (|e,down>, |phi_1>, |phi_2>) vector into a full basis. For COLLECTIVE
// the eta matrix must be homogeneous, where |phi_m> = |g_m>|j, -j+1>.
inline Eigen::VectorXcd embed_one_excitation(const Eigen::Vector3d& v, const Basis& basis,
                                             const EtaMatrix& eta) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    out(static_cast<Eigen::Index>(basis.index(SystemLevel::E, 0))) = v(0);
    const auto [eta1, eta2] = leg_couplings(eta);
    const std::array<double, 2> norms{eta1, eta2};
    for (int leg = 0; leg < 2; ++leg) {
        const SystemLevel gm = leg == 0 ? SystemLevel::G1 : SystemLevel::G2;
        if (basis.kind() == ModelKind::COLLECTIVE) {
            out(static_cast<Eigen::Index>(basis.index(gm, 1))) = v(1 + leg);
            continue;
        }
        if (norms[leg] == 0.0) continue;
        for (int k = 0; k < basis.n_spins(); ++k) {
            const double xi = eta[static_cast<std::size_t>(k)][leg] / norms[leg];
            out(static_cast<Eigen::Index>(basis.index(gm, std::size_t{1} << k))) = v(1 + leg) * xi;
        }
    }
    return out;
}

struct GroundStateCorrection {
    // coeff[m][a]: amplitude of |Phi_a> in |G_m>, m = g1, g2, a = plus, minus.
    std::array<std::array<double, 2>, 2> coeff{};
    // max_{m,a} |coeff|; of order Omega0 / sqrt(eta_1^2 + eta_2^2) at strong coupling.
    double leakage{0.0};
};

// First-order dressing of |g_m, all-down> by H_S at fixed (omega_p, omega_s):
//   coeff = -<Phi_a| H_S |g_m, down> / E_a,  <Phi_a|H_S|g_1,down> = Omega_p cos(phi_a).
// The minus sign is the Rayleigh-Schroedinger sign for an unperturbed energy of 0;
// magnitudes are what the Zeno argument uses.
inline GroundStateCorrection perturbed_ground_states(const OneExcitationSystem& sys,
                                                     double omega_p, double omega_s) {
    const std::array<double, 2> energies{sys.e_plus, sys.e_minus};
    const std::array<double, 2> overlap{std::cos(sys.phi_plus), std::cos(sys.phi_minus)};
    const std::array<double, 2> drive{omega_p, omega_s};
    GroundStateCorrection out;
    for (int a = 0; a < 2; ++a) {
        if (energies[a] == 0.0)
            throw SingularDenominator("one-excitation eigenvalue is zero");
        for (int m = 0; m < 2; ++m) {
            out.coeff[m][a] = -drive[m] * overlap[a] / energies[a];
            out.leakage = std::max(out.leakage, std::abs(out.coeff[m][a]));
        }
    }
    return out;
}

// eta sqrt(2L) / max(|Delta_E|, Omega); Omega is Omega0, or the peak total drive
// Omega0/sqrt2 when at_peak is set. >> 1 means Zeno-frozen transfer.
inline double zeno_ratio(const RunConfig& cfg, bool at_peak = false) {
    const double eta = cfg.homogeneous_eta();
    const double drive = at_peak ? cfg.pulse.omega0 / std::numbers::sqrt2 : cfg.pulse.omega0;
    return std::abs(eta) * std::sqrt(2.0 * cfg.n_spins) / std::max(std::abs(cfg.delta_e), drive);
}

} // namespace stirap::spectral
