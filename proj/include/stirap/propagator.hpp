// propagator.hpp - Fixed-step RK4 for i dpsi/dt = H(t) psi over [-T, T] and the
// reduced-system observables (populations, purity, J_z statistics).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "stirap/errors.hpp"
#include "stirap/hamiltonian.hpp"
#include "stirap/model.hpp"
#include "stirap/pulses.hpp"

namespace stirap::propagator {

inline constexpr std::size_t kMinAutoSteps = 100000;
inline constexpr double kStepSafety = 20.0;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kNormHardLimit = 1e-6;

struct IntegratorSpec {
    std::size_t steps{kMinAutoSteps};
    double dt{0.0};
};

struct Observables {
    double p_g1{0.0};
    double p_g2{0.0};
    double p_e{0.0};
    double purity{1.0};
    double jz_mean{0.0};
    double jz_var{0.0};
    double norm{1.0};
};

struct Snapshot {
    double t{0.0};
    Observables obs{};
    Eigen::Matrix3cd rho{Eigen::Matrix3cd::Zero()};
    double energy_imag{0.0};  // Im <psi|H(t)|psi>
};

struct RunResult {
    double p_g1{0.0};
    double p_g2{0.0};
    double p_e{0.0};
    double purity{1.0};
    double jz_mean{0.0};
    double jz_var{0.0};
    double norm_error{0.0};      // | ||psi(T)|| - 1 |
    double max_norm_drift{0.0};  // max over all steps
    double max_energy_imag{0.0};  // max over snapshots
    double norm_bound{0.0};
    IntegratorSpec integrator{};
    std::vector<Snapshot> snapshots;
};

// rho_S[a][b] = sum_bath psi(a, bath) conj(psi(b, bath))
inline Eigen::Matrix3cd reduced_density(const StateVector& psi) {
    const auto nb = static_cast<Eigen::Index>(psi.basis.bath_dimension());
    Eigen::Matrix3cd rho;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            rho(a, b) = psi.amplitudes.segment(a * nb, nb).dot(psi.amplitudes.segment(b * nb, nb));
    // Eigen's dot conjugates the first argument; the sum above is conj(rho(a,b)).
    return rho.conjugate();
}

inline double purity(const Eigen::Matrix3cd& rho) {
    return (rho * rho).trace().real();
}

// (<J_z>, <(J_z - <J_z>)^2>)
inline std::pair<double, double> jz_statistics(const StateVector& psi) {
    const Basis& basis = psi.basis;
    const std::size_t nb = basis.bath_dimension();
    std::vector<double> weight(nb, 0.0);
    for (SystemLevel level : kLevels)
        for (std::size_t b = 0; b < nb; ++b)
            weight[b] += std::norm(psi(level, b));
    double mean = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mean += weight[b] * basis.jz(b);
    double var = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        const double d = basis.jz(b) - mean;
        var += weight[b] * d * d;
    }
    return {mean, var};
}

inline Observables observe(const StateVector& psi) {
    const Eigen::Matrix3cd rho = reduced_density(psi);
    const auto [mean, var] = jz_statistics(psi);
    return {rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(), purity(rho), mean, var,
            psi.norm()};
}

// Upper bound on max_t ||H(t)||_2 by the triangle inequality over the affine parts:
//   |Delta_S| + |Delta_E| L + 2|c| sqrt(b_1^2 + b_2^2) + Omega0
// with b_m a bound on the bath operator of leg m: |eta| sqrt(j(j+1)) in the
// collective sector, sum_k |eta_k^(m)| per spin.
inline double norm_bound(const hamiltonian::AffineHamiltonian& h, const RunConfig& cfg) {
    double b1 = 0.0;
    double b2 = 0.0;
    if (h.basis.kind() == ModelKind::COLLECTIVE) {
        const double j = h.basis.j();
        b1 = b2 = std::abs(cfg.homogeneous_eta()) * std::sqrt(j * (j + 1.0));
    } else {
        for (const auto& row : cfg.eta_matrix()) {
            b1 += std::abs(row[0]);
            b2 += std::abs(row[1]);
        }
    }
    return std::abs(cfg.delta_s) + std::abs(cfg.delta_e) * cfg.n_spins +
           2.0 * std::abs(cfg.coupling_prefactor) * std::hypot(b1, b2) + cfg.pulse.omega0;
}

// N = max(1e5, ceil(20 T bound)), so dt bound <= 0.1 with dt = 2T/N.
inline std::size_t choose_steps(const RunConfig& cfg, double bound) {
    if (!(bound > 0.0)) throw InvalidParameter("norm bound must be positive");
    const double n = std::ceil(kStepSafety * cfg.pulse.t_window * bound);
    return std::max(kMinAutoSteps, static_cast<std::size_t>(n));
}

// Flush-to-zero / denormals-are-zero for the lifetime of the guard. Amplitudes of
// highly excited bath states decay through the subnormal range, where x87/SSE
// arithmetic is two orders of magnitude slower; values below 1e-308 carry no
// information at the 1e-9 tolerances used here.
class FlushDenormals {
public:
    FlushDenormals() {
#if defined(__SSE2__)
        saved_ = _mm_getcsr();
        _mm_setcsr(saved_ | 0x8040u);
#endif
    }
    ~FlushDenormals() {
#if defined(__SSE2__)
        _mm_setcsr(saved_);
#endif
    }
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;

private:
    unsigned int saved_{0};
};

// h0, a_p and a_s merged onto one CSR sparsity pattern so that H(t) x is a
// single pass: value = v0 + Omega_p vp + Omega_s vs.
class FusedOperator {
public:
    explicit FusedOperator(const hamiltonian::AffineHamiltonian& h) {
        const hamiltonian::SparseMatrix& m0 = h.h0.matrix();
        const hamiltonian::SparseMatrix& mp = h.a_p.matrix();
        const hamiltonian::SparseMatrix& ms = h.a_s.matrix();
        // Pattern of the sum of magnitudes, so no entry cancels out of it.
        hamiltonian::SparseMatrix pattern = m0.cwiseAbs().cast<cplx>() +
                                            mp.cwiseAbs().cast<cplx>() +
                                            ms.cwiseAbs().cast<cplx>();
        pattern.makeCompressed();
        const Eigen::Index n = pattern.rows();
        row_start_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (hamiltonian::SparseMatrix::InnerIterator it(pattern, r); it; ++it) {
                cols_.push_back(static_cast<int>(it.col()));
                const cplx v = m0.coeff(r, it.col());
                v0_re_.push_back(v.real());
                v0_im_.push_back(v.imag());
                vp_.push_back(mp.coeff(r, it.col()).real());
                vs_.push_back(ms.coeff(r, it.col()).real());
            }
            row_start_[static_cast<std::size_t>(r) + 1] = cols_.size();
        }
        re_.resize(cols_.size());
    }

    // out = -i H x at envelope values (omega_p, omega_s). Real arithmetic is
    // spelled out so the compiler does not route through the checked complex
    // multiply.
    void rhs(double omega_p, double omega_s, const Eigen::VectorXcd& x, Eigen::VectorXcd& out) {
        const std::size_t nnz = cols_.size();
        for (std::size_t k = 0; k < nnz; ++k) {
            re_[k] = v0_re_[k] + omega_p * vp_[k] + omega_s * vs_[k];
        }
        const std::size_t n = row_start_.size() - 1;
        const cplx* xs = x.data();
        for (std::size_t r = 0; r < n; ++r) {
            double acc_re = 0.0;
            double acc_im = 0.0;
            for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
                const double xr = xs[cols_[k]].real();
                const double xi = xs[cols_[k]].imag();
                acc_re += re_[k] * xr - v0_im_[k] * xi;
                acc_im += re_[k] * xi + v0_im_[k] * xr;
            }
            out(static_cast<Eigen::Index>(r)) = cplx{acc_im, -acc_re};
        }
    }

private:
    std::vector<std::size_t> row_start_;
    std::vector<int> cols_;
    std::vector<double> v0_re_;
    std::vector<double> v0_im_;
    std::vector<double> vp_;
    std::vector<double> vs_;
    std::vector<double> re_;
};

// Classical RK4 from t0 to t1 in `steps` equal steps. observer(k, t, psi) runs
// before the first step (k = 0) and after every step k = 1..steps.
template <class Observer>
void rk4_integrate(const hamiltonian::AffineHamiltonian& h, Eigen::VectorXcd& psi, double t0,
                   double t1, std::size_t steps, Observer&& observer) {
    if (steps == 0) throw InvalidParameter("rk4 needs at least one step");
    if (static_cast<std::size_t>(psi.size()) != h.basis.dimension())
        throw ShapeError("state dimension does not match Hamiltonian");
    const double dt = (t1 - t0) / static_cast<double>(steps);
    const Eigen::Index n = psi.size();
    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), tmp(n);
    FusedOperator op(h);
    const FlushDenormals ftz;

    observer(std::size_t{0}, t0, static_cast<const Eigen::VectorXcd&>(psi));
    pulses::PulseSample start = pulses::sample(t0, h.pulse);
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = t0 + static_cast<double>(step) * dt;
        const double t_end = t0 + static_cast<double>(step + 1) * dt;
        const pulses::PulseSample mid = pulses::sample(0.5 * (t + t_end), h.pulse);
        const pulses::PulseSample end = pulses::sample(t_end, h.pulse);

        op.rhs(start.omega_p, start.omega_s, psi, k1);
        tmp = psi + (0.5 * dt) * k1;
        op.rhs(mid.omega_p, mid.omega_s, tmp, k2);
        tmp = psi + (0.5 * dt) * k2;
        op.rhs(mid.omega_p, mid.omega_s, tmp, k3);
        tmp = psi + dt * k3;
        op.rhs(end.omega_p, end.omega_s, tmp, k4);
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        start = end;
        observer(step + 1, t_end, static_cast<const Eigen::VectorXcd&>(psi));
    }
}

// Final state only; no norm monitoring. Used for convergence studies at step
// counts where evolve() would reject the drift.
inline StateVector propagate(const hamiltonian::AffineHamiltonian& h, const StateVector& psi0,
                             std::size_t steps) {
    Eigen::VectorXcd psi = psi0.amplitudes;
    rk4_integrate(h, psi, -h.pulse.t_window, h.pulse.t_window, steps,
                  [](std::size_t, double, const Eigen::VectorXcd&) {});
    return StateVector(psi0.basis, std::move(psi));
}

inline RunResult evolve(const RunConfig& cfg) {
    const hamiltonian::AffineHamiltonian h = hamiltonian::build_affine(cfg);
    RunResult result;
    result.norm_bound = norm_bound(h, cfg);
    const std::size_t steps = cfg.steps ? *cfg.steps : choose_steps(cfg, result.norm_bound);
    const double t0 = -cfg.pulse.t_window;
    const double t1 = cfg.pulse.t_window;
    result.integrator = {steps, (t1 - t0) / static_cast<double>(steps)};

    // Snapshot step indices, uniform in time including both endpoints.
    std::vector<std::size_t> marks;
    if (cfg.snapshot_count == 1) {
        marks.push_back(steps);
    } else if (cfg.snapshot_count > 1) {
        const std::size_t s = cfg.snapshot_count - 1;
        for (std::size_t i = 0; i <= s; ++i)
            marks.push_back(static_cast<std::size_t>(
                std::llround(static_cast<double>(i) * static_cast<double>(steps) / s)));
        marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    }
    result.snapshots.reserve(marks.size());
    std::size_t next_mark = 0;

    Eigen::VectorXcd psi = initial_state(h.basis).amplitudes;
    Eigen::VectorXcd hpsi(psi.size());
    rk4_integrate(h, psi, t0, t1, steps,
                  [&](std::size_t k, double t, const Eigen::VectorXcd& x) {
                      const double drift = std::abs(x.norm() - 1.0);
                      result.max_norm_drift = std::max(result.max_norm_drift, drift);
                      if (!(drift <= kNormHardLimit)) {
                          std::ostringstream msg;
                          msg << "norm drift " << drift << " at t = " << t
                              << " exceeds " << kNormHardLimit << " (dt = "
                              << result.integrator.dt << ", bound = " << result.norm_bound
                              << ")";
                          throw IntegrationFailure(msg.str());
                      }
                      if (next_mark < marks.size() && marks[next_mark] == k) {
                          ++next_mark;
                          const StateVector sv(h.basis, x);
                          hamiltonian::apply_into(h, t, x, hpsi);
                          const double e_imag = std::abs(x.dot(hpsi).imag());
                          result.max_energy_imag = std::max(result.max_energy_imag, e_imag);
                          result.snapshots.push_back(
                              {t, observe(sv), reduced_density(sv), e_imag});
                      }
                  });

    const Observables fin = observe(StateVector(h.basis, std::move(psi)));
    result.p_g1 = fin.p_g1;
    result.p_g2 = fin.p_g2;
    result.p_e = fin.p_e;
    result.purity = fin.purity;
    result.jz_mean = fin.jz_mean;
    result.jz_var = fin.jz_var;
    result.norm_error = std::abs(fin.norm - 1.0);
    return result;
}

} // namespace stirap::propagator
