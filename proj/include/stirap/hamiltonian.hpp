// hamiltonian.hpp - Rotating-frame Hamiltonian as H(t) = h0 + Omega_p(t) a_p + Omega_s(t) a_s
//
// h0 holds the Delta_S |e><e| term, the bath term Delta_E (J_z + L/2) and the RWA
// system-bath exchange. The two pulse couplers are kept separate so a time step
// only needs two scalar envelope evaluations.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "stirap/errors.hpp"
#include "stirap/model.hpp"
#include "stirap/pulses.hpp"

namespace stirap::hamiltonian {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

class SparseHermitian {
public:
    SparseHermitian() = default;

    // Full (not triangular) entry list; duplicates are summed.
    SparseHermitian(std::size_t dim, const std::vector<Triplet>& entries)
        : m_(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) {
        m_.setFromTriplets(entries.begin(), entries.end());
        m_.makeCompressed();
        if (hermiticity_defect() != 0.0)
            throw InvalidConfiguration("operator assembled from entries is not Hermitian");
    }

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(m_.nonZeros()); }
    const SparseMatrix& matrix() const noexcept { return m_; }

    // Max |H - H^dagger| over all entries.
    double hermiticity_defect() const {
        SparseMatrix diff = m_ - SparseMatrix(m_.adjoint());
        double worst = 0.0;
        for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
                worst = std::max(worst, std::abs(it.value()));
        return worst;
    }

    cplx coeff(std::size_t row, std::size_t col) const {
        return m_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

private:
    SparseMatrix m_;
};

struct PulseCouplers {
    SparseHermitian a_p;  // |g1><e| + |e><g1|, identity on the bath
    SparseHermitian a_s;  // |g2><e| + |e><g2|
};

struct AffineHamiltonian {
    Basis basis;
    SparseHermitian h0;
    SparseHermitian a_p;
    SparseHermitian a_s;
    PulseParams pulse;
};

namespace detail {

inline void add_hermitian_pair(std::vector<Triplet>& out, std::size_t row, std::size_t col,
                               cplx v) {
    if (v == cplx{0.0, 0.0}) return;
    out.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), v);
    if (row != col)
        out.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row),
                         std::conj(v));
}

inline void add_diagonal_terms(std::vector<Triplet>& out, const RunConfig& cfg,
                               const Basis& basis) {
    for (SystemLevel level : kLevels) {
        for (std::size_t b = 0; b < basis.bath_dimension(); ++b) {
            double d = cfg.delta_e * basis.excitations(b);
            if (level == SystemLevel::E) d += cfg.delta_s;
            const std::size_t i = basis.index(level, b);
            add_hermitian_pair(out, i, i, d);
        }
    }
}

} // namespace detail

// Delta_S |e><e| + Delta_E (J_z + L/2) + c eta [(|e><g1| + |e><g2|) J_- + h.c.]
// within the j = L/2 sector, c = cfg.coupling_prefactor.
inline SparseHermitian build_static_collective(const RunConfig& cfg, const Basis& basis) {
    if (cfg.model_kind != ModelKind::COLLECTIVE || basis.kind() != ModelKind::COLLECTIVE)
        throw InvalidConfiguration("build_static_collective needs the collective model");
    if (!is_homogeneous(cfg.coupling))
        throw InvalidConfiguration("collective model requires a homogeneous coupling");
    if (basis.n_spins() != cfg.n_spins) throw ShapeError("basis does not match n_spins");

    const double g = cfg.coupling_prefactor * std::get<double>(cfg.coupling);
    const int L = cfg.n_spins;
    std::vector<Triplet> entries;
    entries.reserve(3 * basis.bath_dimension() + 4 * static_cast<std::size_t>(L));
    detail::add_diagonal_terms(entries, cfg, basis);
    // <e, n-1| J_- |n> = sqrt(n (L - n + 1)) in excitation-count labels.
    for (int n = 1; n <= L; ++n) {
        const double amp = g * std::sqrt(static_cast<double>(n) * (L - n + 1));
        const std::size_t e = basis.index(SystemLevel::E, static_cast<std::size_t>(n - 1));
        for (SystemLevel gm : {SystemLevel::G1, SystemLevel::G2})
            detail::add_hermitian_pair(entries, e, basis.index(gm, static_cast<std::size_t>(n)),
                                       amp);
    }
    return SparseHermitian(basis.dimension(), entries);
}

// Per-spin RWA model: Delta_S |e><e| + Delta_E sum_k (sz_k + 1)/2
//   + sum_{m,k} c eta_k^(m) (|g_m><e| sigma_+^(k) + h.c.)
inline SparseHermitian build_tensor_full(const RunConfig& cfg, const Basis& basis) {
    if (cfg.model_kind != ModelKind::TENSOR || basis.kind() != ModelKind::TENSOR)
        throw InvalidConfiguration("build_tensor_full needs the tensor model");
    if (basis.n_spins() != cfg.n_spins) throw ShapeError("basis does not match n_spins");
    if (!is_homogeneous(cfg.coupling) &&
        std::get<EtaMatrix>(cfg.coupling).size() != static_cast<std::size_t>(cfg.n_spins))
        throw InvalidConfiguration("eta matrix must be L x 2");

    const EtaMatrix eta = cfg.eta_matrix();
    const std::size_t nb = basis.bath_dimension();
    std::vector<Triplet> entries;
    entries.reserve(3 * nb + 2 * 2 * nb * static_cast<std::size_t>(cfg.n_spins));
    detail::add_diagonal_terms(entries, cfg, basis);
    for (int k = 0; k < cfg.n_spins; ++k) {
        const std::size_t bit = std::size_t{1} << k;
        for (int leg = 0; leg < 2; ++leg) {
            const double amp = cfg.coupling_prefactor * eta[static_cast<std::size_t>(k)][leg];
            const SystemLevel gm = leg == 0 ? SystemLevel::G1 : SystemLevel::G2;
            for (std::size_t mask = 0; mask < nb; ++mask) {
                if (mask & bit) continue;
                detail::add_hermitian_pair(entries, basis.index(gm, mask | bit),
                                           basis.index(SystemLevel::E, mask), amp);
            }
        }
    }
    return SparseHermitian(basis.dimension(), entries);
}

inline SparseHermitian build_static(const RunConfig& cfg, const Basis& basis) {
    return cfg.model_kind == ModelKind::COLLECTIVE ? build_static_collective(cfg, basis)
                                                    : build_tensor_full(cfg, basis);
}

inline PulseCouplers build_pulse_couplers(const Basis& basis) {
    auto coupler = [&](SystemLevel g) {
        std::vector<Triplet> entries;
        entries.reserve(2 * basis.bath_dimension());
        for (std::size_t b = 0; b < basis.bath_dimension(); ++b)
            detail::add_hermitian_pair(entries, basis.index(g, b),
                                       basis.index(SystemLevel::E, b), 1.0);
        return SparseHermitian(basis.dimension(), entries);
    };
    return {coupler(SystemLevel::G1), coupler(SystemLevel::G2)};
}

// N = |e><e| + sum_k (sz_k + 1)/2
inline SparseHermitian number_operator(const Basis& basis) {
    std::vector<Triplet> entries;
    entries.reserve(basis.dimension());
    for (SystemLevel level : kLevels)
        for (std::size_t b = 0; b < basis.bath_dimension(); ++b) {
            const double n = basis.excitations(b) + (level == SystemLevel::E ? 1 : 0);
            detail::add_hermitian_pair(entries, basis.index(level, b), basis.index(level, b), n);
        }
    return SparseHermitian(basis.dimension(), entries);
}

// Flat indices of the N = n eigenspace, ascending.
inline std::vector<std::size_t> sector_indices(const Basis& basis, int n) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const Basis::Label l = basis.label(i);
        if (basis.excitations(l.bath) + (l.level == SystemLevel::E ? 1 : 0) == n) out.push_back(i);
    }
    return out;
}

// Dense restriction of an operator to a list of basis indices.
inline Eigen::MatrixXcd restrict_to(const SparseHermitian& op, const std::vector<std::size_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(r, c) = op.coeff(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
    return out;
}

inline AffineHamiltonian build_affine(const RunConfig& cfg) {
    cfg.validate();
    const Basis basis = make_basis(cfg);
    PulseCouplers pc = build_pulse_couplers(basis);
    return {basis, build_static(cfg, basis), std::move(pc.a_p), std::move(pc.a_s), cfg.pulse};
}

// out = H(t) in, no allocation when out is already sized.
inline void apply_into(const AffineHamiltonian& h, double t, const Eigen::VectorXcd& in,
                       Eigen::VectorXcd& out) {
    if (static_cast<std::size_t>(in.size()) != h.basis.dimension())
        throw ShapeError("state dimension does not match Hamiltonian");
    const pulses::PulseSample s = pulses::sample(t, h.pulse);
    out.noalias() = h.h0.matrix() * in;
    out.noalias() += s.omega_p * (h.a_p.matrix() * in);
    out.noalias() += s.omega_s * (h.a_s.matrix() * in);
}

inline Eigen::VectorXcd apply(const AffineHamiltonian& h, double t, const Eigen::VectorXcd& psi) {
    Eigen::VectorXcd out(psi.size());
    apply_into(h, t, psi, out);
    return out;
}

inline Eigen::VectorXcd apply(const AffineHamiltonian& h, double t, const StateVector& psi) {
    if (!(psi.basis == h.basis)) throw ShapeError("state basis does not match Hamiltonian");
    return apply(h, t, psi.amplitudes);
}

// Dense H(t), for oracles and small-system checks.
inline Eigen::MatrixXcd dense_at(const AffineHamiltonian& h, double t) {
    const pulses::PulseSample s = pulses::sample(t, h.pulse);
    return h.h0.dense() + s.omega_p * h.a_p.dense() + s.omega_s * h.a_s.dense();
}

// Max-entry norm of [A, B].
inline double commutator_max(const SparseHermitian& a, const SparseHermitian& b) {
    SparseMatrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < c.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(c, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

} // namespace stirap::hamiltonian
