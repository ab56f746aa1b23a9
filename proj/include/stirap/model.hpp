// model.hpp - Run parameters, basis enumeration and state vectors
//
// Two representations of the three-level system plus spin bath are supported:
//   COLLECTIVE: |level> x |j = L/2, m>, 3(L+1) states
//   TENSOR:     |level> x |s_1 ... s_L>, 3 * 2^L states
// Both use a level-major flat index, flat = level * bath_dimension + bath,
// where `bath` is the excitation count n = m + L/2 (collective) or the spin
// bitmask with bit k set for spin k up (tensor).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stirap/errors.hpp"

namespace stirap {

using cplx = std::complex<double>;

enum class SystemLevel : int { G1 = 0, G2 = 1, E = 2 };

inline constexpr std::array<SystemLevel, 3> kLevels{SystemLevel::G1, SystemLevel::G2,
                                                   SystemLevel::E};

constexpr int ordinal(SystemLevel l) noexcept { return static_cast<int>(l); }

enum class ModelKind { COLLECTIVE, TENSOR };

inline const char* to_string(ModelKind k) noexcept {
    return k == ModelKind::COLLECTIVE ? "collective" : "tensor";
}

inline constexpr int kMaxTensorSpins = 14;
inline constexpr std::size_t kMinExplicitSteps = 1000;

struct PulseParams {
    double omega0{100.0};  // peak-amplitude scale
    double tau{0.1};       // pulse width
    double t_window{1.0};  // evolution runs over [-t_window, t_window]

    void validate() const {
        if (!(omega0 > 0.0) || !std::isfinite(omega0))
            throw InvalidParameter("omega0 must be positive and finite");
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw InvalidParameter("tau must be positive and finite");
        if (!(t_window > 0.0) || !std::isfinite(t_window))
            throw InvalidParameter("t_window must be positive and finite");
        if (!std::isfinite(1.0 / (omega0 * tau)))
            throw InvalidParameter("adiabaticity ratio 1/(omega0*tau) is not finite");
    }
};

// eta_k^(m) with row k = spin, column m = leg (g1, g2)
using EtaMatrix = std::vector<std::array<double, 2>>;
using Coupling = std::variant<double, EtaMatrix>;

inline bool is_homogeneous(const Coupling& c) noexcept {
    return std::holds_alternative<double>(c);
}

struct RunConfig {
    PulseParams pulse{};
    double delta_s{1.0};
    double delta_e{1.0};
    int n_spins{10};
    Coupling coupling{0.0};
    double coupling_prefactor{0.5};
    ModelKind model_kind{ModelKind::COLLECTIVE};
    std::optional<std::size_t> steps{};  // empty = choose automatically
    std::size_t snapshot_count{201};

    double homogeneous_eta() const {
        if (!is_homogeneous(coupling))
            throw InvalidConfiguration("coupling is not homogeneous");
        return std::get<double>(coupling);
    }

    // eta_k^(m) for every spin; a homogeneous eta is broadcast.
    EtaMatrix eta_matrix() const {
        if (is_homogeneous(coupling)) {
            const double eta = std::get<double>(coupling);
            return EtaMatrix(static_cast<std::size_t>(n_spins), {eta, eta});
        }
        return std::get<EtaMatrix>(coupling);
    }

    void validate() const {
        pulse.validate();
        if (n_spins < 1) throw InvalidParameter("n_spins must be >= 1");
        if (!std::isfinite(delta_s)) throw InvalidParameter("delta_s must be finite");
        if (!std::isfinite(delta_e)) throw InvalidParameter("delta_e must be finite");
        if (!std::isfinite(coupling_prefactor))
            throw InvalidParameter("coupling_prefactor must be finite");
        if (is_homogeneous(coupling)) {
            if (!std::isfinite(std::get<double>(coupling)))
                throw InvalidParameter("eta must be finite");
        } else {
            if (model_kind == ModelKind::COLLECTIVE)
                throw InvalidConfiguration(
                    "collective model requires a homogeneous coupling");
            const auto& m = std::get<EtaMatrix>(coupling);
            if (m.size() != static_cast<std::size_t>(n_spins))
                throw InvalidConfiguration("eta matrix must have L rows of 2 entries");
            for (const auto& row : m)
                for (double v : row)
                    if (!std::isfinite(v)) throw InvalidParameter("eta matrix entry not finite");
        }
        if (model_kind == ModelKind::TENSOR && n_spins > kMaxTensorSpins)
            throw CapacityError("tensor model supports at most " +
                                std::to_string(kMaxTensorSpins) + " spins, got " +
                                std::to_string(n_spins));
        if (steps && *steps < kMinExplicitSteps)
            throw InvalidParameter("explicit step count must be >= " +
                                   std::to_string(kMinExplicitSteps));
    }
};

class Basis;
inline Basis collective_basis(int n_spins);
inline Basis tensor_basis(int n_spins);

class Basis {
public:
    struct Label {
        SystemLevel level;
        std::size_t bath;  // excitation count (collective) or spin bitmask (tensor)
        friend bool operator==(const Label&, const Label&) = default;
    };

    ModelKind kind() const noexcept { return kind_; }
    int n_spins() const noexcept { return n_spins_; }
    std::size_t bath_dimension() const noexcept { return bath_dim_; }
    std::size_t dimension() const noexcept { return 3 * bath_dim_; }
    double j() const noexcept { return 0.5 * n_spins_; }

    std::size_t index(SystemLevel level, std::size_t bath) const {
        if (bath >= bath_dim_) throw ShapeError("bath label out of range");
        return static_cast<std::size_t>(ordinal(level)) * bath_dim_ + bath;
    }

    // COLLECTIVE only: index of (level, m) with m in {-j, ..., j}.
    std::size_t index_m(SystemLevel level, double m) const {
        if (kind_ != ModelKind::COLLECTIVE) throw ShapeError("index_m needs a collective basis");
        const double n = m + j();
        if (n < 0.0 || n > n_spins_ || n != std::floor(n))
            throw ShapeError("m out of range for j = L/2");
        return index(level, static_cast<std::size_t>(n));
    }

    Label label(std::size_t flat) const {
        if (flat >= dimension()) throw ShapeError("flat index out of range");
        return {static_cast<SystemLevel>(flat / bath_dim_), flat % bath_dim_};
    }

    // Number of up spins in a bath label.
    int excitations(std::size_t bath) const noexcept {
        return kind_ == ModelKind::COLLECTIVE
                   ? static_cast<int>(bath)
                   : std::popcount(static_cast<std::uint64_t>(bath));
    }

    // J_z eigenvalue of a bath label.
    double jz(std::size_t bath) const noexcept { return excitations(bath) - j(); }

    friend bool operator==(const Basis&, const Basis&) = default;

private:
    Basis(ModelKind kind, int n, std::size_t bath_dim)
        : kind_(kind), n_spins_(n), bath_dim_(bath_dim) {}

    ModelKind kind_;
    int n_spins_;
    std::size_t bath_dim_;

    friend Basis collective_basis(int);
    friend Basis tensor_basis(int);
};

inline Basis collective_basis(int n_spins) {
    if (n_spins < 1) throw InvalidParameter("collective basis needs L >= 1");
    return Basis(ModelKind::COLLECTIVE, n_spins, static_cast<std::size_t>(n_spins) + 1);
}

inline Basis tensor_basis(int n_spins) {
    if (n_spins < 1) throw InvalidParameter("tensor basis needs L >= 1");
    if (n_spins > kMaxTensorSpins)
        throw CapacityError("tensor basis supports at most " + std::to_string(kMaxTensorSpins) +
                            " spins");
    return Basis(ModelKind::TENSOR, n_spins, std::size_t{1} << n_spins);
}

inline Basis make_basis(const RunConfig& cfg) {
    return cfg.model_kind == ModelKind::COLLECTIVE ? collective_basis(cfg.n_spins)
                                                    : tensor_basis(cfg.n_spins);
}

struct StateVector {
    Basis basis;
    Eigen::VectorXcd amplitudes;

    StateVector(Basis b, Eigen::VectorXcd amps) : basis(b), amplitudes(std::move(amps)) {
        if (static_cast<std::size_t>(amplitudes.size()) != basis.dimension())
            throw ShapeError("amplitude vector does not match basis dimension");
    }

    double norm() const { return amplitudes.norm(); }
    cplx operator()(SystemLevel l, std::size_t bath) const {
        return amplitudes(static_cast<Eigen::Index>(basis.index(l, bath)));
    }
};

// |g1> x |all spins down>
inline StateVector initial_state(const Basis& basis) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
    amps(static_cast<Eigen::Index>(basis.index(SystemLevel::G1, 0))) = 1.0;
    return StateVector(basis, std::move(amps));
}

} // namespace stirap
