// pulses.hpp - Counterintuitive Stokes/pump envelopes and mixing angle
//
//   Omega_s(t) = Omega0/sqrt2 sech(t/tau) cos[pi/4 (tanh(t/tau) + 1)]
//   Omega_p(t) = Omega0/sqrt2 sech(t/tau) sin[pi/4 (tanh(t/tau) + 1)]
//
// so that Omega_p/Omega_s = tan(theta) with theta = pi/4 (tanh(t/tau) + 1).

#pragma once

#include <cmath>
#include <numbers>

#include "stirap/model.hpp"

namespace stirap::pulses {

inline constexpr double kSechClamp = 700.0;

struct PulseSample {
    double t{0.0};
    double omega_s{0.0};
    double omega_p{0.0};
    double theta{0.0};
};

namespace detail {

// sech(x), exactly 0 beyond the clamp where cosh overflows.
inline double sech(double x) noexcept {
    if (std::abs(x) > kSechClamp) return 0.0;
    return 1.0 / std::cosh(x);
}

// 1 + tanh(x) without cancellation in the left tail.
inline double one_plus_tanh(double x) noexcept { return 2.0 / (1.0 + std::exp(-2.0 * x)); }

} // namespace detail

inline double mixing_angle(double t, const PulseParams& p) noexcept {
    return 0.25 * std::numbers::pi * detail::one_plus_tanh(t / p.tau);
}

// cos(theta) = sin(pi/2 - theta) and pi/2 - theta(t) = theta(-t); both envelopes
// go through sin of their own small angle, so each tail keeps full relative precision.
inline double omega_s(double t, const PulseParams& p) noexcept {
    const double x = t / p.tau;
    return p.omega0 / std::numbers::sqrt2 * detail::sech(x) *
           std::sin(0.25 * std::numbers::pi * detail::one_plus_tanh(-x));
}

inline double omega_p(double t, const PulseParams& p) noexcept {
    const double x = t / p.tau;
    return p.omega0 / std::numbers::sqrt2 * detail::sech(x) *
           std::sin(0.25 * std::numbers::pi * detail::one_plus_tanh(x));
}

inline PulseSample sample(double t, const PulseParams& p) noexcept {
    return {t, omega_s(t, p), omega_p(t, p), mixing_angle(t, p)};
}

// (Omega0 tau)^-1; adiabatic following needs this << 1.
inline double adiabaticity_parameter(const PulseParams& p) noexcept {
    return 1.0 / (p.omega0 * p.tau);
}

} // namespace stirap::pulses
