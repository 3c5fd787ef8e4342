#pragma once

#include <cmath>
#include <vector>

#include "numerics.hpp"
#include "states.hpp"

namespace optomech {

/// Position-space Gaussian psi(x) = exp(-a x^2 / 2 + b x + c), Re a > 0.
/// Coherent and squeezed-vacuum states are both of this form, which gives
/// closed forms for displaced overlaps and Wigner cross terms.
struct Wavepacket {
    Complex a{1.0, 0.0};
    Complex b{};
    Complex c{};

    Complex operator()(double x) const { return cexp(-0.5 * a * x * x + b * x + c); }
};

/// <x|beta> = pi^{-1/4} exp(-x^2/2 + sqrt(2) beta x - beta^2/2 - |beta|^2/2)
inline Wavepacket coherent_wavepacket(Complex beta)
{
    return {Complex{1.0, 0.0}, std::sqrt(2.0) * beta,
            -0.25 * std::log(pi) - 0.5 * beta * beta - 0.5 * std::norm(beta)};
}

/// S(zeta)|0> with the global phase fixed by <0|S(zeta)|0> = (cosh r)^{-1/2} > 0,
/// matching squeezed_fock_expansion.
inline Wavepacket squeezed_wavepacket(Complex zeta)
{
    const double r = std::abs(zeta);
    const Complex lambda = -std::polar(std::tanh(r), std::arg(zeta));
    const Complex a = (1.0 - lambda) / (1.0 + lambda);
    const Complex c = -0.5 * std::log(std::cosh(r)) + 0.25 * std::log(pi) +
                      0.5 * std::log((1.0 + a) / (2.0 * pi));
    return {a, Complex{}, c};
}

namespace detail {

/// ln of int exp(-A y^2 + B y + C) dy = sqrt(pi/A) exp(B^2/(4A) + C), Re A > 0.
inline Complex log_gaussian_integral(Complex A, Complex B, Complex C)
{
    return 0.5 * std::log(pi / A) + B * B / (4.0 * A) + C;
}

} // namespace detail

/// <f|D(xi)|g>, with D(xi) psi(x) = e^{-i p q / 2} e^{i p x} psi(x - q),
/// q = sqrt(2) Re xi, p = sqrt(2) Im xi.
inline Complex wavepacket_displaced_overlap(const Wavepacket& f, Complex xi, const Wavepacket& g)
{
    const double q = std::sqrt(2.0) * xi.real();
    const double p = std::sqrt(2.0) * xi.imag();
    const Complex A = 0.5 * (std::conj(f.a) + g.a);
    const Complex B = std::conj(f.b) + I_unit * p + g.a * q + g.b;
    const Complex C = std::conj(f.c) + g.c - 0.5 * g.a * q * q - g.b * q;
    return cexp(detail::log_gaussian_integral(A, B, C) - I_unit * (0.5 * p * q));
}

inline Complex wavepacket_overlap(const Wavepacket& f, const Wavepacket& g)
{
    return wavepacket_displaced_overlap(f, Complex{}, g);
}

/// Wigner cross term (1/pi) int conj f(x+y) g(x-y) e^{2 i p y} dy.
inline Complex wavepacket_wigner(const Wavepacket& f, const Wavepacket& g, double x, double p)
{
    const Complex fa = std::conj(f.a), fb = std::conj(f.b), fc = std::conj(f.c);
    const Complex A = 0.5 * (fa + g.a);
    const Complex B = -fa * x + g.a * x + fb - g.b + 2.0 * I_unit * p;
    const Complex C = -0.5 * (fa + g.a) * x * x + (fb + g.b) * x + fc + g.c;
    return cexp(detail::log_gaussian_integral(A, B, C)) / pi;
}

/// Weighted sum of wave packets; the common currency of the closed-form
/// characteristic-function and Wigner routes.
struct WavepacketSum {
    std::vector<Complex> weights;
    std::vector<Wavepacket> packets;

    Complex operator()(double x) const
    {
        Complex s{};
        for (std::size_t i = 0; i < packets.size(); ++i) s += weights[i] * packets[i](x);
        return s;
    }
};

inline WavepacketSum to_wavepackets(const CoherentSuperposition& s)
{
    WavepacketSum out;
    for (const auto& t : s.terms) {
        out.weights.push_back(t.weight);
        out.packets.push_back(coherent_wavepacket(t.amplitude));
    }
    return out;
}

inline WavepacketSum to_wavepackets(const SqueezedSuperposition& s)
{
    WavepacketSum out;
    for (const auto& t : s.terms) {
        out.weights.push_back(t.weight);
        out.packets.push_back(squeezed_wavepacket(t.squeeze));
    }
    return out;
}

} // namespace optomech
