#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "states.hpp"

namespace optomech {

/// End-mirror (cubic coupling) parameters, dimensionless: k = g / omega_m,
/// t = omega_m tau. Defaults are the Fig. 1 working point.
struct CubicParams {
    double k = 1.0;
    double t = pi;
    Complex alpha{0.8, 0.0};
    Complex beta0{2.0, 0.0};
    double nbar = 0.0;
    double x = 0.0;
    int n_ph = 0; // photon truncation; 0 selects default_photon_truncation(alpha)

    void validate() const
    {
        if (!(k >= 0.0)) throw std::invalid_argument("CubicParams: k must be >= 0");
        if (!(t >= 0.0)) throw std::invalid_argument("CubicParams: t must be >= 0");
        if (!(nbar >= 0.0)) throw std::invalid_argument("CubicParams: nbar must be >= 0");
        if (!std::isfinite(x)) throw std::invalid_argument("CubicParams: x must be finite");
        if (n_ph < 0) throw std::invalid_argument("CubicParams: n_ph must be >= 0");
    }
};

/// Smallest N with cumulative Poisson(|alpha|^2) weight over 0..N >= 1 - 1e-12.
inline int default_photon_truncation(Complex alpha)
{
    const double mean = std::norm(alpha);
    if (mean == 0.0) return 1;
    double cumulative = 0.0;
    for (int n = 0;; ++n) {
        cumulative += std::exp(-mean + n * std::log(mean) - log_factorial(n));
        if (cumulative >= 1.0 - 1e-12 && n >= 1) return n;
        if (n > 100000) throw TruncationInsufficient("photon truncation does not converge");
    }
}

inline int photon_truncation(const CubicParams& p)
{
    return p.n_ph > 0 ? p.n_ph : default_photon_truncation(p.alpha);
}

/// phi_n(t) = beta e^{-it} + k n (1 - e^{-it})
inline Complex branch_amplitude(int n, double t, double k, Complex beta)
{
    const Complex rot = std::polar(1.0, -t);
    return beta * rot + k * n * (1.0 - rot);
}

/// e^{i k^2 n^2 (t - sin t)}
inline Complex kerr_phase(int n, double t, double k)
{
    const double nn = static_cast<double>(n) * n;
    return std::polar(1.0, k * k * nn * (t - std::sin(t)));
}

/// Sums weights of terms whose amplitudes coincide.
inline CoherentSuperposition merge_coincident(const CoherentSuperposition& s)
{
    std::vector<CoherentTerm> out;
    for (const auto& t : s.terms) {
        auto it = std::find_if(out.begin(), out.end(), [&](const CoherentTerm& o) {
            return std::abs(o.amplitude - t.amplitude) <= 1e-14 * (1.0 + std::abs(t.amplitude));
        });
        if (it == out.end())
            out.push_back(t);
        else
            it->weight += t.weight;
    }
    return CoherentSuperposition(std::move(out), false);
}

/// Mechanical state conditioned on the homodyne outcome x of the cavity
/// quadrature (b + b^dag)/sqrt(2), in the cavity rotating frame:
/// sum_n (alpha^n/sqrt(n!)) e^{ik^2n^2(t-sin t)} <x|n> D(kn eta)|beta0 e^{-it}>,
/// eta = 1 - e^{-it}. The displacement phase of D(kn eta) acting on a
/// coherent state is kept, so the result equals the exact projection for
/// complex beta0 as well.
inline CoherentSuperposition conditional_state(const CubicParams& p)
{
    p.validate();
    const int n_ph = photon_truncation(p);
    const Complex eta = 1.0 - std::polar(1.0, -p.t);
    const Complex gamma = p.beta0 * std::polar(1.0, -p.t);
    const double log_alpha = std::norm(p.alpha) > 0 ? std::log(std::abs(p.alpha)) : -INFINITY;
    const double arg_alpha = std::arg(p.alpha);

    std::vector<double> log_mag(n_ph + 1, -INFINITY);
    std::vector<double> phase(n_ph + 1, 0.0);
    std::vector<int> sign(n_ph + 1, 0);
    double best = -INFINITY;
    for (int n = 0; n <= n_ph; ++n) {
        const SignedLog h = hermite_log(n, p.x);
        if (h.sign == 0 || (n > 0 && log_alpha == -INFINITY)) continue;
        // ln |alpha^n / sqrt(n!) <x|n>|
        const double lm = (n > 0 ? n * log_alpha : 0.0) - 0.5 * log_factorial(n) + h.log_abs -
                          0.25 * std::log(pi) - 0.5 * (n * std::numbers::ln2 + log_factorial(n)) -
                          0.5 * p.x * p.x;
        log_mag[n] = lm;
        sign[n] = h.sign;
        const double kn = p.k * n;
        phase[n] = n * arg_alpha + p.k * p.k * double(n) * n * (p.t - std::sin(p.t)) +
                   kn * std::imag(eta * std::conj(gamma));
        best = std::max(best, lm);
    }
    // An outcome whose amplitude underflows double precision has zero probability density.
    if (best < std::log(1e-300)) throw ZeroNorm("homodyne outcome has vanishing amplitude");

    std::vector<CoherentTerm> terms;
    for (int n = 0; n <= n_ph; ++n) {
        if (sign[n] == 0) continue;
        const double rel = log_mag[n] - best;
        if (rel < std::log(1e-17)) continue;
        terms.push_back({double(sign[n]) * std::polar(std::exp(rel), phase[n]), branch_amplitude(n, p.t, p.k, p.beta0)});
    }
    return normalize(merge_coincident(CoherentSuperposition(std::move(terms))));
}

/// Joint cavity-mechanics amplitudes <n, m|U(t)|alpha, beta0> over photon
/// number n (rows) and phonon number m (columns).
struct JointFockState {
    int photons = 0; // rows = photons + 1
    int phonons = 0; // cols = phonons + 1
    std::vector<Complex> amplitudes;

    Complex at(int n, int m) const { return amplitudes[static_cast<std::size_t>(n) * (phonons + 1) + m]; }
    Complex& at(int n, int m) { return amplitudes[static_cast<std::size_t>(n) * (phonons + 1) + m]; }
};

/// Brute-force oracle: applies the factorized evolution operator
/// U = e^{ik^2(a^dag a)^2(t - sin t)} e^{k a^dag a (eta b^dag - conj(eta) b)} e^{-i b^dag b t}
/// to |alpha>|beta0> in a truncated double Fock basis. The displacement acts
/// through its Fock matrix elements; no coherent-state algebra is used.
inline JointFockState joint_state_fock(const CubicParams& p, int phonon_max = 0)
{
    p.validate();
    const int n_ph = photon_truncation(p);
    const Complex eta = 1.0 - std::polar(1.0, -p.t);

    const int in_max = poisson_truncation(std::norm(p.beta0), 1e-16);
    FockVector mech = coherent_fock_expansion(p.beta0, in_max);
    for (int m = 0; m <= in_max; ++m) mech.coefficients[m] *= std::polar(1.0, -p.t * m);

    double reach = 0.0;
    for (int n = 0; n <= n_ph; ++n) reach = std::max(reach, std::abs(branch_amplitude(n, p.t, p.k, p.beta0)));
    if (phonon_max == 0) phonon_max = poisson_truncation(reach * reach, 1e-14);

    const FockVector cavity = coherent_fock_expansion(p.alpha, n_ph);
    JointFockState out{n_ph, phonon_max, std::vector<Complex>((n_ph + 1) * std::size_t(phonon_max + 1))};
    double lost = 0.0;
    for (int n = 0; n <= n_ph; ++n) {
        const Complex amp = cavity.coefficients[n] * kerr_phase(n, p.t, p.k);
        const auto d = displacement_matrix(p.k * n * eta, phonon_max + 1, in_max + 1);
        double kept = 0.0;
        for (int m = 0; m <= phonon_max; ++m) {
            Complex s{};
            for (int j = 0; j <= in_max; ++j) s += d[std::size_t(m) * (in_max + 1) + j] * mech.coefficients[j];
            out.at(n, m) = amp * s;
            kept += std::norm(s);
        }
        lost = std::max(lost, std::norm(amp) * std::max(0.0, 1.0 - kept));
    }
    if (lost > 1e-10) {
        std::ostringstream msg;
        msg << "phonon truncation " << phonon_max << " loses norm " << lost;
        throw TruncationInsufficient(msg.str());
    }
    return out;
}

/// Projects the cavity of a joint state onto <x| and returns the normalized
/// mechanical Fock vector.
inline FockVector condition_on_quadrature(const JointFockState& joint, double x)
{
    const auto psi = hermite_functions(joint.photons, x);
    std::vector<Complex> c(joint.phonons + 1);
    for (int n = 0; n <= joint.photons; ++n)
        for (int m = 0; m <= joint.phonons; ++m) c[m] += psi[n] * joint.at(n, m);
    return normalize(FockVector(std::move(c)));
}

} // namespace optomech
