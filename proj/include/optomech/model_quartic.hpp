#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "model_cubic.hpp"
#include "numerics.hpp"
#include "states.hpp"

namespace optomech {

/// Membrane-in-the-middle (quartic coupling) parameters. The cavity
/// amplitude is real; the membrane starts in its ground state.
struct QuarticParams {
    double k = 1.0;
    double t = pi;
    double alpha = 0.7;
    double x = 1.0;
    int n_ph = 0; // 0 selects default_photon_truncation(alpha)

    void validate() const
    {
        if (!(k >= 0.0)) throw std::invalid_argument("QuarticParams: k must be >= 0");
        if (!(t >= 0.0)) throw std::invalid_argument("QuarticParams: t must be >= 0");
        if (!std::isfinite(alpha)) throw std::invalid_argument("QuarticParams: alpha must be finite");
        if (!std::isfinite(x)) throw std::invalid_argument("QuarticParams: x must be finite");
        if (n_ph < 0) throw std::invalid_argument("QuarticParams: n_ph must be >= 0");
    }
};

/// Photon-number-resolved squeezing data of the membrane.
struct SqueezeBranch {
    int n = 0;
    double chi = 1.0;  // sqrt(1 + 4kn)
    double rho = -2.0; // -2(1 + 2kn)
    double eta = 0.0;  // continuous branch of arctan((rho / 2chi) tan(chi t))
    Complex zeta{};    // i e^{i eta} arcsinh(2kn sin(chi t) / chi)

    double modulus() const { return std::abs(zeta); }
};

inline SqueezeBranch squeeze_degree(int n, double t, double k)
{
    if (n < 0) throw std::invalid_argument("squeeze_degree: n must be >= 0");
    SqueezeBranch b;
    b.n = n;
    const double kn = k * n;
    b.chi = std::sqrt(1.0 + 4.0 * kn);
    b.rho = -2.0 * (1.0 + 2.0 * kn);
    const double theta = b.chi * t;
    // The point (2chi cos theta, rho sin theta) winds continuously; its angle
    // stays within pi/2 of -theta because |rho / 2chi| >= 1.
    const double base = std::atan2(b.rho * std::sin(theta), 2.0 * b.chi * std::cos(theta));
    b.eta = base + 2.0 * pi * std::round((-theta - base) / (2.0 * pi));
    const double s = std::asinh(2.0 * kn * std::sin(theta) / b.chi);
    b.zeta = I_unit * std::polar(1.0, b.eta) * s;
    return b;
}

/// Smallest k >= 0 at which |zeta(1)| first reaches r_target at time t.
/// |zeta(1)| oscillates in k, so the search scans upward before bisecting.
inline double coupling_for_squeezing(double r_target, double t, double k_max = 1000.0)
{
    if (!(r_target >= 0.0)) throw std::invalid_argument("coupling_for_squeezing: target must be >= 0");
    if (!(t > 0.0)) throw std::invalid_argument("coupling_for_squeezing: t must be > 0");
    if (r_target == 0.0) return 0.0;
    const auto f = [&](double k) { return squeeze_degree(1, t, k).modulus() - r_target; };
    const double step = 1e-3;
    double lo = 0.0;
    for (double hi = step; hi <= k_max; lo = hi, hi += step) {
        if (f(hi) < 0.0) continue;
        for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        return hi;
    }
    throw std::domain_error("coupling_for_squeezing: target not reached below k_max");
}

/// c(n, t) = alpha^n e^{-(alpha^2 + i eta)/2} / sqrt(n!)
inline Complex photon_coefficient(int n, double /*t*/, double alpha, const SqueezeBranch& branch)
{
    if (alpha == 0.0 && n > 0) return {};
    const double sign = (alpha < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    const double lm = (n > 0 ? n * std::log(std::abs(alpha)) : 0.0) - 0.5 * alpha * alpha - 0.5 * log_factorial(n);
    return sign * std::polar(std::exp(lm), -0.5 * branch.eta);
}

/// Unnormalized branch weights w_n = alpha^n H_n(x) e^{i eta(n)} / (sqrt(2^n) n!)
/// for n = 0..N_ph; entry n pairs with squeeze_degree(n, t, k).
inline std::vector<Complex> quartic_branch_weights(const QuarticParams& p)
{
    p.validate();
    const int n_ph = p.n_ph > 0 ? p.n_ph : default_photon_truncation(Complex(p.alpha));
    std::vector<Complex> w(n_ph + 1);
    for (int n = 0; n <= n_ph; ++n) {
        const SignedLog h = hermite_log(n, p.x);
        if (h.sign == 0 || (p.alpha == 0.0 && n > 0)) continue;
        const double sign = h.sign * ((p.alpha < 0.0 && n % 2 == 1) ? -1.0 : 1.0);
        const double lm = (n > 0 ? n * std::log(std::abs(p.alpha)) : 0.0) + h.log_abs -
                          0.5 * n * std::numbers::ln2 - log_factorial(n);
        w[n] = sign * std::polar(std::exp(lm), squeeze_degree(n, p.t, p.k).eta);
    }
    return w;
}

namespace detail {

inline SqueezedSuperposition build_quartic(const QuarticParams& p, int max_branch)
{
    const auto w = quartic_branch_weights(p);
    double best = 0.0;
    for (const auto& v : w) best = std::max(best, std::abs(v));
    // The weights leave out the common factor e^{-x^2/2}.
    if (best == 0.0 || std::log(best) - 0.5 * p.x * p.x < std::log(1e-300))
        throw ZeroNorm("homodyne outcome has vanishing amplitude");
    std::vector<SqueezedTerm> terms;
    const int last = std::min<int>(max_branch, static_cast<int>(w.size()) - 1);
    for (int n = 0; n <= last; ++n) {
        if (std::abs(w[n]) < 1e-16 * best) continue;
        const Complex zeta = squeeze_degree(n, p.t, p.k).zeta;
        auto it = std::find_if(terms.begin(), terms.end(),
                               [&](const SqueezedTerm& s) { return std::abs(s.squeeze - zeta) < 1e-14; });
        if (it == terms.end())
            terms.push_back({w[n] / best, zeta});
        else
            it->weight += w[n] / best;
    }
    if (terms.empty()) throw ZeroNorm("no surviving branches");
    return normalize(SqueezedSuperposition(std::move(terms)));
}

} // namespace detail

/// Membrane state conditioned on the homodyne outcome x.
inline SqueezedSuperposition conditional_state_quartic(const QuarticParams& p)
{
    return detail::build_quartic(p, p.n_ph > 0 ? p.n_ph : 1 << 20);
}

/// The n = 0, 1 branches only, renormalized.
inline SqueezedSuperposition two_component_state(const QuarticParams& p)
{
    return detail::build_quartic(p, 1);
}

/// |<psi_full|psi_two-term>|^2 in the Fock basis.
inline double two_component_fidelity(const QuarticParams& p)
{
    const auto full = conditional_state_quartic(p);
    const auto two = two_component_state(p);
    const int n_max = std::max(fock_truncation(full), fock_truncation(two));
    const double f = std::norm(inner(to_fock(full, n_max), to_fock(two, n_max)));
    return std::clamp(f, 0.0, 1.0);
}

} // namespace optomech
