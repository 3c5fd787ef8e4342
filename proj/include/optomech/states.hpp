#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace optomech {

inline constexpr double default_tail_threshold = 1e-10;
inline constexpr int max_fock_truncation = 1 << 17;

struct CoherentTerm {
    Complex weight;
    Complex amplitude;
};

/// Pure state sum_n w_n |phi_n> over (non-orthogonal) coherent states.
struct CoherentSuperposition {
    std::vector<CoherentTerm> terms;
    bool normalized = false;

    CoherentSuperposition() = default;
    explicit CoherentSuperposition(std::vector<CoherentTerm> t, bool is_normalized = false)
        : terms(std::move(t)), normalized(is_normalized)
    {
        if (terms.empty()) throw std::invalid_argument("CoherentSuperposition needs at least one term");
    }
};

struct SqueezedTerm {
    Complex weight;
    Complex squeeze; // zeta = r e^{i theta}; S(zeta) = exp[(conj(zeta) b^2 - zeta b^dag^2)/2]
};

/// Pure state sum_n w_n S(zeta_n)|0>.
struct SqueezedSuperposition {
    std::vector<SqueezedTerm> terms;
    bool normalized = false;

    SqueezedSuperposition() = default;
    explicit SqueezedSuperposition(std::vector<SqueezedTerm> t, bool is_normalized = false)
        : terms(std::move(t)), normalized(is_normalized)
    {
        if (terms.empty()) throw std::invalid_argument("SqueezedSuperposition needs at least one term");
    }

    double max_squeezing() const
    {
        double r = 0.0;
        for (const auto& t : terms) r = std::max(r, std::abs(t.squeeze));
        return r;
    }
};

/// Coefficients c_n of sum_n c_n |n>, n = 0..n_max().
struct FockVector {
    std::vector<Complex> coefficients;

    FockVector() = default;
    explicit FockVector(std::vector<Complex> c) : coefficients(std::move(c)) {}

    int n_max() const { return static_cast<int>(coefficients.size()) - 1; }
    std::size_t size() const { return coefficients.size(); }
    Complex operator[](std::size_t n) const { return n < coefficients.size() ? coefficients[n] : Complex{}; }

    /// sum_{n > n_max - 5} |c_n|^2
    double tail_mass() const
    {
        double s = 0.0;
        for (int n = std::max(0, n_max() - 4); n <= n_max(); ++n) s += std::norm(coefficients[n]);
        return s;
    }
};

// ---------------------------------------------------------------------------
// Coherent-state algebra

/// ln <beta|gamma>
inline Complex log_coherent_overlap(Complex beta, Complex gamma)
{
    return -0.5 * std::norm(beta) - 0.5 * std::norm(gamma) + std::conj(beta) * gamma;
}

inline Complex coherent_overlap(Complex beta, Complex gamma)
{
    return cexp(log_coherent_overlap(beta, gamma));
}

/// ln <beta|D(zeta)|gamma>
inline Complex log_coherent_displaced_overlap(Complex beta, Complex zeta, Complex gamma)
{
    return log_coherent_overlap(beta, zeta + gamma) +
           0.5 * (zeta * std::conj(gamma) - std::conj(zeta) * gamma);
}

/// <beta|D(zeta)|gamma> = <beta|zeta+gamma> exp((zeta conj(gamma) - conj(zeta) gamma)/2)
inline Complex coherent_displaced_overlap(Complex beta, Complex zeta, Complex gamma)
{
    return cexp(log_coherent_displaced_overlap(beta, zeta, gamma));
}

/// D(gamma) applied to every term, including the branch phases
/// D(gamma)|phi> = e^{(gamma conj(phi) - conj(gamma) phi)/2} |phi + gamma>.
inline CoherentSuperposition displace(const CoherentSuperposition& s, Complex gamma)
{
    CoherentSuperposition out = s;
    for (auto& t : out.terms) {
        t.weight *= std::exp(0.5 * (gamma * std::conj(t.amplitude) - std::conj(gamma) * t.amplitude));
        t.amplitude += gamma;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fock-basis representations

/// Smallest power of two (>= 16) whose 5-element tail stays below threshold
/// for a Poisson distribution of mean `mean_photons`.
inline int poisson_truncation(double mean_photons, double threshold = default_tail_threshold)
{
    for (int n_max = 16; n_max <= max_fock_truncation; n_max *= 2) {
        // Tail sum_{n > n_max-5} of Poisson(mean), summed in log space.
        const int start = std::max(0, n_max - 4);
        double tail = 0.0;
        for (int n = start;; ++n) {
            const double term = std::exp(-mean_photons + n * std::log(std::max(mean_photons, 1e-300)) -
                                         log_factorial(n));
            tail += term;
            if (n > mean_photons && term < 1e-30) break;
        }
        if (mean_photons == 0.0) tail = 0.0;
        if (tail < threshold) return n_max;
    }
    throw TruncationInsufficient("Fock truncation would exceed 2^17 levels");
}

/// Fock coefficients of the coherent state |beta>.
inline FockVector coherent_fock_expansion(Complex beta, int n_max)
{
    std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1);
    if (beta == Complex{}) {
        c[0] = 1.0;
        return FockVector(std::move(c));
    }
    const double log_mod = std::log(std::abs(beta));
    const double phase = std::arg(beta);
    for (int n = 0; n <= n_max; ++n) {
        const double lm = -0.5 * std::norm(beta) + n * log_mod - 0.5 * log_factorial(n);
        c[n] = lm < -745.0 ? Complex{} : std::polar(std::exp(lm), n * phase);
    }
    return FockVector(std::move(c));
}

namespace detail {

/// ln|c_{2m}|^2 of the squeezed vacuum with squeeze modulus r.
inline double squeezed_log_prob(int m, double r)
{
    return -std::log(std::cosh(r)) + log_factorial(2 * m) - 2.0 * m * std::numbers::ln2 -
           2.0 * log_factorial(m) + 2.0 * m * std::log(std::tanh(r));
}

/// sum_{n > n_max - 5} |c_n|^2 for the squeezed vacuum.
inline double squeezed_tail(double r, int n_max)
{
    if (r == 0.0) return 0.0;
    const int first_m = (std::max(0, n_max - 4) + 1) / 2;
    double tail = 0.0;
    for (int m = first_m;; ++m) {
        const double p = std::exp(squeezed_log_prob(m, r));
        tail += p;
        if (p < 1e-22 * std::max(tail, 1e-300) || p == 0.0) break;
        if (m > first_m + 10 * max_fock_truncation) break;
    }
    return tail;
}

} // namespace detail

/// Smallest power of two (>= 16) with squeezed-vacuum tail below threshold.
inline int squeezed_truncation(double r, double threshold = default_tail_threshold)
{
    for (int n_max = 16; n_max <= max_fock_truncation; n_max *= 2)
        if (detail::squeezed_tail(r, n_max) < threshold) return n_max;
    std::ostringstream msg;
    msg << "squeezing r = " << r << " needs more than 2^17 Fock levels";
    throw TruncationInsufficient(msg.str());
}

/// S(zeta)|0> in the Fock basis:
/// c_{2m} = (cosh r)^{-1/2} sqrt((2m)!)/(2^m m!) (-e^{i theta} tanh r)^m.
inline FockVector squeezed_fock_expansion(Complex zeta, int n_max, double tail_threshold = default_tail_threshold)
{
    std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1);
    const double r = std::abs(zeta);
    if (r == 0.0) {
        c[0] = 1.0;
        return FockVector(std::move(c));
    }
    const double tail = detail::squeezed_tail(r, n_max);
    if (tail > tail_threshold) {
        std::ostringstream msg;
        msg << "squeezed-state tail mass " << tail << " exceeds " << tail_threshold << " at N_max = " << n_max;
        throw TruncationInsufficient(msg.str());
    }
    const double theta = std::arg(zeta);
    for (int m = 0; 2 * m <= n_max; ++m) {
        const double lm = 0.5 * detail::squeezed_log_prob(m, r);
        c[2 * m] = lm < -745.0 ? Complex{} : std::polar(std::exp(lm), m * (theta + pi));
    }
    return FockVector(std::move(c));
}

inline Complex inner(const FockVector& a, const FockVector& b)
{
    Complex s{};
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += std::conj(a.coefficients[i]) * b.coefficients[i];
    return s;
}

inline int fock_truncation(const CoherentSuperposition& s, double threshold = default_tail_threshold)
{
    double m = 0.0;
    for (const auto& t : s.terms) m = std::max(m, std::norm(t.amplitude));
    return poisson_truncation(m, threshold);
}

inline int fock_truncation(const SqueezedSuperposition& s, double threshold = default_tail_threshold)
{
    return squeezed_truncation(s.max_squeezing(), threshold);
}

inline FockVector to_fock(const CoherentSuperposition& s, int n_max)
{
    std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1);
    for (const auto& t : s.terms) {
        const FockVector f = coherent_fock_expansion(t.amplitude, n_max);
        for (int n = 0; n <= n_max; ++n) c[n] += t.weight * f.coefficients[n];
    }
    return FockVector(std::move(c));
}

inline FockVector to_fock(const CoherentSuperposition& s) { return to_fock(s, fock_truncation(s)); }

inline FockVector to_fock(const SqueezedSuperposition& s, int n_max)
{
    std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1);
    for (const auto& t : s.terms) {
        const FockVector f = squeezed_fock_expansion(t.squeeze, n_max);
        for (int n = 0; n <= n_max; ++n) c[n] += t.weight * f.coefficients[n];
    }
    return FockVector(std::move(c));
}

inline FockVector to_fock(const SqueezedSuperposition& s) { return to_fock(s, fock_truncation(s)); }

// ---------------------------------------------------------------------------
// Norms and normalization

/// <psi|psi> from the Gram matrix of coherent overlaps.
inline double norm_squared(const CoherentSuperposition& s)
{
    Complex acc{};
    for (const auto& a : s.terms)
        for (const auto& b : s.terms)
            acc += std::conj(a.weight) * b.weight * coherent_overlap(a.amplitude, b.amplitude);
    return acc.real();
}

/// Gram matrix G_ij = <zeta_i|zeta_j> via truncated Fock expansions.
inline std::vector<Complex> gram_matrix(const SqueezedSuperposition& s, int n_max)
{
    const std::size_t n = s.terms.size();
    std::vector<FockVector> v;
    v.reserve(n);
    for (const auto& t : s.terms) v.push_back(squeezed_fock_expansion(t.squeeze, n_max));
    std::vector<Complex> g(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            g[i * n + j] = inner(v[i], v[j]);
            g[j * n + i] = std::conj(g[i * n + j]);
        }
    return g;
}

inline double norm_squared(const SqueezedSuperposition& s)
{
    const int n_max = fock_truncation(s);
    const auto g = gram_matrix(s, n_max);
    const std::size_t n = s.terms.size();
    Complex acc{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            acc += std::conj(s.terms[i].weight) * s.terms[j].weight * g[i * n + j];
    return acc.real();
}

inline double norm_squared(const FockVector& v) { return inner(v, v).real(); }

namespace detail {

template <class State>
State rescale(State s, double norm2)
{
    double weights2 = 0.0;
    for (const auto& t : s.terms) weights2 += std::norm(t.weight);
    if (!(norm2 > 1e-14 * weights2) || weights2 == 0.0) {
        std::ostringstream msg;
        msg << "superposition norm^2 " << norm2 << " vanishes (sum |w|^2 = " << weights2 << ")";
        throw ZeroNorm(msg.str());
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& t : s.terms) t.weight *= scale;
    s.normalized = true;
    return s;
}

} // namespace detail

inline CoherentSuperposition normalize(const CoherentSuperposition& s)
{
    return detail::rescale(s, norm_squared(s));
}

inline SqueezedSuperposition normalize(const SqueezedSuperposition& s)
{
    return detail::rescale(s, norm_squared(s));
}

inline FockVector normalize(const FockVector& v)
{
    const double n2 = norm_squared(v);
    if (!(n2 > 1e-28)) throw ZeroNorm("Fock vector has vanishing norm");
    FockVector out = v;
    for (auto& c : out.coefficients) c /= std::sqrt(n2);
    return out;
}

// ---------------------------------------------------------------------------
// Mean phonon number

inline double mean_phonon(const FockVector& v)
{
    double m = 0.0, n2 = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
        m += n * std::norm(v.coefficients[n]);
        n2 += std::norm(v.coefficients[n]);
    }
    return m / n2;
}

/// <b^dag b> using <phi_m|b^dag b|phi_n> = conj(phi_m) phi_n <phi_m|phi_n>.
inline double mean_phonon(const CoherentSuperposition& s)
{
    Complex num{};
    for (const auto& a : s.terms)
        for (const auto& b : s.terms)
            num += std::conj(a.weight) * b.weight * std::conj(a.amplitude) * b.amplitude *
                   coherent_overlap(a.amplitude, b.amplitude);
    return num.real() / norm_squared(s);
}

inline double mean_phonon(const SqueezedSuperposition& s) { return mean_phonon(to_fock(s)); }

// ---------------------------------------------------------------------------
// Displacement operator in the Fock basis

/// D_{mn} = <m|D(xi)|n> for m < rows, n < cols, row-major. Each diagonal
/// m - n = a >= 0 follows the normalized Laguerre recurrence
/// f_n = sqrt(n!/(n+a)!) e^{-|xi|^2/2} |xi|^a L_n^a(|xi|^2),
/// f_{n+1} sqrt((n+1)(n+a+1)) = (2n+1+a-x) f_n - sqrt(n(n+a)) f_{n-1},
/// and D_{n,n+a} = (-1)^a conj(D_{n+a,n}).
inline std::vector<Complex> displacement_matrix(Complex xi, int rows, int cols)
{
    std::vector<Complex> d(static_cast<std::size_t>(rows) * cols);
    const auto at = [&](int m, int n) -> Complex& { return d[static_cast<std::size_t>(m) * cols + n]; };
    const double x = std::norm(xi);
    const double r = std::sqrt(x);
    const double phi = std::arg(xi);
    const int extent = std::max(rows, cols);
    for (int a = 0; a < extent; ++a) {
        const int len = std::max(std::min(cols, rows - a), std::min(rows, cols - a));
        if (len <= 0) continue;
        // Work with a mantissa and a log scale so that f_0 never underflows.
        double log_scale = -0.5 * x - 0.5 * log_factorial(a) + (a > 0 ? a * std::log(r) : 0.0);
        if (r == 0.0 && a > 0) log_scale = -INFINITY;
        double f_prev = 0.0, f = 1.0;
        const Complex rot = std::polar(1.0, a * phi);
        const double sign = (a % 2 == 0) ? 1.0 : -1.0;
        for (int n = 0; n < len; ++n) {
            const double value = (log_scale == -INFINITY) ? 0.0 : f * std::exp(log_scale);
            const Complex lower = rot * value;
            if (n + a < rows && n < cols) at(n + a, n) = lower;
            if (a > 0 && n < rows && n + a < cols) at(n, n + a) = sign * std::conj(lower);
            const double next = ((2.0 * n + 1.0 + a - x) * f - std::sqrt(double(n) * (n + a)) * f_prev) /
                                std::sqrt((n + 1.0) * (n + a + 1.0));
            f_prev = f;
            f = next;
            const double mag = std::max(std::abs(f), std::abs(f_prev));
            if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
                const double lm = std::log(mag);
                f /= mag;
                f_prev /= mag;
                log_scale += lm;
            }
        }
    }
    return d;
}

/// Closed form <m|D(xi)|n> through the associated Laguerre polynomial; used
/// to cross-check displacement_matrix.
inline Complex displacement_element(int m, int n, Complex xi)
{
    const double x = std::norm(xi);
    if (m >= n) {
        const double pre = 0.5 * (log_factorial(n) - log_factorial(m)) - 0.5 * x;
        return std::exp(pre) * std::pow(xi, m - n) * laguerre(n, m - n, x);
    }
    const double pre = 0.5 * (log_factorial(m) - log_factorial(n)) - 0.5 * x;
    return std::exp(pre) * std::pow(-std::conj(xi), n - m) * laguerre(m, n - m, x);
}

} // namespace optomech
