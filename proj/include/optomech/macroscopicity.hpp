#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"
#include "quadrature.hpp"
#include "states.hpp"
#include "wavepacket.hpp"

namespace optomech {

/// zeta -> chi(zeta) = <psi|D(zeta)|psi>
using CharFunction = std::function<Complex(Complex)>;

enum class Method { quadrature, analytic_coherent, closed_form_gaussian, closed_form_eq9 };

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::quadrature: return "quadrature";
    case Method::analytic_coherent: return "analytic-coherent";
    case Method::closed_form_gaussian: return "closed-form-gaussian";
    case Method::closed_form_eq9: return "closed-form-eq9";
    }
    return "unknown";
}

struct MacroResult {
    double I = 0.0;
    double M = 0.0;
    double raw_integral = 0.0; // value before clipping at zero
    double error_estimate = 0.0;
    Method method = Method::quadrature;
};

inline MacroResult make_result(double raw, double M, double err, Method m)
{
    return {std::max(0.0, raw), M, raw, err, m};
}

// ---------------------------------------------------------------------------
// Characteristic functions

namespace detail {

struct CoherentPair {
    double log_mag;   // ln |conj(w_i) w_j|
    Complex center;   // phi_i - phi_j
    double phase0;    // arg(conj(w_i) w_j) + Im(conj(phi_i) phi_j)
    Complex phase_lin; // conj(phi_i) + conj(phi_j)
};

inline std::vector<CoherentPair> coherent_pairs(const CoherentSuperposition& s)
{
    std::vector<CoherentPair> out;
    for (const auto& a : s.terms)
        for (const auto& b : s.terms) {
            const Complex ww = std::conj(a.weight) * b.weight;
            if (ww == Complex{}) continue;
            out.push_back({std::log(std::abs(ww)), a.amplitude - b.amplitude,
                           std::arg(ww) + std::imag(std::conj(a.amplitude) * b.amplitude),
                           std::conj(a.amplitude) + std::conj(b.amplitude)});
        }
    return out;
}

} // namespace detail

/// chi(zeta) = sum_ij conj(w_i) w_j <phi_i|D(zeta)|phi_j>, each term of modulus
/// |w_i w_j| exp(-|zeta - (phi_i - phi_j)|^2 / 2).
inline CharFunction char_function(const CoherentSuperposition& s)
{
    auto pairs = detail::coherent_pairs(s);
    return [pairs = std::move(pairs)](Complex z) {
        Complex acc{};
        for (const auto& p : pairs) {
            const double lm = p.log_mag - 0.5 * std::norm(z - p.center);
            if (lm < -60.0) continue;
            acc += std::polar(std::exp(lm), p.phase0 + std::imag(p.phase_lin * z));
        }
        return acc;
    };
}

/// Closed form through position-space Gaussians.
inline CharFunction char_function(const SqueezedSuperposition& s)
{
    auto sum = to_wavepackets(s);
    return [sum = std::move(sum)](Complex z) {
        Complex acc{};
        const std::size_t n = sum.packets.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                acc += std::conj(sum.weights[i]) * sum.weights[j] *
                       wavepacket_displaced_overlap(sum.packets[i], z, sum.packets[j]);
        return acc;
    };
}

/// chi(zeta) = sum_mn conj(c_m) c_n <m|D(zeta)|n> from Fock matrix elements.
inline CharFunction char_function(const FockVector& v)
{
    return [v](Complex z) {
        const int n = static_cast<int>(v.size());
        const auto d = displacement_matrix(z, n, n);
        Complex acc{};
        for (int m = 0; m < n; ++m) {
            if (v.coefficients[m] == Complex{}) continue;
            Complex row{};
            for (int k = 0; k < n; ++k) row += d[std::size_t(m) * n + k] * v.coefficients[k];
            acc += std::conj(v.coefficients[m]) * row;
        }
        return acc;
    };
}

/// chi_th(zeta) = chi_0(zeta) e^{-nbar |zeta|^2}: the P-function average of
/// the characteristic functions of D(beta e^{-it})|psi_0>.
inline CharFunction thermal_average_char(CharFunction chi0, double nbar)
{
    if (!(nbar >= 0.0)) throw std::invalid_argument("thermal_average_char: nbar must be >= 0");
    if (nbar == 0.0) return chi0;
    return [chi0 = std::move(chi0), nbar](Complex z) { return chi0(z) * std::exp(-nbar * std::norm(z)); };
}

/// M_th = M_0 + nbar
inline double thermal_mean_phonon(double M0, double nbar)
{
    if (!(nbar >= 0.0)) throw std::invalid_argument("thermal_mean_phonon: nbar must be >= 0");
    return M0 + nbar;
}

// ---------------------------------------------------------------------------
// Quadrature domains

inline constexpr double default_domain_margin = 6.0;

/// Rectangle aligned with the spread of branch differences phi_i - phi_j.
inline QuadratureSpec auto_domain(const CoherentSuperposition& s, double rel_tol = 1e-9,
                                  double margin = default_domain_margin)
{
    double wmax = 0.0;
    for (const auto& t : s.terms) wmax = std::max(wmax, std::abs(t.weight));
    Complex longest{};
    std::vector<Complex> diffs;
    for (const auto& a : s.terms)
        for (const auto& b : s.terms) {
            if (std::abs(a.weight) * std::abs(b.weight) < 1e-20 * wmax * wmax) continue;
            const Complex d = a.amplitude - b.amplitude;
            diffs.push_back(d);
            if (std::abs(d) > std::abs(longest)) longest = d;
        }
    QuadratureSpec spec;
    spec.rel_tol = rel_tol;
    spec.angle = std::abs(longest) > 0 ? std::arg(longest) : 0.0;
    const Complex unrot = std::polar(1.0, -spec.angle);
    double hu = 0.0, hv = 0.0;
    for (const auto& d : diffs) {
        const Complex r = d * unrot;
        hu = std::max(hu, std::abs(r.real()));
        hv = std::max(hv, std::abs(r.imag()));
    }
    spec.half_width_u = hu + margin;
    spec.half_width_v = hv + margin;
    return spec;
}

/// The squeezed characteristic function decays over e^{r} along the
/// anti-squeezed axis; a common squeeze angle gives an aligned rectangle.
inline QuadratureSpec auto_domain(const SqueezedSuperposition& s, double rel_tol = 1e-9,
                                  double margin = default_domain_margin)
{
    const double rmax = s.max_squeezing();
    std::optional<double> common_angle;
    bool aligned = true;
    for (const auto& t : s.terms) {
        if (std::abs(t.squeeze) == 0.0) continue;
        const double th = std::arg(t.squeeze);
        if (!common_angle)
            common_angle = th;
        else if (std::abs(std::remainder(th - *common_angle, 2.0 * pi)) > 1e-12)
            aligned = false;
    }
    QuadratureSpec spec;
    spec.rel_tol = rel_tol;
    const double wide = margin * std::exp(rmax);
    if (aligned && common_angle) {
        spec.angle = 0.5 * (*common_angle + pi);
        spec.half_width_u = wide;
        spec.half_width_v = margin;
    } else {
        spec.half_width_u = spec.half_width_v = wide;
    }
    return spec;
}

inline QuadratureSpec auto_domain(const FockVector& v, double rel_tol = 1e-9,
                                  double margin = default_domain_margin)
{
    QuadratureSpec spec;
    spec.rel_tol = rel_tol;
    spec.half_width_u = spec.half_width_v = 2.0 * std::sqrt(v.n_max() + 1.0) + margin;
    return spec;
}

// ---------------------------------------------------------------------------
// The measure I

/// I = max(0, (1/2pi) int d^2zeta (|zeta|^2 - 1) |chi(zeta)|^2) by adaptive
/// cubature. M is passed through when known.
inline MacroResult measure_I_quadrature(const CharFunction& chi, const QuadratureSpec& domain,
                                        std::optional<double> M = std::nullopt)
{
    const auto integrand = [&chi](Complex z) { return (std::norm(z) - 1.0) * std::norm(chi(z)) / (2.0 * pi); };
    const QuadratureResult q = integrate2d(integrand, domain);
    return make_result(q.value, M.value_or(std::nan("")), q.error, Method::quadrature);
}

/// Exact I for a coherent superposition (optionally thermally smeared by
/// e^{-nbar|zeta|^2}). |chi|^2 expands into Gaussians
/// e^{-a|zeta|^2 + u zeta + v conj(zeta)}, a = 1 + 2 nbar, whose moments are
/// int (|zeta|^2 - 1) e^{...} = (pi/a) e^{uv/a} (1/a + uv/a^2 - 1).
inline MacroResult measure_I_coherent_exact(const CoherentSuperposition& state, double nbar = 0.0)
{
    if (!(nbar >= 0.0)) throw std::invalid_argument("measure_I_coherent_exact: nbar must be >= 0");
    const CoherentSuperposition s = state.normalized ? state : normalize(state);
    const std::size_t n = s.terms.size();
    std::vector<Complex> logA(n * n);
    std::vector<bool> live(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Complex ww = std::conj(s.terms[i].weight) * s.terms[j].weight;
            live[i * n + j] = ww != Complex{};
            if (live[i * n + j])
                logA[i * n + j] = std::log(ww) + log_coherent_overlap(s.terms[i].amplitude, s.terms[j].amplitude);
        }
    const double a = 1.0 + 2.0 * nbar;
    Complex raw{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!live[i * n + j]) continue;
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    if (!live[k * n + l]) continue;
                    const Complex u = std::conj(s.terms[i].amplitude) - std::conj(s.terms[l].amplitude);
                    const Complex v = s.terms[k].amplitude - s.terms[j].amplitude;
                    const Complex uv = u * v;
                    const Complex e = logA[i * n + j] + std::conj(logA[k * n + l]) + uv / a;
                    if (e.real() < -80.0) continue;
                    raw += std::exp(e) * (1.0 / a + uv / (a * a) - 1.0) / a;
                }
        }
    const double M = thermal_mean_phonon(mean_phonon(s), nbar);
    return make_result(0.5 * raw.real(), M, 1e-14 * static_cast<double>(n * n), Method::analytic_coherent);
}

/// Quadrature route with automatic domain and mean phonon number.
inline MacroResult measure_I(const CoherentSuperposition& s, double nbar = 0.0, double rel_tol = 1e-9)
{
    auto chi = thermal_average_char(char_function(s), nbar);
    return measure_I_quadrature(chi, auto_domain(s, rel_tol), thermal_mean_phonon(mean_phonon(s), nbar));
}

inline MacroResult measure_I(const SqueezedSuperposition& s, double rel_tol = 1e-9)
{
    return measure_I_quadrature(char_function(s), auto_domain(s, rel_tol), mean_phonon(s));
}

inline MacroResult measure_I(const FockVector& v, double rel_tol = 1e-9)
{
    return measure_I_quadrature(char_function(v), auto_domain(v, rel_tol), mean_phonon(v));
}

// ---------------------------------------------------------------------------
// Closed forms and benchmarks

/// alpha >= 0 with alpha^2 tanh(alpha^2) = I: the even-cat amplitude that
/// reaches macroscopicity I.
inline double cat_equivalent_amplitude(double I)
{
    if (!(I >= 0.0)) throw std::invalid_argument("cat_equivalent_amplitude: I must be >= 0");
    if (I == 0.0) return 0.0;
    // g(s) = s tanh s is increasing on s >= 0; s tanh s >= s - 1 bounds the root.
    double lo = 0.0, hi = std::max(1.0, I + 1.0);
    double s = std::sqrt(I);
    for (int it = 0; it < 200; ++it) {
        const double th = std::tanh(s);
        const double g = s * th - I;
        if (g > 0) hi = s; else lo = s;
        const double dg = th + s * (1.0 - th * th);
        double next = s - g / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-15 * std::max(1.0, s) || hi - lo < 1e-15 * hi) {
            s = next;
            break;
        }
        s = next;
    }
    return std::sqrt(s);
}

/// I = M = sqrt(cosh r) sinh^2 r / (2 (1 + sqrt(cosh r))) for N(|0> + |zeta>), |zeta| = r.
inline MacroResult eq9_closed_form(double r)
{
    if (!(r >= 0.0)) throw std::invalid_argument("eq9_closed_form: r must be >= 0");
    const double sc = std::sqrt(std::cosh(r));
    const double v = sc * std::sinh(r) * std::sinh(r) / (2.0 * (1.0 + sc));
    return {v, v, v, 0.0, Method::closed_form_eq9};
}

// ---------------------------------------------------------------------------
// Gaussian states

/// Single-mode Gaussian state: mean <b> and the symmetrized covariance of
/// (x, p) with x = (b + b^dag)/sqrt(2); vacuum has covariance I/2.
struct GaussianState {
    Complex mean{};
    double cov_xx = 0.5;
    double cov_xp = 0.0;
    double cov_pp = 0.5;

    double determinant() const { return cov_xx * cov_pp - cov_xp * cov_xp; }

    /// V + (i/2) Omega >= 0; for one mode this is V > 0 and det V >= 1/4.
    void validate() const
    {
        const double tol = 1e-12;
        if (!std::isfinite(cov_xx) || !std::isfinite(cov_xp) || !std::isfinite(cov_pp))
            throw InvalidCovariance("covariance entries must be finite");
        // Eigenvalues of the Hermitian matrix [[xx, xp + i/2], [xp - i/2, pp]].
        const double tr = cov_xx + cov_pp;
        const double disc = std::sqrt(0.25 * (cov_xx - cov_pp) * (cov_xx - cov_pp) + cov_xp * cov_xp + 0.25);
        const double lmin = 0.5 * tr - disc;
        if (lmin < -tol) throw InvalidCovariance("covariance violates the uncertainty relation");
    }

    static GaussianState thermal(double nbar)
    {
        GaussianState g;
        g.cov_xx = g.cov_pp = nbar + 0.5;
        return g;
    }

    /// S(zeta)|0> displaced to `mean`.
    static GaussianState squeezed(Complex zeta, Complex mean = {})
    {
        const double r = std::abs(zeta), th = std::arg(zeta);
        GaussianState g;
        g.mean = mean;
        g.cov_xx = 0.5 * (std::cosh(2 * r) - std::sinh(2 * r) * std::cos(th));
        g.cov_pp = 0.5 * (std::cosh(2 * r) + std::sinh(2 * r) * std::cos(th));
        g.cov_xp = -0.5 * std::sinh(2 * r) * std::sin(th);
        return g;
    }
};

/// chi(zeta) = exp(i(p0 <x> - q <p>)) exp(-v^T V v / 2), v = (p0, -q),
/// q = sqrt(2) Re zeta, p0 = sqrt(2) Im zeta.
inline CharFunction char_function(const GaussianState& g)
{
    return [g](Complex z) {
        const double q = std::sqrt(2.0) * z.real(), p0 = std::sqrt(2.0) * z.imag();
        const double mx = std::sqrt(2.0) * g.mean.real(), mp = std::sqrt(2.0) * g.mean.imag();
        const double quad = g.cov_xx * p0 * p0 - 2.0 * g.cov_xp * p0 * q + g.cov_pp * q * q;
        return std::polar(std::exp(-0.5 * quad), p0 * mx - q * mp);
    };
}

inline double mean_phonon(const GaussianState& g)
{
    return 0.5 * (g.cov_xx + g.cov_pp - 1.0) + std::norm(g.mean);
}

/// raw = (tr V^{-1} / 4 - 1) / (4 sqrt(det V)); the mean does not enter.
inline MacroResult measure_I_gaussian(const GaussianState& g)
{
    g.validate();
    const double det = g.determinant();
    const double tr_inv = (g.cov_xx + g.cov_pp) / det;
    const double raw = (0.25 * tr_inv - 1.0) / (4.0 * std::sqrt(det));
    return make_result(raw, mean_phonon(g), 0.0, Method::closed_form_gaussian);
}

// ---------------------------------------------------------------------------
// Temperature and occupation

/// How a quoted mechanical frequency enters hbar*omega: `angular` takes the
/// number as omega in rad/s; `ordinary` takes it as f in Hz (omega = 2 pi f).
enum class FrequencyConvention { angular, ordinary };

inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J / K

inline double phonon_energy_over_kb(double frequency, FrequencyConvention conv)
{
    const double omega = conv == FrequencyConvention::ordinary ? 2.0 * pi * frequency : frequency;
    return hbar * omega / k_boltzmann;
}

/// nbar = 1 / (e^{hbar omega / k_B T} - 1)
inline double occupation_from_temperature(double T, double frequency,
                                          FrequencyConvention conv = FrequencyConvention::angular)
{
    if (!(T > 0.0) || !(frequency > 0.0))
        throw std::invalid_argument("occupation_from_temperature: T and frequency must be positive");
    return 1.0 / std::expm1(phonon_energy_over_kb(frequency, conv) / T);
}

inline double temperature_from_occupation(double nbar, double frequency,
                                          FrequencyConvention conv = FrequencyConvention::angular)
{
    if (!(nbar > 0.0) || !(frequency > 0.0))
        throw std::invalid_argument("temperature_from_occupation: nbar and frequency must be positive");
    return phonon_energy_over_kb(frequency, conv) / std::log1p(1.0 / nbar);
}

} // namespace optomech
