#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace optomech {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I_unit{0.0, 1.0};

/// ln(n!). Exact table below 171, lgamma above.
inline double log_factorial(int n)
{
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    static const std::vector<double> table = [] {
        std::vector<double> t(171);
        double acc = 0.0;
        t[0] = 0.0;
        for (int i = 1; i < 171; ++i) {
            acc += std::log(static_cast<double>(i));
            t[i] = acc;
        }
        return t;
    }();
    if (n < 171) return table[n];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

/// Hermite value in log-magnitude + sign form: H = sign * exp(log_abs).
/// sign == 0 encodes an exact zero.
struct SignedLog {
    double log_abs = -INFINITY;
    int sign = 0;

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

/// Above this order hermite() returns +/-inf on overflow; use hermite_log().
inline constexpr int hermite_direct_max_order = 150;

/// Physicists' Hermite polynomial H_n(x) in log-magnitude form.
/// The three-term recurrence is carried with a running scale so that
/// neither overflow nor underflow occurs for any n.
inline SignedLog hermite_log(int n, double x)
{
    if (n < 0) throw std::domain_error("hermite: negative order");
    if (n == 0) return {0.0, 1};
    double h_prev = 1.0;      // H_{j-1} / e^{scale}
    double h = 2.0 * x;       // H_j / e^{scale}
    double scale = 0.0;
    for (int j = 1; j < n; ++j) {
        const double next = 2.0 * x * h - 2.0 * j * h_prev;
        h_prev = h;
        h = next;
        const double mag = std::abs(h);
        if (mag > 1e100 || (mag < 1e-100 && mag != 0.0)) {
            scale += std::log(mag);
            h_prev /= mag;
            h /= mag;
        }
    }
    if (h == 0.0) return {};
    return {scale + std::log(std::abs(h)), h > 0 ? 1 : -1};
}

inline double hermite(int n, double x)
{
    if (n <= hermite_direct_max_order) {
        if (n < 0) throw std::domain_error("hermite: negative order");
        if (n == 0) return 1.0;
        double h_prev = 1.0;
        double h = 2.0 * x;
        for (int j = 1; j < n; ++j) {
            const double next = 2.0 * x * h - 2.0 * j * h_prev;
            h_prev = h;
            h = next;
        }
        return h;
    }
    return hermite_log(n, x).value();
}

/// <x|n> = pi^{-1/4} (2^n n!)^{-1/2} H_n(x) e^{-x^2/2}, with x = (b + b^dag)/sqrt(2).
inline double hermite_function(int n, double x)
{
    const SignedLog h = hermite_log(n, x);
    if (h.sign == 0) return 0.0;
    const double log_norm =
        -0.25 * std::log(pi) - 0.5 * (n * std::numbers::ln2 + log_factorial(n));
    return h.sign * std::exp(h.log_abs + log_norm - 0.5 * x * x);
}

/// All <x|n> for n = 0..n_max via the normalized recurrence
/// psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.
inline std::vector<double> hermite_functions(int n_max, double x)
{
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    out[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    if (n_max >= 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int n = 1; n < n_max; ++n) {
        out[n + 1] = std::sqrt(2.0 / (n + 1)) * x * out[n] -
                     std::sqrt(static_cast<double>(n) / (n + 1)) * out[n - 1];
    }
    return out;
}

/// Generalized Laguerre polynomial L_n^{(a)}(x) by upward recurrence.
inline double laguerre(int n, double a, double x)
{
    if (n < 0) throw std::domain_error("laguerre: negative order");
    if (n == 0) return 1.0;
    double l_prev = 1.0;
    double l = 1.0 + a - x;
    for (int j = 1; j < n; ++j) {
        const double next = ((2.0 * j + 1.0 + a - x) * l - (j + a) * l_prev) / (j + 1.0);
        l_prev = l;
        l = next;
    }
    return l;
}

/// Safe complex exp: returns 0 when the real part underflows completely.
inline Complex cexp(Complex z)
{
    if (z.real() < -745.0) return {0.0, 0.0};
    return std::exp(z);
}

} // namespace optomech
