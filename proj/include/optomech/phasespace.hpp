#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "numerics.hpp"
#include "parallel.hpp"
#include "states.hpp"
#include "wavepacket.hpp"

namespace optomech {

/// Cell-centred sampling of [x_min, x_max] x [p_min, p_max].
struct GridSpec {
    double x_min = -6.0, x_max = 6.0;
    double p_min = -6.0, p_max = 6.0;
    int nx = 256, np = 256;

    void validate() const
    {
        if (!(x_max > x_min) || !(p_max > p_min)) throw std::invalid_argument("GridSpec: empty range");
        if (nx < 1 || np < 1) throw std::invalid_argument("GridSpec: resolution must be >= 1");
    }
    double dx() const { return (x_max - x_min) / nx; }
    double dp() const { return (p_max - p_min) / np; }
    double x(int i) const { return x_min + (i + 0.5) * dx(); }
    double p(int j) const { return p_min + (j + 0.5) * dp(); }

    static GridSpec square(double half_width, int resolution = 256)
    {
        return {-half_width, half_width, -half_width, half_width, resolution, resolution};
    }
};

/// W(x, p) normalized to int W dx dp = 1; vacuum peaks at 1/pi.
struct WignerGrid {
    GridSpec spec;
    std::vector<double> values; // values[i * np + j] = W(x_i, p_j)

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.np + j]; }
    double min() const { return *std::min_element(values.begin(), values.end()); }
    double max() const { return *std::max_element(values.begin(), values.end()); }

    double riemann_sum() const
    {
        double s = 0.0;
        for (double v : values) s += v;
        return s * spec.dx() * spec.dp();
    }

    /// 2 pi int W^2, equal to Tr rho^2.
    double purity() const
    {
        double s = 0.0;
        for (double v : values) s += v * v;
        return 2.0 * pi * s * spec.dx() * spec.dp();
    }

    /// int W dp at each x_i.
    std::vector<double> x_marginal() const
    {
        std::vector<double> m(spec.nx, 0.0);
        for (int i = 0; i < spec.nx; ++i) {
            for (int j = 0; j < spec.np; ++j) m[i] += at(i, j);
            m[i] *= spec.dp();
        }
        return m;
    }
};

inline double wigner_point(const WavepacketSum& s, double x, double p)
{
    Complex acc{};
    const std::size_t n = s.packets.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            acc += std::conj(s.weights[i]) * s.weights[j] * wavepacket_wigner(s.packets[i], s.packets[j], x, p);
    return acc.real();
}

/// Displaced parity: W = (1/pi) sum_k (-1)^k |<k|D(-beta)|psi>|^2, beta = (x + ip)/sqrt(2).
inline double wigner_point(const FockVector& v, double x, double p)
{
    const Complex beta = Complex(x, p) / std::sqrt(2.0);
    const int cols = static_cast<int>(v.size());
    const double reach = std::abs(beta) + std::sqrt(static_cast<double>(cols)) + 8.0;
    const int rows = static_cast<int>(std::ceil(reach * reach));
    const auto d = displacement_matrix(-beta, rows, cols);
    double w = 0.0;
    for (int k = 0; k < rows; ++k) {
        Complex s{};
        for (int n = 0; n < cols; ++n) s += d[std::size_t(k) * cols + n] * v.coefficients[n];
        w += (k % 2 == 0 ? 1.0 : -1.0) * std::norm(s);
    }
    return w / pi;
}

namespace detail {

template <class PointFn>
WignerGrid fill_grid(const GridSpec& spec, unsigned jobs, PointFn&& fn)
{
    spec.validate();
    WignerGrid g{spec, std::vector<double>(static_cast<std::size_t>(spec.nx) * spec.np)};
    parallel_for(static_cast<std::size_t>(spec.nx), jobs, [&](std::size_t i) {
        const int ii = static_cast<int>(i);
        for (int j = 0; j < spec.np; ++j) g.values[i * spec.np + j] = fn(spec.x(ii), spec.p(j));
    });
    return g;
}

/// Half-widths hx, hp with cells no wider than 0.75 * narrow.
inline GridSpec ellipse_grid(double hx, double hp, double narrow, int resolution, int max_resolution)
{
    const auto cells = [&](double half) {
        const double needed = std::ceil(2.0 * half / (0.75 * narrow));
        return static_cast<int>(std::clamp(needed, double(resolution), double(std::max(resolution, max_resolution))));
    };
    return {-hx, hx, -hp, hp, cells(hx), cells(hp)};
}

} // namespace detail

inline WignerGrid wigner(const CoherentSuperposition& s, const GridSpec& spec, unsigned jobs = 1)
{
    const auto packets = to_wavepackets(s.normalized ? s : normalize(s));
    return detail::fill_grid(spec, jobs, [&](double x, double p) { return wigner_point(packets, x, p); });
}

inline WignerGrid wigner(const SqueezedSuperposition& s, const GridSpec& spec, unsigned jobs = 1)
{
    const auto packets = to_wavepackets(s.normalized ? s : normalize(s));
    return detail::fill_grid(spec, jobs, [&](double x, double p) { return wigner_point(packets, x, p); });
}

inline WignerGrid wigner(const FockVector& v, const GridSpec& spec, unsigned jobs = 1)
{
    const FockVector n = normalize(v);
    return detail::fill_grid(spec, jobs, [&](double x, double p) { return wigner_point(n, x, p); });
}

/// Square grid spanning +-(reach of the significant branches + 4).
inline GridSpec default_grid(const CoherentSuperposition& s, int resolution = 256)
{
    double wmax = 0.0;
    for (const auto& t : s.terms) wmax = std::max(wmax, std::abs(t.weight));
    double reach = 0.0;
    for (const auto& t : s.terms)
        if (std::abs(t.weight) >= 1e-4 * wmax) reach = std::max(reach, std::sqrt(2.0) * std::abs(t.amplitude));
    return GridSpec::square(reach + 4.0, resolution);
}

/// Each axis covers four standard deviations of the widest significant
/// branch in that quadrature and resolves the narrowest one; `resolution`
/// is a lower bound on the cell count.
inline GridSpec default_grid(const SqueezedSuperposition& s, int resolution = 256, int max_resolution = 2048)
{
    double wmax = 0.0;
    for (const auto& t : s.terms) wmax = std::max(wmax, std::abs(t.weight));
    double wide_x = 0.0, wide_p = 0.0, narrow = INFINITY;
    for (const auto& t : s.terms) {
        if (std::abs(t.weight) < 1e-4 * wmax) continue;
        const double r = std::abs(t.squeeze), th = std::arg(t.squeeze);
        wide_x = std::max(wide_x, std::sqrt(0.5 * (std::cosh(2 * r) - std::sinh(2 * r) * std::cos(th))));
        wide_p = std::max(wide_p, std::sqrt(0.5 * (std::cosh(2 * r) + std::sinh(2 * r) * std::cos(th))));
        // Minor axis; for a rotated ellipse it lies off both grid axes.
        narrow = std::min(narrow, std::exp(-r) / std::sqrt(2.0));
    }
    return detail::ellipse_grid(4.0 * wide_x + 4.0, 4.0 * wide_p + 4.0, narrow, resolution, max_resolution);
}

inline GridSpec default_grid(const FockVector& v, int resolution = 256)
{
    return GridSpec::square(std::sqrt(2.0 * v.n_max() + 1.0) + 4.0, resolution);
}

/// |<x|psi>|^2
inline double position_density(const WavepacketSum& s, double x) { return std::norm(s(x)); }

inline double position_density(const FockVector& v, double x)
{
    const auto psi = hermite_functions(v.n_max(), x);
    Complex a{};
    for (int n = 0; n <= v.n_max(); ++n) a += v.coefficients[n] * psi[n];
    return std::norm(a);
}

} // namespace optomech
