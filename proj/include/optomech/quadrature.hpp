#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace optomech {

/// Rotated rectangle in the complex plane plus convergence controls.
/// Points are center + e^{i angle} (u + i v) with |u| <= half_width_u,
/// |v| <= half_width_v.
struct QuadratureSpec {
    Complex center{0.0, 0.0};
    double half_width_u = 8.0;
    double half_width_v = 8.0;
    double angle = 0.0;
    double rel_tol = 1e-9;
    int max_depth = 30;
    bool check_decay = true;

    void validate() const
    {
        if (!(half_width_u > 0.0) || !(half_width_v > 0.0))
            throw std::invalid_argument("QuadratureSpec: half-widths must be positive");
        if (!(rel_tol > 0.0 && rel_tol < 1.0))
            throw std::invalid_argument("QuadratureSpec: tolerance must lie in (0, 1)");
        if (max_depth < 1) throw std::invalid_argument("QuadratureSpec: max_depth must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;        // estimated absolute error
    double abs_integral = 0.0; // integral of |f|, the scale the tolerance refers to
    std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending) and
// weights; odd entries are the embedded 7-point Gauss nodes.
inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule15 {
    std::array<double, 15> x{}; // on [-1, 1]
    std::array<double, 15> wk{};
    std::array<double, 15> wg{}; // zero at non-Gauss nodes
};

inline const Rule15& rule15()
{
    static const Rule15 r = [] {
        Rule15 out;
        for (int i = 0; i < 7; ++i) {
            out.x[i] = -gk15_nodes[i];
            out.x[14 - i] = gk15_nodes[i];
            out.wk[i] = out.wk[14 - i] = gk15_kronrod_weights[i];
            const double g = (i % 2 == 1) ? g7_weights[i / 2] : 0.0;
            out.wg[i] = out.wg[14 - i] = g;
        }
        out.x[7] = 0.0;
        out.wk[7] = gk15_kronrod_weights[7];
        out.wg[7] = g7_weights[3];
        return out;
    }();
    return r;
}

struct Cell {
    double u0, u1, v0, v1;
    double value, error, abs_value, err_u, err_v;
    int depth;
    bool operator<(const Cell& o) const { return error < o.error; }
};

template <class F>
Cell evaluate_cell(F& f, const QuadratureSpec& spec, Complex rot, double u0, double u1, double v0,
                   double v1, int depth)
{
    const Rule15& r = rule15();
    const double cu = 0.5 * (u0 + u1), hu = 0.5 * (u1 - u0);
    const double cv = 0.5 * (v0 + v1), hv = 0.5 * (v1 - v0);
    double kk = 0, gk = 0, kg = 0, gg = 0, ak = 0;
    for (int i = 0; i < 15; ++i) {
        const double u = cu + hu * r.x[i];
        double row_k = 0, row_g = 0, row_a = 0;
        for (int j = 0; j < 15; ++j) {
            const double v = cv + hv * r.x[j];
            const double val = f(spec.center + rot * Complex(u, v));
            row_k += r.wk[j] * val;
            row_g += r.wg[j] * val;
            row_a += r.wk[j] * std::abs(val);
        }
        kk += r.wk[i] * row_k;
        kg += r.wk[i] * row_g;
        gk += r.wg[i] * row_k;
        gg += r.wg[i] * row_g;
        ak += r.wk[i] * row_a;
    }
    const double jac = hu * hv;
    Cell c{u0, u1, v0, v1, kk * jac, 0.0, ak * jac, std::abs(kk - gk) * jac,
           std::abs(kk - kg) * jac, depth};
    c.error = std::max(c.err_u + c.err_v, std::abs(kk - gg) * jac);
    return c;
}

} // namespace detail

/// Checks that |f| on the domain boundary is below rel_tol times its interior
/// peak. Throws NonDecayingIntegrand otherwise.
template <class F>
void check_boundary_decay(F&& f, const QuadratureSpec& spec)
{
    const Complex rot = std::polar(1.0, spec.angle);
    const auto at = [&](double u, double v) { return std::abs(f(spec.center + rot * Complex(u, v))); };
    constexpr int interior = 41;
    double peak = 0.0;
    for (int i = 0; i < interior; ++i)
        for (int j = 0; j < interior; ++j)
            peak = std::max(peak, at(spec.half_width_u * (2.0 * i / (interior - 1) - 1.0),
                                     spec.half_width_v * (2.0 * j / (interior - 1) - 1.0)));
    constexpr int edge = 256;
    double boundary = 0.0;
    for (int i = 0; i <= edge; ++i) {
        const double s = 2.0 * i / edge - 1.0;
        boundary = std::max({boundary, at(s * spec.half_width_u, spec.half_width_v),
                             at(s * spec.half_width_u, -spec.half_width_v),
                             at(spec.half_width_u, s * spec.half_width_v),
                             at(-spec.half_width_u, s * spec.half_width_v)});
    }
    peak = std::max(peak, boundary);
    if (peak > 0.0 && boundary > spec.rel_tol * peak) {
        std::ostringstream msg;
        msg << "integrand does not decay on the quadrature boundary (boundary/peak = "
            << boundary / peak << ", tolerance " << spec.rel_tol << "); enlarge the domain";
        throw NonDecayingIntegrand(msg.str());
    }
}

/// Globally adaptive tensor Gauss-Kronrod (7/15) cubature of a real integrand
/// f(zeta) over the rotated rectangle in `spec`. Converges when the summed
/// error estimate is below rel_tol times the integral of |f|.
template <class F>
QuadratureResult integrate2d(F&& f, const QuadratureSpec& spec)
{
    spec.validate();
    if (spec.check_decay) check_boundary_decay(f, spec);

    const Complex rot = std::polar(1.0, spec.angle);
    constexpr std::size_t max_cells = 400000;

    std::priority_queue<detail::Cell> heap;
    std::size_t evaluations = 0;
    // Seed with a coarse grid so that features narrower than the domain are
    // not missed by a single 15x15 cell.
    const int nu = std::clamp(static_cast<int>(std::ceil(spec.half_width_u / 2.0)), 1, 16);
    const int nv = std::clamp(static_cast<int>(std::ceil(spec.half_width_v / 2.0)), 1, 16);
    double value = 0, error = 0, abs_value = 0;
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double u0 = -spec.half_width_u + 2.0 * spec.half_width_u * i / nu;
            const double u1 = -spec.half_width_u + 2.0 * spec.half_width_u * (i + 1) / nu;
            const double v0 = -spec.half_width_v + 2.0 * spec.half_width_v * j / nv;
            const double v1 = -spec.half_width_v + 2.0 * spec.half_width_v * (j + 1) / nv;
            auto c = detail::evaluate_cell(f, spec, rot, u0, u1, v0, v1, 0);
            evaluations += 225;
            value += c.value;
            error += c.error;
            abs_value += c.abs_value;
            heap.push(c);
        }
    }

    while (error > spec.rel_tol * abs_value && abs_value > 0.0) {
        detail::Cell worst = heap.top();
        if (worst.depth >= spec.max_depth || heap.size() >= max_cells) {
            std::ostringstream msg;
            msg << "quadrature tolerance " << spec.rel_tol << " unreachable (error estimate "
                << error << " after " << evaluations << " evaluations)";
            throw MaxDepthExceeded(msg.str());
        }
        heap.pop();
        value -= worst.value;
        error -= worst.error;
        abs_value -= worst.abs_value;

        std::array<detail::Cell, 2> halves;
        if (worst.err_u >= worst.err_v) {
            const double mid = 0.5 * (worst.u0 + worst.u1);
            halves[0] = detail::evaluate_cell(f, spec, rot, worst.u0, mid, worst.v0, worst.v1, worst.depth + 1);
            halves[1] = detail::evaluate_cell(f, spec, rot, mid, worst.u1, worst.v0, worst.v1, worst.depth + 1);
        } else {
            const double mid = 0.5 * (worst.v0 + worst.v1);
            halves[0] = detail::evaluate_cell(f, spec, rot, worst.u0, worst.u1, worst.v0, mid, worst.depth + 1);
            halves[1] = detail::evaluate_cell(f, spec, rot, worst.u0, worst.u1, mid, worst.v1, worst.depth + 1);
        }
        evaluations += 450;
        for (const auto& h : halves) {
            value += h.value;
            error += h.error;
            abs_value += h.abs_value;
            heap.push(h);
        }
        error = std::max(error, 0.0);
    }

    // Re-sum from the cells to shed accumulated rounding in the running totals.
    QuadratureResult out;
    out.evaluations = evaluations;
    while (!heap.empty()) {
        const auto& c = heap.top();
        out.value += c.value;
        out.error += c.error;
        out.abs_integral += c.abs_value;
        heap.pop();
    }
    return out;
}

/// Adaptive 1-D Gauss-Kronrod (7/15) on [a, b].
template <class F>
QuadratureResult integrate1d(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 1e-14,
                             int max_intervals = 10000)
{
    const auto& r = detail::rule15();
    struct Interval {
        double a, b, value, error, abs_value;
        bool operator<(const Interval& o) const { return error < o.error; }
    };
    QuadratureResult out;
    const auto eval = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        double k = 0, g = 0, ak = 0;
        for (int i = 0; i < 15; ++i) {
            const double v = f(c + h * r.x[i]);
            k += r.wk[i] * v;
            g += r.wg[i] * v;
            ak += r.wk[i] * std::abs(v);
        }
        out.evaluations += 15;
        return Interval{lo, hi, k * h, std::abs(k - g) * h, ak * h};
    };
    std::priority_queue<Interval> heap;
    heap.push(eval(a, b));
    double value = heap.top().value, error = heap.top().error;
    while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
        if (static_cast<int>(heap.size()) >= max_intervals)
            throw MaxDepthExceeded("integrate1d: interval budget exhausted");
        Interval w = heap.top();
        heap.pop();
        const double mid = 0.5 * (w.a + w.b);
        Interval l = eval(w.a, mid), rr = eval(mid, w.b);
        value += l.value + rr.value - w.value;
        error += l.error + rr.error - w.error;
        heap.push(l);
        heap.push(rr);
    }
    while (!heap.empty()) {
        out.value += heap.top().value;
        out.error += heap.top().error;
        out.abs_integral += heap.top().abs_value;
        heap.pop();
    }
    return out;
}

} // namespace optomech
