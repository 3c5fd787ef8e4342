#pragma once

// The figure, sweep and single-point commands behind optomech-cli.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "../optomech.hpp"
#include "config.hpp"
#include "table.hpp"

namespace optomech::app {

enum class Command { fig1b, fig2a, fig2b, fig2c, fig3a, fig3b, fig3d, wigner, cat_benchmark, eval };

inline std::string command_name(Command c)
{
    switch (c) {
    case Command::fig1b: return "fig1b";
    case Command::fig2a: return "fig2 a";
    case Command::fig2b: return "fig2 b";
    case Command::fig2c: return "fig2 c";
    case Command::fig3a: return "fig3 a";
    case Command::fig3b: return "fig3 b";
    case Command::fig3d: return "fig3 d";
    case Command::wigner: return "wigner";
    case Command::cat_benchmark: return "cat-benchmark";
    case Command::eval: return "eval";
    }
    return "?";
}

/// Figure defaults, applied before the config file, environment and flags.
inline std::vector<std::pair<std::string, std::string>> command_defaults(Command c)
{
    switch (c) {
    case Command::fig1b: return {{"model", "end-mirror"}, {"k", "0:10:101"}, {"alpha", "0.8"}, {"beta0", "2"}};
    case Command::fig2a:
    case Command::fig2b:
        return {{"model", "end-mirror"}, {"k", "0:4:81"}, {"beta0", "0"}, {"nbar", "0.0001,0.01,0.1"}};
    case Command::fig2c: return {{"model", "end-mirror"}, {"k", "0.7"}, {"beta0", "0"}, {"nbar", "1e-5:0.1:41:log"}};
    case Command::fig3a: return {{"model", "membrane"}, {"k", "0:20:201"}, {"alpha", "0.7"}, {"x", "1"}};
    case Command::fig3b: return {{"model", "membrane"}, {"k", "1"}, {"alpha", "0.7"}, {"x", "1"}};
    case Command::fig3d: return {{"model", "membrane"}, {"r", "0:3:61"}, {"alpha", "0.7"}, {"x", "1"}};
    case Command::wigner: return {{"membrane_state", "two-term"}};
    case Command::cat_benchmark:
    case Command::eval: return {};
    }
    return {};
}

/// A point of a sweep grid. `temperature` is zero unless it drives nbar.
struct Point {
    double k = 0, nbar = 0, t = 0, x = 0, alpha = 0, beta0 = 0, r = 0, temperature = 0;
};

inline FrequencyConvention convention(const RunConfig& cfg)
{
    return cfg.text("freq_convention") == "ordinary" ? FrequencyConvention::ordinary : FrequencyConvention::angular;
}

namespace detail {

struct Axis {
    std::string name;
    std::vector<double> values;
};

inline void set_axis(Point& p, const std::string& name, double v)
{
    if (name == "k") p.k = v;
    else if (name == "nbar") p.nbar = v;
    else if (name == "temperature") p.temperature = v;
    else if (name == "t") p.t = v;
    else if (name == "x") p.x = v;
    else if (name == "alpha") p.alpha = v;
    else if (name == "beta0") p.beta0 = v;
    else if (name == "r") p.r = v;
}

inline bool uses_temperature(const RunConfig& cfg)
{
    return cfg.range("temperature").values != std::vector<double>{0.0};
}

/// Outer axes in row order (last varies fastest) and the axes maximized over.
inline std::pair<std::vector<Axis>, std::vector<Axis>> sweep_axes(const RunConfig& cfg,
                                                                  const std::vector<std::string>& names)
{
    const std::string mo = cfg.text("max_over");
    std::set<std::string> inner_names;
    if (mo == "t" || mo == "t+x") inner_names.insert("t");
    if (mo == "x" || mo == "t+x") inner_names.insert("x");
    std::vector<Axis> outer, inner;
    for (const auto& n : names) {
        std::string key = n;
        if (n == "nbar" && uses_temperature(cfg)) key = "temperature";
        Axis a{key, cfg.range(key).values};
        (inner_names.count(key) ? inner : outer).push_back(std::move(a));
    }
    return {outer, inner};
}

inline std::size_t grid_size(const std::vector<Axis>& axes)
{
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

inline void apply_index(Point& p, const std::vector<Axis>& axes, std::size_t index)
{
    for (std::size_t i = axes.size(); i-- > 0;) {
        const std::size_t n = axes[i].values.size();
        set_axis(p, axes[i].name, axes[i].values[index % n]);
        index /= n;
    }
}

/// Axes not listed may only hold a single value for this command.
inline void require_scalar_except(const RunConfig& cfg, Command c, const std::vector<std::string>& allowed)
{
    for (const auto& k : schema()) {
        if (k.type != KeyType::range) continue;
        if (std::find(allowed.begin(), allowed.end(), k.name) != allowed.end()) continue;
        if (std::string(k.name) == "temperature" &&
            std::find(allowed.begin(), allowed.end(), "nbar") != allowed.end())
            continue;
        if (!cfg.range(k.name).scalar())
            throw ConfigError(k.name, command_name(c) + " does not sweep '" + std::string(k.name) + "'");
    }
}

inline Point scalar_point(const RunConfig& cfg)
{
    Point p;
    for (const char* key : {"k", "nbar", "t", "x", "alpha", "beta0", "r"}) set_axis(p, key, cfg.range(key).front());
    if (uses_temperature(cfg)) p.temperature = cfg.range("temperature").front();
    return p;
}

inline void resolve_temperature(const RunConfig& cfg, Point& p)
{
    if (p.temperature > 0.0) p.nbar = occupation_from_temperature(p.temperature, cfg.number("omega_m"), convention(cfg));
}

inline CoherentSuperposition cat_state(double a)
{
    return normalize(CoherentSuperposition({{1.0, a}, {1.0, -a}}));
}

inline SqueezedSuperposition two_term_state(Complex zeta)
{
    return normalize(SqueezedSuperposition({{1.0, 0.0}, {1.0, zeta}}));
}

inline GaussianState gaussian_state(const RunConfig& cfg, const Point& p)
{
    GaussianState g;
    if (cfg.has_value("cov_xx")) {
        g.mean = p.beta0;
        g.cov_xx = cfg.number("cov_xx");
        g.cov_xp = cfg.number("cov_xp");
        g.cov_pp = cfg.number("cov_pp");
    } else {
        g = GaussianState::squeezed(std::polar(p.r, cfg.number("theta")), p.beta0);
        const double s = 2.0 * p.nbar + 1.0;
        g.cov_xx *= s;
        g.cov_xp *= s;
        g.cov_pp *= s;
    }
    return g;
}

inline MacroResult measure_coherent(const RunConfig& cfg, const CoherentSuperposition& s, double nbar)
{
    if (cfg.text("method") == "quadrature") return measure_I(s, nbar, cfg.number("tolerance"));
    return measure_I_coherent_exact(s, nbar);
}

} // namespace detail

/// I and M of the configured model at one point.
inline MacroResult evaluate(const RunConfig& cfg, Point p)
{
    detail::resolve_temperature(cfg, p);
    const std::string model = cfg.text("model");
    const std::string method = cfg.text("method");
    const double tol = cfg.number("tolerance");
    if (model == "end-mirror") {
        CubicParams cp;
        cp.k = p.k;
        cp.t = p.t;
        cp.alpha = p.alpha;
        cp.beta0 = p.beta0;
        cp.nbar = p.nbar;
        cp.x = p.x;
        cp.n_ph = cfg.integer("n_ph");
        return detail::measure_coherent(cfg, conditional_state(cp), p.nbar);
    }
    if (model == "cat") return detail::measure_coherent(cfg, detail::cat_state(p.alpha), p.nbar);
    if (model == "membrane") {
        if (cfg.text("membrane_state") == "two-term") {
            const Complex zeta = squeeze_degree(1, p.t, p.k).zeta;
            if (method == "quadrature") return measure_I(detail::two_term_state(zeta), tol);
            return eq9_closed_form(std::abs(zeta));
        }
        QuarticParams qp;
        qp.k = p.k;
        qp.t = p.t;
        qp.alpha = p.alpha;
        qp.x = p.x;
        qp.n_ph = cfg.integer("n_ph");
        return measure_I(conditional_state_quartic(qp), tol);
    }
    // gaussian
    const GaussianState g = detail::gaussian_state(cfg, p);
    if (method != "quadrature") return measure_I_gaussian(g);
    g.validate();
    // |chi|^2 = exp(-v^T V v), |v|^2 = 2|zeta|^2; reach exp(-40) along the widest direction.
    const double tr = g.cov_xx + g.cov_pp;
    const double lmin = 0.5 * tr - std::sqrt(0.25 * (g.cov_xx - g.cov_pp) * (g.cov_xx - g.cov_pp) + g.cov_xp * g.cov_xp);
    QuadratureSpec q;
    q.half_width_u = q.half_width_v = std::sqrt(20.0 / lmin) + 2.0;
    q.rel_tol = tol;
    return measure_I_quadrature(char_function(g), q, mean_phonon(g));
}

/// Checks that need the command as well as the values.
inline void validate_for(Command c, const RunConfig& cfg)
{
    cfg.validate();
    const std::string model = cfg.text("model");
    const std::string method = cfg.text("method");
    switch (c) {
    case Command::fig1b:
    case Command::fig2a:
    case Command::fig2b:
    case Command::fig2c:
    case Command::eval:
        detail::require_scalar_except(cfg, c, {"k", "nbar", "t", "x", "alpha", "beta0", "r"});
        break;
    case Command::fig3a: detail::require_scalar_except(cfg, c, {"k", "t"}); break;
    case Command::fig3b: detail::require_scalar_except(cfg, c, {"k", "t", "alpha", "x"}); break;
    case Command::fig3d: detail::require_scalar_except(cfg, c, {"r", "t"}); break;
    case Command::wigner: detail::require_scalar_except(cfg, c, {}); break;
    case Command::cat_benchmark: detail::require_scalar_except(cfg, c, {"benchmark_I"}); break;
    }
    if (c != Command::cat_benchmark && !cfg.range("benchmark_I").scalar())
        throw ConfigError("benchmark_I", "only cat-benchmark sweeps 'benchmark_I'");
    const bool thermal = detail::uses_temperature(cfg) || cfg.range("nbar").values != std::vector<double>{0.0};
    const bool sweeps = c == Command::fig1b || c == Command::fig2a || c == Command::fig2b || c == Command::fig2c ||
                        c == Command::eval;
    if (sweeps && (model == "membrane") && thermal)
        throw ConfigError("nbar", "the membrane model starts from the ground state; nbar must be 0");
    if (sweeps && model == "membrane" && method == "exact" && cfg.text("membrane_state") == "full")
        throw ConfigError("method", "no closed form exists for the full membrane state; use auto or quadrature");
    if ((c == Command::fig3a || c == Command::fig3b || c == Command::fig3d) && thermal)
        throw ConfigError("nbar", command_name(c) + " describes the ground-state membrane; nbar must be 0");
    if (c == Command::wigner) {
        if (thermal && model != "gaussian")
            throw ConfigError("nbar", "Wigner grids of thermally averaged states are only provided for model=gaussian");
        if (model == "membrane" && !(cfg.range("r").front() > 0.0))
            throw ConfigError("r", "the membrane Wigner state is selected by |zeta(1)| = r > 0");
    }
    if (model == "gaussian" && (sweeps || c == Command::wigner)) {
        RunConfig probe = cfg;
        for (double nb : cfg.range("nbar").values) {
            Point p = detail::scalar_point(cfg);
            p.nbar = nb;
            try {
                detail::gaussian_state(cfg, p).validate();
            } catch (const InvalidCovariance& e) {
                throw ConfigError(cfg.has_value("cov_xx") ? "cov_xx" : "r", e.what());
            }
        }
    }
}

struct Output {
    Table table;
    std::optional<nlohmann::ordered_json> json; // replaces the row-array form when set
};

namespace detail {

inline std::vector<Cell> standard_cells(const Point& p, const MacroResult& r)
{
    return {p.k, p.nbar, p.t, p.x, p.alpha, p.beta0, r.I, r.M, r.raw_integral, r.error_estimate, to_string(r.method)};
}

inline unsigned jobs(const RunConfig& cfg)
{
    const int j = cfg.integer("jobs");
    return j > 0 ? static_cast<unsigned>(j) : default_jobs();
}

/// Generic sweep over (nbar|temperature, alpha, beta0, r, k, t, x), with the
/// max_over axes folded into each row.
inline Output run_sweep(Command c, const RunConfig& cfg)
{
    const auto [outer, inner] = sweep_axes(cfg, {"nbar", "alpha", "beta0", "r", "k", "t", "x"});
    const std::size_t n_outer = grid_size(outer), n_inner = grid_size(inner);
    Output out;
    out.table.columns = standard_columns();
    const bool temps = uses_temperature(cfg);
    if (temps) out.table.columns.push_back("temperature");
    if (c == Command::fig2c) {
        out.table.columns.push_back("T_angular");
        out.table.columns.push_back("T_ordinary");
    }
    if (c == Command::eval) {
        out.table.columns.push_back("model");
        out.table.columns.push_back("r");
    }
    out.table.rows.resize(n_outer);
    const Point base = scalar_point(cfg);
    parallel_for(n_outer, jobs(cfg), [&](std::size_t i) {
        Point p = base;
        apply_index(p, outer, i);
        std::optional<std::pair<Point, MacroResult>> best;
        for (std::size_t j = 0; j < n_inner; ++j) {
            Point q = p;
            apply_index(q, inner, j);
            MacroResult r = evaluate(cfg, q);
            resolve_temperature(cfg, q);
            if (!best || r.I > best->second.I) best.emplace(q, r);
        }
        auto row = standard_cells(best->first, best->second);
        if (temps) row.push_back(best->first.temperature);
        if (c == Command::fig2c) {
            const double nb = best->first.nbar, w = cfg.number("omega_m");
            row.push_back(nb > 0 ? temperature_from_occupation(nb, w, FrequencyConvention::angular) : 0.0);
            row.push_back(nb > 0 ? temperature_from_occupation(nb, w, FrequencyConvention::ordinary) : 0.0);
        }
        if (c == Command::eval) {
            row.push_back(cfg.text("model"));
            row.push_back(best->first.r);
        }
        out.table.rows[i] = std::move(row);
    });
    return out;
}

/// |zeta(0)|, |zeta(1)| against k; I = M of N(|0> + |zeta(1)>).
inline Output run_fig3a(const RunConfig& cfg)
{
    const auto [outer, inner] = sweep_axes(cfg, {"k", "t"});
    Output out;
    out.table.columns = standard_columns();
    out.table.columns.insert(out.table.columns.end(), {"zeta0", "zeta1"});
    const Point base = scalar_point(cfg);
    const std::size_t n = grid_size(outer) * grid_size(inner);
    std::vector<Axis> all = outer;
    all.insert(all.end(), inner.begin(), inner.end());
    for (std::size_t i = 0; i < n; ++i) {
        Point p = base;
        p.beta0 = 0.0;
        apply_index(p, all, i);
        const double z0 = squeeze_degree(0, p.t, p.k).modulus();
        const double z1 = squeeze_degree(1, p.t, p.k).modulus();
        auto row = standard_cells(p, eq9_closed_form(z1));
        row.push_back(z0);
        row.push_back(z1);
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

/// Branch amplitude distribution of the membrane state, one row per photon
/// number; I and M are those of the full conditional state.
inline Output run_fig3b(const RunConfig& cfg)
{
    const auto [outer, inner] = sweep_axes(cfg, {"alpha", "k", "t", "x"});
    std::vector<Axis> all = outer;
    all.insert(all.end(), inner.begin(), inner.end());
    Output out;
    out.table.columns = standard_columns();
    out.table.columns.insert(out.table.columns.end(), {"n", "weight_abs", "weight_arg", "zeta_abs"});
    const Point base = scalar_point(cfg);
    const std::size_t n = grid_size(all);
    std::vector<std::vector<std::vector<Cell>>> blocks(n);
    parallel_for(n, jobs(cfg), [&](std::size_t i) {
        Point p = base;
        p.beta0 = 0.0;
        apply_index(p, all, i);
        QuarticParams qp;
        qp.k = p.k;
        qp.t = p.t;
        qp.alpha = p.alpha;
        qp.x = p.x;
        qp.n_ph = cfg.integer("n_ph");
        const MacroResult r = measure_I(conditional_state_quartic(qp), cfg.number("tolerance"));
        auto w = quartic_branch_weights(qp);
        double norm = 0.0;
        for (const auto& v : w) norm += std::norm(v);
        norm = std::sqrt(norm);
        for (std::size_t m = 0; m < w.size(); ++m) {
            auto row = standard_cells(p, r);
            row.push_back(double(m));
            row.push_back(std::abs(w[m]) / norm);
            row.push_back(w[m] == Complex{} ? 0.0 : std::arg(w[m]));
            row.push_back(squeeze_degree(int(m), p.t, p.k).modulus());
            blocks[i].push_back(std::move(row));
        }
    });
    for (auto& b : blocks)
        for (auto& row : b) out.table.rows.push_back(std::move(row));
    return out;
}

/// I = M of N(|0> + |zeta>) against r = |zeta|, with the coupling that
/// first reaches r; three points are re-evaluated by cubature.
inline Output run_fig3d(const RunConfig& cfg)
{
    const auto [outer, inner] = sweep_axes(cfg, {"t", "r"});
    std::vector<Axis> all = outer;
    all.insert(all.end(), inner.begin(), inner.end());
    Output out;
    out.table.columns = standard_columns();
    out.table.columns.insert(out.table.columns.end(), {"r", "check_I"});
    const Point base = scalar_point(cfg);
    const std::size_t n = grid_size(all);
    const std::size_t last = n - 1;
    const std::set<std::size_t> checks = {last / 3, (2 * last) / 3, last};
    out.table.rows.resize(n);
    parallel_for(n, jobs(cfg), [&](std::size_t i) {
        Point p = base;
        p.beta0 = 0.0;
        apply_index(p, all, i);
        p.k = p.r > 0.0 ? coupling_for_squeezing(p.r, p.t) : 0.0;
        const MacroResult closed = eq9_closed_form(p.r);
        double check = std::nan("");
        if (checks.count(i)) {
            const MacroResult q = measure_I(two_term_state(p.r), cfg.number("tolerance"));
            check = q.I;
            const double allowed = std::max(1e-5, 10.0 * q.error_estimate);
            if (std::abs(q.I - closed.I) > allowed)
                throw CrossCheckFailed("closed form " + format12(closed.I) + " vs cubature " + format12(q.I) +
                                       " at r = " + format12(p.r));
        }
        auto row = standard_cells(p, closed);
        row.push_back(p.r);
        row.push_back(check);
        out.table.rows[i] = std::move(row);
    });
    return out;
}

inline Output run_cat_benchmark(const RunConfig& cfg)
{
    Output out;
    out.table.columns = {"I", "alpha", "M"};
    for (double I : cfg.range("benchmark_I").values) {
        const double a = cat_equivalent_amplitude(I);
        // Even cats saturate I = M = alpha^2 tanh(alpha^2).
        out.table.rows.push_back({I, a, a * a * std::tanh(a * a)});
    }
    return out;
}

inline double gaussian_wigner(const GaussianState& g, double x, double p)
{
    const double mx = std::sqrt(2.0) * g.mean.real(), mp = std::sqrt(2.0) * g.mean.imag();
    const double det = g.determinant();
    const double dx = x - mx, dp = p - mp;
    const double q = (g.cov_pp * dx * dx - 2.0 * g.cov_xp * dx * dp + g.cov_xx * dp * dp) / det;
    return std::exp(-0.5 * q) / (2.0 * pi * std::sqrt(det));
}

inline Output grid_output(const WignerGrid& w)
{
    Output out;
    out.table.columns = {"x", "p", "W"};
    nlohmann::ordered_json xs = nlohmann::ordered_json::array(), ps = nlohmann::ordered_json::array();
    nlohmann::ordered_json mat = nlohmann::ordered_json::array();
    for (int j = 0; j < w.spec.np; ++j) ps.push_back(json_number(w.spec.p(j)));
    for (int i = 0; i < w.spec.nx; ++i) {
        xs.push_back(json_number(w.spec.x(i)));
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int j = 0; j < w.spec.np; ++j) {
            out.table.rows.push_back({w.spec.x(i), w.spec.p(j), w.at(i, j)});
            row.push_back(json_number(w.at(i, j)));
        }
        mat.push_back(std::move(row));
    }
    nlohmann::ordered_json doc;
    doc["x"] = std::move(xs);
    doc["p"] = std::move(ps);
    doc["W"] = std::move(mat);
    out.json = std::move(doc);
    return out;
}

inline Output run_wigner(const RunConfig& cfg)
{
    Point p = scalar_point(cfg);
    resolve_temperature(cfg, p);
    const std::string model = cfg.text("model");
    const double hw = cfg.number("grid_half_width");
    const int res = cfg.integer("grid_resolution");
    const unsigned j = jobs(cfg);
    const auto spec_for = [&](const auto& state) { return hw > 0 ? GridSpec::square(hw, res) : default_grid(state, res); };
    if (model == "end-mirror" || model == "cat") {
        CoherentSuperposition s;
        if (model == "cat") {
            s = cat_state(p.alpha);
        } else {
            CubicParams cp;
            cp.k = p.k;
            cp.t = p.t;
            cp.alpha = p.alpha;
            cp.beta0 = p.beta0;
            cp.x = p.x;
            cp.n_ph = cfg.integer("n_ph");
            s = conditional_state(cp);
        }
        return grid_output(wigner(s, spec_for(s), j));
    }
    if (model == "membrane") {
        const double k = coupling_for_squeezing(p.r, p.t);
        SqueezedSuperposition s;
        if (cfg.text("membrane_state") == "two-term") {
            s = two_term_state(squeeze_degree(1, p.t, k).zeta);
        } else {
            QuarticParams qp;
            qp.k = k;
            qp.t = p.t;
            qp.alpha = p.alpha;
            qp.x = p.x;
            qp.n_ph = cfg.integer("n_ph");
            s = conditional_state_quartic(qp);
        }
        return grid_output(wigner(s, spec_for(s), j));
    }
    const GaussianState g = gaussian_state(cfg, p);
    g.validate();
    const double mx = std::sqrt(2.0) * std::abs(g.mean.real()), mp = std::sqrt(2.0) * std::abs(g.mean.imag());
    const double lmin = 0.5 * (g.cov_xx + g.cov_pp) -
                        std::sqrt(0.25 * (g.cov_xx - g.cov_pp) * (g.cov_xx - g.cov_pp) + g.cov_xp * g.cov_xp);
    const GridSpec spec = hw > 0 ? GridSpec::square(hw, res)
                                 : optomech::detail::ellipse_grid(mx + 4.0 * std::sqrt(g.cov_xx) + 4.0,
                                                                  mp + 4.0 * std::sqrt(g.cov_pp) + 4.0,
                                                                  std::sqrt(lmin), res, 2048);
    return grid_output(optomech::detail::fill_grid(spec, j, [&](double x, double pp) { return gaussian_wigner(g, x, pp); }));
}

} // namespace detail

inline Output run(Command c, const RunConfig& cfg)
{
    validate_for(c, cfg);
    switch (c) {
    case Command::fig1b:
    case Command::fig2a:
    case Command::fig2b:
    case Command::fig2c:
    case Command::eval: return detail::run_sweep(c, cfg);
    case Command::fig3a: return detail::run_fig3a(cfg);
    case Command::fig3b: return detail::run_fig3b(cfg);
    case Command::fig3d: return detail::run_fig3d(cfg);
    case Command::wigner: return detail::run_wigner(cfg);
    case Command::cat_benchmark: return detail::run_cat_benchmark(cfg);
    }
    return {};
}

} // namespace optomech::app
