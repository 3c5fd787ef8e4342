#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "optomech/model_cubic.hpp"
#include "optomech/model_quartic.hpp"
#include "optomech/phasespace.hpp"
#include "oracles.hpp"

using namespace optomech;

namespace {

CoherentSuperposition cat(double a)
{
    return normalize(CoherentSuperposition({{1.0, a}, {1.0, -a}}));
}

SqueezedSuperposition membrane_state()
{
    QuarticParams q;
    q.k = coupling_for_squeezing(2.0, pi);
    return conditional_state_quartic(q);
}

template <class State>
double marginal_l1(const WignerGrid& w, const State& s)
{
    const auto m = w.x_marginal();
    double l1 = 0.0;
    for (int i = 0; i < w.spec.nx; ++i) l1 += std::abs(m[i] - position_density(s, w.spec.x(i))) * w.spec.dx();
    return l1;
}

} // namespace

TEST(Wigner, VacuumPeak)
{
    const auto vac = normalize(CoherentSuperposition({{1.0, 0.0}}));
    EXPECT_NEAR(wigner_point(to_wavepackets(vac), 0.0, 0.0), 1.0 / pi, 1e-15);
    EXPECT_NEAR(wigner_point(FockVector({1.0}), 0.0, 0.0), 1.0 / pi, 1e-14);
    const auto g = wigner(vac, GridSpec::square(5.0, 65));
    EXPECT_NEAR(g.max(), 1.0 / pi, 1e-14); // odd resolution puts a cell centre at the origin
    EXPECT_GT(g.min(), 0.0);
}

TEST(Wigner, FockOneAtOrigin)
{
    EXPECT_NEAR(wigner_point(FockVector({0.0, 1.0}), 0.0, 0.0), -1.0 / pi, 1e-14);
}

TEST(Wigner, CatFringes)
{
    const double a = 2.0;
    const auto s = to_wavepackets(cat(a));
    // W(0, p) is proportional to cos(2 sqrt2 a p): extremes alternate in sign.
    const double period = pi / (std::sqrt(2.0) * a);
    for (int j = 0; j < 4; ++j) {
        const double w = wigner_point(s, 0.0, j * period / 2.0);
        if (j % 2 == 0)
            EXPECT_GT(w, 0.0) << j;
        else
            EXPECT_LT(w, 0.0) << j;
    }
    const double n2 = 1.0 / (2.0 + 2.0 * std::exp(-2.0 * a * a));
    const double expected = n2 * 2.0 * (std::exp(-2.0 * a * a) + 1.0) / pi; // at the origin
    EXPECT_NEAR(wigner_point(s, 0.0, 0.0), expected, 1e-14);
}

TEST(Wigner, RoutesAgree)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 4; ++i) {
        const auto co = oracle::random_coherent(rng, 2.0);
        const auto sq = oracle::random_squeezed(rng, 0.8);
        const auto co_packets = to_wavepackets(co);
        const auto sq_packets = to_wavepackets(sq);
        const auto co_fock = to_fock(co);
        const auto sq_fock = to_fock(sq);
        for (int j = 0; j < 5; ++j) {
            const Complex z = oracle::random_complex(rng, 3.0);
            EXPECT_NEAR(wigner_point(co_packets, z.real(), z.imag()), wigner_point(co_fock, z.real(), z.imag()), 1e-8);
            EXPECT_NEAR(wigner_point(sq_packets, z.real(), z.imag()), wigner_point(sq_fock, z.real(), z.imag()), 1e-8);
        }
    }
}

TEST(Wigner, EndMirrorStateChecks)
{
    const auto s = conditional_state(CubicParams{});
    const auto spec = default_grid(s);
    EXPECT_EQ(spec.nx, 256);
    const auto w = wigner(s, spec, 2);
    EXPECT_NEAR(w.riemann_sum(), 1.0, 0.02);
    EXPECT_NEAR(w.purity(), 1.0, 0.05);
    EXPECT_LT(w.min(), 0.0);
    EXPECT_LT(marginal_l1(w, to_wavepackets(s)), 0.02);
}

TEST(Wigner, MembraneStateChecks)
{
    const auto s = membrane_state();
    const auto w = wigner(s, default_grid(s), 2);
    EXPECT_NEAR(w.riemann_sum(), 1.0, 0.02);
    EXPECT_NEAR(w.purity(), 1.0, 0.05);
    EXPECT_LT(w.min(), 0.0);
    EXPECT_LT(marginal_l1(w, to_wavepackets(s)), 0.02);
}

TEST(Wigner, FockStateChecks)
{
    const FockVector v = normalize(FockVector({Complex(0.5, 0.1), 0.0, Complex(0.0, 0.7), 0.3}));
    const auto w = wigner(v, default_grid(v, 96));
    EXPECT_NEAR(w.riemann_sum(), 1.0, 0.02);
    EXPECT_NEAR(w.purity(), 1.0, 0.05);
    EXPECT_LT(marginal_l1(w, v), 0.02);
}

TEST(Wigner, ParallelRowsAreDeterministic)
{
    const auto s = cat(1.5);
    const auto spec = GridSpec::square(5.0, 40);
    const auto a = wigner(s, spec, 1);
    const auto b = wigner(s, spec, 4);
    EXPECT_EQ(a.values, b.values);
}

TEST(GridSpec, Validation)
{
    GridSpec g;
    g.nx = 0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.x_max = g.x_min;
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(CouplingForSqueezing, FirstCrossing)
{
    const double k = coupling_for_squeezing(2.0, pi);
    EXPECT_NEAR(squeeze_degree(1, pi, k).modulus(), 2.0, 1e-10);
    for (double kk = 0.0; kk < k - 1e-3; kk += 1e-2) EXPECT_LT(squeeze_degree(1, pi, kk).modulus(), 2.0);
    EXPECT_EQ(coupling_for_squeezing(0.0, pi), 0.0);
}
