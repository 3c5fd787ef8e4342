#include <cmath>

#include <gtest/gtest.h>

#include "optomech/macroscopicity.hpp"
#include "optomech/model_quartic.hpp"

using namespace optomech;

TEST(SqueezeDegree, VacuumBranch)
{
    for (double t : {0.0, 0.3, pi, 7.7})
        for (double k : {0.0, 1.0, 17.0}) {
            const auto b = squeeze_degree(0, t, k);
            EXPECT_EQ(b.modulus(), 0.0);
            EXPECT_EQ(b.chi, 1.0);
            EXPECT_EQ(b.rho, -2.0);
        }
}

TEST(SqueezeDegree, Examples)
{
    const auto one = squeeze_degree(1, pi, 1.0);
    EXPECT_NEAR(one.chi, std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(one.rho, -6.0, 1e-15);
    EXPECT_NEAR(one.modulus(), 0.5724032477180477, 1e-12);
    const auto strong = squeeze_degree(1, pi, 17.0);
    EXPECT_NEAR(strong.modulus(), 1.926744235169156, 1e-12);
}

TEST(SqueezeDegree, ModulusDependsOnlyOnArcsinhArgument)
{
    for (int n : {1, 2, 5})
        for (double k : {0.1, 1.0, 4.0})
            for (double t : {0.2, 1.0, pi, 5.5}) {
                const auto b = squeeze_degree(n, t, k);
                const double chi = std::sqrt(1.0 + 4.0 * k * n);
                EXPECT_NEAR(b.modulus(), std::abs(std::asinh(2.0 * k * n * std::sin(chi * t) / chi)), 1e-14);
            }
}

TEST(SqueezeDegree, PhaseIsContinuousInTime)
{
    for (double k : {0.5, 1.0, 17.0}) {
        EXPECT_EQ(squeeze_degree(1, 0.0, k).eta, 0.0);
        double prev = 0.0;
        const double dt = 1e-3;
        for (int i = 1; i <= 4000; ++i) {
            const double eta = squeeze_degree(1, i * dt, k).eta;
            // |d eta / dt| <= |rho| / 2 chi * chi <= |rho| for this parametrization.
            EXPECT_LT(std::abs(eta - prev), 2.0 * (1.0 + 2.0 * k) * dt + 1e-9) << "k=" << k << " t=" << i * dt;
            prev = eta;
        }
    }
}

TEST(SqueezeDegree, PhaseSolvesTangentRelation)
{
    for (double t : {0.3, 1.2, 2.9}) {
        const auto b = squeeze_degree(2, t, 0.8);
        EXPECT_NEAR(std::tan(b.eta), b.rho / (2.0 * b.chi) * std::tan(b.chi * t), 1e-9 * (1 + std::abs(std::tan(b.eta))));
    }
}

TEST(PhotonCoefficient, Examples)
{
    const auto b0 = squeeze_degree(0, pi, 1.0);
    EXPECT_NEAR(std::abs(photon_coefficient(0, pi, 0.7, b0)), std::exp(-0.245), 1e-15);
    const auto b1 = squeeze_degree(1, pi, 1.0);
    EXPECT_NEAR(std::abs(photon_coefficient(1, pi, 0.7, b1)), 0.7 * std::exp(-0.245), 1e-15);
    EXPECT_NEAR(std::abs(photon_coefficient(1, pi, 0.7, b1)), 0.54789, 1e-5);
    double total = 0.0;
    for (int n = 0; n <= 40; ++n) total += std::norm(photon_coefficient(n, pi, 0.7, squeeze_degree(n, pi, 1.0)));
    EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(QuarticWeights, RatiosAtCaptionPoint)
{
    QuarticParams p; // k=1, t=pi, alpha=0.7, x=1
    const auto w = quartic_branch_weights(p);
    EXPECT_NEAR(std::abs(w[1] / w[0]), 0.7 * 2.0 / std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(std::abs(w[1] / w[0]), 0.99, 0.01);
    EXPECT_NEAR(std::abs(w[2] / w[0]), 0.245, 1e-13);
    EXPECT_LE(std::abs(w[2] / w[0]), 0.25);
}

TEST(QuarticWeights, MatchStandardQuadratureExpansion)
{
    // alpha^n / sqrt(n!) <x|n> is proportional to alpha^n H_n(x) / (sqrt(2^n) n!).
    QuarticParams p;
    p.alpha = 1.3;
    p.x = -0.6;
    const auto w = quartic_branch_weights(p);
    const auto psi = hermite_functions(static_cast<int>(w.size()) - 1, p.x);
    const double scale = psi[0] / std::abs(w[0]);
    for (std::size_t n = 0; n < w.size(); ++n) {
        const double standard = std::pow(p.alpha, double(n)) * std::exp(-0.5 * log_factorial(int(n))) * psi[n];
        EXPECT_NEAR(std::abs(w[n]) * scale, std::abs(standard), 1e-13) << n;
    }
}

TEST(ConditionalQuartic, VacuumWhenNoPhotons)
{
    QuarticParams p;
    p.alpha = 0.0;
    const auto s = conditional_state_quartic(p);
    ASSERT_EQ(s.terms.size(), 1u);
    EXPECT_EQ(std::abs(s.terms[0].squeeze), 0.0);
    EXPECT_NEAR(std::abs(s.terms[0].weight), 1.0, 1e-15);
}

TEST(ConditionalQuartic, NormalizedViaGramMatrix)
{
    for (double k : {0.3, 1.0, 5.0}) {
        QuarticParams p;
        p.k = k;
        const auto s = conditional_state_quartic(p);
        EXPECT_NEAR(norm_squared(s), 1.0, 1e-10);
        EXPECT_NEAR(norm_squared(to_fock(s)), 1.0, 1e-10);
    }
}

TEST(ConditionalQuartic, TwoComponentReduction)
{
    QuarticParams p;
    const auto two = two_component_state(p);
    ASSERT_EQ(two.terms.size(), 2u);
    EXPECT_EQ(std::abs(two.terms[0].squeeze), 0.0);
    EXPECT_NEAR(std::abs(two.terms[1].squeeze), squeeze_degree(1, p.t, p.k).modulus(), 1e-15);
    // |w1 / w0| = 0.99, so the state is close to N(|0> + e^{i phi}|zeta(1)>).
    EXPECT_NEAR(std::abs(two.terms[1].weight / two.terms[0].weight), 0.7 * std::sqrt(2.0), 1e-13);
}

TEST(TwoComponentFidelity, Limits)
{
    QuarticParams p;
    p.alpha = 1e-9;
    EXPECT_NEAR(two_component_fidelity(p), 1.0, 1e-12);
    p = QuarticParams{};
    p.k = 0.0;
    EXPECT_NEAR(two_component_fidelity(p), 1.0, 1e-12);
}

TEST(TwoComponentFidelity, CaptionPoint)
{
    const double f = two_component_fidelity(QuarticParams{});
    EXPECT_GE(f, 0.9);
    EXPECT_LE(f, 1.0);
}

TEST(ConditionalQuartic, StrongCouplingSqueezedCatIsMacroscopic)
{
    QuarticParams p;
    p.k = 17.0;
    const auto two = two_component_state(p);
    const MacroResult r = measure_I(two);
    EXPECT_LE(r.I, r.M + 1e-6);
    EXPECT_GT(r.I, 2.0);
}

TEST(QuarticParams, Validation)
{
    QuarticParams p;
    p.k = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = QuarticParams{};
    p.x = INFINITY;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
