#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "testgen.hpp"

using namespace nct;

namespace {

Amplitude gaussian_amp(double a = 1.0) {
    return [a](std::span<const double> y) {
        double r2 = 0.0;
        for (double v : y)
            r2 += v * v;
        return Complex(std::exp(-a * r2));
    };
}

} // namespace

TEST(Cutoff, BasicShape) {
    const CutoffFamily g{CutoffFamily::Kind::gaussian}, rc{CutoffFamily::Kind::raised_cosine};
    EXPECT_EQ(g.phi1(0.0), 1.0);
    EXPECT_EQ(rc.phi1(0.0), 1.0);
    EXPECT_EQ(rc.phi1(2.0), 0.0);
    EXPECT_EQ(rc.phi1(-3.0), 0.0);
    EXPECT_NEAR(rc.phi1(1.0), 0.5, 1e-15);
    // flat to all orders at the ends of the transition
    EXPECT_LT(1.0 - rc.phi1(0.02), 1e-15);
    EXPECT_LT(rc.phi1(1.98), 1e-15);
    const std::vector<double> x{0.5, -0.25};
    EXPECT_NEAR(g(x), std::exp(-0.3125), 1e-15);
}

TEST(Cutoff, FourierTransformsAgainstDirectQuadrature) {
    using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (auto kind : {CutoffFamily::Kind::gaussian, CutoffFamily::Kind::raised_cosine}) {
        const CutoffFamily c{kind};
        for (double u : {0.0, 0.7, 3.0, 11.0}) {
            auto f = [&](double v) { return c.phi1(v) * std::cos(u * v); };
            const double ref = 2.0 * gk::integrate(f, 0.0, 8.0, 15, 1e-14);
            EXPECT_NEAR(c.phi1_hat(u), ref, 1e-12) << c.name() << " " << u;
        }
    }
}

TEST(Pairing, GaussianRegularizedClosedForm) {
    // int int e^{-i y eta} e^{-y^2} e^{-eps^2 (y^2 + eta^2)} = 2 pi / (1 + 2 eps^2)
    const CutoffFamily g{};
    const auto grid = detail::pairing_grid<16>(g, 1.0);
    const std::vector<double> c{0.0};
    for (double eps : {0.3, 0.1, 0.02}) {
        const Complex v = detail::pairing_regularized(gaussian_amp(), c, g, eps, grid);
        EXPECT_NEAR(v.real(), 2.0 * std::numbers::pi / (1.0 + 2.0 * eps * eps), 1e-12);
        EXPECT_NEAR(v.imag(), 0.0, 1e-14);
    }
}

TEST(Pairing, PropOscOneDimension) {
    for (const auto &a : {gaussian_amp(), Amplitude([](std::span<const double>) { return Complex(1.0); }),
                          Amplitude([](std::span<const double> y) {
                              return Complex((1.0 + y[0] * y[0]) * std::exp(-0.25 * y[0] * y[0]));
                          })}) {
        const auto rep = verify_prop_osc(a, 1);
        EXPECT_TRUE(rep.passed()) << to_markdown(rep);
    }
}

TEST(Pairing, PropOscTwoDimensions) {
    const auto rep = verify_prop_osc(gaussian_amp(), 2);
    EXPECT_TRUE(rep.passed()) << to_markdown(rep);
}

TEST(Pairing, ShiftedPolynomialAmplitude) {
    // (2 pi)^{-1} int int e^{-i (y - c) eta} (1 + y + y^2) = 1 + c + c^2
    Amplitude a = [](std::span<const double> y) { return Complex(1.0 + y[0] + y[0] * y[0]); };
    const std::vector<double> c{1.5};
    const auto r = pairing_integral(a, c, CutoffFamily{});
    EXPECT_FALSE(r.diverged);
    EXPECT_NEAR(std::abs(r.value / (2.0 * std::numbers::pi) - Complex(4.75)), 0.0, 1e-6);
}

TEST(General, FresnelIntegral) {
    OscIntegrand f;
    f.dim = 1;
    f.Q = {1.0};
    f.amplitude = [](std::span<const double>) { return Complex(1.0); };
    const Complex expected = std::sqrt(std::numbers::pi) * std::polar(1.0, std::numbers::pi / 4.0);
    for (auto kind : {CutoffFamily::Kind::gaussian, CutoffFamily::Kind::raised_cosine}) {
        const auto r = osc_integral(f, CutoffFamily{kind});
        EXPECT_LT(std::abs(r.value - expected), 1e-6) << CutoffFamily{kind}.name();
        EXPECT_LT(std::abs(r.value - expected), 10.0 * r.error_estimate + 1e-9);
    }
}

TEST(General, AbsolutelyConvergentAgreesWithPlainIntegral) {
    OscIntegrand f;
    f.dim = 1;
    f.Q = {-0.7};
    f.amplitude = gaussian_amp();
    // int e^{-0.7 i x^2} e^{-x^2} = sqrt(pi / (1 + 0.7 i))
    const Complex expected = std::sqrt(Complex(std::numbers::pi) / Complex(1.0, 0.7));
    for (auto kind : {CutoffFamily::Kind::gaussian, CutoffFamily::Kind::raised_cosine}) {
        const auto r = osc_integral(f, CutoffFamily{kind});
        EXPECT_LT(std::abs(r.value - expected), 1e-6);
    }
}

TEST(General, DenseTwoDimensionalRuleRespectsBudget) {
    OscIntegrand f;
    f.dim = 2;
    f.Q = {1.0, 0.0, 0.0, -0.5};
    f.amplitude = gaussian_amp();
    EXPECT_THROW(osc_integral(f, CutoffFamily{}), contract_error);
}

TEST(General, Preconditions) {
    OscIntegrand f;
    f.dim = 1;
    f.Q = {1.0};
    f.amplitude = gaussian_amp();
    EXPECT_THROW(osc_integral(f, CutoffFamily{}, {0.1, 0.2, 0.05}), contract_error);
    EXPECT_THROW(osc_integral(f, CutoffFamily{}, {0.1, 0.05}), contract_error);
    OscQuadrature tiny;
    tiny.max_nodes = 100;
    EXPECT_THROW(osc_integral(f, CutoffFamily{}, default_eps_schedule(), tiny), contract_error);
    f.Q = {0.0};
    EXPECT_THROW(osc_integral(f, CutoffFamily{}), contract_error);
    OscIntegrand h;
    h.dim = 1;
    h.Q = {1.0};
    EXPECT_THROW(osc_integral(h, CutoffFamily{}), contract_error);
}

TEST(General, PairingFormRoutesToPairingEvaluator) {
    const auto f = OscIntegrand::pairing(1, [](std::span<const double> x) { return Complex(std::exp(-x[0] * x[0])); });
    EXPECT_TRUE(f.is_pairing());
    const auto r = osc_integral(f, CutoffFamily{});
    EXPECT_NEAR(std::abs(r.value - Complex(2.0 * std::numbers::pi)), 0.0, 1e-6);
}

TEST(LemmaIntegral, GaussianDampedSymbols) {
    const Theta th(1);
    CallbackSymbol cb;
    cb.theta = th;
    const auto c = TorusElement::one(th) + Complex(0.0, 2.0) * TorusElement::generator(th, 0, -2);
    cb.fn = [c](std::span<const double> x) { return std::exp(-0.3 * x[0] * x[0]) * c; };
    cb.modes = {{0}, {-2}};
    for (int m : {0, 1, -2}) {
        const auto rep = verify_lemma_opn_integral(Symbol(cb), {m});
        EXPECT_TRUE(rep.passed()) << to_markdown(rep);
    }
    EXPECT_THROW(verify_lemma_opn_integral(lambda_symbol(Theta(2), 1.0), {0, 0}), contract_error);
}
