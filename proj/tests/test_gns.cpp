#include <gtest/gtest.h>

#include "testgen.hpp"

using namespace nct;

namespace {

// largest eigenvalue of the Hermitian matrix M^* M
double gram_norm(const Eigen::MatrixXcd &M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.adjoint() * M, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

} // namespace

TEST(Gns, MatrixColumnsAreProducts) {
    testgen::Gen g(21);
    const Theta th = testgen::theta(g, 2);
    const auto a = testgen::element(g, th, 1);
    const int box = 3;
    const auto M = gns_matrix(a, box);
    const auto ref = operator_matrix([&](const TorusElement &x) { return a * x; }, th, box);
    EXPECT_LT((M - ref).norm(), 1e-13);
}

TEST(Gns, SingularValueMatchesGramEigenvalue) {
    testgen::Gen g(22);
    for (int trial = 0; trial < 6; ++trial) {
        const Theta th = testgen::theta(g, 1 + trial % 2);
        const auto a = testgen::element(g, th, 1);
        const auto M = gns_matrix(a, 4);
        EXPECT_NEAR(largest_singular_value(M), gram_norm(M), 1e-10 * gram_norm(M));
    }
}

TEST(Gns, SandwichAndMonotone) {
    testgen::Gen g(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Theta th = testgen::theta(g, 2);
        const auto a = testgen::element(g, th, 1);
        const auto b2 = cstar_norm_bounds(a, 2), b4 = cstar_norm_bounds(a, 4);
        EXPECT_LE(b2.lower, b2.estimate + 1e-12);
        EXPECT_LE(b2.estimate, b2.upper + 1e-12);
        EXPECT_LE(b2.estimate, b4.estimate + 1e-12);
        EXPECT_FALSE(b2.truncated);
    }
}

TEST(Gns, UnitaryHasNormOne) {
    const Theta th = Theta::from_upper(2, {0.41});
    const auto u = TorusElement::monomial(th, {1, -2}, std::polar(1.0, 0.3));
    const auto b = cstar_norm_bounds(u, 3);
    EXPECT_NEAR(b.lower, 1.0, 1e-15);
    EXPECT_NEAR(b.estimate, 1.0, 1e-12);
    EXPECT_NEAR(b.upper, 1.0, 1e-15);
}

TEST(Gns, CommutativeCaseApproachesSupNorm) {
    // theta = 0: a = 1 + U is the function 1 + e^{ix}, sup norm 2
    const Theta th(1);
    const auto a = TorusElement::one(th) + TorusElement::generator(th, 0);
    const auto b = cstar_norm_bounds(a, 60);
    EXPECT_LT(b.estimate, 2.0 + 1e-12);
    EXPECT_GT(b.estimate, 1.99);
    EXPECT_NEAR(b.lower, std::sqrt(2.0), 1e-15);
}

TEST(Gns, ZeroElement) {
    const auto b = cstar_norm_bounds(TorusElement::zero(Theta(2)), 2);
    EXPECT_EQ(b.estimate, 0.0);
    EXPECT_EQ(b.upper, 0.0);
}
