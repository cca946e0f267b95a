#include <gtest/gtest.h>

#include "testgen.hpp"

using namespace nct;

namespace {

MatrixSymbol random_matrix_symbol(testgen::Gen &g, const Theta &th, int r, int deg) {
    std::vector<Symbol> e;
    for (int q = 0; q < r * r; ++q)
        e.push_back(testgen::poly(g, th, (deg + q) % (deg + 1)));
    return MatrixSymbol(r, e);
}

ModuleVector random_vector(testgen::Gen &g, const Theta &th, int r, int box) {
    std::vector<TorusElement> v;
    for (int i = 0; i < r; ++i)
        v.push_back(testgen::element(g, th, box));
    return ModuleVector(th, v);
}

} // namespace

TEST(Idempotent, Examples) {
    const Theta th = Theta::from_upper(2, {0.3});
    const auto one = TorusElement::one(th), zero = TorusElement::zero(th);
    const auto u1 = TorusElement::generator(th, 0), u2 = TorusElement::generator(th, 1);
    const auto p = MatrixElement::diagonal(th, {one, zero});
    EXPECT_TRUE(idempotent_check(p, 1e-12));
    const auto u = MatrixElement::diagonal(th, {u1, u2});
    EXPECT_TRUE(idempotent_check(u * p * star(u), 1e-12));
    EXPECT_TRUE(idempotent_check(MatrixElement(th, 2, {0.5 * one, 0.5 * u1, 0.5 * star(u1), 0.5 * one}), 1e-12));
    EXPECT_FALSE(idempotent_check(MatrixElement::diagonal(th, {u1, zero}), 1e-12));
    // idempotent but not self-adjoint
    EXPECT_FALSE(idempotent_check(MatrixElement(th, 2, {one, one, zero, zero}), 1e-12));
}

TEST(Matrix, StarAndProduct) {
    testgen::Gen g(61);
    const Theta th = testgen::theta(g, 2);
    std::vector<TorusElement> ea, eb;
    for (int q = 0; q < 4; ++q) {
        ea.push_back(testgen::element(g, th, 1));
        eb.push_back(testgen::element(g, th, 1));
    }
    const MatrixElement A(th, 2, ea), B(th, 2, eb);
    // (AB)_{01} = A_00 B_01 + A_01 B_11
    EXPECT_LT(norm0((A * B)(0, 1) - (ea[0] * eb[1] + ea[1] * eb[3])), 1e-12);
    EXPECT_LT(max_entry_norm0(star(A * B) - star(B) * star(A)), 1e-12 * std::max(1.0, max_entry_norm0(A * B)));
    EXPECT_LT(norm0(star(A)(1, 0) - star(ea[1])), 1e-15);
    EXPECT_THROW(MatrixElement(th, 2, {ea[0]}), contract_error);
}

TEST(Module, RankOneParity) {
    testgen::Gen g(62);
    for (int trial = 0; trial < 10; ++trial) {
        const Theta th = testgen::theta(g, 2);
        const Symbol s = testgen::poly(g, th, 2), s2 = testgen::poly(g, th, 1);
        const MatrixSymbol ms(1, {s}), ms2(1, {s2});
        const auto a = testgen::element(g, th, 2), b = testgen::element(g, th, 2);
        const ModuleVector va(th, {a}), vb(th, {b});
        EXPECT_LT(norm0(apply_matrix(ms, va)[0] - apply(s, a)), 1e-12);
        EXPECT_LT(std::abs(module_inner(va, vb) - inner(a, b)), 1e-12);
        EXPECT_LT(std::abs(module_norm_s(va, 1.5) - sobolev_norm(a, 1.5)), 1e-12);
        const Point xi{0.5, -1.25};
        EXPECT_LT(norm0(matrix_adjoint_expansion(ms, xi, 3).value(0, 0) - adjoint_expansion(s, xi, 3).value), 1e-12);
        EXPECT_LT(norm0(matrix_compose_expansion(ms2, ms, xi, 3).value(0, 0) - compose_expansion(s2, s, xi, 3).value),
                  1e-12);
    }
}

TEST(Module, AdjointWorkedExample) {
    // rho = xi diag(U_1, U_1^{-1}): adjoint = diag((xi-1) U_1^{-1}, (xi+1) U_1)
    const Theta th(1);
    PolynomialSymbol a(th), b(th);
    a.add_term({1}, TorusElement::generator(th, 0));
    b.add_term({1}, TorusElement::generator(th, 0, -1));
    const auto rho = MatrixSymbol::diagonal({a, b}, th);
    for (double x : {-2.0, 0.0, 4.0}) {
        const auto r = matrix_adjoint_expansion(rho, Point{x}, 2).value;
        EXPECT_LT(norm0(r(0, 0) - (x - 1) * TorusElement::generator(th, 0, -1)), 1e-14);
        EXPECT_LT(norm0(r(1, 1) - (x + 1) * TorusElement::generator(th, 0)), 1e-14);
        EXPECT_TRUE(r(0, 1).is_zero());
        EXPECT_LT(max_entry_norm0(r - matrix_adjoint_oracle(rho, Point{x})), 1e-14);
    }
}

TEST(Module, BlockOraclesExactForPolynomials) {
    testgen::Gen g(63);
    for (int trial = 0; trial < 3; ++trial) {
        const Theta th = testgen::theta(g, 2);
        const auto A = random_matrix_symbol(g, th, 2, 2), B = random_matrix_symbol(g, th, 2, 2);
        for (int q = 0; q < 2; ++q) {
            const auto m = testgen::mode(g, 2, 1);
            const auto gns = matrix_adjoint_gns_oracle(A, m, 3);
            EXPECT_LT(max_entry_norm0(matrix_adjoint_expansion(A, to_point(m), 3).value - gns),
                      1e-10 * std::max(1.0, max_entry_norm0(gns)));
        }
        for (int q = 0; q < 5; ++q) {
            const auto m = testgen::mode(g, 2, 5);
            const auto co = matrix_compose_oracle(A, B, m);
            EXPECT_LT(max_entry_norm0(matrix_compose_expansion(A, B, to_point(m), 3).value - co),
                      1e-10 * std::max(1.0, max_entry_norm0(co)));
        }
    }
}

TEST(Module, ComposeOracleEntrywise) {
    // (AB)_{ij} symbol = sum_k sigma(A_ik o B_kj)
    testgen::Gen g(64);
    const Theta th = testgen::theta(g, 1 + 1);
    const auto A = random_matrix_symbol(g, th, 2, 1), B = random_matrix_symbol(g, th, 2, 1);
    const MultiIndex m{2, -1};
    const auto co = matrix_compose_oracle(A, B, m);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto ref = compose_oracle(A(i, 0), B(0, j), m) + compose_oracle(A(i, 1), B(1, j), m);
            EXPECT_LT(norm0(co(i, j) - ref), 1e-12 * std::max(1.0, norm0(ref)));
        }
}

TEST(Module, CompressionKeepsModule) {
    testgen::Gen g(65);
    const Theta th = testgen::theta(g, 2);
    const auto one = TorusElement::one(th), u1 = TorusElement::generator(th, 0);
    const MatrixElement e(th, 2, {0.5 * one, 0.5 * u1, 0.5 * star(u1), 0.5 * one});
    const auto rho = random_matrix_symbol(g, th, 2, 1);
    const auto c = compress(rho, e);
    for (int q = 0; q < 5; ++q) {
        const auto v = project(random_vector(g, th, 2, 2), e);
        const auto w = apply_matrix(c, v, e);
        EXPECT_LT(max_entry_norm0(project(w, e) - w), 1e-10);
    }
    // uncompressed symbols are caught
    const auto v = project(random_vector(g, th, 2, 2), e);
    EXPECT_THROW(apply_matrix(rho, v, e), contract_error);
    EXPECT_THROW(apply_matrix(c, random_vector(g, th, 2, 2), e), contract_error);
}

TEST(Module, EigenbasisOfScalarProjection) {
    const Theta th(2);
    const auto one = TorusElement::one(th);
    const double c = std::cos(0.7), s = std::sin(0.7);
    const Complex v1 = s * std::polar(1.0, 0.3);
    const MatrixElement e(th, 2, {c * c * one, c * std::conj(v1) * one, v1 * c * one, std::norm(v1) * one});
    const auto basis = scalar_idempotent_eigenbasis(e);
    ASSERT_EQ(basis.size(), 1u);
    EXPECT_NEAR(std::abs(module_inner(basis[0], basis[0])), 1.0, 1e-12);
    EXPECT_LT(max_entry_norm0(project(basis[0], e) - basis[0]), 1e-12);
    EXPECT_EQ(scalar_idempotent_eigenbasis(MatrixElement::identity(th, 3)).size(), 3u);
    EXPECT_THROW(scalar_idempotent_eigenbasis(MatrixElement::diagonal(th, {TorusElement::generator(th, 0), one})),
                 contract_error);
}

TEST(Module, BoundednessLambdaDiagonal) {
    Rng rng(3);
    const Theta th = Theta::from_upper(2, {0.2});
    for (int d = 0; d <= 2; ++d) {
        const auto sym = MatrixSymbol::diagonal({lambda_symbol(th, d), lambda_symbol(th, d)}, th);
        const double c = matrix_c_rho(sym, default_symbol_grid(2));
        const auto rep = module_boundedness_check(sym, c, 40, d, rng, 2);
        EXPECT_TRUE(rep.passed()) << d;
        EXPECT_NEAR(rep.find("ratio_vs_sqrt_r_k_rho")->measured, 1.0, 1e-12);
    }
}

TEST(Module, RepairedBoundForRandomSymbols) {
    Rng rng(4);
    testgen::Gen g(66);
    const Theta th = testgen::theta(g, 2);
    const auto sym = random_matrix_symbol(g, th, 2, 1);
    const auto rep = module_boundedness_check(sym, matrix_c_rho(sym, default_symbol_grid(2)), 40, 1.0, rng, 2);
    EXPECT_TRUE(rep.find("ratio_vs_repaired_bound")->passed);
}

TEST(Module, RellichPairs) {
    const Theta th = Theta::from_upper(2, {0.1});
    std::vector<ModuleVector> seq;
    for (int N = 0; N < 40; ++N) {
        const MultiIndex m{N, N % 3}, k{-N, 1};
        seq.push_back(ModuleVector(th, {TorusElement::monomial(th, m, 1.0 / (1 + mode_norm2(m))),
                                        TorusElement::monomial(th, k, 0.5 / (1 + mode_norm2(k)))}));
    }
    const auto r = module_rellich_extract(seq, 2.0, 0.0, 1.0, 0.01);
    ASSERT_TRUE(r.certified);
    for (std::size_t i = 0; i < r.indices.size(); ++i)
        for (std::size_t j = i + 1; j < r.indices.size(); ++j) {
            const auto d = seq[r.indices[i]] - seq[r.indices[j]];
            EXPECT_LE(sobolev_norm2(d[0], 0) + sobolev_norm2(d[1], 0), 0.01);
        }
}
