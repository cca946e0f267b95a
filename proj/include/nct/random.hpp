#pragma once

#include <cstdint>
#include <random>

#include "nct/symbol.hpp"

namespace nct {

using Rng = std::mt19937_64;

/// Skew-symmetric theta with upper entries uniform in [0, 1).
inline Theta random_theta(Rng &rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> upper(std::size_t(n) * (n - 1) / 2);
    for (auto &v : upper)
        v = u(rng);
    return Theta::from_upper(n, upper);
}

inline Complex complex_normal(Rng &rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    const double re = g(rng);
    const double im = g(rng);
    return {re, im};
}

/// Complex-normal coefficients on every mode with |m_j| <= box, then pruned.
inline TorusElement random_element(Rng &rng, const Theta &theta, int box) {
    std::vector<Term> terms;
    for (auto &m : box_modes(theta.dim(), box))
        terms.push_back({std::move(m), complex_normal(rng)});
    return TorusElement(theta, std::move(terms));
}

/// Like random_element, but each mode is kept with probability `density`.
inline TorusElement random_sparse_element(Rng &rng, const Theta &theta, int box, double density) {
    std::bernoulli_distribution keep(density);
    std::vector<Term> terms;
    for (auto &m : box_modes(theta.dim(), box)) {
        const Complex c = complex_normal(rng);
        if (keep(rng))
            terms.push_back({std::move(m), c});
    }
    return TorusElement(theta, std::move(terms));
}

inline MultiIndex random_mode(Rng &rng, int n, int box) {
    std::uniform_int_distribution<int> u(-box, box);
    MultiIndex m(static_cast<std::size_t>(n));
    for (auto &v : m)
        v = u(rng);
    return m;
}

/// Polynomial symbol of exact total degree `degree` whose coefficients are
/// random elements on the box |m_j| <= coeff_box. Every exponent of the top
/// degree is present; lower exponents are kept with probability 1/2.
inline PolynomialSymbol random_polynomial_symbol(Rng &rng, const Theta &theta, int degree, int coeff_box = 1) {
    PolynomialSymbol p(theta);
    std::bernoulli_distribution keep(0.5);
    for (const auto &e : multi_indices_up_to(theta.dim(), degree)) {
        const bool top = total_degree(e) == degree;
        TorusElement c = random_element(rng, theta, coeff_box);
        if (top || keep(rng))
            p.add_term(e, c);
    }
    return p;
}

} // namespace nct
