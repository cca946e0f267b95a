#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "nct/gns.hpp"
#include "nct/symbol.hpp"

namespace nct {

using LinearMap = std::function<TorusElement(const TorusElement &)>;

inline void require_symbol_theta(const Symbol &sym, const TorusElement &a, const char *where) {
    if (!(sym.theta() == a.theta()))
        throw contract_error(std::string(where) + ": symbol and element have different theta");
}

/// P_rho(a) = sum_m rho(m) a_m U^m.
inline TorusElement apply(const Symbol &sym, const TorusElement &a) {
    require_symbol_theta(sym, a, "apply");
    TorusElement out(a.theta());
    for (const auto &t : a.terms()) {
        const TorusElement r = sym.eval(to_point(t.mode));
        out += mul(r, TorusElement::monomial(a.theta(), t.mode, t.coeff));
    }
    return out;
}

/// sigma(m) = op(U^m) (U^m)^*. Recovers rho(m) when op = P_rho.
inline TorusElement symbol_of_operator(const LinearMap &op, const MultiIndex &m, const Theta &theta) {
    const TorusElement u = TorusElement::monomial(theta, m);
    return mul(op(u), star(u));
}

/// Exact adjoint symbol: [sum_m rho_m(xi - m) U^m]^*.
inline TorusElement adjoint_oracle(const Symbol &sym, std::span<const double> xi) {
    const Theta &theta = sym.theta();
    std::vector<Term> shifted;
    Point p(xi.begin(), xi.end());
    for (const auto &m : sym.mode_support(xi)) {
        for (std::size_t j = 0; j < p.size(); ++j)
            p[j] = xi[j] - m[j];
        const Complex c = sym.eval(p).coeff(m);
        if (c != Complex{})
            shifted.push_back({m, c});
    }
    return star(TorusElement(theta, std::move(shifted)));
}

/// The adjoint symbol as a Symbol (sampled through adjoint_oracle).
inline Symbol adjoint_symbol(const Symbol &sym) {
    CallbackSymbol cb;
    cb.theta = sym.theta();
    cb.order = sym.order();
    cb.fn = [sym](std::span<const double> xi) { return adjoint_oracle(sym, xi); };
    if (sym.kind() != SymbolKind::callback || !sym.get_if<CallbackSymbol>()->modes.empty()) {
        for (auto m : sym.mode_support(Point(std::size_t(sym.dim()), 0.0))) {
            for (auto &v : m)
                v = -v;
            cb.modes.push_back(m);
        }
    }
    return cb;
}

/// Symbol of P_phi o P_rho from the operator side: sigma(m) = P_phi(P_rho(U^m)) (U^m)^*.
inline TorusElement compose_oracle(const Symbol &phi, const Symbol &rho, const MultiIndex &m) {
    if (!(phi.theta() == rho.theta()))
        throw contract_error("compose_oracle: theta mismatch");
    return symbol_of_operator([&](const TorusElement &a) { return apply(phi, apply(rho, a)); }, m, phi.theta());
}

/// Exact symbol of P_phi o P_rho at real xi: sum_k rho_k(xi) phi(xi + k) U^k.
inline Symbol composition_symbol(const Symbol &phi, const Symbol &rho) {
    if (!(phi.theta() == rho.theta()))
        throw contract_error("composition_symbol: theta mismatch");
    CallbackSymbol cb;
    cb.theta = phi.theta();
    cb.order = phi.order() + rho.order();
    cb.fn = [phi, rho](std::span<const double> xi) {
        const TorusElement r = rho.eval(xi);
        TorusElement out(rho.theta());
        Point p(xi.begin(), xi.end());
        for (const auto &t : r.terms()) {
            for (std::size_t j = 0; j < p.size(); ++j)
                p[j] = xi[j] + t.mode[j];
            out += mul(phi.eval(p), TorusElement::monomial(rho.theta(), t.mode, t.coeff));
        }
        return out;
    };
    return cb;
}

struct ExpansionResult {
    int N = 0;
    TorusElement value;
    std::vector<TorusElement> terms; ///< terms[L] = contribution of |l| = L
};

/// sum_{|l| < N} (1/l!) d^l delta^l [rho(xi)^*]
inline ExpansionResult adjoint_expansion(const Symbol &sym, std::span<const double> xi, int N) {
    if (N < 1)
        throw contract_error("adjoint_expansion: N must be at least 1");
    const Theta &theta = sym.theta();
    ExpansionResult r{N, TorusElement(theta), {}};
    for (int L = 0; L < N; ++L) {
        TorusElement level(theta);
        for (const auto &l : multi_indices_of_degree(sym.dim(), L))
            level.axpy(1.0 / factorial(l), delta(l, star(sym.deriv(l, xi))));
        r.value += level;
        r.terms.push_back(std::move(level));
    }
    return r;
}

/// sum_{|l| < N} (1/l!) d^l phi(xi) delta^l rho(xi)
inline ExpansionResult compose_expansion(const Symbol &phi, const Symbol &rho, std::span<const double> xi, int N) {
    if (N < 1)
        throw contract_error("compose_expansion: N must be at least 1");
    if (!(phi.theta() == rho.theta()))
        throw contract_error("compose_expansion: theta mismatch");
    const Theta &theta = phi.theta();
    ExpansionResult r{N, TorusElement(theta), {}};
    const MultiIndex zero(std::size_t(phi.dim()), 0);
    const TorusElement rho_xi = rho.eval(xi);
    for (int L = 0; L < N; ++L) {
        TorusElement level(theta);
        for (const auto &l : multi_indices_of_degree(phi.dim(), L)) {
            const TorusElement dr = delta(l, rho_xi);
            if (dr.is_zero())
                continue;
            level.axpy(1.0 / factorial(l), mul(phi.deriv(l, xi), dr));
        }
        r.value += level;
        r.terms.push_back(std::move(level));
    }
    return r;
}

struct TaylorRemainder {
    TorusElement value;
    bool converged = true;
    double discrepancy = 0.0; ///< ||32-node - 20-node||_0
};

namespace detail {

template <unsigned Nodes, class F> TorusElement gauss_unit_interval(const Theta &theta, F &&f) {
    using rule = boost::math::quadrature::gauss<double, Nodes>;
    const auto &x = rule::abscissa();
    const auto &w = rule::weights();
    TorusElement acc(theta);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            acc.axpy(0.5 * w[i], f(0.5));
            continue;
        }
        acc.axpy(0.5 * w[i], f(0.5 * (1.0 + x[i])));
        acc.axpy(0.5 * w[i], f(0.5 * (1.0 - x[i])));
    }
    return acc;
}

} // namespace detail

inline constexpr double kTaylorQuadratureTol = 1e-8;

/// Integral form of the Taylor remainder term for multi-index l, |l| = N1:
/// N1 (y^l / l!) int_0^1 (1-g)^{N1-1} d^l phi(xi + g y) dg.
/// Gauss-Legendre with 32 nodes, cross-checked against 20 nodes.
inline TaylorRemainder taylor_remainder(const Symbol &phi, const MultiIndex &l, std::span<const double> xi,
                                        std::span<const double> y) {
    require_derivative_order(l, std::size_t(phi.dim()), "taylor_remainder");
    const int N1 = total_degree(l);
    if (N1 < 1)
        throw contract_error("taylor_remainder: |l| must be at least 1");
    if (y.size() != xi.size())
        throw contract_error("taylor_remainder: y has wrong dimension");
    const double pre = N1 * power_of(y, l) / factorial(l);
    TaylorRemainder out{TorusElement(phi.theta())};
    if (pre == 0.0)
        return out;
    Point p(xi.size());
    auto integrand = [&](double g) {
        for (std::size_t j = 0; j < p.size(); ++j)
            p[j] = xi[j] + g * y[j];
        return std::pow(1.0 - g, N1 - 1) * phi.deriv(l, p);
    };
    TorusElement fine = detail::gauss_unit_interval<32>(phi.theta(), integrand);
    TorusElement coarse = detail::gauss_unit_interval<20>(phi.theta(), integrand);
    out.discrepancy = std::abs(pre) * norm0(fine - coarse);
    out.converged = out.discrepancy <= kTaylorQuadratureTol;
    out.value = pre * fine;
    return out;
}

/// phi(xi) Taylor-expanded to order N1 with integral remainder; equals phi(xi + y).
inline TorusElement taylor_reconstruction(const Symbol &phi, int N1, std::span<const double> xi,
                                          std::span<const double> y) {
    TorusElement sum(phi.theta());
    for (int L = 0; L < N1; ++L)
        for (const auto &l : multi_indices_of_degree(phi.dim(), L))
            sum.axpy(power_of(y, l) / factorial(l), phi.deriv(l, xi));
    for (const auto &l : multi_indices_of_degree(phi.dim(), N1))
        sum += taylor_remainder(phi, l, xi, y).value;
    return sum;
}

inline constexpr double kExactResidual = 1e-13;

struct SlopeFit {
    bool exact = false; ///< every residual below kExactResidual; slope not defined
    double slope = 0.0;
    std::vector<double> radii;
    std::vector<double> residuals;
};

/// Least-squares slope of log(y) against log(1 + x).
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (y[i] > 0.0) {
            lx.push_back(std::log1p(x[i]));
            ly.push_back(std::log(y[i]));
        }
    if (lx.size() < 2)
        return std::numeric_limits<double>::quiet_NaN();
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

/// Integer points at sup-radius R: the 2n axis points and, for n >= 2, the
/// points with every coordinate +-round(R / sqrt(n)).
inline std::vector<MultiIndex> integer_shell(int n, double R) {
    std::vector<MultiIndex> pts;
    const int r = int(std::lround(R));
    for (int j = 0; j < n; ++j)
        for (int sgn : {1, -1}) {
            MultiIndex m(std::size_t(n), 0);
            m[std::size_t(j)] = sgn * r;
            pts.push_back(m);
        }
    if (n >= 2) {
        const int d = int(std::lround(R / std::sqrt(double(n))));
        for (int mask = 0; mask < (1 << n); ++mask) {
            MultiIndex m(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                m[std::size_t(j)] = (mask >> j) & 1 ? -d : d;
            pts.push_back(m);
        }
    }
    return pts;
}

enum class ExpansionKind { adjoint, compose };

namespace detail {

template <class Residual> SlopeFit fit_residuals(int n, const std::vector<double> &radii, Residual &&residual) {
    if (radii.size() < 4)
        throw contract_error("remainder_order_fit: need at least 4 radii");
    SlopeFit fit;
    fit.radii = radii;
    bool all_tiny = true;
    for (double R : radii) {
        double worst = 0.0;
        for (const auto &m : integer_shell(n, R))
            worst = std::max(worst, residual(m));
        fit.residuals.push_back(worst);
        if (worst >= kExactResidual)
            all_tiny = false;
    }
    fit.exact = all_tiny;
    if (!fit.exact)
        fit.slope = loglog_slope(radii, fit.residuals);
    return fit;
}

} // namespace detail

/// Measured decay of ||expansion - oracle||_0 at integer points against
/// log(1 + R). For kind == adjoint, `rho` is ignored.
inline SlopeFit remainder_order_fit(ExpansionKind kind, const Symbol &phi, const Symbol &rho, int N,
                                    const std::vector<double> &radii) {
    if (kind == ExpansionKind::adjoint)
        return detail::fit_residuals(phi.dim(), radii, [&](const MultiIndex &m) {
            const Point xi = to_point(m);
            return norm0(adjoint_expansion(phi, xi, N).value - adjoint_oracle(phi, xi));
        });
    return detail::fit_residuals(phi.dim(), radii, [&](const MultiIndex &m) {
        const Point xi = to_point(m);
        return norm0(compose_expansion(phi, rho, xi, N).value - compose_oracle(phi, rho, m));
    });
}

inline SlopeFit remainder_order_fit(const Symbol &sym, int N, const std::vector<double> &radii) {
    return remainder_order_fit(ExpansionKind::adjoint, sym, sym, N, radii);
}

/// Adjoint symbol at an integer point from the conjugate transpose of the
/// truncated matrix of P_rho. Exact when m lies at least the symbol's
/// support radius inside the box.
inline TorusElement adjoint_gns_oracle(const Symbol &sym, const MultiIndex &m, int box) {
    const Theta &theta = sym.theta();
    const Eigen::MatrixXcd M =
        operator_matrix([&](const TorusElement &a) { return apply(sym, a); }, theta, box).adjoint();
    const ModeBox basis(theta.dim(), box);
    if (!basis.contains(m))
        throw contract_error("adjoint_gns_oracle: mode outside the box");
    const TorusElement image = element_from_column(M.col(Eigen::Index(basis.index(m))), theta, box);
    return mul(image, star(TorusElement::monomial(theta, m)));
}

} // namespace nct
