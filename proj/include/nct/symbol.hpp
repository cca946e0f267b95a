#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nct/report.hpp"
#include "nct/torus_element.hpp"

namespace nct {

/// Requested derivative order exceeds what a finite-difference symbol supports.
class unsupported_order : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

inline double euclidean_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s);
}

inline double power_of(std::span<const double> xi, const MultiIndex &alpha) {
    double p = 1.0;
    for (std::size_t j = 0; j < alpha.size(); ++j)
        for (int e = 0; e < alpha[j]; ++e)
            p *= xi[j];
    return p;
}

/// Real polynomial in xi, exponent -> coefficient.
class RealPolynomial {
  public:
    RealPolynomial() = default;
    explicit RealPolynomial(int n, double constant = 0.0) : n_(n) {
        if (constant != 0.0)
            terms_[MultiIndex(n, 0)] = constant;
    }

    double eval(std::span<const double> xi) const {
        double s = 0.0;
        for (const auto &[e, c] : terms_)
            s += c * power_of(xi, e);
        return s;
    }

    RealPolynomial derivative(int j) const {
        RealPolynomial out(n_);
        for (const auto &[e, c] : terms_) {
            if (e[j] == 0)
                continue;
            MultiIndex f = e;
            --f[j];
            out.add(f, c * e[j]);
        }
        return out;
    }

    /// c * xi_j * p
    RealPolynomial times_coordinate(int j, double c) const {
        RealPolynomial out(n_);
        if (c == 0.0)
            return out;
        for (const auto &[e, v] : terms_) {
            MultiIndex f = e;
            ++f[j];
            out.add(f, v * c);
        }
        return out;
    }

    RealPolynomial &operator+=(const RealPolynomial &o) {
        for (const auto &[e, c] : o.terms_)
            add(e, c);
        return *this;
    }

    void add(const MultiIndex &e, double c) {
        if (c == 0.0)
            return;
        auto &slot = terms_[e];
        slot += c;
        if (slot == 0.0)
            terms_.erase(e);
    }

    bool empty() const noexcept { return terms_.empty(); }

  private:
    int n_ = 0;
    std::map<MultiIndex, double> terms_;
};

/// rho(xi) = sum_alpha xi^alpha c_alpha with TorusElement coefficients.
/// Derivatives are exact.
class PolynomialSymbol {
  public:
    explicit PolynomialSymbol(Theta theta) : theta_(std::move(theta)) {}

    PolynomialSymbol(Theta theta, std::map<MultiIndex, TorusElement> terms, std::optional<double> order = {})
        : theta_(std::move(theta)), declared_order_(order) {
        for (auto &[e, c] : terms)
            add_term(e, c);
    }

    void add_term(const MultiIndex &exponent, const TorusElement &coeff) {
        require_derivative_order(exponent, std::size_t(theta_.dim()), "PolynomialSymbol");
        if (!(coeff.theta() == theta_))
            throw contract_error("PolynomialSymbol: coefficient theta mismatch");
        auto it = terms_.find(exponent);
        if (it == terms_.end())
            it = terms_.emplace(exponent, TorusElement(theta_)).first;
        it->second += coeff;
        if (it->second.is_zero())
            terms_.erase(it);
    }

    void set_order(double d) { declared_order_ = d; }

    int degree() const {
        int d = 0;
        for (const auto &[e, c] : terms_)
            d = std::max(d, total_degree(e));
        return d;
    }

    double order() const { return declared_order_ ? *declared_order_ : double(degree()); }
    bool has_declared_order() const { return declared_order_.has_value(); }
    const Theta &theta() const noexcept { return theta_; }
    const std::map<MultiIndex, TorusElement> &terms() const noexcept { return terms_; }

    TorusElement deriv(const MultiIndex &l, std::span<const double> xi) const {
        TorusElement out(theta_);
        for (const auto &[alpha, c] : terms_) {
            bool ok = true;
            double f = 1.0;
            MultiIndex rest(alpha.size());
            for (std::size_t j = 0; j < alpha.size() && ok; ++j) {
                if (alpha[j] < l[j]) {
                    ok = false;
                    break;
                }
                for (int p = 0; p < l[j]; ++p)
                    f *= alpha[j] - p;
                rest[j] = alpha[j] - l[j];
            }
            if (!ok)
                continue;
            const double scale = f * power_of(xi, rest);
            if (scale != 0.0)
                out.axpy(scale, c);
        }
        return out;
    }

    std::vector<MultiIndex> mode_support() const {
        std::set<MultiIndex> modes;
        for (const auto &[e, c] : terms_)
            for (const auto &t : c.terms())
                modes.insert(t.mode);
        return {modes.begin(), modes.end()};
    }

  private:
    Theta theta_;
    std::map<MultiIndex, TorusElement> terms_;
    std::optional<double> declared_order_;
};

/// rho(xi) = (1 + |xi|^2)^{s/2} c. With c = 1 (the default) this is the
/// central weight lambda^s. Derivatives use the closed-form recurrence
/// d_j [p(xi) Q^u] = (d_j p) Q^u + 2u xi_j p Q^{u-1}, Q = 1 + |xi|^2.
class LambdaSymbol {
  public:
    LambdaSymbol(Theta theta, double s) : theta_(theta), s_(s), coeff_(TorusElement::one(theta)) {}
    LambdaSymbol(Theta theta, double s, TorusElement coeff) : theta_(std::move(theta)), s_(s), coeff_(std::move(coeff)) {
        if (!(coeff_.theta() == theta_))
            throw contract_error("LambdaSymbol: coefficient theta mismatch");
    }

    double s() const noexcept { return s_; }
    double order() const noexcept { return s_; }
    const Theta &theta() const noexcept { return theta_; }
    const TorusElement &coeff() const noexcept { return coeff_; }

    /// d^l (1+|xi|^2)^{s/2} as a real scalar.
    double scalar_deriv(const MultiIndex &l, std::span<const double> xi) const {
        const int n = theta_.dim();
        const double t = 0.5 * s_;
        // expansion sum_k p_k(xi) Q^{t-k}
        std::vector<RealPolynomial> parts{RealPolynomial(n, 1.0)};
        for (int j = 0; j < n; ++j) {
            for (int rep = 0; rep < l[j]; ++rep) {
                std::vector<RealPolynomial> next(parts.size() + 1, RealPolynomial(n));
                for (std::size_t k = 0; k < parts.size(); ++k) {
                    if (parts[k].empty())
                        continue;
                    next[k] += parts[k].derivative(j);
                    next[k + 1] += parts[k].times_coordinate(j, 2.0 * (t - double(k)));
                }
                parts = std::move(next);
            }
        }
        double q = 1.0;
        for (double v : xi)
            q += v * v;
        double s = 0.0;
        for (std::size_t k = 0; k < parts.size(); ++k)
            if (!parts[k].empty())
                s += parts[k].eval(xi) * std::pow(q, t - double(k));
        return s;
    }

    TorusElement deriv(const MultiIndex &l, std::span<const double> xi) const {
        return scalar_deriv(l, xi) * coeff_;
    }

    std::vector<MultiIndex> mode_support() const {
        std::vector<MultiIndex> m;
        for (const auto &t : coeff_.terms())
            m.push_back(t.mode);
        return m;
    }

  private:
    Theta theta_;
    double s_;
    TorusElement coeff_;
};

/// Symbol given by a user function. Derivatives come from `exact_deriv` when
/// provided, otherwise from tensor-product central differences with one
/// Richardson step (h and h/2), h = fd_step * (1 + |xi|); accuracy O(h^4).
struct CallbackSymbol {
    Theta theta;
    double order = 0.0;
    std::function<TorusElement(std::span<const double>)> fn;
    std::function<TorusElement(const MultiIndex &, std::span<const double>)> exact_deriv;
    std::vector<MultiIndex> modes; ///< optional support hint for shifted resampling
    int max_fd_order = 4;
    double fd_step = 1e-3;

    TorusElement deriv(const MultiIndex &l, std::span<const double> xi) const {
        if (total_degree(l) == 0)
            return fn(xi);
        if (exact_deriv)
            return exact_deriv(l, xi);
        if (total_degree(l) > max_fd_order)
            throw unsupported_order("CallbackSymbol: derivative order " + std::to_string(total_degree(l)) +
                                    " exceeds finite-difference limit " + std::to_string(max_fd_order));
        const double h = fd_step * (1.0 + euclidean_norm(xi));
        TorusElement coarse = central_difference(l, xi, h);
        TorusElement fine = central_difference(l, xi, 0.5 * h);
        return (4.0 / 3.0) * fine - (1.0 / 3.0) * coarse;
    }

    std::vector<MultiIndex> mode_support(std::span<const double> xi) const {
        if (!modes.empty())
            return modes;
        std::vector<MultiIndex> m;
        for (const auto &t : fn(xi).terms())
            m.push_back(t.mode);
        return m;
    }

  private:
    // prod_j delta_h^{l_j} / h^{|l|}, with delta_h^k f(x) = sum_i (-1)^i C(k,i) f(x + (k/2 - i) h)
    TorusElement central_difference(const MultiIndex &l, std::span<const double> xi, double h) const {
        const std::size_t n = xi.size();
        std::vector<int> idx(n, 0);
        TorusElement acc(theta);
        Point x(xi.begin(), xi.end());
        auto binom = [](int k, int i) {
            double b = 1.0;
            for (int q = 1; q <= i; ++q)
                b = b * (k - i + q) / q;
            return b;
        };
        while (true) {
            double w = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                const int k = l[j];
                const int i = idx[j];
                x[j] = xi[j] + (0.5 * k - i) * h;
                w *= ((i % 2) ? -1.0 : 1.0) * binom(k, i);
            }
            acc.axpy(w, fn(x));
            std::size_t j = 0;
            while (j < n && idx[j] == l[j]) {
                idx[j] = 0;
                ++j;
            }
            if (j == n)
                break;
            ++idx[j];
        }
        return std::pow(h, -double(total_degree(l))) * acc;
    }
};

enum class SymbolKind { polynomial, lambda, callback };

inline const char *to_string(SymbolKind k) {
    switch (k) {
    case SymbolKind::polynomial:
        return "polynomial";
    case SymbolKind::lambda:
        return "lambda";
    case SymbolKind::callback:
        return "callback";
    }
    return "?";
}

/// Value-semantic symbol: evaluable map xi -> TorusElement with a declared
/// order and a derivative oracle.
class Symbol {
  public:
    Symbol(PolynomialSymbol p) : impl_(std::move(p)) {}
    Symbol(LambdaSymbol l) : impl_(std::move(l)) {}
    Symbol(CallbackSymbol c) : impl_(std::move(c)) {}

    SymbolKind kind() const noexcept { return SymbolKind(impl_.index()); }

    double order() const {
        return std::visit(
            [](const auto &s) {
                if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CallbackSymbol>)
                    return s.order;
                else
                    return double(s.order());
            },
            impl_);
    }

    const Theta &theta() const {
        return std::visit([](const auto &s) -> const Theta & { return theta_of(s); }, impl_);
    }

    int dim() const { return theta().dim(); }

    TorusElement eval(std::span<const double> xi) const { return deriv(MultiIndex(std::size_t(dim()), 0), xi); }

    /// d^l rho(xi)
    TorusElement deriv(const MultiIndex &l, std::span<const double> xi) const {
        require_derivative_order(l, std::size_t(dim()), "Symbol::deriv");
        if (xi.size() != std::size_t(dim()))
            throw contract_error("Symbol: point has wrong dimension");
        return std::visit([&](const auto &s) { return s.deriv(l, xi); }, impl_);
    }

    /// Modes that may carry nonzero coefficients near xi.
    std::vector<MultiIndex> mode_support(std::span<const double> xi) const {
        if (auto *c = std::get_if<CallbackSymbol>(&impl_))
            return c->mode_support(xi);
        if (auto *p = std::get_if<PolynomialSymbol>(&impl_))
            return p->mode_support();
        return std::get<LambdaSymbol>(impl_).mode_support();
    }

    template <class T> const T *get_if() const noexcept { return std::get_if<T>(&impl_); }

  private:
    static const Theta &theta_of(const PolynomialSymbol &s) { return s.theta(); }
    static const Theta &theta_of(const LambdaSymbol &s) { return s.theta(); }
    static const Theta &theta_of(const CallbackSymbol &s) { return s.theta; }

    std::variant<PolynomialSymbol, LambdaSymbol, CallbackSymbol> impl_;
};

inline Symbol lambda_symbol(const Theta &theta, double s) { return LambdaSymbol(theta, s); }

/// Constant symbol rho(xi) = c.
inline Symbol constant_symbol(const TorusElement &c) {
    PolynomialSymbol p(c.theta());
    p.add_term(MultiIndex(c.dim(), 0), c);
    return p;
}

/// Sample points for order verification: the origin, the integer cube
/// {-2..2}^n (n <= 3), and at every radius the axis points, the diagonal
/// points and `directions` seeded random directions.
inline std::vector<Point> default_symbol_grid(int n, const std::vector<double> &radii = {1, 2, 4, 8, 16, 32},
                                              std::uint64_t seed = 0, int directions = 8) {
    std::vector<Point> grid;
    grid.emplace_back(std::size_t(n), 0.0);
    if (n <= 3)
        for (const auto &m : box_modes(n, 2))
            if (total_degree(m) != 0 || std::any_of(m.begin(), m.end(), [](int v) { return v != 0; }))
                grid.push_back(to_point(m));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Point> dirs;
    for (int j = 0; j < n; ++j)
        for (double sgn : {1.0, -1.0}) {
            Point d(std::size_t(n), 0.0);
            d[std::size_t(j)] = sgn;
            dirs.push_back(d);
        }
    if (n > 1)
        for (int mask = 0; mask < (1 << n); ++mask) {
            Point d(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                d[std::size_t(j)] = ((mask >> j) & 1 ? -1.0 : 1.0) / std::sqrt(double(n));
            dirs.push_back(d);
        }
    for (int k = 0; k < directions; ++k) {
        Point d(static_cast<std::size_t>(n));
        for (auto &v : d)
            v = normal(rng);
        const double r = euclidean_norm(d);
        for (auto &v : d)
            v /= r;
        dirs.push_back(d);
    }
    for (double R : radii)
        for (const auto &d : dirs) {
            Point p(d);
            for (auto &v : p)
                v *= R;
            grid.push_back(p);
        }
    return grid;
}

struct OrderEstimate {
    double c_rho = 0.0;        ///< max ratio over grid and (i, j)
    double growth_slope = 0.0; ///< log-log slope of the running maximum, outer shells
    bool finite = true;
    std::vector<double> shell_radius;
    std::vector<double> shell_max; ///< running maximum up to each shell, weight (1+|xi|^2)^{(d-|j|)/2}
};

/// Measures C_rho = max ||delta^i d^j rho(xi)||_0 / (1+|xi|)^{d-|j|} over the
/// grid and all |i| <= max_i, |j| <= max_j. The grid is split into radius
/// deciles; the growth slope is the least-squares slope of log(running max)
/// against log(1+radius) over the outer half of the deciles.
inline OrderEstimate estimate_order_constant(const Symbol &sym, const std::vector<Point> &grid, int max_i, int max_j) {
    const int n = sym.dim();
    const double d = sym.order();
    const auto is = multi_indices_up_to(n, max_i);
    const auto js = multi_indices_up_to(n, max_j);
    std::vector<std::pair<double, double>> per_point; // (|xi|, max ratio)
    OrderEstimate est;
    for (const auto &xi : grid) {
        const double r = euclidean_norm(xi);
        double worst = 0.0, trend = 0.0;
        for (const auto &j : js) {
            const TorusElement dj = sym.deriv(j, xi);
            const double weight = std::pow(1.0 + r, d - total_degree(j));
            // equivalent weight (within 2^{|d-|j||/2}) without the (r/(1+r))^k bias in the trend
            const double smooth = std::pow(1.0 + r * r, 0.5 * (d - total_degree(j)));
            for (const auto &i : is) {
                const double nv = norm0(delta(i, dj));
                const double ratio = nv / weight;
                if (!std::isfinite(ratio))
                    est.finite = false;
                worst = std::max(worst, ratio);
                trend = std::max(trend, nv / smooth);
            }
        }
        per_point.emplace_back(r, trend);
        est.c_rho = std::max(est.c_rho, worst);
    }
    std::stable_sort(per_point.begin(), per_point.end());
    const std::size_t groups = std::min<std::size_t>(10, per_point.size());
    double running = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t begin = g * per_point.size() / groups;
        const std::size_t end = (g + 1) * per_point.size() / groups;
        double rmax = 0.0;
        for (std::size_t q = begin; q < end; ++q) {
            running = std::max(running, per_point[q].second);
            rmax = std::max(rmax, per_point[q].first);
        }
        est.shell_radius.push_back(rmax);
        est.shell_max.push_back(running);
    }
    std::vector<double> xs, ys;
    for (std::size_t g = groups / 2; g < groups; ++g)
        if (est.shell_max[g] > 0.0) {
            xs.push_back(std::log1p(est.shell_radius[g]));
            ys.push_back(std::log(est.shell_max[g]));
        }
    if (xs.size() >= 2) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t q = 0; q < xs.size(); ++q) {
            sxy += (xs[q] - mx) * (ys[q] - my);
            sxx += (xs[q] - mx) * (xs[q] - mx);
        }
        est.growth_slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    return est;
}

inline constexpr double kOrderSlopeThreshold = 0.1;

/// Symbol-order verification report. Check "growth_slope" carries the
/// measured C_rho in its details.
inline VerificationReport verify_order(const Symbol &sym, const std::vector<Point> &grid, int max_i, int max_j) {
    VerificationReport rep;
    rep.suite = "symbol-order";
    rep.parameters = {{"kind", to_string(sym.kind())}, {"order", sym.order()}, {"max_i", max_i},
                      {"max_j", max_j},               {"grid_size", grid.size()}};
    if (grid.empty())
        throw contract_error("verify_order: empty grid");
    const OrderEstimate est = estimate_order_constant(sym, grid, max_i, max_j);
    rep.add_flag("finite", est.finite && std::isfinite(est.c_rho));
    rep.add_check("growth_slope", est.growth_slope, kOrderSlopeThreshold,
                  {{"C_rho", est.c_rho}, {"shell_radius", est.shell_radius}, {"shell_max", est.shell_max}});
    return rep;
}

inline double measured_c_rho(const VerificationReport &order_report) {
    const Check *c = order_report.find("growth_slope");
    if (!c)
        throw contract_error("measured_c_rho: not an order report");
    return c->details.at("C_rho").get<double>();
}

} // namespace nct
