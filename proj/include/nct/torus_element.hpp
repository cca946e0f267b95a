#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nct/theta.hpp"

namespace nct {

/// Coefficients at or below this magnitude are dropped after arithmetic.
inline constexpr double kPruneThreshold = 1e-15;

struct Term {
    MultiIndex mode;
    Complex coeff;
};

/// Finitely supported element sum_m a_m U^m of the smooth noncommutative
/// torus. Terms are kept sorted by mode (lexicographic), free of duplicates
/// and of coefficients below kPruneThreshold.
class TorusElement {
  public:
    explicit TorusElement(Theta theta) : theta_(std::move(theta)) {}

    TorusElement(Theta theta, std::vector<Term> terms) : theta_(std::move(theta)), terms_(std::move(terms)) {
        for (const auto &t : terms_)
            if (t.mode.size() != std::size_t(theta_.dim()))
                throw contract_error("TorusElement: mode length does not match theta");
        canonicalize();
    }

    static TorusElement zero(const Theta &theta) { return TorusElement(theta); }
    static TorusElement one(const Theta &theta) { return monomial(theta, MultiIndex(theta.dim(), 0)); }

    static TorusElement monomial(const Theta &theta, MultiIndex mode, Complex c = 1.0) {
        std::vector<Term> t;
        t.push_back({std::move(mode), c});
        return TorusElement(theta, std::move(t));
    }

    /// U_j^power (0-based j).
    static TorusElement generator(const Theta &theta, int j, int power = 1) {
        if (j < 0 || j >= theta.dim())
            throw contract_error("TorusElement::generator: index out of range");
        MultiIndex m(theta.dim(), 0);
        m[j] = power;
        return monomial(theta, std::move(m));
    }

    const Theta &theta() const noexcept { return theta_; }
    int dim() const noexcept { return theta_.dim(); }
    std::span<const Term> terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    Complex coeff(const MultiIndex &m) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const Term &t, const MultiIndex &key) { return t.mode < key; });
        return (it != terms_.end() && it->mode == m) ? it->coeff : Complex{};
    }

    /// max_{m in support} max_j |m_j|; 0 for the zero element.
    int support_radius() const noexcept {
        int r = 0;
        for (const auto &t : terms_)
            for (int v : t.mode)
                r = std::max(r, std::abs(v));
        return r;
    }

    TorusElement &operator+=(const TorusElement &o) { return axpy(1.0, o); }
    TorusElement &operator-=(const TorusElement &o) { return axpy(-1.0, o); }

    TorusElement &operator*=(Complex c) {
        for (auto &t : terms_)
            t.coeff *= c;
        prune();
        return *this;
    }

    /// this += c * o, merging the two sorted term lists.
    TorusElement &axpy(Complex c, const TorusElement &o) {
        require_same_theta(o, "add");
        std::vector<Term> out;
        out.reserve(terms_.size() + o.terms_.size());
        auto a = terms_.begin();
        auto b = o.terms_.begin();
        while (a != terms_.end() || b != o.terms_.end()) {
            if (b == o.terms_.end() || (a != terms_.end() && a->mode < b->mode)) {
                out.push_back(std::move(*a++));
            } else if (a == terms_.end() || b->mode < a->mode) {
                out.push_back({b->mode, c * b->coeff});
                ++b;
            } else {
                Complex v = a->coeff + c * b->coeff;
                if (std::abs(v) > kPruneThreshold)
                    out.push_back({std::move(a->mode), v});
                ++a;
                ++b;
            }
        }
        terms_ = std::move(out);
        prune();
        return *this;
    }

    friend TorusElement operator+(TorusElement a, const TorusElement &b) { return a += b; }
    friend TorusElement operator-(TorusElement a, const TorusElement &b) { return a -= b; }
    friend TorusElement operator-(TorusElement a) { return a *= -1.0; }
    friend TorusElement operator*(Complex c, TorusElement a) { return a *= c; }
    friend TorusElement operator*(TorusElement a, Complex c) { return a *= c; }

    void require_same_theta(const TorusElement &o, const char *where) const {
        if (!(theta_ == o.theta_))
            throw contract_error(std::string(where) + ": theta mismatch");
    }

  private:
    void canonicalize() {
        std::sort(terms_.begin(), terms_.end(), [](const Term &x, const Term &y) { return x.mode < y.mode; });
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (auto &t : terms_) {
            if (!out.empty() && out.back().mode == t.mode)
                out.back().coeff += t.coeff;
            else
                out.push_back(std::move(t));
        }
        terms_ = std::move(out);
        prune();
    }

    void prune() {
        std::erase_if(terms_, [](const Term &t) { return std::abs(t.coeff) <= kPruneThreshold; });
    }

    Theta theta_;
    std::vector<Term> terms_;
};

namespace detail {

// v_j(m) = sum_{l>j} theta_{j,l} m_l, so that the cocycle exponent is k . v(m).
inline std::vector<double> cocycle_row(const MultiIndex &m, const Theta &theta) {
    const int n = theta.dim();
    std::vector<double> v(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int l = j + 1; l < n; ++l)
            v[j] += theta(j, l) * m[l];
    return v;
}

} // namespace detail

/// Twisted convolution: (ab)_p = sum_{m+k=p} a_m b_k w(m,k).
inline TorusElement mul(const TorusElement &a, const TorusElement &b) {
    a.require_same_theta(b, "mul");
    const Theta &theta = a.theta();
    const int n = theta.dim();
    if (a.is_zero() || b.is_zero())
        return TorusElement(theta);

    MultiIndex lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        int alo = a.terms()[0].mode[j], ahi = alo, blo = b.terms()[0].mode[j], bhi = blo;
        for (const auto &t : a.terms()) {
            alo = std::min(alo, t.mode[j]);
            ahi = std::max(ahi, t.mode[j]);
        }
        for (const auto &t : b.terms()) {
            blo = std::min(blo, t.mode[j]);
            bhi = std::max(bhi, t.mode[j]);
        }
        lo[j] = alo + blo;
        hi[j] = ahi + bhi;
    }
    double volume = 1.0;
    for (int j = 0; j < n; ++j)
        volume *= double(hi[j] - lo[j] + 1);

    std::vector<std::vector<double>> rows;
    rows.reserve(a.size());
    for (const auto &t : a.terms())
        rows.push_back(detail::cocycle_row(t.mode, theta));

    auto pair_value = [&](std::size_t ia, const Term &ta, const Term &tb) {
        double x = 0.0;
        for (int j = 0; j < n; ++j)
            x += tb.mode[j] * rows[ia][j];
        return ta.coeff * tb.coeff * unit_phase(x);
    };

    std::vector<Term> out;
    const double pairs = double(a.size()) * double(b.size());
    if (volume <= std::max(4096.0, 8.0 * pairs)) {
        std::vector<long> stride(n);
        long s = 1;
        for (int j = n - 1; j >= 0; --j) {
            stride[j] = s;
            s *= (hi[j] - lo[j] + 1);
        }
        std::vector<Complex> acc(std::size_t(s), Complex{});
        for (std::size_t ia = 0; ia < a.size(); ++ia) {
            const auto &ta = a.terms()[ia];
            for (const auto &tb : b.terms()) {
                long idx = 0;
                for (int j = 0; j < n; ++j)
                    idx += (ta.mode[j] + tb.mode[j] - lo[j]) * stride[j];
                acc[std::size_t(idx)] += pair_value(ia, ta, tb);
            }
        }
        // flat index order is lexicographic in the mode
        MultiIndex m(n);
        for (long idx = 0; idx < s; ++idx) {
            if (std::abs(acc[std::size_t(idx)]) <= kPruneThreshold)
                continue;
            long r = idx;
            for (int j = 0; j < n; ++j) {
                m[j] = int(r / stride[j]) + lo[j];
                r %= stride[j];
            }
            out.push_back({m, acc[std::size_t(idx)]});
        }
    } else {
        std::map<MultiIndex, Complex> acc;
        MultiIndex p(n);
        for (std::size_t ia = 0; ia < a.size(); ++ia) {
            const auto &ta = a.terms()[ia];
            for (const auto &tb : b.terms()) {
                for (int j = 0; j < n; ++j)
                    p[j] = ta.mode[j] + tb.mode[j];
                acc[p] += pair_value(ia, ta, tb);
            }
        }
        for (auto &[m, c] : acc)
            out.push_back({m, c});
    }
    return TorusElement(theta, std::move(out));
}

inline TorusElement operator*(const TorusElement &a, const TorusElement &b) { return mul(a, b); }

/// Involution. (U^m)^* = conj(w(m,-m)) U^{-m}, hence
/// (a^*)_{-m} = conj(a_m) conj(w(m,-m)).
inline TorusElement star(const TorusElement &a) {
    std::vector<Term> out;
    out.reserve(a.size());
    for (const auto &t : a.terms()) {
        MultiIndex neg(t.mode.size());
        for (std::size_t j = 0; j < neg.size(); ++j)
            neg[j] = -t.mode[j];
        const Complex w = unit_phase(phase_exponent(t.mode, neg, a.theta()));
        out.push_back({std::move(neg), std::conj(t.coeff) * std::conj(w)});
    }
    return TorusElement(a.theta(), std::move(out));
}

/// delta^l a: coefficientwise multiplication by m^l = prod_j m_j^{l_j}.
inline TorusElement delta(const MultiIndex &l, const TorusElement &a) {
    require_derivative_order(l, std::size_t(a.dim()), "delta");
    std::vector<Term> out;
    out.reserve(a.size());
    for (const auto &t : a.terms()) {
        double f = 1.0;
        for (std::size_t j = 0; j < l.size(); ++j)
            for (int p = 0; p < l[j]; ++p)
                f *= t.mode[j];
        if (f != 0.0)
            out.push_back({t.mode, f * t.coeff});
    }
    return TorusElement(a.theta(), std::move(out));
}

/// Single derivation delta_j (0-based).
inline TorusElement delta_j(int j, const TorusElement &a) {
    MultiIndex l(a.dim(), 0);
    l.at(std::size_t(j)) = 1;
    return delta(l, a);
}

/// Torus action alpha_s: U^m -> e^{i s.m} U^m.
inline TorusElement alpha(std::span<const double> s, const TorusElement &a) {
    if (s.size() != std::size_t(a.dim()))
        throw contract_error("alpha: parameter length does not match dimension");
    std::vector<Term> out;
    out.reserve(a.size());
    for (const auto &t : a.terms()) {
        double x = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            x += s[j] * t.mode[j];
        out.push_back({t.mode, t.coeff * std::polar(1.0, x)});
    }
    return TorusElement(a.theta(), std::move(out));
}

/// Canonical trace: the coefficient of U^0.
inline Complex trace(const TorusElement &a) { return a.coeff(MultiIndex(a.dim(), 0)); }

/// <a,b> = tau(b^* a) = sum_m conj(b_m) a_m, computed coefficientwise.
inline Complex inner(const TorusElement &a, const TorusElement &b) {
    a.require_same_theta(b, "inner");
    Complex s{};
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    while (ia != a.terms().end() && ib != b.terms().end()) {
        if (ia->mode < ib->mode)
            ++ia;
        else if (ib->mode < ia->mode)
            ++ib;
        else {
            s += std::conj(ib->coeff) * ia->coeff;
            ++ia;
            ++ib;
        }
    }
    return s;
}

/// ||a||_0 = sqrt(<a,a>).
inline double norm0(const TorusElement &a) {
    double s = 0.0;
    for (const auto &t : a.terms())
        s += std::norm(t.coeff);
    return std::sqrt(s);
}

/// sum_m |a_m|, an upper bound for the C* norm.
inline double l1_norm(const TorusElement &a) {
    double s = 0.0;
    for (const auto &t : a.terms())
        s += std::abs(t.coeff);
    return s;
}

inline double max_abs_coeff(const TorusElement &a) {
    double s = 0.0;
    for (const auto &t : a.terms())
        s = std::max(s, std::abs(t.coeff));
    return s;
}

inline std::vector<double> to_point(const MultiIndex &m) { return std::vector<double>(m.begin(), m.end()); }

} // namespace nct
