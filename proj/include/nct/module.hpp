#pragma once

#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nct/calculus.hpp"
#include "nct/gns.hpp"
#include "nct/sobolev.hpp"

namespace nct {

/// r x r matrix over the algebra, row-major.
class MatrixElement {
  public:
    MatrixElement(Theta theta, int r) : theta_(std::move(theta)), r_(r) {
        if (r < 1)
            throw contract_error("MatrixElement: size must be positive");
        entries_.assign(std::size_t(r) * r, TorusElement(theta_));
    }

    MatrixElement(Theta theta, int r, std::vector<TorusElement> entries)
        : theta_(std::move(theta)), r_(r), entries_(std::move(entries)) {
        if (r < 1 || entries_.size() != std::size_t(r) * r)
            throw contract_error("MatrixElement: expected r*r entries");
        for (const auto &e : entries_)
            if (!(e.theta() == theta_))
                throw contract_error("MatrixElement: entries must share theta");
    }

    static MatrixElement identity(const Theta &theta, int r) {
        MatrixElement m(theta, r);
        for (int i = 0; i < r; ++i)
            m(i, i) = TorusElement::one(theta);
        return m;
    }

    static MatrixElement diagonal(const Theta &theta, const std::vector<TorusElement> &d) {
        MatrixElement m(theta, int(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i)
            m(int(i), int(i)) = d[i];
        return m;
    }

    int size() const noexcept { return r_; }
    const Theta &theta() const noexcept { return theta_; }
    TorusElement &operator()(int i, int j) { return entries_[std::size_t(i) * r_ + j]; }
    const TorusElement &operator()(int i, int j) const { return entries_[std::size_t(i) * r_ + j]; }
    const std::vector<TorusElement> &entries() const noexcept { return entries_; }

    void require_same_shape(const MatrixElement &o, const char *where) const {
        if (r_ != o.r_ || !(theta_ == o.theta_))
            throw contract_error(std::string(where) + ": shape or theta mismatch");
    }

    MatrixElement &operator+=(const MatrixElement &o) {
        require_same_shape(o, "matrix add");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] += o.entries_[i];
        return *this;
    }
    MatrixElement &operator-=(const MatrixElement &o) {
        require_same_shape(o, "matrix sub");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] -= o.entries_[i];
        return *this;
    }
    MatrixElement &operator*=(Complex c) {
        for (auto &e : entries_)
            e *= c;
        return *this;
    }
    MatrixElement &axpy(Complex c, const MatrixElement &o) {
        require_same_shape(o, "matrix axpy");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i].axpy(c, o.entries_[i]);
        return *this;
    }

    friend MatrixElement operator+(MatrixElement a, const MatrixElement &b) { return a += b; }
    friend MatrixElement operator-(MatrixElement a, const MatrixElement &b) { return a -= b; }
    friend MatrixElement operator*(Complex c, MatrixElement a) { return a *= c; }

  private:
    Theta theta_;
    int r_;
    std::vector<TorusElement> entries_;
};

inline MatrixElement mul(const MatrixElement &a, const MatrixElement &b) {
    a.require_same_shape(b, "matrix mul");
    const int r = a.size();
    MatrixElement out(a.theta(), r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k)
                if (!a(i, k).is_zero() && !b(k, j).is_zero())
                    out(i, j) += mul(a(i, k), b(k, j));
    return out;
}

inline MatrixElement operator*(const MatrixElement &a, const MatrixElement &b) { return mul(a, b); }

/// Conjugate transpose: (A^*)_{ij} = (A_{ji})^*.
inline MatrixElement star(const MatrixElement &a) {
    MatrixElement out(a.theta(), a.size());
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j)
            out(i, j) = star(a(j, i));
    return out;
}

inline MatrixElement delta(const MultiIndex &l, const MatrixElement &a) {
    MatrixElement out(a.theta(), a.size());
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j)
            out(i, j) = delta(l, a(i, j));
    return out;
}

/// max over entries of ||.||_0
inline double max_entry_norm0(const MatrixElement &a) {
    double m = 0.0;
    for (const auto &e : a.entries())
        m = std::max(m, norm0(e));
    return m;
}

/// Column of r algebra elements.
class ModuleVector {
  public:
    ModuleVector(Theta theta, int r) : theta_(std::move(theta)) {
        if (r < 1)
            throw contract_error("ModuleVector: size must be positive");
        entries_.assign(std::size_t(r), TorusElement(theta_));
    }
    ModuleVector(Theta theta, std::vector<TorusElement> entries) : theta_(std::move(theta)), entries_(std::move(entries)) {
        if (entries_.empty())
            throw contract_error("ModuleVector: size must be positive");
        for (const auto &e : entries_)
            if (!(e.theta() == theta_))
                throw contract_error("ModuleVector: entries must share theta");
    }

    int size() const noexcept { return int(entries_.size()); }
    const Theta &theta() const noexcept { return theta_; }
    TorusElement &operator[](int i) { return entries_[std::size_t(i)]; }
    const TorusElement &operator[](int i) const { return entries_[std::size_t(i)]; }
    const std::vector<TorusElement> &entries() const noexcept { return entries_; }

    void require_same_shape(const ModuleVector &o, const char *where) const {
        if (size() != o.size() || !(theta_ == o.theta_))
            throw contract_error(std::string(where) + ": shape or theta mismatch");
    }

    ModuleVector &operator+=(const ModuleVector &o) {
        require_same_shape(o, "vector add");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] += o.entries_[i];
        return *this;
    }
    ModuleVector &operator-=(const ModuleVector &o) {
        require_same_shape(o, "vector sub");
        for (std::size_t i = 0; i < entries_.size(); ++i)
            entries_[i] -= o.entries_[i];
        return *this;
    }
    friend ModuleVector operator+(ModuleVector a, const ModuleVector &b) { return a += b; }
    friend ModuleVector operator-(ModuleVector a, const ModuleVector &b) { return a -= b; }

  private:
    Theta theta_;
    std::vector<TorusElement> entries_;
};

/// A v (matrix acting on a column).
inline ModuleVector mul(const MatrixElement &a, const ModuleVector &v) {
    if (a.size() != v.size() || !(a.theta() == v.theta()))
        throw contract_error("matrix-vector mul: shape or theta mismatch");
    ModuleVector out(v.theta(), v.size());
    for (int i = 0; i < a.size(); ++i)
        for (int k = 0; k < a.size(); ++k)
            if (!a(i, k).is_zero() && !v[k].is_zero())
                out[i] += mul(a(i, k), v[k]);
    return out;
}

inline double max_entry_norm0(const ModuleVector &v) {
    double m = 0.0;
    for (const auto &e : v.entries())
        m = std::max(m, norm0(e));
    return m;
}

/// e = e^2 = e^* within tol (max entrywise ||.||_0).
inline bool idempotent_check(const MatrixElement &e, double tol) {
    return max_entry_norm0(mul(e, e) - e) <= tol && max_entry_norm0(star(e) - e) <= tol;
}

/// Projection onto E = e A^r (columns): v -> e v.
inline ModuleVector project(const ModuleVector &v, const MatrixElement &e) { return mul(e, v); }

inline Complex module_inner(const ModuleVector &a, const ModuleVector &b) {
    a.require_same_shape(b, "module_inner");
    Complex s{};
    for (int j = 0; j < a.size(); ++j)
        s += inner(a[j], b[j]);
    return s;
}

inline Complex module_inner_s(const ModuleVector &a, const ModuleVector &b, double s) {
    a.require_same_shape(b, "module_inner_s");
    Complex acc{};
    for (int j = 0; j < a.size(); ++j)
        acc += sobolev_inner(a[j], b[j], s);
    return acc;
}

inline double module_norm_s(const ModuleVector &a, double s) {
    double acc = 0.0;
    for (const auto &e : a.entries())
        acc += sobolev_norm2(e, s);
    return std::sqrt(acc);
}

/// r x r matrix of symbols; declared order is the max entrywise order.
class MatrixSymbol {
  public:
    MatrixSymbol(int r, std::vector<Symbol> entries) : r_(r), entries_(std::move(entries)) {
        if (r < 1 || entries_.size() != std::size_t(r) * r)
            throw contract_error("MatrixSymbol: expected r*r entries");
        for (const auto &e : entries_)
            if (!(e.theta() == entries_.front().theta()))
                throw contract_error("MatrixSymbol: entries must share theta");
    }

    static MatrixSymbol diagonal(const std::vector<Symbol> &d, const Theta &theta) {
        const int r = int(d.size());
        std::vector<Symbol> e;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                e.push_back(i == j ? d[std::size_t(i)] : Symbol(PolynomialSymbol(theta)));
        return MatrixSymbol(r, std::move(e));
    }

    /// Constant symbol xi -> c.
    static MatrixSymbol constant(const MatrixElement &c) {
        std::vector<Symbol> e;
        for (const auto &x : c.entries())
            e.push_back(constant_symbol(x));
        return MatrixSymbol(c.size(), std::move(e));
    }

    int size() const noexcept { return r_; }
    const Theta &theta() const { return entries_.front().theta(); }
    int dim() const { return theta().dim(); }
    const Symbol &operator()(int i, int j) const { return entries_[std::size_t(i) * r_ + j]; }
    const std::vector<Symbol> &entries() const noexcept { return entries_; }

    double order() const {
        double d = -std::numeric_limits<double>::infinity();
        for (const auto &e : entries_)
            d = std::max(d, e.order());
        return d;
    }

    MatrixElement deriv(const MultiIndex &l, std::span<const double> xi) const {
        std::vector<TorusElement> v;
        v.reserve(entries_.size());
        for (const auto &e : entries_)
            v.push_back(e.deriv(l, xi));
        return MatrixElement(theta(), r_, std::move(v));
    }

    MatrixElement eval(std::span<const double> xi) const { return deriv(MultiIndex(std::size_t(dim()), 0), xi); }

  private:
    int r_;
    std::vector<Symbol> entries_;
};

/// Entrywise e rho e with exact derivatives e (d^l rho) e.
inline MatrixSymbol compress(const MatrixSymbol &sym, const MatrixElement &e) {
    const int r = sym.size();
    if (e.size() != r)
        throw contract_error("compress: size mismatch");
    std::vector<Symbol> out;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            CallbackSymbol cb;
            cb.theta = sym.theta();
            cb.order = sym.order();
            cb.exact_deriv = [sym, e, i, j](const MultiIndex &l, std::span<const double> xi) {
                return mul(mul(e, sym.deriv(l, xi)), e)(i, j);
            };
            cb.fn = [f = cb.exact_deriv, n = sym.dim()](std::span<const double> xi) {
                return f(MultiIndex(std::size_t(n), 0), xi);
            };
            out.push_back(std::move(cb));
        }
    return MatrixSymbol(r, std::move(out));
}

/// P_rho(v)_i = sum_k P_{rho_ik}(v_k). When `module` is given, v and the
/// result must lie in E = e A^r (within tol), otherwise contract_error.
inline ModuleVector apply_matrix(const MatrixSymbol &sym, const ModuleVector &v,
                                 const std::optional<MatrixElement> &module = std::nullopt, double tol = 1e-10) {
    if (sym.size() != v.size() || !(sym.theta() == v.theta()))
        throw contract_error("apply_matrix: shape or theta mismatch");
    auto in_module = [&](const ModuleVector &w) { return max_entry_norm0(project(w, *module) - w) <= tol; };
    if (module && !in_module(v))
        throw contract_error("apply_matrix: input is not in the module");
    ModuleVector out(v.theta(), v.size());
    for (int i = 0; i < sym.size(); ++i)
        for (int k = 0; k < sym.size(); ++k)
            if (!v[k].is_zero())
                out[i] += apply(sym(i, k), v[k]);
    if (module && !in_module(out))
        throw contract_error("apply_matrix: image leaves the module (symbol not compressed?)");
    return out;
}

struct MatrixExpansionResult {
    int N = 0;
    MatrixElement value;
    std::vector<MatrixElement> terms;
};

/// sum_{|l| < N} (1/l!) d^l delta^l [rho(xi)^*] with the matrix star.
inline MatrixExpansionResult matrix_adjoint_expansion(const MatrixSymbol &sym, std::span<const double> xi, int N) {
    if (N < 1)
        throw contract_error("matrix_adjoint_expansion: N must be at least 1");
    MatrixExpansionResult res{N, MatrixElement(sym.theta(), sym.size()), {}};
    for (int L = 0; L < N; ++L) {
        MatrixElement level(sym.theta(), sym.size());
        for (const auto &l : multi_indices_of_degree(sym.dim(), L))
            level.axpy(1.0 / factorial(l), delta(l, star(sym.deriv(l, xi))));
        res.value += level;
        res.terms.push_back(std::move(level));
    }
    return res;
}

/// sum_{|l| < N} (1/l!) d^l A(xi) delta^l B(xi), matrix products.
inline MatrixExpansionResult matrix_compose_expansion(const MatrixSymbol &A, const MatrixSymbol &B,
                                                      std::span<const double> xi, int N) {
    if (N < 1)
        throw contract_error("matrix_compose_expansion: N must be at least 1");
    if (A.size() != B.size() || !(A.theta() == B.theta()))
        throw contract_error("matrix_compose_expansion: shape or theta mismatch");
    MatrixExpansionResult res{N, MatrixElement(A.theta(), A.size()), {}};
    const MatrixElement b = B.eval(xi);
    for (int L = 0; L < N; ++L) {
        MatrixElement level(A.theta(), A.size());
        for (const auto &l : multi_indices_of_degree(A.dim(), L))
            level.axpy(1.0 / factorial(l), mul(A.deriv(l, xi), delta(l, b)));
        res.value += level;
        res.terms.push_back(std::move(level));
    }
    return res;
}

using ModuleMap = std::function<ModuleVector(const ModuleVector &)>;

/// f_j U^m
inline ModuleVector basis_vector(const Theta &theta, int r, int j, const MultiIndex &m) {
    ModuleVector v(theta, r);
    v[j] = TorusElement::monomial(theta, m);
    return v;
}

/// Symbol of a module operator at an integer point: column j is op(f_j U^m) (U^m)^*.
inline MatrixElement matrix_symbol_of_operator(const ModuleMap &op, int r, const MultiIndex &m, const Theta &theta) {
    MatrixElement out(theta, r);
    const TorusElement us = star(TorusElement::monomial(theta, m));
    for (int j = 0; j < r; ++j) {
        const ModuleVector img = op(basis_vector(theta, r, j, m));
        for (int i = 0; i < r; ++i)
            out(i, j) = mul(img[i], us);
    }
    return out;
}

/// Matrix of a module operator on the r-fold truncated basis {f_j U^k}, index j * |box| + k.
inline Eigen::MatrixXcd module_operator_matrix(const ModuleMap &op, int r, const Theta &theta, int box) {
    const ModeBox basis(theta.dim(), box);
    const auto B = Eigen::Index(basis.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(r * B, r * B);
    for (int j = 0; j < r; ++j)
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const ModuleVector img = op(basis_vector(theta, r, j, basis.mode(k)));
            for (int i = 0; i < r; ++i)
                for (const auto &t : img[i].terms())
                    if (basis.contains(t.mode))
                        M(i * B + Eigen::Index(basis.index(t.mode)), j * B + Eigen::Index(k)) = t.coeff;
        }
    return M;
}

/// Adjoint symbol at an integer point from the conjugate transpose of the
/// block matrix of P_rho.
inline MatrixElement matrix_adjoint_gns_oracle(const MatrixSymbol &sym, const MultiIndex &m, int box) {
    const Theta &theta = sym.theta();
    const int r = sym.size();
    const Eigen::MatrixXcd M =
        module_operator_matrix([&](const ModuleVector &v) { return apply_matrix(sym, v); }, r, theta, box).adjoint();
    const ModeBox basis(theta.dim(), box);
    if (!basis.contains(m))
        throw contract_error("matrix_adjoint_gns_oracle: mode outside the box");
    const auto B = Eigen::Index(basis.size());
    const TorusElement us = star(TorusElement::monomial(theta, m));
    MatrixElement out(theta, r);
    for (int j = 0; j < r; ++j) {
        const Eigen::VectorXcd col = M.col(j * B + Eigen::Index(basis.index(m)));
        for (int i = 0; i < r; ++i)
            out(i, j) = mul(element_from_column(col.segment(i * B, B), theta, box), us);
    }
    return out;
}

/// Exact matrix adjoint symbol: entry (i,j) is the scalar adjoint symbol of rho_{ji}.
inline MatrixElement matrix_adjoint_oracle(const MatrixSymbol &sym, std::span<const double> xi) {
    MatrixElement out(sym.theta(), sym.size());
    for (int i = 0; i < sym.size(); ++i)
        for (int j = 0; j < sym.size(); ++j)
            out(i, j) = adjoint_oracle(sym(j, i), xi);
    return out;
}

/// Symbol of P_A o P_B at an integer point by double application.
inline MatrixElement matrix_compose_oracle(const MatrixSymbol &A, const MatrixSymbol &B, const MultiIndex &m) {
    return matrix_symbol_of_operator(
        [&](const ModuleVector &v) { return apply_matrix(A, apply_matrix(B, v)); }, A.size(), m, A.theta());
}

/// Orthonormal basis f_j of E for an idempotent whose entries are complex
/// multiples of 1. Returns the columns as module vectors with scalar entries.
inline std::vector<ModuleVector> scalar_idempotent_eigenbasis(const MatrixElement &e, double tol = 1e-10) {
    const int r = e.size();
    const MultiIndex zero(std::size_t(e.theta().dim()), 0);
    Eigen::MatrixXcd M(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            const TorusElement &x = e(i, j);
            if (x.size() > 1 || (x.size() == 1 && x.terms()[0].mode != zero))
                throw contract_error("scalar_idempotent_eigenbasis: entries must be scalar");
            M(i, j) = x.coeff(zero);
        }
    if (!idempotent_check(e, tol))
        throw contract_error("scalar_idempotent_eigenbasis: not a self-adjoint idempotent");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    std::vector<ModuleVector> basis;
    for (int k = 0; k < r; ++k) {
        if (std::abs(es.eigenvalues()(k) - 1.0) > 1e-8)
            continue;
        ModuleVector f(e.theta(), r);
        for (int i = 0; i < r; ++i)
            f[i] = TorusElement::monomial(e.theta(), zero, es.eigenvectors()(i, k));
        basis.push_back(std::move(f));
    }
    return basis;
}

/// Max entrywise C_rho (from verify_order on every entry).
inline double matrix_c_rho(const MatrixSymbol &sym, const std::vector<Point> &grid, int max_i = 2, int max_j = 2) {
    double c = 0.0;
    for (const auto &e : sym.entries()) {
        c = std::max(c, estimate_order_constant(e, grid, max_i, max_j).c_rho);
    }
    return c;
}

inline ModuleVector random_module_vector(Rng &rng, const Theta &theta, int r, int box) {
    std::vector<TorusElement> v;
    for (int i = 0; i < r; ++i)
        v.push_back(random_element(rng, theta, box));
    return ModuleVector(theta, std::move(v));
}

/// ||P_rho v||_{s-d} <= sqrt(r k_rho) ||v||_s on random module vectors, plus a
/// rigorous bound assembled from the scalar repaired bounds per entry.
inline VerificationReport module_boundedness_check(const MatrixSymbol &sym, double c_rho, int trials, double s,
                                                   Rng &rng, int box = 3) {
    const int r = sym.size();
    const double d = sym.order();
    const double kr = k_rho(c_rho, d);
    const double bound = std::sqrt(r * kr);
    double max_ratio = 0.0, max_repaired = 0.0;
    int violations = 0;
    for (int t = 0; t < trials; ++t) {
        const ModuleVector v = random_module_vector(rng, sym.theta(), r, box);
        const double nv = module_norm_s(v, s);
        if (nv == 0.0)
            continue;
        const double ratio = module_norm_s(apply_matrix(sym, v), s - d) / nv;
        max_ratio = std::max(max_ratio, ratio);
        if (ratio > bound * (1.0 + 1e-12))
            ++violations;
        double acc = 0.0;
        for (int i = 0; i < r; ++i) {
            double row = 0.0;
            for (int k = 0; k < r; ++k) {
                // the entry has order <= d; lift it to d with the weight of its own order
                const double dk = sym(i, k).order();
                row += repaired_bound(sym(i, k), v[k], s - d + dk) * sobolev_norm(v[k], s - d + dk);
            }
            acc += row * row;
        }
        const double K = std::sqrt(acc) / nv;
        if (K > 0.0)
            max_repaired = std::max(max_repaired, ratio / K);
        else if (ratio > 0.0)
            max_repaired = std::numeric_limits<double>::infinity();
    }
    VerificationReport rep;
    rep.suite = "module-boundedness";
    rep.parameters = {{"order", d}, {"r", r}, {"s", s}, {"trials", trials}, {"box", box}};
    rep.add_check("ratio_vs_sqrt_r_k_rho", max_ratio, bound * (1.0 + 1e-12),
                  {{"C_rho", c_rho}, {"k_rho", kr}, {"violations", violations}, {"trials", trials}});
    rep.add_check("ratio_vs_repaired_bound", max_repaired, 1.0 + 1e-12);
    return rep;
}

/// Rellich extraction for module sequences; C bounds every component's
/// H^s norm, so the tail carries the r-fold factor.
inline RellichResult module_rellich_extract(const std::vector<ModuleVector> &seq, double s, double t, double C,
                                            double eps) {
    if (!(s > t))
        throw precondition_error("module_rellich_extract: need s > t");
    if (!(eps > 0.0) || !(C >= 0.0))
        throw precondition_error("module_rellich_extract: need eps > 0 and C >= 0");
    if (seq.empty())
        return {};
    const int r = seq.front().size();
    const int n = seq.front().theta().dim();
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq[i].require_same_shape(seq.front(), "module_rellich_extract");
        for (int j = 0; j < r; ++j) {
            const double ns = sobolev_norm(seq[i][j], s);
            if (ns > C * (1.0 + 1e-12))
                throw precondition_error("module_rellich_extract: element " + std::to_string(i) + " component " +
                                         std::to_string(j) + " has ||.||_s = " + std::to_string(ns) +
                                         " > C = " + std::to_string(C));
        }
    }
    const int R = detail::rellich_radius(C, s, t, eps, double(r));
    const auto ball = detail::euclidean_ball(n, R);
    std::vector<std::vector<Complex>> low;
    for (const auto &v : seq) {
        std::vector<Complex> x;
        x.reserve(ball.size() * std::size_t(r));
        for (int j = 0; j < r; ++j)
            for (const auto &k : ball)
                x.push_back(std::sqrt(sobolev_weight(k, t)) * v[j].coeff(k));
        low.push_back(std::move(x));
    }
    RellichResult res = detail::rellich_core(
        seq.size(), low,
        [&](std::size_t i, std::size_t j) {
            const double d = module_norm_s(seq[i] - seq[j], t);
            return d * d;
        },
        eps);
    res.radius = R;
    res.low_modes = ball.size();
    return res;
}

} // namespace nct
