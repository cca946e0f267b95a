#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "nct/calculus.hpp"
#include "nct/report.hpp"

namespace nct {

/// Product cutoff phi(x) = prod_j phi1(x_j), phi(0) = 1.
///   gaussian:      phi1(t) = exp(-t^2)
///   raised_cosine: phi1(t) = (1 + cos(pi S(|t|/2))) / 2 with S the C-infinity
///                  smoothstep built from exp(-1/u); phi1 = 0 for |t| >= 2.
struct CutoffFamily {
    enum class Kind { gaussian, raised_cosine };
    Kind kind = Kind::gaussian;

    static double smoothstep(double u) {
        if (u <= 0.0)
            return 0.0;
        if (u >= 1.0)
            return 1.0;
        const double a = std::exp(-1.0 / u);
        const double b = std::exp(-1.0 / (1.0 - u));
        return a / (a + b);
    }

    double phi1(double t) const {
        if (kind == Kind::gaussian)
            return std::exp(-t * t);
        const double u = 0.5 * std::abs(t);
        if (u >= 1.0)
            return 0.0;
        return 0.5 * (1.0 + std::cos(std::numbers::pi * smoothstep(u)));
    }

    double operator()(std::span<const double> x) const {
        double p = 1.0;
        for (double v : x)
            p *= phi1(v);
        return p;
    }

    /// Fourier transform int e^{-i u v} phi1(v) dv (real, even).
    double phi1_hat(double u) const {
        if (kind == Kind::gaussian)
            return std::sqrt(std::numbers::pi) * std::exp(-0.25 * u * u);
        // fixed composite rule on [0, 2]; at least ~25 nodes per period of cos(u v) for |u| <= hat_window()
        struct Table {
            std::vector<double> v, wphi;
        };
        static const Table table = [] {
            using rule = boost::math::quadrature::gauss<double, 20>;
            const auto &ab = rule::abscissa();
            const auto &wt = rule::weights();
            const CutoffFamily rc{Kind::raised_cosine};
            Table t;
            const int panels = 160;
            const double h = 2.0 / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = (p + 0.5) * h;
                for (std::size_t i = 0; i < ab.size(); ++i)
                    for (double sgn : {-1.0, 1.0}) {
                        if (ab[i] == 0.0 && sgn > 0.0)
                            continue;
                        const double v = mid + sgn * 0.5 * h * ab[i];
                        t.v.push_back(v);
                        t.wphi.push_back(0.5 * h * wt[i] * rc.phi1(v));
                    }
            }
            return t;
        }();
        double acc = 0.0;
        for (std::size_t k = 0; k < table.v.size(); ++k)
            acc += table.wphi[k] * std::cos(u * table.v[k]);
        return 2.0 * acc;
    }

    /// |phi1_hat(u)| is below ~1e-17 outside [-window, window].
    double hat_window() const { return kind == Kind::gaussian ? 14.0 : 160.0; }

    /// phi1(eps x) is negligible (or zero) for |x| > support_radius() / eps.
    double support_radius() const { return kind == Kind::gaussian ? 6.5 : 2.0; }

    const char *name() const { return kind == Kind::gaussian ? "gaussian" : "raised-cosine"; }
};

using Amplitude = std::function<Complex(std::span<const double>)>;

/// int e^{i q(x)} a(x) dx with q(x) = x^T Q x on R^dim.
struct OscIntegrand {
    int dim = 1;
    std::vector<double> Q; ///< dim x dim, symmetric, row-major
    Amplitude amplitude;
    double growth_order = 0.0;

    double q(std::span<const double> x) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                s += Q[std::size_t(i * dim + j)] * x[std::size_t(i)] * x[std::size_t(j)];
        return s;
    }

    /// q(y, eta) = -y.eta on R^{2n}.
    static OscIntegrand pairing(int n, Amplitude a, double growth = 0.0) {
        OscIntegrand f;
        f.dim = 2 * n;
        f.Q.assign(std::size_t(4 * n * n), 0.0);
        for (int j = 0; j < n; ++j) {
            f.Q[std::size_t(j * 2 * n + n + j)] = -0.5;
            f.Q[std::size_t((n + j) * 2 * n + j)] = -0.5;
        }
        f.amplitude = std::move(a);
        f.growth_order = growth;
        return f;
    }

    bool is_pairing() const {
        if (dim % 2 != 0)
            return false;
        const OscIntegrand ref = pairing(dim / 2, {});
        for (std::size_t i = 0; i < Q.size(); ++i)
            if (Q[i] != ref.Q[i])
                return false;
        return true;
    }
};

struct OscQuadrature {
    std::size_t max_nodes = 4'000'000; ///< per regularized integral
    double panel_width = 1.0;          ///< upper bound; shrunk to resolve the phase
};

struct OscResult {
    Complex value{};
    double error_estimate = 0.0;
    double quadrature_error = 0.0;
    bool diverged = false;
    std::string diagnostic;
    std::vector<double> eps;
    std::vector<Complex> regularized; ///< I(eps_k)
    std::vector<double> corrections;  ///< |T_kk - T_{k-1,k-1}|
};

inline const std::vector<double> &default_eps_schedule() {
    static const std::vector<double> s{0.2, 0.1, 0.05, 0.025};
    return s;
}

namespace detail {

/// Composite Gauss-Legendre nodes and weights on [-R, R].
template <unsigned Nodes> void composite_rule(double R, std::size_t panels, std::vector<double> &x,
                                              std::vector<double> &w) {
    using rule = boost::math::quadrature::gauss<double, Nodes>;
    const auto &ab = rule::abscissa();
    const auto &wt = rule::weights();
    x.clear();
    w.clear();
    const double h = 2.0 * R / double(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = -R + (double(p) + 0.5) * h;
        for (std::size_t i = 0; i < ab.size(); ++i) {
            if (ab[i] == 0.0) {
                x.push_back(mid);
                w.push_back(0.5 * h * wt[i]);
                continue;
            }
            x.push_back(mid - 0.5 * h * ab[i]);
            w.push_back(0.5 * h * wt[i]);
            x.push_back(mid + 0.5 * h * ab[i]);
            w.push_back(0.5 * h * wt[i]);
        }
    }
}

/// Regularized integral of a general quadratic phase for dim 1 or 2.
template <unsigned Nodes>
Complex general_regularized(const OscIntegrand &f, const CutoffFamily &cut, double eps, const OscQuadrature &quad) {
    const double R = std::max(5.0, cut.support_radius()) / eps;
    double qnorm = 0.0;
    for (double v : f.Q)
        qnorm += v * v;
    qnorm = std::sqrt(qnorm);
    const double maxgrad = 2.0 * qnorm * R * std::sqrt(double(f.dim));
    double width = quad.panel_width;
    if (maxgrad > 0.0)
        width = std::min(width, 4.0 * std::numbers::pi / maxgrad);
    const auto panels = std::size_t(std::ceil(2.0 * R / width));
    const double per_dim = double(panels) * Nodes;
    if (std::pow(per_dim, f.dim) > double(quad.max_nodes))
        throw contract_error("osc_integral: node budget exceeded (" + std::to_string(std::pow(per_dim, f.dim)) +
                             " nodes); raise max_nodes or use the pairing form");
    std::vector<double> x, w;
    composite_rule<Nodes>(R, panels, x, w);
    std::vector<double> pt(std::size_t(f.dim)), scaled(std::size_t(f.dim));
    std::complex<long double> acc{};
    if (f.dim == 1) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            pt[0] = x[i];
            scaled[0] = eps * x[i];
            const double c = cut(scaled);
            if (c == 0.0)
                continue;
            const Complex v = w[i] * c * std::polar(1.0, f.q(pt)) * f.amplitude(pt);
            acc += std::complex<long double>(v.real(), v.imag());
        }
    } else if (f.dim == 2) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::complex<long double> row{};
            for (std::size_t j = 0; j < x.size(); ++j) {
                pt[0] = x[i];
                pt[1] = x[j];
                scaled[0] = eps * x[i];
                scaled[1] = eps * x[j];
                const double c = cut(scaled);
                if (c == 0.0)
                    continue;
                const Complex v = w[j] * c * std::polar(1.0, f.q(pt)) * f.amplitude(pt);
                row += std::complex<long double>(v.real(), v.imag());
            }
            acc += (long double)w[i] * row;
        }
    } else {
        throw contract_error("osc_integral: general quadratic phases are limited to dim <= 2");
    }
    return Complex(double(acc.real()), double(acc.imag()));
}

/// Pairing integral with shift c:
///   I(eps) = int int e^{-i y.eta} a(y) e^{i eta.c} phi(eps y) phi(eps eta) dy deta.
/// The eta integral is int e^{-i eta.(y-c)} prod phi1(eps eta_j) deta
/// = prod eps^{-1} phi1_hat((y_j - c_j)/eps); substituting y = c + eps u gives
///   I(eps) = int a(c + eps u) prod_j phi1(eps (c_j + eps u_j)) phi1_hat(u_j) du.
struct PairingGrid {
    std::vector<double> u, w, hat;
};

template <unsigned Nodes> PairingGrid pairing_grid(const CutoffFamily &cut, double panel_width) {
    PairingGrid g;
    const double U = cut.hat_window();
    const auto panels = std::size_t(std::ceil(2.0 * U / panel_width));
    composite_rule<Nodes>(U, panels, g.u, g.w);
    g.hat.reserve(g.u.size());
    for (double u : g.u)
        g.hat.push_back(cut.phi1_hat(u));
    return g;
}

inline Complex pairing_regularized(const Amplitude &a, std::span<const double> c, const CutoffFamily &cut,
                                   double eps, const PairingGrid &g) {
    const std::size_t n = c.size();
    std::vector<double> y(n);
    double hmax = 0.0;
    for (double h : g.hat)
        hmax = std::max(hmax, std::abs(h));
    const double skip = 1e-18 * hmax * hmax;
    std::complex<long double> acc{};
    if (n == 1) {
        for (std::size_t i = 0; i < g.u.size(); ++i) {
            y[0] = c[0] + eps * g.u[i];
            const double f = g.w[i] * g.hat[i] * cut.phi1(eps * y[0]);
            if (f == 0.0)
                continue;
            const Complex v = f * a(y);
            acc += std::complex<long double>(v.real(), v.imag());
        }
    } else if (n == 2) {
        for (std::size_t i = 0; i < g.u.size(); ++i) {
            y[0] = c[0] + eps * g.u[i];
            const double fi = g.w[i] * g.hat[i] * cut.phi1(eps * y[0]);
            if (fi == 0.0)
                continue;
            std::complex<long double> row{};
            for (std::size_t j = 0; j < g.u.size(); ++j) {
                if (std::abs(g.hat[i] * g.hat[j]) < skip)
                    continue;
                y[1] = c[1] + eps * g.u[j];
                const double fj = g.w[j] * g.hat[j] * cut.phi1(eps * y[1]);
                if (fj == 0.0)
                    continue;
                const Complex v = fj * a(y);
                row += std::complex<long double>(v.real(), v.imag());
            }
            acc += (long double)fi * row;
        }
    } else {
        throw contract_error("osc_integral: pairing form supports n <= 2");
    }
    return Complex(double(acc.real()), double(acc.imag()));
}

/// Richardson table in powers of eps^2 for a decreasing schedule.
inline void richardson(OscResult &r) {
    const std::size_t K = r.eps.size();
    std::vector<std::vector<Complex>> T(K);
    for (std::size_t k = 0; k < K; ++k) {
        T[k].push_back(r.regularized[k]);
        for (std::size_t j = 1; j <= k; ++j) {
            const double ratio = std::pow(r.eps[k - j] / r.eps[k], 2.0);
            T[k].push_back(T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / (ratio - 1.0));
        }
    }
    r.value = T[K - 1][K - 1];
    for (std::size_t k = 1; k < K; ++k)
        r.corrections.push_back(std::abs(T[k][k] - T[k - 1][k - 1]));
    const double floor = 1e-12 * (1.0 + std::abs(r.value));
    for (std::size_t k = 1; k < r.corrections.size(); ++k)
        if (r.corrections[k] > r.corrections[k - 1] && r.corrections[k] > floor) {
            r.diverged = true;
            r.diagnostic = "extrapolation corrections do not decrease along the eps schedule";
        }
    const double roundoff = 1e-13 * (1.0 + std::abs(r.value));
    r.error_estimate = (r.corrections.empty() ? 0.0 : r.corrections.back()) + r.quadrature_error + roundoff;
}

} // namespace detail

/// Regularized limit lim_{eps -> 0} int e^{i q(x)} a(x) phi(eps x) dx by
/// Richardson extrapolation in eps^2. The pairing form -y.eta is routed to
/// the pairing evaluator (shift c = 0); other phases use composite
/// Gauss-Legendre on [-R, R]^dim with R = max(5, support) / eps.
inline OscResult osc_integral(const OscIntegrand &f, const CutoffFamily &cutoff,
                              const std::vector<double> &eps_schedule = default_eps_schedule(),
                              const OscQuadrature &quad = {});

/// Same as osc_integral for the pairing form with amplitude a(y) e^{i eta.c}.
inline OscResult pairing_integral(const Amplitude &a, std::span<const double> c, const CutoffFamily &cutoff,
                                  const std::vector<double> &eps_schedule = default_eps_schedule(),
                                  const OscQuadrature &quad = {}) {
    if (eps_schedule.size() < 3)
        throw contract_error("osc_integral: eps schedule needs at least 3 entries");
    for (std::size_t k = 1; k < eps_schedule.size(); ++k)
        if (!(eps_schedule[k] < eps_schedule[k - 1]) || !(eps_schedule[k] > 0.0))
            throw contract_error("osc_integral: eps schedule must be positive and decreasing");
    OscResult r;
    r.eps = eps_schedule;
    const detail::PairingGrid fine = detail::pairing_grid<16>(cutoff, quad.panel_width);
    const detail::PairingGrid coarse = detail::pairing_grid<10>(cutoff, quad.panel_width);
    for (double e : eps_schedule) {
        const Complex vf = detail::pairing_regularized(a, c, cutoff, e, fine);
        const Complex vc = detail::pairing_regularized(a, c, cutoff, e, coarse);
        r.regularized.push_back(vf);
        r.quadrature_error = std::max(r.quadrature_error, std::abs(vf - vc));
    }
    detail::richardson(r);
    return r;
}

inline OscResult osc_integral(const OscIntegrand &f, const CutoffFamily &cutoff,
                              const std::vector<double> &eps_schedule, const OscQuadrature &quad) {
    if (!f.amplitude)
        throw contract_error("osc_integral: missing amplitude");
    if (f.dim < 1 || f.Q.size() != std::size_t(f.dim * f.dim))
        throw contract_error("osc_integral: phase matrix has wrong size");
    if (f.is_pairing()) {
        const std::size_t n = std::size_t(f.dim / 2);
        // amplitude in (y, eta) that does not depend on eta
        Amplitude a = [&f, n](std::span<const double> y) {
            std::vector<double> x(2 * n, 0.0);
            std::copy(y.begin(), y.end(), x.begin());
            return f.amplitude(x);
        };
        return pairing_integral(a, std::vector<double>(n, 0.0), cutoff, eps_schedule, quad);
    }
    const double det = f.dim == 1 ? f.Q[0] : f.dim == 2 ? f.Q[0] * f.Q[3] - f.Q[1] * f.Q[2] : 0.0;
    if (det == 0.0)
        throw contract_error("osc_integral: phase must be nondegenerate (dim <= 2 for general forms)");
    if (eps_schedule.size() < 3)
        throw contract_error("osc_integral: eps schedule needs at least 3 entries");
    for (std::size_t k = 1; k < eps_schedule.size(); ++k)
        if (!(eps_schedule[k] < eps_schedule[k - 1]) || !(eps_schedule[k] > 0.0))
            throw contract_error("osc_integral: eps schedule must be positive and decreasing");
    OscResult r;
    r.eps = eps_schedule;
    for (double e : eps_schedule) {
        const Complex vf = detail::general_regularized<16>(f, cutoff, e, quad);
        const Complex vc = detail::general_regularized<10>(f, cutoff, e, quad);
        r.regularized.push_back(vf);
        r.quadrature_error = std::max(r.quadrature_error, std::abs(vf - vc));
    }
    detail::richardson(r);
    return r;
}

inline json osc_result_json(const OscResult &r) {
    json regs = json::array();
    for (const auto &v : r.regularized)
        regs.push_back({v.real(), v.imag()});
    return {{"value", {r.value.real(), r.value.imag()}},
            {"error_estimate", r.error_estimate},
            {"quadrature_error", r.quadrature_error},
            {"diverged", r.diverged},
            {"eps", r.eps},
            {"regularized", regs},
            {"corrections", r.corrections}};
}

inline constexpr double kPropOscTol = 1e-5;

/// (2 pi)^{-n} int int e^{-i y.eta} a(y) dy deta = a(0), with both cutoff
/// families, plus their mutual agreement within the combined error estimates.
inline VerificationReport verify_prop_osc(const Amplitude &a, int n,
                                          const std::vector<double> &eps_schedule = default_eps_schedule(),
                                          const OscQuadrature &quad = {}) {
    if (n < 1 || n > 2)
        throw contract_error("verify_prop_osc: n must be 1 or 2");
    VerificationReport rep;
    rep.suite = "prop-osc";
    rep.parameters = {{"n", n}, {"eps", eps_schedule}};
    const std::vector<double> zero(std::size_t(n), 0.0);
    const Complex a0 = a(zero);
    const double norm = std::pow(2.0 * std::numbers::pi, -n);
    std::vector<OscResult> results;
    for (auto kind : {CutoffFamily::Kind::gaussian, CutoffFamily::Kind::raised_cosine}) {
        const CutoffFamily cut{kind};
        OscResult r = pairing_integral(a, zero, cut, eps_schedule, quad);
        r.value *= norm;
        r.error_estimate *= norm;
        const std::string tag = cut.name();
        rep.add_check(tag + "/value_vs_a0", std::abs(r.value - a0), kPropOscTol * (1.0 + std::abs(a0)),
                      {{"value", {r.value.real(), r.value.imag()}},
                       {"a0", {a0.real(), a0.imag()}},
                       {"error_estimate", r.error_estimate}});
        rep.add_flag(tag + "/converged", !r.diverged, {{"diagnostic", r.diagnostic}});
        results.push_back(std::move(r));
    }
    rep.add_check("cutoff_independence", std::abs(results[0].value - results[1].value),
                  2.0 * (results[0].error_estimate + results[1].error_estimate));
    return rep;
}

inline constexpr double kLemmaOscTol = 1e-4;

/// n = 1: (2 pi)^{-1} int int e^{-i s xi} rho_k(xi) e^{i s m} ds dxi = rho_k(m)
/// for every mode k of the symbol, compared with eval(sym, m).
inline VerificationReport verify_lemma_opn_integral(const Symbol &sym, const MultiIndex &m,
                                                    const CutoffFamily &cutoff = {},
                                                    const std::vector<double> &eps_schedule = default_eps_schedule(),
                                                    const OscQuadrature &quad = {}) {
    if (sym.dim() != 1 || m.size() != 1)
        throw contract_error("verify_lemma_opn_integral: only n = 1 is supported");
    VerificationReport rep;
    rep.suite = "lemma-osc";
    rep.parameters = {{"m", m}, {"cutoff", cutoff.name()}};
    const Point pm = to_point(m);
    const TorusElement expected = sym.eval(pm);
    std::vector<Term> terms;
    bool converged = true;
    double err = 0.0;
    for (const auto &k : sym.mode_support(pm)) {
        Amplitude a = [&sym, k](std::span<const double> y) { return sym.eval(y).coeff(k); };
        OscResult r = pairing_integral(a, pm, cutoff, eps_schedule, quad);
        converged = converged && !r.diverged;
        err = std::max(err, r.error_estimate / (2.0 * std::numbers::pi));
        terms.push_back({k, r.value / (2.0 * std::numbers::pi)});
    }
    const TorusElement computed(sym.theta(), std::move(terms));
    const double diff = norm0(computed - expected);
    rep.add_check("integral_vs_eval", diff, kLemmaOscTol * std::max(1.0, norm0(expected)),
                  {{"error_estimate", err}});
    rep.add_flag("converged", converged);
    return rep;
}

} // namespace nct
