#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nct/calculus.hpp"
#include "nct/gns.hpp"
#include "nct/module.hpp"
#include "nct/oscillatory.hpp"
#include "nct/random.hpp"
#include "nct/report.hpp"
#include "nct/sobolev.hpp"
#include "nct/symbol.hpp"

namespace nct {

/// Bad command-line or configuration values.
class usage_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::uint64_t seed = 42;
    int box = 3;
    int trials = 100;
    double tol = 1e-10;
    std::vector<double> radii{4, 8, 16, 32};
    std::string report_path;
    std::string format = "json";

    void validate() const {
        if (box < 1)
            throw usage_error("box must be at least 1 (got " + std::to_string(box) + ")");
        if (trials < 1)
            throw usage_error("trials must be at least 1");
        if (!(tol > 0.0))
            throw usage_error("tol must be positive");
        if (radii.size() < 4)
            throw usage_error("radii: need at least 4 values");
        for (std::size_t i = 1; i < radii.size(); ++i)
            if (!(radii[i] > radii[i - 1]) || !(radii[0] > 0.0))
                throw usage_error("radii must be positive and increasing");
        if (radii.back() < 4.0 * radii.front())
            throw usage_error("radii: largest must be at least 4x the smallest");
        if (format != "json" && format != "csv" && format != "md")
            throw usage_error("format must be json, csv or md");
    }

    json to_json() const {
        return {{"seed", seed}, {"box", box}, {"trials", trials}, {"tol", tol}, {"radii", radii}};
    }
};

/// Applies NCT_SEED and NCT_BOX on top of the defaults; flags override later.
inline void apply_environment(RunConfig &cfg) {
    if (const char *s = std::getenv("NCT_SEED")) {
        try {
            cfg.seed = std::stoull(s);
        } catch (const std::exception &) {
            throw usage_error(std::string("NCT_SEED is not an unsigned integer: ") + s);
        }
    }
    if (const char *b = std::getenv("NCT_BOX")) {
        try {
            cfg.box = std::stoi(b);
        } catch (const std::exception &) {
            throw usage_error(std::string("NCT_BOX is not an integer: ") + b);
        }
    }
}

namespace detail {

inline Rng suite_rng(std::uint64_t seed, std::uint32_t salt) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), salt};
    return Rng(seq);
}

/// ||diff|| / max(1, ||reference||)
inline double rel(double diff, double reference) { return diff / std::max(1.0, reference); }

struct Worst {
    double value = 0.0;
    void operator()(double v) {
        if (!(v <= value))
            value = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }
};

inline std::vector<double> range_points(const MultiIndex &m) { return to_point(m); }

} // namespace detail

/// Algebra axioms on random elements, n cycling through 1, 2, 3.
inline VerificationReport core_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 1);
    VerificationReport rep;
    rep.suite = "core";
    detail::Worst assoc, anti, invol, tr, leib, coc, gen, inn, adj, pos, tr_alpha, tr_delta, alpha_grp, alpha_aut,
        alpha_iso, delta_comm, delta_star, gns;
    std::uniform_real_distribution<double> us(-3.0, 3.0);
    for (int t = 0; t < cfg.trials; ++t) {
        const int n = 1 + t % 3;
        const int eb = std::min(cfg.box, n == 3 ? 2 : 3);
        const Theta theta = random_theta(rng, n);
        const TorusElement a = random_element(rng, theta, eb);
        const TorusElement b = random_element(rng, theta, eb);
        const TorusElement c = random_element(rng, theta, eb);
        const double na = norm0(a), nb = norm0(b), nc = norm0(c);

        assoc(norm0(mul(mul(a, b), c) - mul(a, mul(b, c))) / std::max(1.0, na * nb * nc));
        const TorusElement ab = mul(a, b);
        anti(norm0(star(ab) - mul(star(b), star(a))) / std::max(1.0, na * nb));
        invol(norm0(star(star(a)) - a) / std::max(1.0, na));
        tr(std::abs(trace(ab) - trace(mul(b, a))) / std::max(1.0, na * nb));
        for (int j = 0; j < n; ++j) {
            const TorusElement lhs = delta_j(j, ab);
            const TorusElement rhs = mul(delta_j(j, a), b) + mul(a, delta_j(j, b));
            leib(detail::rel(norm0(lhs - rhs), norm0(rhs)));
            tr_delta(std::abs(trace(delta_j(j, a))));
            delta_star(detail::rel(norm0(delta_j(j, star(a)) + star(delta_j(j, a))), na));
            for (int k = 0; k < n; ++k)
                delta_comm(norm0(delta_j(j, delta_j(k, a)) - delta_j(k, delta_j(j, a))));
        }
        for (int q = 0; q < 4; ++q) {
            const MultiIndex m = random_mode(rng, n, eb), k = random_mode(rng, n, eb), p = random_mode(rng, n, eb);
            MultiIndex mk(m), kp(k);
            for (int j = 0; j < n; ++j) {
                mk[j] += k[j];
                kp[j] += p[j];
            }
            const Complex lhs = normal_phase(m, k, theta).value * normal_phase(mk, p, theta).value;
            const Complex rhs = normal_phase(k, p, theta).value * normal_phase(m, kp, theta).value;
            coc(std::abs(lhs - rhs));
        }
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                const TorusElement uj = TorusElement::generator(theta, j), uk = TorusElement::generator(theta, k);
                gen(norm0(mul(uk, uj) - unit_phase(theta(j, k)) * mul(uj, uk)));
            }
        inn(detail::rel(std::abs(inner(a, b) - trace(mul(star(b), a))), na * nb));
        adj(detail::rel(std::abs(inner(ab, c) - inner(b, mul(star(a), c))), norm0(ab) * nc));
        const Complex ta = trace(mul(star(a), a));
        pos(std::max(0.0, -ta.real()) + std::abs(ta.imag()) / std::max(1.0, na * na));
        std::vector<double> s(static_cast<std::size_t>(n)), s2(s), ssum(s);
        for (int j = 0; j < n; ++j) {
            s[j] = us(rng);
            s2[j] = us(rng);
            ssum[j] = s[j] + s2[j];
        }
        tr_alpha(std::abs(trace(alpha(s, a)) - trace(a)));
        alpha_grp(detail::rel(norm0(alpha(s, alpha(s2, a)) - alpha(ssum, a)), na));
        alpha_aut(detail::rel(norm0(alpha(s, ab) - mul(alpha(s, a), alpha(s, b))), norm0(ab)) +
                  detail::rel(norm0(alpha(s, star(a)) - star(alpha(s, a))), na));
        alpha_iso(std::abs(norm0(alpha(s, a)) - na) / std::max(1.0, na));
        if (t % 4 == 0) {
            const TorusElement small = random_element(rng, theta, 1);
            const CStarBounds bb = cstar_norm_bounds(small, n == 3 ? 2 : 3);
            gns(std::max(bb.lower - bb.estimate, bb.estimate - bb.upper) / std::max(1.0, bb.upper));
        }
    }
    const double tol = cfg.tol;
    rep.add_check("associativity", assoc.value, tol);
    rep.add_check("star_antihomomorphism", anti.value, tol);
    rep.add_check("star_involution", invol.value, tol);
    rep.add_check("trace_property", tr.value, tol);
    rep.add_check("leibniz", leib.value, tol);
    rep.add_check("cocycle_identity", coc.value, 1e-12);
    rep.add_check("generator_relation", gen.value, 1e-12);
    rep.add_check("inner_equals_trace", inn.value, tol);
    rep.add_check("left_multiplication_adjoint", adj.value, tol);
    rep.add_check("trace_positivity", pos.value, tol);
    rep.add_check("trace_alpha_invariance", tr_alpha.value, tol);
    rep.add_check("trace_delta_vanishes", tr_delta.value, tol);
    rep.add_check("alpha_group_action", alpha_grp.value, tol);
    rep.add_check("alpha_star_automorphism", alpha_aut.value, tol);
    rep.add_check("alpha_isometry", alpha_iso.value, tol);
    rep.add_check("delta_commute", delta_comm.value, tol);
    rep.add_check("delta_star_sign", delta_star.value, tol);
    rep.add_check("gns_sandwich", gns.value, tol);
    return rep;
}

/// Symbol families: order verification, FD consistency, derivative/delta commutation.
inline VerificationReport symbols_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 2);
    VerificationReport rep;
    rep.suite = "symbols";
    const Theta theta2 = random_theta(rng, 2);
    const Theta theta1(1);
    const auto grid2 = default_symbol_grid(2, {1, 2, 4, 8, 16, 32}, cfg.seed);
    const auto grid1 = default_symbol_grid(1, {1, 2, 4, 8, 16, 32}, cfg.seed);

    for (double d : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        VerificationReport r = verify_order(lambda_symbol(theta2, d), grid2, 2, 2);
        r.suite = "lambda_order_" + std::to_string(int(d));
        if (d >= 0.0) {
            const double c = estimate_order_constant(lambda_symbol(theta2, d), grid2, 2, 0).c_rho;
            r.add_check("C_rho_equals_one", std::abs(c - 1.0), 1e-12, {{"C_rho", c}});
        }
        rep.merge(r);
    }
    {
        VerificationReport r = verify_order(Symbol(PolynomialSymbol(theta2)), grid2, 2, 2);
        r.suite = "zero_symbol_order";
        r.add_check("C_rho_zero", measured_c_rho(r), 0.0);
        rep.merge(r);
    }
    {
        PolynomialSymbol p(theta1);
        p.add_term({1}, TorusElement::generator(theta1, 0));
        p.set_order(0.0);
        const VerificationReport r = verify_order(p, grid1, 2, 2);
        rep.add_flag("detects_wrong_declared_order", !r.passed(),
                     {{"growth_slope", r.find("growth_slope")->measured}});
    }
    detail::Worst poly_order_ok;
    for (int t = 0; t < 3; ++t) {
        const PolynomialSymbol p = random_polynomial_symbol(rng, theta2, 1 + t);
        const VerificationReport r = verify_order(p, grid2, 2, 2);
        poly_order_ok(r.passed() ? 0.0 : 1.0);
    }
    rep.add_check("random_polynomial_order", poly_order_ok.value, 0.0);

    // FD consistency of exact derivatives for every shipped family
    std::vector<Symbol> fams{Symbol(random_polynomial_symbol(rng, theta2, 3)), lambda_symbol(theta2, 1.5),
                             Symbol(LambdaSymbol(theta2, -1.0, random_element(rng, theta2, 1))),
                             lambda_symbol(theta2, -2.0)};
    detail::Worst fd, dd, bound;
    for (const auto &sym : fams) {
        CallbackSymbol cb;
        cb.theta = sym.theta();
        cb.order = sym.order();
        cb.fn = [sym](std::span<const double> x) { return sym.eval(x); };
        const Symbol fdsym(cb);
        const double c_rho = estimate_order_constant(sym, grid2, 0, 0).c_rho;
        for (const auto &xi : grid2) {
            const double r = euclidean_norm(xi);
            if (r <= 8.0)
                for (const auto &l : multi_indices_up_to(2, 2)) {
                    const double w = std::pow(1.0 + r, sym.order() - total_degree(l));
                    fd(norm0(sym.deriv(l, xi) - fdsym.deriv(l, xi)) / w);
                }
            bound(norm0(sym.eval(xi)) - c_rho * std::pow(1.0 + r, sym.order()) * (1.0 + 1e-12));
        }
    }
    rep.add_check("fd_consistency", fd.value, 1e-6);
    rep.add_check("value_norm_bound", bound.value, 0.0);

    // d^l then delta^i equals delta^i then d^l, coefficientwise
    const PolynomialSymbol p = random_polynomial_symbol(rng, theta2, 3);
    for (const auto &i : multi_indices_up_to(2, 2)) {
        PolynomialSymbol dp(theta2);
        for (const auto &[e, c] : p.terms())
            dp.add_term(e, delta(i, c));
        for (int q = 0; q < 5; ++q) {
            const Point xi{std::uniform_real_distribution<double>(-4, 4)(rng),
                           std::uniform_real_distribution<double>(-4, 4)(rng)};
            for (const auto &l : multi_indices_up_to(2, 3)) {
                const TorusElement lhs = delta(i, p.deriv(l, xi));
                dd(detail::rel(norm0(lhs - dp.deriv(l, xi)), norm0(lhs)));
            }
        }
    }
    rep.add_check("deriv_delta_commute", dd.value, 1e-12);

    bool threw = false;
    try {
        CallbackSymbol cb;
        cb.theta = theta1;
        cb.fn = [&](std::span<const double>) { return TorusElement::one(theta1); };
        (void)Symbol(cb).deriv({5}, Point{0.0});
    } catch (const unsupported_order &) {
        threw = true;
    }
    rep.add_flag("fd_order_limit_enforced", threw);
    return rep;
}

/// Shell points used by the pdo suite for exactness sweeps.
inline std::vector<MultiIndex> random_points(Rng &rng, int n, int count, int box) {
    std::vector<MultiIndex> pts;
    for (int i = 0; i < count; ++i)
        pts.push_back(random_mode(rng, n, box));
    return pts;
}

inline Symbol lambda_times(const Theta &theta, double s, const TorusElement &c) { return LambdaSymbol(theta, s, c); }

struct SlopeCase {
    std::string name;
    SlopeFit fit;
    double expected = 0.0;
};

inline void add_slope_check(VerificationReport &rep, const SlopeCase &c) {
    json details{{"exact", c.fit.exact}, {"expected", c.expected}, {"radii", c.fit.radii},
                 {"residuals", c.fit.residuals}};
    if (c.fit.exact) {
        rep.add_check(c.name, -std::numeric_limits<double>::max(), c.expected + 0.3, details);
        rep.checks.back().measured = 0.0;
        rep.checks.back().margin = 0.0;
        rep.checks.back().passed = true;
        rep.checks.back().details["note"] = "exact: all residuals below 1e-13";
        return;
    }
    details["slope"] = c.fit.slope;
    rep.add_check(c.name, c.fit.slope, c.expected + 0.3, details);
}

/// Operator action, adjoint/composition oracles and expansions, remainder orders.
inline VerificationReport pdo_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 3);
    VerificationReport rep;
    rep.suite = "pdo";
    const double tol = cfg.tol;
    const int pb = std::min(cfg.box, 3);
    detail::Worst lemma, sym_of_op, adj_exact, adj_gns, duality, comp_exact, assoc;
    const int symbol_trials = std::max(1, cfg.trials / 2);
    for (int t = 0; t < symbol_trials; ++t) {
        const int n = 1 + t % 2;
        const Theta theta = random_theta(rng, n);
        const int deg = t % 4;
        const Symbol sym = random_polynomial_symbol(rng, theta, deg);
        const auto pts = random_points(rng, n, 20, 6);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const MultiIndex &m = pts[q];
            const Point xi = to_point(m);
            const TorusElement um = TorusElement::monomial(theta, m);
            const TorusElement direct = mul(sym.eval(xi), um);
            lemma(detail::rel(norm0(apply(sym, um) - direct), norm0(direct)));
            const TorusElement so =
                symbol_of_operator([&](const TorusElement &a) { return apply(sym, a); }, m, theta);
            sym_of_op(detail::rel(norm0(so - sym.eval(xi)), norm0(so)));
            const TorusElement oracle = adjoint_oracle(sym, xi);
            adj_exact(detail::rel(norm0(adjoint_expansion(sym, xi, 4).value - oracle), norm0(oracle)));
        }
        // conjugate transpose of the truncated matrix, interior modes only
        if (t < 8) {
            const int box = n == 1 ? 8 : 4;
            for (const auto &m : random_points(rng, n, 3, box - 2)) {
                const TorusElement oracle = adjoint_oracle(sym, to_point(m));
                adj_gns(detail::rel(norm0(adjoint_gns_oracle(sym, m, box) - oracle), norm0(oracle)));
            }
        }
        const Symbol adj = adjoint_symbol(sym);
        for (int q = 0; q < 3; ++q) {
            const TorusElement a = random_element(rng, theta, pb), b = random_element(rng, theta, pb);
            const TorusElement pa = apply(sym, a);
            duality(detail::rel(std::abs(inner(pa, b) - inner(a, apply(adj, b))), norm0(pa) * norm0(b)));
        }
        const Symbol phi = random_polynomial_symbol(rng, theta, (t + 1) % 4);
        for (const auto &m : random_points(rng, n, 20, 6)) {
            const TorusElement oracle = compose_oracle(phi, sym, m);
            comp_exact(detail::rel(norm0(compose_expansion(phi, sym, to_point(m), 4).value - oracle), norm0(oracle)));
        }
        if (t < 6) {
            const Symbol psi = random_polynomial_symbol(rng, theta, 1);
            const Symbol rho = random_polynomial_symbol(rng, theta, 2);
            const Symbol left = composition_symbol(phi, psi);
            const Symbol right = composition_symbol(psi, rho);
            for (const auto &m : random_points(rng, n, 4, 4)) {
                const TorusElement x = compose_oracle(phi, right, m);
                assoc(detail::rel(norm0(x - compose_oracle(left, rho, m)), norm0(x)));
            }
        }
    }
    rep.add_check("lemma_operator_action", lemma.value, 1e-12);
    rep.add_check("symbol_of_operator", sym_of_op.value, 1e-12);
    rep.add_check("adjoint_exactness", adj_exact.value, tol);
    rep.add_check("adjoint_vs_gns_transpose", adj_gns.value, tol);
    rep.add_check("adjoint_duality", duality.value, 1e-9);
    rep.add_check("compose_exactness", comp_exact.value, tol);
    rep.add_check("compose_associativity", assoc.value, 1e-9);

    // worked examples
    {
        const Theta th(1);
        PolynomialSymbol p(th);
        p.add_term({1}, TorusElement::generator(th, 0));
        detail::Worst ex;
        for (int m = -3; m <= 3; ++m) {
            const Point xi{double(m) + 0.25};
            const TorusElement expected = (xi[0] - 1.0) * TorusElement::generator(th, 0, -1);
            ex(norm0(adjoint_oracle(p, xi) - expected));
            ex(norm0(adjoint_expansion(p, xi, 2).value - expected));
            const Symbol phi = [&] {
                PolynomialSymbol q(th);
                q.add_term({1}, TorusElement::one(th));
                return Symbol(q);
            }();
            const Symbol u1 = constant_symbol(TorusElement::generator(th, 0));
            ex(norm0(compose_oracle(phi, u1, {m}) - double(m + 1) * TorusElement::generator(th, 0)));
        }
        rep.add_check("worked_examples", ex.value, 1e-12);
    }

    // remainder orders, n = 1
    {
        const Theta th(1);
        const TorusElement u1 = TorusElement::generator(th, 0);
        const Symbol lm2 = lambda_symbol(th, -2.0);
        const Symbol lm2u = lambda_times(th, -2.0, u1);
        const Symbol lm1 = lambda_symbol(th, -1.0);
        const Symbol lm1u = lambda_times(th, -1.0, u1);
        for (int N = 1; N <= 3; ++N) {
            add_slope_check(rep, {"adjoint_remainder_lambda-2_N" + std::to_string(N),
                                  remainder_order_fit(lm2, N, cfg.radii), -2.0 - N});
            add_slope_check(rep, {"adjoint_remainder_lambda-2U1_N" + std::to_string(N),
                                  remainder_order_fit(lm2u, N, cfg.radii), -2.0 - N});
            add_slope_check(rep, {"compose_remainder_lambda-1_lambda-1U1_N" + std::to_string(N),
                                  remainder_order_fit(ExpansionKind::compose, lm1, lm1u, N, cfg.radii), -2.0 - N});
        }
    }

    // Taylor remainder identity
    {
        detail::Worst tay;
        bool converged = true;
        const Theta th(1);
        const Symbol l2 = lambda_symbol(th, 2.0);
        const TaylorRemainder r = taylor_remainder(l2, {1}, Point{0.0}, Point{1.0});
        converged = converged && r.converged;
        tay(norm0(r.value - TorusElement::one(th)));
        const Symbol l1 = lambda_symbol(th, 1.0);
        tay(norm0(taylor_reconstruction(l1, 2, Point{3.0}, Point{0.5}) - l1.eval(Point{3.5})));
        const Theta th2 = random_theta(rng, 2);
        const Symbol ls = LambdaSymbol(th2, -1.5, random_element(rng, th2, 1));
        for (int N1 = 1; N1 <= 3; ++N1) {
            const Point xi{1.0, -2.0}, y{0.7, 0.4};
            Point xy{xi[0] + y[0], xi[1] + y[1]};
            const TorusElement target = ls.eval(xy);
            tay(detail::rel(norm0(taylor_reconstruction(ls, N1, xi, y) - target), norm0(target)));
            for (const auto &l : multi_indices_of_degree(2, N1))
                converged = converged && taylor_remainder(ls, l, xi, y).converged;
        }
        rep.add_check("taylor_identity", tay.value, 1e-8);
        rep.add_flag("taylor_quadrature_converged", converged);
    }

    // (-i d_x)^l alpha_x(a) = delta^l alpha_x(a) under finite differences
    {
        detail::Worst dv;
        const Theta th = random_theta(rng, 2);
        const TorusElement a = random_element(rng, th, 2);
        CallbackSymbol cb;
        cb.theta = th;
        cb.fn = [a](std::span<const double> x) { return alpha(x, a); };
        const Symbol orbit(cb);
        for (const auto &l : multi_indices_up_to(2, 2)) {
            const Point x{0.3, -0.8};
            const Complex f = std::pow(Complex(0.0, -1.0), total_degree(l));
            const TorusElement rhs = delta(l, alpha(x, a));
            dv(detail::rel(norm0(f * orbit.deriv(l, x) - rhs), norm0(rhs)));
        }
        rep.add_check("derivation_intertwining_fd", dv.value, 1e-6);
    }
    return rep;
}

/// Closed form (pi/2)(coth pi + pi / sinh^2 pi) of sum_m (1+m^2)^{-2}.
inline double embedding_closed_form_s2_n1() {
    const double pi = std::numbers::pi;
    return 0.5 * pi * (std::cosh(pi) / std::sinh(pi) + pi / (std::sinh(pi) * std::sinh(pi)));
}

/// 64-term sequence with escaping modes and ||a_N||_2 = 1 (n = 2).
inline std::vector<TorusElement> escaping_sequence(const Theta &theta, std::size_t length = 64) {
    std::vector<TorusElement> seq;
    for (std::size_t N = 0; N < length; ++N) {
        const MultiIndex m{int(N / 2), int(N % 5) - 2};
        seq.push_back(TorusElement::monomial(theta, m, 1.0 / (1.0 + mode_norm2(m))));
    }
    return seq;
}

/// Sobolev norms, norm shift, boundedness constants, embedding, Rellich.
inline VerificationReport sobolev_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 4);
    VerificationReport rep;
    rep.suite = "sobolev";
    const int eb = std::min(cfg.box, 3);
    std::uniform_real_distribution<double> ur(-3.0, 3.0);
    detail::Worst coh, mono, shift;
    for (int t = 0; t < cfg.trials; ++t) {
        const int n = 1 + t % 2;
        const Theta theta = random_theta(rng, n);
        const TorusElement a = random_element(rng, theta, eb), b = random_element(rng, theta, eb);
        const double s = ur(rng), tt = ur(rng);
        const Symbol ls = lambda_symbol(theta, s);
        const Complex lhs = sobolev_inner(a, b, s);
        coh(detail::rel(std::abs(lhs - inner(apply(ls, a), apply(ls, b))), std::abs(lhs)));
        const double s2 = s + std::abs(ur(rng));
        mono(std::max(0.0, sobolev_norm(a, s) - sobolev_norm(a, s2)));
        shift(norm_shift_check(a, s, tt) / std::max(1e-300, sobolev_norm(a, s)));
    }
    rep.add_check("inner_coherence", coh.value, 1e-12);
    rep.add_check("norm_monotone_in_s", mono.value, 0.0);
    rep.add_check("norm_shift", shift.value, cfg.tol);

    // boundedness: lambda^d and random order-d symbols at s = d
    const Theta theta2 = random_theta(rng, 2);
    const auto grid2 = default_symbol_grid(2, {1, 2, 4, 8, 16, 32}, cfg.seed);
    for (int d = 0; d <= 2; ++d) {
        std::vector<std::pair<std::string, Symbol>> syms{{"lambda", lambda_symbol(theta2, d)}};
        for (int k = 0; k < 3; ++k)
            syms.emplace_back("random" + std::to_string(k), Symbol(random_polynomial_symbol(rng, theta2, d)));
        for (const auto &[name, sym] : syms) {
            const double c = measured_c_rho(verify_order(sym, grid2, 2, 2));
            VerificationReport r = boundedness_check(sym, c, cfg.trials, double(d), rng, eb);
            r.suite = "boundedness_d" + std::to_string(d) + "_" + name;
            rep.merge(r);
        }
    }
    {
        const Theta th(1);
        const Symbol sym = lambda_times(th, 1.0, TorusElement::generator(th, 0));
        const double c = measured_c_rho(verify_order(sym, default_symbol_grid(1, {1, 2, 4, 8, 16, 32}, cfg.seed), 2, 2));
        VerificationReport r = boundedness_check(sym, c, cfg.trials, 1.0, rng, eb);
        r.suite = "boundedness_lambdaU1";
        rep.merge(r);
    }

    // embedding chain ||a||_0 <= GNS estimate <= l1 <= C ||a||_s, 2s > n
    detail::Worst chain, ck;
    for (int t = 0; t < cfg.trials; ++t) {
        const int n = 1 + t % 2;
        const Theta theta = random_theta(rng, n);
        const double s = 0.5 * n + 0.25 + std::abs(ur(rng)) / 2.0;
        const TorusElement a = random_element(rng, theta, n == 1 ? eb : std::min(eb, 2));
        const CStarBounds bb = cstar_norm_bounds(a, a.support_radius() + 1);
        const double C = embedding_constant(s, n);
        const double scale = std::max(1.0, bb.upper);
        chain(std::max({bb.lower - bb.estimate, bb.estimate - bb.upper, bb.upper - C * sobolev_norm(a, s)}) / scale);
        if (t % 5 == 0) {
            const CkBounds kb = ck_norm_bounds(a, 1, a.support_radius() + 1);
            const double Ck = ck_embedding_constant(s + 1.0, 1, n);
            ck(std::max({kb.lower - kb.estimate, kb.estimate - kb.upper, kb.upper - Ck * sobolev_norm(a, s + 1.0)}) /
               std::max(1.0, kb.upper));
        }
    }
    rep.add_check("embedding_chain", chain.value, 1e-10);
    rep.add_check("ck_embedding_chain", ck.value, 1e-10);
    {
        const double c2 = embedding_constant_squared(2.0, 1);
        rep.add_check("embedding_constant_s2_n1", std::abs(c2 - embedding_closed_form_s2_n1()), 1e-3,
                      {{"C_squared", c2}, {"closed_form", embedding_closed_form_s2_n1()}});
        bool threw = false;
        try {
            (void)embedding_constant(1.0, 2);
        } catch (const divergence_error &) {
            threw = true;
        }
        rep.add_flag("embedding_divergence_rejected", threw);
    }

    // Rellich extraction
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto seq = escaping_sequence(theta2);
        const RellichResult r = rellich_extract(seq, 2.0, 0.0, 1.0, 0.01);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rep.add_check("rellich_pair_distance", r.max_pair_distance2, 0.01,
                      {{"selected", r.indices.size()}, {"radius", r.radius}, {"clusters", r.clusters}});
        rep.add_flag("rellich_certified_subsequence", r.certified && r.indices.size() >= 2);
        rep.add_check("rellich_runtime_s", ms / 1000.0 > 5.0 ? 1.0 : 0.0, 0.0);
    }
    return rep;
}

/// Matrix-valued symbols over r x r matrices of the algebra.
inline VerificationReport module_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 5);
    VerificationReport rep;
    rep.suite = "module";
    const Theta theta = random_theta(rng, 2);
    const TorusElement one = TorusElement::one(theta), zero(theta);
    const TorusElement u1 = TorusElement::generator(theta, 0), u2 = TorusElement::generator(theta, 1);
    const int eb = std::min(cfg.box, 2);

    const MatrixElement p10 = MatrixElement::diagonal(theta, {one, zero});
    const MatrixElement u = MatrixElement::diagonal(theta, {u1, u2});
    const MatrixElement conj = mul(mul(u, p10), star(u));
    const MatrixElement half(theta, 2, {0.5 * one, 0.5 * u1, 0.5 * star(u1), 0.5 * one});
    const MatrixElement notidem = MatrixElement::diagonal(theta, {u1, zero});
    rep.add_flag("idempotent_diag", idempotent_check(p10, 1e-12));
    rep.add_flag("idempotent_conjugated", idempotent_check(conj, 1e-12));
    rep.add_flag("idempotent_nontrivial", idempotent_check(half, 1e-12));
    rep.add_flag("non_idempotent_rejected", !idempotent_check(notidem, 1e-12));

    detail::Worst mstar, parity, coh;
    for (int t = 0; t < std::max(1, cfg.trials / 5); ++t) {
        std::vector<TorusElement> ea, ebv;
        for (int q = 0; q < 4; ++q) {
            ea.push_back(random_element(rng, theta, 1));
            ebv.push_back(random_element(rng, theta, 1));
        }
        const MatrixElement A(theta, 2, ea), B(theta, 2, ebv);
        mstar(max_entry_norm0(star(mul(A, B)) - mul(star(B), star(A))) / std::max(1.0, max_entry_norm0(mul(A, B))));
        mstar(max_entry_norm0(star(star(A)) - A));

        // r = 1 reduction
        const Theta th1 = random_theta(rng, 2);
        const Symbol s = random_polynomial_symbol(rng, th1, 2);
        const Symbol s2 = random_polynomial_symbol(rng, th1, 1);
        const MatrixSymbol ms(1, {s}), ms2(1, {s2});
        const TorusElement a = random_element(rng, th1, eb), b = random_element(rng, th1, eb);
        const ModuleVector va(th1, {a}), vb(th1, {b});
        parity(norm0(apply_matrix(ms, va)[0] - apply(s, a)));
        parity(std::abs(module_inner(va, vb) - inner(a, b)));
        parity(std::abs(module_inner_s(va, vb, 1.5) - sobolev_inner(a, b, 1.5)));
        const Point xi{0.5, -1.25};
        parity(norm0(matrix_adjoint_expansion(ms, xi, 3).value(0, 0) - adjoint_expansion(s, xi, 3).value));
        parity(norm0(matrix_compose_expansion(ms2, ms, xi, 3).value(0, 0) - compose_expansion(s2, s, xi, 3).value));

        const ModuleVector v = random_module_vector(rng, theta, 2, eb);
        double acc = 0.0;
        for (int j = 0; j < 2; ++j)
            acc += sobolev_norm2(v[j], 1.3);
        coh(std::abs(module_norm_s(v, 1.3) * module_norm_s(v, 1.3) - acc) / std::max(1.0, acc));
    }
    rep.add_check("matrix_star", mstar.value, cfg.tol);
    rep.add_check("r1_parity", parity.value, 1e-12);
    rep.add_check("module_norm_coherence", coh.value, 1e-12);

    // r = 2 exactness against block oracles
    detail::Worst adj_gns, adj_exact, comp;
    for (int t = 0; t < 4; ++t) {
        std::vector<Symbol> ea, eb2;
        for (int q = 0; q < 4; ++q) {
            ea.push_back(random_polynomial_symbol(rng, theta, (t + q) % 3));
            eb2.push_back(random_polynomial_symbol(rng, theta, (t + q + 1) % 3));
        }
        const MatrixSymbol A(2, ea), B(2, eb2);
        for (const auto &m : random_points(rng, 2, 2, 1)) {
            const Point xi = to_point(m);
            const MatrixElement oracle = matrix_adjoint_gns_oracle(A, m, 3);
            adj_gns(max_entry_norm0(matrix_adjoint_expansion(A, xi, 3).value - oracle) /
                    std::max(1.0, max_entry_norm0(oracle)));
        }
        for (const auto &m : random_points(rng, 2, 5, 5)) {
            const Point xi = to_point(m);
            const MatrixElement oracle = matrix_adjoint_oracle(A, xi);
            adj_exact(max_entry_norm0(matrix_adjoint_expansion(A, xi, 3).value - oracle) /
                      std::max(1.0, max_entry_norm0(oracle)));
            const MatrixElement co = matrix_compose_oracle(A, B, m);
            comp(max_entry_norm0(matrix_compose_expansion(A, B, xi, 3).value - co) /
                 std::max(1.0, max_entry_norm0(co)));
        }
    }
    rep.add_check("matrix_adjoint_vs_block_gns", adj_gns.value, cfg.tol);
    rep.add_check("matrix_adjoint_exactness", adj_exact.value, cfg.tol);
    rep.add_check("matrix_compose_exactness", comp.value, cfg.tol);

    // boundedness with K = r k_rho
    const auto grid2 = default_symbol_grid(2, {1, 2, 4, 8, 16, 32}, cfg.seed);
    for (int d = 0; d <= 2; ++d) {
        const MatrixSymbol dl = MatrixSymbol::diagonal({lambda_symbol(theta, d), lambda_symbol(theta, d)}, theta);
        VerificationReport r = module_boundedness_check(dl, matrix_c_rho(dl, grid2), cfg.trials, d, rng, eb);
        r.suite = "module_boundedness_lambda_d" + std::to_string(d);
        rep.merge(r);
    }
    {
        std::vector<TorusElement> c;
        for (int q = 0; q < 4; ++q)
            c.push_back(random_element(rng, theta, 1));
        const MatrixSymbol cs = MatrixSymbol::constant(MatrixElement(theta, 2, c));
        VerificationReport r = module_boundedness_check(cs, matrix_c_rho(cs, grid2), cfg.trials, 0.0, rng, eb);
        r.suite = "module_boundedness_random_constant";
        rep.merge(r);
    }

    // compressed symbols keep E invariant
    {
        std::vector<Symbol> es;
        for (int q = 0; q < 4; ++q)
            es.push_back(random_polynomial_symbol(rng, theta, 1));
        const MatrixSymbol compressed = compress(MatrixSymbol(2, es), half);
        detail::Worst inv;
        bool ok = true;
        for (int t = 0; t < 5; ++t) {
            const ModuleVector v = project(random_module_vector(rng, theta, 2, eb), half);
            try {
                const ModuleVector w = apply_matrix(compressed, v, half);
                inv(max_entry_norm0(project(w, half) - w));
            } catch (const contract_error &) {
                ok = false;
            }
        }
        rep.add_check("compressed_symbol_preserves_module", inv.value, cfg.tol);
        rep.add_flag("compressed_validation_accepts", ok);
    }

    // eigenbasis of a scalar idempotent
    {
        const double c = std::cos(0.7), s = std::sin(0.7);
        const Complex ph = std::polar(1.0, 0.3);
        const Complex v0 = c, v1 = s * ph;
        const MatrixElement e(theta, 2,
                              {std::norm(v0) * one, v0 * std::conj(v1) * one, v1 * std::conj(v0) * one,
                               std::norm(v1) * one});
        const auto basis = scalar_idempotent_eigenbasis(e);
        double err = basis.size() == 1 ? 0.0 : 1.0;
        for (const auto &f : basis) {
            err = std::max(err, max_entry_norm0(project(f, e) - f));
            err = std::max(err, std::abs(module_inner(f, f) - 1.0));
        }
        rep.add_check("scalar_idempotent_eigenbasis", err, 1e-12);
    }

    // module Rellich, r = 2
    {
        const auto scalar = escaping_sequence(theta);
        std::vector<ModuleVector> seq;
        for (std::size_t i = 0; i < scalar.size(); ++i)
            seq.push_back(ModuleVector(theta, {scalar[i], scalar[(i * 7 + 3) % scalar.size()]}));
        const RellichResult r = module_rellich_extract(seq, 2.0, 0.0, 1.0, 0.01);
        rep.add_check("module_rellich_pair_distance", r.max_pair_distance2, 0.01,
                      {{"selected", r.indices.size()}, {"radius", r.radius}});
        rep.add_flag("module_rellich_certified", r.certified && r.indices.size() >= 2);
    }
    return rep;
}

/// Named amplitude families for the oscillatory checks.
inline Amplitude named_amplitude(const std::string &name) {
    if (name == "gaussian")
        return [](std::span<const double> y) {
            double r2 = 0.0;
            for (double v : y)
                r2 += v * v;
            return Complex(std::exp(-r2));
        };
    if (name == "poly-gauss")
        return [](std::span<const double> y) {
            double r2 = 0.0;
            for (double v : y)
                r2 += v * v;
            return Complex((1.0 + r2) * std::exp(-r2 / 4.0));
        };
    if (name == "one")
        return [](std::span<const double>) { return Complex(1.0); };
    throw usage_error("unknown amplitude \"" + name + "\" (gaussian, poly-gauss, one)");
}

/// Gaussian-damped n = 1 symbols used for the integral form of the operator action.
inline std::vector<Symbol> gaussian_damped_symbols(Rng &rng) {
    const Theta th(1);
    std::vector<Symbol> out;
    auto make = [&](std::function<double(double)> g, TorusElement c) {
        CallbackSymbol cb;
        cb.theta = th;
        cb.fn = [g, c](std::span<const double> x) { return g(x[0]) * c; };
        for (const auto &t : c.terms())
            cb.modes.push_back(t.mode);
        return Symbol(cb);
    };
    out.push_back(make([](double x) { return std::exp(-x * x); }, TorusElement::one(th)));
    out.push_back(make([](double x) { return std::exp(-x * x); }, TorusElement::generator(th, 0)));
    out.push_back(make([](double x) { return std::exp(-0.5 * (x - 1.0) * (x - 1.0)); },
                       TorusElement::one(th) + TorusElement::generator(th, 0, -1)));
    out.push_back(make([](double x) { return (1.0 + x * x) * std::exp(-0.5 * x * x); },
                       TorusElement::generator(th, 0, 2)));
    out.push_back(make([](double x) { return std::exp(-0.25 * x * x) * std::cos(x); }, random_element(rng, th, 1)));
    return out;
}

/// Oscillatory integrals: Prop-type identities, L1 consistency, cutoff independence.
inline VerificationReport osc_suite(const RunConfig &cfg) {
    Rng rng = detail::suite_rng(cfg.seed, 6);
    VerificationReport rep;
    rep.suite = "osc";
    for (const std::string name : {"gaussian", "one", "poly-gauss"}) {
        VerificationReport r = verify_prop_osc(named_amplitude(name), 1);
        r.suite = "prop_n1_" + name;
        rep.merge(r);
    }
    {
        VerificationReport r = verify_prop_osc(named_amplitude("gaussian"), 2);
        r.suite = "prop_n2_gaussian";
        rep.merge(r);
    }
    // L1 amplitude: regularized limit equals the plain integral
    for (double Q : {0.5, 1.3}) {
        OscIntegrand f;
        f.dim = 1;
        f.Q = {Q};
        f.amplitude = named_amplitude("gaussian");
        const Complex closed = std::sqrt(Complex(std::numbers::pi, 0.0) / Complex(1.0, -Q));
        auto re = [&](double x) { return std::cos(Q * x * x) * std::exp(-x * x); };
        auto im = [&](double x) { return std::sin(Q * x * x) * std::exp(-x * x); };
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        const Complex direct(gk::integrate(re, -12.0, 12.0, 15, 1e-14), gk::integrate(im, -12.0, 12.0, 15, 1e-14));
        std::vector<OscResult> rs;
        for (auto kind : {CutoffFamily::Kind::gaussian, CutoffFamily::Kind::raised_cosine})
            rs.push_back(osc_integral(f, CutoffFamily{kind}));
        const std::string tag = "l1_Q" + std::to_string(Q).substr(0, 3);
        rep.add_check(tag + "_vs_direct", std::max(std::abs(rs[0].value - direct), std::abs(rs[1].value - direct)),
                      1e-6, {{"closed_form_gap", std::abs(direct - closed)}});
        rep.add_check(tag + "_cutoff_independence", std::abs(rs[0].value - rs[1].value),
                      2.0 * (rs[0].error_estimate + rs[1].error_estimate));
    }
    // Fresnel-type amplitude a = 1 with q = x^2: limit sqrt(pi) e^{i pi/4}
    {
        OscIntegrand f;
        f.dim = 1;
        f.Q = {1.0};
        f.amplitude = named_amplitude("one");
        const Complex expected = std::sqrt(std::numbers::pi) * std::polar(1.0, std::numbers::pi / 4.0);
        const OscResult r = osc_integral(f, CutoffFamily{CutoffFamily::Kind::gaussian});
        rep.add_check("fresnel_limit", std::abs(r.value - expected), 1e-6, {{"error_estimate", r.error_estimate}});
    }
    // integral form of the operator action, n = 1
    const auto syms = gaussian_damped_symbols(rng);
    const std::vector<MultiIndex> modes{{0}, {2}, {1}, {-1}, {3}};
    for (std::size_t i = 0; i < syms.size(); ++i) {
        VerificationReport r = verify_lemma_opn_integral(syms[i], modes[i]);
        r.suite = "lemma_integral_" + std::to_string(i);
        rep.merge(r);
    }
    return rep;
}

inline const std::vector<std::string> &suite_names() {
    static const std::vector<std::string> names{"core", "symbols", "pdo", "sobolev", "module", "osc", "all"};
    return names;
}

/// Runs a named suite; deterministic given cfg (timing aside).
inline VerificationReport run_suite(const std::string &name, const RunConfig &cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    VerificationReport rep;
    auto one = [&](const std::string &s) -> VerificationReport {
        if (s == "core")
            return core_suite(cfg);
        if (s == "symbols")
            return symbols_suite(cfg);
        if (s == "pdo")
            return pdo_suite(cfg);
        if (s == "sobolev")
            return sobolev_suite(cfg);
        if (s == "module")
            return module_suite(cfg);
        if (s == "osc")
            return osc_suite(cfg);
        throw usage_error("unknown suite \"" + s + "\" (core, symbols, pdo, sobolev, module, osc, all)");
    };
    if (name == "all") {
        rep.suite = "all";
        for (const auto &s : suite_names())
            if (s != "all")
                rep.merge(one(s));
    } else {
        rep = one(name);
    }
    rep.seed = cfg.seed;
    rep.parameters = cfg.to_json();
    rep.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline std::string format_report(const VerificationReport &rep, const std::string &format) {
    if (format == "csv")
        return to_csv(rep);
    if (format == "md")
        return to_markdown(rep);
    json j = rep;
    return j.dump(2) + "\n";
}

} // namespace nct
