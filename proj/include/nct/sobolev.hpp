#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "nct/calculus.hpp"
#include "nct/gns.hpp"
#include "nct/random.hpp"
#include "nct/report.hpp"

namespace nct {

/// Sum defining the embedding constant diverges (2s <= n).
class divergence_error : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Input data violates a stated precondition (e.g. a norm bound).
class precondition_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline double mode_norm2(const MultiIndex &m) {
    double s = 0.0;
    for (int v : m)
        s += double(v) * v;
    return s;
}

/// (1 + |m|^2)^s
inline double sobolev_weight(const MultiIndex &m, double s) { return std::pow(1.0 + mode_norm2(m), s); }

/// <a,b>_s = sum_m (1+|m|^2)^s conj(b_m) a_m
inline Complex sobolev_inner(const TorusElement &a, const TorusElement &b, double s) {
    a.require_same_theta(b, "sobolev_inner");
    Complex acc{};
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    while (ia != a.terms().end() && ib != b.terms().end()) {
        if (ia->mode < ib->mode)
            ++ia;
        else if (ib->mode < ia->mode)
            ++ib;
        else {
            acc += sobolev_weight(ia->mode, s) * std::conj(ib->coeff) * ia->coeff;
            ++ia;
            ++ib;
        }
    }
    return acc;
}

inline double sobolev_norm2(const TorusElement &a, double s) {
    double acc = 0.0;
    for (const auto &t : a.terms())
        acc += sobolev_weight(t.mode, s) * std::norm(t.coeff);
    return acc;
}

inline double sobolev_norm(const TorusElement &a, double s) { return std::sqrt(sobolev_norm2(a, s)); }

/// | ||a||_s - ||P_{lambda^t} a||_{s-t} |
inline double norm_shift_check(const TorusElement &a, double s, double t) {
    const TorusElement shifted = apply(lambda_symbol(a.theta(), t), a);
    return std::abs(sobolev_norm(a, s) - sobolev_norm(shifted, s - t));
}

/// k_rho = C_rho^2 2^d
inline double k_rho(double c_rho, double d) { return c_rho * c_rho * std::pow(2.0, d); }

/// Rigorous per-element bound on ||P_rho a||_{s-d} / ||a||_s:
/// sum_k max_{m in supp a} |rho_k(m)| (1+|m|^2)^{-d/2} * 2^{|s-d|/2} (1+|k|^2)^{|s-d|/2}.
/// Triangle inequality over the symbol's modes k plus Peetre's inequality.
inline double repaired_bound(const Symbol &sym, const TorusElement &a, double s) {
    const double d = sym.order();
    const double sigma = std::abs(s - d);
    std::map<MultiIndex, double> worst;
    for (const auto &t : a.terms()) {
        const TorusElement r = sym.eval(to_point(t.mode));
        const double w = std::pow(1.0 + mode_norm2(t.mode), -0.5 * d);
        for (const auto &rk : r.terms()) {
            double &slot = worst[rk.mode];
            slot = std::max(slot, std::abs(rk.coeff) * w);
        }
    }
    double K = 0.0;
    for (const auto &[k, v] : worst)
        K += v * std::pow(2.0 * (1.0 + mode_norm2(k)), 0.5 * sigma);
    return K;
}

struct BoundednessStats {
    double max_ratio = 0.0;
    double max_repaired_ratio = 0.0; ///< max of ratio / repaired_bound
    int violations = 0;              ///< trials with ratio > sqrt(r k_rho)
    int trials = 0;
};

/// ||P_rho a||_{s-d} <= sqrt(k_rho) ||a||_s on random elements (r = 1), plus
/// the rigorous repaired bound. `c_rho` comes from verify_order.
inline VerificationReport boundedness_check(const Symbol &sym, double c_rho, int trials, double s, Rng &rng,
                                            int box = 3) {
    const double d = sym.order();
    const double kr = k_rho(c_rho, d);
    const double bound = std::sqrt(kr);
    BoundednessStats st;
    st.trials = trials;
    for (int i = 0; i < trials; ++i) {
        const TorusElement a = random_element(rng, sym.theta(), box);
        const double na = sobolev_norm(a, s);
        if (na == 0.0)
            continue;
        const double ratio = sobolev_norm(apply(sym, a), s - d) / na;
        st.max_ratio = std::max(st.max_ratio, ratio);
        if (ratio > bound * (1.0 + 1e-12))
            ++st.violations;
        const double K = repaired_bound(sym, a, s);
        if (K > 0.0)
            st.max_repaired_ratio = std::max(st.max_repaired_ratio, ratio / K);
        else if (ratio > 0.0)
            st.max_repaired_ratio = std::numeric_limits<double>::infinity();
    }
    VerificationReport rep;
    rep.suite = "boundedness";
    rep.parameters = {{"order", d}, {"s", s}, {"trials", trials}, {"box", box}};
    rep.add_check("ratio_vs_sqrt_k_rho", st.max_ratio, bound * (1.0 + 1e-12),
                  {{"C_rho", c_rho}, {"k_rho", kr}, {"violations", st.violations}, {"trials", trials}});
    rep.add_check("ratio_vs_repaired_bound", st.max_repaired_ratio, 1.0 + 1e-12);
    return rep;
}

struct CkBounds {
    double lower = 0.0;
    double upper = 0.0;
    double estimate = 0.0;
    bool truncated = false;
};

/// ||a||_{infty,k} = sum_{|l| <= k} ||delta^l a||_{C*}, as a sandwich.
inline CkBounds ck_norm_bounds(const TorusElement &a, int k, int box) {
    if (k < 0)
        throw contract_error("ck_norm_bounds: k must be nonnegative");
    CkBounds out;
    for (const auto &l : multi_indices_up_to(a.dim(), k)) {
        const CStarBounds b = cstar_norm_bounds(delta(l, a), box);
        out.lower += b.lower;
        out.upper += b.upper;
        out.estimate += b.estimate;
        out.truncated = out.truncated || b.truncated;
    }
    return out;
}

/// Area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

/// C^2 = sum_{|m_j| <= cutoff} (1+|m|^2)^{-s} + tail, where the tail bounds
/// the remaining lattice sum by S_{n-1} (1 + c/u0)^{n-1} u0^{n-2s} / (2s-n),
/// c = sqrt(n)/2, u0 = cutoff + 1/2 - c (each point dominated by its unit cube).
inline double embedding_constant_squared(double s, int n, int cutoff = 32) {
    if (n < 1)
        throw contract_error("embedding_constant: n must be positive");
    if (!(2.0 * s > double(n)))
        throw divergence_error("embedding_constant: sum of (1+|m|^2)^{-s} diverges for 2s <= n (s = " +
                               std::to_string(s) + ", n = " + std::to_string(n) + ")");
    if (cutoff < 10)
        throw contract_error("embedding_constant: cutoff must be at least 10");
    // sum over the cube by radius^2 multiplicity, exploiting symmetry per coordinate
    std::vector<double> layer(1, 1.0); // layer[q] = number of points with |m|^2 == q
    for (int j = 0; j < n; ++j) {
        std::vector<double> next(layer.size() + std::size_t(cutoff) * cutoff, 0.0);
        for (std::size_t q = 0; q < layer.size(); ++q) {
            if (layer[q] == 0.0)
                continue;
            for (int v = -cutoff; v <= cutoff; ++v)
                next[q + std::size_t(v * v)] += layer[q];
        }
        layer = std::move(next);
    }
    double sum = 0.0;
    for (std::size_t q = layer.size(); q-- > 0;)
        if (layer[q] != 0.0)
            sum += layer[q] * std::pow(1.0 + double(q), -s);
    const double c = 0.5 * std::sqrt(double(n));
    const double u0 = cutoff + 0.5 - c;
    const double tail =
        unit_sphere_area(n) * std::pow(1.0 + c / u0, n - 1) * std::pow(u0, n - 2.0 * s) / (2.0 * s - n);
    return sum + tail;
}

/// C with sum_m |a_m| <= C ||a||_s, hence ||a||_{C*} <= C ||a||_s.
inline double embedding_constant(double s, int n, int cutoff = 32) {
    return std::sqrt(embedding_constant_squared(s, n, cutoff));
}

/// C with ||a||_{infty,k} <= C ||a||_s, via |m^l| <= (1+|m|^2)^{|l|/2}:
/// sum_{|l| <= k} embedding_constant(s - |l|, n). Requires 2(s - k) > n.
inline double ck_embedding_constant(double s, int k, int n, int cutoff = 32) {
    double C = 0.0;
    for (int L = 0; L <= k; ++L)
        C += double(multi_indices_of_degree(n, L).size()) * embedding_constant(s - L, n, cutoff);
    return C;
}

/// Threshold printed for the C^k Sobolev lemma, s > k + 1.
inline bool paper_sobolev_threshold(double s, int k) { return s > k + 1.0; }
/// Summability threshold actually needed, 2(s - k) > n.
inline bool sound_sobolev_threshold(double s, int k, int n) { return 2.0 * (s - k) > double(n); }

struct RellichResult {
    std::vector<std::size_t> indices;
    int radius = 0;                   ///< low-mode cutoff r (Euclidean)
    std::size_t low_modes = 0;        ///< lattice points with |k| <= r
    std::size_t clusters = 0;
    double max_pair_distance2 = 0.0;  ///< certified by direct summation
    bool certified = false;
    std::string diagnostic;
};

namespace detail {

/// Smallest integer r >= 0 with 4 factor C^2 (1+r^2)^{t-s} < eps / 2.
inline int rellich_radius(double C, double s, double t, double eps, double factor) {
    const double target = eps / 2.0;
    for (int r = 0; r < 1 << 20; ++r)
        if (4.0 * factor * C * C * std::pow(1.0 + double(r) * r, t - s) < target)
            return r;
    throw precondition_error("rellich: no admissible radius");
}

inline std::vector<MultiIndex> euclidean_ball(int n, int r) {
    std::vector<MultiIndex> out;
    for (auto &m : box_modes(n, r))
        if (mode_norm2(m) <= double(r) * r)
            out.push_back(std::move(m));
    return out;
}

/// Greedy net with squared radius eps/8 in input order (earliest center
/// wins), largest cluster selected (earliest on ties), then all pairs
/// certified with `dist2`.
inline RellichResult rellich_core(std::size_t L, const std::vector<std::vector<Complex>> &low,
                                  const std::function<double(std::size_t, std::size_t)> &dist2, double eps) {
    RellichResult res;
    const double r2 = eps / 8.0;
    std::vector<std::size_t> centers;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < L; ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < centers.size() && !placed; ++c) {
            double d = 0.0;
            const auto &u = low[centers[c]];
            const auto &v = low[i];
            for (std::size_t q = 0; q < u.size() && d <= r2; ++q)
                d += std::norm(u[q] - v[q]);
            if (d <= r2) {
                members[c].push_back(i);
                placed = true;
            }
        }
        if (!placed) {
            centers.push_back(i);
            members.push_back({i});
        }
    }
    res.clusters = centers.size();
    std::size_t best = 0;
    for (std::size_t c = 1; c < members.size(); ++c)
        if (members[c].size() > members[best].size())
            best = c;
    if (!members.empty())
        res.indices = members[best];
    double worst = 0.0;
    for (std::size_t a = 0; a < res.indices.size(); ++a)
        for (std::size_t b = a + 1; b < res.indices.size(); ++b)
            worst = std::max(worst, dist2(res.indices[a], res.indices[b]));
    res.max_pair_distance2 = worst;
    res.certified = worst <= eps;
    if (res.indices.size() < 2)
        res.diagnostic = "sequence too short for a guaranteed pair: every element is its own cluster";
    return res;
}

} // namespace detail

/// Constructive Rellich extraction: from a sequence with ||a_N||_s <= C,
/// returns indices whose pairwise H^t distances squared are <= eps.
inline RellichResult rellich_extract(const std::vector<TorusElement> &seq, double s, double t, double C, double eps) {
    if (!(s > t))
        throw precondition_error("rellich_extract: need s > t");
    if (!(eps > 0.0) || !(C >= 0.0))
        throw precondition_error("rellich_extract: need eps > 0 and C >= 0");
    if (seq.empty())
        return {};
    const int n = seq.front().dim();
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq[i].require_same_theta(seq.front(), "rellich_extract");
        const double ns = sobolev_norm(seq[i], s);
        if (ns > C * (1.0 + 1e-12))
            throw precondition_error("rellich_extract: element " + std::to_string(i) + " has ||a||_s = " +
                                     std::to_string(ns) + " > C = " + std::to_string(C));
    }
    const int r = detail::rellich_radius(C, s, t, eps, 1.0);
    const auto ball = detail::euclidean_ball(n, r);
    std::vector<std::vector<Complex>> low;
    low.reserve(seq.size());
    for (const auto &a : seq) {
        std::vector<Complex> v(ball.size());
        for (std::size_t q = 0; q < ball.size(); ++q)
            v[q] = std::sqrt(sobolev_weight(ball[q], t)) * a.coeff(ball[q]);
        low.push_back(std::move(v));
    }
    RellichResult res = detail::rellich_core(
        seq.size(), low, [&](std::size_t i, std::size_t j) { return sobolev_norm2(seq[i] - seq[j], t); }, eps);
    res.radius = r;
    res.low_modes = ball.size();
    return res;
}

} // namespace nct
