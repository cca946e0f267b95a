#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <functional>
#include <map>

#include "nct/torus_element.hpp"

namespace nct {

/// Row/column index of modes in the truncated basis {U^k : |k_j| <= box}.
class ModeBox {
  public:
    ModeBox(int n, int box) : n_(n), box_(box), modes_(box_modes(n, box)) {}

    int dim() const noexcept { return n_; }
    int box() const noexcept { return box_; }
    std::size_t size() const noexcept { return modes_.size(); }
    const MultiIndex &mode(std::size_t i) const { return modes_[i]; }
    const std::vector<MultiIndex> &modes() const noexcept { return modes_; }

    bool contains(const MultiIndex &m) const {
        for (int v : m)
            if (std::abs(v) > box_)
                return false;
        return true;
    }

    /// Lexicographic position of m; m must be inside the box.
    std::size_t index(const MultiIndex &m) const {
        std::size_t idx = 0;
        const std::size_t side = std::size_t(2 * box_ + 1);
        for (int v : m)
            idx = idx * side + std::size_t(v + box_);
        return idx;
    }

    /// Modes at least `margin` away from the boundary in every coordinate.
    bool interior(const MultiIndex &m, int margin) const {
        for (int v : m)
            if (std::abs(v) > box_ - margin)
                return false;
        return true;
    }

  private:
    int n_;
    int box_;
    std::vector<MultiIndex> modes_;
};

/// Matrix of x -> a x restricted to the span of {U^k : |k_j| <= box}:
/// entry (p, k) is the U^p coefficient of a U^k, i.e. a_{p-k} w(p-k, k).
inline Eigen::MatrixXcd gns_matrix(const TorusElement &a, int box) {
    if (box < 0)
        throw contract_error("gns_matrix: box must be nonnegative");
    const ModeBox basis(a.dim(), box);
    const std::size_t N = basis.size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(Eigen::Index(N), Eigen::Index(N));
    MultiIndex p(a.dim());
    for (std::size_t col = 0; col < N; ++col) {
        const MultiIndex &k = basis.mode(col);
        for (const auto &t : a.terms()) {
            for (int j = 0; j < a.dim(); ++j)
                p[j] = t.mode[j] + k[j];
            if (!basis.contains(p))
                continue;
            M(Eigen::Index(basis.index(p)), Eigen::Index(col)) +=
                t.coeff * unit_phase(phase_exponent(t.mode, k, a.theta()));
        }
    }
    return M;
}

struct CStarBounds {
    double lower = 0.0;    ///< ||a||_0
    double upper = 0.0;    ///< sum_m |a_m|
    double estimate = 0.0; ///< largest singular value of the truncated matrix
    int box = 0;
    bool truncated = false; ///< box smaller than the support radius of a
};

inline double largest_singular_value(const Eigen::MatrixXcd &M) {
    if (M.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Sandwich for the C* norm: ||a||_0 <= estimate <= sum |a_m|. The estimate
/// is nondecreasing in box and is reported alongside it.
inline CStarBounds cstar_norm_bounds(const TorusElement &a, int box) {
    CStarBounds b;
    b.box = box;
    if (a.is_zero())
        return b;
    b.lower = norm0(a);
    b.upper = l1_norm(a);
    b.truncated = box < a.support_radius();
    b.estimate = largest_singular_value(gns_matrix(a, box));
    return b;
}

/// Matrix of a linear map on the span of {U^k : |k_j| <= box}: column k holds
/// the coefficients of op(U^k) at the modes of the box (others dropped).
inline Eigen::MatrixXcd operator_matrix(const std::function<TorusElement(const TorusElement &)> &op,
                                        const Theta &theta, int box) {
    const ModeBox basis(theta.dim(), box);
    const auto N = Eigen::Index(basis.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const TorusElement img = op(TorusElement::monomial(theta, basis.mode(col)));
        for (const auto &t : img.terms())
            if (basis.contains(t.mode))
                M(Eigen::Index(basis.index(t.mode)), Eigen::Index(col)) = t.coeff;
    }
    return M;
}

/// Element sum_p v_p U^p over the modes of the box.
inline TorusElement element_from_column(const Eigen::VectorXcd &v, const Theta &theta, int box) {
    const ModeBox basis(theta.dim(), box);
    std::vector<Term> terms;
    for (std::size_t i = 0; i < basis.size(); ++i)
        terms.push_back({basis.mode(i), v(Eigen::Index(i))});
    return TorusElement(theta, std::move(terms));
}

} // namespace nct
