#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nct {

/// Raised when a caller breaks an operation's preconditions (dimension
/// mismatch, negative derivative order, mismatched deformation matrices).
class contract_error : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

using Complex = std::complex<double>;

/// Integer multi-index. Used both for Fourier modes m in Z^n and for
/// derivative orders (where every component must be nonnegative).
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex &l) {
    int s = 0;
    for (int v : l)
        s += v;
    return s;
}

/// l! = prod_j l_j!
inline double factorial(const MultiIndex &l) {
    double f = 1.0;
    for (int v : l)
        for (int i = 2; i <= v; ++i)
            f *= i;
    return f;
}

inline void require_derivative_order(const MultiIndex &l, std::size_t n, const char *where) {
    if (l.size() != n)
        throw contract_error(std::string(where) + ": derivative order has wrong length");
    for (int v : l)
        if (v < 0)
            throw contract_error(std::string(where) + ": negative derivative order");
}

/// All multi-indices of length n with nonnegative entries and |l| == degree,
/// in lexicographic order.
inline std::vector<MultiIndex> multi_indices_of_degree(int n, int degree) {
    std::vector<MultiIndex> out;
    MultiIndex cur(n, 0);
    auto rec = [&](auto &&self, int pos, int left) -> void {
        if (pos == n - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (n == 0)
        return out;
    rec(rec, 0, degree);
    std::sort(out.begin(), out.end());
    return out;
}

/// All nonnegative multi-indices with |l| <= max_degree, grouped by degree.
inline std::vector<MultiIndex> multi_indices_up_to(int n, int max_degree) {
    std::vector<MultiIndex> out;
    for (int d = 0; d <= max_degree; ++d) {
        auto level = multi_indices_of_degree(n, d);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

/// All modes m with |m_j| <= box, lexicographic.
inline std::vector<MultiIndex> box_modes(int n, int box) {
    std::vector<MultiIndex> out;
    if (n <= 0 || box < 0)
        return out;
    MultiIndex cur(n, -box);
    while (true) {
        out.push_back(cur);
        int j = n - 1;
        while (j >= 0 && cur[j] == box) {
            cur[j] = -box;
            --j;
        }
        if (j < 0)
            break;
        ++cur[j];
    }
    return out;
}

/// Skew-symmetric real n x n deformation matrix. Copies share storage.
class Theta {
  public:
    explicit Theta(int n = 1)
        : n_(n), entries_(std::make_shared<const std::vector<double>>(std::size_t(n) * n, 0.0)) {
        if (n < 1)
            throw contract_error("Theta: dimension must be positive");
    }

    /// Row-major entries; must be skew-symmetric to 1e-12.
    Theta(int n, std::vector<double> entries) : n_(n) {
        if (n < 1)
            throw contract_error("Theta: dimension must be positive");
        if (entries.size() != std::size_t(n) * n)
            throw contract_error("Theta: expected n*n entries");
        for (int j = 0; j < n; ++j) {
            if (std::abs(entries[j * n + j]) > 1e-12)
                throw contract_error("Theta: diagonal must vanish");
            for (int k = j + 1; k < n; ++k)
                if (std::abs(entries[j * n + k] + entries[k * n + j]) > 1e-12)
                    throw contract_error("Theta: matrix is not skew-symmetric");
        }
        entries_ = std::make_shared<const std::vector<double>>(std::move(entries));
    }

    /// Builds theta from its strictly upper triangle, row by row:
    /// theta_{0,1}, theta_{0,2}, ..., theta_{1,2}, ...
    static Theta from_upper(int n, const std::vector<double> &upper) {
        if (upper.size() != std::size_t(n) * (n - 1) / 2)
            throw contract_error("Theta::from_upper: expected n(n-1)/2 entries");
        std::vector<double> e(std::size_t(n) * n, 0.0);
        std::size_t idx = 0;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                e[j * n + k] = upper[idx];
                e[k * n + j] = -upper[idx];
                ++idx;
            }
        return Theta(n, std::move(e));
    }

    int dim() const noexcept { return n_; }
    double operator()(int j, int k) const { return (*entries_)[std::size_t(j) * n_ + k]; }
    const std::vector<double> &entries() const noexcept { return *entries_; }

    friend bool operator==(const Theta &a, const Theta &b) {
        return a.n_ == b.n_ && (a.entries_ == b.entries_ || *a.entries_ == *b.entries_);
    }

  private:
    int n_;
    std::shared_ptr<const std::vector<double>> entries_;
};

/// Exponent x with w(m,k) = exp(2 pi i x): x = sum_{j<l} theta_{j,l} m_l k_j.
inline double phase_exponent(const MultiIndex &m, const MultiIndex &k, const Theta &theta) {
    const int n = theta.dim();
    double x = 0.0;
    for (int j = 0; j < n; ++j) {
        if (k[j] == 0)
            continue;
        double v = 0.0;
        for (int l = j + 1; l < n; ++l)
            v += theta(j, l) * m[l];
        x += v * k[j];
    }
    return x;
}

inline Complex unit_phase(double x) {
    // reduce first so large exponents keep full precision
    const double frac = x - std::round(x);
    return std::polar(1.0, 2.0 * std::numbers::pi * frac);
}

/// Unit-modulus scalar w(m,k) with U^m U^k = w(m,k) U^{m+k}.
struct Phase {
    Complex value{1.0, 0.0};
};

/// Normal-ordering cocycle: U^m U^k = w(m,k) U^{m+k}, where U^m denotes the
/// ordered word U_1^{m_1} ... U_n^{m_n}. Moving each U_j^{k_j} left past
/// U_l^{m_l} (l > j) picks up exp(2 pi i theta_{j,l} m_l k_j).
inline Phase normal_phase(const MultiIndex &m, const MultiIndex &k, const Theta &theta) {
    const std::size_t n = std::size_t(theta.dim());
    if (m.size() != n || k.size() != n)
        throw contract_error("normal_phase: multi-index length does not match theta");
    return Phase{unit_phase(phase_exponent(m, k, theta))};
}

} // namespace nct
