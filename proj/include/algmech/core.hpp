#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace algmech {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Chart coordinates x^i of a point of the base manifold.
using ChartPoint = Eigen::VectorXd;

inline std::string format_point(const Vector& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatches, chart mismatches, degree overflow.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Bad user input (configuration, initial data off the constraint set).
class InputError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    NumericError(const std::string& what, ChartPoint at)
        : Error(what + " at " + format_point(at)), point(std::move(at)) {}
    ChartPoint point;
};

class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, ChartPoint at, double cond)
        : Error(what + " at " + format_point(at) + " (condition estimate " + std::to_string(cond) + ")"),
          point(std::move(at)),
          condition(cond) {}
    ChartPoint point;
    double condition;
};

inline void require_finite(const Eigen::Ref<const Matrix>& v, const ChartPoint& x, const char* what) {
    if (!v.allFinite()) throw NumericError(std::string("non-finite value in ") + what, x);
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want)
        throw StructuralError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                              std::to_string(got));
}

/// Central-difference step h = eps^(1/3) * max(1, |x_i|).
inline double fd_step(double xi) {
    static const double c = std::cbrt(std::numeric_limits<double>::epsilon());
    return c * std::max(1.0, std::abs(xi));
}

/// Central-difference Jacobian of f: R^m -> R^k at x, returned as k x m.
template <class F>
Matrix fd_jacobian(const F& f, const Vector& x) {
    const Eigen::Index m = x.size();
    if (m == 0) {
        Vector v = f(x);
        return Matrix(v.size(), 0);
    }
    Matrix J;
    Vector xp = x;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double h = fd_step(x[i]);
        xp[i] = x[i] + h;
        Vector fp = f(xp);
        xp[i] = x[i] - h;
        Vector fm = f(xp);
        xp[i] = x[i];
        if (i == 0) J.resize(fp.size(), m);
        J.col(i) = (fp - fm) / (2.0 * h);
    }
    return J;
}

/// Central-difference gradient of a scalar function.
template <class F>
Vector fd_gradient(const F& f, const Vector& x) {
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i]);
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Axis-aligned sampling region of a chart.
struct ChartBox {
    Vector lower;
    Vector upper;

    int dim() const { return static_cast<int>(lower.size()); }

    static ChartBox cube(int dim, double half_width) {
        return {Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
    }

    /// Box for (x, y) coordinates of the dual bundle over this box.
    ChartBox extended(int extra, double half_width) const {
        ChartBox b{Vector(dim() + extra), Vector(dim() + extra)};
        b.lower << lower, Vector::Constant(extra, -half_width);
        b.upper << upper, Vector::Constant(extra, half_width);
        return b;
    }
};

namespace detail {
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double result = 0.0;
    double f = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= static_cast<double>(base);
    }
    return result;
}
}  // namespace detail

/// Seeded Halton points with a Cranley-Patterson rotation, deterministic per seed.
inline std::vector<ChartPoint> sample_points(const ChartBox& box, int count, std::uint64_t seed) {
    static const std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    const int d = box.dim();
    if (d > 16) throw StructuralError("sample_points: box dimension above 16");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> shift(d);
    for (auto& s : shift) s = uni(rng);
    std::vector<ChartPoint> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        ChartPoint x(d);
        for (int i = 0; i < d; ++i) {
            double u = detail::radical_inverse(static_cast<std::uint64_t>(k + 1), primes[i]) + shift[i];
            u -= std::floor(u);
            x[i] = box.lower[i] + u * (box.upper[i] - box.lower[i]);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

inline long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Strictly increasing k-tuples from {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> increasing_tuples(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k > n || k < 0) return out;
    std::vector<int> t(k);
    for (int i = 0; i < k; ++i) t[i] = i;
    while (true) {
        out.push_back(t);
        int i = k - 1;
        while (i >= 0 && t[i] == n - k + i) --i;
        if (i < 0) break;
        ++t[i];
        for (int j = i + 1; j < k; ++j) t[j] = t[j - 1] + 1;
    }
    return out;
}

/// Lexicographic rank of a strictly increasing tuple among increasing_tuples(n, k).
inline long tuple_rank(const std::vector<int>& t, int n) {
    const int k = static_cast<int>(t.size());
    long r = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int j = prev + 1; j < t[i]; ++j) r += binomial(n - 1 - j, k - 1 - i);
        prev = t[i];
    }
    return r;
}

/// Sorts idx in place and returns the permutation sign, or 0 on a repeated index.
inline int sort_with_sign(std::vector<int>& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

/// Canonical label list x1..xm when a chart does not declare its own.
inline std::vector<std::string> default_labels(const std::string& stem, int count) {
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(i + 1));
    return out;
}

}  // namespace algmech
