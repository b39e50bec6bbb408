#pragma once

#include "algmech/cartan.hpp"

#include <optional>

namespace algmech {

/// Singular values below this fraction of the largest count as zero.
inline constexpr double rank_tolerance = 1e-9;

inline int numerical_rank(const Matrix& A, double rel = rank_tolerance) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(A);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > rel * s[0]) ++r;
    return r;
}

/// Orthonormal basis of the numerical nullspace of A (columns).
inline Matrix nullspace(const Matrix& A, double rel = rank_tolerance) {
    const Eigen::Index n = A.cols();
    if (A.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int r = 0;
    if (s.size() > 0 && s[0] > 0.0)
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s[i] > rel * s[0]) ++r;
    return svd.matrixV().rightCols(n - r);
}

struct LeastSquares {
    Vector coeffs;
    double residual = 0.0;  ///< infinity norm of A c - b
};

inline LeastSquares least_squares(const Matrix& A, const Vector& b) {
    if (A.cols() == 0) return {Vector(0), b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0};
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rank_tolerance);
    Vector c = svd.solve(b);
    return {c, (A * c - b).lpNorm<Eigen::Infinity>()};
}

/// Skew matrix from the increasing-pair components of a 2-section.
inline Matrix skew_from_components(const Vector& c, int n) {
    Matrix W = Matrix::Zero(n, n);
    long k = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b, ++k) {
            W(a, b) = c[k];
            W(b, a) = -c[k];
        }
    return W;
}

inline Vector components_from_skew(const Matrix& W) {
    const int n = static_cast<int>(W.rows());
    Vector c(binomial(n, 2));
    long k = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b, ++k) c[k] = W(a, b);
    return c;
}

/// 2-section from a matrix-valued function; only the upper triangle is read.
inline MultiSection two_section(ChartPtr chart, std::function<Matrix(const ChartPoint&)> W,
                                std::function<std::vector<Matrix>(const ChartPoint&)> dW = {}) {
    MultiSection s;
    s.chart = chart;
    s.degree = 2;
    s.coeffs = [W](const ChartPoint& x) { return components_from_skew(W(x)); };
    if (dW) {
        s.jacobian = [dW, chart](const ChartPoint& x) {
            const auto parts = dW(x);
            Matrix J(binomial(chart->rank, 2), chart->base_dim);
            for (int k = 0; k < chart->base_dim; ++k) J.col(k) = components_from_skew(parts[k]);
            return J;
        };
    }
    return s;
}

/// A 2-section with closedness and nondegeneracy verdicts.
struct SymplecticSection {
    ChartPtr chart;
    MultiSection omega;
    bool closed_verified = false;
    bool nondegenerate_verified = false;

    Matrix matrix_at(const ChartPoint& x) const { return skew_from_components(omega.at(x), chart->rank); }
};

inline SymplecticSection make_symplectic(const MultiSection& omega) {
    if (omega.degree != 2) throw StructuralError("symplectic section must have degree 2");
    return SymplecticSection{omega.chart, omega};
}

/// i(X) Omega, components X^a Omega_{a b}.
inline MultiSection flat(const SymplecticSection& W, const Section& X) {
    if (W.chart != X.chart) throw StructuralError("flat: different charts");
    MultiSection out;
    out.chart = W.chart;
    out.degree = 1;
    out.coeffs = [W, X](const ChartPoint& x) { return Vector(W.matrix_at(x).transpose() * X.at(x)); };
    return out;
}

/// Solves Omega^T v = alpha, i.e. i(v) Omega = alpha, with a degeneracy check.
inline Vector sharp_at(const Matrix& W, const Vector& alpha, const ChartPoint& x) {
    Eigen::JacobiSVD<Matrix> svd(W.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s[0] : 0.0;
    const double smin = s.size() ? s[s.size() - 1] : 0.0;
    if (s.size() > 0 && !(smin > rank_tolerance * smax))
        throw DegeneracyError("sharp: degenerate 2-section", x, smin > 0 ? smax / smin : std::numeric_limits<double>::infinity());
    return svd.solve(alpha);
}

inline Section sharp(const SymplecticSection& W, const MultiSection& alpha) {
    if (alpha.chart != W.chart || alpha.degree != 1) throw StructuralError("sharp: expects a 1-section on the same chart");
    Section out;
    out.chart = W.chart;
    out.coeffs = [W, alpha](const ChartPoint& x) { return sharp_at(W.matrix_at(x), alpha.at(x), x); };
    return out;
}

/// Poisson bivector Pi(a, b) = Omega(sharp a, sharp b) as a matrix at x.
inline Matrix poisson_bivector(const SymplecticSection& W, const ChartPoint& x) {
    const Matrix M = W.matrix_at(x);
    const Eigen::Index n = M.rows();
    Matrix S(n, n);
    for (Eigen::Index a = 0; a < n; ++a) S.col(a) = sharp_at(M, Vector::Unit(n, a), x);
    return S.transpose() * M * S;
}

inline Section hamiltonian_section(const SymplecticSection& W, const MultiSection& f) {
    if (f.degree != 0) throw StructuralError("hamiltonian_section: expects a function");
    return sharp(W, differential(f));
}

/// {f, g} = Omega(H_f, H_g)
inline MultiSection poisson_bracket(const SymplecticSection& W, const MultiSection& f, const MultiSection& g) {
    const Section Hf = hamiltonian_section(W, f);
    const Section Hg = hamiltonian_section(W, g);
    MultiSection out;
    out.chart = W.chart;
    out.degree = 0;
    out.coeffs = [W, Hf, Hg](const ChartPoint& x) {
        return Vector::Constant(1, Hf.at(x).dot(W.matrix_at(x) * Hg.at(x)));
    };
    return out;
}

struct SymplecticReport {
    Report report;
    double min_singular = 0.0;  ///< smallest singular value relative to the largest, minimized over samples
    int min_kernel_dim = 0;
    int max_kernel_dim = 0;
    SymplecticSection certified;
};

/// Closedness d Omega = 0 and nondegeneracy at the samples.
inline SymplecticReport verify_symplectic(const SymplecticSection& W, const std::vector<ChartPoint>& samples,
                                          double tol) {
    SymplecticReport out;
    CheckResult closed("closedness d Omega = 0", tol);
    CheckResult nondeg("nondegeneracy", rank_tolerance);
    const int n = W.chart->rank;
    std::optional<MultiSection> dW;
    if (n >= 3) dW = differential(W.omega);
    out.min_singular = std::numeric_limits<double>::infinity();
    out.min_kernel_dim = n;
    out.max_kernel_dim = 0;
    for (const auto& x : samples) {
        closed.record(dW ? dW->at(x).lpNorm<Eigen::Infinity>() : 0.0, x);
        const Matrix M = W.matrix_at(x);
        Eigen::JacobiSVD<Matrix> svd(M);
        const auto& s = svd.singularValues();
        const double rel = (s.size() && s[0] > 0) ? s[s.size() - 1] / s[0] : 0.0;
        out.min_singular = std::min(out.min_singular, rel);
        const int kd = n - numerical_rank(M);
        out.min_kernel_dim = std::min(out.min_kernel_dim, kd);
        out.max_kernel_dim = std::max(out.max_kernel_dim, kd);
        if (kd > 0) {
            nondeg.passed = false;
            if (nondeg.offending.size() < CheckResult::max_offending) nondeg.offending.push_back(x);
        }
    }
    nondeg.max_residual = std::isfinite(out.min_singular) ? out.min_singular : 0.0;
    nondeg.detail = "max_residual is the minimum relative singular value; passes when above the tolerance";
    out.report.add(closed);
    out.report.add(nondeg);
    out.certified = W;
    out.certified.closed_verified = closed.passed;
    out.certified.nondegenerate_verified = nondeg.passed;
    return out;
}

/// Finite-dimensional Lie algebra with a (possibly degenerate) 2-form.
struct SymplecticLieAlgebra {
    StructureConstants structure_constants;
    Matrix omega;

    int dim() const { return structure_constants.rank(); }
};

struct LieAlgebraReduction {
    SymplecticLieAlgebra reduced;
    Matrix kernel_coords;      ///< kernel basis in coordinates of the supplied h basis (orthonormal columns)
    Matrix complement_coords;  ///< complement basis in h-basis coordinates (orthonormal columns)
    Matrix kernel_basis;       ///< kernel basis in g coordinates
    Matrix complement_basis;   ///< complement basis in g coordinates
};

/// Quotient h / ker(Omega|h) on the Euclidean-orthogonal complement of the kernel.
inline LieAlgebraReduction reduce_symplectic_lie_algebra(const SymplecticLieAlgebra& g,
                                                         const std::vector<Vector>& h_basis) {
    const int n = g.dim();
    const int p = static_cast<int>(h_basis.size());
    if (g.omega.rows() != n || g.omega.cols() != n) throw StructuralError("omega has wrong shape");
    Matrix H(n, p);
    for (int i = 0; i < p; ++i) {
        require_dim(h_basis[i].size(), n, "h basis vector");
        H.col(i) = h_basis[i];
    }
    if (numerical_rank(H) != p) throw StructuralError("h basis is linearly dependent");
    const StructureConstants& c = g.structure_constants;

    // Bracket of g-vectors, expressed in h-coordinates with a residual check.
    auto in_h = [&](const Vector& v, const std::string& what) {
        LeastSquares ls = least_squares(H, v);
        if (ls.residual > 1e-10) {
            CheckResult r("subalgebra", 1e-10);
            r.max_residual = ls.residual;
            r.fail(what);
            throw HypothesisError(r);
        }
        return ls.coeffs;
    };
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) in_h(c.apply(H.col(i), H.col(j)), "h basis does not span a subalgebra");

    const Matrix Wh = H.transpose() * g.omega * H;
    const Matrix K = nullspace(Wh);
    const int kd = static_cast<int>(K.cols());
    Matrix U = Matrix::Identity(p, p);  // orthonormal complement of K in R^p
    if (kd > 0) {
        Eigen::JacobiSVD<Matrix> svd(K.transpose(), Eigen::ComputeFullV);
        U = svd.matrixV().rightCols(p - kd);
    }

    // Ideal condition: [h, ker] has no component along the complement.
    double ideal = 0.0;
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < kd; ++k) {
            const Vector br = in_h(c.apply(H.col(i), H * K.col(k)), "h basis does not span a subalgebra");
            ideal = std::max(ideal, (U.transpose() * br).lpNorm<Eigen::Infinity>());
        }
    if (ideal > 1e-10) {
        CheckResult r("ideal condition [h, ker] in ker", 1e-10);
        r.max_residual = ideal;
        r.fail("kernel of the restricted form is not an ideal of h");
        throw HypothesisError(r);
    }

    const int r = p - kd;
    StructureConstants cr(r);
    const Matrix G = H * U;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            const Vector br = in_h(c.apply(G.col(i), G.col(j)), "h basis does not span a subalgebra");
            cr.set_column(i, j, U.transpose() * br);
        }
    LieAlgebraReduction out;
    out.reduced.structure_constants = cr;
    out.reduced.omega = U.transpose() * Wh * U;
    out.kernel_coords = K;
    out.complement_coords = U;
    out.kernel_basis = H * K;
    out.complement_basis = G;
    return out;
}

}  // namespace algmech
