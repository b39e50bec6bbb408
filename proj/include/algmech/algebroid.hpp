#pragma once

#include "algmech/core.hpp"
#include "algmech/report.hpp"

#include <memory>
#include <string>
#include <vector>

namespace algmech {

/// Structure constants C^gamma_{alpha beta}; only alpha < beta is stored, so skewness holds by construction.
class StructureConstants {
public:
    StructureConstants() = default;
    explicit StructureConstants(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * (n - 1) / 2, 0.0) {}

    int rank() const { return n_; }

    double operator()(int gamma, int alpha, int beta) const {
        if (alpha == beta) return 0.0;
        if (alpha < beta) return data_[slot(alpha, beta) + gamma];
        return -data_[slot(beta, alpha) + gamma];
    }

    void set(int gamma, int alpha, int beta, double v) {
        if (alpha == beta) throw StructuralError("StructureConstants::set: alpha == beta");
        if (alpha < beta)
            data_[slot(alpha, beta) + gamma] = v;
        else
            data_[slot(beta, alpha) + gamma] = -v;
    }

    /// Coefficients of [e_alpha, e_beta] as a vector over gamma.
    Vector column(int alpha, int beta) const {
        Vector v(n_);
        for (int g = 0; g < n_; ++g) v[g] = (*this)(g, alpha, beta);
        return v;
    }

    void set_column(int alpha, int beta, const Vector& v) {
        for (int g = 0; g < n_; ++g) set(g, alpha, beta, v[g]);
    }

    /// sum C^gamma_{alpha beta} a^alpha b^beta
    Vector apply(const Vector& a, const Vector& b) const {
        Vector out = Vector::Zero(n_);
        for (int al = 0; al < n_; ++al) {
            for (int be = al + 1; be < n_; ++be) {
                const double w = a[al] * b[be] - a[be] * b[al];
                if (w == 0.0) continue;
                const double* c = &data_[slot(al, be)];
                for (int g = 0; g < n_; ++g) out[g] += w * c[g];
            }
        }
        return out;
    }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t slot(int a, int b) const {
        const std::size_t pair = static_cast<std::size_t>(a) * (2 * n_ - a - 1) / 2 + (b - a - 1);
        return pair * n_;
    }

    int n_ = 0;
    std::vector<double> data_;
};

/// Jacobi residual of constant structure constants: max over frame triples.
inline double jacobi_residual(const StructureConstants& c) {
    const int n = c.rank();
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int g = b + 1; g < n; ++g)
                for (int e = 0; e < n; ++e) {
                    double s = 0.0;
                    for (int d = 0; d < n; ++d)
                        s += c(d, a, b) * c(e, d, g) + c(d, b, g) * c(e, d, a) + c(d, g, a) * c(e, d, b);
                    worst = std::max(worst, std::abs(s));
                }
    return worst;
}

/// A rank-n Lie algebroid over an m-dimensional chart, given by anchor and structure functions.
struct LieAlgebroidChart {
    std::string name;
    int base_dim = 0;
    int rank = 0;
    std::vector<std::string> labels;       ///< base coordinate labels
    std::vector<std::string> dual_labels;  ///< labels for fiber coordinates of the dual bundle
    std::vector<bool> periodic;            ///< angle coordinates, wrapped on output only

    std::function<Matrix(const ChartPoint&)> anchor;  ///< m x n, entry (i, alpha) = rho^i_alpha
    std::function<StructureConstants(const ChartPoint&)> structure;
    std::function<std::vector<Matrix>(const ChartPoint&)> anchor_partials;  ///< entry k: d rho / d x^k
    std::function<std::vector<StructureConstants>(const ChartPoint&)> structure_partials;

    bool has_analytic_partials() const { return base_dim == 0 || (anchor_partials && structure_partials); }

    double default_tolerance() const { return has_analytic_partials() ? 1e-8 : 1e-5; }

    Matrix anchor_at(const ChartPoint& x) const {
        require_dim(x.size(), base_dim, "anchor");
        if (base_dim == 0 || !anchor) return Matrix::Zero(base_dim, rank);
        Matrix r = anchor(x);
        require_finite(r, x, "anchor");
        return r;
    }

    StructureConstants structure_at(const ChartPoint& x) const {
        require_dim(x.size(), base_dim, "structure");
        if (!structure) return StructureConstants(rank);
        StructureConstants c = structure(x);
        for (double v : c.raw())
            if (!std::isfinite(v)) throw NumericError("non-finite structure function", x);
        return c;
    }

    std::vector<Matrix> anchor_derivative(const ChartPoint& x) const {
        if (base_dim == 0) return {};
        if (anchor_partials) return anchor_partials(x);
        std::vector<Matrix> out;
        ChartPoint xp = x;
        for (int k = 0; k < base_dim; ++k) {
            const double h = fd_step(x[k]);
            xp[k] = x[k] + h;
            Matrix p = anchor_at(xp);
            xp[k] = x[k] - h;
            Matrix q = anchor_at(xp);
            xp[k] = x[k];
            out.push_back((p - q) / (2.0 * h));
        }
        return out;
    }

    std::vector<StructureConstants> structure_derivative(const ChartPoint& x) const {
        if (base_dim == 0) return {};
        if (structure_partials) return structure_partials(x);
        std::vector<StructureConstants> out;
        ChartPoint xp = x;
        for (int k = 0; k < base_dim; ++k) {
            const double h = fd_step(x[k]);
            xp[k] = x[k] + h;
            StructureConstants p = structure_at(xp);
            xp[k] = x[k] - h;
            StructureConstants q = structure_at(xp);
            xp[k] = x[k];
            for (std::size_t s = 0; s < p.raw().size(); ++s) p.raw()[s] = (p.raw()[s] - q.raw()[s]) / (2.0 * h);
            out.push_back(std::move(p));
        }
        return out;
    }

    std::vector<std::string> coordinate_labels() const {
        return labels.empty() ? default_labels("x", base_dim) : labels;
    }
    std::vector<std::string> fiber_labels() const {
        return dual_labels.empty() ? default_labels("y", rank) : dual_labels;
    }
};

using ChartPtr = std::shared_ptr<const LieAlgebroidChart>;

/// Algebroid with constant structure constants over a point: a Lie algebra.
inline ChartPtr lie_algebra_chart(const StructureConstants& c, std::string name = "lie-algebra") {
    auto chart = std::make_shared<LieAlgebroidChart>();
    chart->name = std::move(name);
    chart->base_dim = 0;
    chart->rank = c.rank();
    chart->structure = [c](const ChartPoint&) { return c; };
    return chart;
}

/// A section X = X^alpha(x) e_alpha.
struct Section {
    ChartPtr chart;
    std::function<Vector(const ChartPoint&)> coeffs;
    std::function<Matrix(const ChartPoint&)> jacobian;  ///< optional n x m

    Vector at(const ChartPoint& x) const {
        Vector v = coeffs(x);
        require_dim(v.size(), chart->rank, "section coefficients");
        require_finite(v, x, "section");
        return v;
    }

    Matrix jacobian_at(const ChartPoint& x) const {
        if (chart->base_dim == 0) return Matrix(chart->rank, 0);
        if (jacobian) return jacobian(x);
        return fd_jacobian([this](const Vector& p) { return coeffs(p); }, x);
    }
};

inline Section constant_section(ChartPtr chart, const Vector& v) {
    require_dim(v.size(), chart->rank, "constant_section");
    const int m = chart->base_dim;
    const int n = chart->rank;
    return Section{chart, [v](const ChartPoint&) { return v; },
                   [n, m](const ChartPoint&) { return Matrix(Matrix::Zero(n, m)); }};
}

inline Section frame_section(ChartPtr chart, int alpha) {
    return constant_section(chart, Vector::Unit(chart->rank, alpha));
}

inline Section zero_section(ChartPtr chart) { return constant_section(chart, Vector::Zero(chart->rank)); }

/// Skew k-section of the dual: components on strictly increasing index tuples.
struct MultiSection {
    ChartPtr chart;
    int degree = 0;
    std::function<Vector(const ChartPoint&)> coeffs;
    std::function<Matrix(const ChartPoint&)> jacobian;  ///< optional (binom(n,k) x m)

    long size() const { return binomial(chart->rank, degree); }

    Vector at(const ChartPoint& x) const {
        Vector v = coeffs(x);
        require_dim(v.size(), size(), "multisection coefficients");
        require_finite(v, x, "multisection");
        return v;
    }

    double value(const ChartPoint& x) const { return at(x)[0]; }

    Matrix jacobian_at(const ChartPoint& x) const {
        if (chart->base_dim == 0) return Matrix(size(), 0);
        if (jacobian) return jacobian(x);
        return fd_jacobian([this](const Vector& p) { return coeffs(p); }, x);
    }

    /// Component on an arbitrary index tuple, with the sign of the sorting permutation.
    static double component(const Vector& c, std::vector<int> idx, int n) {
        const int s = sort_with_sign(idx);
        if (s == 0) return 0.0;
        return s * c[tuple_rank(idx, n)];
    }

    /// mu(v_1, ..., v_k) = sum over increasing I of mu_I det(V_I).
    double evaluate(const ChartPoint& x, const std::vector<Vector>& args) const {
        require_dim(static_cast<Eigen::Index>(args.size()), degree, "multisection arguments");
        const Vector c = at(x);
        if (degree == 0) return c[0];
        const auto tuples = increasing_tuples(chart->rank, degree);
        double total = 0.0;
        Matrix V(degree, degree);
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            for (int r = 0; r < degree; ++r)
                for (int s = 0; s < degree; ++s) V(r, s) = args[s][tuples[t][r]];
            total += c[static_cast<Eigen::Index>(t)] * V.determinant();
        }
        return total;
    }
};

/// Scalar function with optional analytic gradient, as a degree-0 multisection.
inline MultiSection scalar_field(ChartPtr chart, std::function<double(const ChartPoint&)> f,
                                 std::function<Vector(const ChartPoint&)> grad = {}) {
    MultiSection s;
    s.chart = chart;
    s.degree = 0;
    s.coeffs = [f](const ChartPoint& x) { return Vector::Constant(1, f(x)); };
    if (grad) s.jacobian = [grad](const ChartPoint& x) { return Matrix(grad(x).transpose()); };
    return s;
}

/// The dual frame covector e^gamma.
inline MultiSection dual_frame(ChartPtr chart, int gamma) {
    MultiSection s;
    s.chart = chart;
    s.degree = 1;
    const int n = chart->rank;
    const int m = chart->base_dim;
    s.coeffs = [n, gamma](const ChartPoint&) { return Vector(Vector::Unit(n, gamma)); };
    s.jacobian = [n, m](const ChartPoint&) { return Matrix(Matrix::Zero(n, m)); };
    return s;
}

/// rho(x) X(x)
inline Vector apply_anchor(const Section& X, const ChartPoint& x) {
    require_dim(x.size(), X.chart->base_dim, "apply_anchor");
    return X.chart->anchor_at(x) * X.at(x);
}

/// [X,Y]^g = C^g_ab X^a Y^b + rho^i_a X^a d_i Y^g - rho^i_b Y^b d_i X^g
inline Section bracket(const Section& X, const Section& Y) {
    if (X.chart != Y.chart) throw StructuralError("bracket: sections belong to different charts");
    ChartPtr chart = X.chart;
    Section r;
    r.chart = chart;
    r.coeffs = [X, Y, chart](const ChartPoint& x) {
        const Vector a = X.at(x);
        const Vector b = Y.at(x);
        Vector out = chart->structure_at(x).apply(a, b);
        if (chart->base_dim > 0) {
            const Matrix rho = chart->anchor_at(x);
            out += Y.jacobian_at(x) * (rho * a) - X.jacobian_at(x) * (rho * b);
        }
        require_finite(out, x, "bracket");
        return out;
    };
    return r;
}

/// f X, with the product-rule Jacobian when both factors have analytic derivatives.
inline Section scale(const MultiSection& f, const Section& X) {
    Section r;
    r.chart = X.chart;
    r.coeffs = [f, X](const ChartPoint& x) { return Vector(f.value(x) * X.at(x)); };
    if ((f.jacobian && X.jacobian) || X.chart->base_dim == 0) {
        r.jacobian = [f, X](const ChartPoint& x) {
            return Matrix(f.value(x) * X.jacobian_at(x) + X.at(x) * f.jacobian_at(x));
        };
    }
    return r;
}

inline Section add(const Section& X, const Section& Y) {
    Section r;
    r.chart = X.chart;
    r.coeffs = [X, Y](const ChartPoint& x) { return Vector(X.at(x) + Y.at(x)); };
    if (X.jacobian && Y.jacobian)
        r.jacobian = [X, Y](const ChartPoint& x) { return Matrix(X.jacobian_at(x) + Y.jacobian_at(x)); };
    return r;
}

/// Affine section a + B x with analytic Jacobian, drawn from rng.
inline Section random_affine_section(ChartPtr chart, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int n = chart->rank;
    const int m = chart->base_dim;
    Vector a(n);
    Matrix B(n, m);
    for (int i = 0; i < n; ++i) a[i] = uni(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) B(i, j) = 0.5 * uni(rng);
    return Section{chart, [a, B](const ChartPoint& x) { return Vector(a + B * x); },
                   [B](const ChartPoint&) { return B; }};
}

/// Quadratic polynomial c + g.x + x^T Q x / 2 with analytic gradient, drawn from rng.
inline MultiSection random_quadratic(ChartPtr chart, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int m = chart->base_dim;
    const double c = uni(rng);
    Vector g(m);
    Matrix Q(m, m);
    for (int i = 0; i < m; ++i) g[i] = uni(rng);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) Q(i, j) = Q(j, i) = 0.5 * uni(rng);
    return scalar_field(
        chart, [c, g, Q](const ChartPoint& x) { return c + g.dot(x) + 0.5 * x.dot(Q * x); },
        [g, Q](const ChartPoint& x) { return Vector(g + Q * x); });
}

struct AxiomReport : Report {};

/// Jacobi identity, anchor morphism and Leibniz rule, sampled.
///
/// Jacobi is checked on frame triples and on weighted triples (f e_a, e_b, e_c) through
/// nested generic brackets; the weighted form also detects brackets whose anchor image is
/// inconsistent with the Leibniz rule.
inline AxiomReport check_axioms(const ChartPtr& chart, const std::vector<ChartPoint>& samples, double tol,
                                std::uint64_t seed = 1) {
    if (samples.empty()) throw StructuralError("check_axioms: empty sample set");
    const int n = chart->rank;
    const int m = chart->base_dim;
    AxiomReport rep;
    CheckResult jac("Jacobi identity", tol);
    CheckResult anc("anchor morphism", tol);
    CheckResult leib("Leibniz rule", tol);

    std::mt19937_64 rng(seed);
    const MultiSection f = random_quadratic(chart, rng);
    const Section X = random_affine_section(chart, rng);
    const Section Y = random_affine_section(chart, rng);
    std::vector<Section> frame;
    for (int a = 0; a < n; ++a) frame.push_back(frame_section(chart, a));
    const Section fY = scale(f, Y);
    const Section XfY = bracket(X, fY);
    const Section XY = bracket(X, Y);

    // Weighted triples: sections w e_a and the nested brackets needed for the cyclic sums.
    // The Jacobiator is tensorial up to first derivatives of w, so an affine weight suffices.
    MultiSection w = f;
    {
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        const double c0 = uni(rng);
        Vector g(m);
        for (int i = 0; i < m; ++i) g[i] = uni(rng);
        w = scalar_field(
            chart, [c0, g](const ChartPoint& x) { return c0 + g.dot(x); }, [g](const ChartPoint&) { return g; });
    }
    std::vector<Section> weighted;
    for (int a = 0; a < n; ++a) weighted.push_back(scale(w, frame[a]));
    struct Triple {
        int a, b, c;
        Section j1, j2, j3;
    };
    std::vector<Triple> triples;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = b + 1; c < n; ++c) {
                const Section& F = weighted[a];
                triples.push_back({a, b, c, bracket(bracket(F, frame[b]), frame[c]),
                                   bracket(bracket(frame[b], frame[c]), F), bracket(bracket(frame[c], F), frame[b])});
            }

    for (const auto& x : samples) {
        require_dim(x.size(), m, "check_axioms sample");
        const Matrix rho = chart->anchor_at(x);
        const StructureConstants C = chart->structure_at(x);
        const auto dC = chart->structure_derivative(x);
        const auto drho = chart->anchor_derivative(x);

        double worst = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int g = b + 1; g < n; ++g) {
                    const int cyc[3][3] = {{a, b, g}, {b, g, a}, {g, a, b}};
                    for (int e = 0; e < n; ++e) {
                        double s = 0.0;
                        for (const auto& t : cyc) {
                            for (int d = 0; d < n; ++d) s += C(d, t[0], t[1]) * C(e, d, t[2]);
                            for (int i = 0; i < m; ++i) s -= rho(i, t[2]) * dC[i](e, t[0], t[1]);
                        }
                        worst = std::max(worst, std::abs(s));
                    }
                }
        for (const auto& t : triples) {
            const Vector s = t.j1.at(x) + t.j2.at(x) + t.j3.at(x);
            worst = std::max(worst, s.lpNorm<Eigen::Infinity>());
        }
        jac.record(worst, x);

        // rho(C_ab) - [rho_a, rho_b] with [u,v]^i = u^j d_j v^i - v^j d_j u^i.
        double aw = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                Vector lhs = rho * C.column(a, b);
                Vector comm = Vector::Zero(m);
                for (int j = 0; j < m; ++j) comm += rho(j, a) * drho[j].col(b) - rho(j, b) * drho[j].col(a);
                if (m > 0) aw = std::max(aw, (lhs - comm).lpNorm<Eigen::Infinity>());
            }
        anc.record(aw, x);

        const Vector rhoXf = m > 0 ? Vector(f.jacobian_at(x) * (rho * X.at(x))) : Vector::Zero(1);
        const Vector lres = XfY.at(x) - f.value(x) * XY.at(x) - rhoXf[0] * Y.at(x);
        leib.record(lres.lpNorm<Eigen::Infinity>(), x);
    }
    rep.add(jac);
    rep.add(anc);
    rep.add(leib);
    return rep;
}

}  // namespace algmech
