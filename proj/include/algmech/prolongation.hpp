#pragma once

#include "algmech/symplectic.hpp"

namespace algmech {

/// The A-tangent bundle of the dual: rank 2n over coordinates (x, y), frame (X_1..X_n, P^1..P^n).
struct ProlongationChart {
    ChartPtr parent;
    ChartPtr chart;
    int m = 0;
    int n = 0;

    Vector base_coords(const ChartPoint& p) const { return p.head(m); }
    Vector dual_coords(const ChartPoint& p) const { return p.tail(n); }
};

inline ProlongationChart prolong(const ChartPtr& parent) {
    const int m = parent->base_dim;
    const int n = parent->rank;
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = "prolongation(" + parent->name + ")";
    c->base_dim = m + n;
    c->rank = 2 * n;
    c->labels = parent->coordinate_labels();
    for (const auto& l : parent->fiber_labels()) c->labels.push_back(l);
    c->periodic = parent->periodic;
    c->periodic.resize(m, false);
    c->periodic.resize(m + n, false);

    c->anchor = [parent, m, n](const ChartPoint& p) {
        Matrix R = Matrix::Zero(m + n, 2 * n);
        R.topLeftCorner(m, n) = parent->anchor_at(p.head(m));
        R.bottomRightCorner(n, n).setIdentity();
        return R;
    };
    auto embed = [n](const StructureConstants& C) {
        StructureConstants out(2 * n);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int g = 0; g < n; ++g) out.set(g, a, b, C(g, a, b));
        return out;
    };
    c->structure = [parent, m, embed](const ChartPoint& p) { return embed(parent->structure_at(p.head(m))); };
    if (parent->has_analytic_partials()) {
        c->anchor_partials = [parent, m, n](const ChartPoint& p) {
            std::vector<Matrix> out;
            const auto d = parent->anchor_derivative(p.head(m));
            for (int k = 0; k < m + n; ++k) {
                Matrix R = Matrix::Zero(m + n, 2 * n);
                if (k < m) R.topLeftCorner(m, n) = d[k];
                out.push_back(std::move(R));
            }
            return out;
        };
        c->structure_partials = [parent, m, n, embed](const ChartPoint& p) {
            std::vector<StructureConstants> out;
            const auto d = parent->structure_derivative(p.head(m));
            for (int k = 0; k < m + n; ++k) out.push_back(k < m ? embed(d[k]) : StructureConstants(2 * n));
            return out;
        };
    }
    return ProlongationChart{parent, c, m, n};
}

/// Theta = y_a X^a
inline MultiSection liouville(const ProlongationChart& P) {
    const int m = P.m, n = P.n;
    MultiSection s;
    s.chart = P.chart;
    s.degree = 1;
    s.coeffs = [m, n](const ChartPoint& p) {
        Vector v = Vector::Zero(2 * n);
        v.head(n) = p.segment(m, n);
        return v;
    };
    s.jacobian = [m, n](const ChartPoint&) {
        Matrix J = Matrix::Zero(2 * n, m + n);
        J.block(0, m, n, n).setIdentity();
        return J;
    };
    return s;
}

/// Omega = X^a ^ P_a + (1/2) C^g_ab y_g X^a ^ X^b, as a matrix in frame order (X.., P..).
inline Matrix canonical_matrix(const ProlongationChart& P, const ChartPoint& p) {
    const int m = P.m, n = P.n;
    const StructureConstants C = P.parent->structure_at(p.head(m));
    const Vector y = p.segment(m, n);
    Matrix W = Matrix::Zero(2 * n, 2 * n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            double v = 0.0;
            for (int g = 0; g < n; ++g) v += C(g, a, b) * y[g];
            W(a, b) = v;
            W(b, a) = -v;
        }
    W.topRightCorner(n, n).setIdentity();
    W.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    return W;
}

inline SymplecticSection canonical_symplectic(const ProlongationChart& P) {
    const int m = P.m, n = P.n;
    std::function<std::vector<Matrix>(const ChartPoint&)> dW;
    if (P.parent->has_analytic_partials()) {
        dW = [P, m, n](const ChartPoint& p) {
            const StructureConstants C = P.parent->structure_at(p.head(m));
            const auto dC = P.parent->structure_derivative(p.head(m));
            const Vector y = p.segment(m, n);
            std::vector<Matrix> out;
            for (int k = 0; k < m + n; ++k) {
                Matrix D = Matrix::Zero(2 * n, 2 * n);
                for (int a = 0; a < n; ++a)
                    for (int b = a + 1; b < n; ++b) {
                        double v = 0.0;
                        if (k < m)
                            for (int g = 0; g < n; ++g) v += dC[k](g, a, b) * y[g];
                        else
                            v = C(k - m, a, b);
                        D(a, b) = v;
                        D(b, a) = -v;
                    }
                out.push_back(std::move(D));
            }
            return out;
        };
    }
    SymplecticSection W = make_symplectic(two_section(P.chart, [P](const ChartPoint& p) { return canonical_matrix(P, p); }, dW));
    return W;
}

/// {H, H'} = -dH/dy_a dH'/dy_b C^g_ab y_g + (dH/dx^i dH'/dy_a - dH/dy_a dH'/dx^i) rho^i_a
inline MultiSection linear_poisson(const ProlongationChart& P, const MultiSection& H, const MultiSection& H2) {
    const int m = P.m, n = P.n;
    MultiSection out;
    out.chart = P.chart;
    out.degree = 0;
    out.coeffs = [P, H, H2, m, n](const ChartPoint& p) {
        const Vector g1 = H.jacobian_at(p).transpose();
        const Vector g2 = H2.jacobian_at(p).transpose();
        const Vector x = p.head(m);
        const Vector y = p.segment(m, n);
        const StructureConstants C = P.parent->structure_at(x);
        const Matrix rho = P.parent->anchor_at(x);
        const Vector dy1 = g1.segment(m, n), dy2 = g2.segment(m, n);
        double v = -y.dot(C.apply(dy1, dy2));
        if (m > 0) v += g1.head(m).dot(rho * dy2) - dy1.dot(rho.transpose() * g2.head(m));
        return Vector::Constant(1, v);
    };
    return out;
}

}  // namespace algmech
