#pragma once

#include "algmech/algebroid.hpp"

namespace algmech {

namespace detail {

/// Index tuple t with positions i (and j) removed.
inline std::vector<int> drop(const std::vector<int>& t, std::size_t i, std::size_t j = static_cast<std::size_t>(-1)) {
    std::vector<int> out;
    out.reserve(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
        if (k != i && k != j) out.push_back(t[k]);
    return out;
}

}  // namespace detail

/// d^A mu evaluated by the alternating-sum formula on frame sections.
inline MultiSection differential(const MultiSection& mu) {
    ChartPtr chart = mu.chart;
    const int n = chart->rank;
    const int k = mu.degree;
    if (k + 1 > n) throw StructuralError("differential: degree " + std::to_string(k + 1) + " exceeds rank");
    const auto tuples = increasing_tuples(n, k + 1);
    MultiSection out;
    out.chart = chart;
    out.degree = k + 1;
    out.coeffs = [mu, chart, tuples, n, k](const ChartPoint& x) {
        const Vector c = mu.at(x);
        Vector r = Vector::Zero(static_cast<Eigen::Index>(tuples.size()));
        Matrix D;  // D(I, a) = rho(e_a)(mu_I)
        if (chart->base_dim > 0) D = mu.jacobian_at(x) * chart->anchor_at(x);
        const StructureConstants C = chart->structure_at(x);
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            const auto& T = tuples[t];
            double s = 0.0;
            if (chart->base_dim > 0) {
                for (int i = 0; i <= k; ++i) {
                    const auto I = detail::drop(T, i);
                    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
                    s += sign * D(tuple_rank(I, n), T[i]);
                }
            }
            for (int i = 0; i <= k; ++i)
                for (int j = i + 1; j <= k; ++j) {
                    const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                    auto rest = detail::drop(T, i, j);
                    rest.insert(rest.begin(), 0);
                    for (int g = 0; g < n; ++g) {
                        const double cg = C(g, T[i], T[j]);
                        if (cg == 0.0) continue;
                        rest[0] = g;
                        s += sign * cg * MultiSection::component(c, rest, n);
                    }
                }
            r[static_cast<Eigen::Index>(t)] = s;
        }
        require_finite(r, x, "differential");
        return r;
    };
    return out;
}

/// Interior product i(X) mu.
inline MultiSection contract(const Section& X, const MultiSection& mu) {
    if (X.chart != mu.chart) throw StructuralError("contract: different charts");
    if (mu.degree < 1) throw StructuralError("contract: degree 0 multisection");
    const int n = mu.chart->rank;
    const auto tuples = increasing_tuples(n, mu.degree - 1);
    MultiSection out;
    out.chart = mu.chart;
    out.degree = mu.degree - 1;
    out.coeffs = [X, mu, tuples, n](const ChartPoint& x) {
        const Vector c = mu.at(x);
        const Vector a = X.at(x);
        Vector r = Vector::Zero(static_cast<Eigen::Index>(tuples.size()));
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            std::vector<int> idx = tuples[t];
            idx.insert(idx.begin(), 0);
            double s = 0.0;
            for (int al = 0; al < n; ++al) {
                if (a[al] == 0.0) continue;
                idx[0] = al;
                s += a[al] * MultiSection::component(c, idx, n);
            }
            r[static_cast<Eigen::Index>(t)] = s;
        }
        return r;
    };
    return out;
}

/// (mu ^ nu)(v_1..v_{k+l}) = sum over shuffles of sign * mu(..) nu(..); no normalizing factor.
inline MultiSection wedge(const MultiSection& mu, const MultiSection& nu) {
    if (mu.chart != nu.chart) throw StructuralError("wedge: different charts");
    const int n = mu.chart->rank;
    const int k = mu.degree;
    const int l = nu.degree;
    if (k + l > n) throw StructuralError("wedge: degree overflow");
    const auto tuples = increasing_tuples(n, k + l);
    // Split each output tuple into (positions for mu, positions for nu) with shuffle sign.
    struct Term {
        long out, left, right;
        double sign;
    };
    std::vector<Term> terms;
    const auto splits = increasing_tuples(k + l, k);
    for (std::size_t t = 0; t < tuples.size(); ++t) {
        for (const auto& S : splits) {
            std::vector<int> left, right, perm;
            std::vector<bool> in(k + l, false);
            for (int p : S) in[p] = true;
            for (int p = 0; p < k + l; ++p) (in[p] ? left : right).push_back(tuples[t][p]);
            perm = S;
            for (int p = 0; p < k + l; ++p)
                if (!in[p]) perm.push_back(p);
            const double sign = sort_with_sign(perm);
            terms.push_back({static_cast<long>(t), tuple_rank(left, n), tuple_rank(right, n), sign});
        }
    }
    const long size = static_cast<long>(tuples.size());
    MultiSection out;
    out.chart = mu.chart;
    out.degree = k + l;
    out.coeffs = [mu, nu, terms, size](const ChartPoint& x) {
        const Vector a = mu.at(x);
        const Vector b = nu.at(x);
        Vector r = Vector::Zero(size);
        for (const auto& t : terms) r[t.out] += t.sign * a[t.left] * b[t.right];
        return r;
    };
    if (mu.jacobian && nu.jacobian) {
        const int m = mu.chart->base_dim;
        out.jacobian = [mu, nu, terms, size, m](const ChartPoint& x) {
            const Vector a = mu.at(x);
            const Vector b = nu.at(x);
            const Matrix da = mu.jacobian_at(x);
            const Matrix db = nu.jacobian_at(x);
            Matrix r = Matrix::Zero(size, m);
            for (const auto& t : terms) r.row(t.out) += t.sign * (a[t.left] * db.row(t.right) + b[t.right] * da.row(t.left));
            return r;
        };
    }
    return out;
}

inline MultiSection scale(const MultiSection& f, const MultiSection& mu) {
    MultiSection out = mu;
    out.coeffs = [f, mu](const ChartPoint& x) { return Vector(f.value(x) * mu.at(x)); };
    if (f.jacobian && mu.jacobian)
        out.jacobian = [f, mu](const ChartPoint& x) {
            return Matrix(f.value(x) * mu.jacobian_at(x) + mu.at(x) * f.jacobian_at(x));
        };
    else
        out.jacobian = nullptr;
    return out;
}

inline MultiSection add(const MultiSection& a, const MultiSection& b) {
    if (a.chart != b.chart || a.degree != b.degree) throw StructuralError("add: incompatible multisections");
    MultiSection out = a;
    out.coeffs = [a, b](const ChartPoint& x) { return Vector(a.at(x) + b.at(x)); };
    if (a.jacobian && b.jacobian)
        out.jacobian = [a, b](const ChartPoint& x) { return Matrix(a.jacobian_at(x) + b.jacobian_at(x)); };
    else
        out.jacobian = nullptr;
    return out;
}

/// Bundle map F: source -> target over the base map f.
struct MorphismData {
    ChartPtr source;
    ChartPtr target;
    std::function<ChartPoint(const ChartPoint&)> base_map;
    std::function<Matrix(const ChartPoint&)> base_jacobian;  ///< optional
    std::function<Matrix(const ChartPoint&)> fiber_map;      ///< target rank x source rank

    ChartPoint map_point(const ChartPoint& x) const {
        require_dim(x.size(), source->base_dim, "morphism base point");
        ChartPoint y = base_map(x);
        require_dim(y.size(), target->base_dim, "morphism image point");
        return y;
    }

    Matrix fiber_at(const ChartPoint& x) const {
        Matrix F = fiber_map(x);
        if (F.rows() != target->rank || F.cols() != source->rank)
            throw StructuralError("morphism fiber map has wrong shape");
        require_finite(F, x, "fiber map");
        return F;
    }

    Matrix base_jacobian_at(const ChartPoint& x) const {
        if (source->base_dim == 0) return Matrix(target->base_dim, 0);
        if (base_jacobian) return base_jacobian(x);
        return fd_jacobian([this](const Vector& p) { return base_map(p); }, x);
    }
};

inline MorphismData identity_morphism(ChartPtr chart) {
    const int m = chart->base_dim;
    const int n = chart->rank;
    return MorphismData{chart, chart, [](const ChartPoint& x) { return x; },
                        [m](const ChartPoint&) { return Matrix(Matrix::Identity(m, m)); },
                        [n](const ChartPoint&) { return Matrix(Matrix::Identity(n, n)); }};
}

/// Composition F after G (G: A -> A', F: A' -> A'').
inline MorphismData compose(const MorphismData& F, const MorphismData& G) {
    if (G.target != F.source) throw StructuralError("compose: chart mismatch");
    MorphismData r;
    r.source = G.source;
    r.target = F.target;
    r.base_map = [F, G](const ChartPoint& x) { return F.map_point(G.map_point(x)); };
    r.fiber_map = [F, G](const ChartPoint& x) { return Matrix(F.fiber_at(G.map_point(x)) * G.fiber_at(x)); };
    return r;
}

/// (F^* mu')_x(a_1..a_k) = mu'_{f(x)}(F a_1, .., F a_k)
inline MultiSection pullback(const MorphismData& F, const MultiSection& mu) {
    if (mu.chart != F.target) throw StructuralError("pullback: multisection not on the morphism target");
    const int k = mu.degree;
    const int ns = F.source->rank;
    const int nt = F.target->rank;
    const auto src = increasing_tuples(ns, k);
    const auto tgt = increasing_tuples(nt, k);
    MultiSection out;
    out.chart = F.source;
    out.degree = k;
    out.coeffs = [F, mu, src, tgt, k](const ChartPoint& x) {
        const Vector c = mu.at(F.map_point(x));
        if (k == 0) return c;
        const Matrix A = F.fiber_at(x);
        Vector r = Vector::Zero(static_cast<Eigen::Index>(src.size()));
        Matrix sub(k, k);
        if (k == 2) {
            for (std::size_t s = 0; s < src.size(); ++s) {
                const int i = src[s][0], j = src[s][1];
                double v = 0.0;
                for (std::size_t t = 0; t < tgt.size(); ++t) {
                    const int p = tgt[t][0], q = tgt[t][1];
                    v += c[static_cast<Eigen::Index>(t)] * (A(p, i) * A(q, j) - A(q, i) * A(p, j));
                }
                r[static_cast<Eigen::Index>(s)] = v;
            }
            return r;
        }
        for (std::size_t s = 0; s < src.size(); ++s) {
            double v = 0.0;
            for (std::size_t t = 0; t < tgt.size(); ++t) {
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) sub(a, b) = A(tgt[t][a], src[s][b]);
                v += c[static_cast<Eigen::Index>(t)] * sub.determinant();
            }
            r[static_cast<Eigen::Index>(s)] = v;
        }
        return r;
    };
    if (k == 0 && mu.jacobian && F.base_jacobian) {
        out.jacobian = [F, mu](const ChartPoint& x) {
            return Matrix(mu.jacobian_at(F.map_point(x)) * F.base_jacobian_at(x));
        };
    }
    return out;
}

/// Both morphism conditions: on target coordinate functions and on target dual-frame 1-sections.
inline Report is_morphism(const MorphismData& F, const std::vector<ChartPoint>& samples, double tol) {
    Report rep;
    CheckResult coord("morphism condition on coordinate functions", tol);
    CheckResult frame("morphism condition on frame 1-sections", tol);
    const int nt = F.target->rank;
    // Degree-2 sections exist only for rank >= 2; below that both sides vanish.
    const bool src2 = F.source->rank >= 2;
    const bool tgt2 = nt >= 2;
    std::vector<MultiSection> lhs, rhs;
    if (src2) {
        for (int g = 0; g < nt; ++g) {
            const MultiSection e = dual_frame(F.target, g);
            lhs.push_back(differential(pullback(F, e)));
            if (tgt2) rhs.push_back(pullback(F, differential(e)));
        }
    }
    for (const auto& x : samples) {
        const ChartPoint y = F.map_point(x);
        // d^A(g' o f) = F^*(d^{A'} g') for g' = x'^j reads Df rho_A = rho_{A'}(f(x)) F.
        const Matrix cres = F.base_jacobian_at(x) * F.source->anchor_at(x) - F.target->anchor_at(y) * F.fiber_at(x);
        coord.record(cres.size() ? cres.lpNorm<Eigen::Infinity>() : 0.0, x);
        double worst = 0.0;
        if (src2) {
            for (int g = 0; g < nt; ++g) {
                Vector d = lhs[g].at(x);
                if (tgt2) d -= rhs[g].at(x);
                worst = std::max(worst, d.lpNorm<Eigen::Infinity>());
            }
        }
        frame.record(worst, x);
    }
    rep.add(coord);
    rep.add(frame);
    return rep;
}

}  // namespace algmech
