#pragma once

#include "algmech/dynamics.hpp"

#include <optional>

namespace algmech {

/// B over N included in A over M.
struct SubalgebroidData {
    ChartPtr ambient;
    ChartPtr sub;
    MorphismData inclusion;
    int n_chart_dim = 0;
    std::function<Vector(const ChartPoint&)> constraints;  ///< on M, vanishing on i_N(N)
    std::function<ChartPoint(const ChartPoint&)> to_sub;   ///< left inverse of i_N on its image
};

/// Subalgebroid spanned by a constant frame F of A over the affine submanifold x_M = E x_N + offset.
///
/// The anchor of each frame element must be tangent to N and the frame must close under the
/// bracket; is_morphism on the returned inclusion checks both.
inline SubalgebroidData constant_frame_subalgebroid(const ChartPtr& ambient, const Matrix& E, const Vector& offset,
                                                    const Matrix& F, std::string name,
                                                    std::vector<std::string> labels = {}) {
    const int dn = static_cast<int>(E.cols());
    const int rb = static_cast<int>(F.cols());
    const int na = ambient->rank;
    if (E.rows() != ambient->base_dim || F.rows() != na) throw StructuralError("constant_frame_subalgebroid: shapes");
    const Matrix Ep = E.size() ? Matrix(E.completeOrthogonalDecomposition().pseudoInverse()) : Matrix(E.cols(), E.rows());
    const Matrix Fp = F.completeOrthogonalDecomposition().pseudoInverse();
    auto embed = [E, offset](const ChartPoint& x) { return ChartPoint(E * x + offset); };
    auto restrict_c = [F, Fp, rb](const StructureConstants& C) {
        StructureConstants out(rb);
        for (int a = 0; a < rb; ++a)
            for (int b = a + 1; b < rb; ++b) out.set_column(a, b, Fp * C.apply(F.col(a), F.col(b)));
        return out;
    };
    auto chart = std::make_shared<LieAlgebroidChart>();
    chart->name = std::move(name);
    chart->base_dim = dn;
    chart->rank = rb;
    chart->labels = std::move(labels);
    chart->anchor = [ambient, embed, Ep, F](const ChartPoint& x) { return Matrix(Ep * ambient->anchor_at(embed(x)) * F); };
    chart->structure = [ambient, embed, restrict_c](const ChartPoint& x) { return restrict_c(ambient->structure_at(embed(x))); };
    if (ambient->has_analytic_partials()) {
        chart->anchor_partials = [ambient, embed, Ep, E, F, dn](const ChartPoint& x) {
            const auto d = ambient->anchor_derivative(embed(x));
            std::vector<Matrix> out;
            for (int k = 0; k < dn; ++k) {
                Matrix s = Matrix::Zero(ambient->base_dim, ambient->rank);
                for (int j = 0; j < ambient->base_dim; ++j)
                    if (E(j, k) != 0.0) s += E(j, k) * d[j];
                out.push_back(Ep * s * F);
            }
            return out;
        };
        chart->structure_partials = [ambient, embed, restrict_c, E, dn, na](const ChartPoint& x) {
            const auto d = ambient->structure_derivative(embed(x));
            std::vector<StructureConstants> out;
            for (int k = 0; k < dn; ++k) {
                StructureConstants s(na);
                for (int j = 0; j < ambient->base_dim; ++j)
                    if (E(j, k) != 0.0)
                        for (std::size_t q = 0; q < s.raw().size(); ++q) s.raw()[q] += E(j, k) * d[j].raw()[q];
                out.push_back(restrict_c(s));
            }
            return out;
        };
    }
    SubalgebroidData sub;
    sub.ambient = ambient;
    sub.sub = chart;
    sub.n_chart_dim = dn;
    sub.inclusion = MorphismData{chart, ambient, embed, [E](const ChartPoint&) { return E; },
                                 [F](const ChartPoint&) { return F; }};
    const Matrix Pn = Matrix::Identity(E.rows(), E.rows()) - E * Ep;
    sub.constraints = [Pn, offset](const ChartPoint& z) { return Vector(Pn * (z - offset)); };
    sub.to_sub = [Ep, offset](const ChartPoint& z) { return ChartPoint(Ep * (z - offset)); };
    return sub;
}

/// Group G acting on B over N, with the quotient chart realized by a projection and a slice.
struct GroupActionData {
    int group_dim = 0;
    std::function<ChartPoint(const Vector&, const ChartPoint&)> base_action;  ///< psi_g
    std::function<Matrix(const Vector&, const ChartPoint&)> fiber_action;     ///< Psi_g at a point of N
    std::vector<Vector> sample_elements;
    std::function<ChartPoint(const ChartPoint&)> projection;  ///< pi_N
    std::function<Matrix(const ChartPoint&)> projection_jacobian;
    std::function<ChartPoint(const ChartPoint&)> slice;  ///< sigma, pi_N o sigma = id
    std::function<Matrix(const ChartPoint&)> slice_jacobian;
    ChartBox quotient_box;
    std::vector<std::string> quotient_labels;

    Matrix projection_jacobian_at(const ChartPoint& x) const {
        if (projection_jacobian) return projection_jacobian(x);
        return fd_jacobian([this](const Vector& p) { return projection(p); }, x);
    }
    Matrix slice_jacobian_at(const ChartPoint& q) const {
        if (slice_jacobian) return slice_jacobian(q);
        return fd_jacobian([this](const Vector& p) { return slice(p); }, q);
    }

    /// Trivial group: identity action, projection and slice.
    static GroupActionData trivial(int n_dim, int rank, const ChartBox& box, std::vector<std::string> labels = {}) {
        GroupActionData a;
        a.group_dim = 0;
        a.base_action = [](const Vector&, const ChartPoint& x) { return x; };
        a.fiber_action = [rank](const Vector&, const ChartPoint&) { return Matrix(Matrix::Identity(rank, rank)); };
        a.sample_elements = {Vector(0)};
        a.projection = [](const ChartPoint& x) { return x; };
        a.projection_jacobian = [n_dim](const ChartPoint&) { return Matrix(Matrix::Identity(n_dim, n_dim)); };
        a.slice = a.projection;
        a.slice_jacobian = a.projection_jacobian;
        a.quotient_box = box;
        a.quotient_labels = std::move(labels);
        return a;
    }
};

/// Eight equally spaced angles plus three seeded random ones.
inline std::vector<Vector> circle_sample_elements(std::uint64_t seed) {
    std::vector<Vector> out;
    for (int k = 0; k < 8; ++k) out.push_back(Vector::Constant(1, 2.0 * std::numbers::pi * k / 8.0));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < 3; ++k) out.push_back(Vector::Constant(1, uni(rng)));
    return out;
}

struct PresymplecticRestriction {
    ChartPtr sub_chart;
    SymplecticSection omega_B;
    int kernel_dim = 0;
    Report report;
};

/// Omega_B = i_B^* Omega_A with a constant-kernel-dimension check.
inline PresymplecticRestriction restrict(const SubalgebroidData& sub, const SymplecticSection& omega_A,
                                         const std::vector<ChartPoint>& samples, double tol) {
    if (omega_A.chart != sub.ambient) throw StructuralError("restrict: Omega_A is not on the ambient chart");
    PresymplecticRestriction out;
    out.sub_chart = sub.sub;
    out.omega_B = make_symplectic(pullback(sub.inclusion, omega_A.omega));
    CheckResult closed("d^B Omega_B = 0", tol);
    CheckResult constant("dim ker Omega_B constant", 0.0);
    std::optional<MultiSection> d;
    if (sub.sub->rank >= 3) d = differential(out.omega_B.omega);
    std::vector<int> dims;
    for (const auto& x : samples) {
        closed.record(d ? d->at(x).lpNorm<Eigen::Infinity>() : 0.0, x);
        dims.push_back(sub.sub->rank - numerical_rank(out.omega_B.matrix_at(x)));
    }
    out.kernel_dim = dims.empty() ? 0 : dims.front();
    for (std::size_t i = 0; i < dims.size(); ++i) constant.record(std::abs(dims[i] - out.kernel_dim), samples[i]);
    out.report.add(constant);
    out.report.add(closed);
    if (!constant.passed) {
        constant.detail = "kernel dimension varies across samples";
        throw HypothesisError(constant);
    }
    return out;
}

struct ReductionSetup {
    std::string name;
    SubalgebroidData sub;
    GroupActionData action;
    SymplecticSection ambient_omega;
    std::optional<PresymplecticRestriction> omega_B;
    std::vector<Section> kernel_frame;
    std::vector<Section> projectable_frame;
    ChartBox n_box;
    std::optional<MultiSection> hamiltonian;  ///< H_M on the ambient chart
    ChartPoint default_init;                  ///< a point of M on N
    int samples = 20;
    std::uint64_t seed = 7;
    double tol = 1e-8;

    std::vector<ChartPoint> n_samples() const { return sample_points(n_box, samples, seed); }
    std::vector<ChartPoint> quotient_samples(int count) const {
        return sample_points(action.quotient_box, count, seed + 1);
    }

    const PresymplecticRestriction& restriction() const {
        if (!omega_B) throw StructuralError("reduction setup: Omega_B not computed; call prepare()");
        return *omega_B;
    }
};

/// Computes Omega_B; throws HypothesisError on non-constant kernel dimension.
inline void prepare(ReductionSetup& s) {
    if (!s.omega_B) s.omega_B = restrict(s.sub, s.ambient_omega, s.n_samples(), s.tol);
}

inline Matrix frame_matrix(const std::vector<Section>& frame, const ChartPoint& x, int rank) {
    Matrix M(rank, static_cast<Eigen::Index>(frame.size()));
    for (std::size_t i = 0; i < frame.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = frame[i].at(x);
    return M;
}

inline Report verify_kernel_frame(const ReductionSetup& s) {
    const auto& R = s.restriction();
    const int nb = s.sub.sub->rank;
    Report rep;
    CheckResult inker("kernel frame lies in ker Omega_B", s.tol);
    CheckResult count("kernel frame spans ker Omega_B", 0.0);
    CheckResult invol("ker Omega_B is a Lie subalgebroid", s.tol);
    std::vector<Section> brackets;
    for (std::size_t i = 0; i < s.kernel_frame.size(); ++i)
        for (std::size_t j = i + 1; j < s.kernel_frame.size(); ++j)
            brackets.push_back(bracket(s.kernel_frame[i], s.kernel_frame[j]));
    for (const auto& x : s.n_samples()) {
        const Matrix W = R.omega_B.matrix_at(x);
        const Matrix K = frame_matrix(s.kernel_frame, x, nb);
        inker.record(K.size() ? (W * K).lpNorm<Eigen::Infinity>() : 0.0, x);
        const int independent = static_cast<int>(K.cols()) == 0 ? 0 : numerical_rank(K);
        count.record(std::abs(static_cast<int>(K.cols()) - R.kernel_dim) + std::abs(independent - static_cast<int>(K.cols())), x);
        double worst = 0.0;
        for (const auto& b : brackets) worst = std::max(worst, least_squares(K, b.at(x)).residual);
        invol.record(worst, x);
    }
    if (!count.passed) count.detail = "frame size or rank differs from dim ker Omega_B = " + std::to_string(R.kernel_dim);
    rep.add(inker);
    rep.add(count);
    rep.add(invol);
    return rep;
}

inline Report verify_presymplectic_action(const ReductionSetup& s) {
    const auto& R = s.restriction();
    Report rep;
    CheckResult pre("presymplectic action Psi_g^* Omega_B = Omega_B", s.tol);
    CheckResult orbit("projection constant on orbits", 1e-10);
    CheckResult slice("slice is a right inverse of the projection", 1e-12);
    for (const auto& x : s.n_samples()) {
        const Matrix W = R.omega_B.matrix_at(x);
        const ChartPoint px = s.action.projection(x);
        double worst = 0.0, oworst = 0.0;
        for (const auto& g : s.action.sample_elements) {
            const ChartPoint y = s.action.base_action(g, x);
            const Matrix P = s.action.fiber_action(g, x);
            worst = std::max(worst, (P.transpose() * R.omega_B.matrix_at(y) * P - W).lpNorm<Eigen::Infinity>());
            oworst = std::max(oworst, (s.action.projection(y) - px).lpNorm<Eigen::Infinity>());
        }
        pre.record(worst, x);
        orbit.record(oworst, x);
    }
    for (const auto& q : s.quotient_samples(s.samples))
        slice.record((s.action.projection(s.action.slice(q)) - q).lpNorm<Eigen::Infinity>(), q);
    rep.add(pre);
    rep.add(orbit);
    rep.add(slice);
    return rep;
}

inline Report verify_projectable_frame(const ReductionSetup& s) {
    const int nb = s.sub.sub->rank;
    Report rep;
    CheckResult proj("projectable frame Psi_g o X = (X + Y_g) o psi_g", s.tol);
    CheckResult indep("projectable and kernel frames independent", 0.0);
    for (const auto& x : s.n_samples()) {
        double worst = 0.0;
        for (const auto& g : s.action.sample_elements) {
            const ChartPoint y = s.action.base_action(g, x);
            const Matrix P = s.action.fiber_action(g, x);
            const Matrix Ky = frame_matrix(s.kernel_frame, y, nb);
            for (const auto& X : s.projectable_frame) {
                const Vector Yg = P * X.at(x) - X.at(y);
                worst = std::max(worst, least_squares(Ky, Yg).residual);
            }
        }
        proj.record(worst, x);
        Matrix S(nb, static_cast<Eigen::Index>(s.projectable_frame.size() + s.kernel_frame.size()));
        S << frame_matrix(s.projectable_frame, x, nb), frame_matrix(s.kernel_frame, x, nb);
        indep.record(static_cast<double>(S.cols() - numerical_rank(S)), x);
    }
    rep.add(proj);
    rep.add(indep);
    return rep;
}

inline Report verify_algebra_conditions(const ReductionSetup& s) {
    const int nb = s.sub.sub->rank;
    const auto& Pf = s.projectable_frame;
    const auto& Kf = s.kernel_frame;
    const Eigen::Index r = static_cast<Eigen::Index>(Pf.size());
    Report rep;
    CheckResult ci("i) Gamma(B)^p is closed under the bracket", s.tol);
    CheckResult cii("ii) Gamma(ker Omega_B) is an ideal of Gamma(B)^p", s.tol);
    std::vector<Section> pp, pk;
    for (std::size_t i = 0; i < Pf.size(); ++i)
        for (std::size_t j = i + 1; j < Pf.size(); ++j) pp.push_back(bracket(Pf[i], Pf[j]));
    for (std::size_t i = 0; i < Pf.size(); ++i)
        for (std::size_t k = 0; k < Kf.size(); ++k) pk.push_back(bracket(Pf[i], Kf[k]));
    for (std::size_t k = 0; k < Kf.size(); ++k)
        for (std::size_t l = k + 1; l < Kf.size(); ++l) pk.push_back(bracket(Kf[k], Kf[l]));
    for (const auto& x : s.n_samples()) {
        Matrix S(nb, r + static_cast<Eigen::Index>(Kf.size()));
        S << frame_matrix(Pf, x, nb), frame_matrix(Kf, x, nb);
        double wi = 0.0, wii = 0.0;
        for (const auto& b : pp) {
            const Vector Z = b.at(x);
            wi = std::max(wi, least_squares(S, Z).residual);
            // The bracket must itself be projectable: Psi_g Z(x) - Z(psi_g x) in ker at psi_g x.
            for (const auto& g : s.action.sample_elements) {
                const ChartPoint y = s.action.base_action(g, x);
                const Vector D = s.action.fiber_action(g, x) * Z - b.at(y);
                wi = std::max(wi, least_squares(frame_matrix(Kf, y, nb), D).residual);
            }
        }
        for (const auto& b : pk) {
            const LeastSquares ls = least_squares(S, b.at(x));
            wii = std::max(wii, ls.residual);
            if (r > 0) wii = std::max(wii, ls.coeffs.head(r).lpNorm<Eigen::Infinity>());
        }
        ci.record(wi, x);
        cii.record(wii, x);
    }
    rep.add(ci);
    rep.add(cii);
    return rep;
}

namespace detail {

/// Chart over the quotient whose frame is the image of P modulo K, evaluated along the slice.
inline ChartPtr descend_chart(const ChartPtr& chart_B, const std::vector<Section>& P, const std::vector<Section>& K,
                              const GroupActionData& action, std::string name) {
    const int nb = chart_B->rank;
    const int r = static_cast<int>(P.size());
    const int dq = action.quotient_box.dim();
    std::vector<std::pair<std::pair<int, int>, Section>> brackets;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) brackets.push_back({{i, j}, bracket(P[i], P[j])});
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = std::move(name);
    c->base_dim = dq;
    c->rank = r;
    c->labels = action.quotient_labels;
    c->anchor = [chart_B, P, action, nb](const ChartPoint& q) {
        const ChartPoint x = action.slice(q);
        return Matrix(action.projection_jacobian_at(x) * chart_B->anchor_at(x) * frame_matrix(P, x, nb));
    };
    c->structure = [P, K, brackets, action, nb, r](const ChartPoint& q) {
        const ChartPoint x = action.slice(q);
        Matrix S(nb, r + static_cast<Eigen::Index>(K.size()));
        S << frame_matrix(P, x, nb), frame_matrix(K, x, nb);
        StructureConstants C(r);
        for (const auto& [ij, b] : brackets) C.set_column(ij.first, ij.second, least_squares(S, b.at(x)).coeffs.head(r));
        return C;
    };
    return c;
}

}  // namespace detail

struct ReducedModel {
    ChartPtr chart;
    SymplecticSection omega;
    MorphismData projection_morphism;
    std::optional<MultiSection> reduced_H;
    int kernel_dim = 0;
    Report post_checks;
};

/// Runs the four verifications; empty report means not attempted.
inline Report verify_reduction_hypotheses(const ReductionSetup& s) {
    Report rep;
    for (auto* f : {&verify_kernel_frame, &verify_presymplectic_action, &verify_projectable_frame,
                    &verify_algebra_conditions}) {
        rep.append(f(s));
        if (!rep.passed()) break;
    }
    return rep;
}

/// Reduced algebroid and symplectic section; refuses when a hypothesis fails.
inline ReducedModel build_reduced(const ReductionSetup& s) {
    const Report hyp = verify_reduction_hypotheses(s);
    if (const CheckResult* f = hyp.first_failure()) throw HypothesisError(*f);
    const auto& R = s.restriction();
    const int nb = s.sub.sub->rank;
    const int r = static_cast<int>(s.projectable_frame.size());
    ReducedModel out;
    out.kernel_dim = R.kernel_dim;
    out.chart = detail::descend_chart(s.sub.sub, s.projectable_frame, s.kernel_frame, s.action, "reduced(" + s.name + ")");
    const auto P = s.projectable_frame;
    const auto K = s.kernel_frame;
    const GroupActionData action = s.action;
    const SymplecticSection WB = R.omega_B;
    out.omega = make_symplectic(two_section(out.chart, [P, WB, action, nb](const ChartPoint& q) {
        const ChartPoint x = action.slice(q);
        const Matrix F = frame_matrix(P, x, nb);
        return Matrix(F.transpose() * WB.matrix_at(x) * F);
    }));
    out.projection_morphism.source = s.sub.sub;
    out.projection_morphism.target = out.chart;
    out.projection_morphism.base_map = action.projection;
    out.projection_morphism.base_jacobian = action.projection_jacobian;
    out.projection_morphism.fiber_map = [P, K, nb, r](const ChartPoint& x) {
        Matrix S(nb, r + static_cast<Eigen::Index>(K.size()));
        S << frame_matrix(P, x, nb), frame_matrix(K, x, nb);
        return Matrix(S.completeOrthogonalDecomposition().pseudoInverse().topRows(r));
    };

    const auto qs = s.quotient_samples(s.samples);
    AxiomReport ax = check_axioms(out.chart, qs, out.chart->default_tolerance(), s.seed);
    for (auto& c : ax.checks) c.name = "reduced " + c.name;
    out.post_checks.append(ax);
    SymplecticReport sr = verify_symplectic(out.omega, qs, out.chart->default_tolerance());
    for (auto& c : sr.report.checks) c.name = "reduced " + c.name;
    out.post_checks.append(sr.report);

    const auto ns = s.n_samples();
    CheckResult pb("pullback pi_B^* Omega_reduced = Omega_B", 1e-8);
    const MultiSection pulled = pullback(out.projection_morphism, out.omega.omega);
    for (const auto& x : ns)
        pb.record((skew_from_components(pulled.at(x), nb) - WB.matrix_at(x)).lpNorm<Eigen::Infinity>(), x);
    out.post_checks.add(pb);
    Report morph = is_morphism(out.projection_morphism, ns, 1e-7);
    for (auto& c : morph.checks) c.name = "pi_B " + c.name;
    out.post_checks.append(morph);
    return out;
}

struct DynamicsReduction {
    MultiSection reduced_H;
    Report report;
};

/// H_N = H_M o i_N, hypotheses i) and ii), H_reduced = H_N o sigma, and the projection identity.
inline DynamicsReduction reduce_dynamics_report(const ReductionSetup& s, const ReducedModel& red, const MultiSection& H_M,
                                                double tol) {
    if (H_M.chart != s.sub.ambient || H_M.degree != 0) throw StructuralError("reduce_dynamics: H_M must be a function on M");
    const auto ns = s.n_samples();
    const MorphismData inc = s.sub.inclusion;
    const GroupActionData action = s.action;
    DynamicsReduction out;
    CheckResult inv("i) H_N is G-invariant", tol);
    CheckResult tan("ii) Hamiltonian section of H_M is tangent to B along N", tol);
    CheckResult proj("b) projected Hamiltonian section equals the reduced one", 1e-7);

    auto H_N = [H_M, inc](const ChartPoint& x) { return H_M.value(inc.map_point(x)); };
    for (const auto& x : ns) {
        const double h0 = H_N(x);
        double worst = 0.0;
        for (const auto& g : action.sample_elements) worst = std::max(worst, std::abs(H_N(action.base_action(g, x)) - h0));
        inv.record(worst, x);
    }
    if (!inv.passed) inv.detail = "H_N not G-invariant";
    out.report.add(inv);
    if (!inv.passed) return out;

    const Section HA = hamiltonian_section(s.ambient_omega, H_M);
    for (const auto& x : ns) tan.record(least_squares(inc.fiber_at(x), HA.at(inc.map_point(x))).residual, x);
    if (!tan.passed) tan.detail = "Hamiltonian section not tangent to B";
    out.report.add(tan);
    if (!tan.passed) return out;

    std::function<Vector(const ChartPoint&)> grad;
    if (H_M.jacobian && inc.base_jacobian) {
        grad = [H_M, inc, action](const ChartPoint& q) {
            const ChartPoint x = action.slice(q);
            const Matrix J = inc.base_jacobian_at(x) * action.slice_jacobian_at(q);
            return Vector((H_M.jacobian_at(inc.map_point(x)) * J).transpose());
        };
    }
    out.reduced_H = scalar_field(red.chart, [H_N, action](const ChartPoint& q) { return H_N(action.slice(q)); }, grad);

    const Section Hred = hamiltonian_section(red.omega, out.reduced_H);
    for (const auto& x : ns) {
        const Vector b = least_squares(inc.fiber_at(x), HA.at(inc.map_point(x))).coeffs;
        const Vector lhs = red.projection_morphism.fiber_at(x) * b;
        proj.record((lhs - Hred.at(action.projection(x))).lpNorm<Eigen::Infinity>(), x);
    }
    out.report.add(proj);
    return out;
}

inline DynamicsReduction reduce_dynamics(const ReductionSetup& s, ReducedModel& red, const MultiSection& H_M, double tol) {
    DynamicsReduction d = reduce_dynamics_report(s, red, H_M, tol);
    if (const CheckResult* f = d.report.first_failure()) throw HypothesisError(*f);
    red.reduced_H = d.reduced_H;
    return d;
}

struct CommutationResult {
    double max_deviation = 0.0;
    double constraint_drift = 0.0;
    Trajectory full;
    Trajectory reduced;
};

/// Integrates the full and reduced Hamiltonian fields and compares pi_N o gamma with the reduced curve.
inline CommutationResult verify_commutation(const ReductionSetup& s, const ReducedModel& red, const MultiSection& H_M,
                                            const MultiSection& H_red, const ChartPoint& init, double t_end, double h) {
    require_dim(init.size(), s.sub.ambient->base_dim, "commutation initial point");
    if (s.sub.constraints(init).lpNorm<Eigen::Infinity>() > 1e-10)
        throw InputError("initial point " + format_point(init) + " does not lie on N");
    const SymplecticSection WA = s.ambient_omega;
    const SymplecticSection Wr = red.omega;
    CommutationResult out;
    out.full = integrate_field([&](const Vector& z) { return hamiltonian_vector_field(WA, H_M, z); },
                               [&](const Vector& z) { return H_M.value(z); }, init, t_end, h);
    const ChartPoint q0 = s.action.projection(s.sub.to_sub(init));
    out.reduced = integrate_field([&](const Vector& q) { return hamiltonian_vector_field(Wr, H_red, q); },
                                  [&](const Vector& q) { return H_red.value(q); }, q0, t_end, h);
    out.full.labels = s.sub.ambient->labels;
    out.full.periodic = s.sub.ambient->periodic;
    out.reduced.labels = red.chart->labels;
    if (out.full.aborted || out.reduced.aborted)
        throw NumericError("commutation run aborted: " + out.full.diagnostic + out.reduced.diagnostic, init);
    for (std::size_t k = 0; k < out.full.states.size(); ++k) {
        const Vector& z = out.full.states[k];
        out.constraint_drift = std::max(out.constraint_drift, s.sub.constraints(z).lpNorm<Eigen::Infinity>());
        const Vector d = s.action.projection(s.sub.to_sub(z)) - out.reduced.states[k];
        out.max_deviation = std::max(out.max_deviation, d.lpNorm<Eigen::Infinity>());
    }
    return out;
}

/// A/G for an invariant frame of A; brackets of the frame must be invariant as well.
inline ChartPtr quotient_algebroid(const ChartPtr& ambient, const GroupActionData& action,
                                   const std::vector<Section>& invariant_frame, const std::vector<ChartPoint>& samples,
                                   double tol) {
    const int n = ambient->rank;
    if (static_cast<int>(invariant_frame.size()) != n) throw StructuralError("quotient_algebroid: frame must span A");
    CheckResult inv("invariant frame Psi_g o X = X o psi_g", tol);
    std::vector<Section> br;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) br.push_back(bracket(invariant_frame[i], invariant_frame[j]));
    for (const auto& x : samples) {
        double worst = 0.0;
        for (const auto& g : action.sample_elements) {
            const ChartPoint y = action.base_action(g, x);
            const Matrix P = action.fiber_action(g, x);
            for (const auto& X : invariant_frame) worst = std::max(worst, (P * X.at(x) - X.at(y)).lpNorm<Eigen::Infinity>());
            for (const auto& b : br) worst = std::max(worst, (P * b.at(x) - b.at(y)).lpNorm<Eigen::Infinity>());
        }
        inv.record(worst, x);
    }
    if (!inv.passed) {
        inv.detail = "non-invariant frame";
        throw HypothesisError(inv);
    }
    return detail::descend_chart(ambient, invariant_frame, {}, action, "quotient(" + ambient->name + ")");
}

/// Sections X_k^F = (F_k, -F^{-T} (d_{rho F_k} F)^T y) and P_k^F = (0, F^{-T} e_k) of the prolongation.
///
/// These are the prolongation frame obtained after first moving A to the frame F.
inline std::vector<Section> lift_frame(const ProlongationChart& P, const std::vector<Section>& F) {
    const int m = P.m, n = P.n;
    std::vector<Section> out;
    const ChartPtr parent = P.parent;
    auto Fmat = [F, n](const ChartPoint& x) { return frame_matrix(F, x, n); };
    for (int k = 0; k < n; ++k) {
        Section s;
        s.chart = P.chart;
        s.coeffs = [F, Fmat, parent, m, n, k](const ChartPoint& p) {
            const Vector x = p.head(m), y = p.tail(n);
            const Matrix Fx = Fmat(x);
            const Vector dir = parent->anchor_at(x) * Fx.col(k);
            Matrix dF = Matrix::Zero(n, n);
            for (int j = 0; j < n; ++j) dF.col(j) = F[j].jacobian_at(x) * dir;
            Vector v(2 * n);
            v.head(n) = Fx.col(k);
            v.tail(n) = -Fx.transpose().partialPivLu().solve(dF.transpose() * y);
            return v;
        };
        out.push_back(s);
    }
    for (int k = 0; k < n; ++k) {
        Section s;
        s.chart = P.chart;
        s.coeffs = [Fmat, m, n, k](const ChartPoint& p) {
            Vector v = Vector::Zero(2 * n);
            v.tail(n) = Fmat(p.head(m)).transpose().partialPivLu().solve(Vector::Unit(n, k));
            return v;
        };
        out.push_back(s);
    }
    return out;
}

/// Induced action on the dual and on its prolongation; the quotient of the dual uses y~ = F(x)^T y.
inline GroupActionData lift_action(const ProlongationChart& P, const GroupActionData& action,
                                   const std::vector<Section>& F) {
    const int m = P.m, n = P.n;
    const ChartPtr parent = P.parent;
    auto Fmat = [F, n](const ChartPoint& x) { return frame_matrix(F, x, n); };
    GroupActionData a;
    a.group_dim = action.group_dim;
    a.sample_elements = action.sample_elements;
    a.base_action = [action, m, n](const Vector& g, const ChartPoint& p) {
        const Vector x = p.head(m);
        ChartPoint out(m + n);
        out << action.base_action(g, x), action.fiber_action(g, x).transpose().partialPivLu().solve(Vector(p.tail(n)));
        return out;
    };
    a.fiber_action = [action, parent, m, n](const Vector& g, const ChartPoint& p) {
        const Vector x = p.head(m), y = p.tail(n);
        const Matrix Psi = action.fiber_action(g, x);
        const Matrix PsiInvT = Psi.transpose().inverse();
        Matrix D = Matrix::Zero(n, n);
        if (m > 0) {
            const Matrix J = fd_jacobian(
                [&](const Vector& xx) { return Vector(action.fiber_action(g, xx).transpose().partialPivLu().solve(y)); }, x);
            D = J * parent->anchor_at(x);
        }
        Matrix T = Matrix::Zero(2 * n, 2 * n);
        T.topLeftCorner(n, n) = Psi;
        T.bottomLeftCorner(n, n) = D;
        T.bottomRightCorner(n, n) = PsiInvT;
        return T;
    };
    const int dq = action.quotient_box.dim();
    a.projection = [action, Fmat, m, n, dq](const ChartPoint& p) {
        const Vector x = p.head(m);
        ChartPoint out(dq + n);
        out << action.projection(x), Fmat(x).transpose() * p.tail(n);
        return out;
    };
    a.slice = [action, Fmat, n, dq](const ChartPoint& q) {
        const ChartPoint x = action.slice(q.head(dq));
        ChartPoint out(x.size() + n);
        out << x, Fmat(x).transpose().partialPivLu().solve(Vector(q.tail(n)));
        return out;
    };
    a.quotient_box = action.quotient_box.extended(n, 1.5);
    a.quotient_labels = action.quotient_labels;
    for (const auto& l : parent->fiber_labels()) a.quotient_labels.push_back(l + "~");
    return a;
}

/// Entrywise comparison of anchors and structure functions of two charts in matching frames.
inline Report compare_structure(const ChartPtr& a, const ChartPtr& b, const std::vector<ChartPoint>& samples, double tol) {
    if (a->base_dim != b->base_dim || a->rank != b->rank) throw StructuralError("compare_structure: shapes differ");
    Report rep;
    CheckResult anc("anchors agree", tol);
    CheckResult str("structure functions agree", tol);
    for (const auto& x : samples) {
        anc.record(a->base_dim ? (a->anchor_at(x) - b->anchor_at(x)).lpNorm<Eigen::Infinity>() : 0.0, x);
        const auto ca = a->structure_at(x).raw();
        const auto cb = b->structure_at(x).raw();
        double w = 0.0;
        for (std::size_t i = 0; i < ca.size(); ++i) w = std::max(w, std::abs(ca[i] - cb[i]));
        str.record(w, x);
    }
    rep.add(anc);
    rep.add(str);
    return rep;
}

/// Staged pipeline: stops at the first stage whose checks fail.
struct PipelineResult {
    Report report;
    std::optional<ReducedModel> reduced;
    bool passed() const { return report.passed(); }
};

inline PipelineResult run_reduction(ReductionSetup& s) {
    PipelineResult out;
    const auto ns = s.n_samples();
    auto stage = [&out](Report r, const std::string& suffix) {
        for (auto& c : r.checks)
            if (!suffix.empty()) c.name += suffix;
        out.report.append(r);
        return r.passed();
    };
    std::vector<ChartPoint> ms;
    for (const auto& x : ns) ms.push_back(s.sub.inclusion.map_point(x));
    if (!stage(check_axioms(s.sub.ambient, ms, s.sub.ambient->default_tolerance(), s.seed), " [A]")) return out;
    if (!stage(check_axioms(s.sub.sub, ns, s.sub.sub->default_tolerance(), s.seed), " [B]")) return out;
    Report inc = is_morphism(s.sub.inclusion, ns, s.tol);
    for (auto& c : inc.checks) c.name = "i_B " + c.name;
    if (!stage(inc, "")) return out;
    try {
        prepare(s);
    } catch (const HypothesisError& e) {
        Report r;
        r.add(e.check);
        stage(r, "");
        return out;
    }
    if (!stage(s.omega_B->report, "")) return out;
    for (auto* f : {&verify_kernel_frame, &verify_presymplectic_action, &verify_projectable_frame,
                    &verify_algebra_conditions})
        if (!stage(f(s), "")) return out;
    ReducedModel red = build_reduced(s);
    const bool post_ok = stage(red.post_checks, "");
    if (post_ok && s.hamiltonian) {
        DynamicsReduction d = reduce_dynamics_report(s, red, *s.hamiltonian, s.tol);
        if (stage(d.report, "")) red.reduced_H = d.reduced_H;
    }
    out.reduced = std::move(red);
    return out;
}

}  // namespace algmech
