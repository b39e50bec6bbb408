#pragma once

#include "algmech/reduction.hpp"

namespace algmech {

struct AuxVariable {
    std::string name;
    std::function<double(const ChartPoint&)> value;
    std::function<Vector(const ChartPoint&)> gradient;
};

/// Everything a command may need from a model; absent parts are empty.
struct BuiltModel {
    std::string name;
    ParameterMap params;
    ChartPtr chart;  ///< the algebroid A checked by verify
    ChartBox box;
    std::optional<HamiltonianSystem> system;        ///< Hamilton equations on the dual
    std::optional<SymplecticSection> symplectic;    ///< when the model is itself a symplectic algebroid
    std::optional<MultiSection> hamiltonian;        ///< H on chart, paired with symplectic
    std::optional<ReductionSetup> reduction;
    ChartPoint default_init;
    std::function<Vector(const ChartPoint&)> embedding;  ///< chart to ambient Euclidean space
    /// Extra variables available to user Hamiltonians, as functions of the state.
    std::vector<AuxVariable> aux_variables;

    /// Labels of the state on which simulate integrates.
    std::vector<std::string> state_labels() const {
        if (system) return system->prolong.chart->labels;
        if (symplectic) return symplectic->chart->coordinate_labels();
        return {};
    }
};

struct ModelRecord {
    std::string name;
    std::string docs;
    ParameterMap defaults;
    std::function<void(const ParameterMap&)> validate;
    std::function<BuiltModel(const ParameterMap&)> builder;
};

namespace models {

inline StructureConstants so3() {
    StructureConstants c(3);
    c.set(2, 0, 1, 1.0);
    c.set(0, 1, 2, 1.0);
    c.set(1, 2, 0, 1.0);
    return c;
}

inline void require_positive(const ParameterMap& p, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (!(p.at(k) > 0.0)) throw InputError(std::string("parameter ") + k + " must be positive");
}

inline ChartPtr tangent_bundle(int n) {
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = "tangent-bundle";
    c->base_dim = n;
    c->rank = n;
    c->labels = default_labels("q", n);
    c->dual_labels = default_labels("p", n);
    c->anchor = [n](const ChartPoint&) { return Matrix(Matrix::Identity(n, n)); };
    c->structure = [n](const ChartPoint&) { return StructureConstants(n); };
    c->anchor_partials = [n](const ChartPoint&) { return std::vector<Matrix>(n, Matrix::Zero(n, n)); };
    c->structure_partials = [n](const ChartPoint&) { return std::vector<StructureConstants>(n, StructureConstants(n)); };
    return c;
}

inline ChartPtr named_lie_algebra(const StructureConstants& c, std::string name, std::string stem = "y") {
    auto chart = std::make_shared<LieAlgebroidChart>(*lie_algebra_chart(c, std::move(name)));
    chart->dual_labels = default_labels(stem, c.rank());
    return chart;
}

/// so(3) acting on R^3 by rho(xi)(x) = -xi x x.
inline ChartPtr so3_cartesian() {
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = "so3-sphere";
    c->base_dim = 3;
    c->rank = 3;
    c->labels = {"x", "y", "z"};
    c->dual_labels = default_labels("p", 3);
    auto cross_matrix = [](const Eigen::Vector3d& v) {
        Matrix M(3, 3);
        M << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
        return M;
    };
    // Column a is -e_a x x = x x e_a, i.e. [x]_x.
    c->anchor = [cross_matrix](const ChartPoint& x) { return cross_matrix(Eigen::Vector3d(x[0], x[1], x[2])); };
    c->structure = [](const ChartPoint&) { return so3(); };
    c->anchor_partials = [cross_matrix](const ChartPoint&) {
        std::vector<Matrix> out;
        for (int k = 0; k < 3; ++k) out.push_back(cross_matrix(Eigen::Vector3d::Unit(k)));
        return out;
    };
    c->structure_partials = [](const ChartPoint&) { return std::vector<StructureConstants>(3, StructureConstants(3)); };
    return c;
}

/// mu(theta, t) = (cos theta / cosh t, sin theta / cosh t, tanh t)
inline Vector cylinder_embedding(const ChartPoint& x) {
    const double ch = std::cosh(x[1]);
    return Eigen::Vector3d(std::cos(x[0]) / ch, std::sin(x[0]) / ch, std::tanh(x[1]));
}

/// The so(3) action algebroid on the punctured sphere in the (theta, t) chart.
///
/// defect adds defect cos(theta) mu(x) to [e1,e2]; mu spans ker rho, so the anchor stays a
/// morphism, while the theta dependence breaks the Jacobi identity.
inline ChartPtr lagrange_chart(double defect = 0.0) {
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = "lagrange-top-chart";
    c->base_dim = 2;
    c->rank = 3;
    c->labels = {"theta", "t"};
    c->dual_labels = default_labels("p", 3);
    c->periodic = {true, false};
    c->anchor = [](const ChartPoint& x) {
        const double s = std::sin(x[0]), co = std::cos(x[0]), sh = std::sinh(x[1]), ch = std::cosh(x[1]);
        Matrix R(2, 3);
        R << co * sh, s * sh, -1.0, -s * ch, co * ch, 0.0;
        return R;
    };
    const StructureConstants C0 = so3();
    c->structure = [C0, defect](const ChartPoint& x) {
        StructureConstants C = C0;
        if (defect != 0.0) {
            const Vector mu = cylinder_embedding(x);
            for (int g = 0; g < 3; ++g) C.set(g, 0, 1, C(g, 0, 1) + defect * std::cos(x[0]) * mu[g]);
        }
        return C;
    };
    c->anchor_partials = [](const ChartPoint& x) {
        const double s = std::sin(x[0]), co = std::cos(x[0]), sh = std::sinh(x[1]), ch = std::cosh(x[1]);
        Matrix dth(2, 3), dt(2, 3);
        dth << -s * sh, co * sh, 0.0, -co * ch, -s * ch, 0.0;
        dt << co * ch, s * ch, 0.0, -s * sh, co * sh, 0.0;
        return std::vector<Matrix>{dth, dt};
    };
    c->structure_partials = [defect](const ChartPoint& x) {
        std::vector<StructureConstants> out(2, StructureConstants(3));
        if (defect == 0.0) return out;
        const double s = std::sin(x[0]), co = std::cos(x[0]), ch = std::cosh(x[1]), th = std::tanh(x[1]);
        const Vector mu = cylinder_embedding(x);
        const Eigen::Vector3d dmu_dth(-s / ch, co / ch, 0.0);
        const Eigen::Vector3d dmu_dt(-co * th / ch, -s * th / ch, 1.0 / (ch * ch));
        for (int g = 0; g < 3; ++g) {
            out[0].set(g, 0, 1, defect * (co * dmu_dth[g] - s * mu[g]));
            out[1].set(g, 0, 1, defect * co * dmu_dt[g]);
        }
        return out;
    };
    return c;
}

/// Connection with affine entries, so every second derivative vanishes.
inline AtiyahLocalData atiyah_example() {
    AtiyahLocalData d;
    d.base_dim = 2;
    d.algebra = so3();
    // D^a_i = A(a, i) + B1(a, i) x1 + B2(a, i) x2
    Matrix A(3, 2), B1(3, 2), B2(3, 2);
    A << 0.3, 0.1, 0.0, -0.4, 0.0, 0.2;
    B1 << 0.0, 0.0, 0.2, 0.3, 0.0, 0.1;
    B2 << 0.5, 0.0, 0.0, 0.0, 0.1, 0.0;
    const StructureConstants c = d.algebra;
    d.connection = [A, B1, B2](const ChartPoint& x) { return Matrix(A + B1 * x[0] + B2 * x[1]); };
    d.connection_partials = [B1, B2](const ChartPoint&) { return std::vector<Matrix>{B1, B2}; };
    // R^c_ij = d_i D^c_j - d_j D^c_i - c^c_ab D^a_i D^b_j
    auto curvature_from = [c](const Matrix& D, const std::vector<Matrix>& dD) {
        std::vector<Matrix> R(3, Matrix::Zero(2, 2));
        for (int cc = 0; cc < 3; ++cc) {
            double v = dD[0](cc, 1) - dD[1](cc, 0);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) v -= c(cc, a, b) * D(a, 0) * D(b, 1);
            R[cc](0, 1) = v;
            R[cc](1, 0) = -v;
        }
        return R;
    };
    d.curvature = [d, curvature_from](const ChartPoint& x) {
        return curvature_from(d.connection(x), d.connection_partials(x));
    };
    d.curvature_partials = [d, c](const ChartPoint& x) {
        const Matrix D = d.connection(x);
        const auto dD = d.connection_partials(x);
        std::vector<std::vector<Matrix>> out;
        for (int k = 0; k < 2; ++k) {
            std::vector<Matrix> R(3, Matrix::Zero(2, 2));
            for (int cc = 0; cc < 3; ++cc) {
                double v = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) v -= c(cc, a, b) * (dD[k](a, 0) * D(b, 1) + D(a, 0) * dD[k](b, 1));
                R[cc](0, 1) = v;
                R[cc](1, 0) = -v;
            }
            out.push_back(R);
        }
        return out;
    };
    return d;
}

inline MultiSection quadratic_hamiltonian(ChartPtr chart, const Vector& weights) {
    return scalar_field(
        chart, [weights](const ChartPoint& s) { return 0.5 * (weights.array() * s.array().square()).sum(); },
        [weights](const ChartPoint& s) { return Vector(weights.array() * s.array()); });
}

/// H = (p1^2/I + p2^2/I + p3^2/J)/2 + mgl tanh t + tilt cos(theta)/cosh t on (theta, t, p1, p2, p3).
inline MultiSection lagrange_hamiltonian(ChartPtr chart, const ParameterMap& p) {
    const double I = p.at("I"), J = p.at("J"), mgl = p.at("m") * p.at("g") * p.at("l"), tilt = p.at("tilt");
    return scalar_field(
        chart,
        [=](const ChartPoint& s) {
            return 0.5 * (s[2] * s[2] / I + s[3] * s[3] / I + s[4] * s[4] / J) + mgl * std::tanh(s[1]) +
                   tilt * std::cos(s[0]) / std::cosh(s[1]);
        },
        [=](const ChartPoint& s) {
            const double ch = std::cosh(s[1]);
            Vector g(5);
            g << -tilt * std::sin(s[0]) / ch, mgl / (ch * ch) - tilt * std::cos(s[0]) * std::sinh(s[1]) / (ch * ch),
                s[2] / I, s[3] / I, s[4] / J;
            return g;
        });
}

/// x, y, z of the embedded sphere as functions of (theta, t, ...).
inline void add_sphere_aux(BuiltModel& b, int state_dim) {
    static const char* names[] = {"x", "y", "z"};
    for (int k = 0; k < 3; ++k) {
        b.aux_variables.push_back(
            {names[k], [k](const ChartPoint& s) { return cylinder_embedding(s.head(2))[k]; },
             [k, state_dim](const ChartPoint& s) {
                 const double c = std::cos(s[0]), sn = std::sin(s[0]), ch = std::cosh(s[1]), th = std::tanh(s[1]);
                 Vector g = Vector::Zero(state_dim);
                 if (k == 0) g.head(2) << -sn / ch, -c * th / ch;
                 if (k == 1) g.head(2) << c / ch, -sn * th / ch;
                 if (k == 2) g[1] = 1.0 / (ch * ch);
                 return g;
             }});
    }
}

inline Section section_with_theta_jacobian(ChartPtr chart, std::function<Vector(double)> f,
                                           std::function<Vector(double)> df) {
    const int n = chart->rank, m = chart->base_dim;
    return Section{chart, [f](const ChartPoint& x) { return f(x[0]); },
                   [df, n, m](const ChartPoint& x) {
                       Matrix J = Matrix::Zero(n, m);
                       J.col(0) = df(x[0]);
                       return J;
                   }};
}

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
}

/// Lagrange top reduction data; mutation parameters each break one hypothesis.
inline ReductionSetup lagrange_reduction(const ParameterMap& p) {
    const ProlongationChart Pr = prolong(lagrange_chart(p.at("broken") != 0.0 ? 0.1 : 0.0));
    ReductionSetup s;
    s.name = "lagrange-top";
    s.ambient_omega = canonical_symplectic(Pr);
    Matrix E = Matrix::Zero(5, 4);
    E.topRows(4).setIdentity();
    Matrix F = Matrix::Zero(6, 5);
    F.topRows(5).setIdentity();
    s.sub = constant_frame_subalgebroid(Pr.chart, E, Vector::Zero(5), F, "B", {"theta", "t", "pi1", "pi2"});
    const ChartPtr B = s.sub.sub;

    if (p.at("nonprojectable") != 0.0)
        s.projectable_frame.push_back(constant_section(B, vec({1, 0, 0, 0, 0})));
    else
        s.projectable_frame.push_back(section_with_theta_jacobian(
            B, [](double th) { return vec({-std::cos(th), -std::sin(th), 0, 0, 0}); },
            [](double th) { return vec({std::sin(th), -std::cos(th), 0, 0, 0}); }));
    s.projectable_frame.push_back(section_with_theta_jacobian(
        B, [](double th) { return vec({std::sin(th), -std::cos(th), 0, 0, 0}); },
        [](double th) { return vec({std::cos(th), std::sin(th), 0, 0, 0}); }));
    s.projectable_frame.push_back(section_with_theta_jacobian(
        B, [](double th) { return vec({0, 0, 0, -std::cos(th), -std::sin(th)}); },
        [](double th) { return vec({0, 0, 0, std::sin(th), -std::cos(th)}); }));
    s.projectable_frame.push_back(section_with_theta_jacobian(
        B, [](double th) { return vec({0, 0, 0, std::sin(th), -std::cos(th)}); },
        [](double th) { return vec({0, 0, 0, std::cos(th), std::sin(th)}); }));

    // s = e3 + pi2 f1 - pi1 f2
    const double perturb = p.at("kernel_perturb");
    s.kernel_frame.push_back(Section{B, [perturb](const ChartPoint& x) { return vec({0, 0, 1, x[3] + perturb, -x[2]}); },
                                     [](const ChartPoint&) {
                                         Matrix J = Matrix::Zero(5, 4);
                                         J(4, 2) = -1.0;
                                         J(3, 3) = 1.0;
                                         return J;
                                     }});

    const double scale = p.at("action_scale");
    GroupActionData& a = s.action;
    a.group_dim = 1;
    a.base_action = [](const Vector& g, const ChartPoint& x) {
        const double c = std::cos(g[0]), sn = std::sin(g[0]);
        return ChartPoint(vec({x[0] + g[0], x[1], c * x[2] - sn * x[3], sn * x[2] + c * x[3]}));
    };
    a.fiber_action = [scale](const Vector& g, const ChartPoint&) {
        const double c = std::cos(g[0]), sn = std::sin(g[0]);
        Matrix M = Matrix::Zero(5, 5);
        M.block(0, 0, 2, 2) << c, -sn, sn, c;
        M(2, 2) = 1.0;
        M.block(3, 3, 2, 2) << c, -sn, sn, c;
        return Matrix(scale * M);
    };
    a.sample_elements = circle_sample_elements(7);
    a.projection = [](const ChartPoint& x) {
        const double c = std::cos(x[0]), sn = std::sin(x[0]);
        return ChartPoint(vec({x[1], -(c * x[2] + sn * x[3]), sn * x[2] - c * x[3]}));
    };
    a.projection_jacobian = [](const ChartPoint& x) {
        const double c = std::cos(x[0]), sn = std::sin(x[0]);
        Matrix J(3, 4);
        J << 0, 1, 0, 0, sn * x[2] - c * x[3], 0, -c, -sn, c * x[2] + sn * x[3], 0, sn, -c;
        return J;
    };
    a.slice = [](const ChartPoint& q) { return ChartPoint(vec({0.0, q[0], -q[1], -q[2]})); };
    a.slice_jacobian = [](const ChartPoint&) {
        Matrix J = Matrix::Zero(4, 3);
        J(1, 0) = 1.0;
        J(2, 1) = -1.0;
        J(3, 2) = -1.0;
        return J;
    };
    a.quotient_box = ChartBox{vec({-1.5, -1.0, -1.0}), vec({1.5, 1.0, 1.0})};
    a.quotient_labels = {"t", "nu1", "nu2"};

    s.n_box = ChartBox{vec({0.0, -1.5, -1.0, -1.0}), vec({2.0 * std::numbers::pi, 1.5, 1.0, 1.0})};
    s.hamiltonian = lagrange_hamiltonian(Pr.chart, p);
    s.default_init = vec({0.0, 0.3, 0.2, -0.1, 0.0});
    s.tol = 1e-9;
    return s;
}

/// Explicit reduced Lagrange top on (t, nu1, nu2).
inline ChartPtr lagrange_reduced_chart() {
    auto c = std::make_shared<LieAlgebroidChart>();
    c->name = "lagrange-top-reduced";
    c->base_dim = 3;
    c->rank = 4;
    c->labels = {"t", "nu1", "nu2"};
    c->anchor = [](const ChartPoint& q) {
        const double sh = std::sinh(q[0]), ch = std::cosh(q[0]);
        Matrix R = Matrix::Zero(3, 4);
        R(1, 0) = -q[2] * sh;
        R(2, 0) = q[1] * sh;
        R(0, 1) = -ch;
        R(1, 2) = 1.0;
        R(2, 3) = 1.0;
        return R;
    };
    c->anchor_partials = [](const ChartPoint& q) {
        const double sh = std::sinh(q[0]), ch = std::cosh(q[0]);
        std::vector<Matrix> d(3, Matrix::Zero(3, 4));
        d[0](1, 0) = -q[2] * ch;
        d[0](2, 0) = q[1] * ch;
        d[0](0, 1) = -sh;
        d[1](2, 0) = sh;
        d[2](1, 0) = -sh;
        return d;
    };
    c->structure = [](const ChartPoint& q) {
        const double sh = std::sinh(q[0]);
        StructureConstants C(4);
        C.set_column(0, 1, vec({sh, 0.0, -q[2], q[1]}));
        C.set(3, 0, 2, -sh);
        C.set(2, 0, 3, sh);
        return C;
    };
    c->structure_partials = [](const ChartPoint& q) {
        const double ch = std::cosh(q[0]);
        std::vector<StructureConstants> d(3, StructureConstants(4));
        d[0].set(0, 0, 1, ch);
        d[0].set(3, 0, 2, -ch);
        d[0].set(2, 0, 3, ch);
        d[1].set(3, 0, 1, 1.0);
        d[2].set(2, 0, 1, -1.0);
        return d;
    };
    return c;
}

inline Matrix standard_symplectic(int half) {
    Matrix W = Matrix::Zero(2 * half, 2 * half);
    W.topRightCorner(half, half).setIdentity();
    W.bottomLeftCorner(half, half) = -Matrix::Identity(half, half);
    return W;
}

/// B = TN over N = {p2 = 0} inside T(T*R^2); the kernel is the q2 direction.
inline ReductionSetup cartan_plane(const ParameterMap& p) {
    const ProlongationChart Pr = prolong(tangent_bundle(2));
    ReductionSetup s;
    s.name = "cartan-plane";
    s.ambient_omega = canonical_symplectic(Pr);
    Matrix E = Matrix::Zero(4, 3);
    E.topRows(3).setIdentity();
    Matrix F = Matrix::Zero(4, 3);
    F.topRows(3).setIdentity();
    s.sub = constant_frame_subalgebroid(Pr.chart, E, Vector::Zero(4), F, "TN", {"q1", "q2", "p1"});
    const ChartPtr B = s.sub.sub;
    s.projectable_frame = {frame_section(B, 0), frame_section(B, 2)};
    s.kernel_frame = {frame_section(B, 1)};
    GroupActionData& a = s.action;
    a.group_dim = 1;
    a.base_action = [](const Vector& g, const ChartPoint& x) { return ChartPoint(vec({x[0], x[1] + g[0], x[2]})); };
    a.fiber_action = [](const Vector&, const ChartPoint&) { return Matrix(Matrix::Identity(3, 3)); };
    for (double g : {-2.0, -0.7, 0.3, 1.1, 2.5}) a.sample_elements.push_back(Vector::Constant(1, g));
    a.projection = [](const ChartPoint& x) { return ChartPoint(vec({x[0], x[2]})); };
    a.projection_jacobian = [](const ChartPoint&) {
        Matrix J = Matrix::Zero(2, 3);
        J(0, 0) = 1.0;
        J(1, 2) = 1.0;
        return J;
    };
    a.slice = [](const ChartPoint& q) { return ChartPoint(vec({q[0], 0.0, q[1]})); };
    a.slice_jacobian = [](const ChartPoint&) {
        Matrix J = Matrix::Zero(3, 2);
        J(0, 0) = 1.0;
        J(2, 1) = 1.0;
        return J;
    };
    a.quotient_box = ChartBox::cube(2, 1.5);
    a.quotient_labels = {"q1", "p1"};
    s.n_box = ChartBox::cube(3, 1.5);
    const double k = p.at("k");
    s.hamiltonian = scalar_field(
        Pr.chart, [k](const ChartPoint& z) { return 0.5 * (z[2] * z[2] + z[3] * z[3]) + 0.5 * k * z[0] * z[0]; },
        [k](const ChartPoint& z) { return Vector(vec({k * z[0], 0.0, z[2], z[3]})); });
    s.default_init = vec({0.5, 0.2, -0.3, 0.0});
    return s;
}

/// B = A = T(T*R) with the trivial group: the reduction returns its input.
inline ReductionSetup cotangent_trivial() {
    const ProlongationChart Pr = prolong(tangent_bundle(1));
    ReductionSetup s;
    s.name = "cotangent-trivial";
    s.ambient_omega = canonical_symplectic(Pr);
    s.sub = constant_frame_subalgebroid(Pr.chart, Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Identity(2, 2),
                                        "A", {"q1", "p1"});
    s.projectable_frame = {frame_section(s.sub.sub, 0), frame_section(s.sub.sub, 1)};
    s.n_box = ChartBox::cube(2, 1.5);
    s.action = GroupActionData::trivial(2, 2, s.n_box, {"q1", "p1"});
    s.hamiltonian = quadratic_hamiltonian(Pr.chart, vec({1.0, 1.0}));
    s.default_init = vec({0.4, -0.2});
    return s;
}

/// sol3 + R with basis (a, b, c, d): [a,b] = b, [a,c] = -c; Omega = a*^d* + b*^c*.
inline StructureConstants sol_constants() {
    StructureConstants c(4);
    c.set(1, 0, 1, 1.0);
    c.set(2, 0, 2, -1.0);
    return c;
}

inline Matrix sol_omega() {
    Matrix W = Matrix::Zero(4, 4);
    W(0, 3) = 1.0;
    W(3, 0) = -1.0;
    W(1, 2) = 1.0;
    W(2, 1) = -1.0;
    return W;
}

/// h = span(a, b, c) has kernel span(a), which is not an ideal of h.
inline ReductionSetup sol_counterexample() {
    ReductionSetup s;
    s.name = "sol-counterexample";
    const ChartPtr g = named_lie_algebra(sol_constants(), "sol3+R");
    const Matrix W = sol_omega();
    s.ambient_omega = make_symplectic(two_section(g, [W](const ChartPoint&) { return W; }));
    Matrix F = Matrix::Zero(4, 3);
    F.topRows(3).setIdentity();
    s.sub = constant_frame_subalgebroid(g, Matrix(0, 0), Vector(0), F, "h");
    s.projectable_frame = {frame_section(s.sub.sub, 1), frame_section(s.sub.sub, 2)};
    s.kernel_frame = {frame_section(s.sub.sub, 0)};
    s.n_box = ChartBox{Vector(0), Vector(0)};
    s.action = GroupActionData::trivial(0, 3, s.n_box);
    return s;
}

/// Rotation about the symmetry axis acting on the sphere algebroid: (theta + g, t) with A_g on fibers.
inline GroupActionData sphere_rotation_action() {
    GroupActionData a;
    a.group_dim = 1;
    a.base_action = [](const Vector& g, const ChartPoint& x) { return ChartPoint(vec({x[0] + g[0], x[1]})); };
    a.fiber_action = [](const Vector& g, const ChartPoint&) {
        const double c = std::cos(g[0]), sn = std::sin(g[0]);
        Matrix M = Matrix::Identity(3, 3);
        M.block(0, 0, 2, 2) << c, -sn, sn, c;
        return M;
    };
    a.sample_elements = circle_sample_elements(7);
    a.projection = [](const ChartPoint& x) { return ChartPoint(Vector::Constant(1, x[1])); };
    a.projection_jacobian = [](const ChartPoint&) { return Matrix(vec({0.0, 1.0}).transpose()); };
    a.slice = [](const ChartPoint& q) { return ChartPoint(vec({0.0, q[0]})); };
    a.slice_jacobian = [](const ChartPoint&) { return Matrix(vec({0.0, 1.0})); };
    a.quotient_box = ChartBox{vec({-1.5}), vec({1.5})};
    a.quotient_labels = {"t"};
    return a;
}

/// Columns of A_theta: e1' = cos e1 + sin e2, e2' = -sin e1 + cos e2, e3.
inline std::vector<Section> rotation_invariant_frame(const ChartPtr& chart) {
    return {section_with_theta_jacobian(
                chart, [](double th) { return vec({std::cos(th), std::sin(th), 0}); },
                [](double th) { return vec({-std::sin(th), std::cos(th), 0}); }),
            section_with_theta_jacobian(
                chart, [](double th) { return vec({-std::sin(th), std::cos(th), 0}); },
                [](double th) { return vec({-std::cos(th), -std::sin(th), 0}); }),
            constant_section(chart, vec({0, 0, 1}))};
}

inline ChartBox box_of(std::initializer_list<double> lo, std::initializer_list<double> hi) { return {vec(lo), vec(hi)}; }

inline BuiltModel system_model(std::string name, const ParameterMap& p, ChartPtr chart, ChartBox box,
                               const Vector& weights, const Vector& init) {
    BuiltModel b;
    b.name = std::move(name);
    b.params = p;
    b.chart = chart;
    b.box = std::move(box);
    HamiltonianSystem sys{prolong(chart), {}, p};
    sys.H = quadratic_hamiltonian(sys.prolong.chart, weights);
    b.system = sys;
    b.default_init = init;
    return b;
}

inline BuiltModel reduction_model(std::string name, const ParameterMap& p, ReductionSetup s, ChartPtr chart, ChartBox box) {
    BuiltModel b;
    b.name = std::move(name);
    b.params = p;
    b.chart = std::move(chart);
    b.box = std::move(box);
    b.default_init = s.default_init;
    if (s.hamiltonian) {
        b.symplectic = s.ambient_omega;
        b.hamiltonian = s.hamiltonian;
    }
    b.reduction = std::move(s);
    return b;
}

}  // namespace models

inline const std::vector<ModelRecord>& model_registry() {
    using namespace models;
    static const std::vector<ModelRecord> records = [] {
        std::vector<ModelRecord> r;
        const double pi = std::numbers::pi;
        r.push_back({"tangent-bundle", "TR^n with the canonical structure; harmonic oscillator H = (|p|^2 + k|q|^2)/2",
                     {{"n", 2}, {"k", 1}},
                     [](const ParameterMap& p) {
                         const double n = p.at("n");
                         if (n < 1 || n > 6 || n != std::floor(n)) throw InputError("parameter n must be an integer in [1, 6]");
                     },
                     [](const ParameterMap& p) {
                         const int n = static_cast<int>(p.at("n"));
                         Vector w(2 * n);
                         w << Vector::Constant(n, p.at("k")), Vector::Ones(n);
                         Vector init = Vector::Zero(2 * n);
                         init[0] = 1.0;
                         return system_model("tangent-bundle", p, tangent_bundle(n), ChartBox::cube(n, 2.0), w, init);
                     }});
        r.push_back({"lie-algebra", "so(3) over a point; broken=1 adds C^1_12 = 1 and breaks the Jacobi identity",
                     {{"broken", 0}},
                     {},
                     [](const ParameterMap& p) {
                         StructureConstants c = so3();
                         if (p.at("broken") != 0.0) c.set(0, 0, 1, 1.0);
                         return system_model("lie-algebra", p, named_lie_algebra(c, "so(3)"), ChartBox{Vector(0), Vector(0)},
                                             Vector::Ones(3), vec({0.2, 0.3, 0.4}));
                     }});
        r.push_back({"abelian-2", "two-dimensional abelian Lie algebra", {}, {},
                     [](const ParameterMap& p) {
                         return system_model("abelian-2", p, named_lie_algebra(StructureConstants(2), "abelian-2"),
                                             ChartBox{Vector(0), Vector(0)}, Vector::Ones(2), vec({0.5, -0.25}));
                     }});
        r.push_back({"free-rigid-body", "Lie-Poisson so(3) with H = sum y_i^2 / (2 I_i)",
                     {{"I1", 1}, {"I2", 2}, {"I3", 3}},
                     [](const ParameterMap& p) { require_positive(p, {"I1", "I2", "I3"}); },
                     [](const ParameterMap& p) {
                         return system_model("free-rigid-body", p, named_lie_algebra(so3(), "so(3)"),
                                             ChartBox{Vector(0), Vector(0)},
                                             vec({1.0 / p.at("I1"), 1.0 / p.at("I2"), 1.0 / p.at("I3")}),
                                             vec({0.2, 0.3, 0.4}));
                     }});
        r.push_back({"so3-sphere", "so(3) action algebroid on R^3 with anchor -xi x x; H = |p|^2/2", {}, {},
                     [](const ParameterMap& p) {
                         return system_model("so3-sphere", p, so3_cartesian(), ChartBox::cube(3, 1.5), vec({0, 0, 0, 1, 1, 1}),
                                             vec({0.0, 0.6, 0.8, 0.3, -0.2, 0.1}));
                     }});
        r.push_back({"lagrange-top-chart", "the so(3) action algebroid on the punctured sphere in the (theta, t) chart", {}, {},
                     [pi](const ParameterMap& p) {
                         BuiltModel b = system_model("lagrange-top-chart", p, lagrange_chart(), box_of({0, -1.5}, {2 * pi, 1.5}),
                                                     vec({0, 0, 1, 1, 1}), vec({0.0, 0.3, 0.2, -0.1, 0.4}));
                         b.embedding = cylinder_embedding;
                         add_sphere_aux(b, 5);
                         return b;
                     }});
        r.push_back({"atiyah-local", "local Atiyah algebroid over R^2 with so(3) fibers and an affine connection", {}, {},
                     [](const ParameterMap& p) {
                         BuiltModel b = system_model("atiyah-local", p, atiyah_chart(atiyah_example()), ChartBox::cube(2, 1.0),
                                                     Vector::Ones(7), vec({0.1, -0.2, 0.3, 0.1, 0.2, -0.1, 0.4}));
                         return b;
                     }});
        auto lagrange_defaults = ParameterMap{{"I", 1}, {"J", 2}, {"m", 1}, {"g", 1}, {"l", 1}, {"tilt", 0}};
        auto lagrange_validate = [](const ParameterMap& p) {
            require_positive(p, {"I", "J"});
            if (p.at("m") * p.at("g") * p.at("l") < 0.0) throw InputError("m*g*l must be non-negative");
        };
        r.push_back({"lagrange-top-full", "symmetric heavy top on the dual of the sphere action algebroid",
                     lagrange_defaults, lagrange_validate, [pi](const ParameterMap& p) {
                         BuiltModel b;
                         b.name = "lagrange-top-full";
                         b.params = p;
                         b.chart = lagrange_chart();
                         b.box = box_of({0, -1.5}, {2 * pi, 1.5});
                         HamiltonianSystem sys{prolong(b.chart), {}, p};
                         sys.H = lagrange_hamiltonian(sys.prolong.chart, p);
                         b.system = sys;
                         b.default_init = vec({0.0, 0.3, 0.2, -0.1, 0.0});
                         b.embedding = cylinder_embedding;
                         add_sphere_aux(b, 5);
                         return b;
                     }});
        ParameterMap red_defaults = lagrange_defaults;
        for (const char* k : {"action_scale"}) red_defaults[k] = 1.0;
        for (const char* k : {"nonprojectable", "kernel_perturb", "broken"}) red_defaults[k] = 0.0;
        r.push_back({"lagrange-top",
                     "Lagrange top reduction by S^1 from the prolongation over the sphere; mutation parameters tilt, "
                     "action_scale, nonprojectable, kernel_perturb, broken",
                     red_defaults,
                     [lagrange_validate](const ParameterMap& p) {
                         lagrange_validate(p);
                         if (p.at("kernel_perturb") != 0.0 && p.at("kernel_perturb") != 0.1)
                             throw InputError("kernel_perturb must be 0 or 0.1");
                     },
                     [pi](const ParameterMap& p) {
                         BuiltModel b = reduction_model("lagrange-top", p, lagrange_reduction(p),
                                                        lagrange_chart(p.at("broken") != 0.0 ? 0.1 : 0.0),
                                                        box_of({0, -1.5}, {2 * pi, 1.5}));
                         b.embedding = cylinder_embedding;
                         add_sphere_aux(b, 5);
                         return b;
                     }});
        r.push_back({"lagrange-top-reduced", "explicit reduced Lagrange top over (t, nu1, nu2)",
                     {{"I", 1}, {"m", 1}, {"g", 1}, {"l", 1}},
                     [](const ParameterMap& p) {
                         require_positive(p, {"I"});
                         if (p.at("m") * p.at("g") * p.at("l") < 0.0) throw InputError("m*g*l must be non-negative");
                     },
                     [](const ParameterMap& p) {
                         BuiltModel b;
                         b.name = "lagrange-top-reduced";
                         b.params = p;
                         b.chart = lagrange_reduced_chart();
                         b.box = box_of({-1.5, -1, -1}, {1.5, 1, 1});
                         const Matrix W = standard_symplectic(2);
                         b.symplectic = make_symplectic(two_section(b.chart, [W](const ChartPoint&) { return W; },
                                                                    [](const ChartPoint&) {
                                                                        return std::vector<Matrix>(3, Matrix::Zero(4, 4));
                                                                    }));
                         const double I = p.at("I"), mgl = p.at("m") * p.at("g") * p.at("l");
                         b.hamiltonian = scalar_field(
                             b.chart,
                             [I, mgl](const ChartPoint& q) { return 0.5 * (q[1] * q[1] + q[2] * q[2]) / I + mgl * std::tanh(q[0]); },
                             [I, mgl](const ChartPoint& q) {
                                 const double ch = std::cosh(q[0]);
                                 return Vector(vec({mgl / (ch * ch), q[1] / I, q[2] / I}));
                             });
                         b.default_init = vec({0.3, -0.2, 0.1});
                         return b;
                     }});
        r.push_back({"cartan-plane", "coisotropic reduction of T*R^2 along p2 = 0 by q2-translations", {{"k", 1}},
                     [](const ParameterMap& p) {
                         if (p.at("k") < 0.0) throw InputError("parameter k must be non-negative");
                     },
                     [](const ParameterMap& p) {
                         return reduction_model("cartan-plane", p, cartan_plane(p), tangent_bundle(2), ChartBox::cube(2, 1.5));
                     }});
        r.push_back({"cotangent-trivial", "T(T*R) reduced by the trivial group", {}, {},
                     [](const ParameterMap& p) {
                         return reduction_model("cotangent-trivial", p, cotangent_trivial(), tangent_bundle(1),
                                                ChartBox::cube(1, 1.5));
                     }});
        r.push_back({"sol-counterexample", "symplectic Lie algebra sol3 + R with a kernel that is not an ideal", {}, {},
                     [](const ParameterMap& p) {
                         return reduction_model("sol-counterexample", p, sol_counterexample(),
                                                named_lie_algebra(sol_constants(), "sol3+R"), ChartBox{Vector(0), Vector(0)});
                     }});
        return r;
    }();
    return records;
}

inline const ModelRecord& find_model(const std::string& name) {
    for (const auto& r : model_registry())
        if (r.name == name) return r;
    std::string known;
    for (const auto& r : model_registry()) known += (known.empty() ? "" : ", ") + r.name;
    throw InputError("unknown model '" + name + "' (known: " + known + ")");
}

/// Defaults overridden by `overrides`; unknown parameter names are rejected.
inline BuiltModel build_model(const std::string& name, const ParameterMap& overrides = {}) {
    const ModelRecord& rec = find_model(name);
    ParameterMap p = rec.defaults;
    for (const auto& [k, v] : overrides) {
        if (!p.count(k)) {
            std::string known;
            for (const auto& [dk, dv] : rec.defaults) known += (known.empty() ? "" : ", ") + dk;
            throw InputError("model '" + name + "' has no parameter '" + k + "'" +
                             (known.empty() ? std::string(" (it takes none)") : " (parameters: " + known + ")"));
        }
        if (!std::isfinite(v)) throw InputError("parameter " + k + " must be finite");
        p[k] = v;
    }
    if (rec.validate) rec.validate(p);
    return rec.builder(p);
}

}  // namespace algmech
