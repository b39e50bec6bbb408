#include "algmech/algmech.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace algmech;

namespace {

ReductionSetup lagrange_setup(const ParameterMap& overrides = {}) {
    ReductionSetup s = *build_model("lagrange-top", overrides).reduction;
    prepare(s);
    return s;
}

MultiSection constant_function(ChartPtr chart, double c) {
    const int m = chart->base_dim;
    return scalar_field(chart, [c](const ChartPoint&) { return c; }, [m](const ChartPoint&) { return Vector(Vector::Zero(m)); });
}

std::vector<ChartPoint> states_of(const BuiltModel& b, int count, std::uint64_t seed) {
    return sample_points(b.box.extended(b.chart->rank, 1.0), count, seed);
}

AtiyahLocalData constant_atiyah(int d, const StructureConstants& c, const Matrix& D) {
    AtiyahLocalData data;
    data.base_dim = d;
    data.algebra = c;
    const int r = c.rank();
    data.connection = [D](const ChartPoint&) { return D; };
    data.curvature = [d, r](const ChartPoint&) { return std::vector<Matrix>(r, Matrix::Zero(d, d)); };
    data.connection_partials = [d, r](const ChartPoint&) { return std::vector<Matrix>(d, Matrix::Zero(r, d)); };
    data.curvature_partials = [d, r](const ChartPoint&) {
        return std::vector<std::vector<Matrix>>(d, std::vector<Matrix>(r, Matrix::Zero(d, d)));
    };
    return data;
}

/// h = |p|^2/2 + |pbar|^2/2 + a sin(x_0) + b x . pbar-weighted mixing term, with analytic gradient.
ScalarFunction test_hamiltonian(int d, int r) {
    ScalarFunction h;
    h.value = [d, r](const Vector& s) {
        double v = 0.5 * s.segment(d, d).squaredNorm() + 0.5 * s.tail(r).squaredNorm();
        if (d > 0) v += std::sin(s[0]) + (r > 0 ? s[0] * s[2 * d] : 0.0);
        return v;
    };
    h.gradient = [d, r](const Vector& s) {
        Vector g = Vector::Zero(2 * d + r);
        g.segment(d, d) = s.segment(d, d);
        g.tail(r) = s.tail(r);
        if (d > 0) {
            g[0] += std::cos(s[0]) + (r > 0 ? s[2 * d] : 0.0);
            if (r > 0) g[2 * d] += s[0];
        }
        return g;
    };
    return h;
}

}  // namespace

// ---------------------------------------------------------------- dynamics

TEST(HamiltonRhs, ConstantHamiltonianGivesZero) {
    HamiltonianSystem sys{prolong(models::lagrange_chart()), {}, {}};
    sys.H = constant_function(sys.prolong.chart, 3.0);
    for (const auto& p : sample_points(ChartBox::cube(5, 1.0), 10, 1)) EXPECT_EQ(hamilton_rhs(sys, p).norm(), 0.0);
}

TEST(HamiltonRhs, MinusLiePoissonOnSo3) {
    // ydot_a = -c^g_ab y_g dH/dy_b = (y x grad H)_a for so(3).
    HamiltonianSystem sys{prolong(models::named_lie_algebra(models::so3(), "so(3)")), {}, {}};
    sys.H = models::quadratic_hamiltonian(sys.prolong.chart, models::vec({1.0, 1.0, 0.5}));
    EXPECT_EQ(hamilton_rhs(sys, models::vec({0, 1, 0})).norm(), 0.0);
    for (const auto& y : sample_points(ChartBox::cube(3, 1.0), 10, 2)) {
        const Eigen::Vector3d v(y[0], y[1], y[2]);
        const Eigen::Vector3d w(y[0], y[1], 0.5 * y[2]);
        EXPECT_LT((hamilton_rhs(sys, y) - Vector(v.cross(w))).norm(), 1e-15);
    }
}

TEST(HamiltonRhs, LagrangeTopAtChartOriginOnlyGravitySurvives) {
    const BuiltModel b = build_model("lagrange-top-full");
    const ChartPoint origin = Vector::Zero(5);
    const Vector rhs = hamilton_rhs(*b.system, origin);
    // pi2' = -mgl at ((0), 0), (0, 0, 0): the gravity term of the Hamiltonian section.
    EXPECT_LT((rhs - models::vec({0, 0, 0, -1, 0})).norm(), 1e-14);
    const SymplecticSection W = canonical_symplectic(b.system->prolong);
    EXPECT_LT((apply_anchor(hamiltonian_section(W, b.system->H), origin) - rhs).norm(), 1e-14);
}

TEST(Properties, HamiltonRhsEqualsAnchorOfHamiltonianSection) {
    for (const auto& rec : model_registry()) {
        const BuiltModel b = build_model(rec.name);
        if (!b.system) continue;
        const SymplecticSection W = canonical_symplectic(b.system->prolong);
        const Section HH = hamiltonian_section(W, b.system->H);
        for (const auto& p : states_of(b, 15, 4))
            EXPECT_LT((hamilton_rhs(*b.system, p) - apply_anchor(HH, p)).lpNorm<Eigen::Infinity>(), 1e-7) << rec.name;
    }
}

TEST(Integrate, ZeroHamiltonianIsConstant) {
    HamiltonianSystem sys{prolong(models::lagrange_chart()), {}, {}};
    sys.H = constant_function(sys.prolong.chart, 0.0);
    const ChartPoint init = models::vec({0.3, 0.2, 0.1, -0.4, 0.5});
    const Trajectory tr = integrate(sys, init, 1.0, 0.1);
    ASSERT_EQ(tr.states.size(), 11u);
    for (const auto& s : tr.states) EXPECT_EQ(s, init);
    EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
    for (std::size_t k = 1; k < tr.times.size(); ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
}

TEST(Integrate, FreeRigidBodyCasimirAndSmallStepReference) {
    const BuiltModel b = build_model("free-rigid-body");
    const ChartPoint y0 = models::vec({0.2, 0.3, 0.4});
    const Trajectory tr = integrate(*b.system, y0, 10.0, 1e-3);
    double worst = 0.0;
    for (const auto& y : tr.states) worst = std::max(worst, std::abs(y.squaredNorm() - y0.squaredNorm()));
    EXPECT_LE(worst, 1e-10);
    const Trajectory ref = integrate(*b.system, y0, 10.0, 2.5e-4);
    EXPECT_LT((tr.states.back() - ref.states.back()).norm(), 1e-9);
}

TEST(Integrate, LagrangeTopEnergyDriftAndFourthOrder) {
    const BuiltModel b = build_model("lagrange-top-full");
    auto drift = [&](double h) {
        const Trajectory tr = integrate(*b.system, b.default_init, 5.0, h);
        double w = 0.0;
        for (double e : tr.energy) w = std::max(w, std::abs(e - tr.energy.front()));
        return w;
    };
    EXPECT_LE(drift(1e-3), 1e-8);
    const double ratio = drift(2e-2) / drift(1e-2);
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(Integrate, BlowUpAbortsWithPartialTrajectory) {
    const Trajectory tr = integrate_field([](const Vector& y) { return Vector(y.array().square()); }, {},
                                          models::vec({1.0}), 2.0, 1e-3);
    EXPECT_TRUE(tr.aborted);
    EXPECT_FALSE(tr.diagnostic.empty());
    // y = 1 / (1 - t) passes the bound just before t = 1.
    EXPECT_GT(tr.times.back(), 0.9);
    EXPECT_LE(tr.times.back(), 1.0 + 1e-3);
}

TEST(Integrate, RejectsBadStepAndDimension) {
    const BuiltModel b = build_model("free-rigid-body");
    EXPECT_THROW(integrate(*b.system, models::vec({1, 2}), 1.0, 1e-3), StructuralError);
    EXPECT_THROW(integrate(*b.system, models::vec({1, 2, 3}), 1.0, -1e-3), InputError);
}

TEST(Trajectory, CsvHeaderDigitsAndAngleWrapping) {
    Trajectory tr;
    tr.labels = {"theta", "t"};
    tr.periodic = {true, false};
    tr.times = {0.0, 0.1};
    tr.states = {models::vec({7.0, 1.0 / 3.0}), models::vec({-0.5, 2.0})};
    tr.energy = {1.0, 1.0};
    std::ostringstream os;
    write_csv(tr, os);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    EXPECT_EQ(header, "t,theta,t,energy");
    EXPECT_NE(row.find("0.33333333333333331"), std::string::npos) << row;
    EXPECT_EQ(row.substr(0, 21), "0,0.71681469282041377") << row;
    EXPECT_EQ(os.str().find('\r'), std::string::npos);
    EXPECT_NEAR(wrap_angle(-0.5), 2 * std::numbers::pi - 0.5, 1e-15);
}

TEST(HamiltonPoincare, TrivialGroupGivesClassicalEquations) {
    const AtiyahLocalData data = constant_atiyah(2, StructureConstants(0), Matrix(0, 2));
    const ScalarFunction h = test_hamiltonian(2, 0);
    for (const auto& s : sample_points(ChartBox::cube(4, 1.0), 10, 3)) {
        const Vector g = h.gradient(s);
        Vector classical(4);
        classical << g.segment(2, 2), -g.head(2);
        EXPECT_LT((hamilton_poincare_rhs(data, h, s) - classical).norm(), 1e-15);
        EXPECT_LT((hamilton_poincare_direct(data, h, s) - classical).norm(), 1e-15);
    }
}

TEST(HamiltonPoincare, FlatAbelianDecouples) {
    Matrix D(2, 1);
    D << 0.7, -1.3;
    const AtiyahLocalData data = constant_atiyah(1, StructureConstants(2), D);
    const ScalarFunction h = test_hamiltonian(1, 2);
    for (const auto& s : sample_points(ChartBox::cube(4, 1.0), 10, 4)) {
        const Vector rhs = hamilton_poincare_rhs(data, h, s);
        const Vector g = h.gradient(s);
        EXPECT_EQ(rhs.tail(2).norm(), 0.0);
        EXPECT_NEAR(rhs[0], g[1], 1e-15);
        EXPECT_NEAR(rhs[1], -g[0], 1e-15);
    }
}

TEST(Properties, HamiltonPoincareDualPath) {
    Matrix D(3, 1);
    D << 0.4, -0.9, 1.2;
    const AtiyahLocalData so3_line = constant_atiyah(1, models::so3(), D);
    const AtiyahLocalData general = models::atiyah_example();
    for (const AtiyahLocalData* data : {&so3_line, &general}) {
        const int d = data->base_dim, r = data->algebra.rank();
        const ScalarFunction h = test_hamiltonian(d, r);
        for (const auto& s : sample_points(ChartBox::cube(2 * d + r, 1.0), 20, 5))
            EXPECT_LE((hamilton_poincare_rhs(*data, h, s) - hamilton_poincare_direct(*data, h, s)).lpNorm<Eigen::Infinity>(),
                      1e-10);
    }
}

TEST(HamiltonPoincare, AtiyahExampleIsAnAlgebroid) {
    const AtiyahLocalData data = models::atiyah_example();
    EXPECT_LE(jacobi_residual(data.algebra), 1e-12);
    for (const auto& x : sample_points(ChartBox::cube(2, 1.0), 10, 6))
        for (const Matrix& R : data.curvature(x)) EXPECT_EQ((R + R.transpose()).norm(), 0.0);
    EXPECT_TRUE(check_axioms(atiyah_chart(data), sample_points(ChartBox::cube(2, 1.0), 20, 6), 1e-8).passed());
}

// ---------------------------------------------------------------- reduction

TEST(Restrict, LagrangeTopKernelDimensionOne) {
    const ReductionSetup s = lagrange_setup();
    EXPECT_EQ(s.restriction().kernel_dim, 1);
    EXPECT_TRUE(s.restriction().report.passed());
    for (const auto& x : s.n_samples()) EXPECT_EQ(numerical_rank(s.restriction().omega_B.matrix_at(x)), 4);
}

TEST(Restrict, NondegenerateAndCartanCases) {
    ReductionSetup triv = *build_model("cotangent-trivial").reduction;
    prepare(triv);
    EXPECT_EQ(triv.restriction().kernel_dim, 0);
    ReductionSetup cartan = *build_model("cartan-plane").reduction;
    prepare(cartan);
    EXPECT_EQ(cartan.restriction().kernel_dim, cartan.action.group_dim);
}

TEST(VerifyKernelFrame, PaperSectionPassesPerturbedFails) {
    const Report ok = verify_kernel_frame(lagrange_setup());
    EXPECT_TRUE(ok.passed());
    for (const auto& c : ok.checks) EXPECT_LE(c.max_residual, 1e-9) << c.name;
    ReductionSetup triv = *build_model("cotangent-trivial").reduction;
    prepare(triv);
    EXPECT_TRUE(verify_kernel_frame(triv).passed());
    const Report bad = verify_kernel_frame(lagrange_setup({{"kernel_perturb", 0.1}}));
    ASSERT_NE(bad.first_failure(), nullptr);
    EXPECT_EQ(bad.first_failure()->name, "kernel frame lies in ker Omega_B");
}

TEST(VerifyPresymplecticAction, RotationPassesScaledFails) {
    const ReductionSetup s = lagrange_setup();
    EXPECT_GE(s.action.sample_elements.size(), 8u);
    EXPECT_TRUE(verify_presymplectic_action(s).passed());
    ReductionSetup triv = *build_model("cotangent-trivial").reduction;
    prepare(triv);
    for (const auto& c : verify_presymplectic_action(triv).checks) EXPECT_EQ(c.max_residual, 0.0);
    EXPECT_FALSE(verify_presymplectic_action(lagrange_setup({{"action_scale", 1.01}})).passed());
}

TEST(VerifyProjectableFrame, RotatedFramePassesFixedFrameFails) {
    EXPECT_TRUE(verify_projectable_frame(lagrange_setup()).passed());
    EXPECT_FALSE(verify_projectable_frame(lagrange_setup({{"nonprojectable", 1}})).passed());
}

TEST(VerifyAlgebraConditions, LagrangePassesSolFailsIdeal) {
    EXPECT_TRUE(verify_algebra_conditions(lagrange_setup()).passed());
    ReductionSetup sol = *build_model("sol-counterexample").reduction;
    prepare(sol);
    const Report r = verify_algebra_conditions(sol);
    ASSERT_NE(r.first_failure(), nullptr);
    EXPECT_EQ(r.first_failure()->name, "ii) Gamma(ker Omega_B) is an ideal of Gamma(B)^p");
    // The library Lie-algebra reducer rejects the same instance.
    std::vector<Vector> h;
    for (const auto& X : sol.projectable_frame) h.push_back(sol.sub.inclusion.fiber_at(ChartPoint(0)) * X.at(ChartPoint(0)));
    for (const auto& K : sol.kernel_frame) h.push_back(sol.sub.inclusion.fiber_at(ChartPoint(0)) * K.at(ChartPoint(0)));
    EXPECT_THROW(reduce_symplectic_lie_algebra({models::sol_constants(), models::sol_omega()}, h), HypothesisError);
}

TEST(VerifyAlgebraConditions, RotatedFrameBracketCoefficients) {
    // On the slice, [E1, E2] = sinh t E1 + s - nu2 F1 + nu1 F2 in the frame (E1, E2, F1, F2, s).
    const ReductionSetup s = lagrange_setup();
    const Section br = bracket(s.projectable_frame[0], s.projectable_frame[1]);
    for (const auto& q : s.quotient_samples(20)) {
        const ChartPoint x = s.action.slice(q);
        Matrix F(5, 5);
        F << frame_matrix(s.projectable_frame, x, 5), frame_matrix(s.kernel_frame, x, 5);
        const Vector coef = F.fullPivLu().solve(br.at(x));
        EXPECT_LT((coef - models::vec({std::sinh(q[0]), 0.0, -q[2], q[1], 1.0})).norm(), 1e-7);
    }
}

TEST(BuildReduced, LagrangeTopMatchesClosedForms) {
    const ReductionSetup s = lagrange_setup();
    const ReducedModel red = build_reduced(s);
    EXPECT_TRUE(red.post_checks.passed());
    EXPECT_EQ(red.chart->base_dim, 3);
    EXPECT_EQ(red.chart->rank, 4);
    EXPECT_EQ(red.chart->rank, s.sub.sub->rank - red.kernel_dim);
    EXPECT_EQ(red.chart->base_dim, s.sub.n_chart_dim - s.action.group_dim);
    EXPECT_EQ(red.chart->rank % 2, 0);
    const ChartPtr ref = models::lagrange_reduced_chart();
    const auto qs = s.quotient_samples(50);
    EXPECT_TRUE(compare_structure(red.chart, ref, qs, 1e-7).passed());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (const auto& q : qs) {
        const double t = q[0], n1 = q[1], n2 = q[2];
        const Vector eta_beta = models::vec({uni(rng), uni(rng), uni(rng), uni(rng)});
        const double e1 = eta_beta[0], e2 = eta_beta[1], b1 = eta_beta[2], b2 = eta_beta[3];
        const Vector expect = models::vec({-e2 * std::cosh(t), b1 - e1 * n2 * std::sinh(t), b2 + e1 * n1 * std::sinh(t)});
        EXPECT_LT((red.chart->anchor_at(q) * eta_beta - expect).norm(), 1e-7);
        const Vector u = models::vec({uni(rng), uni(rng), uni(rng), uni(rng)});
        EXPECT_NEAR(eta_beta.dot(red.omega.matrix_at(q) * u), u[2] * e1 + u[3] * e2 - (b1 * u[0] + b2 * u[1]), 1e-7);
    }
    EXPECT_LT(red.post_checks.find("pullback pi_B^* Omega_reduced = Omega_B")->max_residual, 1e-8);
}

TEST(BuildReduced, TrivialGroupIsIdentity) {
    ReductionSetup s = *build_model("cotangent-trivial").reduction;
    prepare(s);
    const ReducedModel red = build_reduced(s);
    EXPECT_EQ(red.kernel_dim, 0);
    EXPECT_TRUE(compare_structure(red.chart, s.sub.sub, s.n_samples(), 1e-12).passed());
    for (const auto& x : s.n_samples())
        EXPECT_LT((red.omega.matrix_at(x) - s.restriction().omega_B.matrix_at(x)).norm(), 1e-12);
}

TEST(BuildReduced, RefusesWhenAHypothesisFails) {
    try {
        build_reduced(lagrange_setup({{"nonprojectable", 1}}));
        FAIL() << "expected HypothesisError";
    } catch (const HypothesisError& e) {
        EXPECT_EQ(e.check.name, "projectable frame Psi_g o X = (X + Y_g) o psi_g");
    }
}

TEST(ReduceDynamics, LagrangeReducedHamiltonian) {
    const ParameterMap p{{"I", 1.5}, {"J", 2.5}, {"m", 0.7}, {"g", 9.8}, {"l", 0.3}};
    const ReductionSetup s = lagrange_setup(p);
    ReducedModel red = build_reduced(s);
    const DynamicsReduction d = reduce_dynamics(s, red, *s.hamiltonian, s.tol);
    EXPECT_TRUE(d.report.passed());
    EXPECT_LT(d.report.find("b) projected Hamiltonian section equals the reduced one")->max_residual, 1e-7);
    const double mgl = 0.7 * 9.8 * 0.3;
    for (const auto& q : s.quotient_samples(30))
        EXPECT_NEAR(red.reduced_H->value(q), 0.5 * (q[1] * q[1] + q[2] * q[2]) / 1.5 + mgl * std::tanh(q[0]), 1e-12);
}

TEST(ReduceDynamics, ConstantHamiltonianHasNoDynamics) {
    const ReductionSetup s = lagrange_setup();
    ReducedModel red = build_reduced(s);
    const MultiSection H = constant_function(s.sub.ambient, 2.0);
    reduce_dynamics(s, red, H, s.tol);
    for (const auto& q : s.quotient_samples(10)) {
        EXPECT_EQ(red.reduced_H->value(q), 2.0);
        EXPECT_LT(hamiltonian_vector_field(red.omega, *red.reduced_H, q).norm(), 1e-15);
    }
    const CommutationResult c = verify_commutation(s, red, H, *red.reduced_H, s.default_init, 1.0, 1e-2);
    EXPECT_EQ(c.max_deviation, 0.0);
}

TEST(ReduceDynamics, TiltedPotentialIsNotInvariant) {
    const ReductionSetup s = lagrange_setup({{"tilt", 0.3}});
    ReducedModel red = build_reduced(s);
    try {
        reduce_dynamics(s, red, *s.hamiltonian, s.tol);
        FAIL() << "expected HypothesisError";
    } catch (const HypothesisError& e) {
        EXPECT_EQ(e.check.name, "i) H_N is G-invariant");
        EXPECT_EQ(e.check.detail, "H_N not G-invariant");
    }
}

TEST(VerifyCommutation, LagrangeTopDefaultRun) {
    const ReductionSetup s = lagrange_setup();
    ReducedModel red = build_reduced(s);
    reduce_dynamics(s, red, *s.hamiltonian, s.tol);
    const CommutationResult c = verify_commutation(s, red, *s.hamiltonian, *red.reduced_H, s.default_init, 2.0, 1e-3);
    EXPECT_LE(c.max_deviation, 1e-6);
    EXPECT_LE(c.constraint_drift, 1e-8);
    EXPECT_THROW(verify_commutation(s, red, *s.hamiltonian, *red.reduced_H, models::vec({0, 0.3, 0.2, -0.1, 0.05}), 1.0, 1e-3),
                 InputError);
}

TEST(VerifyCommutation, ReducedFieldAtOrigin) {
    const ReductionSetup s = lagrange_setup({{"J", 1.0}});
    ReducedModel red = build_reduced(s);
    reduce_dynamics(s, red, *s.hamiltonian, s.tol);
    EXPECT_LT((hamiltonian_vector_field(red.omega, *red.reduced_H, Vector::Zero(3)) - models::vec({0, 0, 1})).norm(), 1e-12);
    const double I = 1.0, mgl = 1.0;
    for (const auto& q : s.quotient_samples(10)) {
        const double t = q[0], n1 = q[1], n2 = q[2];
        const Vector expect = models::vec({-n2 * std::cosh(t) / I, -n1 * n2 * std::sinh(t) / I,
                                           mgl / std::cosh(t) + n1 * n1 * std::sinh(t) / I});
        EXPECT_LT((hamiltonian_vector_field(red.omega, *red.reduced_H, q) - expect).norm(), 1e-7);
    }
}

TEST(Properties, ReductionGateNamesExactlyTheBrokenHypothesis) {
    const std::vector<std::pair<ParameterMap, std::string>> cases = {
        {{{"broken", 1}}, "Jacobi identity [A]"},
        {{{"action_scale", 1.01}}, "presymplectic action Psi_g^* Omega_B = Omega_B"},
        {{{"nonprojectable", 1}}, "projectable frame Psi_g o X = (X + Y_g) o psi_g"},
        {{{"kernel_perturb", 0.1}}, "kernel frame lies in ker Omega_B"},
        {{{"tilt", 0.3}}, "i) H_N is G-invariant"},
    };
    for (const auto& [params, name] : cases) {
        ReductionSetup s = *build_model("lagrange-top", params).reduction;
        const PipelineResult r = run_reduction(s);
        int failures = 0;
        for (const auto& c : r.report.checks) failures += !c.passed;
        EXPECT_EQ(failures, 1) << name;
        ASSERT_NE(r.report.first_failure(), nullptr) << name;
        EXPECT_EQ(r.report.first_failure()->name, name);
    }
    ReductionSetup ok = *build_model("lagrange-top").reduction;
    EXPECT_TRUE(run_reduction(ok).passed());
}

TEST(QuotientAlgebroid, SphereByRotationsOverTheTLine) {
    const ChartPtr A = models::lagrange_chart();
    const GroupActionData act = models::sphere_rotation_action();
    const auto xs = sample_points(models::box_of({0, -1.5}, {6.28, 1.5}), 20, 2);
    const ChartPtr Q = quotient_algebroid(A, act, models::rotation_invariant_frame(A), xs, 1e-10);
    EXPECT_EQ(Q->base_dim, 1);
    EXPECT_EQ(Q->rank, 3);
    EXPECT_TRUE(check_axioms(Q, sample_points(act.quotient_box, 20, 3), 1e-8).passed());
    std::vector<Section> fixed;
    for (int a = 0; a < 3; ++a) fixed.push_back(frame_section(A, a));
    EXPECT_THROW(quotient_algebroid(A, act, fixed, xs, 1e-10), HypothesisError);
}

TEST(QuotientAlgebroid, TrivialGroupIsIdentity) {
    const ChartPtr A = models::lagrange_chart();
    const ChartBox box = models::box_of({0, -1.5}, {6.28, 1.5});
    const GroupActionData triv = GroupActionData::trivial(2, 3, box, A->labels);
    std::vector<Section> frame;
    for (int a = 0; a < 3; ++a) frame.push_back(frame_section(A, a));
    const ChartPtr Q = quotient_algebroid(A, triv, frame, sample_points(box, 10, 1), 1e-12);
    EXPECT_TRUE(compare_structure(Q, A, sample_points(box, 10, 4), 1e-12).passed());
}

TEST(QuotientAlgebroid, ProlongationQuotientIsomorphism) {
    const ChartPtr A = models::lagrange_chart();
    const GroupActionData act = models::sphere_rotation_action();
    const auto F = models::rotation_invariant_frame(A);
    const auto xs = sample_points(models::box_of({0, -1.5}, {6.28, 1.5}), 10, 2);
    const ChartPtr AG = quotient_algebroid(A, act, F, xs, 1e-10);
    const ProlongationChart P = prolong(A);
    const GroupActionData lifted = lift_action(P, act, F);
    const auto ps = sample_points(models::box_of({0, -1.5}, {6.28, 1.5}).extended(3, 1.0), 10, 3);
    const ChartPtr left = quotient_algebroid(P.chart, lifted, lift_frame(P, F), ps, 1e-8);
    const ChartPtr right = prolong(AG).chart;
    const Report r = compare_structure(left, right, sample_points(lifted.quotient_box, 20, 5), 1e-8);
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.max_residual;
}

// ---------------------------------------------------------------- models

TEST(Models, EveryRegisteredModelPassesTheAxioms) {
    for (const auto& rec : model_registry()) {
        const BuiltModel b = build_model(rec.name);
        EXPECT_TRUE(check_axioms(b.chart, sample_points(b.box, 20, 9), b.chart->default_tolerance()).passed()) << rec.name;
        EXPECT_FALSE(rec.docs.empty());
    }
}

TEST(Models, CylinderChartLandsOnTheUnitSphere) {
    for (const auto& x : sample_points(models::box_of({0, -5}, {6.28, 5}), 100, 1))
        EXPECT_NEAR(models::cylinder_embedding(x).norm(), 1.0, 1e-14);
}

TEST(Models, ReducedLagrangeTopForm) {
    const BuiltModel b = build_model("lagrange-top-reduced");
    const Matrix W = b.symplectic->matrix_at(b.default_init);
    const Vector u = models::vec({1, 2, 3, 4}), v = models::vec({-1, 0.5, 2, -3});
    // beta'(eta) - beta(eta') with u = (eta, beta), v = (eta', beta').
    EXPECT_EQ(u.dot(W * v), v[2] * u[0] + v[3] * u[1] - (u[2] * v[0] + u[3] * v[1]));
}

TEST(Models, LagrangeHamiltonianOnN) {
    const ParameterMap p{{"I", 2.0}, {"m", 1.5}, {"g", 2.0}, {"l", 0.5}};
    const ReductionSetup s = lagrange_setup(p);
    for (const auto& x : s.n_samples()) {
        const double expect = 0.5 * (x[2] * x[2] + x[3] * x[3]) / 2.0 + 1.5 * std::tanh(x[1]);
        EXPECT_NEAR(s.hamiltonian->value(s.sub.inclusion.map_point(x)), expect, 1e-14);
    }
}

TEST(Models, RegistryRejectsBadInput) {
    EXPECT_THROW(build_model("no-such-model"), InputError);
    EXPECT_THROW(build_model("lagrange-top-full", {{"K", 1}}), InputError);
    EXPECT_THROW(build_model("lagrange-top-full", {{"I", -1}}), InputError);
    EXPECT_THROW(build_model("lagrange-top-full", {{"m", -1}}), InputError);
}
