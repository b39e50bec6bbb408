#pragma once

#include "algmech/prolongation.hpp"

namespace algmech {

struct SuiteOptions {
    int samples = 20;
    std::uint64_t seed = 11;
    double tol = 1e-8;
    double poisson_tol = 1e-7;
    double dual_half_width = 1.0;  ///< box for the y coordinates of the prolongation
    bool prolongation = true;
};

/// Degree-1 section with affine coefficients, analytic Jacobian.
inline MultiSection random_affine_one_section(const ChartPtr& chart, std::mt19937_64& rng) {
    const Section s = random_affine_section(chart, rng);
    MultiSection mu;
    mu.chart = chart;
    mu.degree = 1;
    mu.coeffs = s.coeffs;
    mu.jacobian = s.jacobian;
    return mu;
}

/// Structural properties of a chart and of its prolongation, each as a named check.
inline Report structural_suite(const ChartPtr& chart, const ChartBox& box, const SuiteOptions& opt = {}) {
    Report rep;
    const auto xs = sample_points(box, opt.samples, opt.seed);
    rep.append(check_axioms(chart, xs, opt.tol, opt.seed));

    std::mt19937_64 rng(opt.seed + 3);
    CheckResult d0("d^2 = 0 on functions", opt.tol);
    CheckResult d1("d^2 = 0 on 1-sections", opt.tol);
    const int n = chart->rank;
    std::optional<MultiSection> ddf, ddmu;
    if (n >= 2) ddf = differential(differential(random_quadratic(chart, rng)));
    if (n >= 3) ddmu = differential(differential(random_affine_one_section(chart, rng)));
    for (const auto& x : xs) {
        d0.record(ddf ? ddf->at(x).lpNorm<Eigen::Infinity>() : 0.0, x);
        d1.record(ddmu ? ddmu->at(x).lpNorm<Eigen::Infinity>() : 0.0, x);
    }
    rep.add(d0);
    rep.add(d1);
    if (!opt.prolongation) return rep;

    const ProlongationChart P = prolong(chart);
    const auto ps = sample_points(box.extended(n, opt.dual_half_width), opt.samples, opt.seed + 1);
    AxiomReport pax = check_axioms(P.chart, ps, opt.tol, opt.seed);
    for (auto& c : pax.checks) c.name = "prolongation " + c.name;
    rep.append(pax);

    const SymplecticSection W = canonical_symplectic(P);
    const MultiSection dTheta = differential(liouville(P));
    CheckResult can("-d Theta = Omega", opt.tol);
    for (const auto& p : ps) can.record((dTheta.at(p) + W.omega.at(p)).lpNorm<Eigen::Infinity>(), p);
    rep.add(can);
    SymplecticReport sr = verify_symplectic(W, ps, opt.tol);
    rep.append(sr.report);

    std::mt19937_64 prng(opt.seed + 5);
    const MultiSection f = random_quadratic(P.chart, prng);
    const MultiSection g = random_quadratic(P.chart, prng);
    const MultiSection lp = linear_poisson(P, f, g);
    const MultiSection sp = poisson_bracket(W, f, g);
    CheckResult pb("linear Poisson bracket = symplectic Poisson bracket", opt.poisson_tol);
    for (const auto& p : ps) pb.record(std::abs(lp.value(p) - sp.value(p)), p);
    rep.add(pb);
    return rep;
}

}  // namespace algmech
