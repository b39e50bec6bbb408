#pragma once

#include "algmech/prolongation.hpp"

#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>

namespace algmech {

using ParameterMap = std::map<std::string, double>;

struct HamiltonianSystem {
    ProlongationChart prolong;
    MultiSection H;  ///< function on the (x, y) chart
    ParameterMap parameters;
};

/// x^i' = rho^i_a dH/dy_a,  y_a' = -(rho^i_a dH/dx^i + C^g_ab y_g dH/dy_b)
inline Vector hamilton_rhs(const HamiltonianSystem& sys, const ChartPoint& state) {
    const ProlongationChart& P = sys.prolong;
    const int m = P.m, n = P.n;
    require_dim(state.size(), m + n, "hamilton_rhs state");
    const Vector grad = sys.H.jacobian_at(state).transpose();
    const Vector x = state.head(m);
    const Vector y = state.tail(n);
    const Matrix rho = P.parent->anchor_at(x);
    const StructureConstants C = P.parent->structure_at(x);
    const Vector dHdy = grad.tail(n);
    Vector out(m + n);
    out.head(m) = rho * dHdy;
    Vector yd = Vector::Zero(n);
    if (m > 0) yd = rho.transpose() * grad.head(m);
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) {
            if (dHdy[b] == 0.0) continue;
            for (int g = 0; g < n; ++g) s += C(g, a, b) * y[g] * dHdy[b];
        }
        yd[a] += s;
    }
    out.tail(n) = -yd;
    require_finite(out, state, "hamilton_rhs");
    return out;
}

/// rho(sharp(d^A H)) for a symplectic section on any chart.
inline Vector hamiltonian_vector_field(const SymplecticSection& W, const MultiSection& H, const ChartPoint& x) {
    const Matrix rho = W.chart->anchor_at(x);
    const Vector dH = rho.transpose() * H.jacobian_at(x).transpose();
    return rho * sharp_at(W.matrix_at(x), dH, x);
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> energy;
    double step = 0.0;
    std::string method = "rk4";
    bool aborted = false;
    std::string diagnostic;
    std::vector<std::string> labels;
    std::vector<bool> periodic;
};

using VectorField = std::function<Vector(const Vector&)>;

/// Classical fixed-step RK4; the last step is shortened to land on t_end.
inline Trajectory integrate_field(const VectorField& f, const std::function<double(const Vector&)>& energy,
                                  const Vector& init, double t_end, double h, double blowup_bound = 1e8) {
    if (!(h > 0.0) || !(t_end > 0.0)) throw InputError("integrate: step and final time must be positive");
    Trajectory tr;
    tr.step = h;
    const long steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
    Vector y = init;
    tr.times.push_back(0.0);
    tr.states.push_back(y);
    tr.energy.push_back(energy ? energy(y) : 0.0);
    for (long k = 0; k < steps; ++k) {
        const double t0 = static_cast<double>(k) * h;
        const double t1 = (k + 1 == steps) ? t_end : static_cast<double>(k + 1) * h;
        const double dt = t1 - t0;
        try {
            const Vector k1 = f(y);
            const Vector k2 = f(y + 0.5 * dt * k1);
            const Vector k3 = f(y + 0.5 * dt * k2);
            const Vector k4 = f(y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } catch (const NumericError& e) {
            tr.aborted = true;
            tr.diagnostic = std::string("integration aborted at t = ") + std::to_string(t0) + ": " + e.what();
            return tr;
        }
        if (!y.allFinite() || y.lpNorm<Eigen::Infinity>() > blowup_bound) {
            tr.aborted = true;
            tr.diagnostic = "blow-up: state norm exceeded " + std::to_string(blowup_bound) + " at t = " + std::to_string(t1);
            return tr;
        }
        tr.times.push_back(t1);
        tr.states.push_back(y);
        tr.energy.push_back(energy ? energy(y) : 0.0);
    }
    return tr;
}

inline Trajectory integrate(const HamiltonianSystem& sys, const ChartPoint& init, double t_end, double h,
                            double blowup_bound = 1e8) {
    require_dim(init.size(), sys.prolong.m + sys.prolong.n, "integrate initial state");
    Trajectory tr = integrate_field([&sys](const Vector& s) { return hamilton_rhs(sys, s); },
                                    [&sys](const Vector& s) { return sys.H.value(s); }, init, t_end, h, blowup_bound);
    tr.labels = sys.prolong.chart->labels;
    tr.periodic = sys.prolong.chart->periodic;
    return tr;
}

inline double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a, two_pi);
    if (w < 0) w += two_pi;
    return w;
}

/// CSV with header t,<labels>,energy and 17 significant digits.
inline void write_csv(const Trajectory& tr, std::ostream& os) {
    os << 't';
    const std::size_t dim = tr.states.empty() ? tr.labels.size() : static_cast<std::size_t>(tr.states.front().size());
    for (std::size_t i = 0; i < dim; ++i) os << ',' << (i < tr.labels.size() ? tr.labels[i] : "s" + std::to_string(i + 1));
    os << ",energy\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        os << tr.times[k];
        for (Eigen::Index i = 0; i < tr.states[k].size(); ++i) {
            double v = tr.states[k][i];
            if (static_cast<std::size_t>(i) < tr.periodic.size() && tr.periodic[i]) v = wrap_angle(v);
            os << ',' << v;
        }
        os << ',' << tr.energy[k] << '\n';
    }
}

/// Local model of an Atiyah algebroid: connection D^a_i(x), curvature R^a_ij(x), constants c^c_ab.
struct AtiyahLocalData {
    int base_dim = 0;
    StructureConstants algebra;
    std::function<Matrix(const ChartPoint&)> connection;                ///< r x d, entry (a, i) = D^a_i
    std::function<std::vector<Matrix>(const ChartPoint&)> curvature;   ///< r matrices d x d, entry [a](i, j) = R^a_ij
    std::function<std::vector<Matrix>(const ChartPoint&)> connection_partials;               ///< optional, per x^k
    std::function<std::vector<std::vector<Matrix>>(const ChartPoint&)> curvature_partials;  ///< optional, per x^k
};

namespace detail {
inline StructureConstants atiyah_structure(const StructureConstants& c, const Matrix& D, const std::vector<Matrix>& R,
                                           int d, bool algebra_block = true) {
    const int r = c.rank();
    StructureConstants C(d + r);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int a = 0; a < r; ++a) C.set(d + a, i, j, -R[a](i, j));
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < r; ++a)
            for (int cc = 0; cc < r; ++cc) {
                double v = 0.0;
                for (int b = 0; b < r; ++b) v += c(cc, a, b) * D(b, i);
                C.set(d + cc, i, d + a, v);
            }
    if (algebra_block)
        for (int a = 0; a < r; ++a)
            for (int b = a + 1; b < r; ++b)
                for (int cc = 0; cc < r; ++cc) C.set(d + cc, d + a, d + b, c(cc, a, b));
    return C;
}
}  // namespace detail

/// Frame (e_i', e_a'): rho_i^j = delta, C^a_ij = -R^a_ij, C^c_ia = -C^c_ai = c^c_ab D^b_i, C^c_ab = c^c_ab.
inline ChartPtr atiyah_chart(const AtiyahLocalData& data, std::string name = "atiyah-local") {
    const int d = data.base_dim;
    const int r = data.algebra.rank();
    auto chart = std::make_shared<LieAlgebroidChart>();
    chart->name = std::move(name);
    chart->base_dim = d;
    chart->rank = d + r;
    chart->dual_labels = default_labels("p", d);
    for (const auto& l : default_labels("pbar", r)) chart->dual_labels.push_back(l);
    chart->anchor = [d, r](const ChartPoint&) {
        Matrix R = Matrix::Zero(d, d + r);
        R.leftCols(d).setIdentity();
        return R;
    };
    chart->structure = [data, d](const ChartPoint& x) {
        return detail::atiyah_structure(data.algebra, data.connection(x), data.curvature(x), d);
    };
    if (data.connection_partials && data.curvature_partials) {
        chart->anchor_partials = [d, r](const ChartPoint&) { return std::vector<Matrix>(d, Matrix::Zero(d, d + r)); };
        chart->structure_partials = [data, d](const ChartPoint& x) {
            const auto dD = data.connection_partials(x);
            const auto dR = data.curvature_partials(x);
            std::vector<StructureConstants> out;
            for (int k = 0; k < d; ++k) out.push_back(detail::atiyah_structure(data.algebra, dD[k], dR[k], d, false));
            return out;
        };
    }
    return chart;
}

/// Scalar function h(x, p, pbar) with optional analytic gradient.
struct ScalarFunction {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;

    Vector gradient_at(const Vector& s) const { return gradient ? gradient(s) : fd_gradient(value, s); }
};

inline HamiltonianSystem hamilton_poincare_system(const AtiyahLocalData& data, const ScalarFunction& h) {
    HamiltonianSystem sys{prolong(atiyah_chart(data)), {}, {}};
    std::function<Vector(const ChartPoint&)> grad;
    if (h.gradient) grad = h.gradient;
    sys.H = scalar_field(sys.prolong.chart, h.value, grad);
    return sys;
}

/// Generic route: hamilton_rhs on the prolongation of the Atiyah chart.
inline Vector hamilton_poincare_rhs(const AtiyahLocalData& data, const ScalarFunction& h, const Vector& state) {
    return hamilton_rhs(hamilton_poincare_system(data, h), state);
}

/// Direct transcription of the Hamilton-Poincare equations in (x, p, pbar).
inline Vector hamilton_poincare_direct(const AtiyahLocalData& data, const ScalarFunction& h, const Vector& state) {
    const int d = data.base_dim;
    const int r = data.algebra.rank();
    require_dim(state.size(), 2 * d + r, "hamilton_poincare state");
    const Vector x = state.head(d);
    const Vector pb = state.tail(r);
    const Vector g = h.gradient_at(state);
    const Vector hx = g.head(d), hp = g.segment(d, d), hpb = g.tail(r);
    const Matrix D = data.connection(x);
    const auto R = data.curvature(x);
    const StructureConstants& c = data.algebra;
    Vector out(2 * d + r);
    out.head(d) = hp;
    for (int i = 0; i < d; ++i) {
        double v = -hx[i];
        for (int a = 0; a < r; ++a)
            for (int j = 0; j < d; ++j) v += R[a](i, j) * pb[a] * hp[j];
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int cc = 0; cc < r; ++cc) v -= c(cc, a, b) * D(b, i) * pb[cc] * hpb[a];
        out[d + i] = v;
    }
    for (int a = 0; a < r; ++a) {
        double v = 0.0;
        for (int b = 0; b < r; ++b)
            for (int cc = 0; cc < r; ++cc) {
                const double cab = c(cc, a, b);
                if (cab == 0.0) continue;
                for (int i = 0; i < d; ++i) v += cab * D(b, i) * pb[cc] * hp[i];
                v -= cab * pb[cc] * hpb[b];
            }
        out[2 * d + a] = v;
    }
    return out;
}

}  // namespace algmech
