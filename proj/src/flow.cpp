#include "finlab/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <string>
#include <vector>

#include "finlab/autodiff.hpp"
#include "finlab/errors.hpp"
#include "finlab/hierarchy.hpp"
#include "finlab/killing.hpp"

namespace finlab {

namespace {

using State = std::vector<double>;

PhasePoint to_point(const State& y, int n) {
    PhasePoint p;
    p.q.assign(y.begin(), y.begin() + n);
    p.u.assign(y.begin() + n, y.end());
    return p;
}

State spray_rhs(const FinslerModel& m, const State& y) {
    const int n = m.dim;
    const SprayData sd = spray_at(m, to_point(y, n));
    State dy(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        dy[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(n + i)];
        dy[static_cast<std::size_t>(n + i)] = sd.spray[static_cast<std::size_t>(i)];
    }
    return dy;
}

State axpy(const State& y, double h, const State& d) {
    State out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * d[i];
    return out;
}

State rk4_step(const FinslerModel& m, const State& y, double h) {
    const State k1 = spray_rhs(m, y);
    const State k2 = spray_rhs(m, axpy(y, 0.5 * h, k1));
    const State k3 = spray_rhs(m, axpy(y, 0.5 * h, k2));
    const State k4 = spray_rhs(m, axpy(y, h, k3));
    State out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Dormand-Prince 5(4) tableau
constexpr double dp_a21 = 1.0 / 5.0;
constexpr double dp_a31 = 3.0 / 40.0, dp_a32 = 9.0 / 40.0;
constexpr double dp_a41 = 44.0 / 45.0, dp_a42 = -56.0 / 15.0, dp_a43 = 32.0 / 9.0;
constexpr double dp_a51 = 19372.0 / 6561.0, dp_a52 = -25360.0 / 2187.0,
                 dp_a53 = 64448.0 / 6561.0, dp_a54 = -212.0 / 729.0;
constexpr double dp_a61 = 9017.0 / 3168.0, dp_a62 = -355.0 / 33.0, dp_a63 = 46732.0 / 5247.0,
                 dp_a64 = 49.0 / 176.0, dp_a65 = -5103.0 / 18656.0;
constexpr double dp_b1 = 35.0 / 384.0, dp_b3 = 500.0 / 1113.0, dp_b4 = 125.0 / 192.0,
                 dp_b5 = -2187.0 / 6784.0, dp_b6 = 11.0 / 84.0;
constexpr double dp_e1 = 5179.0 / 57600.0, dp_e3 = 7571.0 / 16695.0, dp_e4 = 393.0 / 640.0,
                 dp_e5 = -92097.0 / 339200.0, dp_e6 = 187.0 / 2100.0, dp_e7 = 1.0 / 40.0;

// one embedded step: fills the 5th-order result and the max scaled error of
// the embedded 4th-order difference
double dopri_step(const FinslerModel& m, const State& y, double h, State& out) {
    const State k1 = spray_rhs(m, y);
    const State k2 = spray_rhs(m, axpy(y, h * dp_a21, k1));
    State tmp(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + h * (dp_a31 * k1[i] + dp_a32 * k2[i]);
    const State k3 = spray_rhs(m, tmp);
    for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + h * (dp_a41 * k1[i] + dp_a42 * k2[i] + dp_a43 * k3[i]);
    const State k4 = spray_rhs(m, tmp);
    for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + h * (dp_a51 * k1[i] + dp_a52 * k2[i] + dp_a53 * k3[i] + dp_a54 * k4[i]);
    const State k5 = spray_rhs(m, tmp);
    for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + h * (dp_a61 * k1[i] + dp_a62 * k2[i] + dp_a63 * k3[i] + dp_a64 * k4[i] +
                             dp_a65 * k5[i]);
    const State k6 = spray_rhs(m, tmp);
    out.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] + h * (dp_b1 * k1[i] + dp_b3 * k3[i] + dp_b4 * k4[i] + dp_b5 * k5[i] +
                             dp_b6 * k6[i]);
    const State k7 = spray_rhs(m, out);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double low = y[i] + h * (dp_e1 * k1[i] + dp_e3 * k3[i] + dp_e4 * k4[i] +
                                       dp_e5 * k5[i] + dp_e6 * k6[i] + dp_e7 * k7[i]);
        const double scaled = std::fabs(out[i] - low) / std::fmax(1.0, std::fabs(out[i]));
        if (scaled > err) err = scaled;
    }
    return err;
}

void validate_policy(const FlowPolicy& policy) {
    if (!(policy.t_end > 0.0)) throw ModelError("flow needs t_end > 0");
    if (!(policy.step > 0.0)) throw ModelError("flow needs a positive step");
    if (!(policy.adaptive_tol > 0.0)) throw ModelError("flow needs a positive adaptive tolerance");
    if (policy.method != "rk4" && policy.method != "dopri")
        throw ModelError("unknown integration method '" + policy.method + "'");
}

std::string format_value(double v) {
    std::array<char, 40> buf{};
    const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data(), static_cast<std::size_t>(len));
}

// a_j = tr(K^j)/j and k_j = 1/2 u^T g K^j u for j = 1..n, plus k_0 = E
struct ChainValues {
    std::vector<double> a;  // slot 0 unused
    std::vector<double> k;  // k[0] = E
};

ChainValues chain_values(const FinslerModel& m, const TensorField& kt, const PhasePoint& p) {
    const int n = m.dim;
    const SprayData sd = spray_at(m, p);
    const Mat kval = kt.values_at(p);
    ChainValues out;
    out.a.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.k.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.k[0] = sd.energy;
    Mat power = kval;
    for (int j = 1; j <= n; ++j) {
        out.a[static_cast<std::size_t>(j)] = power.trace() / static_cast<double>(j);
        const std::vector<double> w = sd.g * (power * p.u);
        out.k[static_cast<std::size_t>(j)] = 0.5 * dot(p.u, w);
        if (j < n) power = power * kval;
    }
    return out;
}

}  // namespace

Trajectory integrate_geodesic(const FinslerModel& m, const PhasePoint& p0,
                              const FlowPolicy& policy) {
    validate_policy(policy);
    if (static_cast<int>(p0.q.size()) != m.dim || static_cast<int>(p0.u.size()) != m.dim)
        throw ModelError("start point dimension does not match the model");

    Trajectory traj;
    traj.method = policy.method;
    State y(static_cast<std::size_t>(2 * m.dim));
    for (int i = 0; i < m.dim; ++i) {
        y[static_cast<std::size_t>(i)] = p0.q[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(m.dim + i)] = p0.u[static_cast<std::size_t>(i)];
    }
    traj.times.push_back(0.0);
    traj.states.push_back(p0);

    if (policy.method == "rk4") {
        const double raw = policy.t_end / policy.step;
        if (raw > 5e7) throw ModelError("fixed-step count exceeds the step budget");
        const long long nsteps = std::max<long long>(1, static_cast<long long>(std::ceil(raw - 1e-9)));
        const double h = policy.t_end / static_cast<double>(nsteps);
        traj.step_min = h;
        traj.step_max = h;
        for (long long k = 1; k <= nsteps; ++k) {
            y = rk4_step(m, y, h);
            traj.times.push_back(k == nsteps ? policy.t_end : h * static_cast<double>(k));
            traj.states.push_back(to_point(y, m.dim));
        }
        traj.steps_taken = nsteps;
        return traj;
    }

    double t = 0.0;
    double h = std::fmin(policy.step, policy.t_end);
    traj.step_min = policy.t_end;
    traj.step_max = 0.0;
    long long budget = 20'000'000;
    State next;
    while (t < policy.t_end) {
        if (--budget < 0) throw ModelError("adaptive integrator exceeded the step budget");
        const bool last = h >= policy.t_end - t;
        if (last) h = policy.t_end - t;
        const double err = dopri_step(m, y, h, next);
        if (err <= policy.adaptive_tol) {
            t = last ? policy.t_end : t + h;
            y = next;
            traj.times.push_back(t);
            traj.states.push_back(to_point(y, m.dim));
            ++traj.steps_taken;
            traj.step_min = std::fmin(traj.step_min, h);
            traj.step_max = std::fmax(traj.step_max, h);
            const double factor =
                err > 0.0 ? std::clamp(0.9 * std::pow(policy.adaptive_tol / err, 0.2), 0.2, 5.0)
                          : 5.0;
            h *= factor;
        } else {
            ++traj.steps_rejected;
            h *= std::clamp(0.9 * std::pow(policy.adaptive_tol / err, 0.2), 0.2, 0.9);
        }
        if (h < 1e-14)
            throw ModelError("adaptive step collapsed below 1e-14 at t = " + std::to_string(t));
    }
    return traj;
}

DriftReport drift_report(const FinslerModel& m, const TensorField& kt, const Trajectory& traj,
                         double tolerance) {
    if (traj.states.size() < 2)
        throw ModelError("drift measurement needs a trajectory with at least two states");
    const int n = m.dim;
    DriftReport rep;
    rep.n = n;
    rep.tolerance = tolerance;
    for (int l = 0; l < n; ++l) rep.labels.push_back("h_" + std::to_string(l));
    rep.labels.push_back("cofactor");
    rep.labels.push_back("E");
    const std::size_t count = rep.labels.size();
    rep.initial.assign(count, 0.0);
    rep.drift_abs.assign(count, 0.0);
    rep.drift_relative.assign(count, 0.0);

    std::vector<double> values(count, 0.0);
    bool first = true;
    for (const PhasePoint& p : traj.states) {
        const HierarchyValues hv = hierarchy_at(m, kt, p);
        for (int l = 0; l < n; ++l) values[static_cast<std::size_t>(l)] = hv.h[static_cast<std::size_t>(l)];
        values[static_cast<std::size_t>(n)] = hv.cofactor_integral;
        values[static_cast<std::size_t>(n) + 1] = hv.energy;
        if (first) {
            rep.initial = values;
            first = false;
            continue;
        }
        for (std::size_t i = 0; i < count; ++i) {
            const double gap = std::fabs(values[i] - rep.initial[i]);
            if (gap > rep.drift_abs[i]) rep.drift_abs[i] = gap;
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        rep.drift_relative[i] = rep.drift_abs[i] / std::fmax(1.0, std::fabs(rep.initial[i]));
        if (rep.drift_relative[i] > rep.worst) rep.worst = rep.drift_relative[i];
    }
    rep.verdict = rep.worst <= tolerance;
    return rep;
}

void write_trajectory_csv(const FinslerModel& m, const TensorField& kt, const Trajectory& traj,
                          std::ostream& out) {
    const int n = m.dim;
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",q" << i;
    for (int i = 1; i <= n; ++i) out << ",u" << i;
    for (int l = 0; l < n; ++l) out << ",h_" << l;
    out << ",cofactor,E\n";
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const PhasePoint& p = traj.states[s];
        const HierarchyValues hv = hierarchy_at(m, kt, p);
        out << format_value(traj.times[s]);
        for (int i = 0; i < n; ++i) out << ',' << format_value(p.q[static_cast<std::size_t>(i)]);
        for (int i = 0; i < n; ++i) out << ',' << format_value(p.u[static_cast<std::size_t>(i)]);
        for (int l = 0; l < n; ++l) out << ',' << format_value(hv.h[static_cast<std::size_t>(l)]);
        out << ',' << format_value(hv.cofactor_integral) << ',' << format_value(hv.energy) << '\n';
    }
}

DerivativeFlowReport along_flow_derivative_check(const FinslerModel& m, const TensorField& kt,
                                                 const Trajectory& traj, double tolerance) {
    const std::size_t count = traj.states.size();
    if (count < 5)
        throw ModelError("derivative check needs a trajectory with at least five states");
    const double dt = traj.times[1] - traj.times[0];
    for (std::size_t s = 1; s < count; ++s) {
        const double step = traj.times[s] - traj.times[s - 1];
        if (std::fabs(step - dt) > std::fmax(1e-9 * dt, 1e-15))
            throw ModelError("derivative check needs a uniform-step trajectory");
    }
    if (dt > 1e-3 * (1.0 + 1e-9))
        throw ModelError("derivative check needs a step of at most 1e-3");

    const int n = m.dim;
    DerivativeFlowReport rep;
    rep.n = n;
    rep.tolerance = tolerance;
    rep.a_gap.assign(static_cast<std::size_t>(n) + 1, 0.0);
    rep.k_gap.assign(static_cast<std::size_t>(n) + 1, 0.0);

    const std::size_t stride = std::max<std::size_t>(1, (count - 4) / 200);
    for (std::size_t c = 2; c + 2 < count; c += stride) {
        std::array<ChainValues, 5> stencil;
        for (int off = -2; off <= 2; ++off)
            stencil[static_cast<std::size_t>(off + 2)] =
                chain_values(m, kt, traj.states[c + static_cast<std::size_t>(off)]);

        const PhasePoint& p = traj.states[c];
        const PointGeometry geo = geometry_at(m, p);
        const std::vector<double> alpha = extract_alpha(geo, kt);
        const Mat kval = kt.values_at(p);

        // d(a_j)/dt = alpha(K^(j-1) u): the trace of the product-rule expansion
        // of d(K^j)/dt divides by j, dropping one power of K
        std::vector<double> rhs_a(static_cast<std::size_t>(n) + 1, 0.0);
        std::vector<double> kju = p.u;
        for (int j = 1; j <= n; ++j) {
            rhs_a[static_cast<std::size_t>(j)] = dot(alpha, kju);
            if (j < n) kju = kval * kju;
        }
        const ChainValues& center = stencil[2];
        for (int j = 1; j <= n; ++j) {
            double fd_a = 0.0, fd_k = 0.0;
            const std::array<double, 5> w = {1.0, -8.0, 0.0, 8.0, -1.0};
            for (int s = 0; s < 5; ++s) {
                fd_a += w[static_cast<std::size_t>(s)] * stencil[static_cast<std::size_t>(s)].a[static_cast<std::size_t>(j)];
                fd_k += w[static_cast<std::size_t>(s)] * stencil[static_cast<std::size_t>(s)].k[static_cast<std::size_t>(j)];
            }
            fd_a /= 12.0 * dt;
            fd_k /= 12.0 * dt;
            double rhs_k = 0.0;
            for (int i = 1; i <= j; ++i)
                rhs_k += rhs_a[static_cast<std::size_t>(i)] * center.k[static_cast<std::size_t>(j - i)];
            const double gap_a = std::fabs(fd_a - rhs_a[static_cast<std::size_t>(j)]) /
                                 std::fmax(1.0, std::fabs(rhs_a[static_cast<std::size_t>(j)]));
            const double gap_k = std::fabs(fd_k - rhs_k) / std::fmax(1.0, std::fabs(rhs_k));
            if (gap_a > rep.a_gap[static_cast<std::size_t>(j)]) rep.a_gap[static_cast<std::size_t>(j)] = gap_a;
            if (gap_k > rep.k_gap[static_cast<std::size_t>(j)]) rep.k_gap[static_cast<std::size_t>(j)] = gap_k;
        }
        ++rep.center_count;
    }
    for (int j = 1; j <= n; ++j) {
        rep.a_gap_max = std::fmax(rep.a_gap_max, rep.a_gap[static_cast<std::size_t>(j)]);
        rep.k_gap_max = std::fmax(rep.k_gap_max, rep.k_gap[static_cast<std::size_t>(j)]);
    }
    rep.verdict = rep.a_gap_max <= tolerance && rep.k_gap_max <= tolerance;
    return rep;
}

Mat symplectic_form(const PointGeometry& geo) {
    const int n = geo.n;
    Mat om(2 * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            // omega(dq_a, dq_b) = E_{q_a u_b} - E_{q_b u_a}
            om(a, b) = geo.e_uq(b, a) - geo.e_uq(a, b);
            om(a, n + b) = -geo.g(a, b);
            om(n + b, a) = geo.g(b, a);
        }
    return om;
}

namespace {

Vec jet_gradient(const Jet& j, int mvars) {
    Vec grad(static_cast<std::size_t>(mvars));
    for (int a = 0; a < mvars; ++a) {
        const std::array<int, 1> idx = {a};
        grad[static_cast<std::size_t>(a)] = j.partial(idx);
    }
    return grad;
}

}  // namespace

double symplectic_bracket(const FinslerModel& m, const Expression& f, const Expression& h,
                          const PhasePoint& p) {
    if (f.dim() != m.dim || h.dim() != m.dim)
        throw ModelError("bracket arguments must match the model dimension");
    const PointGeometry geo = geometry_at(m, p);
    const Mat om = symplectic_form(geo);
    const Lu lu = lu_factor(om);
    if (lu.singular) throw ModelError("symplectic form is degenerate at the given point");
    const Jet fj = evaluate_jet(f, p, 1);
    const Jet hj = evaluate_jet(h, p, 1);
    const Vec df = jet_gradient(fj, 2 * m.dim);
    const Vec dh = jet_gradient(hj, 2 * m.dim);
    const Vec xf = lu.solve(df);
    return dot(dh, xf);
}

std::vector<Jet> hierarchy_jets(const FinslerModel& m, const TensorField& kt, const PhasePoint& p) {
    if (kt.dim() != m.dim)
        throw ModelError("tensor dimension " + std::to_string(kt.dim()) +
                         " does not match the model dimension " + std::to_string(m.dim));
    spray_at(m, p);  // validates the slit guard and the metric
    const int n = m.dim;
    const int mvars = 2 * n;
    const JetSpace& sp = JetSpace::get(mvars, 1);

    std::vector<Jet> vars;
    vars.reserve(static_cast<std::size_t>(mvars));
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(sp, i, p.q[static_cast<std::size_t>(i)]));
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(sp, n + i, p.u[static_cast<std::size_t>(i)]));
    std::vector<Jet> deltas;  // pure first-order monomials
    deltas.reserve(static_cast<std::size_t>(mvars));
    for (int a = 0; a < mvars; ++a) deltas.push_back(Jet::variable(sp, a, 0.0));

    // first-order jets of the metric entries, assembled from third partials
    // of the energy: value d2E/du_i du_j, slope d3E/du_i du_j dx_a
    const Jet e3 = evaluate_jet(m.energy, p, 3);
    SquareMat<Jet> gm(n, Jet(sp));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::array<int, 2> second = {n + i, n + j};
            Jet entry(sp, e3.partial(second));
            for (int a = 0; a < mvars; ++a) {
                const std::array<int, 3> third = {n + i, n + j, a};
                entry = entry + deltas[static_cast<std::size_t>(a)] * e3.partial(third);
            }
            gm(i, j) = entry;
        }

    const std::span<const Jet> qspan(vars.data(), static_cast<std::size_t>(n));
    const std::span<const Jet> uspan(vars.data() + n, static_cast<std::size_t>(n));
    const SquareMat<Jet> km = kt.values_at<Jet>(qspan, uspan);
    const std::vector<Jet> ujets(vars.begin() + n, vars.end());

    return hierarchy_series(km, gm, ujets).h;
}

InvolutivityTable involutivity_probe(const FinslerModel& m, const TensorField& kt,
                                     const std::vector<PhasePoint>& samples) {
    if (samples.empty()) throw ModelError("involutivity probe needs at least one sample point");
    const int n = m.dim;
    InvolutivityTable table;
    table.n = n;
    table.sample_count = static_cast<int>(samples.size());
    table.magnitudes = Mat(n, 0.0);

    for (const PhasePoint& p : samples) {
        const PointGeometry geo = geometry_at(m, p);
        const Mat om = symplectic_form(geo);
        const Lu lu = lu_factor(om);
        if (lu.singular) throw ModelError("symplectic form is degenerate at a sample point");
        const std::vector<Jet> hjets = hierarchy_jets(m, kt, p);
        std::vector<Vec> grads, fields;
        for (int l = 0; l < n; ++l) {
            grads.push_back(jet_gradient(hjets[static_cast<std::size_t>(l)], 2 * n));
            fields.push_back(lu.solve(grads.back()));
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double br = dot(grads[static_cast<std::size_t>(j)], fields[static_cast<std::size_t>(i)]);
                const double rback = dot(grads[static_cast<std::size_t>(i)], fields[static_cast<std::size_t>(j)]);
                const double mag = std::fmax(std::fabs(br), std::fabs(rback));
                if (mag > table.magnitudes(i, j)) {
                    table.magnitudes(i, j) = mag;
                    table.magnitudes(j, i) = mag;
                }
                const double anti = std::fabs(br + rback) / std::fmax(1.0, std::fabs(br));
                if (anti > table.antisymmetry_max) table.antisymmetry_max = anti;
            }
    }
    return table;
}

}  // namespace finlab
