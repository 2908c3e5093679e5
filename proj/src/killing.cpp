#include "finlab/killing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "finlab/autodiff.hpp"
#include "finlab/errors.hpp"

namespace finlab {

namespace {

Expression trace_expr(const TensorField& k) {
    Expression t = k.at(0, 0);
    for (int i = 1; i < k.dim(); ++i) t = t + k.at(i, i);
    return t;
}

std::vector<double> alpha_from(const PointGeometry& geo, const Mat& nabk, double nabla_trk) {
    if (!(geo.energy > 1e-12)) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.6g", geo.energy);
        throw ModelError(std::string("energy ") + buf +
                         " is too small to extract the one-form");
    }
    const int n = geo.n;
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += geo.theta[static_cast<std::size_t>(i)] * nabk(i, j);
        alpha[static_cast<std::size_t>(j)] =
            (s - 0.5 * nabla_trk * geo.theta[static_cast<std::size_t>(j)]) / geo.energy;
    }
    return alpha;
}

// residual of the condition equation: nabla K - 1/2 (u tensor alpha + g^{-1}alpha tensor theta)
Mat condition_matrix(const PointGeometry& geo, const Mat& nabk, const std::vector<double>& alpha) {
    const int n = geo.n;
    const std::vector<double> raised = geo.g_inv * alpha;
    Mat r = nabk;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) -= 0.5 * (geo.point.u[static_cast<std::size_t>(i)] *
                                  alpha[static_cast<std::size_t>(j)] +
                              raised[static_cast<std::size_t>(i)] *
                                  geo.theta[static_cast<std::size_t>(j)]);
    return r;
}

void require_u_free(const TensorField& j, const char* route) {
    if (j.uses_u())
        throw ModelError(std::string("tensor entries must be free of the velocities for the ") +
                         route);
}

// entry values and first q-derivatives of a u-free tensor at p
void tensor_q_jets(const TensorField& j, const PhasePoint& p, Mat& val, std::vector<Mat>& dq) {
    const int n = j.dim();
    val = Mat(n, 0.0);
    dq.assign(static_cast<std::size_t>(n), Mat(n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Jet je = evaluate_jet(j.at(a, b), p, 1);
            val(a, b) = je.value();
            for (int k = 0; k < n; ++k) {
                const int c[1] = {k};
                dq[static_cast<std::size_t>(k)](a, b) = je.partial(std::span<const int>(c, 1));
            }
        }
}

}  // namespace

std::vector<double> extract_alpha(const PointGeometry& geo, const TensorField& k) {
    const Mat nabk = nabla_tensor11(geo, k);
    const double nabla_trk = nabla_scalar(geo, trace_expr(k));
    return alpha_from(geo, nabk, nabla_trk);
}

std::vector<double> extract_alpha(const FinslerModel& m, const TensorField& k,
                                  const PhasePoint& p) {
    return extract_alpha(geometry_at(m, p), k);
}

ConditionReport condition_residual(const FinslerModel& m, const TensorField& k,
                                   const std::vector<PhasePoint>& samples, double tolerance) {
    if (samples.empty()) throw ModelError("condition check needs at least one sample point");
    if (k.dim() != m.dim)
        throw ModelError("tensor dimension " + std::to_string(k.dim()) +
                         " does not match model dimension " + std::to_string(m.dim));
    ConditionReport rep;
    rep.dim = m.dim;
    rep.sample_count = static_cast<int>(samples.size());
    rep.tolerance = tolerance;
    rep.max_u_degree = k.max_u_degree();
    rep.alpha_samples.reserve(samples.size());

    const Expression trk = trace_expr(k);
    for (const PhasePoint& p : samples) {
        const PointGeometry geo = geometry_at(m, p);
        const Mat nabk = nabla_tensor11(geo, k);
        const double nabla_trk = nabla_scalar(geo, trk);
        const std::vector<double> alpha = alpha_from(geo, nabk, nabla_trk);

        const Mat r = condition_matrix(geo, nabk, alpha);
        rep.residual_max =
            std::max(rep.residual_max, frobenius(r) / std::max(1.0, frobenius(nabk)));

        const Mat lowered = geo.g * k.values_at(p);
        double asym = 0.0;
        for (int i = 0; i < geo.n; ++i)
            for (int j = i + 1; j < geo.n; ++j)
                asym += 2.0 * (lowered(i, j) - lowered(j, i)) * (lowered(i, j) - lowered(j, i));
        rep.symmetry_max = std::max(rep.symmetry_max,
                                    std::sqrt(asym) / std::max(1.0, frobenius(lowered)));

        double alpha_t = 0.0;
        for (int i = 0; i < geo.n; ++i)
            alpha_t += alpha[static_cast<std::size_t>(i)] * p.u[static_cast<std::size_t>(i)];
        rep.trace_identity_max =
            std::max(rep.trace_identity_max,
                     std::fabs(alpha_t - nabla_trk) / std::max(1.0, std::fabs(nabla_trk)));

        rep.alpha_samples.push_back(alpha);
    }
    rep.verdict = rep.residual_max <= tolerance && rep.symmetry_max <= tolerance &&
                  rep.trace_identity_max <= tolerance;
    return rep;
}

RiemannReport riemannian_sckt_residual(const FinslerModel& m, const TensorField& j,
                                       const std::vector<PhasePoint>& samples, double tolerance) {
    if (samples.empty()) throw ModelError("classical route needs at least one sample point");
    if (j.dim() != m.dim)
        throw ModelError("tensor dimension " + std::to_string(j.dim()) +
                         " does not match model dimension " + std::to_string(m.dim));
    require_u_free(j, "classical route");

    RiemannReport rep;
    rep.sample_count = static_cast<int>(samples.size());
    rep.tolerance = tolerance;
    const int n = m.dim;

    for (const PhasePoint& p : samples) {
        const PointGeometry geo = geometry_at(m, p);

        // quadratic energy <=> third u-derivatives vanish
        double third = 0.0, gscale = 1.0;
        for (int k = 0; k < n; ++k) third = std::max(third, max_abs(geo.dg_du[static_cast<std::size_t>(k)]));
        gscale = std::max(1.0, max_abs(geo.g));
        if (third > 1e-10 * gscale)
            throw ModelError("energy is not quadratic in the velocities; the classical route "
                             "needs a velocity-independent metric");

        Mat jval(n, 0.0);
        std::vector<Mat> dj;
        tensor_q_jets(j, p, jval, dj);

        // Levi-Civita symbols of the q-only metric
        std::vector<Mat> christoffel(static_cast<std::size_t>(n), Mat(n, 0.0));  // [m](i,k)
        for (int mi = 0; mi < n; ++mi)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l)
                        s += geo.g_inv(mi, l) *
                             (geo.dg_dq[static_cast<std::size_t>(i)](l, k) +
                              geo.dg_dq[static_cast<std::size_t>(k)](l, i) -
                              geo.dg_dq[static_cast<std::size_t>(l)](i, k));
                    christoffel[static_cast<std::size_t>(mi)](i, k) = 0.5 * s;
                }

        const Mat lowered = geo.g * jval;
        std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);  // d(tr J)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int mi = 0; mi < n; ++mi) s += dj[static_cast<std::size_t>(i)](mi, mi);
            alpha[static_cast<std::size_t>(i)] = s;
        }

        double def_sq = 0.0, cov_sq = 0.0;
        Mat contracted(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
                for (int k = 0; k < n; ++k) {
                    double dlow = 0.0;
                    for (int mi = 0; mi < n; ++mi)
                        dlow += geo.dg_dq[static_cast<std::size_t>(k)](i, mi) * jval(mi, jj) +
                                geo.g(i, mi) * dj[static_cast<std::size_t>(k)](mi, jj);
                    double cov = dlow;
                    for (int mi = 0; mi < n; ++mi)
                        cov -= christoffel[static_cast<std::size_t>(mi)](i, k) * lowered(mi, jj) +
                               christoffel[static_cast<std::size_t>(mi)](jj, k) * lowered(i, mi);
                    const double d = cov - 0.5 * (alpha[static_cast<std::size_t>(i)] * geo.g(jj, k) +
                                                  alpha[static_cast<std::size_t>(jj)] * geo.g(i, k));
                    def_sq += d * d;
                    cov_sq += cov * cov;
                    contracted(i, jj) += cov * p.u[static_cast<std::size_t>(k)];
                }
        rep.definition_residual_max =
            std::max(rep.definition_residual_max,
                     std::sqrt(def_sq) / std::max(1.0, std::sqrt(cov_sq)));

        // contraction tie: the u^k contraction of the classical covariant
        // derivative equals the lowered dynamical covariant derivative. This
        // holds for every velocity-free symmetric tensor, compatible or not,
        // and certifies that the two derivative pipelines compute the same
        // object. (The full residuals only coincide on compatible tensors,
        // where both routes extract the same alpha.)
        const Mat nabj = nabla_tensor11(geo, j);
        const Mat lowered_nab = geo.g * nabj;
        double gap = 0.0;
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
                gap = std::max(gap, std::fabs(contracted(i, jj) - lowered_nab(i, jj)));
        rep.contraction_gap_max =
            std::max(rep.contraction_gap_max, gap / std::max(1.0, max_abs(lowered_nab)));
    }
    rep.verdict = rep.definition_residual_max <= tolerance;
    return rep;
}

double nijenhuis_residual(const TensorField& j, const std::vector<PhasePoint>& samples) {
    if (samples.empty()) throw ModelError("torsion check needs at least one sample point");
    require_u_free(j, "torsion check");
    const int n = j.dim();
    double worst = 0.0;
    for (const PhasePoint& p : samples) {
        Mat jval(n, 0.0);
        std::vector<Mat> dj;
        tensor_q_jets(j, p, jval, dj);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int i = 0; i < n; ++i) {
                    double t = 0.0;
                    for (int mi = 0; mi < n; ++mi)
                        t += jval(mi, a) * dj[static_cast<std::size_t>(mi)](i, b) -
                             jval(mi, b) * dj[static_cast<std::size_t>(mi)](i, a) -
                             jval(i, mi) * dj[static_cast<std::size_t>(a)](mi, b) +
                             jval(i, mi) * dj[static_cast<std::size_t>(b)](mi, a);
                    worst = std::max(worst, std::fabs(t));
                }
    }
    return worst;
}

}  // namespace finlab
