#include "finlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "finlab/errors.hpp"

namespace finlab {

namespace {

std::string point_str(const PhasePoint& p) {
    auto join = [](const std::vector<double>& v) {
        std::string s = "[";
        char buf[32];
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.6g", v[i]);
            if (i) s += ',';
            s += buf;
        }
        return s + "]";
    };
    return "q=" + join(p.q) + ", u=" + join(p.u);
}

void check_point(const FinslerModel& m, const PhasePoint& p) {
    if (p.dim() != m.dim)
        throw ModelError("point dimension " + std::to_string(p.dim()) +
                         " does not match model dimension " + std::to_string(m.dim));
    if (p.u_norm() < m.u_min_norm) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", p.u_norm());
        char guard[64];
        std::snprintf(guard, sizeof guard, "%.6g", m.u_min_norm);
        throw ModelError(std::string("velocity norm ") + buf + " is below the slit guard " +
                         guard + " at " + point_str(p));
    }
}

// factor the metric, rejecting degenerate or ill-conditioned values; the
// degeneracy scale is the product of row maxima, a cheap stand-in for the
// largest possible determinant magnitude
Lu factor_metric(const Mat& g, const PhasePoint& p) {
    const int n = g.size();
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row = std::max(row, std::fabs(g(i, j)));
        scale *= row;
    }
    Lu f = lu_factor(g);
    if (f.singular || scale == 0.0 || std::fabs(f.det()) < 1e-14 * scale)
        throw ModelError("metric tensor is degenerate at " + point_str(p));
    const double cond = norm1(g) * norm1(f.inverse());
    if (!(cond <= 1e12)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g", cond);
        throw ModelError(std::string("metric tensor is ill-conditioned (cond ~ ") + buf +
                         ") at " + point_str(p));
    }
    return f;
}

}  // namespace

FinslerModel make_model(int dim, std::string_view energy_text, double u_min_norm) {
    if (dim < 1 || dim > 8)
        throw ModelError("dimension must be between 1 and 8, got " + std::to_string(dim));
    if (!(u_min_norm > 0.0)) throw ModelError("slit guard u_min_norm must be positive");
    FinslerModel m;
    m.dim = dim;
    m.energy = Expression::parse(energy_text, dim);
    m.u_min_norm = u_min_norm;
    return m;
}

SprayData spray_at(const FinslerModel& m, const PhasePoint& p) {
    check_point(m, p);
    const int n = m.dim;
    const Jet E = evaluate_jet(m.energy, p, 2);
    auto P1 = [&](int a) {
        const int c[1] = {a};
        return E.partial(std::span<const int>(c, 1));
    };
    auto P2 = [&](int a, int b) {
        const int c[2] = {a, b};
        return E.partial(std::span<const int>(c, 2));
    };

    SprayData out;
    out.energy = E.value();
    out.g = Mat(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out.g(i, j) = out.g(j, i) = P2(n + i, n + j);

    const Lu f = factor_metric(out.g, p);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double r = P1(i);
        for (int k = 0; k < n; ++k) r -= P2(n + i, k) * p.u[static_cast<std::size_t>(k)];
        rhs[static_cast<std::size_t>(i)] = r;
    }
    out.spray = f.solve(rhs);
    return out;
}

PointGeometry geometry_at(const FinslerModel& m, const PhasePoint& p) {
    check_point(m, p);
    const int n = m.dim;
    const Jet E = evaluate_jet(m.energy, p, 3);
    auto P1 = [&](int a) {
        const int c[1] = {a};
        return E.partial(std::span<const int>(c, 1));
    };
    auto P2 = [&](int a, int b) {
        const int c[2] = {a, b};
        return E.partial(std::span<const int>(c, 2));
    };
    auto P3 = [&](int a, int b, int c3) {
        const int c[3] = {a, b, c3};
        return E.partial(std::span<const int>(c, 3));
    };

    PointGeometry geo;
    geo.n = n;
    geo.point = p;
    geo.energy = E.value();
    geo.de_dq.resize(static_cast<std::size_t>(n));
    geo.de_du.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        geo.de_dq[static_cast<std::size_t>(i)] = P1(i);
        geo.de_du[static_cast<std::size_t>(i)] = P1(n + i);
    }

    geo.g = Mat(n, 0.0);
    geo.e_uq = Mat(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) geo.g(i, j) = geo.g(j, i) = P2(n + i, n + j);
        for (int k = 0; k < n; ++k) geo.e_uq(i, k) = P2(n + i, k);
    }

    geo.dg_dq.assign(static_cast<std::size_t>(n), Mat(n, 0.0));
    geo.dg_du.assign(static_cast<std::size_t>(n), Mat(n, 0.0));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Mat& dq = geo.dg_dq[static_cast<std::size_t>(k)];
                Mat& du = geo.dg_du[static_cast<std::size_t>(k)];
                dq(i, j) = dq(j, i) = P3(n + i, n + j, k);
                du(i, j) = du(j, i) = P3(n + i, n + j, n + k);
            }

    const Lu f = factor_metric(geo.g, p);
    geo.g_det = f.det();
    geo.g_inv = f.inverse();
    geo.g_cond = norm1(geo.g) * norm1(geo.g_inv);

    geo.theta.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double t = 0.0;
        for (int j = 0; j < n; ++j) t += geo.g(i, j) * p.u[static_cast<std::size_t>(j)];
        geo.theta[static_cast<std::size_t>(i)] = t;
    }

    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double r = geo.de_dq[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) r -= geo.e_uq(i, k) * p.u[static_cast<std::size_t>(k)];
        rhs[static_cast<std::size_t>(i)] = r;
    }
    geo.spray = f.solve(rhs);

    // implicit differentiation of g_ij F^j = rhs_i with respect to u^l:
    //   g_ij dF^j/du^l = E_{q_i u_l} - E_{u_i q_l} - E_{u_i q_k u_l} u^k - dg_ij/du^l F^j
    geo.gamma = Mat(n, 0.0);
    for (int l = 0; l < n; ++l) {
        std::vector<double> col(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double b = geo.e_uq(l, i) - geo.e_uq(i, l);
            for (int k = 0; k < n; ++k) b -= P3(n + i, k, n + l) * p.u[static_cast<std::size_t>(k)];
            const Mat& du = geo.dg_du[static_cast<std::size_t>(l)];
            for (int j = 0; j < n; ++j) b -= du(i, j) * geo.spray[static_cast<std::size_t>(j)];
            col[static_cast<std::size_t>(i)] = b;
        }
        col = f.solve(col);
        for (int i = 0; i < n; ++i) geo.gamma(i, l) = -0.5 * col[static_cast<std::size_t>(i)];
    }
    return geo;
}

Mat metric_at(const FinslerModel& m, const PhasePoint& p) { return spray_at(m, p).g; }

Mat connection_at(const FinslerModel& m, const PhasePoint& p) { return geometry_at(m, p).gamma; }

double nabla_scalar(const PointGeometry& geo, const Expression& f) {
    const Jet j = evaluate_jet(f, geo.point, 1);
    const int n = geo.n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const int cq[1] = {k}, cu[1] = {n + k};
        acc += geo.point.u[static_cast<std::size_t>(k)] * j.partial(std::span<const int>(cq, 1));
        acc += geo.spray[static_cast<std::size_t>(k)] * j.partial(std::span<const int>(cu, 1));
    }
    return acc;
}

Mat nabla_tensor11(const PointGeometry& geo, const TensorField& k) {
    if (k.dim() != geo.n)
        throw ModelError("tensor dimension " + std::to_string(k.dim()) +
                         " does not match model dimension " + std::to_string(geo.n));
    const int n = geo.n;
    const Mat kval = k.values_at(geo.point);
    Mat out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = nabla_scalar(geo, k.at(i, j));
            for (int m2 = 0; m2 < n; ++m2)
                v += geo.gamma(i, m2) * kval(m2, j) - kval(i, m2) * geo.gamma(m2, j);
            out(i, j) = v;
        }
    return out;
}

double CanonicalReport::worst() const {
    return std::max({nabla_e_max, nabla_t_max, nabla_g_max, nabla_theta_max, dh_e_max, euler_max});
}

CanonicalReport canonical_checks(const FinslerModel& m, const std::vector<PhasePoint>& points) {
    CanonicalReport rep;
    const int n = m.dim;
    for (const PhasePoint& p : points) {
        const PointGeometry geo = geometry_at(m, p);
        const auto& u = p.u;

        double nab_e = 0.0;
        for (int k = 0; k < n; ++k)
            nab_e += u[static_cast<std::size_t>(k)] * geo.de_dq[static_cast<std::size_t>(k)] +
                     geo.spray[static_cast<std::size_t>(k)] * geo.de_du[static_cast<std::size_t>(k)];
        rep.nabla_e_max = std::max(rep.nabla_e_max, std::fabs(nab_e));

        for (int i = 0; i < n; ++i) {
            double t = geo.spray[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) t += geo.gamma(i, j) * u[static_cast<std::size_t>(j)];
            rep.nabla_t_max = std::max(rep.nabla_t_max, std::fabs(t));
        }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                for (int k = 0; k < n; ++k)
                    v += u[static_cast<std::size_t>(k)] * geo.dg_dq[static_cast<std::size_t>(k)](i, j) +
                         geo.spray[static_cast<std::size_t>(k)] *
                             geo.dg_du[static_cast<std::size_t>(k)](i, j);
                for (int k = 0; k < n; ++k)
                    v -= geo.gamma(k, i) * geo.g(k, j) + geo.g(i, k) * geo.gamma(k, j);
                rep.nabla_g_max = std::max(rep.nabla_g_max, std::fabs(v));
            }

        for (int i = 0; i < n; ++i) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) {
                double dth_q = 0.0, dth_u = 0.0;
                for (int j = 0; j < n; ++j) {
                    dth_q += geo.dg_dq[static_cast<std::size_t>(k)](i, j) * u[static_cast<std::size_t>(j)];
                    dth_u += geo.dg_du[static_cast<std::size_t>(k)](i, j) * u[static_cast<std::size_t>(j)];
                }
                dth_u += geo.g(i, k);
                v += u[static_cast<std::size_t>(k)] * dth_q +
                     geo.spray[static_cast<std::size_t>(k)] * dth_u;
            }
            for (int k = 0; k < n; ++k) v -= geo.gamma(k, i) * geo.theta[static_cast<std::size_t>(k)];
            rep.nabla_theta_max = std::max(rep.nabla_theta_max, std::fabs(v));
        }

        for (int i = 0; i < n; ++i) {
            double v = geo.de_dq[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                v -= geo.gamma(j, i) * geo.de_du[static_cast<std::size_t>(j)];
            rep.dh_e_max = std::max(rep.dh_e_max, std::fabs(v));
        }

        double euler = -2.0 * geo.energy;
        for (int i = 0; i < n; ++i)
            euler += geo.theta[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
        rep.euler_max = std::max(rep.euler_max, std::fabs(euler));
    }
    return rep;
}

}  // namespace finlab
