#include "finlab/hierarchy.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "finlab/errors.hpp"

namespace finlab {

namespace {

using LMat = SquareMat<long double>;

LMat to_long(const Mat& m) {
    LMat out(m.size(), 0.0L);
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) out(i, j) = m(i, j);
    return out;
}

Mat to_double(const LMat& m) {
    Mat out(m.size(), 0.0);
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) out(i, j) = static_cast<double>(m(i, j));
    return out;
}

std::vector<double> to_double(const std::vector<long double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
}

}  // namespace

HierarchyValues hierarchy_at(const FinslerModel& m, const TensorField& kt, const PhasePoint& p) {
    if (kt.dim() != m.dim)
        throw ModelError("tensor dimension " + std::to_string(kt.dim()) +
                         " does not match the model dimension " + std::to_string(m.dim));
    const SprayData sd = spray_at(m, p);
    const int n = m.dim;

    const LMat kl = to_long(kt.values_at(p));
    const LMat gl = to_long(sd.g);
    const std::vector<long double> ul(p.u.begin(), p.u.end());

    const HierarchySeries<long double> series = hierarchy_series(kl, gl, ul);

    HierarchyValues out;
    out.n = n;
    out.energy = sd.energy;
    out.k = to_double(series.k);
    out.a = to_double(series.a);
    out.phi = to_double(series.phi);
    out.b = to_double(series.b);
    out.h = to_double(series.h);
    out.big_b.reserve(series.big_b.size());
    for (const LMat& bl : series.big_b) out.big_b.push_back(to_double(bl));

    long double worst = 0.0L;
    for (int l = 0; l <= n; ++l) {
        const std::vector<long double> w = gl * (series.big_b[static_cast<std::size_t>(l)] * ul);
        const long double route2 = dot(ul, w) * 0.5;
        const long double hl = series.h[static_cast<std::size_t>(l)];
        const long double diff = std::fabs(hl - route2) / std::fmax(1.0L, std::fabs(hl));
        if (diff > worst) worst = diff;
    }
    out.two_route_max = static_cast<double>(worst);
    if (out.two_route_max > 1e-12)
        throw ModelError("conserved-quantity routes disagree: sum formula vs matrix form differ by " +
                         std::to_string(out.two_route_max));

    const double sign = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^(n-1)
    LMat al = series.big_b[static_cast<std::size_t>(n - 1)];
    out.adjugate = to_double(al) * sign;
    const std::vector<long double> av = gl * (al * ul);
    out.cofactor_integral = static_cast<double>(dot(ul, av)) * sign;
    return out;
}

double charpoly_check(const Mat& kmat, const std::vector<double>& b) {
    const int n = kmat.size();
    if (static_cast<int>(b.size()) < n + 1)
        throw ModelError("characteristic check needs coefficients b_0..b_n");
    static const double lambdas[] = {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
    double worst = 0.0;
    for (const double lam : lambdas) {
        Mat shifted = kmat * (-1.0);
        shifted.add_diag(lam);
        const double det = lu_factor(shifted).det();
        double poly = 0.0;
        for (int i = 0; i <= n; ++i)
            poly += b[static_cast<std::size_t>(i)] * std::pow(lam, static_cast<double>(n - i));
        const double gap = std::fabs(det - poly) / std::fmax(1.0, std::fabs(det));
        if (gap > worst) worst = gap;
    }
    return worst;
}

Mat adjugate_at(const Mat& kmat) {
    const int n = kmat.size();
    const HierarchySeries<long double> series = matrix_series(to_long(kmat));
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
    return to_double(series.big_b[static_cast<std::size_t>(n - 1)]) * sign;
}

double cofactor_integral_at(const FinslerModel& m, const TensorField& kt, const PhasePoint& p) {
    const HierarchyValues hv = hierarchy_at(m, kt, p);
    const double sign = (hv.n % 2 == 0) ? -1.0 : 1.0;
    const double expect = sign * 2.0 * hv.h[static_cast<std::size_t>(hv.n - 1)];
    const double gap = std::fabs(hv.cofactor_integral - expect) / std::fmax(1.0, std::fabs(expect));
    if (gap > 1e-10)
        throw ModelError("cofactor quadratic form disagrees with 2 h_(n-1) by " + std::to_string(gap));
    return hv.cofactor_integral;
}

ShiftedFamilyReport shifted_family_check(const FinslerModel& m, const TensorField& kt,
                                         const PhasePoint& p, const std::vector<double>& s_values,
                                         double tolerance) {
    const int n = m.dim;
    std::vector<double> distinct;
    for (const double s : s_values) {
        bool seen = false;
        for (const double d : distinct)
            if (d == s) seen = true;
        if (!seen) distinct.push_back(s);
        if (static_cast<int>(distinct.size()) == n) break;
    }
    if (static_cast<int>(distinct.size()) < n)
        throw ModelError("shifted-family fit needs at least " + std::to_string(n) +
                         " distinct shift values");

    const HierarchyValues hv = hierarchy_at(m, kt, p);
    const Mat kval = kt.values_at(p);

    auto adj_of_shift = [&](double s) {
        Mat shifted = kval;
        shifted.add_diag(s);
        return adjugate_at(shifted);
    };

    // fit adjugate(K + sI) = sum_{c=0}^{n-1} A_{c+1} s^c entrywise on the
    // first n distinct shifts
    Mat vand(n, 0.0);
    for (int r = 0; r < n; ++r) {
        double power = 1.0;
        for (int c = 0; c < n; ++c) {
            vand(r, c) = power;
            power *= distinct[static_cast<std::size_t>(r)];
        }
    }
    const Lu vlu = lu_factor(vand);
    if (vlu.singular) throw ModelError("shift values give a singular fit system");

    std::vector<Mat> fit_adj;
    fit_adj.reserve(distinct.size());
    for (const double s : distinct) fit_adj.push_back(adj_of_shift(s));

    std::vector<Mat> coeff(static_cast<std::size_t>(n), Mat(n, 0.0));  // coeff[c] = A_{c+1}
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec rhs(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) rhs[static_cast<std::size_t>(r)] = fit_adj[static_cast<std::size_t>(r)](i, j);
            const Vec sol = vlu.solve(rhs);
            for (int c = 0; c < n; ++c) coeff[static_cast<std::size_t>(c)](i, j) = sol[static_cast<std::size_t>(c)];
        }

    ShiftedFamilyReport rep;
    rep.shift_count = static_cast<int>(s_values.size());
    rep.tolerance = tolerance;

    for (const double s : s_values) {
        const Mat actual = adj_of_shift(s);
        Mat predicted(n, 0.0);
        double power = 1.0;
        for (int c = 0; c < n; ++c) {
            predicted = predicted + coeff[static_cast<std::size_t>(c)] * power;
            power *= s;
        }
        const double gap = max_abs(actual - predicted);
        if (gap > rep.fit_residual_max) rep.fit_residual_max = gap;
    }

    // A_{n-j} = (-1)^j B_j for j = 0..n-1
    for (int j = 0; j < n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const Mat expect = hv.big_b[static_cast<std::size_t>(j)] * sign;
        const Mat& got = coeff[static_cast<std::size_t>(n - j - 1)];  // A_{n-j}
        const double gap = max_abs(got - expect);
        if (gap > rep.coefficient_residual_max) rep.coefficient_residual_max = gap;
    }

    // K A_{j+1} + A_j = (-1)^(n-j) b_{n-j} I for j = 1..n-1
    for (int j = 1; j < n; ++j) {
        const double sign = ((n - j) % 2 == 0) ? 1.0 : -1.0;
        Mat lhs = kval * coeff[static_cast<std::size_t>(j)] + coeff[static_cast<std::size_t>(j - 1)];
        lhs.add_diag(-sign * hv.b[static_cast<std::size_t>(n - j)]);
        const double gap = max_abs(lhs);
        if (gap > rep.recursion_residual_max) rep.recursion_residual_max = gap;
    }

    rep.verdict = rep.fit_residual_max <= tolerance && rep.coefficient_residual_max <= tolerance &&
                  rep.recursion_residual_max <= tolerance;
    return rep;
}

}  // namespace finlab
