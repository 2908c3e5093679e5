#pragma once

#include <vector>

#include "finlab/geometry.hpp"
#include "finlab/linalg.hpp"
#include "finlab/tensor.hpp"

namespace finlab {

// the full chain of the recursive scheme over an arbitrary scalar ring S:
// k_j = 1/2 u^T g K^j u, a_j = tr(K^j)/j, the phi recursion, b = phi - a,
// h_l = k_l + sum_{i=1}^{l} b_i k_{l-i}, and B_l = b_l I + B_{l-1} K.
// S = long double is the production route; S = Jet yields phase-space
// gradients of every h_l in one sweep.
template <class S>
struct HierarchySeries {
    int n = 0;
    std::vector<S> k;                 // k[j], j = 0..n
    std::vector<S> a;                 // a[j], j = 1..n+1 (slot 0 is a zero placeholder)
    std::vector<S> phi;               // phi[j], j = 1..n+1 (slot 0 placeholder)
    std::vector<S> b;                 // b[j], j = 0..n+1, b[0] = 1
    std::vector<S> h;                 // h[l], l = 0..n
    std::vector<SquareMat<S>> big_b;  // B_0..B_n
};

// a/phi/b chain from power traces (traces[j] = tr K^j for j = 1..top, slot 0
// ignored); shared by the point evaluation and the pure-matrix adjugate
template <class S>
void scalar_chain(const std::vector<S>& traces, std::vector<S>& a, std::vector<S>& phi,
                  std::vector<S>& b) {
    const int top = static_cast<int>(traces.size()) - 1;
    const S zero = traces[1] * 0.0;
    const S one = zero + 1.0;
    a.assign(static_cast<std::size_t>(top) + 1, zero);
    phi.assign(static_cast<std::size_t>(top) + 1, zero);
    b.assign(static_cast<std::size_t>(top) + 1, zero);
    for (int j = 1; j <= top; ++j)
        a[static_cast<std::size_t>(j)] = traces[static_cast<std::size_t>(j)] / static_cast<double>(j);
    for (int k = 2; k <= top; ++k) {
        S s1 = zero;
        for (int i = 1; i < k; ++i)
            s1 = s1 + a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(k - i)];
        S s2 = zero;
        for (int i = 2; i < k; ++i)
            s2 = s2 + phi[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(k - i)] *
                          static_cast<double>(k - i);
        phi[static_cast<std::size_t>(k)] = s1 * 0.5 - s2 / static_cast<double>(k);
    }
    b[0] = one;
    for (int j = 1; j <= top; ++j)
        b[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)];
}

// a/phi/b/B for a bare matrix (no metric or velocity): everything the
// adjugate and characteristic polynomial need
template <class S>
HierarchySeries<S> matrix_series(const SquareMat<S>& kmat) {
    HierarchySeries<S> out;
    const int n = kmat.size();
    out.n = n;
    const S zero = kmat(0, 0) * 0.0;
    std::vector<S> traces(static_cast<std::size_t>(n) + 2, zero);
    SquareMat<S> p = SquareMat<S>::identity(n, zero);
    for (int j = 1; j <= n + 1; ++j) {
        p = p * kmat;
        traces[static_cast<std::size_t>(j)] = p.trace();
    }
    scalar_chain(traces, out.a, out.phi, out.b);
    out.big_b.reserve(static_cast<std::size_t>(n) + 1);
    out.big_b.push_back(SquareMat<S>::identity(n, zero));
    for (int l = 1; l <= n; ++l) {
        SquareMat<S> next = out.big_b.back() * kmat;
        next.add_diag(out.b[static_cast<std::size_t>(l)]);
        out.big_b.push_back(next);
    }
    return out;
}

template <class S>
HierarchySeries<S> hierarchy_series(const SquareMat<S>& kmat, const SquareMat<S>& g,
                                    const std::vector<S>& u) {
    HierarchySeries<S> out = matrix_series(kmat);
    const int n = out.n;
    const S zero = kmat(0, 0) * 0.0;
    auto quad = [&](const SquareMat<S>& m) {  // 1/2 u^T g (m u)
        const std::vector<S> w = g * (m * u);
        return dot(u, w) * 0.5;
    };
    out.k.assign(static_cast<std::size_t>(n) + 1, zero);
    out.k[0] = quad(SquareMat<S>::identity(n, zero));
    SquareMat<S> p = kmat;
    for (int j = 1; j <= n; ++j) {
        out.k[static_cast<std::size_t>(j)] = quad(p);
        if (j < n) p = p * kmat;
    }
    out.h.assign(static_cast<std::size_t>(n) + 1, zero);
    out.h[0] = out.k[0];
    for (int l = 1; l <= n; ++l) {
        S acc = out.k[static_cast<std::size_t>(l)];
        for (int i = 1; i <= l; ++i)
            acc = acc + out.b[static_cast<std::size_t>(i)] * out.k[static_cast<std::size_t>(l - i)];
        out.h[static_cast<std::size_t>(l)] = acc;
    }
    return out;
}

// double-facing results of the scheme at one phase point (internally computed
// in extended precision; the terminal identities cancel large magnitudes)
struct HierarchyValues {
    int n = 0;
    double energy = 0.0;
    std::vector<double> k, a, phi, b, h;  // indexed as in HierarchySeries
    std::vector<Mat> big_b;               // B_0..B_n
    Mat adjugate;                         // (-1)^(n-1) B_(n-1)
    double cofactor_integral = 0.0;       // u^T g A u
    double two_route_max = 0.0;           // h sum formula vs 1/2 u^T g B_l u
};

HierarchyValues hierarchy_at(const FinslerModel& m, const TensorField& kt, const PhasePoint& p);

// max over lambda in {-2..3} of |det(lambda I - K) - sum b_i lambda^(n-i)|,
// normalized by max(1, |det|); the determinant comes from an LU factorization,
// independent of the recursion that produced b
double charpoly_check(const Mat& kmat, const std::vector<double>& b);

Mat adjugate_at(const Mat& kmat);

// g(A T, T) with A the adjugate of K at p; checked against (-1)^(n-1) 2 h_(n-1)
double cofactor_integral_at(const FinslerModel& m, const TensorField& kt, const PhasePoint& p);

struct ShiftedFamilyReport {
    int shift_count = 0;
    double fit_residual_max = 0.0;          // adjugate(K+sI) vs fitted matrix polynomial
    double coefficient_residual_max = 0.0;  // A_(n-j) vs (-1)^j B_j
    double recursion_residual_max = 0.0;    // K A_(j+1) + A_j vs (-1)^(n-j) b_(n-j) I
    double tolerance = 0.0;
    bool verdict = false;
};

// adjugates of the shifted family K + sI, fitted as a matrix polynomial in s
// on the first n distinct shifts (exact Vandermonde solve) and checked against
// the B matrices of the recursion
ShiftedFamilyReport shifted_family_check(const FinslerModel& m, const TensorField& kt,
                                         const PhasePoint& p, const std::vector<double>& s_values,
                                         double tolerance = 1e-9);

}  // namespace finlab
