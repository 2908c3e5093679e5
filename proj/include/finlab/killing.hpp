#pragma once

#include <vector>

#include "finlab/geometry.hpp"
#include "finlab/phase.hpp"
#include "finlab/tensor.hpp"

namespace finlab {

// the unique one-form compatible with the fundamental condition on K, obtained
// by contracting the lowered condition equation with the velocity:
//   alpha_j = (theta_i (nabla K)^i_j - 1/2 (nabla tr K) theta_j) / E
std::vector<double> extract_alpha(const PointGeometry& geo, const TensorField& k);
std::vector<double> extract_alpha(const FinslerModel& m, const TensorField& k,
                                  const PhasePoint& p);

struct ConditionReport {
    int dim = 0;
    int sample_count = 0;
    double residual_max = 0.0;        // normalized residual of the condition equation
    double symmetry_max = 0.0;        // normalized asymmetry of the lowered tensor g K
    double trace_identity_max = 0.0;  // normalized |alpha(T) - nabla tr K|
    double tolerance = 0.0;
    bool verdict = false;  // all three maxima within tolerance
    int max_u_degree = 0;  // informational: entrywise u-degree, -1 if not polynomial
    std::vector<std::vector<double>> alpha_samples;  // one covector per sample
};

// decide whether K satisfies  (nabla K)^i_j = 1/2 (u^i alpha_j + g^{ik} alpha_k theta_j)
// for the extracted alpha; residuals are Frobenius norms normalized by
// max(1, |nabla K|_F) per point
ConditionReport condition_residual(const FinslerModel& m, const TensorField& k,
                                   const std::vector<PhasePoint>& samples,
                                   double tolerance = 1e-8);

struct RiemannReport {
    int sample_count = 0;
    double definition_residual_max = 0.0;  // J_{ij|k} - 1/2(alpha_i g_jk + alpha_j g_ik)
    double contraction_gap_max = 0.0;      // u^k J_{ij|k} vs the lowered dynamical derivative
    double tolerance = 0.0;
    bool verdict = false;  // definition residual within tolerance
};

// classical Riemannian route: Christoffel symbols from the u-free metric,
// covariant derivative of the lowered J, alpha = d(tr J). Requires E quadratic
// in u and J free of u. Also reports how far the u-contraction of the
// classical covariant derivative sits from the lowered dynamical covariant
// derivative; the two coincide identically for every velocity-free tensor,
// which ties the two formulations together.
RiemannReport riemannian_sckt_residual(const FinslerModel& m, const TensorField& j,
                                       const std::vector<PhasePoint>& samples,
                                       double tolerance = 1e-8);

// max component of the Nijenhuis torsion of a u-free (1,1) tensor over the
// samples; built from first q-derivatives of the entries
double nijenhuis_residual(const TensorField& j, const std::vector<PhasePoint>& samples);

}  // namespace finlab
