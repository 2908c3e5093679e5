#pragma once

#include <string_view>
#include <vector>

#include "finlab/autodiff.hpp"
#include "finlab/expr.hpp"
#include "finlab/linalg.hpp"
#include "finlab/phase.hpp"
#include "finlab/tensor.hpp"

namespace finlab {

// a Finsler (or Riemannian) structure given by its energy function,
// 2-homogeneous in the u-coordinates, defined away from u = 0
struct FinslerModel {
    int dim = 0;
    Expression energy;
    double u_min_norm = 1e-6;  // slit guard: evaluation requires |u| >= this
};

FinslerModel make_model(int dim, std::string_view energy_text, double u_min_norm = 1e-6);

// metric and spray only (second-order data); this is the integration hot path
struct SprayData {
    double energy = 0.0;
    Mat g;
    std::vector<double> spray;  // F^i, the geodesic acceleration
};

// full pointwise geometry from a third-order expansion of the energy
struct PointGeometry {
    int n = 0;
    PhasePoint point;
    double energy = 0.0;
    std::vector<double> de_dq, de_du;  // first partials of the energy
    std::vector<double> theta;         // theta_i = g_ij u^j
    Mat g, g_inv;
    double g_det = 0.0, g_cond = 0.0;
    Mat e_uq;                // (i,k) = d2 E / du^i dq^k
    std::vector<Mat> dg_dq;  // dg_dq[k](i,j) = d g_ij / dq^k
    std::vector<Mat> dg_du;  // dg_du[k](i,j) = d g_ij / du^k
    std::vector<double> spray;  // F^i
    Mat gamma;                  // connection coefficients, gamma(i,j) = -1/2 dF^i/du^j
};

SprayData spray_at(const FinslerModel& m, const PhasePoint& p);
PointGeometry geometry_at(const FinslerModel& m, const PhasePoint& p);

Mat metric_at(const FinslerModel& m, const PhasePoint& p);
Mat connection_at(const FinslerModel& m, const PhasePoint& p);

// dynamical covariant derivative along the spray:
//   scalars        nabla f   = u^k df/dq^k + F^k df/du^k
//   (1,1) tensors  (nabla K)^i_j = nabla(K^i_j) + gamma^i_m K^m_j - K^i_m gamma^m_j
double nabla_scalar(const PointGeometry& geo, const Expression& f);
Mat nabla_tensor11(const PointGeometry& geo, const TensorField& k);

// residuals of the structural identities that hold for every 2-homogeneous
// energy: nabla E = nabla T = nabla g = nabla theta = 0, the horizontal
// differential of E vanishes, and the Euler relation theta(u) = 2E
struct CanonicalReport {
    double nabla_e_max = 0.0;
    double nabla_t_max = 0.0;
    double nabla_g_max = 0.0;
    double nabla_theta_max = 0.0;
    double dh_e_max = 0.0;
    double euler_max = 0.0;
    double worst() const;
};

CanonicalReport canonical_checks(const FinslerModel& m, const std::vector<PhasePoint>& points);

}  // namespace finlab
