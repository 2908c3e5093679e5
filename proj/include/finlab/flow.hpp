#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "finlab/expr.hpp"
#include "finlab/geometry.hpp"
#include "finlab/jet.hpp"
#include "finlab/linalg.hpp"
#include "finlab/phase.hpp"
#include "finlab/tensor.hpp"

namespace finlab {

struct FlowPolicy {
    double t_end = 10.0;
    double step = 1e-3;             // fixed step (rk4) or initial step (dopri)
    std::string method = "rk4";     // "rk4" | "dopri"
    double adaptive_tol = 1e-10;    // dopri local error bound per step
};

struct Trajectory {
    std::vector<double> times;       // increasing, from 0 to t_end
    std::vector<PhasePoint> states;  // same length as times
    std::string method;
    long long steps_taken = 0;
    long long steps_rejected = 0;  // dopri only
    double step_min = 0.0;
    double step_max = 0.0;
};

// numerical solution of q' = u, u' = F(q,u); every intermediate evaluation
// revalidates the slit guard and the metric, so an integrator blow-up toward
// u = 0 (impossible for the exact flow) surfaces as an error
Trajectory integrate_geodesic(const FinslerModel& m, const PhasePoint& p0,
                              const FlowPolicy& policy);

struct DriftReport {
    int n = 0;
    std::vector<std::string> labels;     // h_0..h_(n-1), cofactor, E
    std::vector<double> initial;         // value at the first state
    std::vector<double> drift_abs;       // max |value - initial| along the flow
    std::vector<double> drift_relative;  // drift_abs / max(1, |initial|)
    double worst = 0.0;                  // max of drift_relative
    double tolerance = 0.0;
    bool verdict = false;
};

// conservation of h_0..h_(n-1), the cofactor quadratic form, and the energy
// along a stored trajectory
DriftReport drift_report(const FinslerModel& m, const TensorField& kt, const Trajectory& traj,
                         double tolerance = 1e-8);

// columns: t, q1..qn, u1..un, h_0..h_(n-1), cofactor, E
void write_trajectory_csv(const FinslerModel& m, const TensorField& kt, const Trajectory& traj,
                          std::ostream& out);

struct DerivativeFlowReport {
    int n = 0;
    int center_count = 0;          // stencil centers used
    std::vector<double> a_gap;     // per j = 1..n (slot 0 unused)
    std::vector<double> k_gap;     // per j = 1..n (slot 0 unused)
    double a_gap_max = 0.0;
    double k_gap_max = 0.0;
    double tolerance = 0.0;
    bool verdict = false;
};

// along-flow derivatives of a_j and k_j by 4th-order central differences on
// the stored states, against their closed forms: d(a_j)/dt = alpha(K^(j-1) u)
// and d(k_j)/dt = sum_{i=1}^{j} (d(a_i)/dt) k_{j-i}; gaps are normalized by
// max(1, |closed form|)
DerivativeFlowReport along_flow_derivative_check(const FinslerModel& m, const TensorField& kt,
                                                 const Trajectory& traj, double tolerance = 1e-6);

// matrix of the symplectic form in the (q, u) coordinate basis, 2n x 2n
Mat symplectic_form(const PointGeometry& geo);

// {f, h} with the Hamiltonian vector solved from the symplectic form; the
// orientation is fixed so that {E, f} is the derivative of f along the flow
double symplectic_bracket(const FinslerModel& m, const Expression& f, const Expression& h,
                          const PhasePoint& p);

// first-order jets of h_0..h_n in the 2n phase variables at p
std::vector<Jet> hierarchy_jets(const FinslerModel& m, const TensorField& kt, const PhasePoint& p);

struct InvolutivityTable {
    int n = 0;
    int sample_count = 0;
    Mat magnitudes;                 // (i,j) = max over samples of |{h_i, h_j}|
    double antisymmetry_max = 0.0;  // max |{h_i,h_j} + {h_j,h_i}| / max(1, |{h_i,h_j}|)
};

// pairwise bracket magnitudes of the conserved quantities; reported only,
// never turned into a verdict
InvolutivityTable involutivity_probe(const FinslerModel& m, const TensorField& kt,
                                     const std::vector<PhasePoint>& samples);

}  // namespace finlab
