#pragma once

#include <span>
#include <vector>

#include "finlab/expr.hpp"
#include "finlab/jet.hpp"
#include "finlab/phase.hpp"

namespace finlab {

// plain value of e at p
double evaluate(const Expression& e, const PhasePoint& p);

// full truncated Taylor expansion of e at p over the 2n phase coordinates
// (q1..qn first, then u1..un); order must be 0..3
Jet evaluate_jet(const Expression& e, const PhasePoint& p, int order);

// mixed partial derivative of e at p; coords lists one phase-coordinate id
// (see q_coord/u_coord) per differentiation, up to third order
double derive(const Expression& e, const PhasePoint& p, std::span<const int> coords);

struct CrossCheck {
    double ad = 0.0;
    double fd = 0.0;
};

// validate one automatic derivative against a single central difference:
// the first coordinate in coords is differenced with the given step, and the
// difference quotient is taken of the automatic derivative with respect to
// the remaining coordinates (of the plain value when only one is listed)
CrossCheck fd_crosscheck(const Expression& e, const PhasePoint& p, std::span<const int> coords,
                         double step = 1e-5);

}  // namespace finlab
