#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "finlab/errors.hpp"

namespace finlab {

// point of the slit tangent bundle: base coordinates q and fibre coordinates u
struct PhasePoint {
    std::vector<double> q, u;

    int dim() const { return static_cast<int>(q.size()); }

    double u_norm() const {
        double s = 0.0;
        for (double v : u) s += v * v;
        return std::sqrt(s);
    }
};

// coordinate ids used in derivative requests: 0..n-1 are q1..qn, n..2n-1 are u1..un
inline int q_coord(int i) { return i - 1; }
inline int u_coord(int i, int n) { return n + i - 1; }

struct Interval {
    double lo = -2.0, hi = 2.0;
};

// seeded uniform sampling spec; a box with a single interval broadcasts to every axis
struct SampleSpec {
    int count = 64;
    std::uint64_t seed = 1;
    std::vector<Interval> q_box{Interval{}};
    std::vector<Interval> u_box{Interval{}};
    double u_min_norm = 0.1;
};

// uniform draws from the boxes, rejecting fibre vectors with |u| < u_min_norm
std::vector<PhasePoint> sample_phase_points(const SampleSpec& spec, int dim);

}  // namespace finlab
