#include "finlab/phase.hpp"

#include <random>

namespace finlab {

namespace {

// uniform in [0,1) from the top 53 bits; avoids std::uniform_real_distribution,
// whose output sequence is implementation-defined
double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

double draw_in(std::mt19937_64& rng, const Interval& iv) {
    return iv.lo + (iv.hi - iv.lo) * unit_draw(rng);
}

const Interval& axis(const std::vector<Interval>& box, int i) {
    return box.size() == 1 ? box[0] : box[static_cast<std::size_t>(i)];
}

}  // namespace

std::vector<PhasePoint> sample_phase_points(const SampleSpec& spec, int dim) {
    if (dim < 1) throw ModelError("sampling needs dimension >= 1");
    if (spec.count < 1) throw ConfigError("sample count must be >= 1");
    auto check_box = [&](const std::vector<Interval>& box, const char* name) {
        if (box.size() != 1 && box.size() != static_cast<std::size_t>(dim))
            throw ConfigError(std::string(name) + " must have 1 or dim intervals");
        for (const Interval& iv : box)
            if (!(iv.lo < iv.hi)) throw ConfigError(std::string("degenerate interval in ") + name);
    };
    check_box(spec.q_box, "q_box");
    check_box(spec.u_box, "u_box");

    std::mt19937_64 rng(spec.seed);
    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (int s = 0; s < spec.count; ++s) {
        PhasePoint p;
        p.q.resize(static_cast<std::size_t>(dim));
        p.u.resize(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) p.q[static_cast<std::size_t>(i)] = draw_in(rng, axis(spec.q_box, i));
        int tries = 0;
        for (;;) {
            for (int i = 0; i < dim; ++i) p.u[static_cast<std::size_t>(i)] = draw_in(rng, axis(spec.u_box, i));
            if (p.u_norm() >= spec.u_min_norm) break;
            if (++tries > 1000)
                throw ConfigError("u_box is too small for u_min_norm: rejection sampling stalled");
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace finlab
