#include "finlab/autodiff.hpp"

#include <stdexcept>
#include <string>

namespace finlab {

namespace {

void check_coords(std::span<const int> coords, int dim) {
    if (coords.empty() || coords.size() > 3)
        throw std::invalid_argument("derivative order must be 1, 2 or 3");
    for (int c : coords)
        if (c < 0 || c >= 2 * dim)
            throw std::invalid_argument("phase coordinate id " + std::to_string(c) +
                                        " out of range for dimension " + std::to_string(dim));
}

void check_point(const Expression& e, const PhasePoint& p) {
    if (e.dim() != p.dim())
        throw std::invalid_argument("expression dimension " + std::to_string(e.dim()) +
                                    " does not match point dimension " + std::to_string(p.dim()));
}

}  // namespace

double evaluate(const Expression& e, const PhasePoint& p) {
    check_point(e, p);
    return e.eval<double>(p.q, p.u);
}

Jet evaluate_jet(const Expression& e, const PhasePoint& p, int order) {
    check_point(e, p);
    const int n = p.dim();
    const JetSpace& space = JetSpace::get(2 * n, order);
    std::vector<Jet> vars;
    vars.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(space, i, p.q[static_cast<std::size_t>(i)]));
    for (int i = 0; i < n; ++i)
        vars.push_back(Jet::variable(space, n + i, p.u[static_cast<std::size_t>(i)]));
    return e.eval<Jet>(std::span<const Jet>(vars.data(), static_cast<std::size_t>(n)),
                       std::span<const Jet>(vars.data() + n, static_cast<std::size_t>(n)));
}

double derive(const Expression& e, const PhasePoint& p, std::span<const int> coords) {
    check_coords(coords, p.dim());
    return evaluate_jet(e, p, static_cast<int>(coords.size())).partial(coords);
}

CrossCheck fd_crosscheck(const Expression& e, const PhasePoint& p, std::span<const int> coords,
                         double step) {
    check_coords(coords, p.dim());
    check_point(e, p);
    if (step <= 0.0) throw std::invalid_argument("finite-difference step must be positive");

    CrossCheck out;
    out.ad = derive(e, p, coords);

    const int bumped = coords[0];
    const std::span<const int> rest = coords.subspan(1);
    auto shifted = [&](double offset) {
        PhasePoint s = p;
        const int n = s.dim();
        if (bumped < n)
            s.q[static_cast<std::size_t>(bumped)] += offset;
        else
            s.u[static_cast<std::size_t>(bumped - n)] += offset;
        return rest.empty() ? evaluate(e, s) : derive(e, s, rest);
    };
    out.fd = (shifted(step) - shifted(-step)) / (2.0 * step);
    return out;
}

}  // namespace finlab
