// Acceptance harness: one pass/fail line per criterion, tolerances pinned
// below. Exit code 0 only when every criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "finlab/autodiff.hpp"
#include "finlab/flow.hpp"
#include "finlab/geometry.hpp"
#include "finlab/hierarchy.hpp"
#include "finlab/killing.hpp"
#include "finlab/linalg.hpp"
#include "finlab/phase.hpp"
#include "finlab/scenario.hpp"
#include "finlab/tensor.hpp"

namespace {

using namespace finlab;

constexpr double kTolCondition = 1e-8;       // residual bound for compatible tensors
constexpr double kBadConditionFloor = 1e-3;  // incompatible tensors must exceed this
constexpr double kTolBinomialRel = 1e-12;    // scaled-identity ladder, relative
constexpr double kTolTerminalB = 1e-10;      // |B_n|
constexpr double kTolTerminalBNext = 1e-12;  // |b_(n+1)|
constexpr double kTolTerminalH = 1e-10;      // |h_n|
constexpr double kTolCharpoly = 1e-10;
constexpr double kTolCofactor = 1e-10;
constexpr double kTolAdjugate = 1e-10;
constexpr double kTolDrift = 1e-9;           // relative drift of conserved quantities
constexpr double kBadDriftFloor = 1e-3;
constexpr double kTolContraction = 1e-10;    // tie between the two formulations
constexpr double kTolCanonical = 1e-8;
constexpr double kTolAlongFlow = 1e-6;
constexpr double kBadAlongFlowFloor = 1e-3;
constexpr double kTolCrossCheck = 1e-6;      // |ad - fd| / max(1, |ad|)
constexpr double kMinOrderRatio = 12.0;      // drift contraction on halving an rk4 step
constexpr double kTolBracketRow = 1e-8;      // |{h_0, h_j}|
constexpr double kTolAntisymmetry = 1e-12;
constexpr double kTolShiftAlpha = 1e-10;     // alpha must not react to a shift
constexpr double kTolShiftFamily = 1e-9;

int g_failed = 0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void line(int idx, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, what.c_str(),
                detail.c_str());
    if (!ok) ++g_failed;
}

template <class F>
void criterion(int idx, const std::string& what, F&& body) {
    try {
        std::pair<bool, std::string> r = body();
        line(idx, r.first, what, r.second);
    } catch (const std::exception& ex) {
        line(idx, false, what, std::string("exception: ") + ex.what());
    }
}

struct PresetCase {
    std::string name;
    Scenario sc;
    std::vector<PhasePoint> pts;
};

std::vector<PresetCase> load_presets() {
    std::vector<PresetCase> out;
    for (const std::string& name : preset_names()) {
        PresetCase c;
        c.name = name;
        c.sc = make_preset(name);
        c.pts = sample_phase_points(c.sc.samples, c.sc.dimension);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

int main() {
    const std::vector<PresetCase> presets = load_presets();
    const std::vector<std::size_t> passing = {0, 1, 2, 3};  // euclid2-qq, euclid3-aq, polar2-ci, randers2-ci
    const std::size_t bad = 4;                              // euclid2-bad

    std::vector<ConditionReport> cond(presets.size());

    criterion(1, "compatibility test separates valid and invalid tensors", [&] {
        double worst_good = 0.0;
        bool ok = true;
        for (std::size_t i : passing) {
            cond[i] = condition_residual(presets[i].sc.model, presets[i].sc.tensor,
                                         presets[i].pts, kTolCondition);
            worst_good = std::max(worst_good, cond[i].residual_max);
            ok = ok && cond[i].verdict;
        }
        cond[bad] = condition_residual(presets[bad].sc.model, presets[bad].sc.tensor,
                                       presets[bad].pts, kTolCondition);
        ok = ok && worst_good < kTolCondition;
        ok = ok && !cond[bad].verdict && cond[bad].residual_max > kBadConditionFloor;
        return std::pair<bool, std::string>{
            ok, "compatible max " + fmt(worst_good) + ", incompatible " + fmt(cond[bad].residual_max)};
    });

    criterion(2, "scaled identity reproduces the binomial ladder", [&] {
        double worst = 0.0;
        for (int n = 2; n <= 5; ++n) {
            std::string energy = "0.5*(";
            for (int i = 1; i <= n; ++i) {
                if (i > 1) energy += "+";
                energy += "u" + std::to_string(i) + "^2";
            }
            energy += ")";
            const FinslerModel m = make_model(n, energy);
            SampleSpec spec;
            spec.count = 32;
            spec.seed = 2;
            const std::vector<PhasePoint> pts = sample_phase_points(spec, n);
            for (double c : {0.5, 2.0}) {
                const TensorField kt = TensorField::scaled_identity(c, n);
                for (const PhasePoint& p : pts) {
                    const HierarchyValues hv = hierarchy_at(m, kt, p);
                    for (int l = 0; l <= n; ++l) {
                        const double expect = binomial(n - 1, l) * std::pow(-c, l) * hv.energy;
                        const double gap =
                            std::fabs(hv.h[static_cast<std::size_t>(l)] - expect) /
                            std::max(1.0, std::fabs(expect));
                        worst = std::max(worst, gap);
                    }
                }
            }
        }
        return std::pair<bool, std::string>{worst < kTolBinomialRel,
                                            "max relative gap " + fmt(worst)};
    });

    criterion(3, "terminal identities: B_n, b_(n+1), h_n vanish", [&] {
        double wb = 0.0, wnext = 0.0, wh = 0.0;
        for (std::size_t i : passing) {
            const PresetCase& pc = presets[i];
            const std::size_t n = static_cast<std::size_t>(pc.sc.dimension);
            for (const PhasePoint& p : pc.pts) {
                const HierarchyValues hv = hierarchy_at(pc.sc.model, pc.sc.tensor, p);
                wb = std::max(wb, max_abs(hv.big_b[n]));
                wnext = std::max(wnext, std::fabs(hv.b[n + 1]));
                wh = std::max(wh, std::fabs(hv.h[n]));
            }
        }
        const bool ok = wb < kTolTerminalB && wnext < kTolTerminalBNext && wh < kTolTerminalH;
        return std::pair<bool, std::string>{
            ok, "|B_n| " + fmt(wb) + ", |b_(n+1)| " + fmt(wnext) + ", |h_n| " + fmt(wh)};
    });

    criterion(4, "recursion coefficients match the characteristic polynomial", [&] {
        double worst = 0.0;
        for (std::size_t i : passing) {
            const PresetCase& pc = presets[i];
            for (const PhasePoint& p : pc.pts) {
                const HierarchyValues hv = hierarchy_at(pc.sc.model, pc.sc.tensor, p);
                worst = std::max(worst, charpoly_check(pc.sc.tensor.values_at(p), hv.b));
            }
        }
        return std::pair<bool, std::string>{worst < kTolCharpoly, "max normalized gap " + fmt(worst)};
    });

    criterion(5, "adjugate product and cofactor form", [&] {
        double wprod = 0.0, wcof = 0.0;
        for (std::size_t i : passing) {
            const PresetCase& pc = presets[i];
            const int n = pc.sc.dimension;
            const double sign = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^(n-1)
            for (const PhasePoint& p : pc.pts) {
                const HierarchyValues hv = hierarchy_at(pc.sc.model, pc.sc.tensor, p);
                const Mat km = pc.sc.tensor.values_at(p);
                const double det = lu_factor(km).det();
                Mat gap = hv.adjugate * km;
                gap.add_diag(-det);
                wprod = std::max(wprod, max_abs(gap) / std::max(1.0, std::fabs(det)));
                const double expect = sign * 2.0 * hv.h[static_cast<std::size_t>(n) - 1];
                wcof = std::max(wcof, std::fabs(hv.cofactor_integral - expect) /
                                          std::max(1.0, std::fabs(expect)));
            }
        }
        const bool ok = wprod < kTolAdjugate && wcof < kTolCofactor;
        return std::pair<bool, std::string>{ok,
                                            "|A K - det I| " + fmt(wprod) + ", cofactor " + fmt(wcof)};
    });

    std::vector<Trajectory> good_trajs;
    std::vector<std::size_t> good_traj_preset;
    Trajectory bad_traj;

    criterion(6, "conserved quantities hold along geodesics", [&] {
        FlowPolicy pol;
        pol.t_end = 10.0;
        pol.step = 1e-3;
        pol.method = "rk4";
        double worst_good = 0.0;
        bool ok = true;
        for (std::size_t i : {std::size_t{0}, std::size_t{1}}) {
            const PresetCase& pc = presets[i];
            for (std::size_t s = 0; s < 2; ++s) {
                Trajectory tr = integrate_geodesic(pc.sc.model, pc.pts[s], pol);
                const DriftReport dr = drift_report(pc.sc.model, pc.sc.tensor, tr, kTolDrift);
                worst_good = std::max(worst_good, dr.worst);
                ok = ok && dr.verdict;
                good_trajs.push_back(std::move(tr));
                good_traj_preset.push_back(i);
            }
        }
        bad_traj = integrate_geodesic(presets[bad].sc.model, presets[bad].pts[0], pol);
        const DriftReport bd =
            drift_report(presets[bad].sc.model, presets[bad].sc.tensor, bad_traj, kTolDrift);
        ok = ok && worst_good < kTolDrift && bd.worst > kBadDriftFloor;
        return std::pair<bool, std::string>{
            ok, "compatible max drift " + fmt(worst_good) + ", incompatible " + fmt(bd.worst)};
    });

    criterion(7, "classical covariant route agrees with the spray route", [&] {
        double wdef = 0.0, wtie = 0.0;
        bool ok = true;
        for (int idx : {0, 1, 2, 4}) {  // the quadratic-metric presets
            const std::size_t i = static_cast<std::size_t>(idx);
            const PresetCase& pc = presets[i];
            const RiemannReport rr =
                riemannian_sckt_residual(pc.sc.model, pc.sc.tensor, pc.pts, kTolCondition);
            ok = ok && rr.verdict == cond[i].verdict;
            wtie = std::max(wtie, rr.contraction_gap_max);
            if (i != bad) {
                wdef = std::max(wdef, rr.definition_residual_max);
                ok = ok && rr.verdict;
            }
        }
        ok = ok && wdef < kTolCondition && wtie < kTolContraction;
        return std::pair<bool, std::string>{
            ok, "definition max " + fmt(wdef) + ", contraction tie " + fmt(wtie)};
    });

    criterion(8, "structural spray identities hold on every model", [&] {
        double worst = 0.0;
        for (const PresetCase& pc : presets)
            worst = std::max(worst, canonical_checks(pc.sc.model, pc.pts).worst());
        return std::pair<bool, std::string>{worst < kTolCanonical, "max residual " + fmt(worst)};
    });

    criterion(9, "along-flow derivatives match closed forms", [&] {
        double worst_good = 0.0;
        bool ok = true;
        for (std::size_t t = 0; t < good_trajs.size(); ++t) {
            const PresetCase& pc = presets[good_traj_preset[t]];
            const DerivativeFlowReport dr =
                along_flow_derivative_check(pc.sc.model, pc.sc.tensor, good_trajs[t], kTolAlongFlow);
            worst_good = std::max(worst_good, std::max(dr.a_gap_max, dr.k_gap_max));
            ok = ok && dr.verdict;
        }
        const DerivativeFlowReport bd = along_flow_derivative_check(
            presets[bad].sc.model, presets[bad].sc.tensor, bad_traj, kTolAlongFlow);
        const double bad_gap = std::max(bd.a_gap_max, bd.k_gap_max);
        ok = ok && !good_trajs.empty() && worst_good < kTolAlongFlow && bad_gap > kBadAlongFlowFloor;
        return std::pair<bool, std::string>{
            ok, "compatible max gap " + fmt(worst_good) + ", incompatible " + fmt(bad_gap)};
    });

    criterion(10, "derivative cross-checks: finite differences and step halving", [&] {
        double worst = 0.0;
        for (std::size_t i = 0; i < presets.size(); ++i) {
            const PresetCase& pc = presets[i];
            SampleSpec spec = pc.sc.samples;
            spec.count = 100;
            spec.seed = 77 + static_cast<std::uint64_t>(i);
            const std::vector<PhasePoint> pts = sample_phase_points(spec, pc.sc.dimension);
            const std::size_t two_n = static_cast<std::size_t>(2 * pc.sc.dimension);
            for (std::size_t s = 0; s < pts.size(); ++s) {
                const int order = 1 + static_cast<int>(s % 3);
                std::vector<int> coords(static_cast<std::size_t>(order));
                for (std::size_t k = 0; k < coords.size(); ++k)
                    coords[k] = static_cast<int>((s * 7 + k * 5 + i) % two_n);
                const CrossCheck cc = fd_crosscheck(pc.sc.model.energy, pts[s], coords);
                worst = std::max(worst, std::fabs(cc.ad - cc.fd) / std::max(1.0, std::fabs(cc.ad)));
            }
        }
        // fixed-step order check: halving the step on the curved model must
        // contract the worst energy drift by roughly 2^4
        const FinslerModel& polar = presets[2].sc.model;
        const PhasePoint p0{{0.6, 0.0}, {-0.8, 1.2}};
        const auto drift = [&](double step) {
            FlowPolicy pol;
            pol.t_end = 1.0;
            pol.step = step;
            pol.method = "rk4";
            const Trajectory tr = integrate_geodesic(polar, p0, pol);
            const double e0 = spray_at(polar, tr.states.front()).energy;
            double w = 0.0;
            for (const PhasePoint& st : tr.states)
                w = std::max(w, std::fabs(spray_at(polar, st).energy - e0));
            return w;
        };
        const double d1 = drift(1e-2);
        const double d2 = drift(5e-3);
        const double ratio = d1 / std::max(d2, 1e-300);
        const bool ok = worst < kTolCrossCheck && d1 > 1e-13 && ratio >= kMinOrderRatio;
        return std::pair<bool, std::string>{ok, "max fd gap " + fmt(worst) + ", drift ratio " +
                                                    fmt(ratio)};
    });

    criterion(11, "bracket magnitude table; the h_0 row vanishes", [&] {
        double wrow = 0.0, wanti = 0.0;
        for (std::size_t i : passing) {
            const PresetCase& pc = presets[i];
            const InvolutivityTable tab = involutivity_probe(pc.sc.model, pc.sc.tensor, pc.pts);
            std::printf("       %s bracket magnitudes:\n", pc.name.c_str());
            for (int r = 0; r < tab.n; ++r) {
                std::string row = "        ";
                for (int c = 0; c < tab.n; ++c) row += "  " + fmt(tab.magnitudes(r, c));
                std::printf("%s\n", row.c_str());
            }
            for (int j = 0; j < tab.n; ++j) wrow = std::max(wrow, tab.magnitudes(0, j));
            wanti = std::max(wanti, tab.antisymmetry_max);
        }
        const bool ok = wrow < kTolBracketRow && wanti < kTolAntisymmetry;
        return std::pair<bool, std::string>{
            ok, "max |{h_0, .}| " + fmt(wrow) + ", antisymmetry " + fmt(wanti)};
    });

    criterion(12, "identity shifts preserve compatibility and the fitted family", [&] {
        const std::vector<double> shifts{-1.0, 0.5, 2.0};
        double walpha = 0.0, wfam = 0.0;
        bool ok = true;
        for (std::size_t i : passing) {
            const PresetCase& pc = presets[i];
            for (double s : shifts) {
                const ConditionReport cs = condition_residual(pc.sc.model, pc.sc.tensor.shifted(s),
                                                              pc.pts, kTolCondition);
                ok = ok && cs.verdict;
                for (std::size_t a = 0; a < cs.alpha_samples.size(); ++a)
                    for (std::size_t j = 0; j < cs.alpha_samples[a].size(); ++j)
                        walpha = std::max(walpha, std::fabs(cs.alpha_samples[a][j] -
                                                            cond[i].alpha_samples[a][j]));
            }
            const ShiftedFamilyReport fr =
                shifted_family_check(pc.sc.model, pc.sc.tensor, pc.pts.front(), shifts, kTolShiftFamily);
            ok = ok && fr.verdict;
            wfam = std::max({wfam, fr.fit_residual_max, fr.coefficient_residual_max,
                             fr.recursion_residual_max});
        }
        ok = ok && walpha < kTolShiftAlpha && wfam < kTolShiftFamily;
        return std::pair<bool, std::string>{
            ok, "max alpha change " + fmt(walpha) + ", family residual " + fmt(wfam)};
    });

    std::printf("%d of 12 criteria passed\n", 12 - g_failed);
    return g_failed == 0 ? 0 : 1;
}
