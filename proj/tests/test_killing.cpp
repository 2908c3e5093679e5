#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "finlab/errors.hpp"
#include "finlab/geometry.hpp"
#include "finlab/killing.hpp"
#include "finlab/phase.hpp"
#include "finlab/tensor.hpp"

using namespace finlab;

namespace {

std::vector<PhasePoint> sample(int dim, int count, std::uint64_t seed,
                               Interval qi = Interval{-2.0, 2.0},
                               Interval ui = Interval{-2.0, 2.0}) {
    SampleSpec spec;
    spec.count = count;
    spec.seed = seed;
    spec.q_box = {qi};
    spec.u_box = {ui};
    return sample_phase_points(spec, dim);
}

}  // namespace

TEST_CASE("extracted one-form for the outer-product tensor is 2q") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField k = TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2);
    for (const PhasePoint& p : {PhasePoint{{1.0, 2.0}, {0.3, -0.4}},
                                PhasePoint{{-0.5, 1.5}, {1.0, 1.0}},
                                PhasePoint{{2.0, -1.0}, {-0.7, 0.2}}}) {
        const std::vector<double> alpha = extract_alpha(m, k, p);
        CHECK(alpha[0] == doctest::Approx(2.0 * p.q[0]).epsilon(1e-12));
        CHECK(alpha[1] == doctest::Approx(2.0 * p.q[1]).epsilon(1e-12));
    }
}

TEST_CASE("extracted one-form for an affine tensor is constant") {
    const FinslerModel m = make_model(3, "0.5*(u1^2+u2^2+u3^2)");
    const TensorField k = TensorField::parse({{"q1+2", "0.5*q2", "0.5*q3"},
                                              {"0.5*q2", "2", "0"},
                                              {"0.5*q3", "0", "2"}},
                                             3);
    const PhasePoint p{{0.4, -1.1, 0.9}, {1.2, 0.5, -0.3}};
    const std::vector<double> alpha = extract_alpha(m, k, p);
    CHECK(alpha[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(alpha[1]) < 1e-12);
    CHECK(std::fabs(alpha[2]) < 1e-12);
}

TEST_CASE("constant multiples of the identity have vanishing one-form") {
    const FinslerModel m = make_model(2, "(sqrt(u1^2+u2^2)+0.3*u1)^2");
    const TensorField k = TensorField::scaled_identity(2.0, 2);
    const PhasePoint p{{0.3, 0.8}, {0.9, -0.6}};
    const std::vector<double> alpha = extract_alpha(m, k, p);
    CHECK(std::fabs(alpha[0]) < 1e-12);
    CHECK(std::fabs(alpha[1]) < 1e-12);
}

TEST_CASE("condition residual accepts compatible tensors") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField k = TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2);
    const ConditionReport rep = condition_residual(m, k, sample(2, 16, 3));
    CHECK(rep.verdict);
    CHECK(rep.residual_max < 1e-10);
    CHECK(rep.symmetry_max < 1e-10);
    CHECK(rep.trace_identity_max < 1e-10);
    CHECK(rep.sample_count == 16);
    CHECK(rep.max_u_degree == 0);
    REQUIRE(rep.alpha_samples.size() == 16);
}

TEST_CASE("condition residual rejects incompatible tensors") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField bad = TensorField::parse({{"q1^2", "0"}, {"0", "q2"}}, 2);
    const ConditionReport rep = condition_residual(m, bad, sample(2, 16, 3));
    CHECK_FALSE(rep.verdict);
    CHECK(rep.residual_max > 1e-3);
}

TEST_CASE("asymmetry of the lowered tensor is flagged") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField skew = TensorField::parse({{"0", "1"}, {"0", "0"}}, 2);
    const ConditionReport rep = condition_residual(m, skew, sample(2, 8, 5));
    CHECK_FALSE(rep.verdict);
    CHECK(rep.symmetry_max > 1e-3);
}

TEST_CASE("classical route agrees with the condition equation") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const std::vector<PhasePoint> pts = sample(2, 16, 11);

    const TensorField good = TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2);
    const RiemannReport rr = riemannian_sckt_residual(m, good, pts);
    const ConditionReport cr = condition_residual(m, good, pts);
    CHECK(rr.verdict);
    CHECK(rr.verdict == cr.verdict);
    CHECK(rr.definition_residual_max < 1e-10);
    CHECK(rr.contraction_gap_max < 1e-10);

    const TensorField bad = TensorField::parse({{"q1^2", "0"}, {"0", "q2"}}, 2);
    const RiemannReport rb = riemannian_sckt_residual(m, bad, pts);
    const ConditionReport cb = condition_residual(m, bad, pts);
    CHECK_FALSE(rb.verdict);
    CHECK(rb.verdict == cb.verdict);
    CHECK(rb.contraction_gap_max < 1e-10);  // the tie holds even off-shell
}

TEST_CASE("classical route requires a velocity-independent metric") {
    const FinslerModel m = make_model(2, "(sqrt(u1^2+u2^2)+0.3*u1)^2");
    const TensorField k = TensorField::scaled_identity(2.0, 2);
    CHECK_THROWS_WITH_AS((void)riemannian_sckt_residual(m, k, sample(2, 4, 1)),
                         doctest::Contains("not quadratic"), ModelError);
}

TEST_CASE("classical route requires velocity-free tensor entries") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField k = TensorField::parse({{"u1", "0"}, {"0", "u2"}}, 2);
    CHECK_THROWS_WITH_AS((void)riemannian_sckt_residual(m, k, sample(2, 4, 1)),
                         doctest::Contains("free of the velocities"), ModelError);
    CHECK_THROWS_AS((void)nijenhuis_residual(k, sample(2, 4, 1)), ModelError);
}

TEST_CASE("torsion vanishes for the outer-product tensor") {
    const TensorField k = TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2);
    CHECK(nijenhuis_residual(k, sample(2, 12, 2)) < 1e-12);
}

TEST_CASE("torsion of a swapped diagonal tensor has the hand value") {
    // A = diag(q2, q1): both independent torsion components equal q2 - q1
    const TensorField k = TensorField::parse({{"q2", "0"}, {"0", "q1"}}, 2);
    const std::vector<PhasePoint> one = {PhasePoint{{1.0, 2.0}, {1.0, 0.0}}};
    CHECK(nijenhuis_residual(k, one) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("condition equation propagates to powers of the tensor") {
    // with alpha extracted, nabla(K^(j+1)) computed by the product rule must
    // match  1/2 sum_i (K^(j-i) u) (x) (alpha K^i) + (K^(j-i) galpha) (x) (theta K^i)
    struct Case {
        FinslerModel m;
        TensorField k;
    };
    std::vector<Case> cases;
    cases.push_back({make_model(2, "0.5*(u1^2+u2^2)"),
                     TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2)});
    cases.push_back({make_model(3, "0.5*(u1^2+u2^2+u3^2)"),
                     TensorField::parse({{"q1+2", "0.5*q2", "0.5*q3"},
                                         {"0.5*q2", "2", "0"},
                                         {"0.5*q3", "0", "2"}},
                                        3)});

    for (const Case& c : cases) {
        const int n = c.m.dim;
        for (const PhasePoint& p : sample(n, 6, 17)) {
            const PointGeometry geo = geometry_at(c.m, p);
            const Mat kval = c.k.values_at(p);
            const Mat nabk = nabla_tensor11(geo, c.k);
            const std::vector<double> alpha = extract_alpha(geo, c.k);
            const std::vector<double> raised = geo.g_inv * alpha;

            for (int j = 1; j <= 2; ++j) {
                // product rule: nabla(K^(j+1)) = sum_i K^(j-i) (nabla K) K^i
                Mat lhs(n, 0.0);
                {
                    std::vector<Mat> powers(static_cast<std::size_t>(j) + 1, Mat::identity(n, 0.0));
                    for (int i = 1; i <= j; ++i)
                        powers[static_cast<std::size_t>(i)] = powers[static_cast<std::size_t>(i - 1)] * kval;
                    for (int i = 0; i <= j; ++i)
                        lhs = lhs + powers[static_cast<std::size_t>(j - i)] * nabk *
                                        powers[static_cast<std::size_t>(i)];
                }

                Mat rhs(n, 0.0);
                // iterate i = 0..j: left vectors carry K^(j-i), right covectors K^i
                std::vector<std::vector<double>> lu_pows, lx_pows, ra_pows, rt_pows;
                lu_pows.push_back(p.u);
                lx_pows.push_back(raised);
                ra_pows.push_back(alpha);
                rt_pows.push_back(geo.theta);
                for (int i = 1; i <= j; ++i) {
                    lu_pows.push_back(kval * lu_pows.back());
                    lx_pows.push_back(kval * lx_pows.back());
                    std::vector<double> na(static_cast<std::size_t>(n), 0.0);
                    std::vector<double> nt(static_cast<std::size_t>(n), 0.0);
                    for (int b = 0; b < n; ++b)
                        for (int mi = 0; mi < n; ++mi) {
                            na[static_cast<std::size_t>(b)] +=
                                ra_pows.back()[static_cast<std::size_t>(mi)] * kval(mi, b);
                            nt[static_cast<std::size_t>(b)] +=
                                rt_pows.back()[static_cast<std::size_t>(mi)] * kval(mi, b);
                        }
                    ra_pows.push_back(na);
                    rt_pows.push_back(nt);
                }
                for (int i = 0; i <= j; ++i)
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            rhs(a, b) += 0.5 * (lu_pows[static_cast<std::size_t>(j - i)][static_cast<std::size_t>(a)] *
                                                    ra_pows[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)] +
                                                lx_pows[static_cast<std::size_t>(j - i)][static_cast<std::size_t>(a)] *
                                                    rt_pows[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)]);

                const double scale = std::max(1.0, max_abs(lhs));
                CHECK(max_abs(lhs - rhs) / scale < 1e-9);
            }
        }
    }
}

TEST_CASE("identity shifts leave the one-form unchanged") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField k = TensorField::parse({{"q1^2", "q1*q2"}, {"q1*q2", "q2^2"}}, 2);
    const PhasePoint p{{0.8, -1.2}, {0.6, 0.9}};
    const std::vector<double> base = extract_alpha(m, k, p);
    for (double s : {-1.0, 0.5, 2.0}) {
        const std::vector<double> shifted = extract_alpha(m, k.shifted(s), p);
        CHECK(shifted[0] == doctest::Approx(base[0]).epsilon(1e-12));
        CHECK(shifted[1] == doctest::Approx(base[1]).epsilon(1e-12));
    }
}

TEST_CASE("input validation") {
    const FinslerModel m = make_model(2, "0.5*(u1^2+u2^2)");
    const TensorField k3 = TensorField::scaled_identity(1.0, 3);
    const std::vector<PhasePoint> pts = sample(2, 2, 1);
    CHECK_THROWS_AS((void)condition_residual(m, k3, pts), ModelError);
    CHECK_THROWS_AS((void)condition_residual(m, TensorField::scaled_identity(1.0, 2), {}),
                    ModelError);
}
