#include <gtest/gtest.h>

#include <cmath>

#include "airyproc/airy_function.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/painleve.hpp"
#include "shared_solution.hpp"

using namespace airyproc;
using airyproc::testing::hm;

namespace {

KernelSpec two_time(double t1, double t2, double u1, double u2) {
    KernelSpec s;
    s.times = {t1, t2};
    s.thresholds = {u1, u2};
    return s;
}

}  // namespace

TEST(ExtendedKernel, EqualTimeConfluentAtOrigin) {
    const KernelSpec s = two_time(0.0, 0.0, 0.0, 0.0);
    const double ap = airy_ai_prime(0.0);
    EXPECT_NEAR(extended_kernel_entry(s, 0, 1, 0.0, 0.0), ap * ap, 1e-10);
    EXPECT_NEAR(ap * ap, 0.0669874837, 1e-10);
}

TEST(ExtendedKernel, ChristoffelDarbouxMatchesZIntegral) {
    // equal-time kernel equals the tau -> 0+ limit of the forward z-integral
    const KernelSpec eq = two_time(0.0, 0.0, 0.0, 0.0);
    const KernelSpec fw = two_time(1e-12, 0.0, 0.0, 0.0);
    for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{-1.5, 0.7}, std::pair{2.0, 2.5}, std::pair{-6.0, -5.9}})
        EXPECT_NEAR(extended_kernel_entry(eq, 0, 1, x, y), extended_kernel_entry(fw, 0, 1, x, y), 1e-10) << x << "," << y;
}

TEST(ExtendedKernel, DampedByTimeGap) {
    const KernelSpec s = two_time(5.0, 0.0, 0.0, 0.0);
    EXPECT_LT(extended_kernel_entry(s, 0, 1, 2.0, 2.0), extended_kernel_entry(s, 0, 0, 2.0, 2.0));
    EXPECT_GT(extended_kernel_entry(s, 0, 1, 2.0, 2.0), 0.0);
}

TEST(ExtendedKernel, EqualTimeSymmetric) {
    const KernelSpec s = two_time(0.0, 0.0, 0.0, 0.0);
    for (auto [x, y] : {std::pair{0.3, -1.2}, std::pair{4.0, 1.0}, std::pair{-7.5, 2.25}})
        EXPECT_NEAR(extended_kernel_entry(s, 0, 0, x, y), extended_kernel_entry(s, 0, 0, y, x), 1e-12);
}

TEST(ExtendedKernel, BackwardBranchesAgree) {
    // the direct and Gaussian-subtracted evaluations of the backward kernel
    using namespace fredholm_detail;
    for (double tau : {-0.7, -1.0, -2.0}) {
        ZLayout direct = make_layout(tau, tau, -3.0, 16);
        ZLayout gauss;
        gauss.tau = tau;
        gauss.branch = Branch::BackwardGaussian;
        gauss.rule = panel_rule(kAiryCut + 3.0, 1.0, 16);
        ASSERT_EQ(direct.branch, Branch::BackwardDirect);
        for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{-3.0, 1.0}, std::pair{2.0, -1.0}})
            EXPECT_NEAR(kernel_entry(direct, x, y), kernel_entry(gauss, x, y), 1e-11) << tau << " " << x << "," << y;
    }
}

TEST(ExtendedKernel, RejectsArgumentsBelowRange) {
    const KernelSpec s = two_time(0.0, 1.0, 0.0, 0.0);
    EXPECT_THROW(extended_kernel_entry(s, 0, 1, -30.0, 0.0), FredholmError);
    EXPECT_THROW(extended_kernel_entry(s, 0, 2, 0.0, 0.0), std::out_of_range);
}

TEST(JointCdf, OneTimeMatchesPainleve) {
    for (double u : {-4.0, -2.0, 0.0, 2.0}) {
        const auto r = fredholm_f2(u);
        EXPECT_NEAR(r.value, f2_cdf(hm(), u), 1e-7) << u;
        EXPECT_LT(r.refinement_error, 1e-10);
    }
}

TEST(JointCdf, CoincidentTimesGiveMinimum) {
    for (auto [u, v] : {std::pair{0.0, 1.0}, std::pair{-1.0, -2.0}, std::pair{0.5, 0.5}}) {
        const auto r = joint_cdf(two_time(0.0, 0.0, u, v));
        EXPECT_NEAR(r.value, f2_cdf(hm(), std::min(u, v)), 1e-6);
    }
}

TEST(JointCdf, LargeGapNearlyFactorizes) {
    const double f = f2_cdf(hm(), 0.0);
    const double fp = f2_pdf(hm(), 0.0);
    const double j = joint_cdf(two_time(0.0, 40.0, 0.0, 0.0)).value;
    // the remaining gap is the 1/t^2 term of the expansion
    EXPECT_NEAR(j - f * f, fp * fp / 1600.0, 1e-7);
}

TEST(JointCdf, MarginalizesToTracyWidom) {
    for (double t : {0.5, 1.0, 2.0, 5.0})
        for (double u : {-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0}) {
            EXPECT_NEAR(joint_cdf(t, u, 8.0).value, f2_cdf(hm(), u), 1e-6) << t << " " << u;
        }
}

TEST(JointCdf, ExchangeSymmetry) {
    for (double t : {0.3, 1.0, 3.0})
        for (auto [u, v] : {std::pair{-1.0, 0.5}, std::pair{0.0, -2.0}})
            EXPECT_NEAR(joint_cdf(t, u, v).value, joint_cdf(t, v, u).value, 1e-8) << t;
}

TEST(JointCdf, NegativeGapIsTimeReversal) {
    EXPECT_NEAR(joint_cdf(-1.5, -1.0, 0.5).value, joint_cdf(1.5, 0.5, -1.0).value, 1e-14);
}

TEST(JointCdf, ApproachesIndependenceMonotonically) {
    const double f = f2_cdf(hm(), 0.0);
    double prev = 1.0;
    for (double t : {2.0, 4.0, 8.0, 16.0}) {
        const double gap = std::fabs(joint_cdf(t, 0.0, 0.0).value - f * f);
        EXPECT_LT(gap, prev) << t;
        prev = gap;
    }
}

TEST(JointCdf, RefinementErrorBoundsRefinement) {
    for (double t : {0.5, 2.0}) {
        KernelSpec s = two_time(0.0, t, -1.0, 0.0);
        const auto base = joint_cdf(s);
        s.quad_order *= 2;
        s.truncation += 4.0;
        const auto fine = joint_cdf(s);
        EXPECT_LE(std::fabs(fine.value - base.value), std::max(base.refinement_error, 1e-13)) << t;
    }
}

TEST(JointCdf, SmallGapRaisesQuadratureOrder) {
    const auto r = joint_cdf(two_time(0.0, 0.05, 0.0, 1.0));
    EXPECT_GT(r.matrix_size, 2u * 64u);
    EXPECT_LE(r.matrix_size, 2u * fredholm_detail::kMaxQuadOrder);
}

TEST(JointCdf, ProbabilityRange) {
    for (double t : {0.2, 1.0, 6.0})
        for (double u : {-6.0, -2.0, 0.0, 3.0}) {
            const double p = joint_cdf(t, u, -u / 2.0).value;
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
}

TEST(JointCdf, InvalidSpecs) {
    EXPECT_THROW(joint_cdf(two_time(1.0, 0.0, 0.0, 0.0)), std::invalid_argument);
    EXPECT_THROW(joint_cdf(two_time(0.0, 1.0, -11.0, 0.0)), std::invalid_argument);
    KernelSpec s = two_time(0.0, 1.0, 0.0, 0.0);
    s.quad_order = 4;
    EXPECT_THROW(joint_cdf(s), std::invalid_argument);
    s.quad_order = 64;
    s.truncation = -1.0;
    EXPECT_THROW(joint_cdf(s), std::invalid_argument);
    KernelSpec empty;
    EXPECT_THROW(joint_cdf(empty), std::invalid_argument);
}

TEST(JointCdfGrid, SingleCellMatchesPointwise) {
    const auto g = joint_cdf_grid(1.0, {0.0}, {0.0});
    EXPECT_NEAR(g(0, 0), joint_cdf(1.0, 0.0, 0.0).value, 1e-12);
}

TEST(JointCdfGrid, MatchesPointwiseAndIsMonotone) {
    const std::vector<double> us{-2.0, -1.0, 0.0, 1.0};
    const std::vector<double> vs{-1.5, -0.5, 0.5};
    const auto g = joint_cdf_grid(1.0, us, vs);
    EXPECT_NEAR(g(2, 1), joint_cdf(1.0, 0.0, -0.5).value, 1e-12);
    for (std::size_t a = 0; a < us.size(); ++a)
        for (std::size_t b = 0; b < vs.size(); ++b) {
            if (a > 0) {
                EXPECT_GE(g(a, b), g(a - 1, b));
            }
            if (b > 0) {
                EXPECT_GE(g(a, b), g(a, b - 1));
            }
        }
    EXPECT_THROW(joint_cdf_grid(1.0, {1.0, 0.0}, {0.0}), std::invalid_argument);
}

TEST(JointCdfGrid, RectangleMassNonnegative) {
    const std::vector<double> x{-2.0, -1.9, -1.0, -0.95, 0.0, 0.02, 1.5};
    for (double t : {0.3, 2.0}) {
        const auto g = joint_cdf_grid(t, x, x);
        for (std::size_t a = 1; a < x.size(); ++a)
            for (std::size_t b = 1; b < x.size(); ++b)
                EXPECT_GE(g(a, b) - g(a - 1, b) - g(a, b - 1) + g(a - 1, b - 1), -1e-8);
    }
}

TEST(JointCdfGrid, NegativeTimeAndZeroTime) {
    const auto g = joint_cdf_grid(-2.0, {-1.0, 0.0}, {0.5});
    EXPECT_NEAR(g(0, 0), joint_cdf(2.0, 0.5, -1.0).value, 1e-12);
    const auto z = joint_cdf_grid(0.0, {-1.0}, {0.5});
    EXPECT_NEAR(z(0, 0), f2_cdf(hm(), -1.0), 1e-7);
}

TEST(TwoTimeEvaluator, SharedLayoutMarginals) {
    const TwoTimeEvaluator ev(1.0, {-1.0, 0.0}, {0.5}, {}, 1.2);
    EXPECT_NEAR(ev.marginal_u(1), f2_cdf(hm(), 0.0), 1e-10);
    EXPECT_NEAR(ev.marginal_v(0), f2_cdf(hm(), 0.5), 1e-10);
    EXPECT_NEAR(ev.joint(1, 0), joint_cdf(1.0, 0.0, 0.5).value, 1e-11);
    EXPECT_THROW(TwoTimeEvaluator(-1.0, {0.0}, {0.0}), std::invalid_argument);
}
