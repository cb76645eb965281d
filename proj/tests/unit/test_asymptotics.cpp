#include <gtest/gtest.h>

#include <cmath>

#include "airyproc/asymptotics.hpp"
#include "airyproc/fredholm.hpp"
#include "shared_solution.hpp"

using namespace airyproc;
using airyproc::testing::hm;

TEST(PointJet, MatchesSolution) {
    const PointJet j = point_jet(hm(), 0.0);
    EXPECT_NEAR(j.q, -0.367061551548, 1e-10);
    EXPECT_NEAR(j.f2, 0.96937282835526, 1e-11);
    EXPECT_NEAR(j.g[2], -j.q * j.q, 1e-15);
    // w' against a central difference of w
    const double h = 1e-4;
    const double wp = (point_jet(hm(), h).w[0] - point_jet(hm(), -h).w[0]) / (2 * h);
    EXPECT_NEAR(j.w[1], wp, 1e-7);
    const double wpp = (point_jet(hm(), h).w[1] - point_jet(hm(), -h).w[1]) / (2 * h);
    EXPECT_NEAR(j.w[2], wpp, 1e-7);
}

TEST(PointJet, BelowSolverDomain) {
    const PointJet j = point_jet(hm(), -12.0);
    EXPECT_GT(j.f2, 0.0);
    EXPECT_LT(j.f2, 1e-30);
}

TEST(Expansion, H2Examples) {
    const double gp0 = hm().tails(0.0).gp;
    EXPECT_NEAR(h2_term(hm(), 0.0, 0.0), gp0 * gp0, 1e-15);
    EXPECT_NEAR(h2_term(hm(), 1.0, -2.0), h2_term(hm(), -2.0, 1.0), 1e-15);
    EXPECT_GT(h2_term(hm(), -1.0, 0.5), 0.0);
}

TEST(Expansion, H4FormsAgree) {
    for (double u : {-5.0, -2.0, 0.0, 1.5, 4.0})
        for (double v : {-3.0, -0.5, 2.0}) {
            const auto f = h4_forms(hm(), u, v);
            EXPECT_NEAR(f.q_form, f.g_form, 1e-10) << u << "," << v;
            EXPECT_NEAR(h4_term(hm(), u, v), h4_term(hm(), v, u), 1e-12);
        }
}

TEST(Expansion, PhiIdentity) {
    // Phi(u,v) + Phi(v,u) = F2(u) F2(v) (h4 + h2^2 / 2)
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) {
            const double u = -3.0 + 1.25 * i, v = -3.0 + 1.25 * k;
            const auto e = expansion_terms(hm(), u, v);
            EXPECT_NEAR(e.phi_uv + e.phi_vu, e.f2_u * e.f2_v * e.f4, 1e-12) << u << "," << v;
        }
}

TEST(Expansion, PhiValueAtOrigin) {
    EXPECT_NEAR(phi(hm(), 0.0, 0.0), 0.0039677552, 1e-9);
}

TEST(Expansion, PhiDecays) {
    for (double far : {6.0, 8.0}) {
        EXPECT_LT(std::fabs(phi(hm(), far, 0.0)), 1e-6);
        EXPECT_LT(std::fabs(phi(hm(), 0.0, far)), 1e-6);
    }
    EXPECT_LT(std::fabs(phi(hm(), -9.0, 9.0)), 1e-6);
    EXPECT_LT(std::fabs(phi(hm(), 9.0, -9.0)), 1e-6);
    EXPECT_LT(std::fabs(phi(hm(), -8.0, -8.0)), 1e-6);
    EXPECT_LT(std::fabs(phi(hm(), 8.0, 0.0)), 1e-10);
}

TEST(JointSeries, LeadingOrders) {
    const double f = f2_cdf(hm(), 0.0), p = f2_pdf(hm(), 0.0);
    EXPECT_NEAR(joint_series(hm(), 10.0, 0.0, 0.0, 2), f * f + p * p / 100.0, 1e-14);
    const double s4 = joint_series(hm(), 10.0, 0.0, 0.0, 4);
    EXPECT_NEAR(s4 - joint_series(hm(), 10.0, 0.0, 0.0, 2), 2.0 * phi(hm(), 0.0, 0.0) / 1e4, 1e-14);
    EXPECT_THROW(joint_series(hm(), 0.0, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(joint_series(hm(), 1.0, 0.0, 0.0, 3), std::invalid_argument);
}

TEST(JointSeries, ApproachesFredholmAtLargeGap) {
    for (double t : {10.0, 20.0}) {
        const double exact = joint_cdf(t, -0.5, 0.5).value;
        const double s2 = joint_series(hm(), t, -0.5, 0.5, 2);
        const double s4 = joint_series(hm(), t, -0.5, 0.5, 4);
        EXPECT_LT(std::fabs(exact - s4), std::fabs(exact - s2)) << t;
        EXPECT_LT(std::fabs(exact - s4), 2e-6 * std::pow(10.0 / t, 4)) << t;
    }
}

TEST(CConstant, ReferenceAndRefinement) {
    const double c = c_constant(hm(), 10.0, 0.05);
    EXPECT_NEAR(c, -3.5421736148, 1e-8);
    EXPECT_NEAR(c_constant(hm(), 10.0, 0.1), c, 1e-7);
    EXPECT_NEAR(c_constant(hm(), 12.0, 0.1), c, 1e-7);
    EXPECT_THROW(c_constant(hm(), 5.0, 0.05), std::invalid_argument);
    EXPECT_THROW(c_constant(hm(), 10.0, 0.3), std::invalid_argument);
}

TEST(Mesh, SymmetricTrapezoid) {
    const auto x = symmetric_mesh(8.0, 0.25);
    ASSERT_EQ(x.size(), 65u);
    EXPECT_DOUBLE_EQ(x.front(), -8.0);
    EXPECT_DOUBLE_EQ(x.back(), 8.0);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) total += trapezoid_weight(i, x.size(), 0.25);
    EXPECT_NEAR(total, 16.0, 1e-14);
    EXPECT_THROW(symmetric_mesh(1.0, 0.3), std::invalid_argument);
}

TEST(Covariance, PositiveAndShrinking) {
    const auto c3 = covariance_exact(3.0, 8.0, 0.25);
    const auto c6 = covariance_exact(6.0, 8.0, 0.25);
    EXPECT_GT(c3.covariance, c6.covariance);
    EXPECT_GT(c6.covariance, 0.0);
    EXPECT_NEAR(c6.scaled, c6.covariance * 36.0, 1e-15);
    EXPECT_THROW(covariance_exact(-1.0), std::invalid_argument);
    EXPECT_THROW(covariance_exact(1.0, 4.0), std::invalid_argument);
}
