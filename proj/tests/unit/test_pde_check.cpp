#include <gtest/gtest.h>

#include <cmath>

#include "airyproc/pde_check.hpp"
#include "shared_solution.hpp"

using namespace airyproc;
using airyproc::testing::hm;

namespace {

template <class F>
StencilGrid synthetic_grid(GridCoordinates coords, double t0, double mesh, F&& h) {
    StencilGrid g;
    g.t0 = t0;
    g.mesh = mesh;
    g.t_mesh = mesh;
    g.coords = coords;
    g.h = numerics::LatticeValues({3, 5, 5}, {t0 - mesh, -2.0 * mesh + 0.3, -2.0 * mesh - 0.7}, {mesh, mesh, mesh});
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) g.h.at(k, i, j) = h(g.t(k), g.a(i), g.b(j));
    return g;
}

}  // namespace

TEST(HierarchyOperator, Examples) {
    EXPECT_NEAR(hierarchy_L([](double u, double v) { return u * u * v; }, 0.3, -1.2, 1e-2), 2.0, 1e-9);
    EXPECT_NEAR(hierarchy_L([](double u, double v) { return u * v * v; }, 0.3, -1.2, 1e-2), -2.0, 1e-9);
    // sums of one-variable functions and functions of u + v are annihilated
    EXPECT_NEAR(hierarchy_L([](double u, double v) { return std::sin(u) + std::exp(v) + std::cos(u + v); }, 0.4,
                            -0.2, 1e-3),
                0.0, 1e-6);
    EXPECT_NEAR(hierarchy_L([](double u, double v) { return std::exp(0.5 * u) + std::sin(2.0 * v) + std::exp(-(u + v)); },
                            -1.0, 0.7, 1e-3),
                0.0, 1e-6);
    EXPECT_NEAR(hierarchy_L([](double u, double v) { return std::cos(u) * 3.0 + v * v * v + std::sin(u + v) * 2.0; },
                            1.3, -0.6, 1e-3),
                0.0, 1e-6);
    // antisymmetric under exchange
    auto f = [](double u, double v) { return std::exp(0.3 * u) * std::sin(v) + u * u * u * v; };
    auto fs = [&](double u, double v) { return f(v, u); };
    EXPECT_NEAR(hierarchy_L(f, 0.5, -0.4, 1e-3), -hierarchy_L(fs, -0.4, 0.5, 1e-3), 1e-6);
}

TEST(Hierarchy, OrderTwoResidualVanishes) {
    for (double u : {-4.0, -1.0, 0.5, 3.0})
        for (double v : {-2.0, 0.0, 2.5}) {
            const auto r = hierarchy_order2_residual(hm(), u, v);
            EXPECT_NEAR(r.residual, 0.0, 1e-12);
            EXPECT_NEAR(r.lhs_fd, r.rhs, 1e-5 * std::max(1.0, std::fabs(r.rhs)));
        }
}

TEST(Hierarchy, OrderFourResidualVanishes) {
    for (double u : {-4.0, -1.0, 0.5, 3.0})
        for (double v : {-2.0, 0.0, 2.5}) {
            const auto r = hierarchy_order4_residual(hm(), u, v);
            EXPECT_NEAR(r.residual, 0.0, 1e-10);
            EXPECT_LT(r.forms_gap, kRhsFormTolerance);
            EXPECT_NEAR(r.lhs_fd, r.rhs, 1e-5 * std::max(1.0, std::fabs(r.rhs)));
            EXPECT_NEAR(hierarchy_order4_rhs_literal(hm(), u, v), -r.rhs, 1e-9);
        }
}

TEST(Hierarchy, RightHandSidesAntisymmetric) {
    EXPECT_NEAR(hierarchy_order2_rhs(hm(), -1.0, 0.5), -hierarchy_order2_rhs(hm(), 0.5, -1.0), 1e-14);
    EXPECT_NEAR(hierarchy_order2_rhs(hm(), 0.7, 0.7), 0.0, 1e-15);
    const auto a = hierarchy_order4_residual(hm(), -1.0, 0.5);
    const auto b = hierarchy_order4_residual(hm(), 0.5, -1.0);
    EXPECT_NEAR(a.rhs, -b.rhs, 1e-12);
}

TEST(PdeResidual, SeparableNullSpaceUV) {
    // h = r1(u) + r3(v): the time derivative and the mixed-derivative groups vanish
    auto h = [](double, double u, double v) { return u * u * u - 0.5 * u + v * v * v * v; };
    const auto g = synthetic_grid(GridCoordinates::UV, 2.0, 0.1, h);
    const auto r = pde_residual_uv(g, 2, 2);
    ASSERT_EQ(r.terms.size(), 5u);
    EXPECT_NEAR(r.terms[0], 0.0, 1e-9);
    EXPECT_NEAR(r.terms[1], 0.0, 1e-9);
    EXPECT_NEAR(r.terms[2], 0.0, 1e-9);
    EXPECT_NEAR(r.point[0], 2.0, 1e-15);
}

TEST(PdeResidual, OneVariableXY) {
    // h = h(y): residual reduces to -x h_yyy
    auto h = [](double, double, double y) { return y * y * y; };
    const auto g = synthetic_grid(GridCoordinates::XY, 2.0, 0.1, h);
    const auto r = pde_residual_xy(g, 2, 2);
    const double x = g.a(2);
    EXPECT_NEAR(r.residual, -x * 6.0, 1e-8);
    EXPECT_NEAR(r.terms[0], 0.0, 1e-9);
    EXPECT_NEAR(r.terms[3], 0.0, 1e-8);
}

TEST(PdeResidual, WrongCoordinatesThrow) {
    auto h = [](double, double u, double v) { return u * v; };
    const auto g = synthetic_grid(GridCoordinates::UV, 2.0, 0.1, h);
    EXPECT_THROW(pde_residual_xy(g, 2, 2), std::invalid_argument);
    auto zero = [](double, double, double) { return 0.0; };
    EXPECT_THROW(pde_residual_uv(synthetic_grid(GridCoordinates::UV, 2.0, 0.1, zero), 2, 2), std::domain_error);
}

TEST(StencilGridBuild, SeriesMatchesExactAtLargeGap) {
    const auto s = build_grid(hm(), GridSource::Series4, 8.0, -1.0, 1.0, -1.0, 1.0, 0.5, 0.5);
    const auto e = build_grid(hm(), GridSource::ExactFredholm, 8.0, -1.0, 1.0, -1.0, 1.0, 0.5, 0.5);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(s.h.at(k, i, j), e.h.at(k, i, j), 1e-4);
}

TEST(StencilGridBuild, SwapSymmetry) {
    const auto g = build_centered_grid(hm(), GridSource::Series4, 5.0, 0.0, 0.0, 0.2);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(g.h.at(k, i, j), g.h.at(k, j, i), 1e-13);
}

TEST(StencilGridBuild, XYLevelsMapToUV) {
    const auto g = build_centered_grid(hm(), GridSource::Series4, 1e3, 0.5, -0.5, 0.1, GridCoordinates::XY);
    EXPECT_NEAR(g.a(2), 1.0, 1e-14);
    EXPECT_NEAR(g.b(2), 0.0, 1e-14);
    // at a huge gap the series is the product of the marginals
    EXPECT_NEAR(g.h.at(1, 2, 2), std::log(f2_cdf(hm(), 0.5) * f2_cdf(hm(), -0.5)), 1e-7);
}

TEST(StencilGridBuild, InvalidInputs) {
    EXPECT_THROW(build_grid(hm(), GridSource::Series4, 0.05, 0, 1, 0, 1, 0.1, 0.1), std::invalid_argument);
    EXPECT_THROW(build_grid(hm(), GridSource::Series4, 2.0, 0, 1, 0, 1, 0.3, 0.1), std::invalid_argument);
    EXPECT_THROW(build_grid(hm(), GridSource::Series4, 2.0, 0, 0.1, 0, 1, 0.1, 0.1), std::invalid_argument);
    EXPECT_THROW(build_centered_grid(hm(), GridSource::Series4, 2.0, -8.5, -8.5, 0.1), GridError);
}

TEST(PdeResidual, SeriesResidualDecaysWithGap) {
    // the truncated series satisfies the equation up to its first omitted order
    const double r4 = pde_residual_center(build_centered_grid(hm(), GridSource::Series4, 4.0, -1.0, 0.5, 0.01))
                          .relative_residual;
    const double r8 = pde_residual_center(build_centered_grid(hm(), GridSource::Series4, 8.0, -1.0, 0.5, 0.01))
                          .relative_residual;
    EXPECT_GE(r4 / r8, 2.8);
}

TEST(PdeResidual, ExactSourceConverges) {
    const auto coarse = pde_residual_center(build_centered_grid(hm(), GridSource::ExactFredholm, 1.0, -1.0, 0.5, 0.02));
    const auto fine = pde_residual_center(build_centered_grid(hm(), GridSource::ExactFredholm, 1.0, -1.0, 0.5, 0.01));
    EXPECT_LT(fine.relative_residual, 1e-3);
    EXPECT_GT(coarse.relative_residual / fine.relative_residual, 3.0);
}
