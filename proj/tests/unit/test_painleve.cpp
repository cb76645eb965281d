#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "airyproc/airy_function.hpp"
#include "airyproc/numerics/quadrature.hpp"
#include "airyproc/painleve.hpp"
#include "shared_solution.hpp"

using namespace airyproc;
using airyproc::testing::hm;

TEST(Painleve, RightBoundaryMatchesAiry) {
    EXPECT_NEAR(q_at(hm(), 8.0), -airy_ai(8.0), 1e-10);
    EXPECT_NEAR(q_at(hm(), 8.0), -4.692207616e-8, 1e-13);
}

TEST(Painleve, LeftAsymptote) {
    const double expected = -2.0 * (1.0 + 1.0 / (8.0 * -512.0));
    EXPECT_NEAR(q_at(hm(), -8.0), expected, 5e-4);
    EXPECT_NEAR(q_at(hm(), -8.0), -1.99951, 5e-4);
}

TEST(Painleve, ValueAtOrigin) {
    EXPECT_NEAR(q_at(hm(), 0.0), -0.3670615515, 1e-6);
    EXPECT_NEAR(qp_at(hm(), 0.0), 0.2953721054, 1e-6);
}

TEST(Painleve, AsymptoticBranchesOutsideGrid) {
    EXPECT_DOUBLE_EQ(q_at(hm(), 13.0), -airy_ai(13.0));
    EXPECT_DOUBLE_EQ(qp_at(hm(), 13.0), -airy_ai_prime(13.0));
    const double a = -15.0;
    const double lead = -std::sqrt(-a / 2.0);
    EXPECT_NEAR(q_at(hm(), a), lead * (1.0 + 1.0 / (8.0 * a * a * a)), 1e-6);
    // the branch meets the solved grid continuously
    EXPECT_NEAR(q_at(hm(), -10.0 - 1e-12), q_at(hm(), -10.0), 1e-9);
}

TEST(Painleve, NegativeAndMonotone) {
    EXPECT_LT(q_at(hm(), -2.0), q_at(hm(), 0.0));
    EXPECT_LT(q_at(hm(), 0.0), q_at(hm(), 2.0));
    EXPECT_LT(q_at(hm(), 2.0), 0.0);
    for (std::size_t i = 0; i < hm().n_nodes(); ++i) {
        EXPECT_LT(hm().q_nodes()[i], 0.0);
        if (i > 0) {
            EXPECT_GT(hm().q_nodes()[i], hm().q_nodes()[i - 1]);
        }
    }
}

TEST(Painleve, OdeResidualByFiniteDifferences) {
    const auto& s = hm();
    const double h = s.mesh();
    const auto& q = s.q_nodes();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.n_nodes(); ++i) {
        const double a = s.node(i);
        const double fd = (q[i - 1] - 2.0 * q[i] + q[i + 1]) / (h * h);
        const double rhs = a * q[i] + 2.0 * q[i] * q[i] * q[i];
        worst = std::max(worst, std::fabs(fd - rhs) / (1.0 + std::fabs(fd)));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Painleve, FirstIntegralAtEveryNode) {
    const auto& s = hm();
    double worst = 0.0;
    for (std::size_t i = 0; i < s.n_nodes(); ++i) {
        const double a = s.node(i);
        const double q = s.q_nodes()[i], p = s.qp_nodes()[i];
        const double h = p * p - a * q * q - q * q * q * q;
        worst = std::max(worst, std::fabs(h - tails_at(s, a).gp));
    }
    EXPECT_LE(worst, 1e-8);
}

TEST(Painleve, MeshRefinement) {
    const auto fine = solve_hastings_mcleod(-10.0, 8.0, 2 * hm().n_nodes() - 1, 1e-13);
    for (double a : {-9.0, -4.3, -1.0, 0.0, 0.7, 3.3, 7.5}) EXPECT_NEAR(q_at(hm(), a), q_at(fine, a), 1e-8) << a;
    // off-node midpoints
    const double mid = hm().node(9000) + 0.5 * hm().mesh();
    EXPECT_NEAR(q_at(hm(), mid), q_at(fine, mid), 1e-8);
    EXPECT_NEAR(qp_at(hm(), mid), qp_at(fine, mid), 1e-8);
}

TEST(Painleve, WiderDomainAgrees) {
    const auto wide = solve_hastings_mcleod(-12.0, 10.0, 22001, 1e-13);
    EXPECT_NEAR(q_at(wide, 0.0), q_at(hm(), 0.0), 1e-9);
    EXPECT_NEAR(f2_cdf(wide, -2.0), f2_cdf(hm(), -2.0), 1e-9);
}

TEST(Painleve, InvalidOptions) {
    EXPECT_THROW(solve_hastings_mcleod(-10.0, 5.0), std::invalid_argument);
    EXPECT_THROW(solve_hastings_mcleod(-7.0, 8.0), std::invalid_argument);
    EXPECT_THROW(solve_hastings_mcleod(-10.0, 8.0, 1000), std::invalid_argument);
    EXPECT_THROW(solve_hastings_mcleod(8.0, -10.0), std::invalid_argument);
    EXPECT_THROW(solve_hastings_mcleod(-10.0, NAN), std::invalid_argument);
    PainleveOptions o;
    o.max_newton_iterations = 1;
    EXPECT_THROW(PainleveSolution::solve(o), NewtonDivergence);
}

TEST(TailIntegrals, VanishAtRightEdge) {
    const auto t = tails_at(hm(), 8.0);
    EXPECT_LT(t.gp, 1e-14);
    EXPECT_LT(t.g1p, 1e-14);
    EXPECT_LT(t.g2p, 1e-14);
    EXPECT_LE(t.g, 0.0);
    EXPECT_GT(t.g, -1e-14);
}

TEST(TailIntegrals, DerivativeOfGp) {
    for (double u : {-5.0, -1.0, 0.0, 2.5}) {
        const double h = 1e-4;
        const double d = (tails_at(hm(), u + h).gp - tails_at(hm(), u - h).gp) / (2 * h);
        const double q = q_at(hm(), u);
        EXPECT_NEAR(d, -q * q, 1e-6) << u;
    }
}

TEST(TailIntegrals, FirstIntegralAtSelectedPoints) {
    for (double u : {-4.0, -1.0, 0.0, 2.0}) {
        const double q = q_at(hm(), u), p = qp_at(hm(), u);
        EXPECT_NEAR(p * p - u * q * q - q * q * q * q, tails_at(hm(), u).gp, 1e-8) << u;
    }
}

TEST(TailIntegrals, IndependentQuadrature) {
    // direct Gauss-Legendre on the interpolant versus the cumulative tables
    const double u = -3.7;
    const auto rule = numerics::composite_gauss_legendre(20, u, 8.0, 60);
    double gp = 0.0, m1 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double a = rule.nodes[k], w = rule.weights[k];
        const double q = q_at(hm(), a), p = qp_at(hm(), a);
        gp += w * q * q;
        m1 += w * (u - a) * q * q;
        g1 += w * p * p;
        g2 += w * q * q * q * q;
    }
    const auto t = tails_at(hm(), u);
    EXPECT_NEAR(t.gp, gp, 1e-9 * gp);
    EXPECT_NEAR(t.g, m1, 1e-9 * std::fabs(m1));
    EXPECT_NEAR(t.g1p, g1, 1e-9 * g1);
    EXPECT_NEAR(t.g2p, g2, 1e-9 * g2);
}

TEST(TailIntegrals, MonotoneAndSigned) {
    TailIntegrals prev = tails_at(hm(), -10.0);
    for (double u = -9.9; u <= 12.0; u += 0.1) {
        const auto t = tails_at(hm(), u);
        EXPECT_LE(t.gp, prev.gp);
        EXPECT_LE(t.g1p, prev.g1p);
        EXPECT_LE(t.g2p, prev.g2p);
        EXPECT_GE(t.gp, 0.0);
        EXPECT_GE(t.g1p, 0.0);
        EXPECT_GE(t.g2p, 0.0);
        EXPECT_LE(t.g, 0.0);
        prev = t;
    }
}

TEST(TailIntegrals, BelowDomainThrows) {
    EXPECT_THROW(tails_at(hm(), -10.5), std::domain_error);
    EXPECT_NO_THROW(hm().tails_extended(-10.5));
}

TEST(TracyWidom, CdfEdgeAndReference) {
    EXPECT_NEAR(f2_cdf(hm(), 8.0), 1.0, 1e-12);
    EXPECT_NEAR(f2_cdf(hm(), 0.0), 0.96937282835526, 1e-12);
    EXPECT_LT(f2_cdf(hm(), -3.0), f2_cdf(hm(), 0.0));
    EXPECT_LT(f2_cdf(hm(), 0.0), f2_cdf(hm(), 3.0));
}

TEST(TracyWidom, CdfMonotoneInUnitInterval) {
    double prev = -1.0;
    for (double u = -14.0; u <= 12.0; u += 0.05) {
        const double f = f2_cdf(hm(), u);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
        EXPECT_GE(f, prev);
        prev = f;
    }
}

TEST(TracyWidom, DensityNormalizedAndMean) {
    const auto rule = numerics::composite_gauss_legendre(16, -10.0, 8.0, 36);
    double mass = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double p = f2_pdf(hm(), rule.nodes[k]);
        EXPECT_GE(p, 0.0);
        mass += rule.weights[k] * p;
        mean += rule.weights[k] * rule.nodes[k] * p;
    }
    EXPECT_NEAR(mass, 1.0, 1e-6);
    EXPECT_NEAR(mean, -1.7711, 1e-3);
    EXPECT_NEAR(mean, -1.7710868074, 1e-8);
}

TEST(TracyWidom, DensityMatchesFiniteDifference) {
    for (double u : {-4.0, -1.77, 0.0, 1.5}) {
        const double h = 1e-4;
        const double fd = (f2_cdf(hm(), u + h) - f2_cdf(hm(), u - h)) / (2 * h);
        EXPECT_NEAR(f2_pdf(hm(), u), fd, 1e-7) << u;
    }
    EXPECT_NEAR(f2_pdf(hm(), 0.0), 0.0669753071, 1e-9);
}

TEST(PainleveCache, RoundTrip) {
    std::stringstream ss;
    hm().write(ss);
    const auto back = PainleveSolution::read(ss);
    EXPECT_EQ(back.n_nodes(), hm().n_nodes());
    EXPECT_EQ(q_at(back, 0.123), q_at(hm(), 0.123));
    EXPECT_EQ(f2_cdf(back, -1.0), f2_cdf(hm(), -1.0));
    std::stringstream bad("not a cache file");
    EXPECT_THROW(PainleveSolution::read(bad), std::runtime_error);
}
