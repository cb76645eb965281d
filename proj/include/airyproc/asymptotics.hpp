#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "airyproc/fredholm.hpp"
#include "airyproc/painleve.hpp"

namespace airyproc {

/**
 * Derivative jet of g = log F2 and of the auxiliary w = 2g + g1 - g2 at one
 * point, all in closed form through the Painleve equation:
 *   g' = gp, g'' = -q^2, g''' = -2 q q', g'''' = -2 q'^2 - 2 q q''
 *   w' = 2 gp - q'^2 + q^4, w'' = -2 q^2 - 2 q' q'' + 4 q^3 q'.
 * Here g1' = -q'^2 and g2' = -q^4 are the derivatives of the tail
 * integrals g1p and g2p, which enter w with their integrated values.
 */
struct PointJet {
    double x = 0.0;
    double q = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;  // q and its first three derivatives
    std::array<double, 5> g{};                     // g, g', g'', g''', g''''
    std::array<double, 3> w{};                     // w, w', w''
    double g1p = 0.0, g2p = 0.0;
    double f2 = 0.0;  // F2 = exp(g)
};

inline PointJet point_jet(const PainleveSolution& sol, double x) {
    PointJet j;
    j.x = x;
    j.q = sol.q(x);
    j.q1 = sol.qp(x);
    j.q2 = x * j.q + 2.0 * j.q * j.q * j.q;
    j.q3 = j.q + x * j.q1 + 6.0 * j.q * j.q * j.q1;
    const TailIntegrals t = sol.tails_extended(x);
    j.g1p = t.g1p;
    j.g2p = t.g2p;
    j.g = {t.g, t.gp, -j.q * j.q, -2.0 * j.q * j.q1, -2.0 * j.q1 * j.q1 - 2.0 * j.q * j.q2};
    const double q2sq = j.q * j.q;
    j.w = {2.0 * t.g + t.g1p - t.g2p, 2.0 * t.gp - j.q1 * j.q1 + q2sq * q2sq,
           -2.0 * q2sq - 2.0 * j.q1 * j.q2 + 4.0 * q2sq * j.q * j.q1};
    j.f2 = std::exp(t.g);
    return j;
}

/// Building blocks of the large-t expansion at (u, v).
struct ExpansionTerms {
    double u = 0.0, v = 0.0;
    double g_u = 0.0, g_v = 0.0;
    double gp_u = 0.0, gp_v = 0.0;
    double g1p_u = 0.0, g1p_v = 0.0, g2p_u = 0.0, g2p_v = 0.0;
    double q_u = 0.0, q_v = 0.0, qp_u = 0.0, qp_v = 0.0;
    double f2_u = 0.0, f2_v = 0.0;
    double h2 = 0.0;
    double h4 = 0.0;
    double f4 = 0.0;
    double phi_uv = 0.0;
    double phi_vu = 0.0;
};

class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace asymptotics_detail {

// sum of terms in increasing magnitude
template <std::size_t N>
double ordered_sum(std::array<double, N> terms) {
    std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::fabs(a) < std::fabs(b); });
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

inline double h4_g_form(const PointJet& a, const PointJet& b) {
    const double ga1 = a.g[1], ga2 = a.g[2], gb1 = b.g[1], gb2 = b.g[2];
    return 0.5 * (ga2 * gb1 * gb1 + gb2 * ga1 * ga1 + ga2 * gb2) + ga1 * b.w[0] + gb1 * a.w[0];
}

inline double h4_q_form_half(const PointJet& a, const PointJet& b) {
    return a.q * a.q * (0.25 * b.q * b.q - 0.5 * b.g[1] * b.g[1]) + a.g[1] * b.w[0];
}

inline double h4_q_form(const PointJet& a, const PointJet& b) {
    return h4_q_form_half(a, b) + h4_q_form_half(b, a);
}

inline double phi_from_jets(const PointJet& a, const PointJet& b) {
    const double bracket = ordered_sum<3>({0.25 * a.g[1] * a.g[1] * b.g[1] * b.g[1],
                                           a.q * a.q * (0.25 * b.q * b.q - 0.5 * b.g[1] * b.g[1]),
                                           b.w[0] * a.g[1]});
    return a.f2 * b.f2 * bracket;
}

}  // namespace asymptotics_detail

/// Tolerance for agreement of the two closed forms of h4.
inline constexpr double kH4FormTolerance = 1e-8;

inline ExpansionTerms expansion_terms_from_jets(const PointJet& a, const PointJet& b) {
    using namespace asymptotics_detail;
    ExpansionTerms e;
    e.u = a.x;
    e.v = b.x;
    e.g_u = a.g[0];
    e.g_v = b.g[0];
    e.gp_u = a.g[1];
    e.gp_v = b.g[1];
    e.g1p_u = a.g1p;
    e.g1p_v = b.g1p;
    e.g2p_u = a.g2p;
    e.g2p_v = b.g2p;
    e.q_u = a.q;
    e.q_v = b.q;
    e.qp_u = a.q1;
    e.qp_v = b.q1;
    e.f2_u = a.f2;
    e.f2_v = b.f2;
    e.h2 = a.g[1] * b.g[1];
    const double hq = h4_q_form(a, b);
    const double hg = h4_g_form(a, b);
    if (std::fabs(hq - hg) > kH4FormTolerance)
        throw ConsistencyError("h4_term: closed forms disagree by " + std::to_string(std::fabs(hq - hg)));
    e.h4 = hq;
    e.f4 = e.h4 + 0.5 * e.h2 * e.h2;
    e.phi_uv = phi_from_jets(a, b);
    e.phi_vu = phi_from_jets(b, a);
    return e;
}

inline ExpansionTerms expansion_terms(const PainleveSolution& sol, double u, double v) {
    return expansion_terms_from_jets(point_jet(sol, u), point_jet(sol, v));
}

/// h2(u, v) = g'(u) g'(v).
inline double h2_term(const PainleveSolution& sol, double u, double v) {
    return sol.tails_extended(u).gp * sol.tails_extended(v).gp;
}

/// h4(u, v), evaluated in the q-form after checking it against the g-form.
inline double h4_term(const PainleveSolution& sol, double u, double v) { return expansion_terms(sol, u, v).h4; }

/// Both closed forms of h4, for auditing.
struct H4Forms {
    double q_form = 0.0;
    double g_form = 0.0;
};

inline H4Forms h4_forms(const PainleveSolution& sol, double u, double v) {
    const PointJet a = point_jet(sol, u), b = point_jet(sol, v);
    return {asymptotics_detail::h4_q_form(a, b), asymptotics_detail::h4_g_form(a, b)};
}

/// Phi(u, v), the non-symmetric 1/t^4 coefficient.
inline double phi(const PainleveSolution& sol, double u, double v) {
    return asymptotics_detail::phi_from_jets(point_jet(sol, u), point_jet(sol, v));
}

/**
 * F2(u)F2(v) + F2'(u)F2'(v)/t^2 [+ (Phi(u,v) + Phi(v,u))/t^4 when order = 4].
 */
inline double joint_series(const PainleveSolution& sol, double t, double u, double v, int order = 4) {
    if (!(t > 0.0)) throw std::invalid_argument("joint_series: t must be positive");
    if (order != 2 && order != 4) throw std::invalid_argument("joint_series: order must be 2 or 4");
    const PointJet a = point_jet(sol, u), b = point_jet(sol, v);
    const double fa = a.f2, fb = b.f2;
    const double pa = fa * a.g[1], pb = fb * b.g[1];
    double p = fa * fb + pa * pb / (t * t);
    if (order == 4) {
        const double t4 = t * t * t * t;
        p += (asymptotics_detail::phi_from_jets(a, b) + asymptotics_detail::phi_from_jets(b, a)) / t4;
    }
    return p;
}

/// Uniform trapezoid abscissae on [-window, window].
inline std::vector<double> symmetric_mesh(double window, double mesh) {
    const auto cells = static_cast<std::size_t>(std::llround(2.0 * window / mesh));
    if (cells < 2 || std::fabs(cells * mesh - 2.0 * window) > 1e-9 * window)
        throw std::invalid_argument("mesh must divide 2 * window");
    std::vector<double> x(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) x[i] = -window + mesh * static_cast<double>(i);
    return x;
}

inline double trapezoid_weight(std::size_t i, std::size_t n, double mesh) {
    return (i == 0 || i + 1 == n) ? 0.5 * mesh : mesh;
}

/**
 * c = 2 * double integral of Phi over [-window, window]^2 by the trapezoid
 * rule. The integrand decays super-exponentially as u + v -> +inf (Airy
 * tails) and like F2(min(u, v)) as either argument -> -inf, so the
 * truncation error for window >= 8 is below 1e-12 and the trapezoid rule
 * converges spectrally.
 */
inline double c_constant(const PainleveSolution& sol, double window = 10.0, double mesh = 0.05) {
    if (!(window >= 8.0)) throw std::invalid_argument("c_constant: window must be >= 8");
    if (!(mesh > 0.0 && mesh <= 0.1)) throw std::invalid_argument("c_constant: mesh must be in (0, 0.1]");
    const auto x = symmetric_mesh(window, mesh);
    std::vector<PointJet> jets(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) jets[i] = point_jet(sol, x[i]);
    const std::size_t n = x.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += trapezoid_weight(j, n, mesh) * asymptotics_detail::phi_from_jets(jets[i], jets[j]);
        total += trapezoid_weight(i, n, mesh) * row;
    }
    return 2.0 * total;
}

struct CovarianceResult {
    double t = 0.0;
    double covariance = 0.0;
    double scaled = 0.0;       ///< cov * t^2
    double coefficient = 0.0;  ///< (cov - 1/t^2) * t^4
};

/**
 * Cov(A(0), A(t)) by Hoeffding's identity:
 *   double integral over [-window, window]^2 of P(A(0)<=u, A(t)<=v) - F2(u)F2(v).
 * Both terms come from one Fredholm discretization so its bias cancels.
 */
inline CovarianceResult covariance_exact(double t, double window = 8.0, double mesh = 0.25,
                                         const Discretization& disc = {}, unsigned workers = 0) {
    if (!(t > 0.0)) throw std::invalid_argument("covariance_exact: t must be positive");
    if (!(window >= 8.0)) throw std::invalid_argument("covariance_exact: window must be >= 8");
    if (!(mesh > 0.0 && mesh <= 0.25)) throw std::invalid_argument("covariance_exact: mesh must be in (0, 0.25]");
    const auto x = symmetric_mesh(window, mesh);
    const TwoTimeEvaluator ev(t, x, x, disc, 0.0, workers);
    const auto joint = ev.joint_table(workers);
    const std::size_t n = x.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = ev.marginal_u(i);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += trapezoid_weight(j, n, mesh) * (joint(i, j) - f[i] * f[j]);
        total += trapezoid_weight(i, n, mesh) * row;
    }
    CovarianceResult r;
    r.t = t;
    r.covariance = total;
    r.scaled = total * t * t;
    r.coefficient = (total - 1.0 / (t * t)) * t * t * t * t;
    return r;
}

}  // namespace airyproc
