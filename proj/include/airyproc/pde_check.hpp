#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "airyproc/asymptotics.hpp"
#include "airyproc/fredholm.hpp"
#include "airyproc/numerics/finite_difference.hpp"
#include "airyproc/numerics/parallel.hpp"
#include "airyproc/painleve.hpp"

namespace airyproc {

enum class GridSource { ExactFredholm, Series4 };

/// Spatial axes of a stencil grid: (u, v) thresholds or (x, y) = (u - v, u + v).
enum class GridCoordinates { UV, XY };

/**
 * h = log P(A(0) <= u, A(t) <= v) sampled on a uniform (t, a, b) lattice
 * with three time levels t0 - dt, t0, t0 + dt. (a, b) is (u, v) or (x, y)
 * depending on `coords`; in the latter case u = (y + x)/2, v = (y - x)/2.
 */
struct StencilGrid {
    double t0 = 0.0;
    double mesh = 0.0;
    double t_mesh = 0.0;
    GridCoordinates coords = GridCoordinates::UV;
    GridSource source = GridSource::ExactFredholm;
    numerics::LatticeValues h;

    std::size_t extent_a() const { return h.extent[1]; }
    std::size_t extent_b() const { return h.extent[2]; }
    double a(std::size_t i) const { return h.coordinate(1, i); }
    double b(std::size_t j) const { return h.coordinate(2, j); }
    double t(std::size_t k) const { return h.coordinate(0, k); }
};

struct ResidualReport {
    std::array<double, 3> point{};  ///< (t, u, v)
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  ///< lhs - rhs
    double scale = 0.0;     ///< largest magnitude among the individual terms
    double relative_residual = 0.0;
    std::vector<double> terms;  ///< lhs followed by each right-hand-side group
};

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace pde_detail {

inline std::size_t count_points(double lo, double hi, double mesh) {
    const double cells = (hi - lo) / mesh;
    const auto n = static_cast<long long>(std::llround(cells));
    if (n < 0 || std::fabs(cells - static_cast<double>(n)) > 1e-6)
        throw std::invalid_argument("build_grid: range must be a whole number of mesh cells");
    return static_cast<std::size_t>(n) + 1;
}

inline std::pair<double, double> to_uv(GridCoordinates c, double a, double b) {
    if (c == GridCoordinates::UV) return {a, b};
    return {0.5 * (b + a), 0.5 * (b - a)};
}

// exact keys for levels built from a lattice; rounding merges values equal up to roundoff
inline long long level_key(double x) { return std::llround(x * 1e9); }

}  // namespace pde_detail

/**
 * Fills a stencil grid over [a_lo, a_hi] x [b_lo, b_hi] with spacing `mesh`
 * at times t0 - t_mesh, t0, t0 + t_mesh.
 *
 * The exact source builds one Fredholm evaluator per time level, all with
 * the z-layout and quadrature order of t0, so the discretization bias is
 * common to the three levels and drops out of the time difference.
 */
inline StencilGrid build_grid(const PainleveSolution& sol, GridSource source, double t0, double a_lo, double a_hi,
                              double b_lo, double b_hi, double mesh, double t_mesh,
                              GridCoordinates coords = GridCoordinates::UV, const Discretization& disc = {},
                              unsigned workers = 0) {
    using namespace pde_detail;
    if (!(mesh > 0.0) || !(t_mesh > 0.0)) throw std::invalid_argument("build_grid: mesh sizes must be positive");
    if (!(t0 - t_mesh > 0.0)) throw std::invalid_argument("build_grid: t0 - t_mesh must be positive");
    const std::size_t na = count_points(a_lo, a_hi, mesh);
    const std::size_t nb = count_points(b_lo, b_hi, mesh);
    if (na < 3 || nb < 3) throw std::invalid_argument("build_grid: grid needs at least 3 points per axis");

    StencilGrid g;
    g.t0 = t0;
    g.mesh = mesh;
    g.t_mesh = t_mesh;
    g.coords = coords;
    g.source = source;
    g.h = numerics::LatticeValues({3, na, nb}, {t0 - t_mesh, a_lo, b_lo}, {t_mesh, mesh, mesh});

    // distinct u and v levels
    std::map<long long, std::size_t> u_index, v_index;
    std::vector<double> u_levels, v_levels;
    std::vector<std::pair<std::size_t, std::size_t>> pair_of(na * nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            const auto [u, v] = to_uv(coords, g.a(i), g.b(j));
            auto iu = u_index.try_emplace(level_key(u), u_levels.size());
            if (iu.second) u_levels.push_back(u);
            auto iv = v_index.try_emplace(level_key(v), v_levels.size());
            if (iv.second) v_levels.push_back(v);
            pair_of[i * nb + j] = {iu.first->second, iv.first->second};
        }

    for (std::size_t k = 0; k < 3; ++k) {
        const double t = g.t(k);
        std::vector<double> p(na * nb);
        if (source == GridSource::ExactFredholm) {
            const TwoTimeEvaluator ev(t, u_levels, v_levels, disc, t0, workers);
            numerics::parallel_for(
                na * nb, [&](std::size_t idx) { p[idx] = ev.joint(pair_of[idx].first, pair_of[idx].second); },
                workers);
        } else {
            for (std::size_t idx = 0; idx < na * nb; ++idx)
                p[idx] = joint_series(sol, t, u_levels[pair_of[idx].first], v_levels[pair_of[idx].second], 4);
        }
        for (std::size_t idx = 0; idx < na * nb; ++idx) {
            if (!(p[idx] >= 1e-12))
                throw GridError("build_grid: probability " + std::to_string(p[idx]) +
                                " underflows; thresholds are too negative");
            g.h.at(k, idx / nb, idx % nb) = std::log(p[idx]);
        }
    }
    return g;
}

/// Grid of (2 * half + 1)^2 points centred on the physical point (u, v).
inline StencilGrid build_centered_grid(const PainleveSolution& sol, GridSource source, double t0, double u, double v,
                                       double mesh, GridCoordinates coords = GridCoordinates::UV,
                                       const Discretization& disc = {}, std::size_t half = 2, unsigned workers = 0) {
    double a = u, b = v;
    if (coords == GridCoordinates::XY) {
        a = u - v;
        b = u + v;
    }
    const double w = mesh * static_cast<double>(half);
    return build_grid(sol, source, t0, a - w, a + w, b - w, b + w, mesh, mesh, coords, disc, workers);
}

namespace pde_detail {

inline ResidualReport finish(std::array<double, 3> pt, double lhs, const std::vector<double>& rhs_terms) {
    ResidualReport r;
    r.point = pt;
    r.lhs = lhs;
    r.terms.push_back(lhs);
    double rhs = 0.0, scale = std::fabs(lhs);
    for (double t : rhs_terms) {
        rhs += t;
        scale = std::max(scale, std::fabs(t));
        r.terms.push_back(t);
    }
    r.rhs = rhs;
    r.residual = lhs - rhs;
    if (!(scale > 0.0)) throw std::domain_error("pde residual: all terms vanish, relative residual undefined");
    r.scale = scale;
    r.relative_residual = std::fabs(r.residual) / scale;
    return r;
}

}  // namespace pde_detail

/**
 * Residual of the (u, v) form of the two-time PDE at lattice point
 * (1, i, j) (the centre time level):
 *   t d/dt (h_uu - h_vv)
 *     = h_uuv (2 h_vv + h_uv - h_uu + u - v - t^2)
 *     - h_uvv (2 h_uu + h_uv - h_vv - u + v - t^2)
 *     + h_uuu (h_uv + h_vv) - h_vvv (h_uu + h_uv).
 * terms = {lhs, group1, group2, group3, group4}.
 */
inline ResidualReport pde_residual_uv(const StencilGrid& g, std::size_t i, std::size_t j) {
    if (g.coords != GridCoordinates::UV) throw std::invalid_argument("pde_residual_uv: grid is not in (u, v) coordinates");
    const numerics::LatticePoint p{1, i, j};
    auto d = [&](int ot, int ou, int ov) { return numerics::fd_partial(g.h, {ot, ou, ov}, p); };
    const double t = g.t(1), u = g.a(i), v = g.b(j);
    const double huu = d(0, 2, 0), hvv = d(0, 0, 2), huv = d(0, 1, 1);
    const double lhs = t * (d(1, 2, 0) - d(1, 0, 2));
    const double t2 = t * t;
    const std::vector<double> rhs{d(0, 2, 1) * (2.0 * hvv + huv - huu + u - v - t2),
                                  -d(0, 1, 2) * (2.0 * huu + huv - hvv - u + v - t2), d(0, 3, 0) * (huv + hvv),
                                  -d(0, 0, 3) * (huu + huv)};
    return pde_detail::finish({t, u, v}, lhs, rhs);
}

/**
 * Residual of the (x, y) form at lattice point (1, i, j):
 *   2t h_txy = t^2 d/dx (h_xx - h_yy) - x d/dy (h_xx - h_yy) + 8 {h_xy, h_yy}_y
 * with the Wronskian {f, g}_y = f_y g - f g_y. terms = {lhs, group1, group2, group3};
 * point is reported in (t, u, v).
 */
inline ResidualReport pde_residual_xy(const StencilGrid& g, std::size_t i, std::size_t j) {
    if (g.coords != GridCoordinates::XY) throw std::invalid_argument("pde_residual_xy: grid is not in (x, y) coordinates");
    const numerics::LatticePoint p{1, i, j};
    auto d = [&](int ot, int ox, int oy) { return numerics::fd_partial(g.h, {ot, ox, oy}, p); };
    const double t = g.t(1), x = g.a(i), y = g.b(j);
    const double lhs = 2.0 * t * d(1, 1, 1);
    const std::vector<double> rhs{t * t * (d(0, 3, 0) - d(0, 1, 2)), -x * (d(0, 2, 1) - d(0, 0, 3)),
                                  8.0 * (d(0, 1, 2) * d(0, 0, 2) - d(0, 1, 1) * d(0, 0, 3))};
    return pde_detail::finish({t, 0.5 * (y + x), 0.5 * (y - x)}, lhs, rhs);
}

/// Residual at the centre of a grid built by build_centered_grid.
inline ResidualReport pde_residual_center(const StencilGrid& g) {
    const std::size_t i = g.extent_a() / 2, j = g.extent_b() / 2;
    return g.coords == GridCoordinates::UV ? pde_residual_uv(g, i, j) : pde_residual_xy(g, i, j);
}

/**
 * Finite-difference L f = (d/du - d/dv) d^2 f / du dv = f_uuv - f_uvv at
 * (u, v), second-order central stencils with spacing `mesh`.
 */
template <class F>
double hierarchy_L(F&& f, double u, double v, double mesh) {
    const auto s1 = numerics::detail::central_stencil(1);
    const auto s2 = numerics::detail::central_stencil(2);
    double uuv = 0.0, uvv = 0.0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            const double c1 = s2[a + 2] * s1[b + 2];
            const double c2 = s1[a + 2] * s2[b + 2];
            if (c1 == 0.0 && c2 == 0.0) continue;
            const double fv = f(u + a * mesh, v + b * mesh);
            uuv += c1 * fv;
            uvv += c2 * fv;
        }
    return (uuv - uvv) / (mesh * mesh * mesh);
}

struct HierarchyReport {
    double u = 0.0, v = 0.0;
    double lhs = 0.0;       ///< closed-form L applied to the term
    double lhs_fd = 0.0;    ///< finite-difference L (mesh 1e-3), diagnostic only
    double rhs = 0.0;       ///< g-form right-hand side
    double rhs_alt = 0.0;   ///< q-form right-hand side (order 4 only; equals rhs for order 2)
    double residual = 0.0;  ///< lhs - rhs
    double forms_gap = 0.0; ///< |rhs - rhs_alt|
};

namespace pde_detail {

// L(a(u) b(v)) = a''(u) b'(v) - a'(u) b''(v) for a separable term
inline double L_separable(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[2] * b[1] - a[1] * b[2];
}

// jets (value, first, second derivative) of the factors of h4
inline std::array<double, 3> jet_g1(const PointJet& p) { return {p.g[1], p.g[2], p.g[3]}; }
inline std::array<double, 3> jet_g2(const PointJet& p) { return {p.g[2], p.g[3], p.g[4]}; }
inline std::array<double, 3> jet_g1_sq(const PointJet& p) {
    return {p.g[1] * p.g[1], 2.0 * p.g[1] * p.g[2], 2.0 * p.g[2] * p.g[2] + 2.0 * p.g[1] * p.g[3]};
}
inline std::array<double, 3> jet_w(const PointJet& p) { return {p.w[0], p.w[1], p.w[2]}; }

inline double L_h4_closed(const PointJet& a, const PointJet& b) {
    return 0.5 * (L_separable(jet_g2(a), jet_g1_sq(b)) + L_separable(jet_g1_sq(a), jet_g2(b)) +
                  L_separable(jet_g2(a), jet_g2(b))) +
           L_separable(jet_g1(a), jet_w(b)) + L_separable(jet_w(a), jet_g1(b));
}

inline double rhs_order2(const PointJet& a, const PointJet& b) { return a.g[3] * b.g[2] - b.g[3] * a.g[2]; }

// g-form right-hand side at order 4
inline double rhs_order4_g(const PointJet& a, const PointJet& b) {
    const auto& gu = a.g;
    const auto& gv = b.g;
    const double u = a.x, v = b.x;
    return 2.0 * (gu[3] * gv[2] * gv[2] - gv[3] * gu[2] * gu[2]) + gu[3] * gv[3] * (gu[1] - gv[1]) +
           0.5 * (gu[4] * 2.0 * gv[1] * gv[2] - gv[4] * 2.0 * gu[1] * gu[2]) +
           (gu[3] * gv[2] + gv[3] * gu[2]) * (u - v) + 2.0 * (gu[3] * gv[1] - gv[3] * gu[1]);
}

// one half of the q-form; the full q-form is half(b, a) - half(a, b)
inline double rhs_order4_q_half(const PointJet& a, const PointJet& b) {
    const double qa = a.q, qa1 = a.q1, qa2 = a.q2;
    const double qb = b.q, qb1 = b.q1, qb2 = b.q2;
    return 2.0 * (2.0 * qa * qa1 * (qb * qb1 + 1.0) - qa * qa2 * qb * qb - qa1 * qa1 * qb * qb) * b.g[1] +
           2.0 * qa * (qa * qb1 * qb2 + qa1 * qb * qb2 - 2.0 * qa * qb * qb * qb * qb1);
}

}  // namespace pde_detail

/// Tolerance for mutual agreement of the two right-hand-side forms at order 4.
inline constexpr double kRhsFormTolerance = 1e-7;
/// Mesh of the diagnostic finite-difference L.
inline constexpr double kHierarchyFdMesh = 1e-3;

/// L[h2] - RHS at order 2 with h2 = g'(u) g'(v).
inline HierarchyReport hierarchy_order2_residual(const PainleveSolution& sol, double u, double v) {
    const PointJet a = point_jet(sol, u), b = point_jet(sol, v);
    HierarchyReport r;
    r.u = u;
    r.v = v;
    r.lhs = pde_detail::L_separable(pde_detail::jet_g1(a), pde_detail::jet_g1(b));
    r.lhs_fd = hierarchy_L([&](double x, double y) { return h2_term(sol, x, y); }, u, v, kHierarchyFdMesh);
    r.rhs = pde_detail::rhs_order2(a, b);
    r.rhs_alt = r.rhs;
    r.residual = r.lhs - r.rhs;
    return r;
}

/// Antisymmetric right-hand side at order 2: g'''(u) g''(v) - g'''(v) g''(u).
inline double hierarchy_order2_rhs(const PainleveSolution& sol, double u, double v) {
    return pde_detail::rhs_order2(point_jet(sol, u), point_jet(sol, v));
}

/**
 * L[h4] - RHS at order 4. The right-hand side is evaluated in its g-form
 * and in its q-form (g eliminated through the Painleve equation); the two
 * must agree to kRhsFormTolerance or ConsistencyError is thrown.
 * The q-form is assembled as half(v, u) - half(u, v); with the opposite
 * orientation it equals minus the g-form.
 */
inline HierarchyReport hierarchy_order4_residual(const PainleveSolution& sol, double u, double v) {
    using namespace pde_detail;
    const PointJet a = point_jet(sol, u), b = point_jet(sol, v);
    HierarchyReport r;
    r.u = u;
    r.v = v;
    r.lhs = L_h4_closed(a, b);
    r.lhs_fd = hierarchy_L([&](double x, double y) { return h4_term(sol, x, y); }, u, v, kHierarchyFdMesh);
    r.rhs = rhs_order4_g(a, b);
    r.rhs_alt = rhs_order4_q_half(b, a) - rhs_order4_q_half(a, b);
    r.forms_gap = std::fabs(r.rhs - r.rhs_alt);
    if (r.forms_gap > kRhsFormTolerance)
        throw ConsistencyError("hierarchy_order4_residual: g-form and q-form differ by " + std::to_string(r.forms_gap));
    r.residual = r.lhs - r.rhs;
    return r;
}

/// q-form of the order-4 right-hand side in the literal half(u, v) - half(v, u) orientation.
inline double hierarchy_order4_rhs_literal(const PainleveSolution& sol, double u, double v) {
    const PointJet a = point_jet(sol, u), b = point_jet(sol, v);
    return pde_detail::rhs_order4_q_half(a, b) - pde_detail::rhs_order4_q_half(b, a);
}

}  // namespace airyproc
