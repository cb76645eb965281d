#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "airyproc/airy_function.hpp"
#include "airyproc/numerics/dense_matrix.hpp"
#include "airyproc/numerics/parallel.hpp"
#include "airyproc/numerics/quadrature.hpp"

namespace airyproc {

/// Discretization knobs shared by every Fredholm evaluation.
struct Discretization {
    double truncation = 16.0;       ///< window length L above each threshold
    std::size_t quad_order = 64;    ///< Gauss-Legendre points on [u, u + L]
    std::size_t z_quad_order = 16;  ///< Gauss-Legendre points per z-panel

    void validate() const {
        if (!(truncation > 0.0) || !std::isfinite(truncation))
            throw std::invalid_argument("Discretization: truncation must be positive");
        if (quad_order < 8) throw std::invalid_argument("Discretization: quad_order must be >= 8");
        if (z_quad_order < 8) throw std::invalid_argument("Discretization: z_quad_order must be >= 8");
    }

    /// The coarse companion used for refinement_error: (m_q / 2, L - 4).
    Discretization coarsened() const {
        Discretization c = *this;
        c.quad_order = std::max<std::size_t>(8, quad_order / 2);
        c.truncation = truncation > 8.0 ? truncation - 4.0 : 0.5 * truncation;
        return c;
    }
};

/**
 * A discretized extended-Airy-kernel problem: P(A(t_1) <= u_1, ..., A(t_m) <= u_m).
 */
struct KernelSpec {
    std::vector<double> times;
    std::vector<double> thresholds;
    double truncation = 16.0;
    std::size_t quad_order = 64;
    std::size_t z_quad_order = 16;

    Discretization discretization() const { return {truncation, quad_order, z_quad_order}; }

    void validate() const {
        if (times.empty() || times.size() != thresholds.size())
            throw std::invalid_argument("KernelSpec: times and thresholds must be nonempty and of equal length");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(thresholds[i]))
                throw std::invalid_argument("KernelSpec: non-finite time or threshold");
            if (i > 0 && times[i] < times[i - 1])
                throw std::invalid_argument("KernelSpec: times must be weakly increasing");
        }
        discretization().validate();
    }
};

struct FredholmResult {
    double value = 0.0;
    double refinement_error = 0.0;
    std::size_t matrix_size = 0;
};

class FredholmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lowest threshold accepted by the Fredholm routines.
inline constexpr double kLowestThreshold = -10.0;

/**
 * Equal-time Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y), with the
 * confluent value Ai'(x)^2 - x Ai(x)^2 on the diagonal.
 */
inline double airy_kernel(double x, double y) {
    const double d = x - y;
    if (std::fabs(d) < 1e-7 * (1.0 + std::fabs(x))) {
        const double m = 0.5 * (x + y);
        const AiryPair p = airy_pair(m);
        return p.aip * p.aip - m * p.ai * p.ai;
    }
    const AiryPair px = airy_pair(x);
    const AiryPair py = airy_pair(y);
    return (px.ai * py.aip - px.aip * py.ai) / d;
}

namespace fredholm_detail {

// Ai(x) for x >= kAiryCut is below 1e-16, so integrands carrying such a
// factor are dropped.
inline constexpr double kAiryCut = 14.0;
// exp(-kDecayExponent) bounds the neglected part of a damped z-integral.
inline constexpr double kDecayExponent = 40.0;
// Below this backward time gap the direct z-integral becomes long and
// oscillatory; the Gaussian-subtracted form is used instead.
inline constexpr double kDirectMinGap = 2.0 / 3.0;
inline constexpr std::size_t kMaxQuadOrder = 600;

enum class Branch { Equal, Forward, BackwardDirect, BackwardGaussian };

/// z-quadrature for one time gap tau = t_i - t_j.
struct ZLayout {
    Branch branch = Branch::Equal;
    double tau = 0.0;
    numerics::Quadrature rule;
};

inline numerics::Quadrature panel_rule(double z_max, double panel, std::size_t order) {
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(z_max / panel)));
    return numerics::composite_gauss_legendre(order, 0.0, z_max, panels);
}

inline Branch branch_for(double tau) {
    if (tau == 0.0) return Branch::Equal;
    if (tau > 0.0) return Branch::Forward;
    return -tau >= kDirectMinGap ? Branch::BackwardDirect : Branch::BackwardGaussian;
}

/**
 * z-layout for gap tau. `layout_tau` selects branch and integration range
 * (it may differ from tau so that nearby gaps share one layout);
 * `min_arg` is the smallest spatial argument that will be paired with it.
 */
inline ZLayout make_layout(double tau, double layout_tau, double min_arg, std::size_t order) {
    ZLayout lay;
    lay.tau = tau;
    lay.branch = branch_for(layout_tau);
    if ((tau > 0.0) != (layout_tau > 0.0) || tau == 0.0)
        throw std::invalid_argument("make_layout: tau and layout_tau must share a sign and be nonzero");
    const double decay_reach = std::max(1.0, kAiryCut - min_arg);
    switch (lay.branch) {
        case Branch::Forward:
            lay.rule = panel_rule(std::min(decay_reach, kDecayExponent / layout_tau), 1.0, order);
            break;
        case Branch::BackwardDirect:
            lay.rule = panel_rule(kDecayExponent / -layout_tau, 0.5, order);
            break;
        case Branch::BackwardGaussian:
            lay.rule = panel_rule(decay_reach, 1.0, order);
            break;
        case Branch::Equal:
            break;
    }
    return lay;
}

/// Full-line integral of exp(s z) Ai(x + z) Ai(y + z), s > 0.
inline double gaussian_term(double s, double x, double y) {
    const double d = x - y;
    return std::exp(s * s * s / 12.0 - 0.5 * s * (x + y) - d * d / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s);
}

/// Quadrature order needed to resolve the Gaussian of width sqrt(2 s) on [0, L].
inline std::size_t required_quad_order(double s, double truncation) {
    const double width = std::sqrt(2.0 * s);
    const double m = 1.5 * std::numbers::pi * truncation / (2.0 * width);
    return static_cast<std::size_t>(std::ceil(m));
}

/// Smallest |tau| among gaps that use the Gaussian branch (0 if none).
inline double smallest_gaussian_gap(std::span<const double> times) {
    double best = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double tau = times[i] - times[j];
            if (branch_for(tau) == Branch::BackwardGaussian && (best == 0.0 || -tau < best)) best = -tau;
        }
    return best;
}

inline std::size_t effective_quad_order(const Discretization& d, double gaussian_gap) {
    if (gaussian_gap <= 0.0) return d.quad_order;
    return std::max(d.quad_order, std::min(kMaxQuadOrder, required_quad_order(gaussian_gap, d.truncation)));
}

/// Kernel entry for a given layout (pointwise z-quadrature).
inline double kernel_entry(const ZLayout& lay, double x, double y) {
    const auto& r = lay.rule;
    double s = 0.0;
    switch (lay.branch) {
        case Branch::Equal:
            return airy_kernel(x, y);
        case Branch::Forward:
            for (std::size_t k = 0; k < r.size(); ++k)
                s += r.weights[k] * std::exp(-lay.tau * r.nodes[k]) * airy_ai(x + r.nodes[k]) * airy_ai(y + r.nodes[k]);
            return s;
        case Branch::BackwardDirect:
            for (std::size_t k = 0; k < r.size(); ++k)
                s += r.weights[k] * std::exp(lay.tau * r.nodes[k]) * airy_ai(x - r.nodes[k]) * airy_ai(y - r.nodes[k]);
            return -s;
        case Branch::BackwardGaussian:
            for (std::size_t k = 0; k < r.size(); ++k)
                s += r.weights[k] * std::exp(-lay.tau * r.nodes[k]) * airy_ai(x + r.nodes[k]) * airy_ai(y + r.nodes[k]);
            return s - gaussian_term(-lay.tau, x, y);
    }
    return 0.0;
}

/**
 * Factor table T[s][k] = Ai(u + xi_s + sign * z_k) * sqrt(w_k exp(-tau_eff z_k)) * sqrt(w_s)
 * so that off-diagonal Nystrom blocks become products T_i T_j^T.
 */
inline numerics::DenseMatrix factor_table(const ZLayout& lay, double u, const numerics::Quadrature& xi) {
    const auto& r = lay.rule;
    numerics::DenseMatrix t(xi.size(), r.size());
    std::vector<double> zw(r.size());
    const double direction = lay.branch == Branch::BackwardDirect ? -1.0 : 1.0;
    const double damping = std::fabs(lay.tau) * (lay.branch == Branch::BackwardGaussian ? -1.0 : 1.0);
    for (std::size_t k = 0; k < r.size(); ++k) zw[k] = std::sqrt(r.weights[k] * std::exp(-damping * r.nodes[k]));
    for (std::size_t s = 0; s < xi.size(); ++s) {
        const double sw = std::sqrt(xi.weights[s]);
        auto row = t.row(s);
        for (std::size_t k = 0; k < r.size(); ++k) row[k] = airy_ai(u + xi.nodes[s] + direction * r.nodes[k]) * zw[k] * sw;
    }
    return t;
}

/// Symmetrized equal-time block sqrt(w) K_Ai sqrt(w) on u + xi.
inline numerics::DenseMatrix equal_time_block(double u, const numerics::Quadrature& xi) {
    const std::size_t m = xi.size();
    std::vector<AiryPair> p(m);
    for (std::size_t s = 0; s < m; ++s) p[s] = airy_pair(u + xi.nodes[s]);
    numerics::DenseMatrix b(m, m);
    for (std::size_t r = 0; r < m; ++r) {
        const double x = u + xi.nodes[r];
        for (std::size_t s = r; s < m; ++s) {
            const double y = u + xi.nodes[s];
            double k;
            if (r == s)
                k = p[r].aip * p[r].aip - x * p[r].ai * p[r].ai;
            else
                k = (p[r].ai * p[s].aip - p[r].aip * p[s].ai) / (x - y);
            const double v = std::sqrt(xi.weights[r] * xi.weights[s]) * k;
            b(r, s) = v;
            b(s, r) = v;
        }
    }
    return b;
}

/// sqrt(w) phi(x, y) sqrt(w) block for the Gaussian-subtracted branch.
inline numerics::DenseMatrix gaussian_block(double s_gap, double u, double v, const numerics::Quadrature& xi) {
    const std::size_t m = xi.size();
    numerics::DenseMatrix g(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s < m; ++s)
            g(r, s) = std::sqrt(xi.weights[r] * xi.weights[s]) *
                      gaussian_term(s_gap, u + xi.nodes[r], v + xi.nodes[s]);
    return g;
}

/// Off-diagonal block from factor tables, including the sign and Gaussian correction.
inline numerics::DenseMatrix cross_block(const ZLayout& lay, const numerics::DenseMatrix& ti,
                                         const numerics::DenseMatrix& tj, double ui, double uj,
                                         const numerics::Quadrature& xi) {
    numerics::DenseMatrix b = numerics::multiply_transposed(ti, tj);
    if (lay.branch == Branch::BackwardDirect) {
        for (double& x : b.data()) x = -x;
    } else if (lay.branch == Branch::BackwardGaussian) {
        const auto g = gaussian_block(-lay.tau, ui, uj, xi);
        auto bd = b.data();
        auto gd = g.data();
        for (std::size_t k = 0; k < bd.size(); ++k) bd[k] -= gd[k];
    }
    return b;
}

/// det(I - M) as a probability; throws on a singular discretization.
inline double fredholm_det(numerics::DenseMatrix m) {
    const std::size_t n = m.rows();
    for (double& x : m.data()) x = -x;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
    const numerics::LogDet d = numerics::lu_log_det(std::move(m));
    if (d.sign == 0)
        throw FredholmError("joint_cdf: singular discretization (increase truncation or quad_order)");
    return d.value();
}

/// Merge coincident times: the process at one time is one variable, so the event is A(t) <= min.
inline void merge_coincident(std::vector<double>& times, std::vector<double>& thresholds) {
    std::vector<double> t2, u2;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!t2.empty() && times[i] == t2.back())
            u2.back() = std::min(u2.back(), thresholds[i]);
        else {
            t2.push_back(times[i]);
            u2.push_back(thresholds[i]);
        }
    }
    times.swap(t2);
    thresholds.swap(u2);
}

/// Raw determinant for distinct sorted times at a given discretization.
inline double determinant(const std::vector<double>& times, const std::vector<double>& thresholds,
                          const Discretization& disc) {
    const std::size_t nb = times.size();
    const std::size_t m = effective_quad_order(disc, smallest_gaussian_gap(times));
    const auto xi = numerics::gauss_legendre(m, 0.0, disc.truncation);
    numerics::DenseMatrix big(nb * m, nb * m);
    auto place = [&](const numerics::DenseMatrix& blk, std::size_t bi, std::size_t bj) {
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t s = 0; s < m; ++s) big(bi * m + r, bj * m + s) = blk(r, s);
    };
    for (std::size_t i = 0; i < nb; ++i) {
        place(equal_time_block(thresholds[i], xi), i, i);
        for (std::size_t j = 0; j < nb; ++j) {
            if (i == j) continue;
            const double tau = times[i] - times[j];
            const double lo = std::min(thresholds[i], thresholds[j]);
            const ZLayout lay = make_layout(tau, tau, lo, disc.z_quad_order);
            const auto ti = factor_table(lay, thresholds[i], xi);
            const auto tj = factor_table(lay, thresholds[j], xi);
            place(cross_block(lay, ti, tj, thresholds[i], thresholds[j], xi), i, j);
        }
    }
    return fredholm_det(std::move(big));
}

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace fredholm_detail

/**
 * Entry (i, j) of the extended Airy kernel at (x, y):
 *   t_i > t_j:  int_0^inf exp(-z (t_i - t_j)) Ai(x + z) Ai(y + z) dz
 *   t_i < t_j: -int_{-inf}^0 (same integrand) dz
 *   t_i = t_j:  Christoffel-Darboux form of the Airy kernel.
 * For small backward gaps s = t_j - t_i the second line is evaluated as
 * int_0^inf exp(s z) Ai(x + z) Ai(y + z) dz minus the closed-form full-line
 * integral (4 pi s)^{-1/2} exp(s^3/12 - s (x + y)/2 - (x - y)^2 / (4 s)).
 */
inline double extended_kernel_entry(const KernelSpec& spec, std::size_t i, std::size_t j, double x, double y) {
    if (i >= spec.times.size() || j >= spec.times.size())
        throw std::out_of_range("extended_kernel_entry: block index out of range");
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("extended_kernel_entry: non-finite argument");
    const double tau = spec.times[i] - spec.times[j];
    if (tau == 0.0) return airy_kernel(x, y);
    if (std::min(x, y) < kLowestThreshold)
        throw FredholmError("extended_kernel_entry: argument below " + std::to_string(kLowestThreshold) +
                            "; the backward z-integral is not resolved there");
    const auto lay = fredholm_detail::make_layout(tau, tau, std::min(x, y), spec.z_quad_order);
    return fredholm_detail::kernel_entry(lay, x, y);
}

/**
 * P(A(t_1) <= u_1, ..., A(t_m) <= u_m) as det(I - K) of the Nystrom
 * discretization with square-root-weighted Gauss-Legendre nodes on each
 * [u_i, u_i + L]. refinement_error compares against (m_q / 2, L - 4).
 */
inline FredholmResult joint_cdf(const KernelSpec& spec) {
    spec.validate();
    for (double u : spec.thresholds)
        if (u < kLowestThreshold)
            throw std::invalid_argument("joint_cdf: thresholds must be >= " + std::to_string(kLowestThreshold));
    std::vector<double> times = spec.times;
    std::vector<double> thresholds = spec.thresholds;
    fredholm_detail::merge_coincident(times, thresholds);
    const Discretization fine = spec.discretization();
    FredholmResult r;
    const double v = fredholm_detail::determinant(times, thresholds, fine);
    const double coarse = fredholm_detail::determinant(times, thresholds, fine.coarsened());
    r.value = fredholm_detail::clamp_probability(v);
    r.refinement_error = std::fabs(v - coarse);
    r.matrix_size = times.size() *
                    fredholm_detail::effective_quad_order(fine, fredholm_detail::smallest_gaussian_gap(times));
    return r;
}

/// One-time probability F2(u) from the Airy-kernel determinant.
inline FredholmResult fredholm_f2(double u, const Discretization& disc = {}) {
    KernelSpec s;
    s.times = {0.0};
    s.thresholds = {u};
    s.truncation = disc.truncation;
    s.quad_order = disc.quad_order;
    s.z_quad_order = disc.z_quad_order;
    return joint_cdf(s);
}

/// Two-time probability P(A(0) <= u, A(t) <= v).
inline FredholmResult joint_cdf(double t, double u, double v, const Discretization& disc = {}) {
    KernelSpec s;
    s.times = {0.0, t};
    s.thresholds = {u, v};
    s.truncation = disc.truncation;
    s.quad_order = disc.quad_order;
    s.z_quad_order = disc.z_quad_order;
    if (t < 0.0) {
        s.times = {t, 0.0};
        s.thresholds = {v, u};
    }
    return joint_cdf(s);
}

/**
 * Bulk two-time evaluator at a fixed gap tau > 0. Per-threshold factor
 * tables are built once; each (u, v) pair then costs two small products
 * and one LU factorization.
 *
 * `layout_tau` fixes the z-layout and quadrature order (defaults to tau);
 * evaluators at tau - dt, tau, tau + dt built with one layout_tau share
 * their discretization exactly.
 */
class TwoTimeEvaluator {
public:
    TwoTimeEvaluator(double tau, std::vector<double> u_levels, std::vector<double> v_levels,
                     const Discretization& disc = {}, double layout_tau = 0.0, unsigned workers = 0)
        : tau_(tau), u_(std::move(u_levels)), v_(std::move(v_levels)) {
        using namespace fredholm_detail;
        disc.validate();
        if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("TwoTimeEvaluator: tau must be positive");
        if (layout_tau == 0.0) layout_tau = tau;
        if (!(layout_tau > 0.0)) throw std::invalid_argument("TwoTimeEvaluator: layout_tau must be positive");
        double lo = 1e300;
        for (double u : u_) lo = std::min(lo, u);
        for (double v : v_) lo = std::min(lo, v);
        if (lo < kLowestThreshold)
            throw std::invalid_argument("TwoTimeEvaluator: thresholds must be >= " + std::to_string(kLowestThreshold));
        const double gap = branch_for(-layout_tau) == Branch::BackwardGaussian ? layout_tau : 0.0;
        m_ = effective_quad_order(disc, gap);
        xi_ = numerics::gauss_legendre(m_, 0.0, disc.truncation);
        // block order: A(0) first (u), A(tau) second (v)
        forward_ = make_layout(tau, layout_tau, lo, disc.z_quad_order);
        backward_ = make_layout(-tau, -layout_tau, lo, disc.z_quad_order);
        const std::size_t nu = u_.size(), nv = v_.size();
        fu_.resize(nu);
        bu_.resize(nu);
        du_.resize(nu);
        fv_.resize(nv);
        bv_.resize(nv);
        dv_.resize(nv);
        numerics::parallel_for(
            nu + nv,
            [&](std::size_t k) {
                if (k < nu) {
                    fu_[k] = factor_table(forward_, u_[k], xi_);
                    bu_[k] = factor_table(backward_, u_[k], xi_);
                    du_[k] = equal_time_block(u_[k], xi_);
                } else {
                    const std::size_t j = k - nu;
                    fv_[j] = factor_table(forward_, v_[j], xi_);
                    bv_[j] = factor_table(backward_, v_[j], xi_);
                    dv_[j] = equal_time_block(v_[j], xi_);
                }
            },
            workers);
    }

    double tau() const { return tau_; }
    std::size_t quad_order() const { return m_; }
    const std::vector<double>& u_levels() const { return u_; }
    const std::vector<double>& v_levels() const { return v_; }

    /// Raw determinant value (not clamped).
    double joint(std::size_t a, std::size_t b) const {
        using namespace fredholm_detail;
        const std::size_t m = m_;
        numerics::DenseMatrix big(2 * m, 2 * m);
        const auto k12 = cross_block(backward_, bu_.at(a), bv_.at(b), u_[a], v_[b], xi_);
        const auto k21 = numerics::multiply_transposed(fv_[b], fu_[a]);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t s = 0; s < m; ++s) {
                big(r, s) = du_[a](r, s);
                big(r, m + s) = k12(r, s);
                big(m + r, s) = k21(r, s);
                big(m + r, m + s) = dv_[b](r, s);
            }
        return fredholm_det(std::move(big));
    }

    /// F2 at u level a, from the same discretization.
    double marginal_u(std::size_t a) const { return fredholm_detail::fredholm_det(du_.at(a)); }
    double marginal_v(std::size_t b) const { return fredholm_detail::fredholm_det(dv_.at(b)); }

    /// All joint values, rows indexed by u level, columns by v level.
    numerics::DenseMatrix joint_table(unsigned workers = 0) const {
        numerics::DenseMatrix out(u_.size(), v_.size());
        numerics::parallel_for(
            u_.size() * v_.size(),
            [&](std::size_t k) {
                const std::size_t a = k / v_.size(), b = k % v_.size();
                out(a, b) = joint(a, b);
            },
            workers);
        return out;
    }

private:
    double tau_;
    std::vector<double> u_, v_;
    std::size_t m_ = 0;
    numerics::Quadrature xi_;
    fredholm_detail::ZLayout forward_, backward_;
    std::vector<numerics::DenseMatrix> fu_, bu_, du_, fv_, bv_, dv_;
};

/**
 * P(A(0) <= u_a, A(t) <= v_b) on a grid (rows u, columns v), clamped to
 * [0, 1]. t = 0 gives F2(min(u, v)).
 */
inline numerics::DenseMatrix joint_cdf_grid(double t, const std::vector<double>& u_grid,
                                            const std::vector<double>& v_grid, const Discretization& disc = {},
                                            unsigned workers = 0) {
    if (!std::is_sorted(u_grid.begin(), u_grid.end()) || !std::is_sorted(v_grid.begin(), v_grid.end()))
        throw std::invalid_argument("joint_cdf_grid: grids must be ascending");
    if (u_grid.empty() || v_grid.empty()) throw std::invalid_argument("joint_cdf_grid: empty grid");
    numerics::DenseMatrix out(u_grid.size(), v_grid.size());
    if (t == 0.0) {
        for (std::size_t a = 0; a < u_grid.size(); ++a)
            for (std::size_t b = 0; b < v_grid.size(); ++b)
                out(a, b) = fredholm_f2(std::min(u_grid[a], v_grid[b]), disc).value;
        return out;
    }
    // P(A(0) <= u, A(t) <= v) = P(A(0) <= v, A(|t|) <= u) for t < 0 by stationarity
    const bool flip = t < 0.0;
    const TwoTimeEvaluator ev(std::fabs(t), flip ? v_grid : u_grid, flip ? u_grid : v_grid, disc, 0.0, workers);
    const auto raw = ev.joint_table(workers);
    for (std::size_t a = 0; a < u_grid.size(); ++a)
        for (std::size_t b = 0; b < v_grid.size(); ++b)
            out(a, b) = fredholm_detail::clamp_probability(flip ? raw(b, a) : raw(a, b));
    return out;
}

}  // namespace airyproc
