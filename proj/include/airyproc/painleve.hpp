#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "airyproc/airy_function.hpp"
#include "airyproc/numerics/quadrature.hpp"

namespace airyproc {

/// Tail integrals of the Hastings-McLeod function above u.
struct TailIntegrals {
    double gp = 0.0;   ///< int_u^inf q^2
    double g = 0.0;    ///< int_u^inf (u - a) q^2  (= log F2(u))
    double g1p = 0.0;  ///< int_u^inf q'^2
    double g2p = 0.0;  ///< int_u^inf q^4
};

struct PainleveOptions {
    double alpha_min = -10.0;
    double alpha_max = 8.0;
    std::size_t n_nodes = 18001;
    double tol = 1e-13;
    int max_newton_iterations = 60;
};

class NewtonDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace painleve_detail {

/// Left asymptote -sqrt(-a/2) (1 + 1/(8a^3) - 73/(128a^6)) and its derivative, a < 0.
inline double left_asymptote(double a) {
    const double s = -a;
    const double s3 = s * s * s;
    const double p = 1.0 - 1.0 / (8.0 * s3) - 73.0 / (128.0 * s3 * s3);
    return -std::sqrt(0.5 * s) * p;
}

inline double left_asymptote_derivative(double a) {
    const double s = -a;
    const double s3 = s * s * s;
    const double p = 1.0 - 1.0 / (8.0 * s3) - 73.0 / (128.0 * s3 * s3);
    const double dp_ds = 3.0 / (8.0 * s3 * s) + 6.0 * 73.0 / (128.0 * s3 * s3 * s);
    // d/da = -d/ds applied to -sqrt(s/2) p
    return std::sqrt(0.5) * (p / (2.0 * std::sqrt(s)) + std::sqrt(s) * dp_ds);
}

inline double rhs(double a, double q) { return a * q + 2.0 * q * q * q; }

// Quintic Hermite basis on s in [0, 1] and its derivative.
inline void quintic_basis(double s, double* h, double* dh) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    h[0] = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    h[1] = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    h[2] = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    h[3] = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    h[4] = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    h[5] = 0.5 * (s3 - 2.0 * s4 + s5);
    dh[0] = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    dh[1] = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    dh[2] = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    dh[3] = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    dh[4] = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    dh[5] = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
}

// Closed-form integrals of Ai^2, a Ai^2 and Ai'^2 over [x, inf).
inline void airy_tail_moments(double x, double& i_q2, double& i_aq2, double& i_qp2, double& i_q4) {
    const AiryPair p = airy_pair(x);
    const double a = p.ai, ap = p.aip;
    i_q2 = ap * ap - x * a * a;
    i_aq2 = (x * ap * ap - x * x * a * a - a * ap) / 3.0;
    i_qp2 = (x * x * a * a - x * ap * ap - 2.0 * a * ap) / 3.0;
    // Ai^4 ~ exp(-4 zeta)/(16 pi^2 x); leading-order Laplace estimate of the tail
    i_q4 = x > 0.0 ? a * a * a * a / (4.0 * std::sqrt(x)) : 0.0;
}

}  // namespace painleve_detail

/**
 * Hastings-McLeod solution of q'' = a q + 2 q^3 on a uniform grid,
 * normalized with q < 0 (q ~ -Ai(a) as a -> +inf, q ~ -sqrt(-a/2) as
 * a -> -inf).
 *
 * The two-point problem is discretized with Numerov's 4th-order scheme and
 * solved by Newton iteration (tridiagonal Jacobian). Shooting is not used:
 * the Hastings-McLeod solution is a separatrix and integration from +inf
 * is exponentially unstable.
 *
 * Off-grid values use quintic Hermite interpolation from q, q' and
 * q'' = a q + 2 q^3. Outside the grid the asymptotic branches are used.
 * Tail integrals are precomputed as cumulative sums per cell (8-point
 * Gauss-Legendre on the interpolant) plus closed-form Airy tails beyond
 * alpha_max.
 *
 * Immutable after construction; safe for concurrent reads.
 */
class PainleveSolution {
public:
    PainleveSolution() = default;

    static PainleveSolution solve(const PainleveOptions& opt = {});

    /// Rebuild from stored nodal values (cache loading).
    static PainleveSolution from_nodes(const PainleveOptions& opt, std::vector<double> q, std::vector<double> qp,
                                       int newton_iterations);

    double alpha_min() const { return opt_.alpha_min; }
    double alpha_max() const { return opt_.alpha_max; }
    std::size_t n_nodes() const { return q_.size(); }
    double mesh() const { return h_; }
    double tolerance() const { return opt_.tol; }
    const PainleveOptions& options() const { return opt_; }
    int newton_iterations() const { return newton_iterations_; }

    double node(std::size_t i) const { return opt_.alpha_min + h_ * static_cast<double>(i); }
    const std::vector<double>& q_nodes() const { return q_; }
    const std::vector<double>& qp_nodes() const { return qp_; }

    double q(double a) const { return eval(a, false); }
    double qp(double a) const { return eval(a, true); }
    /// q'' from the differential equation.
    double qpp(double a) const {
        const double v = q(a);
        return painleve_detail::rhs(a, v);
    }

    /// Tail integrals for u >= alpha_min; throws std::domain_error below.
    TailIntegrals tails(double u) const;

    /// Tail integrals for any real u; below alpha_min the left asymptotic
    /// branch is integrated down to u.
    TailIntegrals tails_extended(double u) const;

    double f2_cdf(double u) const {
        const double g = tails_extended(u).g;
        return std::clamp(std::exp(g), 0.0, 1.0);
    }

    double f2_pdf(double u) const {
        const TailIntegrals t = tails_extended(u);
        return std::exp(t.g) * t.gp;
    }

    void write(std::ostream& os) const;
    static PainleveSolution read(std::istream& is);

private:
    double eval(double a, bool derivative) const;
    void build_cumulative();
    std::size_t cell_of(double a) const {
        const double r = (a - opt_.alpha_min) / h_;
        const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(r)));
        return std::min(i, q_.size() - 2);
    }
    // integrals of q^2, a q^2, q'^2, q^4 over [lo, hi] inside one cell
    void cell_integrals(std::size_t cell, double lo, double hi, double* out) const;

    PainleveOptions opt_;
    double h_ = 0.0;
    int newton_iterations_ = 0;
    std::vector<double> q_;
    std::vector<double> qp_;
    // cumulative integrals from node i to +infinity
    std::vector<double> cum_q2_, cum_aq2_, cum_qp2_, cum_q4_;
    numerics::Quadrature cell_rule_;
};

inline PainleveSolution PainleveSolution::solve(const PainleveOptions& opt) {
    if (!std::isfinite(opt.alpha_min) || !std::isfinite(opt.alpha_max) || !(opt.alpha_min < opt.alpha_max))
        throw std::invalid_argument("solve_hastings_mcleod: non-monotone or non-finite domain");
    if (opt.alpha_max < 6.0) throw std::invalid_argument("solve_hastings_mcleod: alpha_max must be >= 6");
    if (opt.alpha_min > -8.0) throw std::invalid_argument("solve_hastings_mcleod: alpha_min must be <= -8");
    if (opt.n_nodes < 2000) throw std::invalid_argument("solve_hastings_mcleod: n_nodes must be >= 2000");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_hastings_mcleod: tol must be positive");

    using namespace painleve_detail;
    const std::size_t n = opt.n_nodes;
    const double h = (opt.alpha_max - opt.alpha_min) / static_cast<double>(n - 1);
    auto alpha = [&](std::size_t i) { return opt.alpha_min + h * static_cast<double>(i); };

    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = alpha(i);
        const double ai = airy_ai(std::max(a, -60.0));
        q[i] = -std::sqrt(ai * ai + std::max(-a, 0.0) * 0.5);
    }
    q.front() = left_asymptote(opt.alpha_min);
    q.back() = -airy_ai(opt.alpha_max);

    // Numerov residual F_i = q_{i-1} - 2 q_i + q_{i+1} - h^2/12 (f_{i-1} + 10 f_i + f_{i+1})
    const double c = h * h / 12.0;
    std::vector<double> f(n), df(n), lower(n), diag(n), upper(n), rhs_v(n);
    int iterations = 0;
    bool converged = false;
    for (; iterations < opt.max_newton_iterations; ++iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = alpha(i);
            f[i] = rhs(a, q[i]);
            df[i] = a + 6.0 * q[i] * q[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            rhs_v[i] = -(q[i - 1] - 2.0 * q[i] + q[i + 1] - c * (f[i - 1] + 10.0 * f[i] + f[i + 1]));
            lower[i] = (i > 1) ? 1.0 - c * df[i - 1] : 0.0;
            upper[i] = (i + 2 < n) ? 1.0 - c * df[i + 1] : 0.0;
            diag[i] = -2.0 - 10.0 * c * df[i];
        }
        // Thomas algorithm on rows 1..n-2
        for (std::size_t i = 2; i + 1 < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs_v[i] -= w * rhs_v[i - 1];
        }
        double max_step = 0.0;
        double next = 0.0;
        for (std::size_t i = n - 2; i >= 1; --i) {
            const double dx = (rhs_v[i] - upper[i] * next) / diag[i];
            next = dx;
            q[i] += dx;
            max_step = std::max(max_step, std::fabs(dx));
            if (i == 1) break;
        }
        if (!std::isfinite(max_step)) break;
        if (max_step < opt.tol) {
            converged = true;
            ++iterations;
            break;
        }
    }
    if (!converged)
        throw NewtonDivergence("solve_hastings_mcleod: Newton iteration did not converge in " +
                               std::to_string(opt.max_newton_iterations) + " steps");

    std::vector<double> qp(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double fm = rhs(alpha(i - 1), q[i - 1]);
        const double fpl = rhs(alpha(i + 1), q[i + 1]);
        qp[i] = (q[i + 1] - q[i - 1]) / (2.0 * h) - h * (fpl - fm) / 12.0;
    }
    {
        // one-sided Taylor at the left boundary, O(h^3)
        const double a0 = alpha(0);
        const double f0 = rhs(a0, q[0]);
        const double num = q[1] - q[0] - 0.5 * h * h * f0 - h * h * h / 6.0 * q[0];
        const double den = h + h * h * h / 6.0 * (a0 + 6.0 * q[0] * q[0]);
        qp[0] = num / den;
    }
    qp[n - 1] = -airy_ai_prime(opt.alpha_max);

    return from_nodes(opt, std::move(q), std::move(qp), iterations);
}

inline PainleveSolution PainleveSolution::from_nodes(const PainleveOptions& opt, std::vector<double> q,
                                                     std::vector<double> qp, int newton_iterations) {
    if (q.size() != qp.size() || q.size() < 2) throw std::invalid_argument("PainleveSolution: bad nodal data");
    PainleveSolution s;
    s.opt_ = opt;
    s.opt_.n_nodes = q.size();
    s.h_ = (opt.alpha_max - opt.alpha_min) / static_cast<double>(q.size() - 1);
    s.q_ = std::move(q);
    s.qp_ = std::move(qp);
    s.newton_iterations_ = newton_iterations;
    s.cell_rule_ = numerics::gauss_legendre(8, 0.0, 1.0);
    s.build_cumulative();
    return s;
}

inline double PainleveSolution::eval(double a, bool derivative) const {
    using namespace painleve_detail;
    if (a >= opt_.alpha_max) {
        const AiryPair p = airy_pair(a);
        return derivative ? -p.aip : -p.ai;
    }
    if (a < opt_.alpha_min) return derivative ? left_asymptote_derivative(a) : left_asymptote(a);
    const std::size_t i = cell_of(a);
    const double a0 = node(i);
    const double s = (a - a0) / h_;
    double hb[6], dhb[6];
    quintic_basis(s, hb, dhb);
    const double q0 = q_[i], q1 = q_[i + 1];
    const double d0 = qp_[i], d1 = qp_[i + 1];
    const double s0 = rhs(a0, q0), s1 = rhs(node(i + 1), q1);
    const double h2 = h_ * h_;
    if (!derivative)
        return q0 * hb[0] + h_ * d0 * hb[1] + h2 * s0 * hb[2] + q1 * hb[3] + h_ * d1 * hb[4] + h2 * s1 * hb[5];
    return (q0 * dhb[0] + h_ * d0 * dhb[1] + h2 * s0 * dhb[2] + q1 * dhb[3] + h_ * d1 * dhb[4] + h2 * s1 * dhb[5]) /
           h_;
}

inline void PainleveSolution::cell_integrals(std::size_t cell, double lo, double hi, double* out) const {
    out[0] = out[1] = out[2] = out[3] = 0.0;
    const double len = hi - lo;
    if (len <= 0.0) return;
    (void)cell;
    for (std::size_t k = 0; k < cell_rule_.size(); ++k) {
        const double a = lo + len * cell_rule_.nodes[k];
        const double w = len * cell_rule_.weights[k];
        const double v = eval(a, false);
        const double d = eval(a, true);
        const double v2 = v * v;
        out[0] += w * v2;
        out[1] += w * a * v2;
        out[2] += w * d * d;
        out[3] += w * v2 * v2;
    }
}

inline void PainleveSolution::build_cumulative() {
    const std::size_t n = q_.size();
    cum_q2_.assign(n, 0.0);
    cum_aq2_.assign(n, 0.0);
    cum_qp2_.assign(n, 0.0);
    cum_q4_.assign(n, 0.0);
    double t[4];
    painleve_detail::airy_tail_moments(opt_.alpha_max, t[0], t[1], t[2], t[3]);
    cum_q2_[n - 1] = t[0];
    cum_aq2_[n - 1] = t[1];
    cum_qp2_[n - 1] = t[2];
    cum_q4_[n - 1] = t[3];
    for (std::size_t i = n - 1; i-- > 0;) {
        double c[4];
        cell_integrals(i, node(i), node(i + 1), c);
        cum_q2_[i] = cum_q2_[i + 1] + c[0];
        cum_aq2_[i] = cum_aq2_[i + 1] + c[1];
        cum_qp2_[i] = cum_qp2_[i + 1] + c[2];
        cum_q4_[i] = cum_q4_[i + 1] + c[3];
    }
}

inline TailIntegrals PainleveSolution::tails(double u) const {
    if (!(u >= opt_.alpha_min))
        throw std::domain_error("tails_at: u = " + std::to_string(u) + " is below the solved domain");
    double m[4];
    if (u >= opt_.alpha_max) {
        painleve_detail::airy_tail_moments(u, m[0], m[1], m[2], m[3]);
    } else {
        const std::size_t i = cell_of(u);
        double c[4];
        cell_integrals(i, u, node(i + 1), c);
        m[0] = cum_q2_[i + 1] + c[0];
        m[1] = cum_aq2_[i + 1] + c[1];
        m[2] = cum_qp2_[i + 1] + c[2];
        m[3] = cum_q4_[i + 1] + c[3];
    }
    TailIntegrals t;
    t.gp = m[0];
    t.g = u * m[0] - m[1];
    t.g1p = m[2];
    t.g2p = m[3];
    return t;
}

inline TailIntegrals PainleveSolution::tails_extended(double u) const {
    if (u >= opt_.alpha_min) return tails(u);
    TailIntegrals base = tails(opt_.alpha_min);
    // moments of the asymptotic branch over [u, alpha_min]
    const double len = opt_.alpha_min - u;
    const auto panels = static_cast<std::size_t>(std::ceil(len)) + 1;
    const auto rule = numerics::composite_gauss_legendre(16, u, opt_.alpha_min, panels);
    double q2 = 0, aq2 = 0, qp2 = 0, q4 = 0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double a = rule.nodes[k];
        const double w = rule.weights[k];
        const double v = painleve_detail::left_asymptote(a);
        const double d = painleve_detail::left_asymptote_derivative(a);
        q2 += w * v * v;
        aq2 += w * a * v * v;
        qp2 += w * d * d;
        q4 += w * v * v * v * v;
    }
    // base.g = alpha_min * gp0 - M1_0
    const double gp0 = base.gp;
    const double m1_0 = opt_.alpha_min * gp0 - base.g;
    TailIntegrals t;
    t.gp = gp0 + q2;
    t.g = u * t.gp - (m1_0 + aq2);
    t.g1p = base.g1p + qp2;
    t.g2p = base.g2p + q4;
    return t;
}

inline void PainleveSolution::write(std::ostream& os) const {
    const char magic[8] = {'A', 'P', 'R', 'C', 'P', 'I', 'I', '\0'};
    const std::uint32_t version = 1;
    const std::uint64_t n = q_.size();
    const std::int32_t iters = newton_iterations_;
    os.write(magic, 8);
    os.write(reinterpret_cast<const char*>(&version), sizeof version);
    os.write(reinterpret_cast<const char*>(&opt_.alpha_min), sizeof(double));
    os.write(reinterpret_cast<const char*>(&opt_.alpha_max), sizeof(double));
    os.write(reinterpret_cast<const char*>(&opt_.tol), sizeof(double));
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&iters), sizeof iters);
    os.write(reinterpret_cast<const char*>(q_.data()), static_cast<std::streamsize>(n * sizeof(double)));
    os.write(reinterpret_cast<const char*>(qp_.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

inline PainleveSolution PainleveSolution::read(std::istream& is) {
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t n = 0;
    std::int32_t iters = 0;
    PainleveOptions opt;
    is.read(magic, 8);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!is || std::string(magic, 7) != "APRCPII" || version != 1)
        throw std::runtime_error("PainleveSolution::read: not a version-1 solution file");
    is.read(reinterpret_cast<char*>(&opt.alpha_min), sizeof(double));
    is.read(reinterpret_cast<char*>(&opt.alpha_max), sizeof(double));
    is.read(reinterpret_cast<char*>(&opt.tol), sizeof(double));
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&iters), sizeof iters);
    if (!is || n < 2 || n > (1u << 26)) throw std::runtime_error("PainleveSolution::read: corrupt header");
    std::vector<double> q(n), qp(n);
    is.read(reinterpret_cast<char*>(q.data()), static_cast<std::streamsize>(n * sizeof(double)));
    is.read(reinterpret_cast<char*>(qp.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("PainleveSolution::read: truncated file");
    opt.n_nodes = n;
    return from_nodes(opt, std::move(q), std::move(qp), iters);
}

// Free-function surface.

inline PainleveSolution solve_hastings_mcleod(double alpha_min = -10.0, double alpha_max = 8.0,
                                              std::size_t n_nodes = 18001, double tol = 1e-13) {
    PainleveOptions o;
    o.alpha_min = alpha_min;
    o.alpha_max = alpha_max;
    o.n_nodes = n_nodes;
    o.tol = tol;
    return PainleveSolution::solve(o);
}

inline double q_at(const PainleveSolution& s, double a) { return s.q(a); }
inline double qp_at(const PainleveSolution& s, double a) { return s.qp(a); }
inline TailIntegrals tails_at(const PainleveSolution& s, double u) { return s.tails(u); }
inline double f2_cdf(const PainleveSolution& s, double u) { return s.f2_cdf(u); }
inline double f2_pdf(const PainleveSolution& s, double u) { return s.f2_pdf(u); }

}  // namespace airyproc
