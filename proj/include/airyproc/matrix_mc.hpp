#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "airyproc/numerics/hermitian_eigen.hpp"
#include "airyproc/numerics/parallel.hpp"
#include "airyproc/numerics/random.hpp"

namespace airyproc {

namespace mc_detail {

/**
 * Transcendental factors that depend only on the configuration. They are
 * kept out of reach of interprocedural constant propagation: a call site
 * with literal arguments would otherwise be folded at compile time with
 * correctly rounded arithmetic, which can differ from the run-time libm
 * result in the last bit and break bitwise reproducibility.
 */
[[gnu::noipa]] inline double coupling_factor(double t, std::size_t n) {
    return std::exp(-t / std::cbrt(static_cast<double>(n)));
}

[[gnu::noipa]] inline double n_sixth(std::size_t n) { return std::pow(static_cast<double>(n), 1.0 / 6.0); }

}  // namespace mc_detail

/**
 * Two-time coupled Gaussian ensemble with joint weight
 *   exp(-1/2 Tr(M1^2 + M2^2 - 2 c M1 M2)),  c = exp(-n^{-1/3} t).
 *
 * Sampling uses the factorization obtained by completing the square in M2:
 *   M2^2 - 2c M1 M2 = (M2 - c M1)^2 - c^2 M1^2,
 * so M1 has weight exp(-(1 - c^2)/2 Tr M1^2), i.e. M1 = G1 / sqrt(1 - c^2),
 * and given M1, M2 = c M1 + G with G independent of M1. G1 and G are
 * drawn from exp(-1/2 Tr M^2): real N(0,1) diagonal, off-diagonal real and
 * imaginary parts N(0,1/2). M2 has the same marginal as M1.
 */
struct CoupledEnsembleConfig {
    std::size_t n = 100;
    double t = 1.0;
    std::size_t samples = 20000;
    std::uint64_t seed = 1;

    double coupling() const { return mc_detail::coupling_factor(t, n); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("CoupledEnsembleConfig: n must be >= 2");
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("CoupledEnsembleConfig: t must be >= 0");
        if (samples < 1) throw std::invalid_argument("CoupledEnsembleConfig: samples must be >= 1");
    }
};

/// One rescaled pair (A(0), A(t)) tagged with its draw index.
struct EdgePair {
    std::uint64_t draw_index = 0;
    double a0 = 0.0;
    double at = 0.0;
};

struct CoupledSampleBatch {
    CoupledEnsembleConfig config;
    std::vector<EdgePair> pairs;
};

/// A probability estimate with its binomial standard error.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t count = 0;
};

namespace mc_detail {

// Gaussian Hermitian matrix with weight exp(-1/2 Tr M^2), scaled by `scale`.
inline void fill_gue(numerics::HermitianMatrix& m, numerics::RandomStream& rs, double scale) {
    const std::size_t n = m.size();
    const double off = scale * std::sqrt(0.5);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto [re, im] = numerics::gaussian_pair(rs);
            m.set(i, j, {off * re, off * im});
        }
    }
    for (std::size_t i = 0; i < n; i += 2) {
        const auto [d0, d1] = numerics::gaussian_pair(rs);
        m.re(i, i) = scale * d0;
        m.im(i, i) = 0.0;
        if (i + 1 < n) {
            m.re(i + 1, i + 1) = scale * d1;
            m.im(i + 1, i + 1) = 0.0;
        }
    }
}

// Substream offset for auxiliary single-matrix draws, keeps them disjoint from pair draws.
inline constexpr std::uint64_t kAuxiliaryStreamBase = std::uint64_t{1} << 48;

}  // namespace mc_detail

/// Both spectra of one coupled draw (ascending).
struct CoupledSpectra {
    std::vector<double> eigs1;
    std::vector<double> eigs2;
};

inline CoupledSpectra sample_coupled_pair(std::size_t n, double c, numerics::RandomStream& stream) {
    if (n < 1) throw std::invalid_argument("sample_coupled_pair: n must be >= 1");
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("sample_coupled_pair: coupling must satisfy 0 <= c < 1");
    numerics::HermitianMatrix m1(n), g(n);
    mc_detail::fill_gue(m1, stream, 1.0 / std::sqrt(1.0 - c * c));
    mc_detail::fill_gue(g, stream, 1.0);
    numerics::HermitianMatrix m2(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            m2.re(i, j) = c * m1.re(i, j) + g.re(i, j);
            m2.im(i, j) = c * m1.im(i, j) + g.im(i, j);
        }
    return {numerics::hermitian_eigenvalues(m1, false), numerics::hermitian_eigenvalues(m2, false)};
}

/// Largest eigenvalue of a standard exp(-1/2 Tr M^2) matrix.
inline double sample_gue_max(std::size_t n, numerics::RandomStream& stream) {
    numerics::HermitianMatrix m(n);
    mc_detail::fill_gue(m, stream, 1.0);
    return numerics::hermitian_eigenvalues(m, false).back();
}

/**
 * Edge rescaling u = n^{1/6} (lambda sqrt(1 - c^2) - 2 sqrt(n)), the inverse
 * of lambda = (2 sqrt(n) + n^{-1/6} u) / sqrt(1 - c^2).
 */
inline double rescale_edge(double eig_max, std::size_t n, double c = 0.0) {
    const double nn = static_cast<double>(n);
    return mc_detail::n_sixth(n) * (eig_max * std::sqrt(1.0 - c * c) - 2.0 * std::sqrt(nn));
}

/// Inverse of rescale_edge.
inline double edge_threshold(double u, std::size_t n, double c = 0.0) {
    const double nn = static_cast<double>(n);
    return (2.0 * std::sqrt(nn) + u / mc_detail::n_sixth(n)) / std::sqrt(1.0 - c * c);
}

/**
 * Draws config.samples coupled pairs. Draw k uses RandomStream(seed, k),
 * so the batch is identical for any worker count.
 */
inline CoupledSampleBatch sample_batch(const CoupledEnsembleConfig& config, unsigned workers = 0) {
    config.validate();
    const double c = config.coupling();
    CoupledSampleBatch b;
    b.config = config;
    b.pairs.resize(config.samples);
    numerics::parallel_for(
        config.samples,
        [&](std::size_t k) {
            numerics::RandomStream rs(config.seed, k);
            const auto sp = sample_coupled_pair(config.n, c, rs);
            b.pairs[k] = {k, rescale_edge(sp.eigs1.back(), config.n, c), rescale_edge(sp.eigs2.back(), config.n, c)};
        },
        workers);
    return b;
}

inline Estimate binomial_estimate(std::size_t hits, std::size_t total) {
    if (total == 0) throw std::invalid_argument("binomial_estimate: empty sample");
    Estimate e;
    e.count = total;
    e.value = static_cast<double>(hits) / static_cast<double>(total);
    e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(total));
    return e;
}

/// Fraction of pairs with A(0) <= u and A(t) <= v.
inline Estimate empirical_joint_cdf(const CoupledSampleBatch& batch, double u, double v) {
    if (batch.pairs.empty()) throw std::invalid_argument("empirical_joint_cdf: empty batch");
    std::size_t hits = 0;
    for (const auto& p : batch.pairs)
        if (p.a0 <= u && p.at <= v) ++hits;
    return binomial_estimate(hits, batch.pairs.size());
}

/// Fraction of values <= u.
inline Estimate empirical_cdf(const std::vector<double>& values, double u) {
    std::size_t hits = 0;
    for (double x : values)
        if (x <= u) ++hits;
    return binomial_estimate(hits, values.size());
}

/// sup_x |F_emp(x) - F(x)| (Kolmogorov distance) of a sample to a continuous CDF.
inline double sup_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
    if (values.empty()) throw std::invalid_argument("sup_distance: empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = cdf(values[i]);
        d = std::max({d, std::fabs(static_cast<double>(i + 1) / n - f), std::fabs(f - static_cast<double>(i) / n)});
    }
    return d;
}

/// Two-sample Kolmogorov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

struct ConditionalBound {
    Estimate lhs;  ///< P(A(t) >= a | A(0) <= -z)
    Estimate rhs;  ///< P(lambda_max(M) >= b - c w) for a standard matrix M
    double acceptance = 0.0;
    bool holds = false;
};

class RareEventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Finite-n check of the conditional tail bound
 *   P(max sp M2 >= b | max sp M1 <= w) <= P(max sp M >= b - c w),
 * which follows from max sp M2 <= max sp (M2 - c M1) + c max sp M1.
 * a and z are in rescaled edge units: w and b are the raw thresholds of
 * the events {A(0) <= -z} and {A(t) >= a}. The left side is estimated by
 * rejection from coupled draws, the right side from independent standard
 * draws; holds = lhs <= rhs + 3 * sqrt(se_lhs^2 + se_rhs^2).
 */
inline ConditionalBound conditional_bound_check(std::size_t n, double c, double a, double z, std::size_t samples,
                                                std::uint64_t seed, unsigned workers = 0) {
    if (!(z > 0.0)) throw std::invalid_argument("conditional_bound_check: z must be positive");
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("conditional_bound_check: need 0 <= c < 1");
    if (samples < 1) throw std::invalid_argument("conditional_bound_check: samples must be >= 1");
    const double w = edge_threshold(-z, n, c);
    const double b = edge_threshold(a, n, c);
    std::vector<unsigned char> cond(samples), tail(samples), rhs_hit(samples);
    numerics::parallel_for(
        samples,
        [&](std::size_t k) {
            numerics::RandomStream rs(seed, k);
            const auto sp = sample_coupled_pair(n, c, rs);
            cond[k] = sp.eigs1.back() <= w;
            tail[k] = sp.eigs2.back() >= b;
            numerics::RandomStream aux(seed, mc_detail::kAuxiliaryStreamBase + k);
            rhs_hit[k] = sample_gue_max(n, aux) >= b - c * w;
        },
        workers);
    std::size_t accepted = 0, hits = 0, rhs_hits = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        if (cond[k]) {
            ++accepted;
            if (tail[k]) ++hits;
        }
        if (rhs_hit[k]) ++rhs_hits;
    }
    ConditionalBound r;
    r.acceptance = static_cast<double>(accepted) / static_cast<double>(samples);
    if (accepted == 0 || r.acceptance < 1e-3)
        throw RareEventError("conditional_bound_check: conditioning event too rare (acceptance " +
                             std::to_string(r.acceptance) + "); use a smaller z");
    r.lhs = binomial_estimate(hits, accepted);
    r.rhs = binomial_estimate(rhs_hits, samples);
    const double sigma = std::hypot(r.lhs.stderr_, r.rhs.stderr_);
    r.holds = r.lhs.value <= r.rhs.value + 3.0 * sigma;
    return r;
}

/// CSV export with columns draw_index, A0, At.
inline void write_batch_csv(std::ostream& os, const CoupledSampleBatch& batch) {
    os << "draw_index,A0,At\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (const auto& p : batch.pairs) {
        line.str("");
        line << p.draw_index << ',' << p.a0 << ',' << p.at << '\n';
        os << line.str();
    }
}

}  // namespace airyproc
