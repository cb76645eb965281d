#pragma once

#include <cmath>
#include <numbers>

namespace airyproc {

/// Ai(x) together with Ai'(x).
struct AiryPair {
    double ai = 0.0;
    double aip = 0.0;
    bool accurate = true;  ///< false outside [-60, 200]
};

namespace detail {

inline constexpr long double kAi0 = 0.355028053887817239260063186004183177L;   // Ai(0)
inline constexpr long double kAip0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)

/// Below this magnitude the Maclaurin series (summed in long double) is used.
inline constexpr double kSeriesRadius = 8.0;

inline AiryPair airy_maclaurin(double xd) {
    // Ai = Ai(0) f(x) + Ai'(0) g(x),
    // f = sum x^{3k} prod 1/((3j-1)3j),  g = sum x^{3k+1} prod 1/(3j(3j+1))
    const long double x = xd;
    const long double x3 = x * x * x;
    long double tf = 1.0L, f = 1.0L;       // f terms
    long double tg = x, g = x;             // g terms
    long double tfp = 0.5L * x * x, fp = tfp;  // f' terms, start at k = 1
    long double tgp = 1.0L, gp = 1.0L;     // g' terms
    for (int k = 1; k < 200; ++k) {
        const long double k3 = 3.0L * k;
        tf *= x3 / ((k3 - 1.0L) * k3);
        tg *= x3 / (k3 * (k3 + 1.0L));
        tgp *= x3 / (k3 * (k3 - 2.0L));
        f += tf;
        g += tg;
        gp += tgp;
        if (k >= 2) {
            tfp *= x3 / ((k3 - 1.0L) * (k3 - 3.0L));
            fp += tfp;
        }
        const long double mag = std::fabs(tf) + std::fabs(tg) + std::fabs(tfp) + std::fabs(tgp);
        if (k > 3 && mag < 1e-24L) break;
    }
    AiryPair r;
    r.ai = static_cast<double>(kAi0 * f - kAip0 * g);
    r.aip = static_cast<double>(kAi0 * fp - kAip0 * gp);
    return r;
}

// Asymptotic coefficients u_k, v_k of DLMF 9.7.
inline void asymptotic_coefficients(long double* u, long double* v, int n) {
    u[0] = 1.0L;
    v[0] = 1.0L;
    for (int k = 1; k < n; ++k) {
        u[k] = u[k - 1] * (6.0L * k - 5.0L) * (6.0L * k - 3.0L) * (6.0L * k - 1.0L) / ((2.0L * k - 1.0L) * 216.0L * k);
        v[k] = -u[k] * (6.0L * k + 1.0L) / (6.0L * k - 1.0L);
    }
}

inline constexpr int kAsymTerms = 40;

struct AsymTable {
    long double u[kAsymTerms];
    long double v[kAsymTerms];
    AsymTable() { asymptotic_coefficients(u, v, kAsymTerms); }
};

inline const AsymTable& asym_table() {
    static const AsymTable t;
    return t;
}

inline AiryPair airy_asymptotic_positive(double x) {
    const auto& c = asym_table();
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    long double su = 0.0L, sv = 0.0L, p = 1.0L;
    long double last = 1e300L;
    for (int k = 0; k < kAsymTerms; ++k) {
        const long double tu = c.u[k] * p;
        if (std::fabs(tu) > last) break;  // optimal truncation
        last = std::fabs(tu);
        su += tu;
        sv += c.v[k] * p;
        if (last < 1e-20L) break;
        p *= -1.0L / zeta;
    }
    const double pref = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
    const double x14 = std::sqrt(std::sqrt(x));
    AiryPair r;
    r.ai = pref / x14 * static_cast<double>(su);
    r.aip = -pref * x14 * static_cast<double>(sv);
    return r;
}

inline AiryPair airy_asymptotic_negative(double xneg) {
    const auto& c = asym_table();
    const double z = -xneg;
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    // even / odd partial sums
    long double ue = 0.0L, uo = 0.0L, ve = 0.0L, vo = 0.0L;
    long double p = 1.0L;
    long double last = 1e300L;
    for (int k = 0; k < kAsymTerms; ++k) {
        const long double tu = c.u[k] * p;
        if (std::fabs(tu) > last) break;
        last = std::fabs(tu);
        // (-1)^{floor(k/2)} pattern for the cos/sin split
        const long double sgn = ((k / 2) % 2 == 0) ? 1.0L : -1.0L;
        if (k % 2 == 0) {
            ue += sgn * tu;
            ve += sgn * c.v[k] * p;
        } else {
            uo += sgn * tu;
            vo += sgn * c.v[k] * p;
        }
        if (last < 1e-20L) break;
        p /= zeta;
    }
    const double phase = zeta - 0.25 * std::numbers::pi;
    const double cs = std::cos(phase), sn = std::sin(phase);
    const double z14 = std::sqrt(std::sqrt(z));
    const double isp = 1.0 / std::sqrt(std::numbers::pi);
    AiryPair r;
    r.ai = isp / z14 * (cs * static_cast<double>(ue) + sn * static_cast<double>(uo));
    r.aip = isp * z14 * (sn * static_cast<double>(ve) - cs * static_cast<double>(vo));
    return r;
}

}  // namespace detail

/**
 * Ai and Ai' at x.
 *
 * |x| <= 8: Maclaurin series in long double (80-bit on x86-64). At |x| = 8
 * the largest series term is ~4e6, so cancellation costs at most ~1e-12.
 * |x| > 8: the exponential (x > 0) or trigonometric (x < 0) asymptotic
 * expansion, truncated at its smallest term; the truncation error is about
 * exp(-2 zeta) relative, ~1e-13 at the switchover.
 */
inline AiryPair airy_pair(double x) {
    if (std::isnan(x)) return {x, x, false};
    AiryPair r;
    if (std::fabs(x) <= detail::kSeriesRadius)
        r = detail::airy_maclaurin(x);
    else if (x > 0)
        r = detail::airy_asymptotic_positive(x);
    else
        r = detail::airy_asymptotic_negative(x);
    r.accurate = (x >= -60.0 && x <= 200.0);
    return r;
}

inline double airy_ai(double x) { return airy_pair(x).ai; }
inline double airy_ai_prime(double x) { return airy_pair(x).aip; }

}  // namespace airyproc
