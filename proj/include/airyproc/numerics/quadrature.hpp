#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace airyproc::numerics {

/**
 * A quadrature rule on a finite interval: integral of f over [a, b] is
 * approximated by sum_i weights[i] * f(nodes[i]).
 */
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    double a = 0.0;
    double b = 0.0;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }

    /// Append another rule (used to build composite rules panel by panel).
    void append(const Quadrature& other) {
        nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
        weights.insert(weights.end(), other.weights.begin(), other.weights.end());
        if (nodes.size() == other.nodes.size()) a = other.a;
        b = other.b;
    }
};

namespace detail {

// Legendre P_m(x) and P_m'(x) by the three-term recurrence.
inline void legendre_with_derivative(int m, long double x, long double& p, long double& dp) {
    long double p0 = 1.0L;
    long double p1 = x;
    if (m == 0) {
        p = 1.0L;
        dp = 0.0L;
        return;
    }
    for (int k = 2; k <= m; ++k) {
        const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    p = p1;
    dp = m * (x * p1 - p0) / (x * x - 1.0L);
}

}  // namespace detail

/**
 * m-point Gauss-Legendre rule on [a, b].
 *
 * Roots of P_m are found by Newton iteration from the Tricomi initial
 * guess, carried in long double so nodes and weights are accurate to a
 * few ulps in double.
 */
inline Quadrature gauss_legendre(std::size_t m, double a, double b) {
    if (m == 0) throw std::invalid_argument("gauss_legendre: m must be >= 1");
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("gauss_legendre: non-finite bounds");
    if (!(a < b)) throw std::invalid_argument("gauss_legendre: requires a < b");

    const int n = static_cast<int>(m);
    std::vector<long double> x(m), w(m);
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // i-th largest root
        long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double p = 0, dp = 0;
        for (int it = 0; it < 100; ++it) {
            detail::legendre_with_derivative(n, z, p, dp);
            const long double dz = p / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-19L) break;
        }
        detail::legendre_with_derivative(n, z, p, dp);
        const long double wi = 2.0L / ((1.0L - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) x[n / 2] = 0.0L;

    Quadrature q;
    q.a = a;
    q.b = b;
    q.nodes.resize(m);
    q.weights.resize(m);
    const long double half = 0.5L * (static_cast<long double>(b) - a);
    const long double mid = 0.5L * (static_cast<long double>(b) + a);
    for (std::size_t i = 0; i < m; ++i) {
        q.nodes[i] = static_cast<double>(mid + half * x[i]);
        q.weights[i] = static_cast<double>(half * w[i]);
    }
    return q;
}

/// Composite Gauss-Legendre: [a, b] split into `panels` equal panels of m points each.
inline Quadrature composite_gauss_legendre(std::size_t m, double a, double b, std::size_t panels) {
    if (panels == 0) throw std::invalid_argument("composite_gauss_legendre: panels must be >= 1");
    const Quadrature ref = gauss_legendre(m, -1.0, 1.0);
    Quadrature q;
    q.a = a;
    q.b = b;
    q.nodes.reserve(m * panels);
    q.weights.reserve(m * panels);
    const double len = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + len * static_cast<double>(p);
        const double mid = lo + 0.5 * len;
        for (std::size_t i = 0; i < m; ++i) {
            q.nodes.push_back(mid + 0.5 * len * ref.nodes[i]);
            q.weights.push_back(0.5 * len * ref.weights[i]);
        }
    }
    return q;
}

}  // namespace airyproc::numerics
