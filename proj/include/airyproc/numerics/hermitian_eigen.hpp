#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "airyproc/numerics/dense_matrix.hpp"

namespace airyproc::numerics {

/**
 * Complex Hermitian matrix stored as separate real and imaginary planes
 * (row-major). Only the lower triangle is read by the eigensolver, but
 * both triangles are kept so the Hermitian check can be done.
 */
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(std::size_t n) : n_(n), re_(n * n, 0.0), im_(n * n, 0.0) {}

    static HermitianMatrix from_complex(const ComplexMatrix& m) {
        if (!m.square()) throw std::invalid_argument("HermitianMatrix: matrix must be square");
        HermitianMatrix h(m.rows());
        for (std::size_t i = 0; i < h.n_; ++i)
            for (std::size_t j = 0; j < h.n_; ++j) {
                h.re_[i * h.n_ + j] = m(i, j).real();
                h.im_[i * h.n_ + j] = m(i, j).imag();
            }
        return h;
    }

    std::size_t size() const { return n_; }

    double& re(std::size_t i, std::size_t j) { return re_[i * n_ + j]; }
    double& im(std::size_t i, std::size_t j) { return im_[i * n_ + j]; }
    double re(std::size_t i, std::size_t j) const { return re_[i * n_ + j]; }
    double im(std::size_t i, std::size_t j) const { return im_[i * n_ + j]; }

    std::complex<double> operator()(std::size_t i, std::size_t j) const { return {re(i, j), im(i, j)}; }

    /// Sets entry (i, j) and its mirror (j, i) = conj.
    void set(std::size_t i, std::size_t j, std::complex<double> z) {
        re(i, j) = z.real();
        im(i, j) = z.imag();
        re(j, i) = z.real();
        im(j, i) = -z.imag();
        if (i == j) im(i, i) = 0.0;
    }

    double max_abs() const {
        double s = 0.0;
        for (std::size_t k = 0; k < re_.size(); ++k) s = std::max(s, std::hypot(re_[k], im_[k]));
        return s;
    }

    /// max |M_ij - conj(M_ji)|
    double hermitian_defect() const {
        double d = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                d = std::max(d, std::hypot(re(i, j) - re(j, i), im(i, j) + im(j, i)));
        return d;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> re_;
    std::vector<double> im_;
};

namespace detail {

/**
 * Householder reduction of a Hermitian matrix to real symmetric tridiagonal
 * form. Works on the lower triangle. Each reflector is H = I - u u^H with
 * ||u||^2 = 2, which is Hermitian and unitary, so the subdiagonal produced
 * is complex with modulus ||x||; a diagonal unitary similarity makes it
 * real, so only the moduli are kept.
 */
inline void tridiagonalize(HermitianMatrix a, std::vector<double>& diag, std::vector<double>& off) {
    const std::size_t n = a.size();
    diag.assign(n, 0.0);
    off.assign(n > 0 ? n - 1 : 0, 0.0);
    std::vector<double> ur(n), ui(n), pr(n), pi(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t s = k + 1;  // first row of the trailing block
        double xnorm2 = 0.0;
        for (std::size_t i = s; i < n; ++i) xnorm2 += a.re(i, k) * a.re(i, k) + a.im(i, k) * a.im(i, k);
        const double ar = a.re(s, k);
        const double ai = a.im(s, k);
        const double alpha_abs = std::hypot(ar, ai);
        const double tail2 = xnorm2 - alpha_abs * alpha_abs;
        const double xnorm = std::sqrt(xnorm2);
        diag[k] = a.re(k, k);
        off[k] = xnorm;
        if (tail2 <= 1e-300 * (1.0 + xnorm2)) continue;  // already tridiagonal in this column

        // w = x - beta e1 with beta = -exp(i arg alpha) ||x||
        double phr = 1.0, phi = 0.0;
        if (alpha_abs > 0.0) {
            phr = ar / alpha_abs;
            phi = ai / alpha_abs;
        }
        const double w0 = alpha_abs + xnorm;
        double wnorm2 = w0 * w0 + tail2;
        const double scale = std::sqrt(2.0 / wnorm2);
        ur[s] = phr * w0 * scale;
        ui[s] = phi * w0 * scale;
        for (std::size_t i = s + 1; i < n; ++i) {
            ur[i] = a.re(i, k) * scale;
            ui[i] = a.im(i, k) * scale;
        }

        // p = A22 u using the lower triangle only
        for (std::size_t i = s; i < n; ++i) pr[i] = pi[i] = 0.0;
        for (std::size_t i = s; i < n; ++i) {
            double sr = a.re(i, i) * ur[i];
            double si = a.re(i, i) * ui[i];
            const double uir = ur[i], uii = ui[i];
            for (std::size_t j = s; j < i; ++j) {
                const double mr = a.re(i, j), mi = a.im(i, j);
                // A(i,j) u(j)
                sr += mr * ur[j] - mi * ui[j];
                si += mr * ui[j] + mi * ur[j];
                // A(j,i) u(i) = conj(A(i,j)) u(i)
                pr[j] += mr * uir + mi * uii;
                pi[j] += mr * uii - mi * uir;
            }
            pr[i] += sr;
            pi[i] += si;
        }
        // K = (u^H p) / 2, real for Hermitian A
        double kk = 0.0;
        for (std::size_t i = s; i < n; ++i) kk += ur[i] * pr[i] + ui[i] * pi[i];
        kk *= 0.5;
        for (std::size_t i = s; i < n; ++i) {
            pr[i] -= kk * ur[i];
            pi[i] -= kk * ui[i];
        }
        // A22 -= u q^H + q u^H (lower triangle)
        for (std::size_t i = s; i < n; ++i) {
            const double uir = ur[i], uii = ui[i], qir = pr[i], qii = pi[i];
            for (std::size_t j = s; j <= i; ++j) {
                // u_i conj(q_j) + q_i conj(u_j)
                const double rr = uir * pr[j] + uii * pi[j] + qir * ur[j] + qii * ui[j];
                const double ri = uii * pr[j] - uir * pi[j] + qii * ur[j] - qir * ui[j];
                a.re(i, j) -= rr;
                a.im(i, j) -= ri;
            }
        }
    }
    if (n >= 2) {
        diag[n - 2] = a.re(n - 2, n - 2);
        off[n - 2] = std::hypot(a.re(n - 1, n - 2), a.im(n - 1, n - 2));
    }
    if (n >= 1) diag[n - 1] = a.re(n - 1, n - 1);
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues only.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double> e) {
    const std::size_t n = d.size();
    if (n < 2) return;
    e.push_back(0.0);
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw std::runtime_error("tridiagonal_ql: no convergence");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                std::size_t i = m;
                bool underflow = false;
                while (i-- > l) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

/**
 * All eigenvalues of a complex Hermitian matrix, ascending.
 * Householder tridiagonalization followed by implicit-shift QL.
 * Throws if the input deviates from Hermitian by more than 1e-12 * max|M|.
 */
inline std::vector<double> hermitian_eigenvalues(const HermitianMatrix& m, bool check = true) {
    if (check) {
        const double scale = std::max(1.0, m.max_abs());
        if (m.hermitian_defect() > 1e-12 * scale)
            throw std::invalid_argument("hermitian_eigenvalues: matrix is not Hermitian");
    }
    std::vector<double> d, e;
    detail::tridiagonalize(m, d, e);
    detail::tridiagonal_ql(d, std::move(e));
    std::sort(d.begin(), d.end());
    return d;
}

inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
    return hermitian_eigenvalues(HermitianMatrix::from_complex(m));
}

}  // namespace airyproc::numerics
