#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace airyproc::numerics {

/**
 * Values of a function on a uniform 3-axis lattice. Axis 0 is typically
 * time, axes 1 and 2 the two spatial coordinates. Index (i, j, k) sits at
 * origin + (i, j, k) * spacing.
 */
struct LatticeValues {
    std::array<std::size_t, 3> extent{1, 1, 1};
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<double> values;

    LatticeValues() = default;
    LatticeValues(std::array<std::size_t, 3> ext, std::array<double, 3> org, std::array<double, 3> h)
        : extent(ext), origin(org), spacing(h), values(ext[0] * ext[1] * ext[2], 0.0) {}

    double& at(std::size_t i, std::size_t j, std::size_t k) { return values[(i * extent[1] + j) * extent[2] + k]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * extent[1] + j) * extent[2] + k];
    }
    double coordinate(std::size_t axis, std::size_t index) const {
        return origin[axis] + spacing[axis] * static_cast<double>(index);
    }
};

using MultiIndex = std::array<int, 3>;
using LatticePoint = std::array<std::size_t, 3>;

namespace detail {

// Second-order central stencils for derivatives of order 0..4, offsets -2..2.
inline std::span<const double> central_stencil(int order) {
    static constexpr double s0[5] = {0.0, 0.0, 1.0, 0.0, 0.0};
    static constexpr double s1[5] = {0.0, -0.5, 0.0, 0.5, 0.0};
    static constexpr double s2[5] = {0.0, 1.0, -2.0, 1.0, 0.0};
    static constexpr double s3[5] = {-0.5, 1.0, 0.0, -1.0, 0.5};
    static constexpr double s4[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
    switch (order) {
        case 0: return s0;
        case 1: return s1;
        case 2: return s2;
        case 3: return s3;
        case 4: return s4;
        default: throw std::invalid_argument("fd_partial: derivative order must be in [0, 4]");
    }
}

inline int stencil_half_width(int order) { return order == 0 ? 0 : (order <= 2 ? 1 : 2); }

}  // namespace detail

/**
 * Central-difference partial derivative of a lattice function, O(h^2) in
 * every axis. Mixed partials are the tensor product of the 1-D stencils.
 * Throws std::out_of_range when the stencil does not fit in the lattice.
 */
inline double fd_partial(const LatticeValues& grid, const MultiIndex& order, const LatticePoint& point) {
    std::array<int, 3> half{};
    for (int ax = 0; ax < 3; ++ax) {
        if (order[ax] < 0 || order[ax] > 4) throw std::invalid_argument("fd_partial: derivative order must be in [0, 4]");
        half[ax] = detail::stencil_half_width(order[ax]);
        const auto p = static_cast<long>(point[ax]);
        if (p - half[ax] < 0 || p + half[ax] >= static_cast<long>(grid.extent[ax]))
            throw std::out_of_range("fd_partial: stencil exceeds grid along axis " + std::to_string(ax));
    }
    const auto st0 = detail::central_stencil(order[0]);
    const auto st1 = detail::central_stencil(order[1]);
    const auto st2 = detail::central_stencil(order[2]);
    double acc = 0.0;
    for (int a = -half[0]; a <= half[0]; ++a) {
        const double c0 = st0[a + 2];
        if (c0 == 0.0) continue;
        for (int b = -half[1]; b <= half[1]; ++b) {
            const double c1 = st1[b + 2];
            if (c1 == 0.0) continue;
            for (int c = -half[2]; c <= half[2]; ++c) {
                const double c2 = st2[c + 2];
                if (c2 == 0.0) continue;
                acc += c0 * c1 * c2 *
                       grid.at(point[0] + a, point[1] + b, point[2] + c);
            }
        }
    }
    double denom = 1.0;
    for (int ax = 0; ax < 3; ++ax)
        for (int k = 0; k < order[ax]; ++k) denom *= grid.spacing[ax];
    return acc / denom;
}

/// 1-D central derivative of a sampled scalar function, same stencils as fd_partial.
template <class F>
double fd_derivative(F&& f, double x, int order, double h) {
    const auto st = detail::central_stencil(order);
    double acc = 0.0;
    for (int k = -2; k <= 2; ++k)
        if (st[k + 2] != 0.0) acc += st[k + 2] * f(x + k * h);
    double denom = 1.0;
    for (int k = 0; k < order; ++k) denom *= h;
    return acc / denom;
}

}  // namespace airyproc::numerics
