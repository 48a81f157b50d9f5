#pragma once

#include <array>

namespace td {

template <class T>
struct Vec2 {
    T x1{};
    T x2{};

    friend bool operator==(const Vec2&, const Vec2&) = default;
    friend auto operator<=>(const Vec2&, const Vec2&) = default;
};

using Wavevector   = Vec2<double>;
using LatticePoint = Vec2<long long>;

inline LatticePoint operator-(const LatticePoint& b) { return {-b.x1, -b.x2}; }

/// Symbol p(xi) = xi1*xi2*(xi1 + xi2) of the constant-coefficient
/// third-order part. Odd, and p(xi) = 0 exactly on the two axes and the
/// anti-diagonal xi1 + xi2 = 0.
template <class T>
T eval_p(const Vec2<T>& xi) {
    return xi.x1 * xi.x2 * (xi.x1 + xi.x2);
}

/// Gradient of p: (xi2*(2*xi1 + xi2), xi1*(2*xi2 + xi1)).
/// Satisfies the scaling identity xi . grad p(xi) = 3 p(xi).
template <class T>
Vec2<T> eval_grad_p(const Vec2<T>& xi) {
    return {xi.x2 * (2 * xi.x1 + xi.x2), xi.x1 * (2 * xi.x2 + xi.x1)};
}

/// det p''(xi) = -4*(xi1^2 + xi1*xi2 + xi2^2).
/// Strictly negative away from the origin, so grad p is a local
/// diffeomorphism everywhere except at xi = 0.
template <class T>
T hessian_det(const Vec2<T>& xi) {
    return T(-4) * (xi.x1 * xi.x1 + xi.x1 * xi.x2 + xi.x2 * xi.x2);
}

/// A second-order multi-index alpha with |alpha| = 2, its diagonal label
/// sigma = (alpha_1 - alpha_2)/2 and the multinomial weight 2!/alpha!.
struct SecondOrderIndex {
    std::array<int, 2> alpha;
    int sigma;
    int weight;
};

/// The three second-order indices in fixed order sigma = +1, 0, -1.
inline std::array<SecondOrderIndex, 3> second_order_indices() {
    return {{{{2, 0}, 1, 1}, {{1, 1}, 0, 2}, {{0, 2}, -1, 1}}};
}

}  // namespace td
