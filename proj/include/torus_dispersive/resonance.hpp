#pragma once

#include <cassert>
#include <cmath>

#include "torus_dispersive/radical.hpp"
#include "torus_dispersive/symbol.hpp"

namespace td {

/// Discriminant D = (a2 - 2*a1)^2 + 3*a2^2 of the quartic satisfied by
/// xi1^2 when grad p(xi) = (a1, a2). A sum of squares, hence never
/// negative; zero exactly at the origin.
inline BigInt discriminant(const LatticePoint& alpha) {
    const BigInt a1(alpha.x1), a2(alpha.x2);
    const BigInt t = a2 - 2 * a1;
    return t * t + 3 * a2 * a2;
}

/// The solution pair +/-xi of grad p(xi) = alpha for an integer target.
/// The squared quantities live in Q(sqrt(D)) exactly; xi is the float
/// representative with xi1 >= 0, and xi2 >= 0 when xi1 = 0.
struct LatticeSolution {
    LatticePoint target{};
    BigInt disc{};
    RadicalScalar xi_sq;   // xi1^2
    RadicalScalar eta_sq;  // xi2^2
    RadicalScalar xi_eta;  // xi1*xi2
    int chi = 0;           // sign of xi1*xi2; 0 only for targets on an axis
    Wavevector xi{};       // representative in floats
};

/// Inverts grad p on a lattice target. grad p(xi) = (a1, a2) reduces to
/// 3*(xi1^2)^2 + 2*(2*a1 - a2)*xi1^2 - a2^2 = 0, whose admissible root is
///   xi1^2 = (a2 - 2*a1 + sqrt(D))/3,
/// with xi2^2 = (a1 - 2*a2 + sqrt(D))/3 and 2*xi1*xi2 = (2*(a1+a2) - sqrt(D))/3.
/// Those formulas are exact in Q(sqrt(D)) for every target, axes included;
/// only the sign bookkeeping of the representative needs the case split.
inline LatticeSolution solve_xi(const LatticePoint& alpha) {
    const BigInt a(alpha.x1), b(alpha.x2);

    LatticeSolution s;
    s.target = alpha;
    s.disc = discriminant(alpha);
    s.xi_sq = RadicalScalar(Rational(b - 2 * a, 3), Rational(1, 3), s.disc);
    s.eta_sq = RadicalScalar(Rational(a - 2 * b, 3), Rational(1, 3), s.disc);
    s.xi_eta = RadicalScalar(Rational(a + b, 3), Rational(-1, 6), s.disc);
    assert(s.xi_sq.sign() >= 0 && s.eta_sq.sign() >= 0);

    if (alpha.x1 != 0 && alpha.x2 != 0) {
        // sign of 2*(a1+a2) - sqrt(D); nonzero because
        // 4*(a1+a2)^2 - D = 12*a1*a2 != 0 off the axes.
        s.chi = RadicalScalar(Rational(2 * (a + b)), Rational(-1), s.disc).sign();
        assert(s.chi != 0);
        s.xi = {std::sqrt(s.xi_sq.to_double()),
                s.chi * std::sqrt(s.eta_sq.to_double())};
        return s;
    }

    const long long a1 = alpha.x1, a2 = alpha.x2;
    if (a1 == 0 && a2 == 0) {
        s.xi = {0.0, 0.0};
    } else if (a1 == 0 && a2 > 0) {
        s.xi = {std::sqrt(double(a2)), 0.0};
    } else if (a1 == 0 && a2 < 0) {
        const double r = std::sqrt(-a2 / 3.0);
        s.xi = {r, -2.0 * r};
    } else if (a2 == 0 && a1 > 0) {
        s.xi = {0.0, std::sqrt(double(a1))};
    } else {  // a2 == 0, a1 < 0
        const double r = std::sqrt(-a1 / 3.0);
        s.xi = {2.0 * r, -r};
    }
    return s;
}

/// xi1(alpha)*xi2(alpha) + xi1(-alpha)*xi2(-alpha), exactly. Closed forms:
/// -(2/3)*|a2| on the axis a1 = 0, -(2/3)*|a1| on the axis a2 = 0, and
/// -(1/3)*sqrt(D) otherwise; strictly negative for alpha != 0, which is
/// what rules out cancellation between the two branches of the pair.
inline RadicalScalar trick_identity(const LatticePoint& alpha) {
    const LatticeSolution plus = solve_xi(alpha);
    const LatticeSolution minus = solve_xi(-alpha);
    return plus.xi_eta + minus.xi_eta;
}

/// Result of testing a wavevector against the resonant lattice
/// {xi : grad p(xi) has integer entries}.
struct LambdaMembership {
    Wavevector xi{};
    Wavevector image{};      // grad p(xi)
    LatticePoint nearest{};  // componentwise nearest lattice point
    double distance = 0.0;
    bool member = false;
};

inline LambdaMembership lambda_check(const Wavevector& xi, double tol = 1e-9) {
    LambdaMembership m;
    m.xi = xi;
    m.image = eval_grad_p(xi);
    m.nearest = {std::llround(m.image.x1), std::llround(m.image.x2)};
    m.distance = std::hypot(m.image.x1 - double(m.nearest.x1),
                            m.image.x2 - double(m.nearest.x2));
    m.member = m.distance <= tol;
    return m;
}

}  // namespace td
