#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "torus_dispersive/symbol.hpp"

namespace td {

using Complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct CoefficientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One real-basis term cos_amp*cos(beta.x) + sin_amp*sin(beta.x).
struct TrigTerm {
    LatticePoint beta{};
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

/// Canonical representative of the pair {beta, -beta}: first component
/// positive, or zero first component and nonnegative second.
inline bool is_canonical_mode(const LatticePoint& b) {
    return b.x1 > 0 || (b.x1 == 0 && b.x2 >= 0);
}

/// Real-valued trigonometric polynomial sum_beta c_beta e^{i beta.x} on the
/// 2-torus, stored as the full coefficient map with the conjugate symmetry
/// c_{-beta} = conj(c_beta) maintained by construction.
class TrigPolynomial {
public:
    using CoeffMap = std::map<LatticePoint, Complex>;

    TrigPolynomial() = default;

    static TrigPolynomial constant(double v) {
        TrigPolynomial p;
        if (v != 0.0) p.coeffs_[{0, 0}] = v;
        return p;
    }

    /// Builds from real-basis terms. Listing the same mode twice (up to
    /// sign) is rejected rather than merged, since it is always a typo in a
    /// coefficient file.
    static TrigPolynomial from_terms(const std::vector<TrigTerm>& terms) {
        TrigPolynomial p;
        std::map<LatticePoint, bool> seen;
        for (const auto& t : terms) {
            const LatticePoint canon = is_canonical_mode(t.beta) ? t.beta : -t.beta;
            if (seen.count(canon))
                throw CoefficientError("duplicate mode (" + std::to_string(t.beta.x1) +
                                       ", " + std::to_string(t.beta.x2) + ") in term list");
            seen[canon] = true;
            const Complex half(0.5 * t.cos_amp, -0.5 * t.sin_amp);
            p.coeffs_[t.beta] += half;
            p.coeffs_[-t.beta] += std::conj(half);
        }
        p.prune();
        return p;
    }

    /// Adds c at beta and conj(c) at -beta. For beta = 0 the imaginary part
    /// must vanish (the polynomial is real-valued).
    void add_pair(const LatticePoint& beta, Complex c) {
        if (beta == LatticePoint{0, 0}) {
            assert(std::abs(c.imag()) <= 1e-14 * (1.0 + std::abs(c)));
            coeffs_[beta] += c.real();
            return;
        }
        coeffs_[beta] += c;
        coeffs_[-beta] += std::conj(c);
    }

    const CoeffMap& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    std::size_t support_size() const { return coeffs_.size(); }

    Complex coeff(const LatticePoint& beta) const {
        const auto it = coeffs_.find(beta);
        return it == coeffs_.end() ? Complex{} : it->second;
    }

    /// Largest |beta|_inf over the support; 0 for the zero polynomial.
    long long degree() const {
        long long d = 0;
        for (const auto& [b, c] : coeffs_)
            d = std::max({d, std::llabs(b.x1), std::llabs(b.x2)});
        return d;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [b, c] : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    /// Pointwise value. The complex sum is exactly conjugate-paired, so the
    /// imaginary residue is pure rounding; it is asserted small and dropped.
    double evaluate(const Wavevector& x) const {
        Complex acc{};
        double scale = 1.0;
        for (const auto& [b, c] : coeffs_) {
            acc += c * std::polar(1.0, b.x1 * x.x1 + b.x2 * x.x2);
            scale += std::abs(c);
        }
        assert(std::abs(acc.imag()) <= 1e-14 * scale);
        return acc.real();
    }

    TrigPolynomial partial_derivative(int axis) const {
        assert(axis == 1 || axis == 2);
        TrigPolynomial d;
        for (const auto& [b, c] : coeffs_) {
            const double bj = axis == 1 ? double(b.x1) : double(b.x2);
            const Complex dc = Complex(0.0, bj) * c;
            if (dc != Complex{}) d.coeffs_[b] = dc;
        }
        return d;
    }

    /// Values at the uniform n x n grid x_jk = (2 pi j / n, 2 pi k / n),
    /// row-major in j. Requires the grid to resolve the support.
    std::vector<double> sample_grid(int n) const {
        if (n < 1 || 2 * degree() >= n)
            throw CoefficientError("grid of size " + std::to_string(n) +
                                   " cannot resolve degree " + std::to_string(degree()));
        std::vector<double> out(std::size_t(n) * n, 0.0);
        std::vector<Complex> ph1(n), ph2(n);
        for (const auto& [b, c] : coeffs_) {
            for (int j = 0; j < n; ++j) {
                const double x = two_pi * j / n;
                ph1[j] = std::polar(1.0, b.x1 * x);
                ph2[j] = std::polar(1.0, b.x2 * x);
            }
            for (int j = 0; j < n; ++j) {
                const Complex cj = c * ph1[j];
                double* row = out.data() + std::size_t(j) * n;
                for (int k = 0; k < n; ++k) row[k] += (cj * ph2[k]).real();
            }
        }
        return out;
    }

    TrigPolynomial& operator+=(const TrigPolynomial& o) {
        for (const auto& [b, c] : o.coeffs_) coeffs_[b] += c;
        prune();
        return *this;
    }
    friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) {
        a += b;
        return a;
    }
    TrigPolynomial& operator-=(const TrigPolynomial& o) {
        for (const auto& [b, c] : o.coeffs_) coeffs_[b] -= c;
        prune();
        return *this;
    }
    friend TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) {
        a -= b;
        return a;
    }
    /// Pointwise product; the coefficient maps convolve, degrees add.
    friend TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) {
        TrigPolynomial p;
        for (const auto& [ba, ca] : a.coeffs_)
            for (const auto& [bb, cb] : b.coeffs_)
                p.coeffs_[{ba.x1 + bb.x1, ba.x2 + bb.x2}] += ca * cb;
        p.prune();
        return p;
    }
    TrigPolynomial& operator*=(const TrigPolynomial& o) {
        *this = *this * o;
        return *this;
    }
    TrigPolynomial scaled(double s) const {
        TrigPolynomial p;
        if (s == 0.0) return p;
        p.coeffs_ = coeffs_;
        for (auto& [b, c] : p.coeffs_) c *= s;
        return p;
    }

    /// Real-basis terms over canonical modes, in map order. Inverse of
    /// from_terms up to mode ordering.
    std::vector<TrigTerm> to_terms() const {
        std::vector<TrigTerm> out;
        for (const auto& [b, c] : coeffs_) {
            if (!is_canonical_mode(b)) continue;
            if (b == LatticePoint{0, 0})
                out.push_back({b, c.real(), 0.0});
            else
                out.push_back({b, 2.0 * c.real(), -2.0 * c.imag()});
        }
        return out;
    }

    /// Checks the stored conjugate symmetry; cheap bug detector for code
    /// that assembles coefficient maps by hand.
    double max_symmetry_defect() const {
        double m = 0.0;
        for (const auto& [b, c] : coeffs_)
            m = std::max(m, std::abs(c - std::conj(coeff(-b))));
        return m;
    }

private:
    void prune() {
        for (auto it = coeffs_.begin(); it != coeffs_.end();)
            it = it->second == Complex{} ? coeffs_.erase(it) : std::next(it);
    }

    CoeffMap coeffs_;
};

}  // namespace td
