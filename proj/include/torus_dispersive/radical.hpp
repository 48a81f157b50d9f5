#pragma once

#include <cassert>
#include <cmath>
#include <sstream>
#include <string>

#include "torus_dispersive/rational.hpp"

namespace td {

/// Exact scalar q + r*sqrt(D) in a real quadratic extension of the
/// rationals, with D a fixed nonnegative integer. All comparisons are
/// decided by exact integer arithmetic; no numerical square root is ever
/// taken except in to_double().
///
/// A perfect-square D needs no special casing: sign() resolves it through
/// the same squared comparison, and the representation keeps the radical
/// coefficient as given.
class RadicalScalar {
public:
    RadicalScalar() = default;

    RadicalScalar(Rational rational_part, Rational radical_coeff, BigInt disc)
        : q_(std::move(rational_part)), r_(std::move(radical_coeff)), d_(std::move(disc)) {
        assert(d_ >= 0);
        if (d_ == 0 || r_ == 0) {
            r_ = 0;
            d_ = 0;
        }
    }

    RadicalScalar(const Rational& q) : q_(q) {}  // NOLINT: implicit by design
    RadicalScalar(long long q) : q_(q) {}        // NOLINT

    const Rational& rational_part() const { return q_; }
    const Rational& radical_coeff() const { return r_; }
    const BigInt& disc() const { return d_; }

    /// Sign of q + r*sqrt(D), exactly. When q and r disagree in sign the
    /// comparison reduces to q^2 vs r^2*D, which also settles values that
    /// collapse to zero for perfect-square D.
    int sign() const {
        const int sq = q_.sign();
        const int sr = r_.sign();
        if (sr == 0) return sq;
        if (sq == 0) return sr;
        if (sq == sr) return sq;
        const Rational lhs = q_ * q_;
        const Rational rhs = r_ * r_ * Rational(d_);
        if (lhs > rhs) return sq;
        if (lhs < rhs) return sr;
        return 0;
    }

    bool is_zero() const { return sign() == 0; }

    double to_double() const {
        return td::to_double(q_) + td::to_double(r_) * std::sqrt(td::to_double(d_));
    }

    std::string to_string() const {
        std::ostringstream os;
        if (r_ == 0) {
            os << q_;
            return os.str();
        }
        if (q_ != 0) os << q_ << (r_ > 0 ? " + " : " - ");
        else if (r_ < 0) os << "-";
        Rational ar = r_ > 0 ? r_ : Rational(-r_);
        if (ar != 1) os << "(" << ar << ")*";
        os << "sqrt(" << d_ << ")";
        return os.str();
    }

    RadicalScalar operator-() const { return RadicalScalar(-q_, -r_, d_); }

    friend RadicalScalar operator+(const RadicalScalar& a, const RadicalScalar& b) {
        return RadicalScalar(a.q_ + b.q_, a.r_ + b.r_, merged_disc(a, b));
    }
    friend RadicalScalar operator-(const RadicalScalar& a, const RadicalScalar& b) {
        return RadicalScalar(a.q_ - b.q_, a.r_ - b.r_, merged_disc(a, b));
    }
    friend RadicalScalar operator*(const RadicalScalar& a, const RadicalScalar& b) {
        const BigInt d = merged_disc(a, b);
        return RadicalScalar(a.q_ * b.q_ + a.r_ * b.r_ * Rational(d),
                             a.q_ * b.r_ + a.r_ * b.q_, d);
    }

    friend bool operator==(const RadicalScalar& a, const RadicalScalar& b) {
        return (a - b).sign() == 0;
    }
    friend bool operator<(const RadicalScalar& a, const RadicalScalar& b) {
        return (a - b).sign() < 0;
    }
    friend bool operator>(const RadicalScalar& a, const RadicalScalar& b) {
        return (a - b).sign() > 0;
    }

private:
    // Values with no radical part carry D = 0 and combine with any field.
    static BigInt merged_disc(const RadicalScalar& a, const RadicalScalar& b) {
        if (a.d_ == 0) return b.d_;
        if (b.d_ == 0) return a.d_;
        assert(a.d_ == b.d_ && "mixing distinct quadratic extensions");
        return a.d_;
    }

    Rational q_{};
    Rational r_{};
    BigInt d_{};
};

}  // namespace td
