#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "torus_dispersive/trig_poly.hpp"

namespace td {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Variable coefficients of the operator: the three second-order
/// coefficients indexed by sigma (a_plus ~ xi1^2, a_zero ~ 2*xi1*xi2,
/// a_minus ~ xi2^2), the first-order pair b and the zero-order c.
struct CoefficientSet {
    TrigPolynomial a_plus;
    TrigPolynomial a_zero;
    TrigPolynomial a_minus;
    TrigPolynomial b1;
    TrigPolynomial b2;
    TrigPolynomial c;

    long long degree() const {
        long long d = 0;
        for (const TrigPolynomial* p : {&a_plus, &a_zero, &a_minus, &b1, &b2, &c})
            d = std::max(d, p->degree());
        return d;
    }

    bool second_order_part_is_zero() const {
        return a_plus.is_zero() && a_zero.is_zero() && a_minus.is_zero();
    }
};

/// a(x, xi) = a_plus(x)*xi1^2 + 2*a_zero(x)*xi1*xi2 + a_minus(x)*xi2^2,
/// the full second-order symbol with its multinomial weights.
inline double quadratic_symbol_eval(const CoefficientSet& set, const Wavevector& x,
                                    const Wavevector& xi) {
    return set.a_plus.evaluate(x) * xi.x1 * xi.x1 +
           2.0 * set.a_zero.evaluate(x) * xi.x1 * xi.x2 +
           set.a_minus.evaluate(x) * xi.x2 * xi.x2;
}

/// Same quadratic form with the three monomials xi1^2, xi1*xi2, xi2^2
/// supplied directly (used when they are known more precisely than the
/// components themselves).
inline double quadratic_symbol_eval(const CoefficientSet& set, const Wavevector& x,
                                    double xi1_sq, double xi1_xi2, double xi2_sq) {
    return set.a_plus.evaluate(x) * xi1_sq + 2.0 * set.a_zero.evaluate(x) * xi1_xi2 +
           set.a_minus.evaluate(x) * xi2_sq;
}

/// max over the torus of |a_plus| + 2|a_zero| + |a_minus|, the amplitude
/// entering the explicit second-order stability bound. Evaluated on a grid
/// fine enough to resolve every product of the supports.
inline double second_order_amplitude(const CoefficientSet& set, int n = 64) {
    while (2 * set.degree() >= n) n *= 2;
    if (set.second_order_part_is_zero()) return 0.0;
    const std::vector<double> ap = set.a_plus.sample_grid(n);
    const std::vector<double> a0 = set.a_zero.sample_grid(n);
    const std::vector<double> am = set.a_minus.sample_grid(n);
    double m = 0.0;
    for (std::size_t i = 0; i < ap.size(); ++i)
        m = std::max(m, std::abs(ap[i]) + 2.0 * std::abs(a0[i]) + std::abs(am[i]));
    return m;
}

/// Coefficient set of the conjugated operator e^phi L e^{-phi}, where L is
/// the spatial part p(d) + a-part + b-part + c of the operator described by
/// `set`. Substituting d_j -> d_j - phi_j (phi_j the j-th derivative of phi)
/// and expanding is exact, so the returned set reproduces the conjugation
/// identically, not asymptotically. When grad phi = (a_minus, a_plus) and
/// a_zero = a_plus + a_minus, the second-order part of the result cancels:
/// the conjugated operator is first order plus p(d), which is what makes
/// evolving the gauged variable numerically benign.
inline CoefficientSet conjugate_by_gauge(const CoefficientSet& set, const TrigPolynomial& phi) {
    const TrigPolynomial f1 = phi.partial_derivative(1);
    const TrigPolynomial f2 = phi.partial_derivative(2);
    const TrigPolynomial f11 = f1.partial_derivative(1);
    const TrigPolynomial f12 = f1.partial_derivative(2);
    const TrigPolynomial f22 = f2.partial_derivative(2);
    const TrigPolynomial f112 = f11.partial_derivative(2);
    const TrigPolynomial f122 = f12.partial_derivative(2);

    CoefficientSet out;
    out.a_plus = set.a_plus - f2;
    out.a_zero = set.a_zero - f1 - f2;
    out.a_minus = set.a_minus - f1;
    out.b1 = set.b1 + (f1 * f2).scaled(2.0) - f12.scaled(2.0) + f2 * f2 - f22 -
             (set.a_plus * f1).scaled(2.0) - (set.a_zero * f2).scaled(2.0);
    out.b2 = set.b2 + f1 * f1 - f11 + (f1 * f2).scaled(2.0) - f12.scaled(2.0) -
             (set.a_zero * f1).scaled(2.0) - (set.a_minus * f2).scaled(2.0);
    out.c = set.c + f11 * f2 + (f1 * f12).scaled(2.0) + (f2 * f12).scaled(2.0) + f1 * f22 -
            f112 - f122 - f1 * f1 * f2 - f1 * f2 * f2 + set.a_plus * (f1 * f1 - f11) +
            (set.a_zero * (f1 * f2 - f12)).scaled(2.0) + set.a_minus * (f2 * f2 - f22) -
            set.b1 * f1 - set.b2 * f2;
    return out;
}

namespace detail {

inline double json_number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

inline TrigPolynomial parse_term_list(const Json& j, const std::string& where,
                                      long long degree_cap) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of terms");
    std::vector<TrigTerm> terms;
    for (const Json& t : j) {
        if (!t.is_object()) throw ConfigError(where + ": term must be an object");
        for (const auto& [key, val] : t.items())
            if (key != "beta" && key != "cos" && key != "sin")
                throw ConfigError(where + ": unknown term key \"" + key + "\"");
        if (!t.contains("beta") || !t["beta"].is_array() || t["beta"].size() != 2 ||
            !t["beta"][0].is_number_integer() || !t["beta"][1].is_number_integer())
            throw ConfigError(where + ": beta must be a pair of integers");
        TrigTerm term;
        term.beta = {t["beta"][0].get<long long>(), t["beta"][1].get<long long>()};
        if (std::llabs(term.beta.x1) > degree_cap || std::llabs(term.beta.x2) > degree_cap)
            throw ConfigError(where + ": mode exceeds the degree cap " +
                              std::to_string(degree_cap));
        if (t.contains("cos")) term.cos_amp = json_number(t["cos"], where + ".cos");
        if (t.contains("sin")) term.sin_amp = json_number(t["sin"], where + ".sin");
        terms.push_back(term);
    }
    try {
        return TrigPolynomial::from_terms(terms);
    } catch (const CoefficientError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Json term_list_to_json(const TrigPolynomial& p) {
    Json out = Json::array();
    for (const TrigTerm& t : p.to_terms()) {
        Json jt;
        jt["beta"] = {t.beta.x1, t.beta.x2};
        jt["cos"] = t.cos_amp;
        jt["sin"] = t.sin_amp;
        out.push_back(jt);
    }
    return out;
}

}  // namespace detail

/// Parses the coefficient schema
///   {"a": {"sigma_plus1": [term...], "sigma_0": [...], "sigma_minus1": [...]},
///    "b": {"b1": [...], "b2": [...]}, "c": [term...]}
/// with term = {"beta": [int, int], "cos": number, "sin": number}.
/// Every group is optional and omitted groups are zero; unknown keys and
/// malformed terms are errors, as are modes past the degree cap.
inline CoefficientSet parse_coefficient_set(const Json& j, long long degree_cap = 16) {
    if (!j.is_object()) throw ConfigError("coefficient schema must be an object");
    for (const auto& [key, val] : j.items())
        if (key != "a" && key != "b" && key != "c")
            throw ConfigError("unknown coefficient key \"" + key + "\"");
    CoefficientSet set;
    if (j.contains("a")) {
        const Json& a = j["a"];
        if (!a.is_object()) throw ConfigError("\"a\" must be an object");
        for (const auto& [key, val] : a.items())
            if (key != "sigma_plus1" && key != "sigma_0" && key != "sigma_minus1")
                throw ConfigError("unknown key \"" + key + "\" under \"a\"");
        if (a.contains("sigma_plus1"))
            set.a_plus = detail::parse_term_list(a["sigma_plus1"], "a.sigma_plus1", degree_cap);
        if (a.contains("sigma_0"))
            set.a_zero = detail::parse_term_list(a["sigma_0"], "a.sigma_0", degree_cap);
        if (a.contains("sigma_minus1"))
            set.a_minus = detail::parse_term_list(a["sigma_minus1"], "a.sigma_minus1", degree_cap);
    }
    if (j.contains("b")) {
        const Json& b = j["b"];
        if (!b.is_object()) throw ConfigError("\"b\" must be an object");
        for (const auto& [key, val] : b.items())
            if (key != "b1" && key != "b2")
                throw ConfigError("unknown key \"" + key + "\" under \"b\"");
        if (b.contains("b1")) set.b1 = detail::parse_term_list(b["b1"], "b.b1", degree_cap);
        if (b.contains("b2")) set.b2 = detail::parse_term_list(b["b2"], "b.b2", degree_cap);
    }
    if (j.contains("c")) set.c = detail::parse_term_list(j["c"], "c", degree_cap);
    return set;
}

inline Json coefficient_set_to_json(const CoefficientSet& set) {
    Json j;
    j["a"]["sigma_plus1"] = detail::term_list_to_json(set.a_plus);
    j["a"]["sigma_0"] = detail::term_list_to_json(set.a_zero);
    j["a"]["sigma_minus1"] = detail::term_list_to_json(set.a_minus);
    j["b"]["b1"] = detail::term_list_to_json(set.b1);
    j["b"]["b2"] = detail::term_list_to_json(set.b2);
    j["c"] = detail::term_list_to_json(set.c);
    return j;
}

}  // namespace td
