#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "torus_dispersive/coefficients.hpp"
#include "torus_dispersive/resonance.hpp"

namespace td {

struct AnalyzerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The coefficient-identity verdict and the resonance-integral samples are
/// two independent computations of the same mathematical fact. When they
/// contradict each other the implementation is broken; this is never a
/// statement about the input.
struct InconsistencyError : AnalyzerError {
    using AnalyzerError::AnalyzerError;
};

struct IdentityCheck {
    bool pass = false;
    double max_violation = 0.0;
    std::vector<LatticePoint> failing;  // canonical representatives
};

struct GradientCheck {
    bool pass = false;
    double max_violation = 0.0;
    std::vector<LatticePoint> failing;
    std::array<Complex, 2> mean{};  // coefficients at beta=0 of (a_minus, a_plus)
};

/// Max over modes of |a_zero_beta - a_plus_beta - a_minus_beta|.
inline IdentityCheck check_sum_identity(const CoefficientSet& set, double tol = 1e-10) {
    IdentityCheck r;
    const TrigPolynomial defect = set.a_zero - set.a_plus - set.a_minus;
    for (const auto& [b, c] : defect.coeffs()) {
        const double v = std::abs(c);
        r.max_violation = std::max(r.max_violation, v);
        if (v > tol && is_canonical_mode(b)) r.failing.push_back(b);
    }
    r.pass = r.max_violation <= tol;
    return r;
}

/// (a_minus, a_plus) is a gradient field iff both means vanish and for
/// every mode the pair is parallel to beta:
/// |a_minus_beta * beta2 - a_plus_beta * beta1| = 0.
inline GradientCheck check_gradient_condition(const CoefficientSet& set, double tol = 1e-10) {
    GradientCheck r;
    r.mean = {set.a_minus.coeff({0, 0}), set.a_plus.coeff({0, 0})};
    r.max_violation = std::max(std::abs(r.mean[0]), std::abs(r.mean[1]));
    if (r.max_violation > tol) r.failing.push_back({0, 0});

    std::set<LatticePoint> support;
    for (const auto& [b, c] : set.a_minus.coeffs()) support.insert(b);
    for (const auto& [b, c] : set.a_plus.coeffs()) support.insert(b);
    for (const LatticePoint& b : support) {
        if (b == LatticePoint{0, 0}) continue;
        const double v = std::abs(set.a_minus.coeff(b) * double(b.x2) -
                                  set.a_plus.coeff(b) * double(b.x1));
        r.max_violation = std::max(r.max_violation, v);
        if (v > tol && is_canonical_mode(b)) r.failing.push_back(b);
    }
    r.pass = r.max_violation <= tol;
    return r;
}

/// The mean-zero potential with grad phi = (a_minus, a_plus):
/// phi_beta = a_minus_beta/(i*beta1), falling back to a_plus_beta/(i*beta2)
/// on the beta1 = 0 line.
inline TrigPolynomial construct_potential(const CoefficientSet& set, double tol = 1e-10) {
    const GradientCheck g = check_gradient_condition(set, tol);
    if (!g.pass)
        throw AnalyzerError("no potential exists: gradient condition violated by " +
                            std::to_string(g.max_violation));
    TrigPolynomial phi;
    std::set<LatticePoint> support;
    for (const auto& [b, c] : set.a_minus.coeffs()) support.insert(b);
    for (const auto& [b, c] : set.a_plus.coeffs()) support.insert(b);
    for (const LatticePoint& b : support) {
        if (!is_canonical_mode(b) || b == LatticePoint{0, 0}) continue;
        const Complex pb = b.x1 != 0
                               ? set.a_minus.coeff(b) / Complex(0.0, double(b.x1))
                               : set.a_plus.coeff(b) / Complex(0.0, double(b.x2));
        phi.add_pair(b, pb);
    }
    return phi;
}

struct ConditionIISample {
    LatticePoint alpha{};
    Wavevector xi{};
    Wavevector x{};
    double closed_form_value = 0.0;
    double quadrature_value = 0.0;
};

/// 2*pi * sum over resonant modes (beta . alpha = 0, exact integer test) of
/// (a_plus_beta xi1^2 + 2 a_zero_beta xi1 xi2 + a_minus_beta xi2^2) e^{i beta.x},
/// with the quadratic monomials taken from the exact solve.
inline double condition_ii_closed_form(const CoefficientSet& set, const LatticePoint& alpha,
                                       const Wavevector& x) {
    const LatticeSolution sol = solve_xi(alpha);
    const double xi_sq = sol.xi_sq.to_double();
    const double eta_sq = sol.eta_sq.to_double();
    const double xi_eta = sol.xi_eta.to_double();

    std::set<LatticePoint> support;
    for (const TrigPolynomial* p : {&set.a_plus, &set.a_zero, &set.a_minus})
        for (const auto& [b, c] : p->coeffs()) support.insert(b);

    Complex acc{};
    for (const LatticePoint& b : support) {
        if (b.x1 * alpha.x1 + b.x2 * alpha.x2 != 0) continue;
        const Complex amp = set.a_plus.coeff(b) * xi_sq +
                            2.0 * set.a_zero.coeff(b) * xi_eta +
                            set.a_minus.coeff(b) * eta_sq;
        acc += amp * std::polar(1.0, b.x1 * x.x1 + b.x2 * x.x2);
    }
    return two_pi * acc.real();
}

/// Node count at which the periodic trapezoid rule is exact for the
/// resonance integrand (all integrand frequencies beta . alpha lie strictly
/// below it).
inline int condition_ii_required_nodes(const CoefficientSet& set, const LatticePoint& alpha) {
    const long long m = std::max(std::llabs(alpha.x1), std::llabs(alpha.x2));
    return int(std::max<long long>(8, 4 * set.degree() * m));
}

/// Trapezoid value of the line integral of a(x + t*alpha, xi(alpha)) over
/// one period, evaluated pointwise; the independent numerical check of the
/// closed form. nodes = 0 picks the exactness threshold automatically.
inline double condition_ii_quadrature(const CoefficientSet& set, const LatticePoint& alpha,
                                      const Wavevector& x, int nodes = 0) {
    const int required = condition_ii_required_nodes(set, alpha);
    if (nodes == 0) nodes = required;
    if (nodes < required)
        throw AnalyzerError("quadrature under-resolved: " + std::to_string(nodes) +
                            " nodes for a threshold of " + std::to_string(required));
    const Wavevector xi = solve_xi(alpha).xi;
    const double h = two_pi / nodes;
    double acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double t = h * k;
        acc += quadratic_symbol_eval(
            set, {x.x1 + t * double(alpha.x1), x.x2 + t * double(alpha.x2)}, xi);
    }
    return acc * h;
}

struct WellPosednessReport {
    bool well_posed = false;
    double sum_identity_max_violation = 0.0;
    double gradient_max_violation = 0.0;
    std::array<Complex, 2> mean_vector{};
    std::vector<LatticePoint> failing_modes;
    std::optional<TrigPolynomial> potential;
    std::vector<ConditionIISample> condition_ii_samples;
    double condition_ii_evidence = 0.0;  // largest resonant amplitude seen
    double tolerance = 0.0;

    Json to_json() const {
        Json j;
        j["verdict"] = well_posed ? "well_posed" : "ill_posed";
        j["sum_identity_max_violation"] = sum_identity_max_violation;
        j["gradient_max_violation"] = gradient_max_violation;
        j["mean_vector"] = Json::array({Json::array({mean_vector[0].real(), mean_vector[0].imag()}),
                                        Json::array({mean_vector[1].real(), mean_vector[1].imag()})});
        Json fm = Json::array();
        for (const LatticePoint& b : failing_modes) fm.push_back(Json::array({b.x1, b.x2}));
        j["failing_modes"] = fm;
        j["potential"] = potential ? detail::term_list_to_json(*potential) : Json();
        Json samples = Json::array();
        for (const ConditionIISample& s : condition_ii_samples) {
            Json e;
            e["alpha"] = Json::array({s.alpha.x1, s.alpha.x2});
            e["xi"] = Json::array({s.xi.x1, s.xi.x2});
            e["x"] = Json::array({s.x.x1, s.x.x2});
            e["closed_form_value"] = s.closed_form_value;
            e["quadrature_value"] = s.quadrature_value;
            samples.push_back(e);
        }
        j["condition_ii_samples"] = samples;
        return j;
    }
};

/// Full verdict: coefficient identities decide, resonance integrals over
/// the alpha box and a uniform x-grid corroborate. The two computations are
/// independent; disagreement raises InconsistencyError.
inline WellPosednessReport classify(const CoefficientSet& set, int alpha_box = 3,
                                    int x_samples = 3, double tol = 1e-10) {
    if (alpha_box < 1) throw AnalyzerError("alpha box must be at least 1");
    if (x_samples < 1) throw AnalyzerError("x grid must be at least 1x1");
    if (tol < 0) throw AnalyzerError("tolerance must be nonnegative");

    WellPosednessReport rep;
    rep.tolerance = tol;
    const IdentityCheck sum = check_sum_identity(set, tol);
    const GradientCheck grad = check_gradient_condition(set, tol);
    rep.sum_identity_max_violation = sum.max_violation;
    rep.gradient_max_violation = grad.max_violation;
    rep.mean_vector = grad.mean;
    std::set<LatticePoint> fm(sum.failing.begin(), sum.failing.end());
    fm.insert(grad.failing.begin(), grad.failing.end());
    rep.failing_modes.assign(fm.begin(), fm.end());
    rep.well_posed = sum.pass && grad.pass;
    if (rep.well_posed) rep.potential = construct_potential(set, tol);

    std::set<LatticePoint> support;
    for (const TrigPolynomial* p : {&set.a_plus, &set.a_zero, &set.a_minus})
        for (const auto& [b, c] : p->coeffs()) support.insert(b);

    double evidence = 0.0;
    for (long long a1 = -alpha_box; a1 <= alpha_box; ++a1)
        for (long long a2 = -alpha_box; a2 <= alpha_box; ++a2) {
            const LatticePoint alpha{a1, a2};
            const LatticeSolution sol = solve_xi(alpha);
            const double xi_sq = sol.xi_sq.to_double();
            const double eta_sq = sol.eta_sq.to_double();
            const double xi_eta = sol.xi_eta.to_double();
            for (const LatticePoint& b : support) {
                if (b.x1 * alpha.x1 + b.x2 * alpha.x2 != 0) continue;
                const Complex amp = set.a_plus.coeff(b) * xi_sq +
                                    2.0 * set.a_zero.coeff(b) * xi_eta +
                                    set.a_minus.coeff(b) * eta_sq;
                evidence = std::max(evidence, std::abs(amp));
            }
            for (int jx = 0; jx < x_samples; ++jx)
                for (int kx = 0; kx < x_samples; ++kx) {
                    ConditionIISample s;
                    s.alpha = alpha;
                    s.xi = sol.xi;
                    s.x = {two_pi * jx / x_samples, two_pi * kx / x_samples};
                    s.closed_form_value = condition_ii_closed_form(set, alpha, s.x);
                    s.quadrature_value = condition_ii_quadrature(set, alpha, s.x);
                    evidence = std::max(evidence, std::abs(s.closed_form_value));
                    rep.condition_ii_samples.push_back(s);
                }
        }
    rep.condition_ii_evidence = evidence;

    if (rep.well_posed && evidence > 1000.0 * tol)
        throw InconsistencyError(
            "identity checks pass but a resonance integral is nonzero (" +
            std::to_string(evidence) + "): implementation bug");
    const double worst = std::max(sum.max_violation, grad.max_violation);
    const bool witnesses_in_box =
        std::all_of(rep.failing_modes.begin(), rep.failing_modes.end(),
                    [&](const LatticePoint& b) {
                        return std::llabs(b.x1) <= alpha_box && std::llabs(b.x2) <= alpha_box;
                    });
    if (!rep.well_posed && worst > 100.0 * tol && witnesses_in_box && evidence < tol)
        throw InconsistencyError(
            "identity checks fail by " + std::to_string(worst) +
            " but every resonance integral vanishes: implementation bug");

    return rep;
}

}  // namespace td
