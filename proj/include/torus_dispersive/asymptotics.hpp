#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "torus_dispersive/spectral.hpp"

namespace td {

struct AsymptoticsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Branch { positive, negative };

/// One member of the u_l family: a carrier mode l*alpha, a horizon T (the
/// family lives on [0, T/l^2]), the normalized envelope psi, and the branch
/// sign used when the flow integral is negative.
struct AsymptoticSpec {
    LatticePoint alpha{0, 0};
    int l = 1;
    double T = 3.0;
    double n_target = 0.0;  // attained growth exponent, informational
    Branch branch = Branch::positive;
    TrigPolynomial psi;
};

struct GrowthReport {
    int l = 0;
    double norm_initial = 0.0;
    double norm_final = 0.0;
    double residual_integral = 0.0;
    double a_alpha = 0.0;
    bool inequality_violated = false;
    double measured_growth_factor = 0.0;
};

/// One Fourier mode of the direction-alpha coefficient trace
/// a(x, alpha) = sum_beta A_beta(alpha) e^{i beta.x}; rate is the frequency
/// beta.p'(alpha) at which the mode drifts along the transport ray.
struct FlowMode {
    LatticePoint beta{0, 0};
    Complex amplitude;
    double rate = 0.0;
    bool resonant = false;
};

inline std::vector<FlowMode> flow_modes(const CoefficientSet& set, const LatticePoint& alpha) {
    const Vec2<long long> gp = eval_grad_p(alpha);
    const double a1 = double(alpha.x1), a2 = double(alpha.x2);
    std::map<LatticePoint, Complex> amps;
    auto fold = [&](const TrigPolynomial& p, double weight) {
        for (const auto& [b, c] : p.coeffs()) amps[b] += weight * c;
    };
    fold(set.a_plus, a1 * a1);
    fold(set.a_zero, 2.0 * a1 * a2);
    fold(set.a_minus, a2 * a2);
    std::vector<FlowMode> out;
    out.reserve(amps.size());
    for (const auto& [b, amp] : amps) {
        FlowMode m;
        m.beta = b;
        m.amplitude = amp;
        const long long r = b.x1 * gp.x1 + b.x2 * gp.x2;
        m.rate = double(r);
        m.resonant = r == 0;
        out.push_back(m);
    }
    return out;
}

/// phi_l with the l-dependence scaled out: integral over s in [0, tau] of
/// a(x + s p'(alpha), alpha). Resonant modes grow linearly in tau, the rest
/// merely oscillate.
inline double flow_integral(const CoefficientSet& set, const LatticePoint& alpha, double tau,
                            const Wavevector& x) {
    Complex acc{};
    for (const FlowMode& m : flow_modes(set, alpha)) {
        const Complex phase = std::polar(1.0, double(m.beta.x1) * x.x1 + double(m.beta.x2) * x.x2);
        if (m.resonant)
            acc += tau * m.amplitude * phase;
        else
            acc += m.amplitude * phase * (std::polar(1.0, tau * m.rate) - 1.0) /
                   Complex(0.0, m.rate);
    }
    return acc.real();
}

namespace detail {

inline TrigPolynomial flow_mode_sum(const CoefficientSet& set, const LatticePoint& alpha,
                                    const std::function<Complex(const FlowMode&)>& weight) {
    TrigPolynomial out;
    for (const FlowMode& m : flow_modes(set, alpha)) {
        if (!is_canonical_mode(m.beta)) continue;
        const Complex c = weight(m);
        if (m.beta.x1 == 0 && m.beta.x2 == 0)
            out.add_pair(m.beta, Complex(c.real(), 0.0));
        else
            out.add_pair(m.beta, c);
    }
    return out;
}

}  // namespace detail

/// The map x -> flow_integral(set, alpha, tau, x) as a trig polynomial.
inline TrigPolynomial flow_field(const CoefficientSet& set, const LatticePoint& alpha,
                                 double tau) {
    return detail::flow_mode_sum(set, alpha, [tau](const FlowMode& m) {
        if (m.resonant) return tau * m.amplitude;
        return m.amplitude * (std::polar(1.0, tau * m.rate) - 1.0) / Complex(0.0, m.rate);
    });
}

/// The flow integrand x -> a(x + tau p'(alpha), alpha).
inline TrigPolynomial flow_integrand_field(const CoefficientSet& set, const LatticePoint& alpha,
                                           double tau) {
    return detail::flow_mode_sum(set, alpha, [tau](const FlowMode& m) {
        return m.amplitude * std::polar(1.0, tau * m.rate);
    });
}

struct BumpLocalization {
    Wavevector center{0.0, 0.0};
    double width = 1.0;
    int max_degree = 16;
};

inline double psi_norm(const TrigPolynomial& psi) {
    double s = 0.0;
    for (const auto& [b, c] : psi.coeffs()) s += std::norm(c);
    return two_pi * std::sqrt(s);
}

/// Periodized Gaussian bump centered at `center`, projected onto modes
/// |b|_inf <= degree and normalized to unit L2 norm. The degree is the
/// smaller of max_degree and the point where the Gaussian tail drops below
/// double precision.
inline TrigPolynomial build_psi(const BumpLocalization& loc) {
    if (!(loc.width > 0.0 && loc.width < std::numbers::pi))
        throw AsymptoticsError("bump width must lie in (0, pi)");
    if (loc.max_degree < 0) throw AsymptoticsError("bump degree must be nonnegative");
    const int intrinsic = int(std::ceil(std::sqrt(74.0) / loc.width));
    const int d = std::min(loc.max_degree, intrinsic);
    TrigPolynomial psi;
    const double w2 = loc.width * loc.width;
    for (long long b1 = 0; b1 <= d; ++b1)
        for (long long b2 = -d; b2 <= d; ++b2) {
            const LatticePoint b{b1, b2};
            if (!is_canonical_mode(b)) continue;
            const double g = std::exp(-0.5 * w2 * double(b1 * b1 + b2 * b2));
            const Complex c =
                g * std::polar(1.0, -(double(b1) * loc.center.x1 + double(b2) * loc.center.x2));
            if (b1 == 0 && b2 == 0)
                psi.add_pair(b, Complex(g, 0.0));
            else
                psi.add_pair(b, c);
        }
    const double nrm = psi_norm(psi);
    return psi.scaled(1.0 / nrm);
}

namespace detail {

inline double norm_inf_alpha(const LatticePoint& a) {
    return double(std::max(std::llabs(a.x1), std::llabs(a.x2)));
}

inline void validate_asymptotic_spec(const AsymptoticSpec& spec) {
    if (spec.alpha.x1 == 0 && spec.alpha.x2 == 0)
        throw AsymptoticsError("carrier direction must be nonzero");
    if (spec.l < 1) throw AsymptoticsError("l must be a positive integer");
    if (!(spec.T > 0.0)) throw AsymptoticsError("horizon T must be positive");
    if (std::abs(psi_norm(spec.psi) - 1.0) > 1e-9)
        throw AsymptoticsError("psi must have unit norm");
}

/// Inverse transform of psi's coefficients modulated per mode:
/// weight(b) * c_b placed at mode b.
inline void modulated_psi(const Grid& g, const TrigPolynomial& psi,
                          const std::function<Complex(const LatticePoint&)>& weight,
                          std::vector<Complex>& spec, std::vector<Complex>& out) {
    spec.assign(std::size_t(g.size()), Complex{});
    for (const auto& [b, c] : psi.coeffs()) {
        const int i1 = g.index_of(int(b.x1));
        const int i2 = g.index_of(int(b.x2));
        spec[g.flat(i1, i2)] = weight(b) * c;
    }
    Fft::inverse(g, spec, out);
}

struct UlParts {
    std::vector<Complex> u;           // u_l on the grid
    std::vector<Complex> exp_factor;  // e^{s(i t p(l a) + i l a.x + phi_l)}
    std::vector<Complex> psi_shift;   // psi(x + (l^2 t - T) p'(alpha))
    std::vector<Complex> transport;   // (p'(alpha).grad psi) at the same shift
};

inline UlParts build_u_l_parts(const AsymptoticSpec& spec, const CoefficientSet& set,
                               double t, const Grid& g, bool with_transport) {
    validate_asymptotic_spec(spec);
    const double horizon = spec.T / (double(spec.l) * double(spec.l));
    if (t < -1e-12 || t > horizon * (1.0 + 1e-12))
        throw AsymptoticsError("time outside [0, T/l^2]");
    const long long amax = std::max(std::llabs(spec.alpha.x1), std::llabs(spec.alpha.x2));
    if (2 * (spec.l * amax + spec.psi.degree()) >= g.n)
        throw AsymptoticsError("grid of size " + std::to_string(g.n) +
                               " cannot resolve the carrier mode with this envelope");

    const double s = spec.branch == Branch::positive ? 1.0 : -1.0;
    const Vec2<long long> gp = eval_grad_p(spec.alpha);
    const double tau = double(spec.l) * double(spec.l) * t;
    const Wavevector shift{(tau - spec.T) * double(gp.x1), (tau - spec.T) * double(gp.x2)};

    UlParts parts;
    std::vector<Complex> scratch;
    modulated_psi(
        g, spec.psi,
        [&](const LatticePoint& b) {
            return std::polar(1.0, double(b.x1) * shift.x1 + double(b.x2) * shift.x2);
        },
        scratch, parts.psi_shift);
    if (with_transport)
        modulated_psi(
            g, spec.psi,
            [&](const LatticePoint& b) {
                const double along = double(gp.x1) * double(b.x1) + double(gp.x2) * double(b.x2);
                return Complex(0.0, along) *
                       std::polar(1.0, double(b.x1) * shift.x1 + double(b.x2) * shift.x2);
            },
            scratch, parts.transport);

    const TrigPolynomial phi_now = flow_field(set, spec.alpha, tau);
    std::vector<double> phi_vals;
    if (!phi_now.is_zero()) phi_vals = phi_now.sample_grid(g.n);

    const double p_l = double(spec.l) * double(spec.l) * double(spec.l) * double(eval_p(spec.alpha));
    const std::size_t m = std::size_t(g.size());
    parts.exp_factor.resize(m);
    parts.u.resize(m);
    for (int j = 0; j < g.n; ++j) {
        const double x1 = g.node(j);
        for (int k = 0; k < g.n; ++k) {
            const double x2 = g.node(k);
            const std::size_t i = std::size_t(g.flat(j, k));
            const double carrier =
                s * (t * p_l + double(spec.l) * (double(spec.alpha.x1) * x1 +
                                                 double(spec.alpha.x2) * x2));
            const double amp = phi_vals.empty() ? 0.0 : s * phi_vals[i];
            parts.exp_factor[i] = std::exp(amp) * std::polar(1.0, carrier);
            parts.u[i] = parts.exp_factor[i] * parts.psi_shift[i];
        }
    }
    return parts;
}

inline int thread_cap() {
    int hw = int(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("TORUS_DISPERSIVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v < hw) hw = int(v);
    }
    return hw;
}

}  // namespace detail

/// Sample u_l(t) on the grid.
inline SpectralState build_u_l(const AsymptoticSpec& spec, const CoefficientSet& set, double t,
                               const Grid& g) {
    detail::UlParts parts = detail::build_u_l_parts(spec, set, t, g, false);
    return SpectralState::from_values(g, std::move(parts.u), t);
}

namespace detail {

struct ResidualMeasurement {
    double integral = 0.0;
    double c0 = 0.0;
};

/// Trapezoid integral of ||(d_t + L_space)u_l|| over [0, T/l^2], with the
/// time derivative taken from the closed form of u_l. Also measures the
/// empirical constant C0 of the pointwise residual bound.
inline ResidualMeasurement measure_residual(const AsymptoticSpec& spec, const CoefficientSet& set,
                                            const Grid& g, int time_nodes) {
    if (time_nodes < 8) throw AsymptoticsError("residual quadrature needs at least 8 nodes");
    const long long amax = std::max(std::llabs(spec.alpha.x1), std::llabs(spec.alpha.x2));
    if (2 * (spec.l * amax + spec.psi.degree() + set.degree()) >= g.n)
        throw AsymptoticsError("grid of size " + std::to_string(g.n) +
                               " cannot resolve the residual of this family member");

    const double s = spec.branch == Branch::positive ? 1.0 : -1.0;
    const double l2 = double(spec.l) * double(spec.l);
    const double horizon = spec.T / l2;
    const double h = horizon / double(time_nodes - 1);
    const double p_l = l2 * double(spec.l) * double(eval_p(spec.alpha));
    const double alpha_len = std::hypot(double(spec.alpha.x1), double(spec.alpha.x2));

    SpectralOps ops(g, set, std::nullopt, false);
    const std::size_t m = std::size_t(g.size());
    std::vector<Complex> lu(m), lspec(m), uspec(m), vspec(m), dspec(m), dvals(m);
    std::vector<double> denom(m);

    double integral = 0.0;
    double c0 = 0.0;
    const ModeTables& tables = ModeTables::get(g.n);
    for (int node = 0; node < time_nodes; ++node) {
        const double t = double(node) * h;
        UlParts parts = build_u_l_parts(spec, set, t, g, true);

        const TrigPolynomial a_now = flow_integrand_field(set, spec.alpha, l2 * t);
        std::vector<double> rate_vals;
        if (!a_now.is_zero()) rate_vals = a_now.sample_grid(g.n);

        Fft::forward(g, parts.u, uspec);
        ops.L_spectrum(uspec, lspec);
        Fft::inverse(g, lspec, lu);
        for (std::size_t i = 0; i < m; ++i) {
            const double rate = rate_vals.empty() ? 0.0 : rate_vals[i];
            const Complex du_dt = Complex(s * l2 * rate, s * p_l) * parts.u[i] +
                                  l2 * parts.exp_factor[i] * parts.transport[i];
            lu[i] += du_dt;
        }

        double norm2 = 0.0;
        for (const Complex& c : lu) norm2 += std::norm(c);
        const double node_norm = two_pi * std::sqrt(norm2 / double(m));
        integral += (node == 0 || node == time_nodes - 1 ? 0.5 : 1.0) * h * node_norm;

        for (std::size_t i = 0; i < m; ++i)
            dvals[i] = std::abs(parts.exp_factor[i]) * parts.psi_shift[i];
        Fft::forward(g, dvals, vspec);
        std::fill(denom.begin(), denom.end(), 0.0);
        for (int g1 = 0; g1 <= 3; ++g1)
            for (int g2 = 0; g1 + g2 <= 3; ++g2) {
                if (g1 == 0 && g2 == 0) {
                    for (std::size_t i = 0; i < m; ++i) denom[i] += std::abs(dvals[i]);
                    continue;
                }
                for (int j = 0; j < g.n; ++j) {
                    const double m1 = tables.axis_mode[j];
                    for (int k = 0; k < g.n; ++k) {
                        const double m2 = tables.axis_mode[k];
                        Complex f(1.0, 0.0);
                        for (int r = 0; r < g1; ++r) f *= Complex(0.0, m1);
                        for (int r = 0; r < g2; ++r) f *= Complex(0.0, m2);
                        dspec[std::size_t(g.flat(j, k))] = f * vspec[std::size_t(g.flat(j, k))];
                    }
                }
                Fft::inverse(g, dspec, dvals);
                for (std::size_t i = 0; i < m; ++i) denom[i] += std::abs(dvals[i]);
            }
        for (std::size_t i = 0; i < m; ++i) {
            const double d = double(spec.l) * alpha_len * denom[i];
            if (d > 1e-300) c0 = std::max(c0, std::abs(lu[i]) / d);
        }
    }
    return {integral, c0};
}

}  // namespace detail

inline double residual_integral(const AsymptoticSpec& spec, const CoefficientSet& set,
                                const Grid& g, int time_nodes = 33) {
    return detail::measure_residual(spec, set, g, time_nodes).integral;
}

/// Norms at both ends of [0, T/l^2], the residual integral, the constant
/// A_alpha of the residual bound, and whether the energy inequality fails
/// with a factor-2 margin.
inline GrowthReport growth_report(const AsymptoticSpec& spec, const CoefficientSet& set,
                                  const Grid& g, int time_nodes = 33) {
    detail::validate_asymptotic_spec(spec);
    const double s = spec.branch == Branch::positive ? 1.0 : -1.0;
    const double horizon = spec.T / (double(spec.l) * double(spec.l));

    GrowthReport r;
    r.l = spec.l;
    r.norm_initial = build_u_l(spec, set, 0.0, g).l2_norm();
    r.norm_final = build_u_l(spec, set, horizon, g).l2_norm();
    const detail::ResidualMeasurement res = detail::measure_residual(spec, set, g, time_nodes);
    r.residual_integral = res.integral;

    double flow_max = 0.0;
    const TrigPolynomial phi_T = flow_field(set, spec.alpha, spec.T);
    if (!phi_T.is_zero()) {
        const std::vector<double> vals = phi_T.sample_grid(g.n);
        for (double v : vals) flow_max = std::max(flow_max, s * v);
    }
    const double alpha_len = std::hypot(double(spec.alpha.x1), double(spec.alpha.x2));
    const double poly = 1.0 + spec.T * alpha_len * alpha_len;
    r.a_alpha = two_pi * res.c0 * spec.T * alpha_len * poly * poly * poly * std::exp(flow_max);
    r.inequality_violated = r.norm_final > 2.0 * (r.norm_initial + r.residual_integral);
    r.measured_growth_factor = r.norm_final / r.norm_initial;
    return r;
}

/// Choose branch, envelope center, and envelope degree for (set, alpha, l, T)
/// on the given grid: the branch follows the sign of the extremal flow
/// integral at time T and the bump sits where that extremum is attained.
inline AsymptoticSpec make_default_spec(const CoefficientSet& set, const LatticePoint& alpha,
                                        int l, double T, const Grid& g, double width = 1.5) {
    if (alpha.x1 == 0 && alpha.x2 == 0)
        throw AsymptoticsError("carrier direction must be nonzero");
    if (l < 1) throw AsymptoticsError("l must be a positive integer");
    if (!(T > 0.0)) throw AsymptoticsError("horizon T must be positive");

    AsymptoticSpec spec;
    spec.alpha = alpha;
    spec.l = l;
    spec.T = T;

    Wavevector center{0.0, 0.0};
    double best = 0.0;
    bool negative_better = false;
    const TrigPolynomial phi_T = flow_field(set, alpha, T);
    if (!phi_T.is_zero()) {
        const std::vector<double> vals = phi_T.sample_grid(g.n);
        double mx = vals[0], mn = vals[0];
        std::size_t imx = 0, imn = 0;
        for (std::size_t i = 1; i < vals.size(); ++i) {
            if (vals[i] > mx) mx = vals[i], imx = i;
            if (vals[i] < mn) mn = vals[i], imn = i;
        }
        negative_better = -mn > mx;
        const std::size_t pick = negative_better ? imn : imx;
        center = Wavevector{g.node(int(pick) / g.n), g.node(int(pick) % g.n)};
        best = negative_better ? -mn : mx;
    }
    spec.branch = negative_better ? Branch::negative : Branch::positive;
    spec.n_target = std::max(0.0, best);

    const long long amax = std::max(std::llabs(alpha.x1), std::llabs(alpha.x2));
    const int allowed = g.n / 2 - int(l * amax) - int(set.degree()) - 2;
    if (allowed < 0)
        throw AsymptoticsError("grid of size " + std::to_string(g.n) +
                               " cannot resolve the carrier mode l*alpha");
    BumpLocalization loc;
    loc.center = center;
    loc.width = width;
    loc.max_degree = allowed;
    spec.psi = build_psi(loc);
    return spec;
}

/// Growth reports for several family members, in the given order; members
/// are independent and run on a small thread pool capped by the
/// TORUS_DISPERSIVE_THREADS environment variable.
inline std::vector<GrowthReport> run_family(const CoefficientSet& set,
                                            const std::vector<AsymptoticSpec>& specs,
                                            const std::vector<Grid>& grids,
                                            int time_nodes = 33) {
    if (specs.size() != grids.size())
        throw AsymptoticsError("one grid per family member is required");
    std::vector<GrowthReport> out(specs.size());
    if (specs.empty()) return out;

    const int threads = std::min<int>(detail::thread_cap(), int(specs.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i)
            out[i] = growth_report(specs[i], set, grids[i], time_nodes);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mtx;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            try {
                out[i] = growth_report(specs[i], set, grids[i], time_nodes);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mtx);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

inline Json growth_reports_to_json(const std::vector<GrowthReport>& reports) {
    Json arr = Json::array();
    for (const GrowthReport& r : reports) {
        Json j;
        j["l"] = r.l;
        j["norm_initial"] = r.norm_initial;
        j["norm_final"] = r.norm_final;
        j["residual_integral"] = r.residual_integral;
        j["a_alpha"] = r.a_alpha;
        j["inequality_violated"] = r.inequality_violated;
        j["measured_growth_factor"] = r.measured_growth_factor;
        arr.push_back(j);
    }
    return arr;
}

inline std::string growth_reports_to_csv(const std::vector<GrowthReport>& reports) {
    std::string out = "l,norm_initial,norm_final,residual_integral,a_alpha,violated\n";
    for (const GrowthReport& r : reports) {
        out += std::to_string(r.l);
        out += ',';
        out += detail::format_g17(r.norm_initial);
        out += ',';
        out += detail::format_g17(r.norm_final);
        out += ',';
        out += detail::format_g17(r.residual_integral);
        out += ',';
        out += detail::format_g17(r.a_alpha);
        out += ',';
        out += r.inequality_violated ? "true" : "false";
        out += '\n';
    }
    return out;
}

}  // namespace td
