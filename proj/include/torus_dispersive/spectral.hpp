#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "torus_dispersive/coefficients.hpp"
#include "torus_dispersive/fft.hpp"

namespace td {

struct EvolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Per-grid mode tables: signed mode numbers, the dispersive multiplier,
/// and the 2/3-rule mask. The Nyquist line (mode n/2, whose sign is
/// ambiguous on a real grid) carries zero in every derivative table so that
/// real data stays real.
struct ModeTables {
    std::vector<double> axis_mode;  // per axis index, Nyquist zeroed
    std::vector<char> axis_keep;    // |mode| <= n/3
    std::vector<double> p_beta;     // p(mode(j), mode(k)), Nyquist zeroed
    std::vector<Complex> mult_p;    // -i * p_beta

    static const ModeTables& get(int n) {
        static std::mutex mtx;
        static std::map<int, ModeTables> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;

        const Grid g(n);
        ModeTables t;
        t.axis_mode.resize(n);
        t.axis_keep.resize(n);
        for (int j = 0; j < n; ++j) {
            const int m = g.mode(j);
            t.axis_mode[j] = m == n / 2 ? 0.0 : double(m);
            t.axis_keep[j] = 3 * std::abs(m) <= n ? 1 : 0;
        }
        t.p_beta.resize(g.size());
        t.mult_p.resize(g.size());
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double b1 = t.axis_mode[j], b2 = t.axis_mode[k];
                const double p = (g.mode(j) == n / 2 || g.mode(k) == n / 2)
                                     ? 0.0
                                     : b1 * b2 * (b1 + b2);
                t.p_beta[g.flat(j, k)] = p;
                t.mult_p[g.flat(j, k)] = Complex(0.0, -p);
            }
        return cache.emplace(n, std::move(t)).first->second;
    }
};

}  // namespace detail

/// Fourier multiplier of p on each grid mode: (i b1)(i b2)(i (b1+b2)) = -i p(beta).
inline std::vector<Complex> multiplier_p(const Grid& g) {
    return detail::ModeTables::get(g.n).mult_p;
}

/// A field on the grid carried in whichever of the two representations is
/// current; the other is produced on demand and cached.
class SpectralState {
public:
    explicit SpectralState(const Grid& g) : grid_(g) {}

    static SpectralState from_values(const Grid& g, std::vector<Complex> v, double time = 0.0) {
        SpectralState s(g);
        if (v.size() != std::size_t(g.size()))
            throw EvolutionError("value array does not match the grid");
        s.values_ = std::move(v);
        s.values_ok_ = true;
        s.time_ = time;
        return s;
    }

    static SpectralState from_spectrum(const Grid& g, std::vector<Complex> c, double time = 0.0) {
        SpectralState s(g);
        if (c.size() != std::size_t(g.size()))
            throw EvolutionError("spectrum array does not match the grid");
        s.spectrum_ = std::move(c);
        s.spectrum_ok_ = true;
        s.time_ = time;
        return s;
    }

    const Grid& grid() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    const std::vector<Complex>& values() const {
        if (!values_ok_) {
            Fft::inverse(grid_, spectrum_, values_);
            values_ok_ = true;
        }
        return values_;
    }

    const std::vector<Complex>& spectrum() const {
        if (!spectrum_ok_) {
            Fft::forward(grid_, values_, spectrum_);
            spectrum_ok_ = true;
        }
        return spectrum_;
    }

    void assign_values(std::vector<Complex> v) {
        values_ = std::move(v);
        values_ok_ = true;
        spectrum_ok_ = false;
    }

    void assign_spectrum(std::vector<Complex> c) {
        spectrum_ = std::move(c);
        spectrum_ok_ = true;
        values_ok_ = false;
    }

    /// L2(T^2) norm: 2*pi*sqrt(sum |c_beta|^2), Parseval-consistent with
    /// the continuum norm.
    double l2_norm() const {
        double s = 0.0;
        if (spectrum_ok_) {
            for (const Complex& c : spectrum_) s += std::norm(c);
        } else {
            for (const Complex& c : values_) s += std::norm(c);
            s /= double(grid_.size());
        }
        return two_pi * std::sqrt(s);
    }

    double max_abs_imag() const {
        double m = 0.0;
        for (const Complex& c : values()) m = std::max(m, std::abs(c.imag()));
        return m;
    }

    /// Round-trip disagreement between the two representations (test hook).
    double transform_defect() const {
        values();
        spectrum();
        std::vector<Complex> back;
        Fft::inverse(grid_, spectrum_, back);
        double m = 0.0;
        for (std::size_t i = 0; i < back.size(); ++i)
            m = std::max(m, std::abs(back[i] - values_[i]));
        return m;
    }

private:
    Grid grid_;
    mutable std::vector<Complex> values_;
    mutable std::vector<Complex> spectrum_;
    mutable bool values_ok_ = false;
    mutable bool spectrum_ok_ = false;
    double time_ = 0.0;
};

using ForcingField = std::function<void(double, const Grid&, std::vector<Complex>&)>;

struct EvolutionConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    bool dealias = true;
    bool gauge = false;
    std::optional<TrigPolynomial> phi;
    int record_every = 1;
    ForcingField forcing;
    double cfl_constant = 1.0;
    bool strict_cfl = false;
    double norm_ceiling = 1e12;
};

struct TimeSeries {
    bool gauged = false;
    bool aborted = false;  // norm ceiling reached before t_end
    std::vector<double> t;
    std::vector<double> l2_norm;
    std::vector<double> gauged_l2_norm;

    std::string to_csv() const {
        std::string out = gauged ? "t,l2_norm,gauged_l2_norm\n" : "t,l2_norm\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            out += detail::format_g17(t[i]);
            out += ',';
            out += detail::format_g17(l2_norm[i]);
            if (gauged) {
                out += ',';
                out += detail::format_g17(gauged_l2_norm[i]);
            }
            out += '\n';
        }
        return out;
    }
};

/// Explicit stability bound of the second-order variable terms under the
/// classical fourth-order stages; the dispersive part is integrated exactly
/// and imposes none.
inline double cfl_bound(const CoefficientSet& set, int n, double cfl_constant = 1.0) {
    const double amp = second_order_amplitude(set);
    if (amp == 0.0) return std::numeric_limits<double>::infinity();
    const double half = n / 2.0;
    return cfl_constant / (amp * half * half);
}

namespace detail {

/// Grid realization of L's variable part and (optionally) the gauge
/// weights; owns the scratch buffers one evolution needs.
class SpectralOps {
public:
    SpectralOps(const Grid& g, const CoefficientSet& set,
                const std::optional<TrigPolynomial>& phi, bool dealias)
        : grid_(g), tables_(&ModeTables::get(g.n)), dealias_(dealias) {
        if (2 * (set.degree() + 2) >= g.n)
            throw EvolutionError("grid of size " + std::to_string(g.n) +
                                 " cannot resolve products with coefficients of degree " +
                                 std::to_string(set.degree()));
        auto sample = [&](const TrigPolynomial& p, std::vector<double>& out) {
            if (!p.is_zero()) out = p.sample_grid(g.n);
        };
        sample(set.a_plus, ap_);
        sample(set.a_zero, a0_);
        sample(set.a_minus, am_);
        sample(set.b1, b1_);
        sample(set.b2, b2_);
        sample(set.c, c_);
        have_second_ = !ap_.empty() || !a0_.empty() || !am_.empty();
        have_first_ = !b1_.empty() || !b2_.empty();
        have_zero_ = !c_.empty();
        if (phi) {
            if (2 * phi->degree() >= g.n)
                throw EvolutionError("grid cannot resolve the gauge weight");
            const std::vector<double> pv = phi->is_zero()
                                               ? std::vector<double>(g.size(), 0.0)
                                               : phi->sample_grid(g.n);
            e_phi_.resize(pv.size());
            e_mphi_.resize(pv.size());
            for (std::size_t i = 0; i < pv.size(); ++i) {
                e_phi_[i] = std::exp(pv[i]);
                e_mphi_[i] = std::exp(-pv[i]);
            }
        }
        const std::size_t m = std::size_t(g.size());
        s1_.resize(m);
        s2_.resize(m);
        s3_.resize(m);
        v1_.resize(m);
        v2_.resize(m);
        acc_.resize(m);
    }

    const Grid& grid() const { return grid_; }
    bool gauged_weights() const { return !e_phi_.empty(); }
    const std::vector<double>& e_phi() const { return e_phi_; }
    const std::vector<double>& e_minus_phi() const { return e_mphi_; }
    const std::vector<Complex>& mult_p() const { return tables_->mult_p; }
    const std::vector<double>& p_beta() const { return tables_->p_beta; }
    bool variable_part_empty() const { return !have_second_ && !have_first_ && !have_zero_; }

    void mask(std::vector<Complex>& spec) const {
        const int n = grid_.n;
        for (int j = 0; j < n; ++j) {
            const bool kj = tables_->axis_keep[j];
            Complex* row = spec.data() + std::size_t(j) * n;
            for (int k = 0; k < n; ++k)
                if (!kj || !tables_->axis_keep[k]) row[k] = Complex{};
        }
    }

    /// Spectrum of (a_plus d11 + 2 a_zero d12 + a_minus d22 + b.grad + c)u.
    void variable_spectrum(const std::vector<Complex>& uh, std::vector<Complex>& out) const {
        if (variable_part_empty()) {
            out.assign(uh.size(), Complex{});
            return;
        }
        s1_ = uh;
        if (dealias_) mask(s1_);
        std::fill(acc_.begin(), acc_.end(), Complex{});
        const int n = grid_.n;
        auto add_term = [&](const std::vector<double>& coeff, int o1, int o2, double weight) {
            if (coeff.empty()) return;
            for (int j = 0; j < n; ++j) {
                const double m1 = tables_->axis_mode[j];
                const Complex* row = s1_.data() + std::size_t(j) * n;
                Complex* orow = s2_.data() + std::size_t(j) * n;
                for (int k = 0; k < n; ++k) {
                    const double m2 = tables_->axis_mode[k];
                    Complex f(1.0, 0.0);
                    for (int r = 0; r < o1; ++r) f *= Complex(0.0, m1);
                    for (int r = 0; r < o2; ++r) f *= Complex(0.0, m2);
                    orow[k] = f * row[k];
                }
            }
            Fft::inverse(grid_, s2_, v1_);
            for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += weight * coeff[i] * v1_[i];
        };
        add_term(ap_, 2, 0, 1.0);
        add_term(a0_, 1, 1, 2.0);
        add_term(am_, 0, 2, 1.0);
        add_term(b1_, 1, 0, 1.0);
        add_term(b2_, 0, 1, 1.0);
        add_term(c_, 0, 0, 1.0);
        Fft::forward(grid_, acc_, out);
        if (dealias_) mask(out);
    }

    /// Spectrum of the full spatial operator (p + variable part) applied to u.
    void L_spectrum(const std::vector<Complex>& uh, std::vector<Complex>& out) const {
        variable_spectrum(uh, out);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tables_->mult_p[i] * uh[i];
    }

    /// Spectrum of e^phi L(e^{-phi} v) from the spectrum of v.
    void gauged_L_spectrum(const std::vector<Complex>& vh, std::vector<Complex>& out) const {
        Fft::inverse(grid_, vh, v1_);
        for (std::size_t i = 0; i < v1_.size(); ++i) v1_[i] *= e_mphi_[i];
        Fft::forward(grid_, v1_, s3_);
        if (dealias_) mask(s3_);
        L_spectrum(s3_, out);
        Fft::inverse(grid_, out, v2_);
        for (std::size_t i = 0; i < v2_.size(); ++i) v2_[i] *= e_phi_[i];
        Fft::forward(grid_, v2_, out);
        if (dealias_) mask(out);
    }

private:
    Grid grid_;
    const ModeTables* tables_;
    bool dealias_;
    std::vector<double> ap_, a0_, am_, b1_, b2_, c_;
    bool have_second_ = false, have_first_ = false, have_zero_ = false;
    std::vector<double> e_phi_, e_mphi_;
    mutable std::vector<Complex> s1_, s2_, s3_, v1_, v2_, acc_;
};

}  // namespace detail

/// L_space u = p(d)u + a_plus d1^2 u + 2 a_zero d1 d2 u + a_minus d2^2 u
/// + b.grad u + c u, in value space. With phi supplied, the gauged
/// application e^phi L_space(e^{-phi} u) instead (multiply, apply, multiply).
inline std::vector<Complex> apply_L_space(const SpectralState& state, const CoefficientSet& set,
                                          const std::optional<TrigPolynomial>& phi = std::nullopt,
                                          bool dealias = true) {
    detail::SpectralOps ops(state.grid(), set, phi, dealias);
    std::vector<Complex> spec;
    if (phi)
        ops.gauged_L_spectrum(state.spectrum(), spec);
    else
        ops.L_spectrum(state.spectrum(), spec);
    std::vector<Complex> vals;
    Fft::inverse(state.grid(), spec, vals);
    return vals;
}

struct EvolutionResult {
    TimeSeries series;
    SpectralState final_state;
};

namespace detail {

/// Integrating-factor fourth-order stepper: the skew dispersive part
/// advances exactly through e^{i p(beta) t}; the classical stages see only
/// the variable-coefficient remainder. In gauge mode the caller passes the
/// conjugated coefficient set, so the remainder is the conjugated variable
/// part and the gauge weights enter only through the forcing term.
class Stepper {
public:
    Stepper(const Grid& g, const CoefficientSet& set, const EvolutionConfig& cfg)
        : ops_(g, set, cfg.gauge ? cfg.phi : std::nullopt, cfg.dealias),
          forcing_(cfg.forcing),
          gauge_(cfg.gauge) {
        const std::size_t m = std::size_t(g.size());
        k1_.resize(m);
        k2_.resize(m);
        k3_.resize(m);
        k4_.resize(m);
        stage_.resize(m);
        fvals_.resize(m);
        fspec_.resize(m);
    }

    const detail::SpectralOps& ops() const { return ops_; }

    void rhs(const std::vector<Complex>& uh, double t, std::vector<Complex>& out) {
        if (!ops_.variable_part_empty()) {
            ops_.variable_spectrum(uh, out);
            for (Complex& c : out) c = -c;
        } else {
            out.assign(uh.size(), Complex{});
        }
        if (forcing_) {
            forcing_(t, ops_.grid(), fvals_);
            if (gauge_) {
                const std::vector<double>& w = ops_.e_phi();
                for (std::size_t i = 0; i < fvals_.size(); ++i) fvals_[i] *= w[i];
            }
            Fft::forward(ops_.grid(), fvals_, fspec_);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += fspec_[i];
        }
    }

    void step(std::vector<Complex>& uh, double t, double dt) {
        const auto& [eh, ef] = exp_tables(dt);
        const std::size_t m = uh.size();

        rhs(uh, t, k1_);
        for (std::size_t i = 0; i < m; ++i) stage_[i] = eh[i] * (uh[i] + 0.5 * dt * k1_[i]);
        rhs(stage_, t + 0.5 * dt, k2_);
        for (std::size_t i = 0; i < m; ++i) stage_[i] = eh[i] * uh[i] + 0.5 * dt * k2_[i];
        rhs(stage_, t + 0.5 * dt, k3_);
        for (std::size_t i = 0; i < m; ++i) stage_[i] = ef[i] * uh[i] + dt * eh[i] * k3_[i];
        rhs(stage_, t + dt, k4_);
        for (std::size_t i = 0; i < m; ++i)
            uh[i] = ef[i] * uh[i] +
                    dt / 6.0 *
                        (ef[i] * k1_[i] + 2.0 * eh[i] * (k2_[i] + k3_[i]) + k4_[i]);
    }

private:
    const std::pair<std::vector<Complex>, std::vector<Complex>>& exp_tables(double dt) {
        auto it = etables_.find(dt);
        if (it != etables_.end()) return it->second;
        const std::vector<double>& p = ops_.p_beta();
        std::vector<Complex> eh(p.size()), ef(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            eh[i] = std::polar(1.0, 0.5 * dt * p[i]);
            ef[i] = eh[i] * eh[i];
        }
        return etables_.emplace(dt, std::make_pair(std::move(eh), std::move(ef))).first->second;
    }

    detail::SpectralOps ops_;
    ForcingField forcing_;
    bool gauge_;
    std::map<double, std::pair<std::vector<Complex>, std::vector<Complex>>> etables_;
    std::vector<Complex> k1_, k2_, k3_, k4_, stage_, fvals_, fspec_;
};

}  // namespace detail

/// Advance u0 to t_end, recording the norm history. In gauge mode the
/// evolved variable is v = e^phi u, advanced under the conjugated
/// coefficient set (first order when phi matches the second-order part, so
/// no second-order stability limit applies); both the physical norm and the
/// gauged norm (the quantity the energy bound controls) are recorded, and
/// the returned state is mapped back to u.
inline EvolutionResult evolve(const SpectralState& u0, const CoefficientSet& set,
                              const EvolutionConfig& config) {
    const Grid& g = u0.grid();
    if (config.dt <= 0.0) throw EvolutionError("time step must be positive");
    if (config.record_every < 1) throw EvolutionError("record_every must be at least 1");
    if (config.gauge && !config.phi)
        throw EvolutionError("gauge evolution requires the potential");
    const double horizon = config.t_end - u0.time();
    if (horizon < config.dt * (1.0 - 1e-12))
        throw EvolutionError("t_end precedes the first step");

    const CoefficientSet active = config.gauge ? conjugate_by_gauge(set, *config.phi) : set;

    const double bound = cfl_bound(active, g.n, config.cfl_constant);
    if (config.dt > bound * (1.0 + 1e-12)) {
        if (config.strict_cfl)
            throw EvolutionError("time step " + detail::format_g17(config.dt) +
                                 " exceeds the stability bound " + detail::format_g17(bound));
        std::fprintf(stderr, "warning: time step %g exceeds the stability bound %g\n",
                     config.dt, bound);
    }

    detail::Stepper stepper(g, active, config);
    const detail::SpectralOps& ops = stepper.ops();

    std::vector<Complex> uh;
    if (config.gauge) {
        std::vector<Complex> v = u0.values();
        const std::vector<double>& w = ops.e_phi();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
        Fft::forward(g, v, uh);
    } else {
        uh = u0.spectrum();
    }

    auto spectrum_norm = [](const std::vector<Complex>& c) {
        double s = 0.0;
        for (const Complex& z : c) s += std::norm(z);
        return two_pi * std::sqrt(s);
    };
    std::vector<Complex> scratch_vals;
    auto physical_norm = [&](const std::vector<Complex>& spec) {
        if (!config.gauge) return spectrum_norm(spec);
        Fft::inverse(g, spec, scratch_vals);
        const std::vector<double>& w = ops.e_minus_phi();
        double s = 0.0;
        for (std::size_t i = 0; i < scratch_vals.size(); ++i)
            s += std::norm(scratch_vals[i] * w[i]);
        return two_pi * std::sqrt(s / double(g.size()));
    };

    TimeSeries series;
    series.gauged = config.gauge;
    auto record = [&](double t) {
        series.t.push_back(t);
        series.l2_norm.push_back(physical_norm(uh));
        if (config.gauge) series.gauged_l2_norm.push_back(spectrum_norm(uh));
    };

    const double t0 = u0.time();
    record(t0);

    long long nfull = (long long)std::floor(horizon / config.dt + 1e-9);
    double rem = horizon - double(nfull) * config.dt;
    if (rem < 1e-9 * config.dt) rem = 0.0;
    const long long nsteps = nfull + (rem > 0.0 ? 1 : 0);

    double t = t0;
    long long k = 0;
    for (; k < nsteps; ++k) {
        const double dt = k < nfull ? config.dt : rem;
        stepper.step(uh, t, dt);
        t = k + 1 < nfull ? t0 + double(k + 1) * config.dt : (k + 1 == nfull ? t0 + horizon - rem : config.t_end);
        const double watch = spectrum_norm(uh);
        if (!std::isfinite(watch))
            throw EvolutionError("solution lost finiteness at t = " + detail::format_g17(t) +
                                 "; the time step likely violates the stability bound");
        const bool last = k + 1 == nsteps;
        if (watch > config.norm_ceiling) {
            series.aborted = true;
            record(t);
            break;
        }
        if ((k + 1) % config.record_every == 0 || last) record(t);
    }

    SpectralState final_state(g);
    if (config.gauge) {
        Fft::inverse(g, uh, scratch_vals);
        const std::vector<double>& w = ops.e_minus_phi();
        for (std::size_t i = 0; i < scratch_vals.size(); ++i) scratch_vals[i] *= w[i];
        final_state = SpectralState::from_values(g, std::move(scratch_vals), t);
    } else {
        final_state = SpectralState::from_spectrum(g, std::move(uh), t);
    }
    return {std::move(series), std::move(final_state)};
}

/// L2 distance restricted to the modes both grids resolve strictly below
/// the coarser Nyquist line.
inline double common_modes_distance(const SpectralState& a, const SpectralState& b) {
    const Grid& ga = a.grid();
    const Grid& gb = b.grid();
    const int half = std::min(ga.n, gb.n) / 2;
    const std::vector<Complex>& ca = a.spectrum();
    const std::vector<Complex>& cb = b.spectrum();
    double s = 0.0;
    for (int m1 = -half + 1; m1 < half; ++m1)
        for (int m2 = -half + 1; m2 < half; ++m2) {
            const Complex d = ca[ga.flat(ga.index_of(m1), ga.index_of(m2))] -
                              cb[gb.flat(gb.index_of(m1), gb.index_of(m2))];
            s += std::norm(d);
        }
    return two_pi * std::sqrt(s);
}

struct RefinementRow {
    int n = 0;
    double final_norm = 0.0;
    double diff_to_next = 0.0;  // distance to the next-finer run; 0 for the last
    bool aborted = false;
};

struct RefinementTable {
    double t_star = 0.0;
    std::vector<RefinementRow> rows;

    Json to_json() const {
        Json j;
        j["t_star"] = t_star;
        Json rs = Json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Json r;
            r["n"] = rows[i].n;
            r["final_norm"] = rows[i].final_norm;
            r["diff_to_next"] = i + 1 < rows.size() ? Json(rows[i].diff_to_next) : Json();
            r["aborted"] = rows[i].aborted;
            rs.push_back(r);
        }
        j["rows"] = rs;
        return j;
    }
};

/// Evolve the same problem on each grid in n_list (ascending) to t_star and
/// tabulate final norms and inter-resolution distances on common modes.
inline RefinementTable refinement_study(const CoefficientSet& set,
                                        const std::function<SpectralState(const Grid&)>& u0_family,
                                        double t_star, const std::vector<int>& n_list,
                                        EvolutionConfig config) {
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw EvolutionError("refinement grids must ascend");
    config.t_end = t_star;
    RefinementTable table;
    table.t_star = t_star;
    std::vector<SpectralState> finals;
    for (int n : n_list) {
        const Grid g(n);
        EvolutionResult r = evolve(u0_family(g), set, config);
        RefinementRow row;
        row.n = n;
        row.final_norm = r.final_state.l2_norm();
        row.aborted = r.series.aborted;
        table.rows.push_back(row);
        finals.push_back(std::move(r.final_state));
    }
    for (std::size_t i = 0; i + 1 < finals.size(); ++i)
        table.rows[i].diff_to_next = common_modes_distance(finals[i], finals[i + 1]);
    return table;
}

}  // namespace td
