#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "torus_dispersive/analyzer.hpp"
#include "torus_dispersive/asymptotics.hpp"
#include "torus_dispersive/coefficients.hpp"
#include "torus_dispersive/resonance.hpp"
#include "torus_dispersive/spectral.hpp"

namespace {

using namespace td;

struct RunConfig {
    CoefficientSet coefficients;
    int grid_n = 64;
    double dt = 1e-3;
    double t_end = 1.0;
    unsigned long long seed = 1;
    std::string output_path;
};

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    if (!j.contains("coefficients")) {
        cfg.coefficients = parse_coefficient_set(j);
        return cfg;
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "coefficients" && key != "grid_n" && key != "dt" && key != "t_end" &&
            key != "seed" && key != "output_path")
            throw ConfigError("unknown config key: " + key);
    }
    cfg.coefficients = parse_coefficient_set(j.at("coefficients"));
    if (j.contains("grid_n")) {
        if (!j["grid_n"].is_number_integer())
            throw ConfigError("grid_n must be an integer");
        cfg.grid_n = j["grid_n"].get<int>();
        if (cfg.grid_n < 8 || cfg.grid_n % 2 != 0)
            throw ConfigError("grid_n must be even and at least 8");
    }
    if (j.contains("dt")) {
        if (!j["dt"].is_number()) throw ConfigError("dt must be a number");
        cfg.dt = j["dt"].get<double>();
        if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    }
    if (j.contains("t_end")) {
        if (!j["t_end"].is_number()) throw ConfigError("t_end must be a number");
        cfg.t_end = j["t_end"].get<double>();
        if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError("seed must be a nonnegative integer");
        cfg.seed = j["seed"].get<unsigned long long>();
    }
    if (j.contains("output_path")) {
        if (!j["output_path"].is_string()) throw ConfigError("output_path must be a string");
        cfg.output_path = j["output_path"].get<std::string>();
    }
    return cfg;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::fputs(content.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << content;
    if (!out) throw ConfigError("failed writing output file: " + path);
}

/// Smooth random real field with unit norm: modes |b|_inf <= 6 (capped below
/// the grid's resolution), amplitudes damped like e^{-|b|}, drawn from the
/// seeded 64-bit Mersenne engine so runs are reproducible bit for bit.
TrigPolynomial random_initial_field(unsigned long long seed, int grid_n) {
    std::mt19937_64 rng(seed);
    auto unif = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    const long long dmax = std::min<long long>(6, grid_n / 2 - 1);
    TrigPolynomial u;
    for (long long b1 = 0; b1 <= dmax; ++b1)
        for (long long b2 = b1 == 0 ? 0 : -dmax; b2 <= dmax; ++b2) {
            const LatticePoint b{b1, b2};
            const double decay = std::exp(-std::hypot(double(b1), double(b2)));
            const double re = decay * (2.0 * unif() - 1.0);
            const double im = decay * (2.0 * unif() - 1.0);
            if (b1 == 0 && b2 == 0)
                u.add_pair(b, Complex(re, 0.0));
            else
                u.add_pair(b, Complex(re, im));
        }
    return u.scaled(1.0 / psi_norm(u));
}

int run_lattice(long long a1, long long a2, bool exact) {
    const LatticePoint alpha{a1, a2};
    const LatticeSolution sol = solve_xi(alpha);
    std::printf("alpha = (%lld, %lld)\n", alpha.x1, alpha.x2);
    std::printf("discriminant = %s\n", sol.disc.str().c_str());
    std::printf("xi = (%.15g, %.15g)\n", sol.xi.x1, sol.xi.x2);
    std::printf("xi mirror = (%.15g, %.15g)\n", -sol.xi.x1, -sol.xi.x2);

    const Wavevector gp = eval_grad_p(sol.xi);
    std::printf("grad_p(xi) = (%.15g, %.15g)\n", gp.x1, gp.x2);
    const double resid =
        std::max(std::abs(gp.x1 - double(a1)), std::abs(gp.x2 - double(a2)));
    std::printf("grad_p residual = %.3g\n", resid);

    const RadicalScalar trick = trick_identity(alpha);
    std::printf("trick identity = %.15g\n", trick.to_double());

    if (exact) {
        const RadicalScalar p1 = RadicalScalar(Rational(2)) * sol.xi_eta + sol.eta_sq;
        const RadicalScalar p2 = RadicalScalar(Rational(2)) * sol.xi_eta + sol.xi_sq;
        std::printf("exact xi1^2   = %s\n", sol.xi_sq.to_string().c_str());
        std::printf("exact xi2^2   = %s\n", sol.eta_sq.to_string().c_str());
        std::printf("exact xi1*xi2 = %s\n", sol.xi_eta.to_string().c_str());
        std::printf("exact sign of xi2 relative to xi1 = %d\n", sol.chi);
        const bool ok = p1 == RadicalScalar(Rational(a1)) && p2 == RadicalScalar(Rational(a2));
        std::printf("exact grad_p(xi) = alpha: %s\n", ok ? "confirmed" : "FAILED");
        std::printf("exact trick identity = %s\n", trick.to_string().c_str());
    }
    return 0;
}

int run_check(const std::string& config_path, int alpha_box, double tol,
              const std::string& output_flag) {
    const RunConfig cfg = load_run_config(config_path);
    const WellPosednessReport rep = classify(cfg.coefficients, alpha_box, 3, tol);
    const std::string body = rep.to_json().dump(2) + "\n";
    const std::string dest = output_flag.empty() ? cfg.output_path : output_flag;
    if (dest.empty()) {
        std::fputs(body.c_str(), stdout);
    } else {
        write_output(dest, body);
        std::printf("verdict: %s\n", rep.well_posed ? "well_posed" : "ill_posed");
    }
    return rep.well_posed ? 0 : 1;
}

int run_simulate(const std::string& config_path, std::optional<int> n_flag,
                 std::optional<double> dt_flag, std::optional<double> t_end_flag, bool gauge,
                 bool strict, const std::string& output_flag) {
    RunConfig cfg = load_run_config(config_path);
    if (n_flag) {
        if (*n_flag < 8 || *n_flag % 2 != 0)
            throw ConfigError("grid size must be even and at least 8");
        cfg.grid_n = *n_flag;
    }
    if (dt_flag) {
        if (!(*dt_flag > 0.0)) throw ConfigError("dt must be positive");
        cfg.dt = *dt_flag;
    }
    if (t_end_flag) {
        if (!(*t_end_flag > 0.0)) throw ConfigError("t_end must be positive");
        cfg.t_end = *t_end_flag;
    }

    EvolutionConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.strict_cfl = strict;
    if (gauge) {
        const WellPosednessReport rep = classify(cfg.coefficients);
        if (!rep.well_posed) {
            std::fprintf(stderr,
                         "gauge evolution requires a well-posed operator, but the "
                         "coefficients fail the classification; rerun `check` for the "
                         "certificate\n");
            return 1;
        }
        ec.gauge = true;
        ec.phi = rep.potential;
    }

    const Grid g(cfg.grid_n);
    const TrigPolynomial u0_poly = random_initial_field(cfg.seed, cfg.grid_n);
    const std::vector<double> u0_real = u0_poly.sample_grid(cfg.grid_n);
    std::vector<Complex> u0_vals(u0_real.begin(), u0_real.end());
    const SpectralState u0 = SpectralState::from_values(g, std::move(u0_vals));

    const EvolutionResult result = evolve(u0, cfg.coefficients, ec);
    const std::string dest = output_flag.empty() ? cfg.output_path : output_flag;
    write_output(dest, result.series.to_csv());
    if (!dest.empty())
        std::printf("final norm %.17g at t = %.17g%s\n", result.series.l2_norm.back(),
                    result.series.t.back(),
                    result.series.aborted ? " (norm ceiling reached, stopped early)" : "");
    return 0;
}

/// Smallest carrier direction along which some failing mode is resonant
/// (beta . p'(alpha) = 0) with nonvanishing coefficient trace, searched over
/// rings |alpha|_inf = 1..4 nearest first; (1, 0) if none qualifies.
LatticePoint instability_witness(const CoefficientSet& set,
                                 const std::vector<LatticePoint>& failing) {
    auto is_failing = [&](const LatticePoint& b) {
        for (const LatticePoint& f : failing)
            if ((b.x1 == f.x1 && b.x2 == f.x2) || (b.x1 == -f.x1 && b.x2 == -f.x2)) return true;
        return false;
    };
    for (long long ring = 1; ring <= 4; ++ring) {
        std::vector<LatticePoint> ring_points;
        for (long long x1 = -ring; x1 <= ring; ++x1)
            for (long long x2 = -ring; x2 <= ring; ++x2)
                if (std::max(std::llabs(x1), std::llabs(x2)) == ring)
                    ring_points.push_back(LatticePoint{x1, x2});
        std::sort(ring_points.begin(), ring_points.end(),
                  [](const LatticePoint& u, const LatticePoint& v) {
                      const long long nu = u.x1 * u.x1 + u.x2 * u.x2;
                      const long long nv = v.x1 * v.x1 + v.x2 * v.x2;
                      if (nu != nv) return nu < nv;
                      if (u.x1 != v.x1) return u.x1 > v.x1;
                      return u.x2 > v.x2;
                  });
        double best = 0.0;
        LatticePoint best_alpha{1, 0};
        for (const LatticePoint& cand : ring_points) {
            double score = 0.0;
            for (const FlowMode& m : flow_modes(set, cand))
                if (m.resonant && is_failing(m.beta)) score = std::max(score, std::abs(m.amplitude));
            if (score > best) {
                best = score;
                best_alpha = cand;
            }
        }
        if (best > 0.0) return best_alpha;
    }
    return LatticePoint{1, 0};
}

int run_instability(const std::string& config_path, const std::vector<long long>& alpha_flag,
                    double T, std::vector<int> l_list, const std::string& output_flag) {
    const RunConfig cfg = load_run_config(config_path);
    const CoefficientSet& set = cfg.coefficients;
    if (!(T > 0.0)) throw ConfigError("T must be positive");
    if (l_list.empty()) throw ConfigError("at least one l is required");
    for (int l : l_list)
        if (l < 1) throw ConfigError("every l must be a positive integer");

    LatticePoint alpha{1, 0};
    if (!alpha_flag.empty()) {
        alpha = LatticePoint{alpha_flag[0], alpha_flag[1]};
        if (alpha.x1 == 0 && alpha.x2 == 0) throw ConfigError("alpha must be nonzero");
    } else {
        const WellPosednessReport rep = classify(set);
        if (!rep.well_posed) alpha = instability_witness(set, rep.failing_modes);
    }

    const long long amax = std::max(std::llabs(alpha.x1), std::llabs(alpha.x2));
    const int max_l = *std::max_element(l_list.begin(), l_list.end());
    const int need = 2 * int(max_l * amax + 6 + set.degree() + 4);
    int n = cfg.grid_n;
    while (n < need && n <= 1024) n *= 2;
    if (n > 1024) {
        std::fprintf(stderr,
                     "grid too small to resolve l=%d along alpha=(%lld, %lld); "
                     "a grid of %d exceeds the built-in cap of 1024\n",
                     max_l, alpha.x1, alpha.x2, n);
        return 2;
    }
    const Grid g(n);

    std::vector<AsymptoticSpec> specs;
    std::vector<Grid> grids;
    for (int l : l_list) {
        specs.push_back(make_default_spec(set, alpha, l, T, g));
        grids.push_back(g);
    }
    const std::vector<GrowthReport> reports = run_family(set, specs, grids);

    bool family_violated = false;
    for (const GrowthReport& r : reports) {
        family_violated = family_violated || r.inequality_violated;
        std::printf("l = %d: growth factor %.6g, initial norm %.6g, final norm %.6g, "
                    "residual integral %.6g, A_alpha %.6g, violated %s\n",
                    r.l, r.measured_growth_factor, r.norm_initial, r.norm_final,
                    r.residual_integral, r.a_alpha, r.inequality_violated ? "yes" : "no");
    }
    std::printf("energy inequality violated for the family: %s\n",
                family_violated ? "yes" : "no");

    const std::string dest = output_flag.empty() ? cfg.output_path : output_flag;
    if (!dest.empty()) {
        Json j;
        j["alpha"] = Json::array({alpha.x1, alpha.x2});
        j["T"] = T;
        j["grid_n"] = n;
        j["reports"] = growth_reports_to_json(reports);
        j["family_violated"] = family_violated;
        write_output(dest, j.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "lattice solutions, well-posedness analysis, pseudospectral simulation, and "
        "energy-inequality stress tests for a third-order dispersive operator on the "
        "2-torus (set TORUS_DISPERSIVE_THREADS to cap parallelism)"};
    app.require_subcommand(1);

    long long lat_a1 = 0, lat_a2 = 0;
    bool lat_exact = false;
    CLI::App* lattice = app.add_subcommand(
        "lattice", "solve grad_p(xi) = alpha for xi and verify the solution");
    lattice->add_option("alpha1", lat_a1, "first component of alpha")->required();
    lattice->add_option("alpha2", lat_a2, "second component of alpha")->required();
    lattice->add_flag("--exact", lat_exact, "also print the exact radical representation");

    std::string check_config, check_output;
    int check_box = 3;
    double check_tol = 1e-10;
    CLI::App* check = app.add_subcommand(
        "check", "classify a coefficient config as well- or ill-posed");
    check->add_option("config", check_config, "path to a JSON config")->required();
    check->add_option("--alpha-box", check_box, "half-width of the alpha sampling box")
        ->default_val(3);
    check->add_option("--tol", check_tol, "classification tolerance")->default_val(1e-10);
    check->add_option("--output", check_output, "write the JSON report to this path");

    std::string sim_config, sim_output;
    int sim_n = 0;
    double sim_dt = 0.0, sim_t_end = 0.0;
    bool sim_gauge = false, sim_strict = false;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "evolve seeded random initial data and record the norm history");
    simulate->add_option("config", sim_config, "path to a JSON config")->required();
    CLI::Option* sim_n_opt = simulate->add_option("--n", sim_n, "grid size override");
    CLI::Option* sim_dt_opt = simulate->add_option("--dt", sim_dt, "time step override");
    CLI::Option* sim_t_opt = simulate->add_option("--t-end", sim_t_end, "end time override");
    simulate->add_flag("--gauge", sim_gauge, "evolve the gauged variable e^phi u");
    simulate->add_flag("--strict", sim_strict, "abort instead of warn on a stability violation");
    simulate->add_option("--output", sim_output, "write the CSV to this path");

    std::string inst_config, inst_output;
    std::vector<long long> inst_alpha;
    double inst_T = 3.0;
    std::vector<int> inst_l{4, 8, 16, 32};
    CLI::App* instability = app.add_subcommand(
        "instability", "measure the growth family that stresses the energy inequality");
    instability->add_option("config", inst_config, "path to a JSON config")->required();
    instability->add_option("--alpha", inst_alpha, "carrier direction (two integers)")
        ->expected(2);
    instability->add_option("--T", inst_T, "time horizon of the family")->default_val(3.0);
    instability->add_option("--l", inst_l, "list of l values")->expected(-1);
    instability->add_option("--output", inst_output, "write the JSON report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(lattice)) return run_lattice(lat_a1, lat_a2, lat_exact);
        if (app.got_subcommand(check))
            return run_check(check_config, check_box, check_tol, check_output);
        if (app.got_subcommand(simulate))
            return run_simulate(sim_config,
                                sim_n_opt->count() ? std::optional<int>(sim_n) : std::nullopt,
                                sim_dt_opt->count() ? std::optional<double>(sim_dt) : std::nullopt,
                                sim_t_opt->count() ? std::optional<double>(sim_t_end) : std::nullopt,
                                sim_gauge, sim_strict, sim_output);
        if (app.got_subcommand(instability))
            return run_instability(inst_config, inst_alpha, inst_T, inst_l, inst_output);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
