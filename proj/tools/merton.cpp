// merton: command-line front end for the temporal default-correlation toolkit.
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "merton/error.hpp"
#include "merton/fit.hpp"
#include "merton/io.hpp"
#include "merton/model.hpp"
#include "merton/portfolio.hpp"
#include "merton/posterior.hpp"
#include "merton/variance.hpp"

namespace {

using namespace merton;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ModelFlags {
    std::string p = "0.0151";
    std::string rho_A = "0.2";
    std::string kernel = "exponential";
    std::string kernel_param;
    std::string theta;
    std::string gamma;

    void add(CLI::App* cmd, const std::string& p_default) {
        p = p_default;
        cmd->add_option("--p", p, "probability of default")->capture_default_str();
        cmd->add_option("--rhoA", rho_A, "asset correlation")->capture_default_str();
        cmd->add_option("--kernel", kernel, "exponential | power")->capture_default_str();
        cmd->add_option("--kernel-param", kernel_param, "theta or gamma");
        cmd->add_option("--theta", theta, "exponential decay rate (implies --kernel exponential)");
        cmd->add_option("--gamma", gamma, "power decay exponent (implies --kernel power)");
    }

    ModelParams build() const {
        KernelFamily family = parse_kernel_family(kernel);
        std::string param = kernel_param;
        if (!theta.empty() && !gamma.empty()) throw DomainError("--theta and --gamma are mutually exclusive");
        if (!theta.empty()) {
            family = KernelFamily::Exponential;
            param = theta;
        } else if (!gamma.empty()) {
            family = KernelFamily::Power;
            param = gamma;
        }
        if (param.empty()) param = family == KernelFamily::Exponential ? "0.5" : "0.3";
        return ModelParams(parse_double(p), parse_double(rho_A), DecayKernel::of(family, parse_double(param)));
    }
};

struct FitFlags {
    std::string n_paths = "4096";
    std::uint64_t seed = 1;
    std::string starts = "8";
    std::string p_bounds = "1e-6:0.5";
    std::string rho_bounds = "0:0.999";
    std::string theta_bounds = "0:0.999";
    std::string gamma_bounds = "1e-3:20";
    std::string estimator = "sequential";
    std::string screening = "0";
    std::string warmup = "500";
    std::string tolerance = "1e-6";
    std::string max_evaluations = "2000";

    void add(CLI::App* cmd) {
        cmd->add_option("--n-paths", n_paths, "Monte-Carlo paths or particles per likelihood")->capture_default_str();
        cmd->add_option("--seed", seed, "random seed")->capture_default_str();
        cmd->add_option("--starts", starts, "multistart count")->capture_default_str();
        cmd->add_option("--p-bounds", p_bounds, "lo:hi box for p (lo == hi pins it)")->capture_default_str();
        cmd->add_option("--rhoA-bounds", rho_bounds, "lo:hi box for rho_A")->capture_default_str();
        cmd->add_option("--theta-bounds", theta_bounds, "lo:hi box for theta")->capture_default_str();
        cmd->add_option("--gamma-bounds", gamma_bounds, "lo:hi box for gamma")->capture_default_str();
        cmd->add_option("--estimator", estimator, "sequential | path-average")->capture_default_str();
        cmd->add_option("--screening-paths", screening, "multistart at this path count, refine at --n-paths")
            ->capture_default_str();
        cmd->add_option("--warmup", warmup, "discarded MCMC adaptation iterations")->capture_default_str();
        cmd->add_option("--tolerance", tolerance, "simplex size tolerance")->capture_default_str();
        cmd->add_option("--max-evaluations", max_evaluations, "per start")->capture_default_str();
    }

    static Interval interval(const std::string& text, const char* name) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            const double v = parse_double(text);
            return {v, v};
        }
        if (text.find(':', colon + 1) != std::string::npos) {
            throw DomainError(std::string(name) + " bounds must be lo:hi");
        }
        return {parse_double(text.substr(0, colon)), parse_double(text.substr(colon + 1))};
    }

    FitConfig build() const {
        FitConfig c;
        c.n_paths = static_cast<std::size_t>(parse_count(n_paths));
        c.seed = seed;
        c.n_starts = static_cast<std::size_t>(parse_count(starts));
        c.p = interval(p_bounds, "p");
        c.rho_A = interval(rho_bounds, "rhoA");
        c.theta = interval(theta_bounds, "theta");
        c.gamma = interval(gamma_bounds, "gamma");
        c.estimator = parse_likelihood_estimator(estimator);
        c.screening_paths = static_cast<std::size_t>(parse_count(screening));
        c.mcmc_warmup = static_cast<std::size_t>(parse_count(warmup));
        c.simplex_tolerance = parse_double(tolerance);
        c.max_evaluations = static_cast<std::size_t>(parse_count(max_evaluations));
        if (!(c.simplex_tolerance > 0.0)) throw DomainError("--tolerance must be > 0");
        c.validate();
        return c;
    }
};

void emit(const std::string& output, const std::string& content) {
    if (output.empty() || output == "-") {
        std::fwrite(content.data(), 1, content.size(), stdout);
        std::fflush(stdout);
    } else {
        write_text_file(output, content);
    }
}

std::vector<KernelFamily> families_from(const std::string& name) {
    if (name == "both") return {KernelFamily::Exponential, KernelFamily::Power};
    return {parse_kernel_family(name)};
}

std::size_t positive_count(const std::string& text, const char* flag) {
    const std::int64_t v = parse_count(text);
    if (v < 1) throw DomainError(std::string(flag) + " must be >= 1");
    return static_cast<std::size_t>(v);
}

// Distinct integers from 1 to tmax, roughly evenly spaced in log t.
std::vector<std::size_t> log_grid(std::size_t tmax, std::size_t points) {
    std::set<std::size_t> ts;
    if (points < 2) return {tmax};
    for (std::size_t i = 0; i < points; ++i) {
        const double e = std::log(static_cast<double>(tmax)) * static_cast<double>(i) / static_cast<double>(points - 1);
        ts.insert(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::exp(e)))));
    }
    ts.insert(tmax);
    return {ts.begin(), ts.end()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal default-correlation toolkit for the single-factor Merton model"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string output;
    app.add_option("-o,--output", output, "output file (default: stdout)");

    // mapping
    auto* mapping = app.add_subcommand("mapping", "rho_D = f(rho_A) and the tangent line A rho_A per p");
    std::string map_ps = "0.5,0.1,0.01";
    std::string map_rho = "0:1:0.01";
    std::string map_slope = "plackett";
    mapping->add_option("--p", map_ps, "comma-separated PDs or a start:stop:step range")->capture_default_str();
    mapping->add_option("--rhoA", map_rho, "start:stop:step")->capture_default_str();
    mapping->add_option("--slope", map_slope, "plackett | squared-cdf")->capture_default_str();

    // variance
    auto* variance = app.add_subcommand("variance", "C(t) and V(Z(t)) with bounds and asymptotics");
    ModelFlags var_model;
    var_model.add(variance, "0.01");
    std::string var_n = "1e4";
    std::string var_tmax = "1e5";
    std::string var_points = "60";
    std::string var_t;
    variance->add_option("--n", var_n, "obligors per year")->capture_default_str();
    variance->add_option("--T", var_tmax, "largest t on the log grid")->capture_default_str();
    variance->add_option("--points", var_points, "log-grid size")->capture_default_str();
    variance->add_option("--t", var_t, "explicit start:stop:step grid instead of the log grid");

    // scaling
    auto* scaling = app.add_subcommand("scaling", "scaling exponent delta vs gamma for power decay");
    std::string sc_gammas = "0.1:3.0:0.1";
    std::string sc_T = "1e5";
    std::string sc_p = "0.5";
    std::string sc_rho = "0.5";
    std::string sc_n = "1e4";
    scaling->add_option("--gammas", sc_gammas, "start:stop:step")->capture_default_str();
    scaling->add_option("--T", sc_T, "horizon T (delta compares T and 2T)")->capture_default_str();
    scaling->add_option("--p", sc_p)->capture_default_str();
    scaling->add_option("--rhoA", sc_rho)->capture_default_str();
    scaling->add_option("--n", sc_n)->capture_default_str();

    // simulate and generate
    auto* simulate = app.add_subcommand("simulate", "simulate one default history");
    ModelFlags sim_model;
    sim_model.add(simulate, "0.0151");
    std::string sim_T = "99";
    std::string sim_n = "1e4";
    std::uint64_t sim_seed = 1;
    int sim_first = 1;
    std::string sim_stats;
    simulate->add_option("--T", sim_T, "years")->capture_default_str();
    simulate->add_option("--n", sim_n, "cohort size per year")->capture_default_str();
    simulate->add_option("--seed", sim_seed)->capture_default_str();
    simulate->add_option("--first-year", sim_first)->capture_default_str();
    simulate->add_option("--stats", sim_stats, "write panel statistics JSON here");

    auto* generate = app.add_subcommand("generate", "write a synthetic history CSV and its truth sidecar JSON");
    ModelFlags gen_model;
    gen_model.add(generate, "0.0151");
    std::string gen_T = "99";
    std::string gen_n = "1e4";
    std::uint64_t gen_seed = 1;
    int gen_first = 1;
    std::string gen_truth;
    generate->add_option("--T", gen_T, "years")->capture_default_str();
    generate->add_option("--n", gen_n, "cohort size per year")->capture_default_str();
    generate->add_option("--seed", gen_seed)->capture_default_str();
    generate->add_option("--first-year", gen_first)->capture_default_str();
    generate->add_option("--truth", gen_truth, "sidecar path (default: <output>.truth.json)");

    // fit
    auto* fit = app.add_subcommand("fit", "MAP estimate of (p, rho_A, theta|gamma)");
    FitFlags fit_flags;
    fit_flags.add(fit);
    std::string fit_input;
    std::string fit_kernel = "exponential";
    bool fit_waic = false;
    bool fit_wbic = false;
    std::string fit_draws = "2000";
    std::string fit_unit = "year-marginal";
    fit->add_option("--input", fit_input, "history CSV")->required();
    fit->add_option("--kernel", fit_kernel, "exponential | power | both")->capture_default_str();
    fit->add_flag("--waic", fit_waic, "also sample the posterior and report WAIC");
    fit->add_flag("--wbic", fit_wbic, "also report WBIC");
    fit->add_option("--draws", fit_draws, "posterior draws for WAIC/WBIC")->capture_default_str();
    fit->add_option("--waic-unit", fit_unit, "year-marginal | one-step")->capture_default_str();

    // compare
    auto* compare = app.add_subcommand("compare", "WAIC and WBIC for both kernel families");
    FitFlags cmp_flags;
    cmp_flags.add(compare);
    std::string cmp_input;
    std::string cmp_draws = "2000";
    std::string cmp_unit = "year-marginal";
    compare->add_option("--input", cmp_input, "history CSV")->required();
    compare->add_option("--draws", cmp_draws, "posterior draws per chain")->capture_default_str();
    compare->add_option("--waic-unit", cmp_unit, "year-marginal | one-step")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*mapping) {
            std::vector<double> ps;
            if (map_ps.find(':') != std::string::npos) {
                ps = parse_range(map_ps);
            } else {
                std::size_t pos = 0;
                while (pos <= map_ps.size()) {
                    const auto comma = map_ps.find(',', pos);
                    ps.push_back(parse_double(map_ps.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            const std::vector<double> rhos = parse_range(map_rho);
            const SlopeMode mode = map_slope == "plackett"      ? SlopeMode::Plackett
                                   : map_slope == "squared-cdf" ? SlopeMode::SquaredCdf
                                                                : throw DomainError("--slope must be plackett or squared-cdf");
            for (double p : ps) {
                if (!(p > 0.0 && p < 1.0)) throw DomainError("--p values must lie in (0,1)");
            }
            for (double r : rhos) {
                if (!(r >= -1.0 && r <= 1.0)) throw DomainError("--rhoA values must lie in [-1,1]");
            }
            CurveTable table{{"p", "rho_A", "rho_D", "tangent"}, {}};
            for (double p : ps) {
                const double a = tangent_slope_A(p, mode);
                for (double r : rhos) table.rows.push_back({p, r, map_asset_to_default(p, r), a * r});
            }
            emit(output, format_curve_csv(table));
        } else if (*variance) {
            const ModelParams params = var_model.build();
            const std::size_t n = positive_count(var_n, "--n");
            std::vector<std::size_t> ts;
            if (!var_t.empty()) {
                for (double t : parse_range(var_t)) {
                    if (!(t >= 1.0) || t != std::floor(t)) throw DomainError("--t values must be integers >= 1");
                    ts.push_back(static_cast<std::size_t>(t));
                }
            } else {
                ts = log_grid(positive_count(var_tmax, "--T"), positive_count(var_points, "--points"));
            }
            TemporalCorrelationTable table(params);
            std::size_t horizon = 0;
            for (std::size_t t : ts) horizon = std::max(horizon, t);
            table.extend(horizon);
            CurveTable out{{"t", "C_t", "V_exact", "V_lower", "V_upper", "V_asymptotic"}, {}};
            for (std::size_t t : ts) {
                const VarianceBreakdown v = table.breakdown(n, t);
                const double asym = t >= 2 ? variance_asymptotic(params, n, t).value
                                           : std::numeric_limits<double>::quiet_NaN();
                out.rows.push_back({static_cast<double>(t), table.default_correlation(t), v.total, v.lower_bound,
                                    v.upper_bound, asym});
            }
            emit(output, format_curve_csv(out));
        } else if (*scaling) {
            const std::vector<double> gammas = parse_range(sc_gammas);
            const ModelParams base(parse_double(sc_p), parse_double(sc_rho), DecayKernel::power(1.0));
            const std::size_t T = positive_count(sc_T, "--T");
            const std::size_t n = positive_count(sc_n, "--n");
            for (double g : gammas) {
                if (!(g >= 0.0)) throw DomainError("--gammas must be >= 0");
            }
            CurveTable out{{"gamma", "delta"}, {}};
            for (const ScalingPoint& pt : delta_curve(gammas, base, n, T)) {
                out.rows.push_back({pt.kernel_parameter, pt.delta});
            }
            emit(output, format_curve_csv(out));
        } else if (*simulate || *generate) {
            const bool gen = generate->parsed();
            const ModelParams params = (gen ? gen_model : sim_model).build();
            const std::size_t T = positive_count(gen ? gen_T : sim_T, "--T");
            const std::int64_t n = static_cast<std::int64_t>(positive_count(gen ? gen_n : sim_n, "--n"));
            const std::uint64_t seed = gen ? gen_seed : sim_seed;
            const int first = gen ? gen_first : sim_first;
            if (gen && (output.empty() || output == "-")) throw DomainError("generate requires --output");
            const std::vector<std::int64_t> cohorts(T, n);
            const DefaultHistory history = simulate_panel(params, cohorts, seed, first);
            emit(output, format_history_csv(history));
            if (gen) {
                TruthSidecar truth;
                truth.family = params.kernel().family();
                truth.p = params.p();
                truth.rho_A = params.rho_A();
                truth.kernel_param = params.kernel().parameter();
                truth.years = static_cast<std::int64_t>(T);
                truth.cohort_size = n;
                truth.first_year = first;
                truth.seed = seed;
                write_text_file(gen_truth.empty() ? output + ".truth.json" : gen_truth, dump_json(to_json(truth)));
            } else if (!sim_stats.empty()) {
                write_text_file(sim_stats, dump_json(panel_stats_json(history)));
            }
        } else if (*fit) {
            const FitConfig config = fit_flags.build();
            const std::vector<KernelFamily> families = families_from(fit_kernel);
            const std::size_t draws = positive_count(fit_draws, "--draws");
            const WaicUnit unit = parse_waic_unit(fit_unit);
            const DefaultHistory history = parse_history_csv(fit_input);
            if ((fit_waic || fit_wbic) && draws < 100) throw DomainError("--draws must be >= 100");
            if (fit_wbic && history.size() < 2) throw DomainError("WBIC needs at least 2 years");
            nlohmann::json out = nlohmann::json::array();
            for (KernelFamily family : families) {
                FitResult result = map_fit(history, family, config);
                const ParameterTriple start{result.params_hat.p(), result.params_hat.rho_A(),
                                            result.params_hat.kernel().parameter()};
                if (fit_waic) {
                    const PosteriorSample s = pseudo_marginal_mcmc(history, family, config, draws, 1.0, start);
                    result.waic = waic(history, s, config.n_paths, unit).waic;
                }
                if (fit_wbic) result.wbic = wbic(history, family, config, draws, start);
                out.push_back(to_json(summarize(result)));
            }
            emit(output, dump_json(out.size() == 1 ? out[0] : out));
        } else if (*compare) {
            const FitConfig config = cmp_flags.build();
            const std::size_t draws = positive_count(cmp_draws, "--draws");
            const WaicUnit unit = parse_waic_unit(cmp_unit);
            if (draws < 100) throw DomainError("--draws must be >= 100");
            const DefaultHistory history = parse_history_csv(cmp_input);
            if (history.size() < 2) throw DomainError("compare needs at least 2 years");
            const auto rows = compare_families(history, config, draws, unit);
            emit(output, dump_json(comparison_json(rows, history.size(), unit, draws)));
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NotPsdError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
