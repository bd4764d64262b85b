#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmtspec/cdma.hpp"
#include "rmtspec/free_product.hpp"
#include "rmtspec/free_sum.hpp"
#include "rmtspec/json_io.hpp"
#include "rmtspec/rmt_lab.hpp"

using namespace rmtspec;
using cplx = std::complex<double>;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

// Raised for anything wrong with the config file itself, as opposed to a
// solver failing on a valid config.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    json extra = json::object();  // merged into the json output only

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string cell_to_csv(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
    return std::get<std::string>(c);
}

json cell_to_json(const Cell& c) {
    if (std::holds_alternative<double>(c)) {
        double v = std::get<double>(c);
        if (std::isnan(v)) return nullptr;
        return v;
    }
    if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
    return std::get<std::string>(c);
}

void write_table(const Table& t, const std::string& format, std::ostream& os) {
    if (format == "csv") {
        for (std::size_t k = 0; k < t.columns.size(); ++k)
            os << (k ? "," : "") << t.columns[k];
        os << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t k = 0; k < row.size(); ++k)
                os << (k ? "," : "") << cell_to_csv(row[k]);
            os << "\n";
        }
        return;
    }
    json out;
    out["columns"] = t.columns;
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& c : row) r.push_back(cell_to_json(c));
        rows.push_back(std::move(r));
    }
    out["rows"] = std::move(rows);
    for (auto it = t.extra.begin(); it != t.extra.end(); ++it) out[it.key()] = it.value();
    os << out.dump(2) << "\n";
}

struct Options {
    std::string config_path;
    std::string output;
    std::string format = "csv";
    std::uint64_t seed = 1;
    long long trials = 10;
    long long n = 256;
    bool quiet = false;
    bool seed_given = false;
    bool trials_given = false;
    bool n_given = false;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid json: ") + e.what());
    }
}

// Runs a config-interpretation step, converting library validation errors and
// json access errors into ConfigError so they exit with the schema code.
template <typename F>
auto interpret(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config schema violation: ") + e.what());
    } catch (const Error& e) {
        throw ConfigError(std::string("config schema violation: ") + e.what());
    }
}

std::vector<SpectralMeasure> measures_from_config(const json& cfg, std::size_t min_count) {
    return interpret([&] {
        std::vector<SpectralMeasure> ms;
        for (const auto& j : cfg.at("measures")) ms.push_back(measure_from_json(j));
        if (ms.size() < min_count)
            throw ConfigError("config needs at least " + std::to_string(min_count) + " measures");
        return ms;
    });
}

std::vector<HalfPlanePoint> grid_from_config(const json& cfg) {
    return interpret([&] {
        auto grid = z_grid_from_json(cfg.at("z_grid"));
        if (grid.empty()) throw ConfigError("z_grid must be nonempty");
        return grid;
    });
}

SolverConfig solver_from_config(const json& cfg) {
    return interpret([&] {
        return cfg.contains("solver") ? solver_from_json(cfg.at("solver")) : SolverConfig{};
    });
}

CdmaScenario scenario_from_config(const json& cfg) {
    return interpret([&] { return scenario_from_json(cfg.at("scenario")); });
}

std::vector<double> snr_from_config(const json& cfg) {
    return interpret([&] {
        std::vector<double> snrs = cfg.at("snr_db").get<std::vector<double>>();
        if (snrs.empty()) throw ConfigError("snr_db must be nonempty");
        return snrs;
    });
}

struct McSetup {
    std::string model;  // "sum", "product", or "cdma"
    std::vector<SpectralMeasure> measures;
    std::optional<CdmaScenario> scenario;
    std::vector<HalfPlanePoint> grid;
    std::uint64_t seed = 1;
    int trials = 10;
    int n = 256;
};

McSetup mc_from_config(const json& cfg, const Options& opt) {
    McSetup s;
    interpret([&] {
        s.model = cfg.at("model").get<std::string>();
        if (s.model == "sum") {
            s.measures = measures_from_config(cfg, 1);
        } else if (s.model == "product") {
            s.measures = measures_from_config(cfg, 2);
            if (s.measures.size() != 2)
                throw ConfigError("the product ensemble takes exactly two measures");
        } else if (s.model == "cdma") {
            s.scenario = scenario_from_config(cfg);
        } else {
            throw ConfigError("model must be one of sum, product, cdma");
        }
        s.grid = grid_from_config(cfg);
        s.seed = opt.seed_given ? opt.seed : cfg.value("seed", std::uint64_t{1});
        long long trials = opt.trials_given ? opt.trials : cfg.value("trials", 10LL);
        long long n = opt.n_given ? opt.n : cfg.value("n", 256LL);
        if (trials < 1 || trials > 1000000) throw ConfigError("trials must be in [1, 1000000]");
        if (n < 1 || n > 16384) throw ConfigError("n must be in [1, 16384]");
        s.trials = int(trials);
        s.n = int(n);
        return 0;
    });
    return s;
}

// Mean empirical transform over trials, one eigendecomposition per instance.
std::vector<cplx> mc_transform(const McSetup& s) {
    std::vector<cplx> acc(s.grid.size(), 0.0);
    for (int t = 0; t < s.trials; ++t) {
        RngStream rng(s.seed, std::uint64_t(t));
        Eigen::VectorXd eigs;
        if (s.model == "sum") {
            eigs = hermitian_eigenvalues(build_sum(s.measures, s.n, rng));
        } else if (s.model == "product") {
            eigs = hermitian_eigenvalues(
                build_product_hermitized(s.measures[0], s.measures[1], s.n, rng));
        } else {
            eigs = hermitian_eigenvalues(build_cdma(*s.scenario, s.n, rng).r);
        }
        for (std::size_t k = 0; k < s.grid.size(); ++k)
            acc[k] += empirical_stieltjes(eigs, s.grid[k]);
    }
    for (auto& v : acc) v /= double(s.trials);
    return acc;
}

int emit(const Table& t, const Options& opt, int exit_code) {
    if (opt.output.empty()) {
        write_table(t, opt.format, std::cout);
    } else {
        std::ofstream out(opt.output);
        if (!out) {
            std::cerr << "error: cannot open output file: " << opt.output << "\n";
            return 1;
        }
        write_table(t, opt.format, out);
    }
    if (!opt.quiet)
        std::cerr << t.rows.size() << " rows"
                  << (exit_code == kExitNonConvergence ? ", with failed points" : "") << "\n";
    return exit_code;
}

std::vector<Cell> state_row(HalfPlanePoint z, cplx g, double residual, int iterations,
                            bool converged) {
    double gr = converged ? g.real() : std::numeric_limits<double>::quiet_NaN();
    double gi = converged ? g.imag() : std::numeric_limits<double>::quiet_NaN();
    return {z.re, z.im, gr, gi, residual, (long long)iterations,
            std::string(converged ? "ok" : "nonconvergence")};
}

int run_free_sum(const json& cfg, const Options& opt) {
    auto measures = measures_from_config(cfg, 1);
    auto grid = grid_from_config(cfg);
    auto solver = solver_from_config(cfg);
    Table t;
    t.columns = {"z_re", "z_im", "G_re", "G_im", "residual", "iterations", "status"};
    auto states = solve_sum_grid(measures, grid, solver);
    bool all_ok = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& st = states[k];
        all_ok = all_ok && st.converged;
        t.add(state_row(grid[k], st.g, st.residual, st.iterations, st.converged));
    }
    return emit(t, opt, all_ok ? kExitOk : kExitNonConvergence);
}

int run_free_product(const json& cfg, const Options& opt) {
    auto measures = measures_from_config(cfg, 2);
    auto grid = grid_from_config(cfg);
    auto solver = solver_from_config(cfg);
    std::vector<double> inversion_grid;
    if (cfg.contains("inversion_grid"))
        inversion_grid = interpret([&] { return cfg.at("inversion_grid").get<std::vector<double>>(); });
    Table t;
    t.columns = {"z_re", "z_im", "G_re", "G_im", "residual", "iterations", "status"};
    bool all_ok = true;
    if (measures.size() == 2) {
        for (const auto& z : grid) {
            try {
                auto st = solve_product(measures[0], measures[1], z, solver);
                all_ok = all_ok && st.converged;
                t.add(state_row(z, st.g, st.residual, st.iterations, st.converged));
            } catch (const NonConvergence&) {
                all_ok = false;
                t.add(state_row(z, 0.0, std::numeric_limits<double>::quiet_NaN(), 0, false));
            }
        }
    } else {
        try {
            auto chain = solve_product_chain(measures, grid, inversion_grid, solver);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const auto& st = chain.states[k];
                all_ok = all_ok && st.converged;
                t.add(state_row(grid[k], st.g, st.residual, st.iterations, st.converged));
            }
            t.extra["final_measure"] = measure_to_json(chain.measure);
        } catch (const NonConvergence& e) {
            std::cerr << "error: " << e.what() << "\n";
            all_ok = false;
        }
    }
    return emit(t, opt, all_ok ? kExitOk : kExitNonConvergence);
}

int run_cdma_stieltjes(const json& cfg, const Options& opt) {
    auto scenario = scenario_from_config(cfg);
    auto grid = grid_from_config(cfg);
    auto solver = solver_from_config(cfg);
    Table t;
    t.columns = {"z_re", "z_im", "G_re", "G_im", "residual", "iterations", "status"};
    bool all_ok = true;
    for (const auto& z : grid) {
        try {
            auto st = solve_theorem1(scenario, z, solver);
            all_ok = all_ok && st.converged;
            t.add(state_row(z, st.g, st.residual, st.iterations, st.converged));
        } catch (const NonConvergence&) {
            all_ok = false;
            t.add(state_row(z, 0.0, std::numeric_limits<double>::quiet_NaN(), 0, false));
        }
    }
    return emit(t, opt, all_ok ? kExitOk : kExitNonConvergence);
}

int run_cdma_sinr(const json& cfg, const Options& opt) {
    auto scenario = scenario_from_config(cfg);
    auto snrs = snr_from_config(cfg);
    auto solver = solver_from_config(cfg);
    Table t;
    t.columns = {"snr_db", "transmitter", "sinr_db", "status"};
    auto rows = sinr_sweep(scenario, snrs, solver);
    bool all_ok = true;
    for (const auto& row : rows) {
        all_ok = all_ok && row.status == "ok";
        t.add({row.snr_db, (long long)row.transmitter, row.sinr_db, row.status});
    }
    return emit(t, opt, all_ok ? kExitOk : kExitNonConvergence);
}

int run_monte_carlo(const json& cfg, const Options& opt) {
    auto s = mc_from_config(cfg, opt);
    Table t;
    t.columns = {"z_re", "z_im", "G_re", "G_im", "n", "trials", "status"};
    auto mc = mc_transform(s);
    for (std::size_t k = 0; k < s.grid.size(); ++k)
        t.add({s.grid[k].re, s.grid[k].im, mc[k].real(), mc[k].imag(), (long long)s.n,
               (long long)s.trials, std::string("ok")});
    return emit(t, opt, kExitOk);
}

int run_compare(const json& cfg, const Options& opt) {
    auto s = mc_from_config(cfg, opt);
    auto solver = solver_from_config(cfg);
    Table t;
    t.columns = {"z_re",      "z_im", "G_solver_re", "G_solver_im", "G_mc_re",
                 "G_mc_im",   "abs_gap", "n",        "trials",      "status"};
    auto mc = mc_transform(s);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<cplx> sol(s.grid.size(), cplx(nan, nan));
    std::vector<bool> ok(s.grid.size(), false);
    if (s.model == "sum") {
        auto states = solve_sum_grid(s.measures, s.grid, solver);
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
            ok[k] = states[k].converged;
            if (ok[k]) sol[k] = states[k].g;
        }
    } else if (s.model == "product") {
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
            try {
                auto st = solve_product(s.measures[0], s.measures[1], s.grid[k], solver);
                ok[k] = st.converged;
                if (ok[k]) sol[k] = st.g;
            } catch (const NonConvergence&) {
            }
        }
    } else {
        // The empirical matrix includes the noise floor, so the solved
        // noiseless system is read off at z shifted by the noise variance.
        double shift = s.scenario->noise_variance;
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
            try {
                HalfPlanePoint zs(s.grid[k].re - shift, s.grid[k].im);
                auto st = solve_theorem1(*s.scenario, zs, solver);
                ok[k] = st.converged;
                if (ok[k]) sol[k] = st.g;
            } catch (const NonConvergence&) {
            }
        }
    }

    bool all_ok = true;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        all_ok = all_ok && ok[k];
        double gap = ok[k] ? std::abs(sol[k] - mc[k]) : nan;
        t.add({s.grid[k].re, s.grid[k].im, sol[k].real(), sol[k].imag(), mc[k].real(),
               mc[k].imag(), gap, (long long)s.n, (long long)s.trials,
               std::string(ok[k] ? "ok" : "nonconvergence")});
    }
    return emit(t, opt, all_ok ? kExitOk : kExitNonConvergence);
}

int validate_only(const std::string& mode, const json& cfg, const Options& opt) {
    if (mode == "free-sum") {
        measures_from_config(cfg, 1);
        grid_from_config(cfg);
    } else if (mode == "free-product") {
        measures_from_config(cfg, 2);
        grid_from_config(cfg);
    } else if (mode == "cdma-sinr") {
        scenario_from_config(cfg);
        snr_from_config(cfg);
    } else if (mode == "cdma-stieltjes") {
        scenario_from_config(cfg);
        grid_from_config(cfg);
    } else {
        mc_from_config(cfg, opt);
    }
    solver_from_config(cfg);
    if (!opt.quiet) std::cout << "config ok\n";
    return kExitOk;
}

int dispatch(const std::string& mode, const std::string& action, const Options& opt) {
    json cfg = load_config(opt.config_path);
    if (action == "validate") return validate_only(mode, cfg, opt);
    if (mode == "free-sum") return run_free_sum(cfg, opt);
    if (mode == "free-product") return run_free_product(cfg, opt);
    if (mode == "cdma-sinr") return run_cdma_sinr(cfg, opt);
    if (mode == "cdma-stieltjes") return run_cdma_stieltjes(cfg, opt);
    if (mode == "monte-carlo") return run_monte_carlo(cfg, opt);
    return run_compare(cfg, opt);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic spectra of random matrix ensembles and the matching "
                 "finite-size Monte Carlo lab"};
    app.require_subcommand(1);

    Options opt;
    const char* modes[] = {"free-sum",       "free-product", "cdma-sinr",
                           "cdma-stieltjes", "monte-carlo",  "compare"};
    const char* mode_help[] = {
        "Transform of a sum of independently rotated matrices",
        "Transform of a product of independently rotated nonnegative matrices",
        "Asymptotic MMSE SINR across an SNR sweep",
        "Transform of the multiuser correlation matrix",
        "Finite-size empirical transform of a matching ensemble",
        "Solver against Monte Carlo on a shared grid",
    };

    std::string picked_mode, picked_action;
    for (int m = 0; m < 6; ++m) {
        auto* sub = app.add_subcommand(modes[m], mode_help[m]);
        sub->require_subcommand(1);
        for (const char* action : {"run", "validate"}) {
            auto* act = sub->add_subcommand(
                action, action == std::string("run") ? "Solve and write the result table"
                                                     : "Check the config and exit");
            act->add_option("config", opt.config_path, "JSON config file")
                ->required()
                ->check(CLI::ExistingFile);
            act->add_option("--output", opt.output, "Write the table here instead of stdout");
            act->add_option("--format", opt.format, "Output format")
                ->check(CLI::IsMember({"csv", "json"}))
                ->capture_default_str();
            auto* seed_opt = act->add_option("--seed", opt.seed, "Monte Carlo seed override");
            auto* trials_opt =
                act->add_option("--trials", opt.trials, "Monte Carlo trial count override");
            auto* n_opt = act->add_option("--n", opt.n, "Monte Carlo matrix size override");
            act->add_flag("--quiet", opt.quiet, "Suppress the summary line");
            std::string mode_name = modes[m], action_name = action;
            act->callback([&, mode_name, action_name, seed_opt, trials_opt, n_opt] {
                picked_mode = mode_name;
                picked_action = action_name;
                opt.seed_given = seed_opt->count() > 0;
                opt.trials_given = trials_opt->count() > 0;
                opt.n_given = n_opt->count() > 0;
            });
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(picked_mode, picked_action, opt);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
