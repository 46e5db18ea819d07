// lumen: exact simulation and large-deviations analysis of two-state
// luminescence reaction systems.
//
// One binary, subcommand style. Parameters come from flags, with an optional
// JSON config file as fallback (flags win). Stochastic commands require an
// explicit seed. Outputs land in --out (or $LUMEN_OUT_DIR, or the working
// directory) and embed the fully resolved configuration, so any result can be
// reproduced from its own metadata header.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lumen/large_emission.hpp"
#include "lumen/model_io.hpp"
#include "lumen/optimal_path.hpp"
#include "lumen/simulator.hpp"
#include "lumen/validation.hpp"

using nlohmann::json;
using namespace lumen;

namespace {

const char* error_name(const Error& e) {
    if (dynamic_cast<const DuplicateTriplet*>(&e)) return "DuplicateTriplet";
    if (dynamic_cast<const TripletOrderViolation*>(&e)) return "TripletOrderViolation";
    if (dynamic_cast<const NonPositiveRate*>(&e)) return "NonPositiveRate";
    if (dynamic_cast<const StateOutOfRange*>(&e)) return "StateOutOfRange";
    if (dynamic_cast<const GridOutOfRange*>(&e)) return "GridOutOfRange";
    if (dynamic_cast<const EventBudgetExceeded*>(&e)) return "EventBudgetExceeded";
    if (dynamic_cast<const BlowUp*>(&e)) return "BlowUp";
    if (dynamic_cast<const NoConvergence*>(&e)) return "NoConvergence";
    if (dynamic_cast<const NonPhysicalRoot*>(&e)) return "NonPhysicalRoot";
    if (dynamic_cast<const AmbiguousDominantChannel*>(&e)) return "AmbiguousDominantChannel";
    if (dynamic_cast<const InsufficientHits*>(&e)) return "InsufficientHits";
    if (dynamic_cast<const AllCensored*>(&e)) return "AllCensored";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    return "Error";
}

// finite doubles pass through; infinities become strings so the json is valid
json json_number(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? json("inf") : json("-inf");
}

json json_numbers(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(json_number(x));
    return arr;
}

// Per-command state: bound flag storage plus the config-fallback appliers.
struct CommandContext {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::string model_path;
    std::string out_dir;
    json config;
    std::vector<std::function<void()>> appliers;
    std::vector<std::function<void()>> requirements;

    void init(CLI::App* c) {
        cmd = c;
        cmd->add_option("--config", config_path, "JSON config file (flags win over its values)");
        cmd->add_option("--out", out_dir, "output directory");
    }

    template <class T>
    CLI::Option* option(const std::string& flag, T& var, const std::string& key,
                        const std::string& help, bool required = false) {
        CLI::Option* opt = cmd->add_option(flag, var, help);
        appliers.push_back([this, opt, &var, key] {
            if (opt->count() == 0 && config.contains(key)) var = config[key].get<T>();
        });
        if (required) {
            requirements.push_back([this, opt, key, flag] {
                if (opt->count() == 0 && !config.contains(key)) throw CLI::RequiredError(flag);
            });
        }
        return opt;
    }

    void add_model_option() {
        cmd->add_option("--model", model_path, "model spec file (JSON)");
    }

    // after CLI11 parsing: load config, overlay unset flags, check musts
    void finalize() {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ParseError("cannot open config file " + config_path);
            try {
                in >> config;
            } catch (const json::exception& e) {
                throw ParseError(config_path + ": " + e.what());
            }
        }
        for (auto& apply : appliers) apply();
        for (auto& require : requirements) require();
        if (out_dir.empty() && config.contains("out")) out_dir = config["out"].get<std::string>();
        if (out_dir.empty()) {
            const char* env = std::getenv("LUMEN_OUT_DIR");
            out_dir = env && *env ? env : ".";
        }
    }

    ModelSpec load() {
        if (model_path.empty() && config.contains("model") && config["model"].is_string())
            model_path = config["model"].get<std::string>();
        if (!model_path.empty()) return load_model(model_path);
        if (config.contains("model") && config["model"].is_object())
            return model_from_json(config["model"]);
        throw CLI::RequiredError("--model");
    }

    json resolved_model() const {
        if (!model_path.empty()) return model_path;
        if (config.contains("model")) return config["model"];
        return nullptr;
    }

    std::string path_of(const std::string& filename) const { return out_dir + "/" + filename; }

    void write_text(const std::string& filename, const std::string& body) const {
        const std::string path = path_of(filename);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ParseError("cannot write " + path);
        out << body;
    }
};

void print_summary(const json& summary) { std::cout << summary.dump() << "\n"; }

std::vector<double> uniform_grid(double T, long long n) {
    std::vector<double> grid(n + 1);
    for (long long j = 0; j <= n; ++j)
        grid[j] = T * static_cast<double>(j) / static_cast<double>(n);
    return grid;
}

std::string format_csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---- subcommands ------------------------------------------------------------

struct ValidateCmd {
    CommandContext ctx;
    void run() {
        const ModelSpec spec = ctx.load();
        print_summary({{"valid", true},
                       {"d", spec.dimension()},
                       {"mu0", spec.mu0},
                       {"propensity_mode", to_string(spec.propensity_mode)}});
    }
};

struct SimulateCmd {
    CommandContext ctx;
    long long n = 100;
    long long m0 = -1; // -1: round(N * x_hat)
    double t = 1.0;
    std::uint64_t seed = 0;
    long long grid = 1000;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--n", n, "n", "number of particles N");
        ctx.option("--m0", m0, "m0", "initial excited count (default: round(N * x_hat))");
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--seed", seed, "seed", "RNG seed (required)", true);
        ctx.option("--grid", grid, "grid", "scaled-path sample count");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        if (m0 < 0) m0 = std::llround(static_cast<double>(n) * asymptotic_share(spec).x_hat);
        const json resolved = {{"command", "simulate"}, {"model", ctx.resolved_model()},
                               {"n", n},                {"m0", m0},
                               {"t", t},                {"seed", seed},
                               {"grid", grid}};

        const Trajectory traj = simulate(spec, n, m0, t, seed);
        std::ostringstream tcsv;
        write_trajectory_csv(tcsv, traj, resolved);
        ctx.write_text("trajectory.csv", tcsv.str());

        std::ostringstream scsv;
        write_position_csv(scsv, scaled_path(traj, uniform_grid(t, grid)), resolved);
        ctx.write_text("scaled.csv", scsv.str());

        print_summary({{"config", resolved},
                       {"events", traj.events.size()},
                       {"final_m", traj.final_state().m},
                       {"total_emission", total_emission(traj)},
                       {"files", {ctx.path_of("trajectory.csv"), ctx.path_of("scaled.csv")}}});
    }
};

struct FluidCmd {
    CommandContext ctx;
    double x0 = 0.5;
    double t = 1.0;
    double step = 1e-3;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--x0", x0, "x0", "initial excited share");
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--step", step, "step", "integrator step");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const json resolved = {{"command", "fluid"}, {"model", ctx.resolved_model()},
                               {"x0", x0},           {"t", t},
                               {"step", step}};
        const PositionPath path = fluid_trajectory(spec, x0, t, step);
        std::ostringstream csv;
        write_position_csv(csv, path, resolved);
        ctx.write_text("fluid.csv", csv.str());

        double final_emission = 0.0;
        for (double xi : path.x.back()) final_emission += xi;
        const FluidEquilibrium eq = fluid_equilibrium(spec);
        print_summary({{"config", resolved},
                       {"final_x0", path.x0.back()},
                       {"total_emission", final_emission},
                       {"equilibrium_x0", eq.x0},
                       {"equilibrium_flux", eq.emission_rate},
                       {"files", {ctx.path_of("fluid.csv")}}});
    }
};

struct HamiltonianCmd {
    CommandContext ctx;
    double x0 = 0.5;
    double sigma = 0.0;
    std::vector<double> kappa;
    double v0 = 0.0;
    std::vector<double> v;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--x0", x0, "x0", "excited share");
        ctx.option("--sigma", sigma, "sigma", "momentum conjugate to x0");
        ctx.option("--kappa", kappa, "kappa", "emission momenta (comma list)")->delimiter(',');
        ctx.option("--v0", v0, "v0", "dx0/dt for the Lagrangian");
        ctx.option("--v", v, "v", "emission velocities for the Lagrangian")->delimiter(',');
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const std::size_t d = spec.channels.size();
        if (kappa.empty()) kappa.assign(d, 0.0);
        if (kappa.size() != d) throw StateOutOfRange("--kappa needs one entry per channel");
        const PhasePoint p{x0, std::vector<double>(d, 0.0), sigma, kappa};

        const PhaseField f = hamiltonian_field(spec, p);
        json summary = {{"config",
                         {{"command", "hamiltonian-eval"},
                          {"model", ctx.resolved_model()},
                          {"x0", x0},
                          {"sigma", sigma},
                          {"kappa", kappa}}},
                        {"H", hamiltonian(spec, p)},
                        {"field",
                         {{"dx0", f.dx0},
                          {"dx", json_numbers(f.dx)},
                          {"dsigma", f.dsigma},
                          {"dkappa", json_numbers(f.dkappa)}}}};
        if (!v.empty()) {
            if (v.size() != d) throw StateOutOfRange("--v needs one entry per channel");
            const LagrangeResult lag = lagrangian(spec, x0, Velocity{v0, v});
            summary["lagrangian"] = {{"value", json_number(lag.value)},
                                     {"sigma", json_number(lag.sigma)},
                                     {"kappa", json_numbers(lag.kappa)}};
        }
        print_summary(summary);
    }
};

struct OptimalPathCmd {
    CommandContext ctx;
    double x0 = 0.5;
    std::vector<double> targets;
    double t = 1.0;
    double step = 0.0;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--x0", x0, "x0", "x0(0)");
        ctx.option("--targets", targets, "targets", "emission targets x_i(T) (comma list)", true)
            ->delimiter(',');
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--step", step, "step", "integrator step (default T/1000)");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const json resolved = {{"command", "optimal-path"}, {"model", ctx.resolved_model()},
                               {"x0", x0},                  {"targets", targets},
                               {"t", t},                    {"step", step}};
        BvpOptions options;
        options.step = step;
        const PhaseTrajectory traj = solve_bvp(spec, BoundaryData{x0, targets, t, 0.0}, options);
        std::ostringstream csv;
        write_phase_csv(csv, traj, resolved);
        ctx.write_text("optimal_path.csv", csv.str());

        json residuals = json::array();
        for (std::size_t i = 0; i < targets.size(); ++i)
            residuals.push_back(traj.points.back().x[i] - targets[i]);
        print_summary({{"config", resolved},
                       {"sigma0", traj.points.front().sigma},
                       {"kappa", json_numbers(traj.points.front().kappa)},
                       {"target_residuals", residuals},
                       {"rate", json_number(rate_functional(spec, positions(traj)))},
                       {"files", {ctx.path_of("optimal_path.csv")}}});
    }
};

struct StationaryCmd {
    CommandContext ctx;
    double b = 10.0;
    std::vector<double> split;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--b", b, "b", "emission level B", true);
        ctx.option("--split", split, "split", "emission split fractions (comma list)")
            ->delimiter(',');
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const json resolved = {{"command", "stationary"},
                               {"model", ctx.resolved_model()},
                               {"b", b},
                               {"split", split}};
        std::optional<std::vector<double>> split_opt;
        if (!split.empty()) split_opt = split;
        const StationarySolution sol = stationary_solution(spec, b, split_opt);
        json body = {{"config", resolved},
                     {"x0", sol.x0},
                     {"sigma", sol.sigma},
                     {"kappa", json_numbers(sol.kappa)},
                     {"velocities", json_numbers(sol.velocities)},
                     {"B", sol.B},
                     {"residual", sol.residual},
                     {"rate", stationary_rate(spec, sol)}};
        if (sol.alpha) body["alpha"] = json_numbers(*sol.alpha);
        ctx.write_text("stationary.json", body.dump(2) + "\n");
        print_summary(body);
    }
};

struct AsymptoteCmd {
    CommandContext ctx;
    void run() {
        const AsymptoticShare share = asymptotic_share(ctx.load());
        print_summary({{"x_hat", share.x_hat}, {"i0", share.channel}});
    }
};

struct ShareConvergenceCmd {
    CommandContext ctx;
    std::vector<double> b_list;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--b-list", b_list, "b_list", "emission levels (comma list)", true)
            ->delimiter(',');
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const json resolved = {{"command", "share-convergence"},
                               {"model", ctx.resolved_model()},
                               {"b_list", b_list}};
        const ShareConvergence table = share_convergence(spec, b_list);

        std::ostringstream csv;
        csv << "# config: " << resolved.dump() << "\n";
        csv << "B,x0,error,sigma";
        for (int i = 1; i <= spec.dimension(); ++i) csv << ",kappa_" << i;
        csv << "\n";
        for (const auto& row : table.rows) {
            csv << format_csv_number(row.B) << "," << format_csv_number(row.x0) << ","
                << format_csv_number(row.error) << "," << format_csv_number(row.sigma);
            for (double k : row.kappa) csv << "," << format_csv_number(k);
            csv << "\n";
        }
        ctx.write_text("share_convergence.csv", csv.str());

        json grid = json::array();
        for (const auto& g : table.rate_grid)
            grid.push_back({{"mu0", g.mu0}, {"mu_scale", g.mu_scale}, {"x0", g.x0}});
        const json body = {{"config", resolved},
                           {"x_hat", table.x_hat},
                           {"i0", table.channel},
                           {"fitted_exponent",
                            table.fitted_exponent ? json(*table.fitted_exponent) : json(nullptr)},
                           {"rate_grid", grid},
                           {"max_rate_grid_deviation", table.max_rate_grid_deviation},
                           {"rate_independent", table.max_rate_grid_deviation <= 1e-2}};
        ctx.write_text("share_convergence.json", body.dump(2) + "\n");
        print_summary(body);
    }
};

struct McTailCmd {
    CommandContext ctx;
    long long n = 20;
    long long m0 = -1;
    double t = 1.0;
    double b = 1.0;
    long long replicas = 100000;
    std::uint64_t seed = 0;
    int threads = 1;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--n", n, "n", "number of particles N");
        ctx.option("--m0", m0, "m0", "initial excited count (default: round(N * x_hat))");
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--b", b, "b", "scaled emission threshold B", true);
        ctx.option("--replicas", replicas, "replicas", "number of replicas");
        ctx.option("--seed", seed, "seed", "RNG seed (required)", true);
        ctx.option("--threads", threads, "threads", "parallel replica threads");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        if (m0 < 0) m0 = std::llround(static_cast<double>(n) * asymptotic_share(spec).x_hat);
        const json resolved = {{"command", "mc-tail"}, {"model", ctx.resolved_model()},
                               {"n", n},               {"m0", m0},
                               {"t", t},               {"b", b},
                               {"replicas", replicas}, {"seed", seed},
                               {"threads", threads}};
        McOptions options;
        options.threads = threads;
        const TailEstimate est = estimate_tail(spec, n, m0, t, b, replicas, seed, options);
        const json body = {{"config", resolved},
                           {"N", est.N},
                           {"B", est.B},
                           {"T", est.T},
                           {"replicas", est.replicas},
                           {"hits", est.hits},
                           {"p_hat", est.p_hat},
                           {"ci95", {est.ci_low, est.ci_high}},
                           {"seed", est.seed}};
        ctx.write_text("mc_tail.json", body.dump(2) + "\n");
        print_summary(body);
    }
};

struct LdpSlopeCmd {
    CommandContext ctx;
    std::vector<long long> n_list;
    double m0_frac = 0.5;
    double t = 1.0;
    double b = 1.0;
    long long replicas = 100000;
    std::uint64_t seed = 0;
    int threads = 1;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--n-list", n_list, "n_list", "particle counts (comma list)", true)
            ->delimiter(',');
        ctx.option("--m0-frac", m0_frac, "m0_frac", "initial excited fraction");
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--b", b, "b", "scaled emission threshold B", true);
        ctx.option("--replicas", replicas, "replicas", "replicas per N");
        ctx.option("--seed", seed, "seed", "RNG seed (required)", true);
        ctx.option("--threads", threads, "threads", "parallel replica threads");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        const json resolved = {{"command", "ldp-slope"}, {"model", ctx.resolved_model()},
                               {"n_list", n_list},       {"m0_frac", m0_frac},
                               {"t", t},                 {"b", b},
                               {"replicas", replicas},   {"seed", seed},
                               {"threads", threads}};
        McOptions options;
        options.threads = threads;
        const LdpSlopeResult res = ldp_slope(spec, n_list, m0_frac, t, b, replicas, seed, options);

        std::ostringstream csv;
        csv << "# config: " << resolved.dump() << "\n";
        csv << "N,hits,p_hat,empirical_rate,relative_gap,censored\n";
        json rows = json::array();
        for (const auto& row : res.rows) {
            csv << row.N << "," << row.estimate.hits << "," << format_csv_number(row.estimate.p_hat)
                << ",";
            if (row.censored)
                csv << ",,1\n";
            else
                csv << format_csv_number(row.empirical_rate) << ","
                    << format_csv_number(row.relative_gap) << ",0\n";
            rows.push_back(
                {{"N", row.N},
                 {"hits", row.estimate.hits},
                 {"p_hat", row.estimate.p_hat},
                 {"ci95", {row.estimate.ci_low, row.estimate.ci_high}},
                 {"censored", row.censored},
                 {"empirical_rate", row.censored ? json(nullptr) : json(row.empirical_rate)},
                 {"relative_gap", row.censored ? json(nullptr) : json(row.relative_gap)}});
        }
        ctx.write_text("ldp_slope.csv", csv.str());
        const json body = {{"config", resolved},
                           {"variational_rate", res.variational_rate},
                           {"rows", rows}};
        ctx.write_text("ldp_slope.json", body.dump(2) + "\n");
        print_summary(body);
    }
};

struct ConditionedShareCmd {
    CommandContext ctx;
    long long n = 20;
    long long m0 = -1;
    double t = 1.0;
    double b = 1.0;
    long long replicas = 100000;
    std::uint64_t seed = 0;
    int threads = 1;

    void bind(CLI::App* cmd) {
        ctx.init(cmd);
        ctx.add_model_option();
        ctx.option("--n", n, "n", "number of particles N");
        ctx.option("--m0", m0, "m0", "initial excited count (default: round(N * x_hat))");
        ctx.option("--t", t, "t", "horizon T");
        ctx.option("--b", b, "b", "scaled emission threshold B", true);
        ctx.option("--replicas", replicas, "replicas", "number of replicas");
        ctx.option("--seed", seed, "seed", "RNG seed (required)", true);
        ctx.option("--threads", threads, "threads", "parallel replica threads");
    }

    void run() {
        const ModelSpec spec = ctx.load();
        if (m0 < 0) m0 = std::llround(static_cast<double>(n) * asymptotic_share(spec).x_hat);
        const json resolved = {{"command", "conditioned-share"},
                               {"model", ctx.resolved_model()},
                               {"n", n},
                               {"m0", m0},
                               {"t", t},
                               {"b", b},
                               {"replicas", replicas},
                               {"seed", seed},
                               {"threads", threads}};
        McOptions options;
        options.threads = threads;
        const ConditionedShare share = conditioned_share(spec, n, m0, t, b, replicas, seed, options);
        const json body = {{"config", resolved},
                           {"mean_share", share.mean_share},
                           {"hits", share.hits}};
        ctx.write_text("conditioned_share.json", body.dump(2) + "\n");
        print_summary(body);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact simulation and large-deviations analysis of luminescence reaction systems"};
    app.require_subcommand(1);

    ValidateCmd validate_cmd;
    validate_cmd.ctx.init(app.add_subcommand("validate", "check a model spec file"));
    validate_cmd.ctx.add_model_option();

    SimulateCmd simulate_cmd;
    simulate_cmd.bind(app.add_subcommand("simulate", "exact stochastic simulation"));

    FluidCmd fluid_cmd;
    fluid_cmd.bind(app.add_subcommand("fluid", "law-of-large-numbers trajectory"));

    HamiltonianCmd hamiltonian_cmd;
    hamiltonian_cmd.bind(
        app.add_subcommand("hamiltonian-eval", "evaluate H, its field and the Lagrangian"));

    OptimalPathCmd optimal_cmd;
    optimal_cmd.bind(app.add_subcommand("optimal-path", "solve the boundary-value problem"));

    StationaryCmd stationary_cmd;
    stationary_cmd.bind(app.add_subcommand("stationary", "constant-x0 large-emission solution"));

    AsymptoteCmd asymptote_cmd;
    asymptote_cmd.ctx.init(app.add_subcommand("asymptote", "asymptotic excited share"));
    asymptote_cmd.ctx.add_model_option();

    ShareConvergenceCmd share_cmd;
    share_cmd.bind(app.add_subcommand("share-convergence", "finite-B convergence study"));

    McTailCmd mc_cmd;
    mc_cmd.bind(app.add_subcommand("mc-tail", "Monte Carlo tail probability"));

    LdpSlopeCmd ldp_cmd;
    ldp_cmd.bind(
        app.add_subcommand("ldp-slope", "empirical LDP rates against the variational value"));

    ConditionedShareCmd cond_cmd;
    cond_cmd.bind(app.add_subcommand("conditioned-share", "mean excited share of hit trajectories"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.get_subcommand("validate")->parsed()) {
            validate_cmd.ctx.finalize();
            validate_cmd.run();
        } else if (app.get_subcommand("simulate")->parsed()) {
            simulate_cmd.ctx.finalize();
            simulate_cmd.run();
        } else if (app.get_subcommand("fluid")->parsed()) {
            fluid_cmd.ctx.finalize();
            fluid_cmd.run();
        } else if (app.get_subcommand("hamiltonian-eval")->parsed()) {
            hamiltonian_cmd.ctx.finalize();
            hamiltonian_cmd.run();
        } else if (app.get_subcommand("optimal-path")->parsed()) {
            optimal_cmd.ctx.finalize();
            optimal_cmd.run();
        } else if (app.get_subcommand("stationary")->parsed()) {
            stationary_cmd.ctx.finalize();
            stationary_cmd.run();
        } else if (app.get_subcommand("asymptote")->parsed()) {
            asymptote_cmd.ctx.finalize();
            asymptote_cmd.run();
        } else if (app.get_subcommand("share-convergence")->parsed()) {
            share_cmd.ctx.finalize();
            share_cmd.run();
        } else if (app.get_subcommand("mc-tail")->parsed()) {
            mc_cmd.ctx.finalize();
            mc_cmd.run();
        } else if (app.get_subcommand("ldp-slope")->parsed()) {
            ldp_cmd.ctx.finalize();
            ldp_cmd.run();
        } else if (app.get_subcommand("conditioned-share")->parsed()) {
            cond_cmd.ctx.finalize();
            cond_cmd.run();
        }
    } catch (const CLI::RequiredError& e) {
        std::cerr << "usage error: missing required option " << e.get_name() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << error_name(e) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
