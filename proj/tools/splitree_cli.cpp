// splitree: generate split trees, estimate path-length statistics, solve the
// limit fixed-point equation, and evaluate the renewal-theoretic objects
// behind the mean asymptotics.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "splitree/acceptance.hpp"
#include "splitree/constants.hpp"
#include "splitree/experiments.hpp"
#include "splitree/io.hpp"
#include "splitree/parallel.hpp"
#include "splitree/renewal.hpp"
#include "splitree/version.hpp"

namespace fs = std::filesystem;
using namespace splitree;

namespace {

// exit codes: config=2, budget=3, assertion=4, io=5
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitAssertion = 4;
constexpr int kExitIo = 5;

std::string default_out() {
    if (const char* env = std::getenv("SPLITREE_OUT")) return env;
    return "splitree-out";
}

// resolved-config echo, written next to every command's outputs
void echo_config(const std::string& out_dir, const std::string& command,
                 std::initializer_list<std::pair<std::string, std::string>> kv) {
    std::string body = "{\n  \"command\": \"" + command + "\"";
    for (const auto& [k, v] : kv) body += ",\n  \"" + k + "\": " + v;
    body += "\n}\n";
    write_text_file((fs::path(out_dir) / (command + "_config.json")).string(), body);
}

std::string q(const std::string& s) { return "\"" + s + "\""; }

void cmd_models(std::ostream& out) {
    out << "available presets:\n";
    // instantiate representative models to print resolved parameters
    const std::vector<std::string> rows = {
        "bst", "trie:0.5,0.5", "lattice_example", "mary:3", "median_of:1", "quadtree:2",
        "dirichlet:1,1",
    };
    for (const auto& text : rows) {
        const auto m = parse_model(text);
        const auto& p = m.params;
        out << "  " << m.name << " b=" << p.b << " s0=" << p.s0 << " s1=" << p.s1
            << " s=" << p.s;
        if (m.name == "lattice_example") out << " d=ln2≈0.693147";
        else if (m.lattice_span > 0.0) out << " d=" << m.lattice_span;
        else out << " d=0";
        out << "\n";
    }
    out << "\nargument forms:\n";
    for (const auto& info : preset_catalogue())
        out << "  " << info.signature << "  -- " << info.summary << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"split-tree path length laboratory"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string model_text = "bst";
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = default_out();
    std::string format = "csv";
    std::string config_file;

    auto add_common = [&](CLI::App* sub, bool with_model = true) {
        if (with_model) sub->add_option("--model", model_text, "model preset, e.g. bst or trie:0.5,0.5");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
        sub->add_option("--out", out_dir, "output directory (env SPLITREE_OUT overrides default)");
        sub->add_option("--format", format, "output format (csv|json)")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    // models
    auto* sub_models = app.add_subcommand("models", "list model presets");

    // constants
    auto* sub_const = app.add_subcommand("constants", "limit constants mu, sigma^2, bE[V^2], zeta");
    add_common(sub_const);

    // simulate
    auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo path-length experiment");
    std::vector<std::int64_t> n_values;
    std::int64_t replicas = 1000;
    bool measure_upsilon = false, measure_nodes = false, measure_depth = false;
    sub_sim->add_option("--n", n_values, "tree sizes (ascending)");
    sub_sim->add_option("--replicas", replicas, "replicas per n");
    sub_sim->add_option("--config", config_file, "flat JSON config file (flags override)");
    sub_sim->add_flag("--upsilon", measure_upsilon, "also measure node path length");
    sub_sim->add_flag("--nodes", measure_nodes, "also measure node count");
    sub_sim->add_flag("--depth-last", measure_depth, "also sample the last item's depth");
    add_common(sub_sim);

    // fixpoint
    auto* sub_fix = app.add_subcommand("fixpoint", "contraction iteration for the limit law");
    std::size_t samples = 100000;
    double tol = 5e-3;
    int max_iter = 200;
    sub_fix->add_option("--samples", samples, "empirical sample size");
    sub_fix->add_option("--tol", tol, "W2 convergence tolerance");
    sub_fix->add_option("--max-iter", max_iter, "iteration cap");
    add_common(sub_fix);

    // renewal
    auto* sub_ren = app.add_subcommand("renewal", "renewal function, Vlem integral, overshoot");
    std::string mode = "table";
    double tmax = 12.0, grid = 0.02, vlem_x = 12.0, Bval = 1000.0, gamma = 0.05, eps = 0.2236;
    std::int64_t ren_replicas = 0;
    std::string method = "branching";
    std::int64_t over_n = 1000000;
    sub_ren->add_option("--mode", mode, "table | vlem | overshoot | top")
        ->check(CLI::IsMember({"table", "vlem", "overshoot", "top"}));
    sub_ren->add_option("--tmax", tmax, "grid upper end");
    sub_ren->add_option("--grid", grid, "grid step");
    sub_ren->add_option("--method", method, "branching | tilted")
        ->check(CLI::IsMember({"branching", "tilted"}));
    sub_ren->add_option("--replicas", ren_replicas, "replicas / walks (0 = sensible default)");
    sub_ren->add_option("--x", vlem_x, "vlem integral upper limit");
    sub_ren->add_option("--n", over_n, "item count (overshoot/top)");
    sub_ren->add_option("--B", Bval, "fringe threshold B (overshoot/top)");
    sub_ren->add_option("--gamma", gamma, "overshoot class width");
    sub_ren->add_option("--eps", eps, "overshoot epsilon (classes down to eps^2)");
    add_common(sub_ren);

    // verify
    auto* sub_verify = app.add_subcommand("verify", "run the acceptance suite");
    bool quick = false;
    sub_verify->add_flag("--quick", quick, "reduced-budget suite (minutes)");
    add_common(sub_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        set_worker_threads(threads);

        if (sub_models->parsed()) {
            cmd_models(std::cout);
            return 0;
        }

        if (sub_const->parsed()) {
            const auto model = parse_model(model_text);
            const auto rep = constants_report(model);
            echo_config(out_dir, "constants",
                        {{"model", q(model.spec_text)}, {"seed", std::to_string(seed)},
                         {"threads", std::to_string(threads)}, {"format", q(format)}});
            if (format == "json") std::cout << constants_to_json(model, rep);
            else std::cout << "model " << model.name << "\n"
                      << "  mu                 " << rep.mu << "\n"
                      << "  sigma2             " << rep.sigma2 << "\n"
                      << "  bE[V^2]            " << rep.contraction_factor << "\n"
                      << "  E[C]               " << rep.mean_C << "\n"
                      << "  E[C^2]             " << rep.second_moment_C << "\n"
                      << "  zeta               " << rep.zeta << "\n"
                      << "  method             " << to_string(rep.method) << "\n"
                      << "  error bound        " << rep.error_bound << "\n";
            write_text_file((fs::path(out_dir) / ("constants_" + model.id() + ".json")).string(),
                            constants_to_json(model, rep));
            return 0;
        }

        if (sub_sim->parsed()) {
            ExperimentConfig cfg;
            cfg.output_dir = out_dir;
            if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
            // flags override config-file values
            if (sub_sim->count("--model")) cfg.model = model_text;
            else if (config_file.empty()) cfg.model = model_text;
            if (sub_sim->count("--n") || cfg.n_values.empty()) cfg.n_values = n_values;
            if (sub_sim->count("--replicas") || cfg.replicas <= 0) cfg.replicas = replicas;
            if (sub_sim->count("--seed") || cfg.master_seed == 0) cfg.master_seed = seed;
            if (sub_sim->count("--threads")) cfg.threads = threads;
            if (sub_sim->count("--out")) cfg.output_dir = out_dir;
            cfg.measures.upsilon = measure_upsilon;
            cfg.measures.node_count = measure_nodes;
            cfg.measures.depth_last = measure_depth;
            const auto result = run(cfg);
            std::cout << experiment_to_json(result);
            std::cout << "wrote " << cfg.output_dir << "/result.json\n";
            return 0;
        }

        if (sub_fix->parsed()) {
            const auto model = parse_model(model_text);
            echo_config(out_dir, "fixpoint",
                        {{"model", q(model.spec_text)}, {"samples", std::to_string(samples)},
                         {"tol", std::to_string(tol)}, {"max_iter", std::to_string(max_iter)},
                         {"seed", std::to_string(seed)}, {"threads", std::to_string(threads)}});
            const auto run_ = iterate_to_fixpoint(model, samples, tol, max_iter, seed);
            std::cout << fixpoint_to_json(run_);
            write_text_file((fs::path(out_dir) / ("fixpoint_" + model.id() + ".json")).string(),
                            fixpoint_to_json(run_));
            write_csv_column(
                (fs::path(out_dir) / ("fixpoint_" + model.id() + "_samples.csv")).string(), "x",
                run_.final_distribution.samples());
            if (!run_.converged) {
                std::cerr << "did not converge within " << max_iter
                          << " iterations; last step " << run_.step_sizes.back() << "\n";
                return kExitAssertion;
            }
            return 0;
        }

        if (sub_ren->parsed()) {
            const auto model = parse_model(model_text);
            echo_config(out_dir, "renewal",
                        {{"model", q(model.spec_text)}, {"mode", q(mode)},
                         {"method", q(method)}, {"tmax", std::to_string(tmax)},
                         {"grid", std::to_string(grid)},
                         {"replicas", std::to_string(ren_replicas)},
                         {"seed", std::to_string(seed)}});
            if (mode == "overshoot") {
                const auto h = overshoot_classes(model, over_n, Bval, gamma, eps,
                                                 ren_replicas > 0 ? ren_replicas : 200, seed);
                const auto path = fs::path(out_dir) / ("overshoot_" + model.id() + ".csv");
                write_overshoot_csv(path.string(), h);
                std::cout << "total mass " << h.total_mass << " (se " << h.se_total
                          << "), classes " << h.alpha.size() << "\nwrote " << path.string()
                          << "\n";
                return 0;
            }
            if (mode == "top") {
                const auto [est, se] = top_contribution(model, over_n, Bval,
                                                        ren_replicas > 0 ? ren_replicas : 200,
                                                        seed);
                std::cout << "top contribution E[sum n_v 1{nL_v>=B}] = " << est << " (se " << se
                          << "), /n = " << est / static_cast<double>(over_n) << "\n";
                return 0;
            }
            const auto m = method == "branching" ? RenewalMethod::branching_enumeration
                                                 : RenewalMethod::tilted_walk_mc;
            const std::int64_t reps =
                ren_replicas > 0 ? ren_replicas
                                 : (m == RenewalMethod::branching_enumeration ? 12 : 50000);
            const auto table = renewal_U(model, tmax, grid, m, seed, reps);
            if (mode == "vlem") {
                const double v = vlem_integral(model, vlem_x, table);
                std::cout << "vlem integral over [0," << vlem_x << "] = " << v << "\n";
                return 0;
            }
            const auto path = fs::path(out_dir) / ("renewal_" + model.id() + ".csv");
            write_renewal_csv(path.string(), table);
            std::cout << "Uhat(tmax) = " << table.Uhat.back() << " (se "
                      << table.se_Uhat.back() << ")\nwrote " << path.string() << "\n";
            return 0;
        }

        if (sub_verify->parsed()) {
            acceptance::Config cfg;
            cfg.quick = quick;
            if (sub_verify->count("--seed")) cfg.seed = seed;
            cfg.threads = threads;
            const auto results = acceptance::run_all(cfg, std::cout);
            const bool ok = acceptance::print_table(results, std::cout);
            return ok ? 0 : kExitAssertion;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
