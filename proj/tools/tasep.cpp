// tasep: simulate | exact | compare | tables | diagram
//
// Every subcommand accepts --config FILE (flat key = value text), the common
// flags below, and --set key=value for any other key of that subcommand.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tasep/cli.hpp"

namespace {

struct Flags {
    std::string config;
    std::string seed, replicas, out, tol, workers;
    std::vector<std::string> set;
};

std::map<std::string, std::string> overrides(const Flags& f) {
    std::map<std::string, std::string> o;
    for (const auto& kv : f.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw tasep::cli::ConfigError("--set expects key=value, got '" + kv + "'");
        o[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    // dedicated flags win over --set
    auto put = [&](const char* k, const std::string& v) {
        if (!v.empty()) o[k] = v;
    };
    put("seed", f.seed);
    put("replicas", f.replicas);
    put("out", f.out);
    put("tol", f.tol);
    put("workers", f.workers);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TASEP with slow particles: simulation, exact kernels and limit laws"};
    app.set_version_flag("--version", tasep::cli::version);
    app.require_subcommand(1);

    std::map<std::string, Flags> flags;
    const std::map<std::string, std::string> help = {
        {"simulate", "Monte Carlo ensemble of particle positions"},
        {"exact", "exact P(x_n(t) >= a) over a threshold sweep"},
        {"compare", "Monte Carlo against exact or limit laws"},
        {"tables", "limit-law CDF tables with node-doubling check"},
        {"diagram", "regime of every (alpha, nu) grid cell"}};
    for (const auto& name : tasep::cli::commands()) {
        Flags& f = flags[name];
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", f.config, "flat key = value config file");
        sub->add_option("--seed", f.seed, "master seed (u64)");
        sub->add_option("--replicas", f.replicas, "Monte Carlo replicas");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--tol", f.tol, "tolerance of the subcommand's main check");
        sub->add_option("--workers", f.workers, "worker threads (results do not depend on it)");
        sub->add_option("--set", f.set, "key=value override, repeatable");
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& name : tasep::cli::commands()) {
        if (!app.got_subcommand(name)) continue;
        try {
            const auto cfg = tasep::cli::make_config(name, flags[name].config, overrides(flags[name]));
            return tasep::cli::execute(cfg, std::cout);
        } catch (const tasep::cli::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 3;
        }
    }
    return 2;
}
