// otesim.cpp — command-line front end
//
// Subcommands: steady, validate, scan, sample, evolve. Configuration comes
// from a JSON file; a few flags override file values. Worker count for
// scan/sample comes from --workers or the OTESIM_WORKERS variable.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "otesim/parallel.hpp"
#include "otesim/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    otesim::cli::Overrides overrides;
    int workers = 0;
    double z = 0, r = 0, t_w_k = 0, t_s_k = 0;
    int sample_n = 0;
    std::uint64_t seed = 0;
    std::string output;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "JSON run configuration")->required();
    cmd->add_option("--z-um", args.z, "override atom-slab distance z (um)");
    cmd->add_option("--r-um", args.r, "override interatomic distance r (um)");
    cmd->add_option("--t-w-kelvin", args.t_w_k, "override wall temperature (K)");
    cmd->add_option("--t-s-kelvin", args.t_s_k, "override slab temperature (K)");
    cmd->add_option("--seed", args.seed, "override sample seed");
    cmd->add_option("-n,--samples", args.sample_n, "override sample count");
    cmd->add_option("-o,--output", args.output, "override output path ('-' = stdout)");
    cmd->add_option("--workers", args.workers, "worker threads for scan/sample");
}

int load_and_run(const CommonArgs& args, CLI::App* cmd,
                 int (*fn)(const otesim::cli::RunConfig&, std::ostream&),
                 int (*fn_workers)(const otesim::cli::RunConfig&, std::ostream&, int)) {
    try {
        otesim::cli::RunConfig cfg = otesim::cli::load_config(args.config_path);
        otesim::cli::Overrides o;
        if (cmd->count("--z-um")) o.z_um = args.z;
        if (cmd->count("--r-um")) o.r_um = args.r;
        if (cmd->count("--t-w-kelvin")) o.t_w_kelvin = args.t_w_k;
        if (cmd->count("--t-s-kelvin")) o.t_s_kelvin = args.t_s_k;
        if (cmd->count("--seed")) o.seed = args.seed;
        if (cmd->count("-n")) o.sample_n = args.sample_n;
        if (cmd->count("-o")) o.output_path = args.output;
        otesim::cli::apply_overrides(cfg, o);
        if (fn) return fn(cfg, std::cerr);
        return fn_workers(cfg, std::cerr, args.workers);
    } catch (const otesim::ConfigError& e) {
        std::cerr << "{\"error\":\"config\",\"what\":\"" << e.what() << "\"}\n";
        return otesim::cli::exit_config_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"otesim — two-atom absorption thermal machine simulator"};
    app.require_subcommand(1);

    CommonArgs steady_args, validate_args, scan_args, sample_args, evolve_args;
    CLI::App* steady = app.add_subcommand("steady", "stationary state and flux report");
    CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
    CLI::App* scan = app.add_subcommand("scan", "phase diagram over (z, dT)");
    CLI::App* sample = app.add_subcommand("sample", "random-machine efficiency study");
    CLI::App* evolve = app.add_subcommand("evolve", "RK4 time evolution");
    add_common(steady, steady_args);
    add_common(validate, validate_args);
    add_common(scan, scan_args);
    add_common(sample, sample_args);
    add_common(evolve, evolve_args);

    CLI11_PARSE(app, argc, argv);

    if (steady->parsed()) return load_and_run(steady_args, steady, otesim::cli::run_steady, nullptr);
    if (validate->parsed())
        return load_and_run(validate_args, validate, otesim::cli::run_validate, nullptr);
    if (scan->parsed()) return load_and_run(scan_args, scan, nullptr, otesim::cli::run_scan);
    if (sample->parsed()) return load_and_run(sample_args, sample, nullptr, otesim::cli::run_sample);
    if (evolve->parsed()) return load_and_run(evolve_args, evolve, otesim::cli::run_evolve, nullptr);
    return otesim::cli::exit_config_error;
}
