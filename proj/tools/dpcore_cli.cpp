#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dpcore/experiment.hpp"
#include "dpcore/kernels.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dpcore: streaming continual test-time adaptation engine"};
    app.require_subcommand(1);

    bool serial = false;
    app.add_flag("--serial", serial, "run numeric kernels on the serial backend");

    std::string run_config, run_out = "out";
    std::optional<uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "execute one experiment config");
    run->add_option("--config", run_config, "experiment config JSON")->required();
    uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "override the config seed list");
    run->add_option("--out", run_out, "output directory");

    std::string sweep_config, sweep_grid, sweep_out = "out";
    auto* sweep = app.add_subcommand("sweep", "cross-product parameter sweep");
    sweep->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep->add_option("--grid", sweep_grid, "grid JSON: {\"grid\": {\"<path>\": [...]}}")
        ->required();
    sweep->add_option("--out", sweep_out, "output directory");

    auto* props = app.add_subcommand("props", "run the simplified-algorithm property suites");

    auto* streams = app.add_subcommand("streams", "stream utilities");
    streams->require_subcommand(1);
    std::string gen_spec, gen_out;
    auto* gen = streams->add_subcommand("gen", "generate a domain stream CSV");
    gen->add_option("--spec", gen_spec, "stream spec JSON")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    if (serial) dpcore::kernels::set_exec_mode(dpcore::kernels::ExecMode::Serial);

    if (*run) {
        if (seed_opt->count() > 0) run_seed = seed_value;
        return dpcore::cmd_run(run_config, run_seed, run_out);
    }
    if (*sweep) return dpcore::cmd_sweep(sweep_config, sweep_grid, sweep_out);
    if (*props) return dpcore::cmd_props();
    if (*gen) return dpcore::cmd_streams_gen(gen_spec, gen_out);
    return 0;
}
