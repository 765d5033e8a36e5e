#include <CLI11.hpp>
#include <iostream>

#include "msgfem/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"msgfem: multiscale spectral GFEM scenario runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false, workers_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config file");
        cmd->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
            out_set = true;
        });
        cmd->add_option("--workers", workers, "worker threads (0 = hardware)")
            ->each([&](const std::string&) { workers_set = true; });
        cmd->add_option("--seed", seed, "random seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };
    for (const char* name : {"solve", "nwidth", "study", "homog", "validate"})
        add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    msgfem::ScenarioConfig config;
    if (!config_path.empty()) {
        try {
            config = msgfem::load_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    config.kind = sub;
    if (workers_set) config.workers = workers;
    if (seed_set) config.seed = seed;
    if (out_set) config.out = out_dir;

    return msgfem::run_scenario(config, config.out, config.workers, config.seed);
}
