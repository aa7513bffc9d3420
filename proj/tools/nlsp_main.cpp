// Command-line front end: dataset generation, model training, captured-energy
// sweeps, solver benchmarks, the scaling ablation and the built-in property
// suite. Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlsp/experiment.hpp"
#include "nlsp/pipeline.hpp"

namespace {

nlsp::ExperimentConfig resolve_config(const std::string& config_path,
                                      const std::vector<std::string>& overrides,
                                      const std::string& out_flag) {
    nlsp::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = nlsp::load_config_file(config_path);
    nlsp::apply_overrides(cfg, overrides);
    if (!out_flag.empty()) cfg.out_dir = out_flag;
    cfg.validate();
    return cfg;
}

void write_run_manifest(const nlsp::ExperimentConfig& cfg, const std::string& command) {
    std::filesystem::create_directories(cfg.out_dir);
    nlsp::Manifest m = cfg.to_manifest();
    m.set("command", command);
    m.save(cfg.out_dir + "/run_" + command + "_manifest.txt");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural left-singular-subspace coarse spaces for two-level PCG"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value config file")->capture_default_str();
    app.add_option("--set", overrides, "override a config key, key=value (repeatable)");
    app.add_option("--out", out_flag, "output directory (overrides config)");

    auto* gen = app.add_subcommand("gen", "generate a PDE instance corpus");
    auto* train = app.add_subcommand("train", "train checkpoint(s) on a generated corpus");
    auto* energy = app.add_subcommand("energy", "captured-energy sweep over truncation ranks");
    auto* bench = app.add_subcommand("bench", "solver benchmark across methods and ranks");
    auto* ablate = app.add_subcommand("ablate", "scaling sweep with K = N, r = K/2");
    auto* verify = app.add_subcommand("verify", "run the built-in property checks");
    for (auto* sub : {gen, train, energy, bench, ablate, verify}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            return nlsp::cmd_verify(std::cout) ? 0 : 2;
        }
        const auto cfg = resolve_config(config_path, overrides, out_flag);
        if (gen->parsed()) {
            write_run_manifest(cfg, "gen");
            nlsp::cmd_gen(cfg);
        } else if (train->parsed()) {
            write_run_manifest(cfg, "train");
            nlsp::cmd_train(cfg);
        } else if (energy->parsed()) {
            write_run_manifest(cfg, "energy");
            nlsp::cmd_energy(cfg);
        } else if (bench->parsed()) {
            write_run_manifest(cfg, "bench");
            nlsp::cmd_bench(cfg);
        } else if (ablate->parsed()) {
            write_run_manifest(cfg, "ablate");
            nlsp::cmd_ablate(cfg);
        }
    } catch (const nlsp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
