#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vgp/errors.hpp"
#include "vgp/runner.hpp"
#include "vgp/version.hpp"

namespace {

// exit statuses: 0 ok, 1 replay mismatch, 2 parse error, 3 validation, 4 numeric
int dispatch(int argc, char** argv) {
    CLI::App app{"Volterra Gaussian process laboratory"};
    app.set_version_flag("--version", std::string(vgp::kToolVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* run_cmd = app.add_subcommand("run", "execute one configured experiment");
    run_cmd->add_option("--config", config_path, "path to the JSON run config")->required();
    run_cmd->add_option("--out-dir", out_dir, "override the output directory");
    run_cmd->add_option("--seed", seed, "override the master seed")
        ->each([&](const std::string&) { seed_set = true; });

    std::string manifest_path;
    CLI::App* replay_cmd = app.add_subcommand("replay", "re-run a manifest and compare hashes");
    replay_cmd->add_option("--manifest", manifest_path, "path to manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (run_cmd->parsed()) {
        const vgp::RunConfig cfg = vgp::parse_config_file(config_path);
        const auto outcome = vgp::run(
            cfg, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir),
            seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt);
        std::cout << "wrote " << outcome.manifest_path << " ("
                  << outcome.manifest.artifacts.size() << " artifacts, "
                  << outcome.manifest.wall_ms << " ms)\n";
        for (const auto& w : outcome.manifest.warnings) std::cout << "warning: " << w << "\n";
        return 0;
    }

    const vgp::ReplayReport rep = vgp::replay(manifest_path);
    for (const auto& e : rep.entries)
        std::cout << (e.match ? "match    " : "MISMATCH ") << e.name << "\n";
    std::cout << (rep.all_match ? "replay ok" : "replay failed") << "\n";
    return rep.all_match ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const vgp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vgp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const vgp::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
