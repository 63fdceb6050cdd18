#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"

namespace vgp {

struct GridConfig {
    enum class Scheme { Uniform, Geometric } scheme = Scheme::Uniform;
    std::size_t points = 256; // uniform cells
    double q = 0.5;           // geometric
    int n_min = 3;
    int n_max = 30;
};

struct OutputConfig {
    std::string dir = "out";
    std::string format = "csv"; // csv | binary
};

/// One experiment: command, kernel, grid, seed, output sink and the
/// command-specific parameter block. Parsing is strict: any unknown key at
/// any level raises vgp::ConfigError before computation starts.
struct RunConfig {
    std::string command;
    std::optional<KernelSpec> kernel;
    GridConfig grid;
    Seed seed;
    OutputConfig output;
    nlohmann::json params; // validated per command
    nlohmann::json echo;   // normalized config for manifests

    TimeGrid::Ptr make_grid() const;
};

RunConfig parse_config_json(const nlohmann::json& j);
RunConfig parse_config_file(const std::string& path);

/// Kernel subtree parser (also used to rebuild kernels from manifests).
KernelSpec parse_kernel(const nlohmann::json& j);

} // namespace vgp
