#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgp/config.hpp"

namespace vgp {

struct ArtifactRecord {
    std::string name;   // file name inside the output directory
    std::string sha256;
};

/// Run record: config echo, seed, artifact hashes, tool version and warnings.
/// Replaying a manifest reproduces artifacts with identical hashes.
struct RunManifest {
    std::string tool_version;
    nlohmann::json config;
    std::uint64_t master_seed = 0;
    std::vector<ArtifactRecord> artifacts;
    std::vector<std::string> warnings;
    nlohmann::json summary; // command-specific scalar results
    double wall_ms = 0.0;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

struct RunOutcome {
    RunManifest manifest;
    std::string manifest_path;
    std::string out_dir;
};

/// Executes one configured command, writes artifacts plus manifest.json under
/// the output directory, and returns the manifest.
RunOutcome run(const RunConfig& cfg,
               const std::optional<std::string>& out_dir_override = std::nullopt,
               const std::optional<std::uint64_t>& seed_override = std::nullopt);

struct ReplayEntry {
    std::string name;
    std::string expected;
    std::string actual;
    bool match = false;
};

struct ReplayReport {
    bool all_match = false;
    std::vector<ReplayEntry> entries;
    std::string scratch_dir;
};

/// Re-executes the manifest's config into a scratch directory and compares
/// artifact hashes. Refuses manifests produced by a different tool version.
ReplayReport replay(const std::string& manifest_path);

} // namespace vgp
