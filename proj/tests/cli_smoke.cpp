// End-to-end exercises of the installed binary: argv[1] is the CLI path.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "vgp/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "[FAIL] " << what << "\n";
    } else {
        std::cout << "[ok] " << what << "\n";
    }
}

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_smoke <path-to-binary>\n";
        return 2;
    }
    const std::string bin = argv[1];
    const fs::path work = fs::temp_directory_path() / "vgp-cli-smoke";
    fs::remove_all(work);
    fs::create_directories(work);
    const auto at = [&](const std::string& n) { return (work / n).string(); };

    json cfg = {{"command", "cov"},
                {"kernel", {{"family", "wiener"}, {"params", json::object()}}},
                {"grid", {{"scheme", "uniform"}, {"points", 16}}},
                {"seed", {{"master", 3}, {"stream", 0}}},
                {"output", {{"dir", at("out")}, {"format", "csv"}}},
                {"params", json::object()}};
    vgp::write_text_file(at("cov.json"), cfg.dump(2));

    expect(run_cmd(bin + " run --config " + at("cov.json") + " > /dev/null") == 0,
           "cov run exits 0");
    expect(fs::exists(at("out") + "/cov.csv"), "cov artifact written");
    expect(fs::exists(at("out") + "/manifest.json"), "manifest written");

    // unknown key: parse failure, status 2
    json bad = cfg;
    bad["typo_key"] = true;
    vgp::write_text_file(at("bad.json"), bad.dump(2));
    expect(run_cmd(bin + " run --config " + at("bad.json") + " 2> /dev/null") == 2,
           "unknown config key exits 2");

    // stationarity gate: validation failure, status 3, pinned message
    json silt = cfg;
    silt["command"] = "silt";
    silt["kernel"] = {{"family", "bridge"}, {"params", json::object()}};
    silt["params"] = {{"k", 2}, {"epsilons", {0.1}}, {"n_paths", 16}};
    silt["output"]["dir"] = at("silt-out");
    vgp::write_text_file(at("silt.json"), silt.dump(2));
    expect(run_cmd(bin + " run --config " + at("silt.json") + " 2> " + at("err.txt")) == 3,
           "non-stationary silt exits 3");
    expect(vgp::read_text_file(at("err.txt")).find("silt requires stationary kernel") !=
               std::string::npos,
           "stationarity message printed");

    // determinism: identical localtime runs share artifact hashes
    json lt = cfg;
    lt["command"] = "localtime";
    lt["params"] = {{"eps", 0.04}, {"y", 0.0}, {"n_paths", 100}};
    lt["seed"]["master"] = 7;
    lt["output"]["dir"] = at("lt1");
    vgp::write_text_file(at("lt1.json"), lt.dump(2));
    lt["output"]["dir"] = at("lt2");
    vgp::write_text_file(at("lt2.json"), lt.dump(2));
    expect(run_cmd(bin + " run --config " + at("lt1.json") + " > /dev/null") == 0,
           "localtime run 1 exits 0");
    expect(run_cmd(bin + " run --config " + at("lt2.json") + " > /dev/null") == 0,
           "localtime run 2 exits 0");
    const json m1 = json::parse(vgp::read_text_file(at("lt1") + "/manifest.json"));
    const json m2 = json::parse(vgp::read_text_file(at("lt2") + "/manifest.json"));
    expect(m1["artifacts"] == m2["artifacts"], "identical seeds give identical hashes");

    // replay: pass on the untouched manifest, fail after editing the seed
    expect(run_cmd(bin + " replay --manifest " + at("lt1") + "/manifest.json > /dev/null") == 0,
           "replay of untouched manifest exits 0");
    json tampered = m1;
    tampered["master_seed"] = 1234;
    vgp::write_text_file(at("lt1") + "/manifest.json", tampered.dump(2));
    expect(run_cmd(bin + " replay --manifest " + at("lt1") + "/manifest.json > /dev/null") == 1,
           "replay of tampered manifest exits 1");

    fs::remove_all(work);
    if (failures) {
        std::cerr << failures << " failure(s)\n";
        return 1;
    }
    std::cout << "cli smoke: all checks passed\n";
    return 0;
}
