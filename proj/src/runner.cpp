#include "vgp/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "vgp/asymptotics.hpp"
#include "vgp/covariance.hpp"
#include "vgp/errors.hpp"
#include "vgp/io.hpp"
#include "vgp/localtime.hpp"
#include "vgp/sha256.hpp"
#include "vgp/silt.hpp"
#include "vgp/simulate.hpp"
#include "vgp/version.hpp"

namespace vgp {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json RunManifest::to_json() const {
    json j;
    j["tool_version"] = tool_version;
    j["config"] = config;
    j["master_seed"] = master_seed;
    json arts = json::array();
    for (const auto& a : artifacts) arts.push_back({{"name", a.name}, {"sha256", a.sha256}});
    j["artifacts"] = arts;
    j["warnings"] = warnings;
    j["summary"] = summary;
    j["wall_ms"] = wall_ms;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& a : j.at("artifacts"))
        m.artifacts.push_back({a.at("name").get<std::string>(),
                               a.at("sha256").get<std::string>()});
    if (j.contains("warnings"))
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("summary")) m.summary = j.at("summary");
    if (j.contains("wall_ms")) m.wall_ms = j.at("wall_ms").get<double>();
    return m;
}

namespace {

double get_param(const json& params, const std::string& key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_number()) throw ConfigError("params." + key + ": expected a number");
    return params[key].get<double>();
}

std::vector<double> get_param_list(const json& params, const std::string& key,
                                   std::vector<double> fallback) {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_array()) throw ConfigError("params." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& v : params[key]) {
        if (!v.is_number()) throw ConfigError("params." + key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

void write_ensemble(const PathEnsemble& ens, const std::string& dir,
                    const std::string& stem, const std::string& format,
                    std::vector<std::string>& names) {
    if (format == "binary") {
        write_binary_matrix(dir + "/" + stem + "_paths.bin", ens.paths);
        names.push_back(stem + "_paths.bin");
        if (ens.has_noise) {
            write_binary_matrix(dir + "/" + stem + "_noise.bin", ens.noise);
            names.push_back(stem + "_noise.bin");
        }
        return;
    }
    {
        std::vector<std::string> header(ens.grid->size());
        for (std::size_t i = 0; i < header.size(); ++i)
            header[i] = CsvWriter::format_double(ens.grid->node(i));
        write_matrix_csv(dir + "/" + stem + "_paths.csv", ens.paths, header);
        names.push_back(stem + "_paths.csv");
    }
    if (ens.has_noise) {
        std::vector<std::string> header(ens.grid->cells());
        for (std::size_t i = 0; i < header.size(); ++i)
            header[i] = CsvWriter::format_double(ens.grid->node(i));
        write_matrix_csv(dir + "/" + stem + "_noise.csv", ens.noise, header);
        names.push_back(stem + "_noise.csv");
    }
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

} // namespace

RunOutcome run(const RunConfig& cfg_in,
               const std::optional<std::string>& out_dir_override,
               const std::optional<std::uint64_t>& seed_override) {
    const auto t0 = std::chrono::steady_clock::now();

    RunConfig cfg = cfg_in;
    if (seed_override) {
        cfg.seed.master = *seed_override;
        cfg.echo["seed"]["master"] = *seed_override;
    }
    const std::string dir = out_dir_override.value_or(cfg.output.dir);
    fs::create_directories(dir);

    RunManifest man;
    man.tool_version = kToolVersion;
    man.config = cfg.echo;
    man.master_seed = cfg.seed.master;

    const KernelSpec& kernel = *cfg.kernel;
    const TimeGrid::Ptr grid = cfg.make_grid();
    std::vector<std::string> artifact_names;

    if (cfg.command == "validate") {
        const ValidationReport rep = validate_kernel(kernel, grid);
        CsvWriter csv(dir + "/validation.csv", {"metric", "value"});
        csv.row({"volterra_ok", rep.volterra_ok ? "1" : "0"});
        csv.row({"sup_l2", CsvWriter::format_double(rep.sup_l2)});
        csv.row({"kernel_at_origin", CsvWriter::format_double(rep.kernel_at_origin)});
        csv.row({"lipschitz_l", CsvWriter::format_double(rep.lipschitz_l)});
        artifact_names.push_back("validation.csv");
        man.warnings.insert(man.warnings.end(), rep.warnings.begin(), rep.warnings.end());
        man.summary = {{"volterra_ok", rep.volterra_ok},
                       {"sup_l2", rep.sup_l2},
                       {"kernel_at_origin", rep.kernel_at_origin},
                       {"lipschitz_l", rep.lipschitz_l}};
    } else if (cfg.command == "cov") {
        const CovarianceMatrix cov = cov_matrix(kernel, grid);
        cov.write_csv(dir + "/cov.csv");
        artifact_names.push_back("cov.csv");
        man.summary = {{"grid_points", grid->size()}};
    } else if (cfg.command == "simulate") {
        const auto n = static_cast<std::size_t>(get_param(cfg.params, "n_paths", 1000));
        if (n < 1) throw ValidationError("simulate: n_paths must be >= 1");
        std::string sampler = "volterra";
        if (cfg.params.contains("sampler")) sampler = cfg.params["sampler"].get<std::string>();
        PathEnsemble ens;
        if (sampler == "volterra") {
            ens = sample_volterra(kernel, grid, n, cfg.seed);
        } else if (sampler == "exact") {
            ens = sample_exact(cov_matrix(kernel, grid), n, cfg.seed);
        } else {
            throw ValidationError("simulate: sampler must be 'volterra' or 'exact'");
        }
        write_ensemble(ens, dir, "ensemble", cfg.output.format, artifact_names);
        std::string grid_bytes;
        for (double t : grid->nodes()) grid_bytes += CsvWriter::format_double(t) + "\n";
        man.summary = {{"sampler", sampler},
                       {"kernel", kernel.name()},
                       {"kernel_hash", Sha256::of_string(kernel.name())},
                       {"grid_hash", Sha256::of_string(grid_bytes)},
                       {"n_paths", n},
                       {"grid_points", grid->size()},
                       {"seed", {{"master", cfg.seed.master}, {"stream", cfg.seed.stream}}}};
    } else if (cfg.command == "lil") {
        if (cfg.grid.scheme != GridConfig::Scheme::Geometric)
            throw ValidationError("lil requires a geometric grid");
        LilConfig lc;
        lc.q = cfg.grid.q;
        lc.n_min = cfg.grid.n_min;
        lc.n_max = cfg.grid.n_max;
        lc.n_paths = static_cast<std::size_t>(get_param(cfg.params, "n_paths", 2000));
        lc.seed = cfg.seed;
        lc.epsilons = get_param_list(cfg.params, "epsilons", {0.5});
        const LilResult res = lil_ratios(kernel, lc);

        std::vector<std::string> header = {"n", "t", "h"};
        for (double e : lc.epsilons)
            header.push_back("exceed_freq_eps_" + CsvWriter::format_double(e));
        CsvWriter scales(dir + "/lil_scales.csv", header);
        for (std::size_t i = 0; i < res.ns.size(); ++i) {
            std::vector<std::string> row = {std::to_string(res.ns[i]),
                                            CsvWriter::format_double(res.times[i]),
                                            CsvWriter::format_double(res.envelope[i])};
            for (std::size_t e = 0; e < lc.epsilons.size(); ++e)
                row.push_back(CsvWriter::format_double(res.exceed_freq(e, i)));
            scales.row(row);
        }
        artifact_names.push_back("lil_scales.csv");

        CsvWriter paths(dir + "/lil_paths.csv", {"path_id", "max_ratio"});
        for (std::size_t p = 0; p < res.per_path_max_ratio.size(); ++p)
            paths.row({static_cast<double>(p), res.per_path_max_ratio[p]});
        artifact_names.push_back("lil_paths.csv");

        man.warnings.insert(man.warnings.end(), res.warnings.begin(), res.warnings.end());
        man.summary = {{"median_max_ratio", quantile(res.per_path_max_ratio, 0.5)},
                       {"q10", quantile(res.per_path_max_ratio, 0.10)},
                       {"q25", quantile(res.per_path_max_ratio, 0.25)},
                       {"q75", quantile(res.per_path_max_ratio, 0.75)},
                       {"q90", quantile(res.per_path_max_ratio, 0.90)}};
    } else if (cfg.command == "localtime") {
        const double eps = get_param(cfg.params, "eps", 0.01);
        const double y = get_param(cfg.params, "y", 0.0);
        const auto n = static_cast<std::size_t>(get_param(cfg.params, "n_paths", 10000));
        if (!(eps > 0.0)) throw ValidationError("localtime: eps must be > 0");
        const PathEnsemble ens = sample_volterra(kernel, grid, n, cfg.seed);
        const LocalTimeCurveStats st = local_time_curve_stats(ens, eps, y);
        CsvWriter csv(dir + "/localtime.csv", {"epsilon", "y", "t", "mean", "stderr"});
        for (std::size_t i = 0; i < st.mean.size(); ++i)
            csv.row({eps, y, grid->node(i), st.mean[i], st.std_err[i]});
        artifact_names.push_back("localtime.csv");

        // occupation identity spot check on a path subsample
        double worst = 0.0;
        const std::size_t check = std::min<std::size_t>(ens.n_paths(), 100);
        for (std::size_t p = 0; p < check; ++p) {
            std::vector<double> path(grid->size());
            for (std::size_t i = 0; i < path.size(); ++i) path[i] = ens.paths(p, i);
            worst = std::max(worst,
                             std::abs(occupation_mass(path, grid, eps, grid->size() - 1) - 1.0));
        }
        if (worst > 1e-8)
            man.warnings.push_back("occupation identity violated beyond 1e-8 on a sample path");
        man.summary = {{"expected_local_time", expected_local_time(kernel, 1.0, y, eps)},
                       {"mean_at_1", st.mean.back()},
                       {"stderr_at_1", st.std_err.back()},
                       {"max_occupation_error", worst}};
    } else if (cfg.command == "silt") {
        const int k = static_cast<int>(get_param(cfg.params, "k", 2));
        const auto n = static_cast<std::size_t>(get_param(cfg.params, "n_paths", 5000));
        const std::vector<double> epsilons =
            get_param_list(cfg.params, "epsilons", {0.1, 0.03, 0.01, 0.003});
        SimplexConfig sc;
        sc.k = k;
        sc.diagonal_cutoff = get_param(cfg.params, "cutoff", 0.0);
        sc.samples = static_cast<std::size_t>(get_param(cfg.params, "samples", 10000));
        sc.mc_seed = cfg.seed.derived(0xA11CE);
        std::string mode = k >= 3 ? "mc" : "nested";
        if (cfg.params.contains("mode")) mode = cfg.params["mode"].get<std::string>();
        if (mode == "nested") sc.mode = SimplexConfig::Mode::GridNested;
        else if (mode == "mc") sc.mode = SimplexConfig::Mode::MonteCarlo;
        else throw ValidationError("silt: mode must be 'nested' or 'mc'");

        const PlanarEnsemble ens = sample_planar(kernel, grid, n, cfg.seed);
        CsvWriter csv(dir + "/silt.csv",
                      {"epsilon", "k", "renormalized", "mean", "variance", "stderr",
                       "n_paths", "grid_M", "cutoff"});
        for (double eps : epsilons) {
            const SiltEstimate plain = silt_plain(ens, eps, sc);
            const SiltEstimate rosen = silt_rosen(ens, eps, sc);
            csv.row({eps, double(k), 0.0, plain.mean, plain.variance, plain.std_err,
                     double(n), double(grid->cells()), sc.diagonal_cutoff});
            csv.row({eps, double(k), 1.0, rosen.mean, rosen.variance, rosen.std_err,
                     double(n), double(grid->cells()), sc.diagonal_cutoff});
        }
        artifact_names.push_back("silt.csv");
        if (k == 2) {
            json oracle = json::object();
            for (double eps : epsilons)
                oracle[CsvWriter::format_double(eps)] = expected_silt2(kernel, eps);
            man.summary["expected_silt2"] = oracle;
        }
    } else if (cfg.command == "fw") {
        const double eps = get_param(cfg.params, "eps", 0.05);
        const auto n = static_cast<std::size_t>(get_param(cfg.params, "n_paths", 20000));
        const std::vector<double> times = get_param_list(cfg.params, "times", {0.3, 0.7});
        std::string hname = "indicator";
        if (cfg.params.contains("h")) hname = cfg.params["h"].get<std::string>();
        GridFunction h = hname == "zero" ? GridFunction::zero(grid)
                                         : GridFunction::one(grid);
        if (hname != "zero" && hname != "indicator")
            throw ValidationError("fw: h must be 'zero' or 'indicator'");

        const PlanarEnsemble ens = sample_planar(kernel, grid, n, cfg.seed);
        const FwTransformResult res = fw_transform_mc(ens, times, eps, h, h);
        CsvWriter csv(dir + "/fw.csv", {"k", "epsilon", "estimate", "stderr", "analytic"});
        csv.row({static_cast<double>(times.size()), eps, res.estimate, res.std_err,
                 res.analytic});
        artifact_names.push_back("fw.csv");
        man.summary = {{"weight_mean", res.weight_mean},
                       {"weight_std_err", res.weight_std_err}};
    } else if (cfg.command == "diagnose") {
        const double zeta = get_param(cfg.params, "zeta", 1.0);
        const auto trials = static_cast<std::size_t>(get_param(cfg.params, "trials", 10000));

        const ValidationReport rep = validate_kernel(kernel, grid);
        man.warnings.insert(man.warnings.end(), rep.warnings.begin(), rep.warnings.end());

        const LndReport lnd = lnd_diagnostics(kernel, grid, zeta);
        man.warnings.insert(man.warnings.end(), lnd.warnings.begin(), lnd.warnings.end());
        CsvWriter lndcsv(dir + "/lnd.csv",
                         {"window", "berman_ratio", "zeta_liminf", "strong_lnd_k3",
                          "strong_lnd_k4"});
        for (std::size_t i = 0; i < lnd.windows.size(); ++i)
            lndcsv.row({lnd.windows[i], lnd.berman_ratio[i], lnd.zeta_liminf[i],
                        lnd.strong_lnd_k3[i], lnd.strong_lnd_k4[i]});
        artifact_names.push_back("lnd.csv");

        const RudenkoResult rud = rudenko_integral(kernel, grid);
        const double chat = integrator_constant(kernel, grid, trials, cfg.seed);
        CsvWriter diag(dir + "/diagnostics.csv", {"metric", "value"});
        diag.row({"volterra_ok", rep.volterra_ok ? "1" : "0"});
        diag.row({"sup_l2", CsvWriter::format_double(rep.sup_l2)});
        diag.row({"kernel_at_origin", CsvWriter::format_double(rep.kernel_at_origin)});
        diag.row({"lipschitz_l", CsvWriter::format_double(rep.lipschitz_l)});
        diag.row({"rudenko_estimate", CsvWriter::format_double(rud.estimate)});
        diag.row({"rudenko_band_bound", CsvWriter::format_double(rud.band_bound)});
        diag.row({"rudenko_minorant_c", CsvWriter::format_double(rud.minorant_c)});
        diag.row({"integrator_constant", CsvWriter::format_double(chat)});
        artifact_names.push_back("diagnostics.csv");
        man.summary = {{"rudenko_estimate", rud.estimate},
                       {"rudenko_band_bound", rud.band_bound},
                       {"integrator_constant", chat}};
    } else {
        throw ConfigError("unknown command: " + cfg.command);
    }

    for (const auto& name : artifact_names)
        man.artifacts.push_back({name, Sha256::of_file(dir + "/" + name)});

    const auto t1 = std::chrono::steady_clock::now();
    man.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    RunOutcome outcome;
    outcome.manifest = man;
    outcome.out_dir = dir;
    outcome.manifest_path = dir + "/manifest.json";
    write_text_file(outcome.manifest_path, man.to_json().dump(2) + "\n");
    return outcome;
}

ReplayReport replay(const std::string& manifest_path) {
    json j;
    try {
        j = json::parse(read_text_file(manifest_path));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("replay: cannot parse manifest: ") + e.what());
    }
    const RunManifest man = RunManifest::from_json(j);
    if (man.tool_version != kToolVersion)
        throw ValidationError("replay: manifest was produced by tool version " +
                              man.tool_version + " but this binary is " + kToolVersion);

    const RunConfig cfg = parse_config_json(man.config);
    const fs::path scratch = fs::path(manifest_path).parent_path() / "replay-check";
    fs::remove_all(scratch);

    const RunOutcome redo = run(cfg, scratch.string(), man.master_seed);

    ReplayReport rep;
    rep.scratch_dir = scratch.string();
    rep.all_match = true;
    for (const auto& a : man.artifacts) {
        ReplayEntry e;
        e.name = a.name;
        e.expected = a.sha256;
        const auto it = std::find_if(redo.manifest.artifacts.begin(),
                                     redo.manifest.artifacts.end(),
                                     [&](const ArtifactRecord& r) { return r.name == a.name; });
        e.actual = it != redo.manifest.artifacts.end() ? it->sha256 : "<missing>";
        e.match = (e.actual == e.expected);
        rep.all_match = rep.all_match && e.match;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace vgp
