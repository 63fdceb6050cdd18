#include "vgp/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vgp/errors.hpp"
#include "vgp/io.hpp"

namespace vgp {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(where + ": missing key '" + key + "'");
    }
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj[key].get<double>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(where + ": missing key '" + key + "'");
    }
    if (!obj[key].is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return obj[key].get<std::string>();
}

KernelSpec parse_tabulated(const json& params, const GridConfig& gc);

KernelSpec parse_kernel_impl(const json& j, const std::string& where) {
    require_keys(j, where, {"family", "params"});
    const std::string family = get_string(j, where, "family");
    const json params = j.contains("params") ? j["params"] : json::object();
    const std::string pw = where + ".params";

    try {
        if (family == "wiener") {
            require_keys(params, pw, {});
            return KernelSpec::wiener();
        }
        if (family == "bridge") {
            require_keys(params, pw, {});
            return KernelSpec::brownian_bridge();
        }
        if (family == "ou") {
            require_keys(params, pw, {"rate"});
            return KernelSpec::ornstein_uhlenbeck(get_number(params, pw, "rate", 1.0));
        }
        if (family == "fbm") {
            require_keys(params, pw, {"hurst", "scale"});
            const double hurst = get_number(params, pw, "hurst");
            if (params.contains("scale"))
                return KernelSpec::fractional_bm(hurst, get_number(params, pw, "scale"));
            return KernelSpec::fractional_bm_calibrated(hurst);
        }
        if (family == "perturbed") {
            require_keys(params, pw, {"base", "amplitude", "bump"});
            if (!params.contains("base")) throw ConfigError(pw + ": missing key 'base'");
            KernelSpec base = parse_kernel_impl(params["base"], pw + ".base");
            const double amp = get_number(params, pw, "amplitude");
            const int bump = static_cast<int>(get_number(params, pw, "bump", 0.0));
            return KernelSpec::perturbed(std::move(base), amp, bump);
        }
        if (family == "tabulated")
            throw ConfigError(pw + ": tabulated kernels are parsed with a grid context");
    } catch (const std::invalid_argument& e) {
        throw ValidationError(where + ": " + e.what());
    }
    throw ConfigError(where + ": unknown kernel family '" + family + "'");
}

KernelSpec parse_tabulated(const json& params, const GridConfig& gc) {
    require_keys(params, "kernel.params", {"csv", "stationary"});
    const std::string path = get_string(params, "kernel.params", "csv");
    bool stationary = false;
    if (params.contains("stationary")) {
        if (!params["stationary"].is_boolean())
            throw ConfigError("kernel.params.stationary: expected a boolean");
        stationary = params["stationary"].get<bool>();
    }

    TimeGrid::Ptr grid;
    if (gc.scheme == GridConfig::Scheme::Uniform) grid = TimeGrid::uniform(gc.points);
    else grid = TimeGrid::geometric(gc.q, gc.n_min, gc.n_max);

    std::ifstream in(path);
    if (!in) throw ValidationError("tabulated kernel: cannot open " + path);
    const std::size_t m = grid->size();
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(m, m);
    std::string line;
    std::getline(in, line); // header t,s,value
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(ss, cell, ','))
                throw ValidationError("tabulated kernel: bad row at line " +
                                      std::to_string(lineno));
            vals[c] = std::stod(cell);
        }
        const std::size_t i = grid->nearest_index(vals[0]);
        const std::size_t j = grid->nearest_index(vals[1]);
        if (std::abs(grid->node(i) - vals[0]) > 1e-12 ||
            std::abs(grid->node(j) - vals[1]) > 1e-12)
            throw ValidationError("tabulated kernel: (t,s) off the grid at line " +
                                  std::to_string(lineno));
        values(i, j) = vals[2];
    }
    return KernelSpec::tabulated(std::move(grid), std::move(values), stationary);
}

} // namespace

KernelSpec parse_kernel(const nlohmann::json& j) { return parse_kernel_impl(j, "kernel"); }

TimeGrid::Ptr RunConfig::make_grid() const {
    if (grid.scheme == GridConfig::Scheme::Uniform) return TimeGrid::uniform(grid.points);
    return TimeGrid::geometric(grid.q, grid.n_min, grid.n_max);
}

RunConfig parse_config_json(const nlohmann::json& j) {
    require_keys(j, "config", {"command", "kernel", "grid", "seed", "output", "params"});

    RunConfig cfg;
    cfg.command = get_string(j, "config", "command");
    static const std::set<std::string> commands = {"validate", "cov",       "simulate",
                                                    "lil",      "localtime", "silt",
                                                    "fw",       "diagnose"};
    if (!commands.count(cfg.command))
        throw ConfigError("config.command: unknown command '" + cfg.command + "'");

    if (j.contains("grid")) {
        const json& g = j["grid"];
        require_keys(g, "grid", {"scheme", "points", "q", "n_min", "n_max"});
        const std::string scheme = get_string(g, "grid", "scheme", "uniform");
        if (scheme == "uniform") {
            cfg.grid.scheme = GridConfig::Scheme::Uniform;
            const double pts = get_number(g, "grid", "points", 256);
            if (!(pts >= 1 && pts <= 1e7))
                throw ValidationError("grid.points must be in [1, 1e7]");
            cfg.grid.points = static_cast<std::size_t>(pts);
        } else if (scheme == "geometric") {
            cfg.grid.scheme = GridConfig::Scheme::Geometric;
            cfg.grid.q = get_number(g, "grid", "q", 0.5);
            cfg.grid.n_min = static_cast<int>(get_number(g, "grid", "n_min", 3));
            cfg.grid.n_max = static_cast<int>(get_number(g, "grid", "n_max", 30));
            if (!(cfg.grid.q > 0.0 && cfg.grid.q < 1.0))
                throw ValidationError("grid.q must be in (0,1)");
            if (cfg.grid.n_min < 1 || cfg.grid.n_min > cfg.grid.n_max)
                throw ValidationError("grid.n_min/n_max out of range");
        } else {
            throw ConfigError("grid.scheme: expected 'uniform' or 'geometric'");
        }
    }

    if (j.contains("seed")) {
        const json& s = j["seed"];
        require_keys(s, "seed", {"master", "stream"});
        cfg.seed.master = static_cast<std::uint64_t>(get_number(s, "seed", "master", 0));
        cfg.seed.stream = static_cast<std::uint64_t>(get_number(s, "seed", "stream", 0));
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        require_keys(o, "output", {"dir", "format"});
        cfg.output.dir = get_string(o, "output", "dir", "out");
        cfg.output.format = get_string(o, "output", "format", "csv");
        if (cfg.output.format != "csv" && cfg.output.format != "binary")
            throw ConfigError("output.format: expected 'csv' or 'binary'");
    }

    if (!j.contains("kernel")) throw ConfigError("config: missing key 'kernel'");
    const json& k = j["kernel"];
    require_keys(k, "kernel", {"family", "params"});
    if (get_string(k, "kernel", "family") == "tabulated") {
        cfg.kernel = parse_tabulated(k.contains("params") ? k["params"] : json::object(),
                                     cfg.grid);
    } else {
        cfg.kernel = parse_kernel_impl(k, "kernel");
    }

    cfg.params = j.contains("params") ? j["params"] : json::object();
    if (!cfg.params.is_object()) throw ConfigError("config.params: expected an object");

    static const std::map<std::string, std::set<std::string>> allowed_params = {
        {"validate", {}},
        {"cov", {}},
        {"simulate", {"n_paths", "sampler"}},
        {"lil", {"n_paths", "epsilons"}},
        {"localtime", {"eps", "y", "n_paths"}},
        {"silt", {"k", "epsilons", "n_paths", "mode", "samples", "cutoff"}},
        {"fw", {"times", "eps", "n_paths", "h"}},
        {"diagnose", {"zeta", "trials"}},
    };
    require_keys(cfg.params, "params", allowed_params.at(cfg.command));

    cfg.echo = j;
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config_json(j);
}

} // namespace vgp
