#include "config.hpp"

#include <fstream>

#include "srdetect/errors.hpp"

namespace srd::cli {

void RunConfig::validate_common() const {
    if (gamma && threshold)
        throw ConfigError("exactly one of gamma and threshold may be set");
    if (gamma && !(*gamma > 1.0)) throw ConfigError("gamma must exceed 1");
    if (threshold && !(*threshold > 0.0)) throw ConfigError("threshold must be positive");
    if (grid_n < 64) throw ConfigError("grid_n must be at least 64");
    if (runs < 1) throw ConfigError("runs must be positive");
    if (series_cap < 1000) throw ConfigError("series_cap must be at least 1000");
    if (mc_paths < 10000) throw ConfigError("mc_paths must be at least 10000");
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    if (procedure != "sr" && procedure != "sr-r" && procedure != "srp")
        throw ConfigError("procedure must be one of sr, sr-r, srp");
    for (double g : gammas)
        if (!(g > 1.0)) throw ConfigError("every gamma must exceed 1");
    if (nu < 0 || nu_far < 0) throw ConfigError("nu and nu_far must be nonnegative");
    if (x_max <= 0.0) throw ConfigError("x_max must be positive");
}

json RunConfig::to_json() const {
    json j;
    j["model"] = model;
    j["procedure"] = procedure;
    j["head_start"] = head_start;
    if (gamma) j["gamma"] = *gamma;
    if (threshold) j["threshold"] = *threshold;
    j["gammas"] = gammas;
    if (procedures_given) j["procedures"] = procedures;
    j["grid_n"] = grid_n;
    j["runs"] = runs;
    if (seed) j["seed"] = *seed;
    j["step_cap"] = step_cap;
    j["parallel_width"] = parallel_width;
    j["series_cap"] = series_cap;
    j["mc_paths"] = mc_paths;
    if (zeta) j["zeta"] = *zeta;
    if (varkappa) j["varkappa"] = *varkappa;
    j["x_max"] = x_max;
    j["estimators"] = estimators;
    j["nu"] = nu;
    j["nu_far"] = nu_far;
    j["out"] = out_dir;
    j["format"] = format;
    return j;
}

void RunConfig::apply_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "model")
                model = value.get<std::string>();
            else if (key == "procedure")
                procedure = value.get<std::string>();
            else if (key == "head_start")
                head_start = value.get<std::string>();
            else if (key == "gamma")
                gamma = value.get<double>();
            else if (key == "threshold")
                threshold = value.get<double>();
            else if (key == "gammas")
                gammas = value.get<std::vector<double>>();
            else if (key == "procedures") {
                procedures = value.get<std::vector<std::string>>();
                procedures_given = true;
            } else if (key == "grid_n")
                grid_n = value.get<int>();
            else if (key == "runs")
                runs = value.get<long long>();
            else if (key == "seed")
                seed = value.get<std::uint64_t>();
            else if (key == "step_cap")
                step_cap = value.get<long long>();
            else if (key == "parallel_width")
                parallel_width = value.get<int>();
            else if (key == "series_cap")
                series_cap = value.get<int>();
            else if (key == "mc_paths")
                mc_paths = value.get<long long>();
            else if (key == "zeta")
                zeta = value.get<double>();
            else if (key == "varkappa")
                varkappa = value.get<double>();
            else if (key == "x_max")
                x_max = value.get<double>();
            else if (key == "estimators")
                estimators = value.get<std::vector<std::string>>();
            else if (key == "nu")
                nu = value.get<long long>();
            else if (key == "nu_far")
                nu_far = value.get<long long>();
            else if (key == "out")
                out_dir = value.get<std::string>();
            else if (key == "format")
                format = value.get<std::string>();
            else
                throw ConfigError("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    RunConfig cfg;
    cfg.apply_json(j);
    return cfg;
}

} // namespace srd::cli
