#ifndef SRDETECT_CLI_CONFIG_HPP
#define SRDETECT_CLI_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace srd::cli {

using json = nlohmann::ordered_json;

// Resolved run configuration. JSON config file first, command-line flags on
// top. Every output file embeds the resolved form, so a run can be replayed
// from any of its artifacts.
struct RunConfig {
    std::string model = "beta";
    std::string procedure = "sr";               // sr | sr-r | srp
    std::string head_start = "zero";            // zero | mu_A | equalizer | value:<r>
    std::optional<double> gamma;
    std::optional<double> threshold;
    std::vector<double> gammas{50, 100, 500, 1000, 10000};
    std::vector<std::string> procedures;        // oc command; empty means unset
    bool procedures_given = false;
    int grid_n = 2048;
    long long runs = 100000;
    std::optional<std::uint64_t> seed;
    long long step_cap = 0;
    int parallel_width = 0;
    int series_cap = 10000;
    long long mc_paths = 100000;
    std::optional<double> zeta;
    std::optional<double> varkappa;
    double x_max = 1e6;
    std::vector<std::string> estimators{"arl"};
    long long nu = 0;
    long long nu_far = 2000;
    std::string out_dir = "out";
    std::string format = "csv";                 // csv | json

    void validate_common() const;  // ranges; throws ConfigError
    json to_json() const;
    void apply_json(const json& j);             // merge keys present in j
};

RunConfig load_config(const std::string& path);  // throws ConfigError

} // namespace srd::cli

#endif
