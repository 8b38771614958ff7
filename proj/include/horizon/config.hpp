#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/constants.hpp"
#include "horizon/errors.hpp"
#include "horizon/medium.hpp"
#include "horizon/observables.hpp"

namespace horizon {

// Plain-text key-value configuration. Lines are `key = value`, `#` starts a
// comment, keys are case-sensitive. Unknown keys are rejected so typos fail
// loudly. All values are decimal SI unless the key name says otherwise.
//
// Recognised keys:
//   kappa1 kappa2 kappa3            elastic constants (dimensionless)
//   omega_res1 omega_res2 omega_res3  resonance angular frequencies (rad/s)
//   delta_n                         index step height
//   u_over_c                        front speed as a fraction of c
//   lambda_c_nm                     front central wavelength (resolves u via
//                                   the lab group velocity; overrides u_over_c)
//   reference_wavelength_nm         where delta_n is defined (default 800)
//   mu_mode                         linear | exact
//   omega_lo omega_hi omega_points  moving-frame grid (rad/s; 0 = auto)
//   lambda_lo_nm lambda_hi_nm lambda_points   lab grid
//   delta_n_list                    comma separated sweep values
//   u_over_c_list / lambda_c_nm_list  velocity sweep
//   tau_delta_over_2pi              detector time-bandwidth (default 1)
//   output_dir                      default from HORIZON_OUTPUT_DIR or "."
//   format                          csv | json
//   workers                         parallel worker count (0 = hardware)
struct RunConfig {
    MediumSpec right = fused_silica();
    double delta_n = 2e-6;
    std::optional<double> u_over_c;
    std::optional<double> lambda_c = 400e-9;
    double reference_wavelength = 800e-9;
    MuMode mu_mode = MuMode::linear;

    double omega_lo = 0.0, omega_hi = 0.0;  // 0 = derive from the intervals
    int omega_points = 400;
    double lambda_lo = 190e-9, lambda_hi = 5e-6;
    int lambda_points = 500;

    std::vector<double> delta_n_sweep;   // defaults to the decade ladder
    std::vector<double> velocity_sweep;  // u/c values
    std::vector<double> lambda_c_sweep;  // m

    double tau_delta_over_2pi = 1.0;
    std::string output_dir = ".";
    std::string format = "csv";
    unsigned workers = 0;

    double resolve_u() const {
        if (lambda_c) return velocity_from_center_wavelength(right, *lambda_c);
        if (u_over_c) return *u_over_c * speed_of_light;
        throw ConfigError("config: neither u_over_c nor lambda_c_nm given");
    }

    StepConfig make_step() const {
        return StepConfig(right, delta_n, resolve_u(), reference_wavelength, mu_mode);
    }

    StepConfig make_step(double dn, double u) const {
        return StepConfig(right, dn, u, reference_wavelength, mu_mode);
    }

    std::vector<double> delta_n_ladder() const {
        if (!delta_n_sweep.empty()) return delta_n_sweep;
        return {1e-6, 2e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size()) throw ConfigError("config: bad list entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

inline double parse_num(const std::string& key, const std::string& s) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("config: trailing junk after " + key);
    return v;
}

}  // namespace detail

inline void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_list;
    using detail::parse_num;
    auto num = [&] { return parse_num(key, value); };
    if (key == "kappa1" || key == "kappa2" || key == "kappa3" || key == "omega_res1" ||
        key == "omega_res2" || key == "omega_res3") {
        auto res = cfg.right.resonances();
        const int i = key.back() - '1';
        if (key[0] == 'k')
            res[static_cast<size_t>(i)].kappa = num();
        else
            res[static_cast<size_t>(i)].omega_res = num();
        cfg.right = MediumSpec(res[0], res[1], res[2]);
    } else if (key == "delta_n") {
        cfg.delta_n = num();
    } else if (key == "u_over_c") {
        cfg.u_over_c = num();
        cfg.lambda_c.reset();
    } else if (key == "lambda_c_nm") {
        cfg.lambda_c = num() * 1e-9;
        cfg.u_over_c.reset();
    } else if (key == "reference_wavelength_nm") {
        cfg.reference_wavelength = num() * 1e-9;
    } else if (key == "mu_mode") {
        if (value == "linear")
            cfg.mu_mode = MuMode::linear;
        else if (value == "exact")
            cfg.mu_mode = MuMode::exact;
        else
            throw ConfigError("config: mu_mode must be linear or exact");
    } else if (key == "omega_lo") {
        cfg.omega_lo = num();
    } else if (key == "omega_hi") {
        cfg.omega_hi = num();
    } else if (key == "omega_points") {
        cfg.omega_points = static_cast<int>(num());
    } else if (key == "lambda_lo_nm") {
        cfg.lambda_lo = num() * 1e-9;
    } else if (key == "lambda_hi_nm") {
        cfg.lambda_hi = num() * 1e-9;
    } else if (key == "lambda_points") {
        cfg.lambda_points = static_cast<int>(num());
    } else if (key == "delta_n_list") {
        cfg.delta_n_sweep = parse_list(value);
        if (cfg.delta_n_sweep.empty()) throw ConfigError("config: empty delta_n_list");
    } else if (key == "u_over_c_list") {
        cfg.velocity_sweep = parse_list(value);
        if (cfg.velocity_sweep.empty()) throw ConfigError("config: empty u_over_c_list");
    } else if (key == "lambda_c_nm_list") {
        cfg.lambda_c_sweep = parse_list(value);
        for (auto& v : cfg.lambda_c_sweep) v *= 1e-9;
        if (cfg.lambda_c_sweep.empty()) throw ConfigError("config: empty lambda_c_nm_list");
    } else if (key == "tau_delta_over_2pi") {
        cfg.tau_delta_over_2pi = num();
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "format") {
        if (value != "csv" && value != "json") throw ConfigError("config: format must be csv|json");
        cfg.format = value;
    } else if (key == "workers") {
        cfg.workers = static_cast<unsigned>(num());
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline RunConfig load_config(std::istream& in) {
    RunConfig cfg;
    if (const char* env = std::getenv("HORIZON_OUTPUT_DIR")) cfg.output_dir = env;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            apply_config_line(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
        }
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    return load_config(f);
}

// Canonical string of everything that affects numeric output, for the header
// hash.
inline std::string canonical_config(const RunConfig& cfg) {
    std::ostringstream ss;
    ss.precision(17);
    for (const auto& r : cfg.right.resonances()) ss << r.kappa << "," << r.omega_res << ";";
    ss << cfg.delta_n << ";";
    ss << (cfg.lambda_c ? *cfg.lambda_c : 0.0) << ";";
    ss << (cfg.u_over_c ? *cfg.u_over_c : 0.0) << ";";
    ss << cfg.reference_wavelength << ";" << (cfg.mu_mode == MuMode::linear ? "lin" : "exact")
       << ";";
    ss << cfg.omega_lo << "," << cfg.omega_hi << "," << cfg.omega_points << ";";
    ss << cfg.lambda_lo << "," << cfg.lambda_hi << "," << cfg.lambda_points << ";";
    for (double v : cfg.delta_n_sweep) ss << v << ",";
    for (double v : cfg.velocity_sweep) ss << v << ",";
    for (double v : cfg.lambda_c_sweep) ss << v << ",";
    ss << ";" << cfg.tau_delta_over_2pi;
    return ss.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace horizon
