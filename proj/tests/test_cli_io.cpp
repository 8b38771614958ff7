#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "horizon/config.hpp"
#include "horizon/output.hpp"

using namespace horizon;

TEST_CASE("config file parsing round trip", "[config]") {
    std::istringstream in(R"(
# medium overrides
kappa1 = 0.07
omega_res1 = 1.9e14   # IR resonance
delta_n = 1e-4
lambda_c_nm = 800
reference_wavelength_nm = 1000
mu_mode = exact
omega_points = 123
delta_n_list = 1e-6, 1e-4, 1e-2
workers = 3
format = json
output_dir = /tmp/somewhere
)");
    const auto cfg = load_config(in);
    CHECK(cfg.right.kappa(0) == 0.07);
    CHECK(cfg.right.omega_res(0) == 1.9e14);
    CHECK(cfg.delta_n == 1e-4);
    REQUIRE(cfg.lambda_c.has_value());
    CHECK(*cfg.lambda_c == 800.0 * 1e-9);
    CHECK_FALSE(cfg.u_over_c.has_value());
    CHECK(cfg.reference_wavelength == 1000.0 * 1e-9);
    CHECK(cfg.mu_mode == MuMode::exact);
    CHECK(cfg.omega_points == 123);
    CHECK(cfg.delta_n_sweep == std::vector<double>{1e-6, 1e-4, 1e-2});
    CHECK(cfg.workers == 3);
    CHECK(cfg.format == "json");
    CHECK(cfg.output_dir == "/tmp/somewhere");
}

TEST_CASE("config errors are loud", "[config]") {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return load_config(in);
    };
    CHECK_THROWS_AS(parse("unknown_key = 1"), ConfigError);
    CHECK_THROWS_AS(parse("delta_n 1e-4"), ConfigError);
    CHECK_THROWS_AS(parse("delta_n = abc"), ConfigError);
    CHECK_THROWS_AS(parse("delta_n_list = "), ConfigError);
    CHECK_THROWS_AS(parse("u_over_c_list ="), ConfigError);
    CHECK_THROWS_AS(parse("mu_mode = fancy"), ConfigError);
    CHECK_THROWS_AS(parse("format = xml"), ConfigError);
    CHECK_THROWS_AS(parse("kappa2 = -1"), ConfigError);
}

TEST_CASE("velocity resolution prefers the central wavelength", "[config]") {
    RunConfig cfg;
    cfg.lambda_c = 400e-9;
    const double u = cfg.resolve_u();
    CHECK(u == Catch::Approx(speed_of_light /
                             fused_silica().group_index(angular_from_wavelength(400e-9))));
    cfg.lambda_c.reset();
    cfg.u_over_c = 0.66;
    CHECK(cfg.resolve_u() == Catch::Approx(0.66 * speed_of_light));
    cfg.u_over_c.reset();
    CHECK_THROWS_AS(cfg.resolve_u(), ConfigError);
}

TEST_CASE("output directory honours the environment default", "[config]") {
    setenv("HORIZON_OUTPUT_DIR", "/tmp/hz_env_test", 1);
    std::istringstream in("delta_n = 1e-6\n");
    const auto cfg = load_config(in);
    CHECK(cfg.output_dir == "/tmp/hz_env_test");
    unsetenv("HORIZON_OUTPUT_DIR");
}

TEST_CASE("config hash is stable and sensitive", "[config]") {
    RunConfig a, b;
    CHECK(fnv1a(canonical_config(a)) == fnv1a(canonical_config(b)));
    b.delta_n = 3e-6;
    CHECK(fnv1a(canonical_config(a)) != fnv1a(canonical_config(b)));
}

TEST_CASE("numeric formatting is deterministic", "[output]") {
    CHECK(fmt_num(1.0) == "1");
    CHECK(fmt_num(0.5) == "0.5");
    CHECK(fmt_num(1.23456789012e-7) == fmt_num(1.23456789012e-7));
    CHECK(fmt_num(2.0 / 3.0) == "0.666666666667");
}

TEST_CASE("csv writer emits metadata header and rows byte-identically", "[output]") {
    const auto path1 = std::filesystem::temp_directory_path() / "hz_csv_a.csv";
    const auto path2 = std::filesystem::temp_directory_path() / "hz_csv_b.csv";
    RunConfig cfg;
    for (const auto& p : {path1, path2}) {
        CsvWriter w(p.string(), cfg, "test units");
        w.header({"a", "b"});
        w.row({fmt_num(1.0 / 3.0), fmt_num(2e-6)});
    }
    std::ifstream f1(path1), f2(path2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    REQUIRE(s1.str() == s2.str());
    CHECK(s1.str().find("# config_hash:") == 0);
    CHECK(s1.str().find("# units: test units") != std::string::npos);
    CHECK(s1.str().find("a,b\n0.333333333333,2e-06\n") != std::string::npos);
    std::filesystem::remove(path1);
    std::filesystem::remove(path2);
}
