// Command line front end: scattering spectra, correlation maps and horizon
// diagnostics for a step-like refractive index front.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/config.hpp"
#include "horizon/observables.hpp"
#include "horizon/output.hpp"
#include "horizon/verification.hpp"

using nlohmann::json;
using namespace horizon;

namespace {

unsigned worker_count(const RunConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

json slot_json(const GmSlot& s) {
    return json{{"name", s.name()}, {"unphysical", s.unphysical}, {"norm", s.norm},
                {"Omega", s.Omega}, {"K", s.K},                   {"vg_mf", s.vg_mf},
                {"vg_lab", s.vg_lab}};
}

json matrix_json(const Mat8c& m) {
    json rows = json::array();
    for (int i = 0; i < 8; ++i) {
        json row = json::array();
        for (int j = 0; j < 8; ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

std::string config_hash_hex(const RunConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical_config(cfg))));
    return buf;
}

json meta_json(const RunConfig& cfg, const StepContext& ctx) {
    return json{{"config_hash", config_hash_hex(cfg)},
                {"u_over_c", ctx.step.u() / speed_of_light},
                {"delta_n", ctx.step.delta_n()},
                {"mu", ctx.step.mu()},
                {"mode_legend", mode_label_legend()},
                {"units",
                 "omega rad/s (front frame); lambda m; phi photons per unit time per unit "
                 "bandwidth; Phi_lambda photons per unit time per unit wavelength up to a "
                 "global rate convention"}};
}

void write_spectrum(const RunConfig& cfg, const StepContext& ctx, const std::string& name) {
    double lo = cfg.omega_lo, hi = cfg.omega_hi;
    if (lo <= 0.0 || hi <= 0.0) {
        if (!ctx.intervals) throw ConfigError("spectrum: no intervals; give omega_lo/omega_hi");
        lo = ctx.intervals->omega_min_L / 8.0;
        hi = ctx.intervals->omega_max_R * 2.2;
    }
    const auto grid = refined_omega_grid(ctx, lo, hi, cfg.omega_points);
    const auto spec = mf_spectrum(ctx, grid, worker_count(cfg));
    CsvWriter csv(out_path(cfg, name), cfg,
                  "omega rad/s; phi dimensionless (photons per unit time per unit bandwidth)");
    const std::vector<std::string> modes = {"uL", "uoL", "moR", "loL", "lL", "nlL", "noL", "nuL"};
    std::vector<std::string> cols = {"omega", "scenario"};
    for (const auto& m : modes) cols.push_back("phi_" + m);
    csv.header(cols);
    for (const auto& p : spec) {
        std::vector<std::string> row = {fmt_num(p.omega), std::string(1, p.scenario_case)};
        for (const auto& m : modes) {
            const auto it = p.flux_per_mode.find(m);
            row.push_back(it == p.flux_per_mode.end() ? "" : fmt_num(it->second));
        }
        csv.row(row);
    }
}

void write_labspectrum(const RunConfig& cfg, const StepContext& ctx, const std::string& name) {
    const auto grid = lab_lambda_grid(ctx, cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_points);
    const auto spec = lab_spectrum(ctx, grid, worker_count(cfg));
    CsvWriter csv(out_path(cfg, name), cfg,
                  "lambda m; Phi photons per unit time per unit wavelength (global rate "
                  "convention); omega rad/s");
    const std::vector<std::string> branches = {"noL", "uoL", "moR", "loL"};
    std::vector<std::string> cols = {"lambda", "Phi_total"};
    for (const auto& b : branches) {
        cols.push_back("Phi_" + b);
        cols.push_back("omega_" + b);
    }
    csv.header(cols);
    for (const auto& p : spec) {
        std::vector<std::string> row = {fmt_num(p.lambda), fmt_num(p.Phi_lambda)};
        for (const auto& b : branches) {
            std::string phi, om;
            for (const auto& c : p.contributing_modes)
                if (c.mode == b) {
                    phi = fmt_num(c.Phi_lambda);
                    om = fmt_num(c.omega_mf);
                }
            row.push_back(phi);
            row.push_back(om);
        }
        csv.row(row);
    }
}

int cmd_verify(const RunConfig& cfg, long n_configs, unsigned seed) {
    const auto reports = oracle::run_oracle_suite(n_configs, seed);
    json arr = json::array();
    bool all = true;
    for (const auto& r : reports) {
        arr.push_back({{"name", r.name},
                       {"max_abs_error", r.max_abs_error},
                       {"samples", r.samples},
                       {"tolerance", r.tolerance},
                       {"pass", r.pass}});
        all = all && r.pass;
        std::printf("%-34s max_err %.3e  (tol %.0e, %ld samples)  %s\n", r.name.c_str(),
                    r.max_abs_error, r.tolerance, r.samples, r.pass ? "pass" : "FAIL");
    }
    std::ofstream(out_path(cfg, "verify.json")) << arr.dump(2) << "\n";
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scattering spectra and photon correlations at a moving index front"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file");
    std::optional<double> opt_dn, opt_uc, opt_lc, opt_ref, opt_tau;
    std::optional<std::string> opt_out, opt_mu;
    std::optional<unsigned> opt_workers;
    app.add_option("--delta-n", opt_dn, "index step height");
    app.add_option("--u-over-c", opt_uc, "front speed as a fraction of c");
    app.add_option("--lambda-c-nm", opt_lc,
                   "front central wavelength (nm); sets u via the lab group velocity");
    app.add_option("--ref-wavelength-nm", opt_ref, "where delta_n is defined (default 800)");
    app.add_option("--mu-mode", opt_mu, "linear | exact");
    app.add_option("--output-dir", opt_out, "output directory (default $HORIZON_OUTPUT_DIR or .)");
    app.add_option("--workers", opt_workers, "parallel workers (0 = hardware)");
    app.add_option("--tau-delta", opt_tau, "detector time-bandwidth tau*Delta/2pi");

    auto* c_disp = app.add_subcommand("dispersion", "mode table over an omega grid (CSV)");
    double d_lo = 0.0, d_hi = 0.0;
    int d_pts = 120;
    c_disp->add_option("--omega-lo", d_lo, "grid start, rad/s (default from intervals)");
    c_disp->add_option("--omega-hi", d_hi, "grid end, rad/s");
    c_disp->add_option("--points", d_pts, "base grid points");

    auto* c_scen = app.add_subcommand("scenario", "horizon interval boundaries (JSON)");

    auto* c_smat = app.add_subcommand("smatrix", "scattering matrix at one frequency (JSON)");
    double s_omega = 0.0, s_lambda_nm = 0.0;
    c_smat->add_option("--omega", s_omega, "moving-frame angular frequency, rad/s");
    c_smat->add_option("--lambda-nm", s_lambda_nm,
                       "lab wavelength (nm); resolved through the detectable branches");

    auto* c_spec = app.add_subcommand("spectrum", "moving-frame flux spectra (CSV)");
    bool spec_sweep = false;
    c_spec->add_flag("--sweep-delta-n", spec_sweep, "one file per delta_n in the ladder");

    auto* c_lab = app.add_subcommand("labspectrum", "laboratory-frame spectral density (CSV)");

    auto* c_corr = app.add_subcommand("corrmap", "lab-frame correlation map (CSV + JSON)");
    double l1_lo = 0.0, l1_hi = 0.0, l2_lo = 0.0, l2_hi = 0.0;
    int l1_pts = 41, l2_pts = 41;
    c_corr->add_option("--lambda1-lo-nm", l1_lo);
    c_corr->add_option("--lambda1-hi-nm", l1_hi);
    c_corr->add_option("--lambda2-lo-nm", l2_lo);
    c_corr->add_option("--lambda2-hi-nm", l2_hi);
    c_corr->add_option("--points1", l1_pts);
    c_corr->add_option("--points2", l2_pts);

    auto* c_tab = app.add_subcommand("table1", "horizon emission summary per velocity (JSON)");

    auto* c_ver = app.add_subcommand("verify", "run the oracle suite (JSON report)");
    long v_configs = 100;
    unsigned v_seed = 20200713;
    c_ver->add_option("--configs", v_configs, "randomized configurations");
    c_ver->add_option("--seed", v_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg = load_config_file(config_path);
        else if (const char* env = std::getenv("HORIZON_OUTPUT_DIR"))
            cfg.output_dir = env;
        if (opt_dn) cfg.delta_n = *opt_dn;
        if (opt_uc) {
            cfg.u_over_c = *opt_uc;
            cfg.lambda_c.reset();
        }
        if (opt_lc) {
            cfg.lambda_c = *opt_lc * 1e-9;
            cfg.u_over_c.reset();
        }
        if (opt_ref) cfg.reference_wavelength = *opt_ref * 1e-9;
        if (opt_mu) {
            if (*opt_mu == "linear")
                cfg.mu_mode = MuMode::linear;
            else if (*opt_mu == "exact")
                cfg.mu_mode = MuMode::exact;
            else
                throw ConfigError("--mu-mode must be linear or exact");
        }
        if (opt_out) cfg.output_dir = *opt_out;
        if (opt_workers) cfg.workers = *opt_workers;
        if (opt_tau) cfg.tau_delta_over_2pi = *opt_tau;

        const StepContext ctx(cfg.make_step());

        if (*c_disp) {
            double lo = d_lo > 0.0 ? d_lo
                                   : (ctx.intervals ? ctx.intervals->omega_min_L / 8.0 : 1e13);
            double hi = d_hi > 0.0 ? d_hi
                                   : (ctx.intervals ? ctx.intervals->omega_max_R * 2.2 : 2e14);
            const auto grid = refined_omega_grid(ctx, lo, hi, d_pts, 40);
            CsvWriter csv(out_path(cfg, "dispersion.csv"), cfg,
                          "omega rad/s; k rad/m; Omega rad/s; K rad/m; vg m/s");
            csv.header({"omega", "side", "label", "re_k", "im_k", "re_Omega", "im_Omega", "re_K",
                        "im_K", "vg_mf", "norm_sign"});
            for (double w : grid) {
                for (Side side : {Side::L, Side::R}) {
                    const auto& med = side == Side::L ? ctx.left : ctx.step.right_medium();
                    std::array<ModeSolution, 8> modes;
                    try {
                        modes = solve_modes(med, ctx.step.u(), w, side, ctx.vg_floor);
                    } catch (const ComputeError&) {
                        continue;
                    }
                    for (const auto& m : modes) {
                        csv.row({fmt_num(w), side_name(side), label_name(m.label),
                                 fmt_num(m.k.real()), fmt_num(m.k.imag()),
                                 fmt_num(m.Omega.real()), fmt_num(m.Omega.imag()),
                                 fmt_num(m.K.real()), fmt_num(m.K.imag()),
                                 m.propagating() ? fmt_num(*m.group_velocity_mf) : "",
                                 m.norm_sign == NormSign::unphysical
                                     ? "unphysical"
                                     : (m.norm_sign == NormSign::plus ? "+1" : "-1")});
                    }
                }
            }
        } else if (*c_scen) {
            json j = meta_json(cfg, ctx);
            if (ctx.intervals) {
                const auto& h = *ctx.intervals;
                j["whi"] = {{"omega_min_L", h.omega_min_L},
                            {"omega_min_R", h.omega_min_R},
                            {"width_eV", ev_from_angular(h.whi_width())}};
                j["bhi"] = {{"omega_max_L", h.omega_max_L},
                            {"omega_max_R", h.omega_max_R},
                            {"width_eV", ev_from_angular(h.bhi_width())}};
            } else {
                j["whi"] = nullptr;
                j["bhi"] = nullptr;
            }
            for (const char* side : {"L", "R"}) {
                const auto& b = side[0] == 'L' ? ctx.branch_L : ctx.branch_R;
                j[std::string("branch_") + side] = {
                    {"Omega_band_edge", b.Omega_lo},
                    {"Omega_ir_match", b.Omega_ir},
                    {"Omega_uv_match", b.Omega_uv},
                    {"Omega_phase_horizon", b.Omega_ph},
                    {"lambda_uv_match_nm", wavelength_from_angular(b.Omega_uv) * 1e9},
                    {"lambda_ir_match_um", wavelength_from_angular(b.Omega_ir) * 1e6},
                    {"omega_min", b.omega_min},
                    {"omega_max", b.omega_max}};
            }
            std::ofstream(out_path(cfg, "scenario.json")) << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
        } else if (*c_smat) {
            double w = s_omega;
            if (w <= 0.0 && s_lambda_nm > 0.0) {
                const auto contribs = lab_contributions(ctx, s_lambda_nm * 1e-9);
                if (contribs.empty())
                    throw ComputeError("smatrix: lambda maps to no detectable branch");
                w = contribs.front().omega_mf;
            }
            if (w <= 0.0) throw ConfigError("smatrix: give --omega or --lambda-nm");
            const auto res = scatter_at(ctx, w);
            json j = meta_json(cfg, ctx);
            j["omega"] = res.omega;
            j["scenario"] = std::string(1, res.scenario.scenario_case);
            j["S"] = matrix_json(res.S);
            json g = json::array(), in_slots = json::array(), out_slots = json::array();
            for (int i = 0; i < 8; ++i) g.push_back(res.g(i));
            for (const auto& s : res.in_slots) in_slots.push_back(slot_json(s));
            for (const auto& s : res.out_slots) out_slots.push_back(slot_json(s));
            j["g"] = g;
            j["in_modes"] = in_slots;
            j["out_modes"] = out_slots;
            j["quasi_unitarity_residual"] = res.quasi_unitarity_residual;
            j["lr_consistency"] = res.lr_consistency;
            j["row_norm_residual"] = res.row_norm_residual;
            j["match_cond"] = res.match_cond;
            std::ofstream(out_path(cfg, "smatrix.json")) << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
        } else if (*c_spec) {
            if (spec_sweep) {
                for (double dn : cfg.delta_n_ladder()) {
                    RunConfig c2 = cfg;
                    c2.delta_n = dn;
                    const StepContext ctx2(c2.make_step());
                    std::ostringstream name;
                    name << "spectrum_dn" << fmt_num(dn) << ".csv";
                    write_spectrum(c2, ctx2, name.str());
                }
            } else {
                write_spectrum(cfg, ctx, "spectrum.csv");
            }
        } else if (*c_lab) {
            write_labspectrum(cfg, ctx, "labspectrum.csv");
        } else if (*c_corr) {
            std::vector<double> g1, g2;
            if (l1_lo > 0.0 && l1_hi > 0.0 && l2_lo > 0.0 && l2_hi > 0.0) {
                g1 = linear_grid(l1_lo * 1e-9, l1_hi * 1e-9, l1_pts);
                g2 = linear_grid(l2_lo * 1e-9, l2_hi * 1e-9, l2_pts);
            } else {
                // default: straddle the black hole pair
                const auto row = table_row(ctx, cfg.lambda_c ? *cfg.lambda_c : 0.0);
                g1 = linear_grid(row.black_hole.lambda_partner * 0.995,
                                 row.black_hole.lambda_partner * 1.005, l1_pts);
                g2 = linear_grid(row.black_hole.lambda_no * 0.995,
                                 row.black_hole.lambda_no * 1.005, l2_pts);
            }
            const auto map = lab_correlation_map(ctx, g1, g2, worker_count(cfg));
            CsvWriter csv(out_path(cfg, "corrmap.csv"), cfg,
                          "first row lambda_2 (m); first column lambda_1 (m); cells C");
            std::vector<std::string> head = {"lambda1\\lambda2"};
            for (double l : map.lambda_2) head.push_back(fmt_num(l));
            csv.header(head);
            double peak = 0.0, pl1 = 0.0, pl2 = 0.0;
            for (size_t i = 0; i < map.lambda_1.size(); ++i) {
                std::vector<std::string> row = {fmt_num(map.lambda_1[i])};
                for (size_t jj = 0; jj < map.lambda_2.size(); ++jj) {
                    row.push_back(fmt_num(map.C[i][jj]));
                    if (map.C[i][jj] > peak) {
                        peak = map.C[i][jj];
                        pl1 = map.lambda_1[i];
                        pl2 = map.lambda_2[jj];
                    }
                }
                csv.row(row);
            }
            json j = meta_json(cfg, ctx);
            j["peak_C"] = peak;
            j["peak_lambda_1"] = pl1;
            j["peak_lambda_2"] = pl2;
            j["tau_delta_over_2pi"] = cfg.tau_delta_over_2pi;
            std::ofstream(out_path(cfg, "corrmap_meta.json")) << j.dump(2) << "\n";
        } else if (*c_tab) {
            std::vector<std::pair<double, double>> keys;  // (u, lambda_c)
            if (!cfg.velocity_sweep.empty()) {
                for (double uc : cfg.velocity_sweep) keys.push_back({uc * speed_of_light, 0.0});
            } else {
                auto lcs = cfg.lambda_c_sweep;
                if (lcs.empty()) lcs = {400e-9, 800e-9, 1260e-9, 1990e-9};
                for (double lc : lcs)
                    keys.push_back({velocity_from_center_wavelength(cfg.right, lc), lc});
            }
            json rows = json::array();
            std::printf(
                "%-8s %-8s | %-10s %-10s %-10s %-10s %-6s | %-10s %-10s %-10s %-10s %-6s\n",
                "u/c", "lc(nm)", "WH_no(nm)", "WH_lo(um)", "Phi_no", "Phi_lo", "C", "BH_no(nm)",
                "BH_mo(nm)", "Phi_no", "Phi_mo", "C");
            for (auto [u, lc] : keys) {
                const StepContext c2(cfg.make_step(cfg.delta_n, u));
                const auto row = table_row(c2, lc);
                rows.push_back({{"u_over_c", row.u_over_c},
                                {"lambda_c", row.lambda_c},
                                {"whi_width_eV", row.whi_width_ev},
                                {"bhi_width_eV", row.bhi_width_ev},
                                {"intervals_overlap", row.intervals_overlap},
                                {"white_hole",
                                 {{"lambda_noL", row.white_hole.lambda_no},
                                  {"lambda_loL", row.white_hole.lambda_partner},
                                  {"Phi_noL", row.white_hole.Phi_no},
                                  {"Phi_loL", row.white_hole.Phi_partner},
                                  {"C", row.white_hole.C}}},
                                {"black_hole",
                                 {{"lambda_noL", row.black_hole.lambda_no},
                                  {"lambda_moR", row.black_hole.lambda_partner},
                                  {"Phi_noL", row.black_hole.Phi_no},
                                  {"Phi_moR", row.black_hole.Phi_partner},
                                  {"C", row.black_hole.C}}}});
                std::printf(
                    "%-8.5f %-8.0f | %-10.2f %-10.4f %-10.3e %-10.3e %-6.3f | %-10.2f %-10.2f "
                    "%-10.3e %-10.3e %-6.3f\n",
                    row.u_over_c, row.lambda_c * 1e9, row.white_hole.lambda_no * 1e9,
                    row.white_hole.lambda_partner * 1e6, row.white_hole.Phi_no,
                    row.white_hole.Phi_partner, row.white_hole.C, row.black_hole.lambda_no * 1e9,
                    row.black_hole.lambda_partner * 1e9, row.black_hole.Phi_no,
                    row.black_hole.Phi_partner, row.black_hole.C);
            }
            json j = meta_json(cfg, ctx);
            j["rows"] = rows;
            std::ofstream(out_path(cfg, "table1.json")) << j.dump(2) << "\n";
        } else if (*c_ver) {
            return cmd_verify(cfg, v_configs, v_seed);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ComputeError& e) {
        std::cerr << "compute error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
