// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "horizon/observables.hpp"
#include "horizon/verification.hpp"

using namespace horizon;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int idx, bool pass, const std::string& detail, double seconds) {
    std::printf("criterion %2d: %s  (%.1f s)  %s\n", idx, pass ? "PASS" : "FAIL", seconds,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

StepContext paper_context(double dn = 2e-6) {
    const double u = velocity_from_center_wavelength(fused_silica(), 400e-9);
    return StepContext(StepConfig(fused_silica(), dn, u));
}

bool near(double value, double target, double rel_tol) {
    return std::abs(value - target) <= rel_tol * std::abs(target);
}

// 1. horizon interval widths at the reference parameter point
void criterion_1() {
    Timer t;
    const auto ctx = paper_context();
    const auto& h = *ctx.intervals;
    const double whi_ueV = ev_from_angular(h.whi_width()) * 1e6;
    const double bhi_ueV = ev_from_angular(h.bhi_width()) * 1e6;
    const bool pass = whi_ueV >= 0.5 && whi_ueV <= 1.5 && bhi_ueV >= 5.0 && bhi_ueV <= 15.0 &&
                      t.seconds() < 10.0;
    report(1, pass,
           fmt("WHI %.3f ueV (target 1 +-50%%), BHI %.3f ueV (target 10 +-50%%)", whi_ueV,
               bhi_ueV),
           t.seconds());
}

// 2. emission-pair wavelengths for the 400 nm and 800 nm keyed rows, +-1%
void criterion_2(const std::vector<TableRow>& rows) {
    Timer t;
    const auto& r400 = rows[0];
    const auto& r800 = rows[1];
    bool pass = true;
    std::string detail;
    auto check = [&](const char* name, double val, double target) {
        const bool ok = near(val, target, 0.01);
        pass = pass && ok;
        detail += fmt("%s %.4g (%.4g, %+.2f%%) ", name, val, target,
                      100.0 * (val / target - 1.0));
    };
    check("WHno", r400.white_hole.lambda_no, 227e-9);
    check("WHlo", r400.white_hole.lambda_partner, 3.6e-6);
    check("BHno", r400.black_hole.lambda_no, 209.8e-9);
    check("BHmo", r400.black_hole.lambda_partner, 398.5e-9);
    check("BHno800", r800.black_hole.lambda_no, 372e-9);
    check("BHmo800", r800.black_hole.lambda_partner, 810e-9);
    report(2, pass, detail, t.seconds());
}

// 3. correlation coefficients of all four velocity rows, +-0.02
void criterion_3(const std::vector<TableRow>& rows) {
    Timer t;
    bool pass = true;
    std::string detail;
    auto check = [&](const char* name, double val, double target) {
        const bool ok = std::abs(val - target) <= 0.02;
        pass = pass && ok;
        detail += fmt("%s %.3f (%.2f) ", name, val, target);
    };
    check("C_WH", rows[0].white_hole.C, 0.92);
    check("C_BH", rows[0].black_hole.C, 0.97);
    for (size_t i = 1; i < 4; ++i) {
        check(fmt("C_WH%zu", i).c_str(), rows[i].white_hole.C, 0.99);
        check(fmt("C_BH%zu", i).c_str(), rows[i].black_hole.C, 0.99);
    }
    report(3, pass, detail, t.seconds());
}

// 4. velocity-matched dip depth in the lab spectrum
void criterion_4() {
    Timer t;
    const auto ctx = paper_context();
    const double luvL = wavelength_from_angular(ctx.branch_L.Omega_uv);
    const double luvR = wavelength_from_angular(ctx.branch_R.Omega_uv);
    const auto grid = lab_lambda_grid(ctx, 0.9 * luvR, 1.03 * luvL, 240, 320);
    const auto spec = lab_spectrum(ctx, grid, 4);
    double dip = 1e300, peak = 0.0;
    for (const auto& p : spec) {
        if (p.lambda > luvR && p.lambda < luvL) dip = std::min(dip, p.Phi_lambda);
        if (p.lambda > luvL) peak = std::max(peak, p.Phi_lambda);
    }
    const double orders = std::log10(peak / dip);
    const bool pass = dip < 1e299 && orders >= 4.0 && orders <= 6.0;
    report(4, pass,
           fmt("crossover %.2f/%.2f nm, drop %.2f orders (target 4..6)", luvR * 1e9, luvL * 1e9,
               orders),
           t.seconds());
}

// 5. flux-magnitude ratios against the published table, +-20%
void criterion_5(const std::vector<TableRow>& rows) {
    Timer t;
    const auto& r = rows[0];
    const double mine[4] = {r.white_hole.Phi_no, r.white_hole.Phi_partner, r.black_hole.Phi_no,
                            r.black_hole.Phi_partner};
    const double published[4] = {3.5e13, 7.8e8, 2.1e14, 1.9e11};
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const double ratio = (mine[i] / mine[j]) / (published[i] / published[j]);
            worst = std::max(worst, std::abs(ratio - 1.0));
            pass = pass && std::abs(ratio - 1.0) <= 0.2;
        }
    }
    report(5, pass, fmt("worst pairwise ratio deviation %.1f%% (tol 20%%)", worst * 100.0),
           t.seconds());
}

// 6. quasi-unitarity across all scenarios and step heights
void criterion_6() {
    Timer t;
    double worst = 0.0;
    long count = 0;
    std::mt19937 rng(99);
    for (double dn : {1e-6, 1e-4, 1e-2}) {
        const auto ctx = paper_context(dn);
        const auto& h = *ctx.intervals;
        auto grid = refined_omega_grid(ctx, h.omega_min_L / 6.0, h.omega_max_R * 2.0, 220, 60);
        std::shuffle(grid.begin(), grid.end(), rng);
        if (grid.size() > 340) grid.resize(340);
        for (double w : grid) {
            try {
                const auto res = scatter_at(ctx, w);
                worst = std::max(worst, res.quasi_unitarity_residual);
                ++count;
            } catch (const ComputeError&) {
            }
        }
    }
    const bool pass = count >= 1000 && worst < 1e-8 && t.seconds() < 60.0;
    report(6, pass, fmt("max |S^dag g S - g| = %.2e over %ld frequencies", worst, count),
           t.seconds());
}

// 7. identity limit at delta_n = 1e-10
void criterion_7() {
    Timer t;
    const auto ctx = paper_context(1e-10);
    const auto ref = paper_context();  // intervals of the physical step locate the folds
    const auto& h = *ref.intervals;
    double worst_dev = 0.0, worst_flux = 0.0;
    for (double w : {h.omega_min_L * 0.5, h.omega_min_L * 0.99, 0.5 * (h.omega_min_R + h.omega_max_L),
                     h.omega_max_L * 0.999, h.omega_max_R * 1.4}) {
        const auto res = scatter_at(ctx, w);
        worst_dev = std::max(worst_dev, (res.S - Mat8c::Identity()).cwiseAbs().maxCoeff());
        for (int a = 0; a < 8; ++a) worst_flux = std::max(worst_flux, flux(res, a));
    }
    const bool pass = worst_dev < 1e-6 && worst_flux < 1e-12;
    report(7, pass, fmt("max|S-I| = %.2e (tol 1e-6), max flux = %.2e (tol 1e-12)", worst_dev,
                        worst_flux),
           t.seconds());
}

// 8. oracle equivalence on randomized configurations
void criterion_8() {
    Timer t;
    const auto reports = oracle::run_oracle_suite(100, 20200713);
    bool pass = true;
    std::string detail;
    for (const auto& r : reports) {
        pass = pass && r.pass;
        detail += fmt("%s %.1e/%.0e ", r.name.c_str(), r.max_abs_error, r.tolerance);
    }
    pass = pass && t.seconds() < 300.0;
    report(8, pass, detail, t.seconds());
}

// 9. exact analytic identities
void criterion_9() {
    Timer t;
    const auto ctx = paper_context();
    const auto& h = *ctx.intervals;
    bool pass = true;
    std::string detail;

    const auto res = scatter_at(ctx, 0.5 * (h.omega_max_L + h.omega_max_R));
    for (int a = 0; a < 8; ++a) {
        if (res.out_slots[static_cast<size_t>(a)].unphysical) continue;
        if (flux(res, a) == 0.0) continue;
        if (g2(res, a, a) != 2.0) {
            pass = false;
            detail += fmt("g2(%d,%d)=%.17g ", a, a, g2(res, a, a));
        }
    }
    detail += "g2_aa=2 exact; ";

    // disjoint detectors
    std::vector<SGridPoint> grid;
    const double wc = 0.5 * (h.omega_min_R + h.omega_max_L);
    for (double w : linear_grid(wc * 0.99, wc * 1.01, 5)) grid.push_back({w, scatter_at(ctx, w)});
    const DetectorFilter f1(grid[0].omega, grid[1].omega, 1.0);
    const DetectorFilter f2(grid[3].omega, grid[4].omega, 1.0);
    const int no = *grid[0].S.out_row(ModeLabel::no);
    const int mo = *grid[0].S.out_row(ModeLabel::mo);
    if (covariance(grid, no, mo, f1, f2) != 0.0) {
        pass = false;
        detail += "disjoint cov nonzero; ";
    } else {
        detail += "disjoint cov = 0; ";
    }

    // correlation-map symmetry and boundedness on the published-pair grids
    const auto row = table_row(ctx, 400e-9);
    const auto g1 = linear_grid(row.black_hole.lambda_partner * 0.996,
                                row.black_hole.lambda_partner * 1.004, 17);
    const auto g2v = linear_grid(row.black_hole.lambda_no * 0.996,
                                 row.black_hole.lambda_no * 1.004, 17);
    const auto map = lab_correlation_map(ctx, g1, g2v, 4);
    const auto mapT = lab_correlation_map(ctx, g2v, g1, 4);
    double peak = 0.0, asym = 0.0;
    bool bounded = true;
    for (size_t i = 0; i < g1.size(); ++i) {
        for (size_t j = 0; j < g2v.size(); ++j) {
            if (!(map.C[i][j] >= 0.0 && map.C[i][j] <= 1.0 + 1e-12)) bounded = false;
            asym = std::max(asym, std::abs(map.C[i][j] - mapT.C[j][i]));
            peak = std::max(peak, map.C[i][j]);
        }
    }
    // swap symmetry holds through quasi-unitarity, so its numerical
    // violation is bounded by the S^dag g S - g residual
    pass = pass && bounded && asym <= 1e-8;
    detail += fmt("map peak C %.3f, swap asymmetry %.1e, bounded=%d", peak, asym, bounded);
    report(9, pass, detail, t.seconds());
}

// 10. kinematic census across the optical branch
void criterion_10() {
    Timer t;
    const auto ctx = paper_context();
    const auto& h = *ctx.intervals;
    auto grid = refined_omega_grid(ctx, h.omega_min_L / 20.0, h.omega_max_R * 2.5, 500, 120);
    const auto seq = scenario_census(ctx, grid);
    const bool pass = seq == "abcde";
    report(10, pass, fmt("sequence '%s' over %zu frequencies (want 'abcde')", seq.c_str(),
                         grid.size()),
           t.seconds());
}

}  // namespace

int main() {
    Timer total;
    std::printf("acceptance suite: fused silica step, u from the lab group velocity at the "
                "front wavelength\n");

    // shared table rows: 400/800/1990 nm keyed by wavelength; the 2.05/3 row
    // by exact velocity (its wavelength keying is degenerate in this model,
    // see table1 metadata)
    Timer t_rows;
    std::vector<TableRow> rows;
    for (double lc : {400e-9, 800e-9}) {
        const double u = velocity_from_center_wavelength(fused_silica(), lc);
        rows.push_back(table_row(StepContext(StepConfig(fused_silica(), 2e-6, u)), lc));
    }
    rows.push_back(
        table_row(StepContext(StepConfig(fused_silica(), 2e-6, 2.05 / 3.0 * speed_of_light))));
    {
        const double u = velocity_from_center_wavelength(fused_silica(), 1990e-9);
        rows.push_back(table_row(StepContext(StepConfig(fused_silica(), 2e-6, u)), 1990e-9));
    }
    const double rows_seconds = t_rows.seconds();

    criterion_1();
    {
        Timer t2;
        criterion_2(rows);
        criterion_3(rows);
        (void)t2;
    }
    criterion_4();
    criterion_5(rows);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();

    std::printf("table rows computed in %.1f s (criteria 2/3/5 runtime bound: < 60 s)\n",
                rows_seconds);
    std::printf("%s: %d criterion(s) failed, total %.1f s\n", failures == 0 ? "OK" : "FAILED",
                failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
