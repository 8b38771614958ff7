#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "horizon/observables.hpp"

using namespace horizon;

namespace {

const double u_paper = velocity_from_center_wavelength(fused_silica(), 400e-9);

struct Fixture {
    StepContext ctx{StepConfig(fused_silica(), 2e-6, u_paper)};
    const HorizonIntervals& h() const { return *ctx.intervals; }
    double om_bhi() const { return 0.5 * (h().omega_max_L + h().omega_max_R); }
    double om_whi() const { return 0.5 * (h().omega_min_L + h().omega_min_R); }
    double om_c() const { return 0.5 * (h().omega_min_R + h().omega_max_L); }
};

// synthetic two-mode-squeezer-like S for the algebraic observable tests
ScatteringResult synthetic(double r1, double r2, double phase) {
    ScatteringResult res;
    res.S = Mat8c::Identity();
    res.g = Eigen::Matrix<double, 8, 1>::Ones();
    for (int i = 5; i < 8; ++i) res.g(i) = -1.0;
    res.in_slots.resize(8);
    res.out_slots.resize(8);
    for (int i = 0; i < 8; ++i) {
        res.out_slots[static_cast<size_t>(i)].label = kSlotOrder[static_cast<size_t>(i)];
        res.out_slots[static_cast<size_t>(i)].norm = res.g(i);
        res.in_slots[static_cast<size_t>(i)] = res.out_slots[static_cast<size_t>(i)];
    }
    // rows 2 (positive) and 6 (negative) squeezed together
    res.S(2, 2) = std::cosh(r1);
    res.S(2, 6) = std::sinh(r1) * std::exp(cplx(0.0, phase));
    res.S(6, 6) = std::cosh(r1);
    res.S(6, 2) = std::sinh(r1) * std::exp(cplx(0.0, -phase));
    // row 3 squeezed against column 7 with strength r2
    res.S(3, 3) = std::cosh(r2);
    res.S(3, 7) = std::sinh(r2);
    res.S(7, 7) = std::cosh(r2);
    res.S(7, 3) = std::sinh(r2);
    return res;
}

}  // namespace

TEST_CASE("flux vanishes identically at delta_n = 0", "[observables]") {
    Fixture f;
    StepContext ctx0(StepConfig(fused_silica(), 0.0, u_paper));
    const auto res = scatter_at(ctx0, f.om_c());
    for (int a = 0; a < 8; ++a) CHECK(flux(res, a) < 1e-21);
}

TEST_CASE("noL and moR peak inside the black hole interval", "[observables][paper]") {
    Fixture f;
    // the fin peaks at the lower (scenario-c facing) edge and cuts off hard
    // above, where moR ceases to exist
    const auto peak = scatter_at(f.ctx, f.h().omega_max_L + 0.05 * f.h().bhi_width());
    const auto below = scatter_at(f.ctx, f.h().omega_max_L - 20.0 * f.h().bhi_width());
    const auto above = scatter_at(f.ctx, f.h().omega_max_R + 20.0 * f.h().bhi_width());
    CHECK(flux(peak, ModeLabel::no) > 5.0 * flux(below, ModeLabel::no));
    CHECK(flux(peak, ModeLabel::no) > 1e3 * flux(above, ModeLabel::no));
    CHECK(flux(peak, ModeLabel::mo) > 5.0 * flux(below, ModeLabel::mo));
    CHECK_FALSE(above.out_row(ModeLabel::mo).has_value());
}

TEST_CASE("noL and loL peak inside the white hole interval", "[observables][paper]") {
    Fixture f;
    // mirror image of the black hole fin: peak at the upper edge, cliff below
    // where loL ceases to exist
    const auto peak = scatter_at(f.ctx, f.h().omega_min_R - 0.05 * f.h().whi_width());
    const auto below = scatter_at(f.ctx, f.h().omega_min_L - 20.0 * f.h().whi_width());
    const auto above = scatter_at(f.ctx, f.h().omega_min_R + 20.0 * f.h().whi_width());
    CHECK(flux(peak, ModeLabel::no) > 5.0 * flux(above, ModeLabel::no));
    CHECK(flux(peak, ModeLabel::no) > 30.0 * flux(below, ModeLabel::no));
    CHECK(flux(peak, ModeLabel::lo) > 5.0 * flux(above, ModeLabel::lo));
    CHECK_FALSE(below.out_row(ModeLabel::lo).has_value());
}

TEST_CASE("shark fin: emission collapses where the emitting mode disappears",
          "[observables][paper]") {
    // wider intervals at delta_n = 1e-3 make the fin shape easy to sample
    StepContext ctx(StepConfig(fused_silica(), 1e-3, u_paper));
    const auto& h = *ctx.intervals;
    const double just_inside = h.omega_max_R - 0.02 * h.bhi_width();
    const double just_above = h.omega_max_R + 0.02 * h.bhi_width();
    const auto in = scatter_at(ctx, just_inside);
    const auto out = scatter_at(ctx, just_above);
    CHECK(flux(in, ModeLabel::no) > 100.0 * flux(out, ModeLabel::no));
    CHECK(in.out_row(ModeLabel::mo).has_value());
    CHECK_FALSE(out.out_row(ModeLabel::mo).has_value());
}

TEST_CASE("covariance of disjoint detectors is exactly zero", "[observables]") {
    Fixture f;
    std::vector<SGridPoint> grid;
    for (double w : linear_grid(f.om_c() * 0.98, f.om_c() * 1.02, 5))
        grid.push_back({w, scatter_at(f.ctx, w)});
    const DetectorFilter f1(grid[0].omega, grid[1].omega, 1.0);
    const DetectorFilter f2(grid[3].omega, grid[4].omega, 1.0);
    const auto no = *grid[0].S.out_row(ModeLabel::no);
    const auto uo = *grid[0].S.out_row(ModeLabel::uo);
    CHECK(covariance(grid, no, uo, f1, f2) == 0.0);
}

TEST_CASE("covariance vanishes at delta_n = 0 and is nonnegative elsewhere", "[observables]") {
    Fixture f;
    StepContext ctx0(StepConfig(fused_silica(), 0.0, u_paper));
    // a band well inside the black hole interval, where S is smooth
    const double w0 = f.om_bhi() - 0.03 * f.h().bhi_width();
    const double w1 = f.om_bhi() + 0.03 * f.h().bhi_width();
    std::vector<SGridPoint> grid0, grid;
    for (double w : linear_grid(w0, w1, 4)) {
        grid0.push_back({w, scatter_at(ctx0, w)});
        grid.push_back({w, scatter_at(f.ctx, w)});
    }
    const DetectorFilter band(w0, w1, 1.0);
    const auto no = *grid[0].S.out_row(ModeLabel::no);
    const auto mo = *grid[0].S.out_row(ModeLabel::mo);
    const double cov = covariance(grid, no, mo, band, band);
    CHECK(cov > 0.0);
    // the identity step leaves only rounding noise in the anomalous block
    CHECK(covariance(grid0, no, mo, band, band) < 1e-10 * cov);
}

TEST_CASE("covariance flags grids the scattering matrix outruns", "[observables]") {
    Fixture f;
    // spanning the interval edge makes S jump by far more than 5%
    std::vector<SGridPoint> grid;
    for (double w : {f.h().omega_max_L - 30.0 * f.h().bhi_width(), f.om_bhi(),
                     f.h().omega_max_R + 30.0 * f.h().bhi_width()})
        grid.push_back({w, scatter_at(f.ctx, w)});
    const DetectorFilter band(grid.front().omega, grid.back().omega, 1.0);
    const auto no = *grid[0].S.out_row(ModeLabel::no);
    CHECK_THROWS_AS(covariance(grid, no, no, band, band), GridTooCoarse);
}

TEST_CASE("variance carries the chaotic excess", "[observables]") {
    const DetectorFilter f1(1e14, 1.1e14, 1e-9);
    CHECK(variance(0.0, f1) == 0.0);
    for (double N : {1e-8, 1e-3, 2.0}) {
        CHECK(variance(N, f1) / N > f1.tau * f1.width() / two_pi);
        CHECK(variance(N, f1) ==
              Catch::Approx(N * (N + f1.tau * f1.width() / two_pi)).epsilon(1e-14));
    }
}

TEST_CASE("black and white hole correlations match the published strengths",
          "[observables][paper]") {
    Fixture f;
    const auto bh = scatter_at(f.ctx, f.om_bhi());
    CHECK(pearson(bh, ModeLabel::no, ModeLabel::mo) == Catch::Approx(0.97).margin(0.02));
    const auto wh = scatter_at(f.ctx, f.om_whi());
    CHECK(pearson(wh, ModeLabel::no, ModeLabel::lo) == Catch::Approx(0.92).margin(0.02));
}

TEST_CASE("Pearson coefficient is bounded and symmetric", "[observables]") {
    Fixture f;
    for (double w : {f.om_whi(), f.om_c(), f.om_bhi()}) {
        const auto res = scatter_at(f.ctx, w);
        for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
                const double cab = pearson(res, a, b);
                CHECK(cab >= 0.0);
                CHECK(cab <= 1.0 + 1e-12);
                CHECK(cab == Catch::Approx(pearson(res, b, a)).margin(1e-12));
            }
        }
    }
}

TEST_CASE("self-correlation interpolates between vacuum and saturation", "[observables]") {
    CHECK(self_correlation(0.0) == 0.0);
    double prev = 0.0;
    for (double phi : {1e-10, 1e-5, 1e-1, 10.0}) {
        const double c = self_correlation(phi);
        CHECK(c > prev);
        CHECK(c < 1.0);
        prev = c;
    }
}

TEST_CASE("g2 of a mode with itself is exactly two", "[observables][paper]") {
    Fixture f;
    const auto res = scatter_at(f.ctx, f.om_bhi());
    for (ModeLabel lbl : {ModeLabel::no, ModeLabel::mo, ModeLabel::uo}) {
        if (!res.out_row(lbl)) continue;
        CHECK(g2(res, lbl, lbl) == 2.0);
    }
    const auto synth = synthetic(0.3, 0.7, 0.4);
    CHECK(g2(synth, 2, 2) == 2.0);
}

TEST_CASE("g2 of an uncorrelated pair with matched bandwidths is one", "[observables]") {
    const auto synth = synthetic(0.3, 0.7, 0.4);
    // rows 2 and 3 pair with different negative modes: no shared cross terms
    CHECK(g2(synth, 2, 3) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("g2 and C share their cross-overlap numerator", "[observables][oracle]") {
    Fixture f;
    const auto res = scatter_at(f.ctx, f.om_bhi());
    const int no = *res.out_row(ModeLabel::no);
    const int mo = *res.out_row(ModeLabel::mo);
    double Fa = 0.0, Fap = 0.0;
    for (int b = 0; b < 8; ++b) {
        if (res.g(b) != res.g(no)) Fa += std::norm(res.S(no, b));
        if (res.g(b) != res.g(mo)) Fap += std::norm(res.S(mo, b));
    }
    const double lhs = (g2(res, no, mo) - 1.0) * Fa * Fap;
    const double rhs = pearson(res, no, mo) * std::sqrt(Fa * (Fa + 1.0) * Fap * (Fap + 1.0));
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
    CHECK(g2(res, no, mo) > 1.0);
}

TEST_CASE("lab flux prefactor", "[observables]") {
    CHECK(lab_flux(3.0, u_paper, u_paper) == 0.0);           // velocity matched
    CHECK(lab_flux(3.0, 2.0e8, 0.0) == 3.0);                 // frames coincide
    const double vg = 2.9e8;                                 // faster than the front
    CHECK(lab_flux(1.0, vg, u_paper) == Catch::Approx(1.0 - u_paper / vg));
    CHECK(lab_flux(1.0, vg, u_paper) > 0.0);
    CHECK(lab_flux(1.0, vg, u_paper) < 1.0);
    CHECK_THROWS_AS(lab_flux(1.0, 0.0, u_paper), ZeroGroupVelocity);
}

TEST_CASE("lab contributions cover the paper's four detection branches", "[observables]") {
    Fixture f;
    auto labels_at = [&](double lam) {
        std::vector<std::string> out;
        for (const auto& c : lab_contributions(f.ctx, lam))
            out.push_back(std::string(label_name(c.label)) + side_name(c.side));
        return out;
    };
    CHECK(labels_at(210e-9) == std::vector<std::string>{"noL"});
    CHECK(labels_at(300e-9) == std::vector<std::string>{"uoL"});
    CHECK(labels_at(1000e-9) == std::vector<std::string>{"moR"});
    CHECK(labels_at(4000e-9) == std::vector<std::string>{"loL"});
    CHECK(lab_contributions(f.ctx, 50e-9).empty());
    CHECK_THROWS_AS(lab_spectrum_point(f.ctx, 50e-9), NoContribution);
}

TEST_CASE("branch inversion round-trips through the dispersion solver", "[observables][oracle]") {
    Fixture f;
    for (double lam : {215e-9, 320e-9, 450e-9, 1200e-9, 3900e-9}) {
        for (const auto& cb : lab_contributions(f.ctx, lam)) {
            // re-solve the mode set at the inverted frequency and find the branch
            const auto& med = cb.side == Side::L ? f.ctx.left : f.ctx.step.right_medium();
            const auto modes = solve_modes(med, f.ctx.step.u(), cb.omega_mf, cb.side);
            bool found = false;
            for (const auto& m : modes) {
                if (m.label != cb.label) continue;
                found = true;
                CHECK(m.Omega.real() == Catch::Approx(cb.Omega).epsilon(1e-10));
                CHECK(m.K.real() == Catch::Approx(cb.K).epsilon(1e-10));
            }
            CHECK(found);
        }
    }
}

TEST_CASE("photon number is frame invariant on a narrow band", "[observables][oracle]") {
    Fixture f;
    // moR band in scenario c, mapped to the lab frame: tau * int phi domega
    // must equal (gamma tau) * int Phi dOmega over the image band
    const double w_lo = f.om_c() * 0.999, w_hi = f.om_c() * 1.001;
    const int n = 9;
    const auto ws = linear_grid(w_lo, w_hi, n);
    double n_mf = 0.0, n_lab = 0.0;
    std::vector<double> phi(ws.size()), Om(ws.size()), pref(ws.size());
    for (size_t i = 0; i < ws.size(); ++i) {
        const auto res = scatter_at(f.ctx, ws[i]);
        const int row = *res.out_row(ModeLabel::mo);
        const auto& slot = res.out_slots[static_cast<size_t>(row)];
        phi[i] = flux(res, row);
        Om[i] = slot.Omega;
        pref[i] = std::abs(1.0 - f.ctx.step.u() / slot.vg_lab);
    }
    for (size_t i = 0; i + 1 < ws.size(); ++i) {
        n_mf += 0.5 * (ws[i + 1] - ws[i]) * (phi[i] + phi[i + 1]);
        n_lab += 0.5 * std::abs(Om[i + 1] - Om[i]) * (pref[i] * phi[i] + pref[i + 1] * phi[i + 1]);
    }
    n_lab *= f.ctx.step.gamma();  // lab interaction time for the same process
    CHECK(n_lab == Catch::Approx(n_mf).epsilon(1e-4));
}

TEST_CASE("lab spectrum reproduces the emission peaks and the velocity-matched dip",
          "[observables][paper]") {
    Fixture f;
    const auto grid = lab_lambda_grid(f.ctx, 195e-9, 4.2e-6, 300, 200);
    const auto spec = lab_spectrum(f.ctx, grid, 4);
    REQUIRE(spec.size() > 200);

    auto peak_in = [&](double lo, double hi) {
        double best_l = 0.0, best_v = 0.0;
        for (const auto& p : spec)
            if (p.lambda >= lo && p.lambda <= hi && p.Phi_lambda > best_v) {
                best_v = p.Phi_lambda;
                best_l = p.lambda;
            }
        return std::pair{best_l, best_v};
    };
    // black hole pair: noL near 210 nm, moR just above the crossover
    const auto [l_no_bh, v_no_bh] = peak_in(200e-9, 220e-9);
    CHECK(l_no_bh == Catch::Approx(209.8e-9).epsilon(0.011));
    const auto [l_mo_bh, v_mo_bh] = peak_in(401e-9, 410e-9);
    CHECK(l_mo_bh == Catch::Approx(398.5e-9).epsilon(0.011));
    // white hole pair: noL near 227 nm, loL near 3.6 um
    const auto [l_no_wh, v_no_wh] = peak_in(220e-9, 237e-9);
    CHECK(l_no_wh == Catch::Approx(227e-9).epsilon(0.011));
    const auto [l_lo_wh, v_lo_wh] = peak_in(3.0e-6, 4.0e-6);
    CHECK(l_lo_wh == Catch::Approx(3.6e-6).epsilon(0.011));
    CHECK(v_no_bh > v_mo_bh);
    CHECK(v_no_wh > v_lo_wh);

    // dip: total flux collapses between the two crossover wavelengths
    const double luvL = wavelength_from_angular(f.ctx.branch_L.Omega_uv);
    const double luvR = wavelength_from_angular(f.ctx.branch_R.Omega_uv);
    double dip = 1e300;
    for (const auto& p : spec)
        if (p.lambda > luvR && p.lambda < luvL) dip = std::min(dip, p.Phi_lambda);
    REQUIRE(dip < 1e300);
    const double drop = v_mo_bh / dip;
    CHECK(drop > 1e4);
    CHECK(drop < 1e6);
}

TEST_CASE("table row reproduces the first published parameter set", "[observables][paper]") {
    Fixture f;
    const auto row = table_row(f.ctx, 400e-9);
    CHECK(row.white_hole.lambda_no == Catch::Approx(227e-9).epsilon(0.01));
    CHECK(row.white_hole.lambda_partner == Catch::Approx(3.6e-6).epsilon(0.01));
    CHECK(row.white_hole.C == Catch::Approx(0.92).margin(0.02));
    CHECK(row.black_hole.lambda_no == Catch::Approx(209.8e-9).epsilon(0.01));
    CHECK(row.black_hole.lambda_partner == Catch::Approx(398.5e-9).epsilon(0.01));
    CHECK(row.black_hole.C == Catch::Approx(0.97).margin(0.02));
}

TEST_CASE("correlation map: contour peak, symmetry, off-contour zeros", "[observables]") {
    Fixture f;
    const auto row = table_row(f.ctx, 400e-9);
    // grids straddling the black hole pair
    const auto g1 = linear_grid(row.black_hole.lambda_partner * 0.997,
                                row.black_hole.lambda_partner * 1.003, 21);
    const auto g2v = linear_grid(row.black_hole.lambda_no * 0.997,
                                 row.black_hole.lambda_no * 1.003, 21);
    const auto map = lab_correlation_map(f.ctx, g1, g2v, 4);
    double peak = 0.0;
    for (const auto& r : map.C)
        for (double c : r) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0 + 1e-12);
            peak = std::max(peak, c);
        }
    CHECK(peak == Catch::Approx(0.97).margin(0.02));
    // detector swap symmetry
    const auto mapT = lab_correlation_map(f.ctx, g2v, g1, 4);
    for (size_t i = 0; i < g1.size(); ++i)
        for (size_t j = 0; j < g2v.size(); ++j)
            CHECK(map.C[i][j] == Catch::Approx(mapT.C[j][i]).margin(1e-8));
    // far off the shared-frequency contour the coefficient vanishes
    const auto far = lab_correlation_map(f.ctx, {500e-9}, {230e-9}, 1);
    CHECK(far.C[0][0] == 0.0);
}

TEST_CASE("grid builders respect bounds and edge refusal bands", "[observables]") {
    Fixture f;
    const auto g = refined_omega_grid(f.ctx, f.h().omega_min_L * 0.2, f.h().omega_max_R * 2.0,
                                      120, 80);
    CHECK(g.size() > 200);
    for (double w : g) CHECK(f.ctx.edge_distance(w) >= 2e-9);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK_THROWS_AS(geometric_grid(1.0, 0.5, 10), ConfigError);
    CHECK_THROWS_AS(geometric_grid(1.0, 2.0, 1), ConfigError);
}
