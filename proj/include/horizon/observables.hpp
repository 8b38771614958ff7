#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "horizon/constants.hpp"
#include "horizon/errors.hpp"
#include "horizon/pool.hpp"
#include "horizon/scattering.hpp"

namespace horizon {

// Rectangle spectral filter of one detector, moving-frame frequencies.
struct DetectorFilter {
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    double tau = 1.0;  // interaction time, s

    DetectorFilter() = default;
    DetectorFilter(double lo, double hi, double t) : omega_lo(lo), omega_hi(hi), tau(t) {
        if (!(lo < hi)) throw ConfigError("DetectorFilter: need omega_lo < omega_hi");
    }
    double width() const { return omega_hi - omega_lo; }
    bool contains(double w) const { return w >= omega_lo && w <= omega_hi; }
};

// ---- single-frequency observables -----------------------------------------

namespace detail {

// cross-norm-class row sum of |S|^2
inline double cross_row_sum(const ScatteringResult& r, int a) {
    double s = 0.0;
    for (int b = 0; b < 8; ++b)
        if (r.g(b) != r.g(a)) s += std::norm(r.S(a, b));
    return s;
}

// sum_{beta not in {alpha}} S*_{a beta} S_{a' beta}
inline cplx cross_overlap(const ScatteringResult& r, int a, int ap) {
    cplx s = 0.0;
    for (int b = 0; b < 8; ++b)
        if (r.g(b) != r.g(a)) s += std::conj(r.S(a, b)) * r.S(ap, b);
    return s;
}

inline int require_out_row(const ScatteringResult& r, ModeLabel lbl, const char* who) {
    const auto row = r.out_row(lbl);
    if (!row)
        throw NoContribution(std::string(who) + ": out mode " + label_name(lbl) +
                             " absent at omega=" + std::to_string(r.omega));
    return *row;
}

}  // namespace detail

// Spontaneous photon flux density of out mode alpha: the anomalous
// (norm-class-crossing) row power over 2 pi.
inline double flux(const ScatteringResult& r, int out_row) {
    return detail::cross_row_sum(r, out_row) / two_pi;
}

inline double flux(const ScatteringResult& r, ModeLabel lbl) {
    return flux(r, detail::require_out_row(r, lbl, "flux"));
}

struct SpectrumPoint {
    double omega = 0.0;
    char scenario_case = '?';
    std::map<std::string, double> flux_per_mode;  // out-GM name -> phi
};

inline SpectrumPoint spectrum_point(const ScatteringResult& r) {
    SpectrumPoint p;
    p.omega = r.omega;
    p.scenario_case = r.scenario.scenario_case;
    for (int a = 0; a < 8; ++a) {
        const auto& s = r.out_slots[static_cast<size_t>(a)];
        if (s.unphysical) continue;
        p.flux_per_mode[s.name()] = flux(r, a);
    }
    return p;
}

// Narrowband photon-flux Pearson coefficient with the Delta^2/(Delta1 Delta2)
// prefactor; equal to 1 when Delta^2 = Delta1*Delta2.
struct Bandwidths {
    double overlap = 1.0;  // Delta
    double d1 = 1.0;       // Delta_1
    double d2 = 1.0;       // Delta_2
};

inline double pearson(const ScatteringResult& r, int a, int ap, const Bandwidths& bw = {}) {
    const double Fa = detail::cross_row_sum(r, a);
    const double Fap = detail::cross_row_sum(r, ap);
    if (Fa == 0.0 || Fap == 0.0) return 0.0;
    const double num = std::norm(detail::cross_overlap(r, a, ap));
    const double pref = bw.overlap * bw.overlap / (bw.d1 * bw.d2);
    return pref * num / std::sqrt(Fa * (Fa + 1.0) * Fap * (Fap + 1.0));
}

inline double pearson(const ScatteringResult& r, ModeLabel a, ModeLabel ap,
                      const Bandwidths& bw = {}) {
    return pearson(r, detail::require_out_row(r, a, "pearson"),
                   detail::require_out_row(r, ap, "pearson"), bw);
}

// Matched-filter self-correlation: <N>^2/var(N) with <N> = 2 pi phi (tau
// Delta / 2 pi); tau_delta is tau*Delta/(2 pi), default 1.
inline double self_correlation(double phi, double tau_delta_over_2pi = 1.0) {
    const double N = two_pi * phi * tau_delta_over_2pi;
    return N / (N + tau_delta_over_2pi);
}

// Second order cross correlation; exactly 2 for alpha = alpha' with matched
// filters.
inline double g2(const ScatteringResult& r, int a, int ap, const Bandwidths& bw = {}) {
    const double pref = bw.overlap * bw.overlap / (bw.d1 * bw.d2);
    const double Fa = detail::cross_row_sum(r, a);
    const double Fap = detail::cross_row_sum(r, ap);
    if (Fa == 0.0 || Fap == 0.0) return pref;
    const double num = std::norm(detail::cross_overlap(r, a, ap));
    return pref * (1.0 + num / (Fa * Fap));
}

inline double g2(const ScatteringResult& r, ModeLabel a, ModeLabel ap, const Bandwidths& bw = {}) {
    return g2(r, detail::require_out_row(r, a, "g2"), detail::require_out_row(r, ap, "g2"), bw);
}

// ---- bandwidth-integrated observables --------------------------------------

// One in-band sample of S for the integral observables.
struct SGridPoint {
    double omega;
    ScatteringResult S;
};

namespace detail {

inline void check_grid_smoothness(const std::vector<SGridPoint>& grid, int a, int ap, double lo,
                                  double hi) {
    constexpr double noise_floor = 1e-20;  // rows that are pure rounding noise
    double prev_f = -1.0;
    for (const auto& p : grid) {
        if (p.omega < lo || p.omega > hi) continue;
        const double f = std::sqrt(cross_row_sum(p.S, a) * cross_row_sum(p.S, ap));
        if (f <= noise_floor) continue;
        if (prev_f > 0.0) {
            const double rel = std::abs(f - prev_f) / std::max(f, prev_f);
            if (rel > 0.05)
                throw GridTooCoarse("covariance: S varies by " + std::to_string(100.0 * rel) +
                                    "% between adjacent grid points");
        }
        prev_f = f;
    }
}

}  // namespace detail

// Photon-number covariance between detectors (alpha, Delta_1) and
// (alpha', Delta_2): cov = (tau/2pi)^2 |sum_beta int_Delta S*_{ab} S_{a'b}|^2,
// Delta the filter overlap, trapezoid quadrature on the sample grid. The mode
// sum sits inside the modulus; see the fourth-moment expansion it derives
// from.
inline double covariance(const std::vector<SGridPoint>& grid, int a, int ap,
                         const DetectorFilter& f1, const DetectorFilter& f2) {
    const double lo = std::max(f1.omega_lo, f2.omega_lo);
    const double hi = std::min(f1.omega_hi, f2.omega_hi);
    if (!(lo < hi)) return 0.0;  // disjoint detectors
    detail::check_grid_smoothness(grid, a, ap, lo, hi);

    cplx integral = 0.0;
    const double tau = f1.tau;
    std::vector<const SGridPoint*> pts;
    for (const auto& p : grid)
        if (p.omega >= lo && p.omega <= hi) pts.push_back(&p);
    if (pts.size() < 2) throw GridTooCoarse("covariance: fewer than 2 grid points in overlap");
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double w = pts[i + 1]->omega - pts[i]->omega;
        integral += 0.5 * w *
                    (detail::cross_overlap(pts[i]->S, a, ap) +
                     detail::cross_overlap(pts[i + 1]->S, a, ap));
    }
    const double pref = tau / two_pi;
    return pref * pref * std::norm(integral);
}

// Photon-number variance from the band-integrated mean: super-Poissonian by
// the chaotic excess tau*Delta/2pi.
inline double variance(double mean_photon_number, const DetectorFilter& f) {
    if (mean_photon_number < 0.0) throw ConfigError("variance: <N> must be >= 0");
    return mean_photon_number * (mean_photon_number + f.tau * f.width() / two_pi);
}

inline double mean_photon_number(const std::vector<SGridPoint>& grid, int a,
                                 const DetectorFilter& f) {
    std::vector<const SGridPoint*> pts;
    for (const auto& p : grid)
        if (f.contains(p.omega)) pts.push_back(&p);
    if (pts.size() < 2) throw GridTooCoarse("mean_photon_number: fewer than 2 points in band");
    double integral = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double w = pts[i + 1]->omega - pts[i]->omega;
        integral += 0.5 * w * (flux(pts[i]->S, a) + flux(pts[i + 1]->S, a));
    }
    return f.tau * integral;
}

// Narrowband-precondition check on a sampled grid before applying the
// single-point Pearson formula.
inline double pearson_checked(const std::vector<SGridPoint>& grid, size_t index, int a, int ap,
                              const Bandwidths& bw, const DetectorFilter& f1,
                              const DetectorFilter& f2) {
    for (const auto& p : grid) {
        const bool in_band = f1.contains(p.omega) || f2.contains(p.omega);
        if (!in_band) continue;
        for (int row : {a, ap}) {
            const double f_here = detail::cross_row_sum(p.S, row);
            const double f_ref = detail::cross_row_sum(grid[index].S, row);
            if (f_ref > 0.0 && std::abs(f_here - f_ref) / f_ref > 0.01)
                throw NarrowbandViolated("pearson: S varies by more than 1% across the band");
        }
    }
    return pearson(grid[index].S, a, ap, bw);
}

// ---- laboratory frame -------------------------------------------------------

// Eq.-(13)-type frame conversion of a flux density; |.| makes the prefactor
// sign-correct for detected modes slower than the front.
inline double lab_flux(double phi_mf, double v_g_lab, double u) {
    if (v_g_lab == 0.0) throw ZeroGroupVelocity("lab_flux: zero laboratory group velocity");
    return std::abs(1.0 - u / v_g_lab) * phi_mf;
}

// One detectable out-GM branch at a given lab frequency.
struct BranchPoint {
    ModeLabel label;
    Side side;
    double omega_mf;   // > 0
    double Omega;      // signed lab frequency of the mode (negative for no)
    double K;          // signed lab wavenumber
    double vg_lab;     // detected group velocity, > 0
};

// The detectable out-GM branches: noL, uoL, loL (K > 0) and moR. Non-optical
// out modes are excluded; their flux is orders of magnitude below the optical
// window (see output metadata note).
inline std::vector<BranchPoint> lab_contributions(const StepContext& ctx, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("lab_contributions: lambda must be > 0");
    const double Omega0 = angular_from_wavelength(lambda);
    const double u = ctx.step.u();
    const double gamma = ctx.step.gamma();
    const double beta = u / speed_of_light;
    std::vector<BranchPoint> out;

    const double guard = 1e-4;  // keep clear of the resonance/band-edge asymptotes

    // noL: conjugate branch, Omega = -Omega0
    {
        const auto& b = ctx.branch_L;
        if (Omega0 > b.Omega_ph * (1.0 + 1e-12) && Omega0 < b.Omega_hi * (1.0 - guard)) {
            const double n = ctx.left.index(Omega0);
            const double w = gamma * Omega0 * (beta * n - 1.0);
            if (w > 0.0)
                out.push_back({ModeLabel::no, Side::L, w, -Omega0, -Omega0 * n / speed_of_light,
                               ctx.left.group_velocity_lab(Omega0)});
        }
    }
    // uoL: co-propagating, between the UV group match and the phase horizon
    {
        const auto& b = ctx.branch_L;
        if (Omega0 > b.Omega_uv && Omega0 < b.Omega_ph * (1.0 - 1e-12)) {
            const double n = ctx.left.index(Omega0);
            const double w = gamma * Omega0 * (1.0 - beta * n);
            if (w > 0.0)
                out.push_back({ModeLabel::uo, Side::L, w, Omega0, Omega0 * n / speed_of_light,
                               ctx.left.group_velocity_lab(Omega0)});
        }
    }
    // loL: co-propagating, below the IR group match (K > 0 part only)
    {
        const auto& b = ctx.branch_L;
        if (Omega0 > b.Omega_lo * (1.0 + guard) && Omega0 < b.Omega_ir) {
            const double n = ctx.left.index(Omega0);
            const double w = gamma * Omega0 * (1.0 - beta * n);
            if (w > 0.0)
                out.push_back({ModeLabel::lo, Side::L, w, Omega0, Omega0 * n / speed_of_light,
                               ctx.left.group_velocity_lab(Omega0)});
        }
    }
    // moR: the only out GM escaping ahead of the front
    {
        const auto& b = ctx.branch_R;
        if (Omega0 > b.Omega_ir && Omega0 < b.Omega_uv) {
            const MediumSpec& m = ctx.step.right_medium();
            const double n = m.index(Omega0);
            const double w = gamma * Omega0 * (1.0 - beta * n);
            if (w > 0.0)
                out.push_back({ModeLabel::mo, Side::R, w, Omega0, Omega0 * n / speed_of_light,
                               m.group_velocity_lab(Omega0)});
        }
    }
    return out;
}

struct LabContribution {
    std::string mode;
    double omega_mf;
    double Omega;
    double K;
    double vg_lab;
    double Phi_lambda;  // this mode's share
};

struct LabSpectrumPoint {
    double lambda = 0.0;
    double Phi_lambda = 0.0;  // photons per unit time per unit wavelength (global units)
    std::vector<LabContribution> contributing_modes;
};

inline LabSpectrumPoint lab_spectrum_point(const StepContext& ctx, double lambda) {
    const auto contribs = lab_contributions(ctx, lambda);
    if (contribs.empty())
        throw NoContribution("lab_spectrum: no detectable out mode at lambda=" +
                             std::to_string(lambda));
    LabSpectrumPoint p;
    p.lambda = lambda;
    const double jac = two_pi * speed_of_light / (lambda * lambda);
    for (const auto& cb : contribs) {
        const auto res = scatter_at(ctx, cb.omega_mf);
        const auto row = res.out_row(cb.label);
        if (!row) continue;  // at the exact fold the defining mode is gone
        const double phi = flux(res, *row);
        const double val = jac * lab_flux(phi, cb.vg_lab, ctx.step.u());
        p.Phi_lambda += val;
        p.contributing_modes.push_back({std::string(label_name(cb.label)) + side_name(cb.side),
                                        cb.omega_mf, cb.Omega, cb.K, cb.vg_lab, val});
    }
    return p;
}

// Full lab spectrum on a wavelength grid; points that land on interval edges
// or map to no branch are skipped (reported with Phi = NaN would break CSV
// determinism, so they are simply omitted).
inline std::vector<LabSpectrumPoint> lab_spectrum(const StepContext& ctx,
                                                  const std::vector<double>& lambda_grid,
                                                  unsigned workers = 1) {
    std::vector<std::optional<LabSpectrumPoint>> tmp(lambda_grid.size());
    parallel_for(lambda_grid.size(), workers, [&](size_t i) {
        try {
            tmp[i] = lab_spectrum_point(ctx, lambda_grid[i]);
        } catch (const ComputeError&) {
            // frequencies pinned to an interval edge (or mapping to no
            // branch) are skipped; the refined grid steps across them
        }
    });
    std::vector<LabSpectrumPoint> out;
    out.reserve(lambda_grid.size());
    for (auto& t : tmp)
        if (t) out.push_back(std::move(*t));
    return out;
}

inline std::vector<SpectrumPoint> mf_spectrum(const StepContext& ctx,
                                              const std::vector<double>& omega_grid,
                                              unsigned workers = 1) {
    std::vector<std::optional<SpectrumPoint>> tmp(omega_grid.size());
    parallel_for(omega_grid.size(), workers, [&](size_t i) {
        try {
            tmp[i] = spectrum_point(scatter_at(ctx, omega_grid[i]));
        } catch (const ComputeError&) {
        }
    });
    std::vector<SpectrumPoint> out;
    out.reserve(omega_grid.size());
    for (auto& t : tmp)
        if (t) out.push_back(std::move(*t));
    return out;
}

// ---- grids -------------------------------------------------------------------

inline std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo && n >= 2)) throw ConfigError("geometric_grid: bad parameters");
    std::vector<double> g(static_cast<size_t>(n));
    const double r = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo * std::exp(r * i);
    return g;
}

inline std::vector<double> linear_grid(double lo, double hi, int n) {
    if (!(hi > lo && n >= 2)) throw ConfigError("linear_grid: bad parameters");
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1.0);
    return g;
}

namespace detail {

inline void drop_edge_neighbourhood(std::vector<double>& g, const StepContext& ctx) {
    g.erase(std::remove_if(g.begin(), g.end(),
                           [&](double w) { return ctx.edge_distance(w) < 2e-9; }),
            g.end());
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-13 * b; }),
            g.end());
}

}  // namespace detail

// Geometric base grid plus linear refinement across each horizon interval;
// the intervals can be micro-eV narrow, so a fixed grid would miss them.
inline std::vector<double> refined_omega_grid(const StepContext& ctx, double lo, double hi,
                                              int n_base, int n_interval = 160) {
    auto g = geometric_grid(lo, hi, n_base);
    if (ctx.intervals) {
        const auto& h = *ctx.intervals;
        for (auto [a, b] : {std::pair{h.omega_min_L, h.omega_min_R},
                            std::pair{h.omega_max_L, h.omega_max_R}}) {
            const double w = b - a;
            const auto fine = linear_grid(a - 2.0 * w, b + 2.0 * w, n_interval);
            g.insert(g.end(), fine.begin(), fine.end());
        }
    }
    detail::drop_edge_neighbourhood(g, ctx);
    return g;
}

// Wavelength grid with refinement around the velocity-matched crossovers and
// the horizon-interval branch images.
inline std::vector<double> lab_lambda_grid(const StepContext& ctx, double lo, double hi,
                                           int n_base, int n_fine = 240) {
    auto g = geometric_grid(lo, hi, n_base);
    auto add_window = [&](double a, double b, int n) {
        if (!(b > a)) return;
        const double pad = 0.15 * (b - a);
        const double wa = std::max(lo, a - pad), wb = std::min(hi, b + pad);
        if (!(wb > wa)) return;  // window outside the requested range
        const auto fine = linear_grid(wa, wb, n);
        g.insert(g.end(), fine.begin(), fine.end());
    };
    // UV crossover gap between the two media; an extra dense patch resolves
    // the dip floor inside the gap itself (fractions of a nanometre at small
    // delta_n)
    const double luvL = wavelength_from_angular(ctx.branch_L.Omega_uv);
    const double luvR = wavelength_from_angular(ctx.branch_R.Omega_uv);
    add_window(std::min(luvL, luvR) - 3e-9, std::max(luvL, luvR) + 3e-9, n_fine);
    add_window(std::min(luvL, luvR), std::max(luvL, luvR), std::max(96, n_fine / 2));
    // IR crossover
    const double lirL = wavelength_from_angular(ctx.branch_L.Omega_ir);
    const double lirR = wavelength_from_angular(ctx.branch_R.Omega_ir);
    add_window(std::min(lirL, lirR) * 0.98, std::max(lirL, lirR) * 1.02, n_fine);
    // branch images of the horizon intervals
    if (ctx.intervals) {
        const auto& h = *ctx.intervals;
        for (double w : {0.5 * (h.omega_min_L + h.omega_min_R),
                         0.5 * (h.omega_max_L + h.omega_max_R)}) {
            // invert the no branch around each interval midpoint
            const double gamma = ctx.step.gamma();
            const double beta = ctx.step.u() / speed_of_light;
            const auto& bl = ctx.branch_L;
            auto f = [&](double O) { return gamma * O * (beta * ctx.left.index(O) - 1.0) - w; };
            double a = bl.Omega_ph * (1.0 + 1e-9), b = bl.Omega_hi * (1.0 - 1e-4);
            if (f(a) * f(b) < 0.0) {
                const double O0 = detail::bisect(f, a, b, 1e-13, "no-branch image");
                const double lam = wavelength_from_angular(O0);
                add_window(lam * 0.997, lam * 1.003, n_fine);
            }
        }
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-13 * b; }),
            g.end());
    return g;
}

// ---- correlation maps ---------------------------------------------------------

struct CorrelationResult {
    std::string mode_a, mode_b;
    double C = 0.0;
    double cov = 0.0;
    double var_a = 0.0, var_b = 0.0;
    double g2 = 0.0;
};

struct LabCorrelationMap {
    std::vector<double> lambda_1, lambda_2;
    std::vector<std::vector<double>> C;  // C[i][j] at (lambda_1[i], lambda_2[j])
};

// C at wavelength pairs whose branch-resolved moving-frame frequencies
// coincide; zero elsewhere. The shared-omega locus is resolved to within half
// a grid cell.
inline LabCorrelationMap lab_correlation_map(const StepContext& ctx,
                                             const std::vector<double>& grid1,
                                             const std::vector<double>& grid2,
                                             unsigned workers = 1) {
    LabCorrelationMap map;
    map.lambda_1 = grid1;
    map.lambda_2 = grid2;
    map.C.assign(grid1.size(), std::vector<double>(grid2.size(), 0.0));

    auto contribs_of = [&](const std::vector<double>& grid) {
        std::vector<std::vector<BranchPoint>> c(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) c[i] = lab_contributions(ctx, grid[i]);
        return c;
    };
    const auto c1 = contribs_of(grid1);
    const auto c2 = contribs_of(grid2);

    auto cell_width = [&](const std::vector<double>& grid,
                          const std::vector<std::vector<BranchPoint>>& cs, size_t i,
                          const BranchPoint& bp) {
        // local |d omega/d lambda| estimated from the neighbouring cells
        double dl = 0.0;
        if (i + 1 < grid.size()) dl = std::max(dl, grid[i + 1] - grid[i]);
        if (i > 0) dl = std::max(dl, grid[i] - grid[i - 1]);
        double dw = 0.0;
        for (size_t j : {i > 0 ? i - 1 : i, std::min(i + 1, grid.size() - 1)}) {
            for (const auto& other : cs[j])
                if (other.label == bp.label && other.side == bp.side)
                    dw = std::max(dw, std::abs(other.omega_mf - bp.omega_mf));
        }
        (void)dl;
        return dw;
    };

    parallel_for(grid1.size(), workers, [&](size_t i) {
        for (size_t j = 0; j < grid2.size(); ++j) {
            double best = 0.0;
            for (const auto& b1 : c1[i]) {
                for (const auto& b2 : c2[j]) {
                    const double tol = 0.5 * (cell_width(grid1, c1, i, b1) +
                                              cell_width(grid2, c2, j, b2));
                    const double floor = 1e-12 * std::max(b1.omega_mf, b2.omega_mf);
                    if (std::abs(b1.omega_mf - b2.omega_mf) > std::max(tol, floor)) continue;
                    try {
                        const auto res = scatter_at(ctx, 0.5 * (b1.omega_mf + b2.omega_mf));
                        const auto r1 = res.out_row(b1.label);
                        const auto r2 = res.out_row(b2.label);
                        if (!r1 || !r2) continue;
                        const double val =
                            (b1.label == b2.label && b1.side == b2.side)
                                ? self_correlation(flux(res, *r1))
                                : pearson(res, *r1, *r2);
                        best = std::max(best, val);
                    } catch (const ComputeError&) {
                    }
                }
            }
            map.C[i][j] = best;
        }
    });
    return map;
}

// ---- Table-style summary row ---------------------------------------------------

struct HorizonEmission {
    double lambda_no = 0.0;       // negative-norm partner wavelength, m
    double lambda_partner = 0.0;  // escaping positive-norm mode wavelength, m
    double Phi_no = 0.0;
    double Phi_partner = 0.0;
    double C = 0.0;
};

struct TableRow {
    double u_over_c = 0.0;
    double lambda_c = 0.0;  // 0 when the row was keyed by velocity
    double whi_width_ev = 0.0;
    double bhi_width_ev = 0.0;
    // set when the subluminal interval is narrower than the delta_n shift, so
    // the white and black hole intervals overlap and the a..e taxonomy breaks
    bool intervals_overlap = false;
    HorizonEmission white_hole;  // partner: loL
    HorizonEmission black_hole;  // partner: moR
};

namespace detail {

inline HorizonEmission horizon_emission(const StepContext& ctx, double omega_a, double omega_b,
                                        ModeLabel partner, int samples) {
    HorizonEmission e;
    const double u = ctx.step.u();
    const double margin = 5e-9;
    const auto ws = linear_grid(omega_a * (1.0 + margin), omega_b * (1.0 - margin), samples);
    for (double w : ws) {
        ScatteringResult res;
        try {
            res = scatter_at(ctx, w);
        } catch (const ComputeError&) {
            continue;
        }
        const auto row_no = res.out_row(ModeLabel::no);
        const auto row_p = res.out_row(partner);
        if (row_no) {
            const auto& s = res.out_slots[static_cast<size_t>(*row_no)];
            const double lam = wavelength_from_angular(std::abs(s.Omega));
            const double v = two_pi * speed_of_light / (lam * lam) *
                             lab_flux(flux(res, *row_no), s.vg_lab, u);
            if (v > e.Phi_no) {
                e.Phi_no = v;
                e.lambda_no = lam;
            }
        }
        if (row_p) {
            const auto& s = res.out_slots[static_cast<size_t>(*row_p)];
            const double lam = wavelength_from_angular(std::abs(s.Omega));
            const double v = two_pi * speed_of_light / (lam * lam) *
                             lab_flux(flux(res, *row_p), s.vg_lab, u);
            if (v > e.Phi_partner) {
                e.Phi_partner = v;
                e.lambda_partner = lam;
            }
        }
        if (row_no && row_p) e.C = std::max(e.C, pearson(res, *row_no, *row_p));
    }
    return e;
}

}  // namespace detail

inline TableRow table_row(const StepContext& ctx, double lambda_c = 0.0, int samples = 41) {
    if (!ctx.intervals) throw NoHorizon("table_row: no horizon intervals at this step");
    const auto& h = *ctx.intervals;
    TableRow row;
    row.u_over_c = ctx.step.u() / speed_of_light;
    row.lambda_c = lambda_c;
    row.whi_width_ev = ev_from_angular(h.whi_width());
    row.bhi_width_ev = ev_from_angular(h.bhi_width());
    row.intervals_overlap = h.omega_max_L < h.omega_min_R;
    row.white_hole =
        detail::horizon_emission(ctx, h.omega_min_L, h.omega_min_R, ModeLabel::lo, samples);
    row.black_hole =
        detail::horizon_emission(ctx, h.omega_max_L, h.omega_max_R, ModeLabel::mo, samples);
    return row;
}

// u from the lab-frame group velocity at the front's central wavelength.
inline double velocity_from_center_wavelength(const MediumSpec& medium, double lambda_c) {
    return medium.group_velocity_lab(angular_from_wavelength(lambda_c));
}

// Kinematic census over a frequency scan: compacted scenario sequence.
inline std::string scenario_census(const StepContext& ctx, const std::vector<double>& omegas) {
    std::string seq;
    for (double w : omegas) {
        try {
            const auto sc = classify_scenario(ctx.left, ctx.step.right_medium(), ctx.step.u(), w);
            if (seq.empty() || seq.back() != sc.scenario_case) seq.push_back(sc.scenario_case);
        } catch (const ComputeError&) {
            // boundary points do not contribute to the census
        }
    }
    return seq;
}

}  // namespace horizon
