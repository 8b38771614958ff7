#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "horizon/constants.hpp"
#include "horizon/errors.hpp"
#include "horizon/medium.hpp"

namespace horizon {

using Vec8c = Eigen::Matrix<cplx, 8, 1>;
using Mat8c = Eigen::Matrix<cplx, 8, 8>;

enum class Side { L, R };
inline const char* side_name(Side s) { return s == Side::L ? "L" : "R"; }

enum class ModeLabel { u, uo, mo, lo, l, nl, no, nu, c };
inline const char* label_name(ModeLabel m) {
    switch (m) {
        case ModeLabel::u: return "u";
        case ModeLabel::uo: return "uo";
        case ModeLabel::mo: return "mo";
        case ModeLabel::lo: return "lo";
        case ModeLabel::l: return "l";
        case ModeLabel::nl: return "nl";
        case ModeLabel::no: return "no";
        case ModeLabel::nu: return "nu";
        case ModeLabel::c: return "c";
    }
    return "?";
}

// slot order of App. C: descending lab frequency
inline constexpr std::array<ModeLabel, 8> kSlotOrder = {
    ModeLabel::u,  ModeLabel::uo, ModeLabel::mo, ModeLabel::lo,
    ModeLabel::l,  ModeLabel::nl, ModeLabel::no, ModeLabel::nu};

enum class NormSign { plus, minus, unphysical };
inline int norm_value(NormSign n) { return n == NormSign::minus ? -1 : +1; }

struct ModeSolution {
    cplx k = 0.0;                          // moving frame, rad/m
    double omega = 0.0;                    // moving frame, rad/s
    cplx Omega = 0.0;                      // lab frame, rad/s
    cplx K = 0.0;                          // lab frame, rad/m
    std::optional<double> group_velocity_mf;  // m/s, absent iff k non-real
    NormSign norm_sign = NormSign::unphysical;
    Side side = Side::R;
    ModeLabel label = ModeLabel::c;
    int slot = -1;  // position in the descending-Omega ordering

    bool propagating() const { return group_velocity_mf.has_value(); }
    // evanescent bookkeeping: does e^{ikx} grow away from the boundary?
    bool grows_away() const {
        if (propagating()) return false;
        return side == Side::L ? k.imag() > 0.0 : k.imag() < 0.0;
    }
};

namespace detail {

// Degree-8 dispersion polynomial in the reduced wavenumber q = c k / Om0,
// with w = omega/Om0 and resonances v_i = Omega_i/Om0. Clearing the three
// Sellmeier denominators of Eq.-(1)-type rational form:
//   (q^2 - w^2) prod_i (1 - P^2/v_i^2) - sum_i 4 pi kappa_i P^2 prod_{j!=i}(...)
// with P = gamma (w + beta q) linear in q.
struct ReducedMedium {
    std::array<double, 3> kappa;
    std::array<double, 3> v;  // resonance frequencies / Om0
};

inline ReducedMedium reduce(const MediumSpec& m, double Om0) {
    ReducedMedium r;
    for (int i = 0; i < 3; ++i) {
        r.kappa[i] = m.kappa(i);
        r.v[i] = m.omega_res(i) / Om0;
    }
    return r;
}

template <int N, int M>
inline std::array<double, N + M - 1> polymul(const std::array<double, N>& a,
                                             const std::array<double, M>& b) {
    std::array<double, N + M - 1> out{};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline std::array<double, 9> dispersion_poly(const ReducedMedium& med, double w, double beta,
                                             double gamma) {
    const std::array<double, 2> P = {gamma * w, gamma * beta};      // P(q)
    const std::array<double, 3> P2 = polymul<2, 2>(P, P);
    std::array<std::array<double, 3>, 3> D;
    for (int i = 0; i < 3; ++i) {
        const double inv_v2 = 1.0 / (med.v[i] * med.v[i]);
        D[i] = {1.0 - P2[0] * inv_v2, -P2[1] * inv_v2, -P2[2] * inv_v2};
    }
    const auto D01 = polymul<3, 3>(D[0], D[1]);
    const auto D012 = polymul<5, 3>(D01, D[2]);
    const std::array<double, 3> lead = {-w * w, 0.0, 1.0};  // q^2 - w^2
    auto F = polymul<3, 7>(lead, D012);
    for (int i = 0; i < 3; ++i) {
        std::array<double, 3> t{};
        for (int n = 0; n < 3; ++n) t[n] = four_pi * med.kappa[i] * P2[n];
        std::array<double, 7> prod{};
        if (i == 0) {
            auto p = polymul<3, 3>(D[1], D[2]);
            std::copy(p.begin(), p.end(), prod.begin());
        } else if (i == 1) {
            auto p = polymul<3, 3>(D[0], D[2]);
            std::copy(p.begin(), p.end(), prod.begin());
        } else {
            auto p = polymul<3, 3>(D[0], D[1]);
            std::copy(p.begin(), p.end(), prod.begin());
        }
        std::array<double, 5> prod5;
        std::copy(prod.begin(), prod.begin() + 5, prod5.begin());
        const auto term = polymul<3, 5>(t, prod5);
        for (int n = 0; n < 7; ++n) F[n] -= term[n];
    }
    return F;
}

// Rational-form residual of the dispersion relation and its q-derivative,
// in reduced units.
inline cplx rational_residual(const ReducedMedium& med, double w, double beta, double gamma,
                              cplx q) {
    const cplx P = gamma * (w + beta * q);
    cplx s = q * q - w * w;
    for (int i = 0; i < 3; ++i) {
        const cplx D = 1.0 - (P / med.v[i]) * (P / med.v[i]);
        s -= four_pi * med.kappa[i] * P * P / D;
    }
    return s;
}

inline cplx rational_residual_dq(const ReducedMedium& med, double w, double beta, double gamma,
                                 cplx q) {
    const cplx P = gamma * (w + beta * q);
    cplx s = 2.0 * q;
    for (int i = 0; i < 3; ++i) {
        const cplx D = 1.0 - (P / med.v[i]) * (P / med.v[i]);
        s -= gamma * beta * four_pi * med.kappa[i] * 2.0 * P / (D * D);
    }
    return s;
}

inline double residual_scale(const ReducedMedium& med, double w, double beta, double gamma,
                             cplx q) {
    const cplx P = gamma * (w + beta * q);
    double s = std::abs(q * q) + w * w;
    for (int i = 0; i < 3; ++i) {
        const cplx D = 1.0 - (P / med.v[i]) * (P / med.v[i]);
        s += std::abs(four_pi * med.kappa[i] * P * P / D);
    }
    return s;
}

}  // namespace detail

// All eight wavenumber solutions of the moving-frame dispersion relation at
// omega, as complex k in rad/m. Companion-matrix eigenvalues polished by
// Newton iterations on the rational form; conjugate pairs are exact by
// re-symmetrisation.
inline std::array<cplx, 8> dispersion_roots(const MediumSpec& medium, double u, double omega) {
    if (!(omega > 0.0)) throw ConfigError("dispersion_roots: omega must be > 0");
    if (!(u > 0.0 && u < speed_of_light)) throw ConfigError("dispersion_roots: need 0 < u < c");
    const double Om0 = medium.omega_res(2);
    const double w = omega / Om0;
    const double beta = u / speed_of_light;
    const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
    const auto med = detail::reduce(medium, Om0);
    const auto F = detail::dispersion_poly(med, w, beta, gamma);
    if (std::abs(F[8]) < 1e-300) throw ComputeError("dispersion_roots: vanishing leading coefficient");

    Mat8c comp = Mat8c::Zero();
    for (int i = 0; i < 7; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < 8; ++i) comp(i, 7) = -F[i] / F[8];
    Eigen::ComplexEigenSolver<Mat8c> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw ComputeError("dispersion_roots: eigensolver failed");

    std::array<cplx, 8> q;
    for (int i = 0; i < 8; ++i) q[i] = es.eigenvalues()(i);

    for (auto& qi : q) {
        cplx best = qi;
        double best_res = std::abs(detail::rational_residual(med, w, beta, gamma, qi));
        for (int it = 0; it < 6; ++it) {
            const cplx r = detail::rational_residual(med, w, beta, gamma, qi);
            const cplx dr = detail::rational_residual_dq(med, w, beta, gamma, qi);
            if (std::abs(dr) == 0.0) break;
            qi -= r / dr;
            const double res = std::abs(detail::rational_residual(med, w, beta, gamma, qi));
            if (res < best_res) {
                best_res = res;
                best = qi;
            }
        }
        qi = best;
        const double rel = best_res / detail::residual_scale(med, w, beta, gamma, qi);
        if (!(rel < 1e-10))
            throw ComputeError("dispersion_roots: root residual " + std::to_string(rel) +
                               " above tolerance at omega=" + std::to_string(omega));
    }

    // real snap: |Im k| < 1e-9 |Re k| + 1e-3 rad/m, expressed in q units
    const double abs_floor = 1e-3 * speed_of_light / Om0;
    for (auto& qi : q)
        if (std::abs(qi.imag()) < 1e-9 * std::abs(qi.real()) + abs_floor) qi = cplx(qi.real(), 0.0);

    // degenerate-root guard: coincident solutions signal a branch extremum;
    // the threshold sits well below the root splitting at the near-edge
    // frequencies the scattering layer still accepts
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j)
            if (std::abs(q[i] - q[j]) < 3e-8 * std::max(1.0, std::abs(q[i])))
                throw DegenerateRoot("dispersion_roots: coincident roots at omega=" +
                                     std::to_string(omega) + "; nudge omega off the extremum");

    // pair complex roots by conjugation and make the pairing exact
    std::vector<int> cidx;
    for (int i = 0; i < 8; ++i)
        if (q[i].imag() != 0.0) cidx.push_back(i);
    if (cidx.size() % 2 != 0)
        throw ComputeError("dispersion_roots: unpaired complex root at omega=" +
                           std::to_string(omega));
    std::vector<bool> used(cidx.size(), false);
    for (size_t a = 0; a < cidx.size(); ++a) {
        if (used[a]) continue;
        size_t best = a;
        double best_d = 1e300;
        for (size_t b = a + 1; b < cidx.size(); ++b) {
            if (used[b]) continue;
            const double d = std::abs(q[cidx[a]] - std::conj(q[cidx[b]]));
            if (d < best_d) {
                best_d = d;
                best = b;
            }
        }
        if (best == a || !(best_d < 1e-6 * std::max(1.0, std::abs(q[cidx[a]]))))
            throw ComputeError("dispersion_roots: complex roots fail conjugate pairing");
        used[a] = used[best] = true;
        const cplx mean(0.5 * (q[cidx[a]].real() + q[cidx[best]].real()),
                        0.5 * (q[cidx[a]].imag() - q[cidx[best]].imag()));
        q[cidx[a]] = mean;
        q[cidx[best]] = std::conj(mean);
    }

    std::array<cplx, 8> k;
    const double scale = Om0 / speed_of_light;
    for (int i = 0; i < 8; ++i) k[i] = q[i] * scale;
    return k;
}

// dw/dk by implicit differentiation of the dispersion relation at an on-shell
// real (omega, k). Raises ZeroDenominator at a branch extremum, where the
// vanishing group velocity makes the mode normalisation undefined; vg_floor
// sets how close to the extremum a caller is willing to operate.
inline double group_velocity(const MediumSpec& medium, double u, double omega, double k,
                             double vg_floor = 1e-5 * speed_of_light) {
    const double gamma = 1.0 / std::sqrt(1.0 - (u / speed_of_light) * (u / speed_of_light));
    const double P = gamma * (omega + u * k);
    double Q = 0.0;
    for (const auto& r : medium.resonances()) {
        const double d = 1.0 - (P / r.omega_res) * (P / r.omega_res);
        Q += four_pi * r.kappa / (d * d);
    }
    const double num = speed_of_light * speed_of_light * k - gamma * u * P * Q;
    const double den = omega + gamma * P * Q;
    if (std::abs(den) < 1e-14 * (std::abs(omega) + std::abs(gamma * P * Q)))
        throw ZeroDenominator("group_velocity: dk/domega singular");
    const double vg = num / den;
    if (std::abs(vg) < vg_floor)
        throw ZeroDenominator("group_velocity: branch extremum (v_g ~ 0) at omega=" +
                              std::to_string(omega));
    return vg;
}

// Assigns slots and labels to the eight solutions of one side at one omega:
// descending Re(Omega) with the slot order u, uo, mo, lo, l, nl, no, nu;
// complex conjugate pairs are labelled c and keep their rank positions.
inline void label_modes(std::array<ModeSolution, 8>& modes) {
    std::sort(modes.begin(), modes.end(), [](const ModeSolution& a, const ModeSolution& b) {
        if (a.Omega.real() != b.Omega.real()) return a.Omega.real() > b.Omega.real();
        return a.k.imag() > b.k.imag();  // deterministic order inside a conjugate pair
    });
    for (int i = 0; i + 1 < 8; ++i) {
        if (!modes[i].propagating() || !modes[i + 1].propagating()) continue;
        const double d = std::abs(modes[i].Omega.real() - modes[i + 1].Omega.real());
        const double s = std::max(std::abs(modes[i].Omega.real()), std::abs(modes[i + 1].Omega.real()));
        if (d < 1e-10 * s)
            throw LabelAmbiguity("label_modes: propagating modes share Re(Omega) at omega=" +
                                 std::to_string(modes[i].omega));
    }
    for (int i = 0; i < 8; ++i) {
        modes[i].slot = i;
        modes[i].label = modes[i].propagating() ? kSlotOrder[i] : ModeLabel::c;
    }
}

// Solve + kinematic metadata + labels for one side.
inline std::array<ModeSolution, 8> solve_modes(const MediumSpec& medium, double u, double omega,
                                               Side side,
                                               double vg_floor = 1e-5 * speed_of_light) {
    const auto ks = dispersion_roots(medium, u, omega);
    std::array<ModeSolution, 8> modes;
    for (int i = 0; i < 8; ++i) {
        ModeSolution m;
        m.k = ks[i];
        m.omega = omega;
        auto [Omega, K] = lorentz_to_lab(omega, ks[i], u);
        m.Omega = Omega;
        m.K = K;
        m.side = side;
        if (ks[i].imag() == 0.0) {
            m.group_velocity_mf = group_velocity(medium, u, omega, ks[i].real(), vg_floor);
            m.norm_sign = Omega.real() > 0.0 ? NormSign::plus : NormSign::minus;
        } else {
            m.norm_sign = NormSign::unphysical;
        }
        modes[i] = m;
    }
    label_modes(modes);
    return modes;
}

struct KinematicScenario {
    char scenario_case = '?';  // 'a'..'e'
    int propagating_left = 0;
    int propagating_right = 0;
};

namespace detail {

// a vs e both have 6 propagating modes per side; they differ by which pair of
// optical modes merged, visible as the rank the conjugate pair occupies.
inline char horizonless_case(const std::array<ModeSolution, 8>& modes) {
    int first_c = -1;
    for (const auto& m : modes)
        if (!m.propagating()) {
            first_c = m.slot;
            break;
        }
    // pair in (mo, lo) slots: below the SbLI (case a); in (uo, mo): above (case e)
    if (first_c == 2) return 'a';
    if (first_c == 1) return 'e';
    throw InconsistentScenario("horizonless census: conjugate pair in unexpected slots");
}

inline int count_propagating(const std::array<ModeSolution, 8>& m) {
    int n = 0;
    for (const auto& x : m)
        if (x.propagating()) ++n;
    return n;
}

inline int count_positive_vg(const std::array<ModeSolution, 8>& m) {
    int n = 0;
    for (const auto& x : m)
        if (x.propagating() && *x.group_velocity_mf > 0.0) ++n;
    return n;
}

}  // namespace detail

inline KinematicScenario classify_scenario(const MediumSpec& left, const MediumSpec& right,
                                           double u, double omega,
                                           double vg_floor = 1e-5 * speed_of_light) {
    std::array<ModeSolution, 8> L, R;
    try {
        L = solve_modes(left, u, omega, Side::L, vg_floor);
        R = solve_modes(right, u, omega, Side::R, vg_floor);
    } catch (const DegenerateRoot& e) {
        throw BoundaryFrequency(std::string("classify_scenario: ") + e.what());
    } catch (const ZeroDenominator& e) {
        throw BoundaryFrequency(std::string("classify_scenario: ") + e.what());
    }
    KinematicScenario sc;
    sc.propagating_left = detail::count_propagating(L);
    sc.propagating_right = detail::count_propagating(R);
    const int posL = detail::count_positive_vg(L);
    const int posR = detail::count_positive_vg(R);
    if (posL > 1 || posR > 1)
        throw InconsistentScenario("classify_scenario: more than one escaping mode per side");

    if (sc.propagating_left == 8 && sc.propagating_right == 8 && posL == 1 && posR == 1)
        sc.scenario_case = 'c';
    else if (sc.propagating_left == 8 && sc.propagating_right == 6 && posL == 1 && posR == 0)
        sc.scenario_case = 'b';
    else if (sc.propagating_left == 6 && sc.propagating_right == 8 && posL == 0 && posR == 1)
        sc.scenario_case = 'd';
    else if (sc.propagating_left == 6 && sc.propagating_right == 6 && posL == 0 && posR == 0) {
        const char cl = detail::horizonless_case(L);
        const char cr = detail::horizonless_case(R);
        if (cl != cr)
            throw BoundaryFrequency("classify_scenario: sides disagree near interval edge");
        sc.scenario_case = cl;
    } else {
        throw InconsistentScenario("classify_scenario: unrecognised mode census (" +
                                   std::to_string(sc.propagating_left) + "," +
                                   std::to_string(sc.propagating_right) + ")");
    }
    return sc;
}

inline KinematicScenario classify_scenario(const StepConfig& step, double omega) {
    return classify_scenario(left_medium(step), step.right_medium(), step.u(), omega);
}

// ---- optical branch geometry in the lab frame ----------------------------

// Per-side description of the optical branch: its lab-frequency window, the
// two group-velocity-matched points (moving-frame extrema) and the phase
// horizon. Drives horizon intervals and the lab-frame branch inversions.
struct OpticalBranch {
    double Omega_lo = 0.0;      // n^2 zero above the IR resonance (band edge)
    double Omega_hi = 0.0;      // second resonance (UV end of the window)
    double Omega_ir = 0.0;      // IR group match: v_g,lab = u
    double Omega_uv = 0.0;      // UV group match
    double Omega_ph = 0.0;      // phase horizon: v_ph = u
    double omega_min = 0.0;     // moving-frame branch minimum
    double omega_max = 0.0;     // moving-frame branch maximum
    double group_index_min = 0.0;

    // moving-frame frequency of the co-propagating branch point at Omega
    double omega_mf_co(const MediumSpec& m, double u, double Omega) const {
        const double gamma = 1.0 / std::sqrt(1.0 - (u / speed_of_light) * (u / speed_of_light));
        return gamma * Omega * (1.0 - (u / speed_of_light) * m.index(Omega));
    }
};

namespace detail {

template <typename F>
inline double bisect(F f, double lo, double hi, double xtol_rel, const char* what) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw ComputeError(std::string("bisect: no sign change for ") + what);
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < xtol_rel * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline OpticalBranch optical_branch(const MediumSpec& m, double u) {
    OpticalBranch b;
    const double O1 = m.omega_res(0), O2 = m.omega_res(1);
    b.Omega_lo = detail::bisect([&](double O) { return m.n_squared(O); }, O1 * (1.0 + 1e-9),
                                O2 * (1.0 - 1e-9), 1e-14, "optical band edge");
    b.Omega_hi = O2;

    // single group-index minimum between the diverging ends of the window
    double lo = b.Omega_lo * (1.0 + 1e-6), hi = O2 * (1.0 - 1e-6);
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (m.group_index(m1) < m.group_index(m2))
            hi = m2;
        else
            lo = m1;
        if (hi - lo < 1e-14 * hi) break;
    }
    const double O_min = 0.5 * (lo + hi);
    b.group_index_min = m.group_index(O_min);

    const double ng_target = speed_of_light / u;
    if (!(b.group_index_min < ng_target))
        throw NoHorizon("optical_branch: no group-velocity match at this u (min group index " +
                        std::to_string(b.group_index_min) + ")");
    b.Omega_ir = detail::bisect([&](double O) { return m.group_index(O) - ng_target; },
                                b.Omega_lo * (1.0 + 1e-6), O_min, 1e-14, "IR group match");
    b.Omega_uv = detail::bisect([&](double O) { return m.group_index(O) - ng_target; }, O_min,
                                O2 * (1.0 - 1e-6), 1e-14, "UV group match");
    b.Omega_ph = detail::bisect([&](double O) { return m.index(O) - speed_of_light / u; },
                                b.Omega_lo * (1.0 + 1e-6), O2 * (1.0 - 1e-6), 1e-14,
                                "phase horizon");
    b.omega_min = b.omega_mf_co(m, u, b.Omega_ir);
    b.omega_max = b.omega_mf_co(m, u, b.Omega_uv);
    return b;
}

struct HorizonIntervals {
    double omega_min_L = 0.0, omega_min_R = 0.0;  // WHI
    double omega_max_L = 0.0, omega_max_R = 0.0;  // BHI
    double whi_width() const { return omega_min_R - omega_min_L; }
    double bhi_width() const { return omega_max_R - omega_max_L; }
};

inline HorizonIntervals horizon_intervals(const StepConfig& step) {
    const auto bl = optical_branch(left_medium(step), step.u());  // NoHorizon when no match
    const auto br = optical_branch(step.right_medium(), step.u());
    HorizonIntervals h;
    h.omega_min_L = bl.omega_min;
    h.omega_min_R = br.omega_min;
    h.omega_max_L = bl.omega_max;
    h.omega_max_R = br.omega_max;
    if (step.delta_n() == 0.0) return h;  // both intervals zero width
    if (!(h.omega_min_L < h.omega_min_R) || !(h.omega_max_L < h.omega_max_R))
        throw NoHorizon("horizon_intervals: interval collapsed or inverted");
    return h;
}

// ---- Klein-Gordon normalised local modes ----------------------------------

// Field columns in reduced units (c = 1, frequencies over the right medium's
// top resonance, hbar = 1). The match matrix and S are invariant under any
// common rescaling of the components, so only internal consistency matters.
struct LocalModeVector {
    Vec8c W;  // (A, P1, P2, P3, A', P1', P2', P3') at x = 0
    Vec8c V;  // (A, P1, P2, P3, Pi_A, Pi_P1, Pi_P2, Pi_P3)
    ModeSolution mode;
    double kg_norm_density = 0.0;  // signed, reduced units
};

namespace detail {

struct ReducedStep {
    double beta;
    double gamma;
    double Om0;  // rad/s, common scale for both sides
};

inline Vec8c mode_w(const ReducedMedium& med, const ReducedStep& rs, double w, cplx q) {
    const cplx P = rs.gamma * (w + rs.beta * q);
    Vec8c W;
    W(0) = 1.0;
    for (int i = 0; i < 3; ++i) {
        const cplx D = 1.0 - (P / med.v[i]) * (P / med.v[i]);
        W(1 + i) = cplx(0.0, 1.0) * med.kappa[i] * P / D;
    }
    const cplx ik = cplx(0.0, 1.0) * q;
    for (int i = 0; i < 4; ++i) W(4 + i) = ik * W(i);
    return W;
}

// V = U W from the frequency-domain equations of motion.
inline Vec8c mode_v(const ReducedMedium& med, const ReducedStep& rs, double w, const Vec8c& W) {
    Vec8c V;
    for (int i = 0; i < 4; ++i) V(i) = W(i);
    V(4) = cplx(0.0, -1.0) * w / four_pi * W(0);
    for (int i = 0; i < 3; ++i) {
        const double inertia = 1.0 / (med.kappa[i] * med.v[i] * med.v[i]);
        V(5 + i) = rs.gamma * W(0) +
                   cplx(0.0, -1.0) * rs.gamma * rs.gamma * w * inertia * W(1 + i) -
                   rs.beta * rs.gamma * rs.gamma * inertia * W(5 + i);
    }
    return V;
}

// i V^dag J V with J = [[0, 1],[−1, 0]] in 4x4 blocks; real by construction.
inline double kg_density(const Vec8c& V) {
    cplx s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::conj(V(i)) * V(4 + i) - std::conj(V(4 + i)) * V(i);
    return (cplx(0.0, 1.0) * s).real();
}

}  // namespace detail

inline LocalModeVector build_local_mode(const MediumSpec& medium, double u, double omega, cplx k,
                                        double Om0_scale = 0.0,
                                        double vg_floor = 1e-5 * speed_of_light) {
    const double Om0 = Om0_scale > 0.0 ? Om0_scale : medium.omega_res(2);
    detail::ReducedStep rs{u / speed_of_light,
                           1.0 / std::sqrt(1.0 - (u / speed_of_light) * (u / speed_of_light)),
                           Om0};
    const auto med = detail::reduce(medium, Om0);
    const double w = omega / Om0;
    const cplx q = k * speed_of_light / Om0;

    const cplx P = rs.gamma * (w + rs.beta * q);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(P - med.v[i]) < 1e-6 * med.v[i] || std::abs(P + med.v[i]) < 1e-6 * med.v[i])
            throw ComputeError("build_local_mode: inside resonance guard band");
    }
    const double rel = std::abs(detail::rational_residual(med, w, rs.beta, rs.gamma, q)) /
                       detail::residual_scale(med, w, rs.beta, rs.gamma, q);
    if (!(rel < 1e-8))
        throw NullSpaceDimension("build_local_mode: (omega, k) off shell, residual " +
                                 std::to_string(rel));

    LocalModeVector lm;
    lm.mode.k = k;
    lm.mode.omega = omega;
    auto [Omega, K] = lorentz_to_lab(omega, k, u);
    lm.mode.Omega = Omega;
    lm.mode.K = K;

    Vec8c W = detail::mode_w(med, rs, w, q);
    if (k.imag() == 0.0) {
        const double vg = group_velocity(medium, u, omega, k.real(), vg_floor);
        lm.mode.group_velocity_mf = vg;
        lm.mode.norm_sign = Omega.real() > 0.0 ? NormSign::plus : NormSign::minus;
        const Vec8c V0 = detail::mode_v(med, rs, w, W);
        const double rho0 = detail::kg_density(V0);
        if (rho0 == 0.0) throw NullSpaceDimension("build_local_mode: vanishing KG density");
        const double scale = 1.0 / std::sqrt(two_pi * std::abs(vg / speed_of_light) * std::abs(rho0));
        W *= scale;
    } else {
        lm.mode.norm_sign = NormSign::unphysical;
        W /= W.norm();
    }
    lm.W = W;
    lm.V = detail::mode_v(med, rs, w, W);
    lm.kg_norm_density = detail::kg_density(lm.V);
    if (lm.mode.propagating()) {
        const double expect = lm.mode.Omega.real() > 0.0 ? 1.0 : -1.0;
        const double check =
            lm.kg_norm_density * two_pi * std::abs(*lm.mode.group_velocity_mf / speed_of_light);
        if (std::abs(check - expect) > 1e-9)
            throw NullSpaceDimension("build_local_mode: norm-sign rule violated");
    }
    return lm;
}

// Full labelled, normalised mode set of one side with a shared unit scale.
inline std::array<LocalModeVector, 8> local_mode_set(const MediumSpec& medium, double u,
                                                     double omega, Side side, double Om0_scale,
                                                     double vg_floor = 1e-5 * speed_of_light) {
    const auto sols = solve_modes(medium, u, omega, side, vg_floor);
    std::array<LocalModeVector, 8> out;
    for (int i = 0; i < 8; ++i) {
        out[i] = build_local_mode(medium, u, omega, sols[i].k, Om0_scale, vg_floor);
        out[i].mode.side = side;
        out[i].mode.label = sols[i].label;
        out[i].mode.slot = sols[i].slot;
    }
    return out;
}

}  // namespace horizon
