#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "horizon/constants.hpp"
#include "horizon/errors.hpp"

namespace horizon {

using cplx = std::complex<double>;

struct Resonance {
    double kappa;      // dimensionless elastic constant
    double omega_res;  // angular resonance frequency, rad/s (lab frame)
};

// One homogeneous region of the dielectric, Sellmeier model with exactly
// three resonances. All frequency arguments below are lab-frame angular
// frequencies in rad/s unless stated otherwise.
class MediumSpec {
  public:
    MediumSpec(const Resonance& r1, const Resonance& r2, const Resonance& r3)
        : res_{{r1, r2, r3}} {
        for (const auto& r : res_) {
            if (!(r.kappa > 0.0)) throw ConfigError("MediumSpec: kappa must be > 0");
            if (!(r.omega_res > 0.0)) throw ConfigError("MediumSpec: omega_res must be > 0");
        }
        if (!(res_[0].omega_res < res_[1].omega_res && res_[1].omega_res < res_[2].omega_res))
            throw ConfigError("MediumSpec: resonances must be sorted ascending by omega_res");
    }

    const std::array<Resonance, 3>& resonances() const { return res_; }
    double kappa(int i) const { return res_[i].kappa; }
    double omega_res(int i) const { return res_[i].omega_res; }

    // n^2(Omega) = 1 + sum 4*pi*kappa_i / (1 - Omega^2/Omega_i^2)
    double n_squared(double Omega) const {
        double s = 1.0;
        for (const auto& r : res_) {
            const double x = Omega / r.omega_res;
            s += four_pi * r.kappa / (1.0 - x * x);
        }
        return s;
    }

    double index(double Omega) const {
        const double n2 = n_squared(Omega);
        if (!(n2 > 0.0)) throw ComputeError("MediumSpec::index: evanescent lab frequency");
        return std::sqrt(n2);
    }

    // group index n + Omega dn/dOmega
    double group_index(double Omega) const {
        const double n = index(Omega);
        double dn2 = 0.0;
        for (const auto& r : res_) {
            const double x2 = (Omega / r.omega_res) * (Omega / r.omega_res);
            const double d = 1.0 - x2;
            dn2 += four_pi * r.kappa * (2.0 * Omega / (r.omega_res * r.omega_res)) / (d * d);
        }
        return n + Omega * dn2 / (2.0 * n);
    }

    double group_velocity_lab(double Omega) const { return speed_of_light / group_index(Omega); }

  private:
    std::array<Resonance, 3> res_;
};

// Fused silica constants from the three-resonance Sellmeier fit used
// throughout: kappa = B_i/4pi, omega_res = 2*pi*c/lambda_i.
inline MediumSpec fused_silica() {
    return MediumSpec({0.07142, 190.341e12}, {0.03246, 16.2047e15}, {0.05540, 27.537e15});
}

enum class MuMode { linear, exact };

namespace detail {

inline double index_scaled(const MediumSpec& m, double Omega, double mu) {
    // left medium: kappa -> mu*kappa, omega_res^2 -> omega_res^2/mu, so
    // n_L^2(Omega) = 1 + sum 4 pi mu kappa_i / (1 - mu Omega^2/Omega_i^2)
    double s = 1.0;
    for (const auto& r : m.resonances()) {
        const double x2 = mu * (Omega / r.omega_res) * (Omega / r.omega_res);
        s += four_pi * mu * r.kappa / (1.0 - x2);
    }
    if (!(s > 0.0)) throw ComputeError("index_scaled: evanescent reference frequency");
    return std::sqrt(s);
}

inline double mu_from_delta_n(const MediumSpec& right, double delta_n, double Omega_ref,
                              MuMode mode) {
    if (delta_n == 0.0) return 1.0;
    const double n_r = right.index(Omega_ref);
    const double mu_lin = 1.0 + 2.0 * delta_n / (n_r - 1.0 / n_r);
    if (mode == MuMode::linear) return mu_lin;
    // exact: bisect mu so that n_L(Omega_ref) - n_R(Omega_ref) = delta_n;
    // each Sellmeier term is monotone increasing in mu
    double lo = 1.0, hi = std::max(mu_lin * 4.0, 1.0 + 1e-9);
    while (index_scaled(right, Omega_ref, hi) - n_r < delta_n) {
        hi = 1.0 + (hi - 1.0) * 2.0;
        if (hi > 64.0) throw ComputeError("mu_from_delta_n: bisection bracket failed");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (index_scaled(right, Omega_ref, mid) - n_r < delta_n)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Step geometry: right medium (low index, ahead of the front) plus the index
// jump delta_n realised by the mu-scaling of the dispersion constants.
class StepConfig {
  public:
    StepConfig(MediumSpec right, double delta_n, double u,
               double reference_wavelength = 800e-9, MuMode mu_mode = MuMode::linear)
        : right_(std::move(right)),
          delta_n_(delta_n),
          u_(u),
          ref_wavelength_(reference_wavelength),
          mu_mode_(mu_mode) {
        if (!(u > 0.0 && u < speed_of_light))
            throw ConfigError("StepConfig: need 0 < u < c");
        if (delta_n < 0.0) throw ConfigError("StepConfig: delta_n must be >= 0");
        if (!(reference_wavelength > 0.0))
            throw ConfigError("StepConfig: reference wavelength must be > 0");
        const double Omega_ref = angular_from_wavelength(ref_wavelength_);
        n_ref_ = right_.index(Omega_ref);
        mu_ = detail::mu_from_delta_n(right_, delta_n_, Omega_ref, mu_mode_);
    }

    const MediumSpec& right_medium() const { return right_; }
    double delta_n() const { return delta_n_; }
    double u() const { return u_; }
    double mu() const { return mu_; }
    double n_reference() const { return n_ref_; }
    double reference_wavelength() const { return ref_wavelength_; }
    double gamma() const { return 1.0 / std::sqrt(1.0 - (u_ / speed_of_light) * (u_ / speed_of_light)); }

  private:
    MediumSpec right_;
    double delta_n_;
    double u_;
    double ref_wavelength_;
    MuMode mu_mode_;
    double n_ref_ = 0.0;
    double mu_ = 1.0;
};

// High-index region behind the front: kappa_iL = mu kappa_iR,
// Omega_iL^2 = Omega_iR^2 / mu.
inline MediumSpec left_medium(const StepConfig& step) {
    const double mu = step.mu();
    const auto& r = step.right_medium().resonances();
    const double s = 1.0 / std::sqrt(mu);
    return MediumSpec({mu * r[0].kappa, s * r[0].omega_res},
                      {mu * r[1].kappa, s * r[1].omega_res},
                      {mu * r[2].kappa, s * r[2].omega_res});
}

// One field event seen in both frames.
struct FrameEvent {
    double omega;  // moving frame, rad/s
    cplx k;        // moving frame, rad/m
    cplx Omega;    // lab frame, rad/s
    cplx K;        // lab frame, rad/m
};

inline std::pair<cplx, cplx> lorentz_to_lab(double omega, cplx k, double u) {
    if (!(std::abs(u) < speed_of_light)) throw ConfigError("lorentz_to_lab: |u| < c required");
    const double gamma = 1.0 / std::sqrt(1.0 - (u / speed_of_light) * (u / speed_of_light));
    const cplx Omega = gamma * (omega + u * k);
    const cplx K = gamma * (k + u * omega / (speed_of_light * speed_of_light));
    return {Omega, K};
}

inline std::pair<cplx, cplx> lorentz_to_moving(cplx Omega, cplx K, double u) {
    if (!(std::abs(u) < speed_of_light)) throw ConfigError("lorentz_to_moving: |u| < c required");
    const double gamma = 1.0 / std::sqrt(1.0 - (u / speed_of_light) * (u / speed_of_light));
    const cplx omega = gamma * (Omega - u * K);
    const cplx k = gamma * (K - u * Omega / (speed_of_light * speed_of_light));
    return {omega, k};
}

inline FrameEvent make_frame_event(double omega, cplx k, double u) {
    auto [Omega, K] = lorentz_to_lab(omega, k, u);
    return FrameEvent{omega, k, Omega, K};
}

// Relativistic velocity addition: lab group velocity from the moving-frame one.
inline double velocity_to_lab(double v_mf, double u) {
    return (v_mf + u) / (1.0 + u * v_mf / (speed_of_light * speed_of_light));
}

inline double velocity_to_moving(double v_lab, double u) {
    return (v_lab - u) / (1.0 - u * v_lab / (speed_of_light * speed_of_light));
}

}  // namespace horizon
