#pragma once

namespace horizon {

// SI values (CODATA 2018 exact where applicable).
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double hbar_si = 1.054571817e-34;           // J s
inline constexpr double electron_volt = 1.602176634e-19;     // J
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double four_pi = 4.0 * pi;
inline constexpr double two_pi = 2.0 * pi;

inline double ev_from_angular(double omega) {
    return hbar_si * omega / electron_volt;
}

inline double wavelength_from_angular(double Omega) {
    return two_pi * speed_of_light / Omega;
}

inline double angular_from_wavelength(double lambda) {
    return two_pi * speed_of_light / lambda;
}

}  // namespace horizon
