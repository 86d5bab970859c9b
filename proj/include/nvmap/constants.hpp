#pragma once

#include <numbers>

namespace nvmap {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
    double mu0 = 4.0e-7 * kPi;          // T m / A
    double hbar = 1.054571817e-34;      // J s
    double gamma_e = 1.760859630e11;    // rad / s / T
    double gamma_n = 6.728284e7;        // rad / s / T, 13C

    // Dipolar prefactor of the electron-nuclear field, rad/s * m^3.
    constexpr double hyperfine_prefactor() const { return mu0 * hbar * gamma_e * gamma_n / (4.0 * kPi); }
    // Homonuclear prefactor in Hz * m^3.
    constexpr double homonuclear_prefactor_hz() const {
        return mu0 * gamma_n * gamma_n * hbar / (4.0 * kPi) / kTwoPi;
    }
};

inline constexpr PhysicalConstants kConstants{};

// Unit helpers: couplings are stored as angular frequencies.
constexpr double khz_to_rad(double khz) { return kTwoPi * 1e3 * khz; }
constexpr double rad_to_khz(double w) { return w / (kTwoPi * 1e3); }
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace nvmap
