#pragma once

#include <Eigen/Core>

#include "nvmap/constants.hpp"
#include "nvmap/signal_model.hpp"

namespace nvmap {

struct Position {
    double r = 1e-9;    // m
    double theta = 0.0; // rad, [0, pi]
    double phi = 0.0;   // rad, [0, 2 pi)

    Eigen::Vector3d cartesian() const;
    static Position from_cartesian(const Eigen::Vector3d& v);
};

SpinParams hyperfine_from_position(const Position& pos, const PhysicalConstants& c = kConstants);
Position position_from_hyperfine(double a_par, double a_perp, double phi, const PhysicalConstants& c = kConstants);
inline Position position_from_hyperfine(const SpinParams& s, const PhysicalConstants& c = kConstants) {
    return position_from_hyperfine(s.a_par, s.a_perp, s.phi, c);
}

// Secular homonuclear dipolar coupling magnitude in Hz.
double nuclear_pair_coupling(const Position& p1, const Position& p2, const PhysicalConstants& c = kConstants);
double nuclear_pair_coupling(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                             const PhysicalConstants& c = kConstants);

// min(|p1 - p2|, |p1 + p2|): distance allowing either point to be mirrored through the origin.
double pair_distance_respecting_inversion(const Position& p1, const Position& p2);

double wrap_two_pi(double a);

}  // namespace nvmap
