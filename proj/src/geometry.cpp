#include "nvmap/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "nvmap/errors.hpp"

namespace nvmap {

double wrap_two_pi(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

Eigen::Vector3d Position::cartesian() const {
    const double s = std::sin(theta);
    return {r * s * std::cos(phi), r * s * std::sin(phi), r * std::cos(theta)};
}

Position Position::from_cartesian(const Eigen::Vector3d& v) {
    Position p;
    p.r = v.norm();
    p.theta = p.r > 0.0 ? std::acos(std::clamp(v.z() / p.r, -1.0, 1.0)) : 0.0;
    p.phi = wrap_two_pi(std::atan2(v.y(), v.x()));
    return p;
}

SpinParams hyperfine_from_position(const Position& pos, const PhysicalConstants& c) {
    if (!(pos.r > 0.0)) throw DomainError("hyperfine_from_position: r must be positive");
    const double k = c.hyperfine_prefactor() / (pos.r * pos.r * pos.r);
    const double ct = std::cos(pos.theta), st = std::sin(pos.theta);
    SpinParams s;
    s.a_par = k * (3.0 * ct * ct - 1.0);
    double tr = k * 3.0 * st * ct;
    s.phi = pos.phi;
    if (tr < 0.0) {
        // transverse component points the other way below the equator
        tr = -tr;
        s.phi = wrap_two_pi(pos.phi + kPi);
    }
    s.a_perp = tr;
    return s;
}

Position position_from_hyperfine(double a_par, double a_perp, double phi, const PhysicalConstants& c) {
    if (a_perp < 0.0) throw DomainError("position_from_hyperfine: a_perp must be >= 0");
    if (a_perp == 0.0 && a_par == 0.0) throw DomainError("position_from_hyperfine: undefined for a = 0");
    Position p;
    if (a_perp == 0.0) {
        p.theta = a_par > 0.0 ? 0.0 : 0.5 * kPi;
    } else {
        const double q = a_par / a_perp;
        p.theta = std::atan(0.5 * (-3.0 * q + std::sqrt(9.0 * q * q + 8.0)));
    }
    // |a| r^3 / C = sqrt(1 + 3 cos^2); avoids the a_par = 0 singularity of the textbook form
    const double ct = std::cos(p.theta);
    const double mag = std::hypot(a_par, a_perp);
    p.r = std::cbrt(c.hyperfine_prefactor() * std::sqrt(1.0 + 3.0 * ct * ct) / mag);
    p.phi = phi;
    return p;
}

double nuclear_pair_coupling(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2, const PhysicalConstants& c) {
    const Eigen::Vector3d d = x2 - x1;
    const double dist = d.norm();
    if (!(dist > 0.0)) throw DomainError("nuclear_pair_coupling: coincident positions");
    const double cz = d.z() / dist;
    return std::abs(c.homonuclear_prefactor_hz() * (1.0 - 3.0 * cz * cz) / (dist * dist * dist));
}

double nuclear_pair_coupling(const Position& p1, const Position& p2, const PhysicalConstants& c) {
    return nuclear_pair_coupling(p1.cartesian(), p2.cartesian(), c);
}

double pair_distance_respecting_inversion(const Position& p1, const Position& p2) {
    const Eigen::Vector3d a = p1.cartesian(), b = p2.cartesian();
    return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace nvmap
