#pragma once

#include <vector>

#include "nvmap/geometry.hpp"
#include "nvmap/uncertainty.hpp"

namespace nvmap {

inline constexpr double kAtomVolume = 5.67e-30;  // m^3 per carbon atom in diamond

double chi_square_statistic(const std::vector<double>& phis, int bins);
// Pearson chi-square p-value of the azimuths against a uniform distribution on [0, 2 pi).
double chi_square_azimuth(const std::vector<double>& phis, int bins = 6);

struct VolumeClassCounts {
    int below = 0;
    int at_or_above = 0;
};
VolumeClassCounts classify_uncertainty_volumes(const std::vector<double>& dv, double v_atom = kAtomVolume);
VolumeClassCounts classify_uncertainty_volumes(const BootstrapResult& result, double v_atom = kAtomVolume);

struct ClosestPairReport {
    std::vector<double> nearest;     // m, per spin
    std::vector<double> coupling_hz; // coupling to that nearest neighbour
    double mean_distance = 0.0;
    double mean_coupling_hz = 0.0;
};
// With use_inversion, distances use the closer of each partner's two inversion images.
ClosestPairReport closest_pair_report(const std::vector<Position>& positions, bool use_inversion = false);

}  // namespace nvmap
