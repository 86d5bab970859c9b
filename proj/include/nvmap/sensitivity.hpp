#pragma once

#include <Eigen/Core>
#include <vector>

#include "nvmap/constants.hpp"
#include "nvmap/signal_model.hpp"

namespace nvmap {

// Relative SNR per unit time of a single nucleus (count-rate prefactor dropped).
double sensitivity(double beta, const GlobalParams& globals, const ExperimentConfig& config, double a_par);
double optimal_beta(int k_samples);

// Sensitivity of a nucleus at a Cartesian position.
double sensitivity_at(const Eigen::Vector3d& x, const ExperimentConfig& config, const GlobalParams& globals,
                      const PhysicalConstants& c = kConstants);

struct SliceGrid {
    double rho_max = 3e-9;
    double z_max = 3e-9;
    int n_rho = 121;
    int n_z = 241;
};

struct SliceMap {
    std::vector<double> rho_axis, z_axis;  // m
    Eigen::MatrixXd values;                // rows: z, cols: rho
};

SliceMap slice_map(const ExperimentConfig& config, const GlobalParams& globals, const SliceGrid& grid,
                   const PhysicalConstants& c = kConstants);

// Radius maximizing S along the ray at polar angle theta.
double ray_ridge_radius(const ExperimentConfig& config, const GlobalParams& globals, double theta,
                        const PhysicalConstants& c = kConstants);
// Characteristic slice radius: the ridge point of maximal S, ties (within 1e-6 relative)
// resolved toward the largest radius.
double ridge_radius(const ExperimentConfig& config, const GlobalParams& globals,
                    const PhysicalConstants& c = kConstants);
// Outermost radius along the ray where S still reaches an absolute threshold.
double detection_radius(const ExperimentConfig& config, const GlobalParams& globals, double threshold,
                        double theta, const PhysicalConstants& c = kConstants);

struct Grid3D {
    double half_width = 3e-9;  // m
    int n = 120;               // voxels per axis
    double spacing() const { return 2.0 * half_width / n; }
    double voxel_volume() const { double h = spacing(); return h * h * h; }
    Eigen::Vector3d center(int ix, int iy, int iz) const;
};

// Root-sum-of-squares of the per-config sensitivities on the voxel grid (flat, x fastest).
std::vector<double> combined_sensitivity_field(const std::vector<ExperimentConfig>& configs,
                                               const GlobalParams& globals, const Grid3D& grid,
                                               const PhysicalConstants& c = kConstants);

struct SensitiveRegion {
    std::vector<Eigen::Vector3d> centers;
    double voxel_volume = 0.0;
    double spacing = 0.0;
    double volume() const { return voxel_volume * static_cast<double>(centers.size()); }
};

// Smallest voxel set (ordered by descending S) carrying half of the total signal power.
SensitiveRegion sensitive_region(const std::vector<ExperimentConfig>& configs, const GlobalParams& globals,
                                 const Grid3D& grid, const PhysicalConstants& c = kConstants);
double sensitive_volume(const std::vector<ExperimentConfig>& configs, const GlobalParams& globals,
                        const Grid3D& grid = {}, const PhysicalConstants& c = kConstants);
SensitiveRegion upper_half(const SensitiveRegion& region);

double expected_spin_count(double volume, double density);

}  // namespace nvmap
