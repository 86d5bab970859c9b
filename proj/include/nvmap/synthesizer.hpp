#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nvmap/annealer.hpp"
#include "nvmap/geometry.hpp"
#include "nvmap/likelihood.hpp"

namespace nvmap {

enum class ClusterMode { Lattice, Continuum };

inline constexpr double kDiamondLattice = 0.357e-9;  // m
inline constexpr double kNaturalAbundance = 0.011;
inline constexpr double kCarbon13Density = 1.94e27;  // 1/m^3

struct ClusterSpec {
    ClusterMode mode = ClusterMode::Lattice;
    double radius = 2.5e-9;          // ball around the sensor
    double abundance = kNaturalAbundance;
    double density = kCarbon13Density;
    double exclusion_radius = 0.25e-9;
    void validate() const;
};

// Diamond lattice sites (z along [111], sensor vacancy at the origin) inside the ball.
std::vector<Eigen::Vector3d> diamond_sites(double radius, double lattice_constant = kDiamondLattice);

std::vector<Position> sample_cluster(const ClusterSpec& spec, std::uint64_t seed);

struct NoiseSpec {
    double contrast_eps = 0.3;
    double counts_c = 0.05;
    double repetitions = 1e5;
    void validate() const;
    double sigma() const;  // per time sample, probability units
};

struct SyntheticBundle {
    DatasetBundle bundle;
    std::vector<FidTrace> traces;
    FitResult truth;
};

SyntheticBundle generate_bundle(const std::vector<Position>& cluster, const GlobalParams& globals,
                                const std::vector<ExperimentConfig>& configs, const std::optional<NoiseSpec>& noise,
                                std::uint64_t seed);
// Same, from hyperfine parameters directly.
SyntheticBundle generate_bundle(const std::vector<SpinParams>& spins, const GlobalParams& globals,
                                const std::vector<ExperimentConfig>& configs, const std::optional<NoiseSpec>& noise,
                                std::uint64_t seed);

}  // namespace nvmap
