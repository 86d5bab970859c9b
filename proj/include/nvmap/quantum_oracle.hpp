#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "nvmap/sensitivity.hpp"
#include "nvmap/signal_model.hpp"

namespace nvmap {

inline constexpr int kMaxOracleNuclei = 4;

struct SpinSystem {
    std::vector<SpinParams> nuclei;
    Eigen::MatrixXd g;  // rad/s, symmetric, zero diagonal; empty means uncoupled
    double b0 = 0.2;
    double gamma_n = kConstants.gamma_n;
    void validate() const;
};

struct ProtocolSpec {
    double t_beta = 1e-6;
    double t_s = 8e-6;
    int k_samples = 800;
    int n_pulses = 1;
    double tau = 1e-6;  // pi-pulse spacing
    static ProtocolSpec from_config(const ExperimentConfig& config);
    void validate() const;
};

struct OracleDiagnostics {
    double max_trace_error = 0.0;  // max |tr(rho) - 1| over samples
    double max_step_trace_error = 0.0;  // max change of tr(rho) across one sample step
    double min_population = 0.0;
    double max_population = 0.0;
};

// Expectation-value trace of the weak-measurement protocol. The returned config carries the
// protocol's t_s, t_beta, K and the system's field.
FidTrace simulate_weak_measurement_trace(const SpinSystem& system, const ProtocolSpec& protocol, double p0,
                                         OracleDiagnostics* diag = nullptr);

struct PairStats {
    double mean = 0.0;
    double std = 0.0;
    double p_ge1 = 0.0;
};

// Poisson clusters drawn uniformly inside the region's voxels; counts pairs whose secular
// coupling exceeds the resolution.
PairStats pair_resolvability_mc(const SensitiveRegion& region, double density, double resolution_hz,
                                int trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace nvmap
