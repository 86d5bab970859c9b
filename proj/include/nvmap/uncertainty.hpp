#pragma once

#include <cstdint>
#include <vector>

#include "nvmap/annealer.hpp"
#include "nvmap/likelihood.hpp"

namespace nvmap {

struct RefineOptions {
    double rel_tol = 1e-10;
    int max_iters = 10000;
};

// Deterministic Levenberg-Marquardt descent on the likelihood term. Each outer step weights
// part (d, p) by 1/RSS_{d,p} at the current iterate, whose stationary points coincide with
// those of sum K ln RSS.
ClusterModel local_refine(const ClusterModel& start, const DatasetBundle& bundle,
                          const ParameterBounds* bounds = nullptr, const RefineOptions& opt = {});

struct PositionErrors {
    double r_mean = 0.0, theta_mean = 0.0, phi_mean = 0.0;
    double sigma_r = 0.0, sigma_theta = 0.0, sigma_phi = 0.0;
    double dv = 0.0;  // m^3
    double rejected_fraction = 0.0;
};

// Volume of the box spanned by +-1 standard error arcs.
double dv_surrogate(double r, double theta, double sigma_r, double sigma_theta, double sigma_phi);

PositionErrors propagate_position_errors(const SpinParams& mean, const SpinParams& sigma, int mc_samples,
                                         std::uint64_t seed);

struct BootstrapResult {
    std::vector<double> mean;    // encoded parameter vector
    std::vector<double> stderr_; // same layout
    std::vector<PositionErrors> positions;
    int resamples = 0;
    ClusterModel mean_model(int n) const { return decode_model(mean, n); }
};

struct BootstrapOptions {
    int mc_samples = 10000;
    unsigned threads = 0;
};

BootstrapResult bootstrap(const FitResult& fit, const DatasetBundle& bundle, int resamples, std::uint64_t seed,
                          const BootstrapOptions& opt = {});

}  // namespace nvmap
