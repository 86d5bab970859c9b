#pragma once

#include <limits>
#include <vector>

#include "nvmap/constants.hpp"

namespace nvmap {

struct SpinParams {
    double a_par = 0.0;   // rad/s, signed
    double a_perp = 0.0;  // rad/s, >= 0
    double phi = 0.0;     // rad
};

struct GlobalParams {
    double p0 = 1.0;
    double t2n_star = std::numeric_limits<double>::infinity();  // s
    double t_ell = 0.0;                                         // s
    void validate() const;
};

struct ExperimentConfig {
    double b0 = 0.2;                      // T
    double gamma_n = kConstants.gamma_n;  // rad/s/T
    double t_s = 8e-6;                    // s
    double t_beta = 1e-6;                 // s
    int k_samples = 800;
    double t_pol = 36e-3;                 // s
    double contrast_eps = 0.3;
    double counts_c = 0.05;

    void validate() const;
    double omega0() const;  // |gamma_n| * B0
};

struct FidTrace {
    ExperimentConfig config;
    std::vector<double> samples;
};

struct ComplexSpectrum {
    std::vector<double> freq_axis;  // Hz relative to the detection frequency
    std::vector<double> re, im, psd;
    std::size_t size() const { return re.size(); }
};

// Fit window for the azimuth, [-pi/2, 5pi/2).
inline constexpr double kPhiLo = -0.5 * kPi;
inline constexpr double kPhiHi = 2.5 * kPi;
bool phi_in_fit_window(double phi);

double measurement_gain(double a_perp, double t_beta);
double precession_frequency(double a_par, double a_perp, double omega0);
double amplitude(double p0, double beta);
double decay_rate(const SpinParams& spin, const GlobalParams& globals, double t_beta, double t_s);

FidTrace fid(const std::vector<SpinParams>& spins, const GlobalParams& globals, const ExperimentConfig& config);
// Adds one spin's contribution onto an existing buffer of length K.
void accumulate_fid(const SpinParams& spin, const GlobalParams& globals, const ExperimentConfig& config,
                    std::vector<double>& samples);

ComplexSpectrum fid_to_spectrum(const FidTrace& trace);

// Detection-frame frequency in Hz for one-sided bin j (1-based).
double relative_bin_frequency(const ExperimentConfig& config, int j);
// Bin (1..K/2) nearest to a detection-frame offset in Hz.
int bin_for_relative_frequency(const ExperimentConfig& config, double rel_hz);

}  // namespace nvmap
