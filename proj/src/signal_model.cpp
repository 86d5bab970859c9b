#include "nvmap/signal_model.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "nvmap/errors.hpp"
#include "nvmap/spectrum.hpp"

namespace nvmap {

void GlobalParams::validate() const {
    if (!(p0 > 0.0 && p0 <= 1.0)) throw DomainError("p0 must lie in (0, 1], got " + std::to_string(p0));
    if (!(t2n_star > 0.0)) throw DomainError("t2n_star must be positive");
    if (!(t_ell >= 0.0) || !std::isfinite(t_ell)) throw DomainError("t_ell must be finite and >= 0");
}

void ExperimentConfig::validate() const {
    if (!(b0 > 0.0) || !std::isfinite(b0)) throw DomainError("b0 must be positive");
    if (!(gamma_n != 0.0) || !std::isfinite(gamma_n)) throw DomainError("gamma_n must be nonzero");
    if (!(t_s > 0.0 && t_beta > 0.0 && t_pol > 0.0)) throw DomainError("t_s, t_beta, t_pol must be positive");
    if (t_beta > t_s) throw DomainError("t_beta exceeds t_s");
    if (k_samples < 2) throw DomainError("k_samples must be >= 2");
}

double ExperimentConfig::omega0() const { return std::abs(gamma_n) * b0; }

bool phi_in_fit_window(double phi) { return phi >= kPhiLo && phi < kPhiHi; }

double measurement_gain(double a_perp, double t_beta) {
    if (a_perp < 0.0 || t_beta < 0.0) throw DomainError("measurement_gain: negative input");
    return a_perp * t_beta / kPi;
}

double precession_frequency(double a_par, double a_perp, double omega0) {
    if (!(omega0 > 0.0)) throw DomainError("precession_frequency: omega0 must be positive");
    const double s = omega0 + a_par;
    return 0.5 * (omega0 + std::sqrt(s * s + a_perp * a_perp));
}

double amplitude(double p0, double beta) { return 0.5 * p0 * std::sin(beta); }

double decay_rate(const SpinParams& spin, const GlobalParams& globals, double t_beta, double t_s) {
    const double beta = spin.a_perp * t_beta / kPi;
    const double back_action = beta * beta / (4.0 * t_s);
    const double intrinsic = 1.0 / globals.t2n_star;
    const double optical = spin.a_par * spin.a_par * globals.t_ell * globals.t_ell / (2.0 * t_s);
    return back_action + intrinsic + optical;
}

void accumulate_fid(const SpinParams& spin, const GlobalParams& globals, const ExperimentConfig& config,
                    std::vector<double>& samples) {
    const double beta = measurement_gain(std::abs(spin.a_perp), config.t_beta);
    const double amp = amplitude(globals.p0, beta);
    if (amp == 0.0) return;
    const double gamma = decay_rate(spin, globals, config.t_beta, config.t_s);
    const double omega = precession_frequency(spin.a_par, spin.a_perp, config.omega0());
    const double dphi = std::fmod(omega * config.t_s, kTwoPi);
    const double damp = std::exp(-gamma * config.t_s);
    const std::complex<double> step = std::polar(damp, dphi);
    const int n = config.k_samples;
    std::complex<double> c;
    for (int k = 1; k <= n; ++k) {
        // re-anchor periodically so the recurrence error stays at rounding level
        if ((k - 1) % 64 == 0)
            c = std::polar(amp * std::exp(-gamma * config.t_s * k), std::fmod(k * dphi + spin.phi, kTwoPi));
        else
            c *= step;
        samples[k - 1] += c.real();
    }
}

FidTrace fid(const std::vector<SpinParams>& spins, const GlobalParams& globals, const ExperimentConfig& config) {
    config.validate();
    FidTrace tr{config, std::vector<double>(config.k_samples, 0.0)};
    for (const auto& s : spins) accumulate_fid(s, globals, config, tr.samples);
    return tr;
}

double relative_bin_frequency(const ExperimentConfig& config, int j) {
    const double fs = 1.0 / config.t_s;
    const double f0 = config.omega0() / kTwoPi;
    const double alias = std::fmod(f0, fs);
    const double fj = j / (config.k_samples * config.t_s);
    // an alias in the upper half of the band is observed mirrored
    return alias <= 0.5 * fs ? fj - alias : (fs - alias) - fj;
}

int bin_for_relative_frequency(const ExperimentConfig& config, double rel_hz) {
    const double fs = 1.0 / config.t_s;
    const double f0 = config.omega0() / kTwoPi;
    const double alias = std::fmod(f0, fs);
    const double fj = alias <= 0.5 * fs ? rel_hz + alias : (fs - alias) - rel_hz;
    int j = static_cast<int>(std::lround(fj * config.k_samples * config.t_s));
    const int half = config.k_samples / 2;
    if (j < 1) j = 1;
    if (j > half) j = half;
    return j;
}

ComplexSpectrum fid_to_spectrum(const FidTrace& trace) {
    const auto& cfg = trace.config;
    if (cfg.k_samples < 2 || static_cast<int>(trace.samples.size()) != cfg.k_samples)
        throw DomainError("fid_to_spectrum: trace length does not match k_samples");
    ComplexSpectrum sp;
    one_sided_dft(trace.samples, sp.re, sp.im);
    const int half = cfg.k_samples / 2;
    sp.freq_axis.resize(half);
    sp.psd.resize(half);
    for (int j = 1; j <= half; ++j) {
        sp.freq_axis[j - 1] = relative_bin_frequency(cfg, j);
        sp.psd[j - 1] = sp.re[j - 1] * sp.re[j - 1] + sp.im[j - 1] * sp.im[j - 1];
    }
    return sp;
}

}  // namespace nvmap
