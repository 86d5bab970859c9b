#include "nvmap/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvmap/errors.hpp"
#include "nvmap/geometry.hpp"
#include "nvmap/parallel.hpp"

namespace nvmap {

double sensitivity(double beta, const GlobalParams& globals, const ExperimentConfig& config, double a_par) {
    if (beta < 0.0) throw DomainError("sensitivity: beta must be >= 0");
    if (beta == 0.0) return 0.0;
    SpinParams s{a_par, kPi * beta / config.t_beta, 0.0};
    const double gamma = decay_rate(s, globals, config.t_beta, config.t_s);
    if (!std::isfinite(gamma)) return 0.0;
    const double kts = config.k_samples * config.t_s;
    const double window = gamma > 0.0 ? -std::expm1(-gamma * kts) / gamma : kts;
    const double amp = std::abs(amplitude(globals.p0, beta));
    return amp * window / (config.t_s * std::sqrt(static_cast<double>(config.k_samples)) *
                           std::sqrt(config.t_pol + kts));
}

double optimal_beta(int k_samples) {
    if (k_samples < 2) throw DomainError("optimal_beta: K must be >= 2");
    return std::sqrt(2.0 / k_samples);
}

double sensitivity_at(const Eigen::Vector3d& x, const ExperimentConfig& config, const GlobalParams& globals,
                      const PhysicalConstants& c) {
    const double r = x.norm();
    if (!(r > 0.0)) return 0.0;
    const SpinParams hf = hyperfine_from_position(Position::from_cartesian(x), c);
    return sensitivity(measurement_gain(hf.a_perp, config.t_beta), globals, config, hf.a_par);
}

SliceMap slice_map(const ExperimentConfig& config, const GlobalParams& globals, const SliceGrid& grid,
                   const PhysicalConstants& c) {
    if (grid.n_rho < 2 || grid.n_z < 2) throw DomainError("slice_map: need >= 2 points per axis");
    SliceMap m;
    m.rho_axis.resize(grid.n_rho);
    m.z_axis.resize(grid.n_z);
    for (int i = 0; i < grid.n_rho; ++i) m.rho_axis[i] = grid.rho_max * i / (grid.n_rho - 1);
    for (int i = 0; i < grid.n_z; ++i) m.z_axis[i] = -grid.z_max + 2.0 * grid.z_max * i / (grid.n_z - 1);
    m.values.resize(grid.n_z, grid.n_rho);
    parallel_for(grid.n_z, [&](std::size_t iz) {
        for (int ir = 0; ir < grid.n_rho; ++ir)
            m.values(iz, ir) = sensitivity_at({m.rho_axis[ir], 0.0, m.z_axis[iz]}, config, globals, c);
    });
    return m;
}

namespace {

double ray_value(const ExperimentConfig& cfg, const GlobalParams& g, double theta, double r,
                 const PhysicalConstants& c) {
    return sensitivity_at({r * std::sin(theta), 0.0, r * std::cos(theta)}, cfg, g, c);
}

// Golden-section maximization of f on [lo, hi] in log r.
template <class F>
double golden_max(F f, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(lo), b = std::log(hi);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = f(std::exp(x2));
        } else {
            b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = f(std::exp(x1));
        }
    }
    return std::exp(0.5 * (a + b));
}

}  // namespace

double ray_ridge_radius(const ExperimentConfig& config, const GlobalParams& globals, double theta,
                        const PhysicalConstants& c) {
    auto f = [&](double r) { return ray_value(config, globals, theta, r, c); };
    const int n = 600;
    const double lo = 0.05e-9, hi = 50e-9;
    int best = 0;
    double fbest = -1.0;
    for (int i = 0; i <= n; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        const double v = f(r);
        if (v > fbest) { fbest = v; best = i; }
    }
    const double ra = lo * std::pow(hi / lo, std::max(0, best - 1) / static_cast<double>(n));
    const double rb = lo * std::pow(hi / lo, std::min(n, best + 1) / static_cast<double>(n));
    return golden_max(f, ra, rb);
}

double ridge_radius(const ExperimentConfig& config, const GlobalParams& globals, const PhysicalConstants& c) {
    std::vector<double> radius, value;
    for (int i = 0; i < 180; ++i) {
        const double theta = deg_to_rad(0.25 + 0.5 * i);
        const double r = ray_ridge_radius(config, globals, theta, c);
        radius.push_back(r);
        value.push_back(ray_value(config, globals, theta, r, c));
    }
    const double vmax = *std::max_element(value.begin(), value.end());
    double out = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i)
        if (value[i] >= vmax * (1.0 - 1e-6)) out = std::max(out, radius[i]);
    return out;
}

double detection_radius(const ExperimentConfig& config, const GlobalParams& globals, double threshold,
                        double theta, const PhysicalConstants& c) {
    double lo = ray_ridge_radius(config, globals, theta, c);
    if (ray_value(config, globals, theta, lo, c) < threshold) return 0.0;
    double hi = 2.0 * lo;
    while (ray_value(config, globals, theta, hi, c) >= threshold) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e-6) throw NumericalError("detection_radius: threshold never reached");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ray_value(config, globals, theta, mid, c) >= threshold ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Eigen::Vector3d Grid3D::center(int ix, int iy, int iz) const {
    const double h = spacing();
    return {-half_width + (ix + 0.5) * h, -half_width + (iy + 0.5) * h, -half_width + (iz + 0.5) * h};
}

std::vector<double> combined_sensitivity_field(const std::vector<ExperimentConfig>& configs,
                                               const GlobalParams& globals, const Grid3D& grid,
                                               const PhysicalConstants& c) {
    if (configs.empty()) throw DomainError("sensitive field: need at least one config");
    if (grid.n < 2 || !(grid.half_width > 0.0)) throw DomainError("sensitive field: invalid grid");
    for (const auto& cfg : configs) cfg.validate();
    const int n = grid.n;
    std::vector<double> field(static_cast<std::size_t>(n) * n * n, 0.0);
    parallel_for(n, [&](std::size_t iz) {
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Eigen::Vector3d x = grid.center(ix, iy, static_cast<int>(iz));
                double ss = 0.0;
                for (const auto& cfg : configs) {
                    const double s = sensitivity_at(x, cfg, globals, c);
                    ss += s * s;
                }
                field[(iz * n + iy) * n + ix] = std::sqrt(ss);
            }
    });
    return field;
}

SensitiveRegion sensitive_region(const std::vector<ExperimentConfig>& configs, const GlobalParams& globals,
                                 const Grid3D& grid, const PhysicalConstants& c) {
    const std::vector<double> field = combined_sensitivity_field(configs, globals, grid, c);
    SensitiveRegion region;
    region.voxel_volume = grid.voxel_volume();
    region.spacing = grid.spacing();
    // voxels are weighted by signal power, S^2; see README for the choice
    long double total = 0.0L;
    for (double s : field) total += static_cast<long double>(s) * s;
    if (total == 0.0L) return region;
    std::vector<std::uint32_t> order(field.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return field[a] != field[b] ? field[a] > field[b] : a < b;
    });
    const int n = grid.n;
    long double acc = 0.0L;
    for (std::uint32_t idx : order) {
        if (acc >= 0.5L * total) break;
        acc += static_cast<long double>(field[idx]) * field[idx];
        const int ix = idx % n, iy = (idx / n) % n, iz = idx / (n * n);
        region.centers.push_back(grid.center(ix, iy, iz));
    }
    return region;
}

double sensitive_volume(const std::vector<ExperimentConfig>& configs, const GlobalParams& globals,
                        const Grid3D& grid, const PhysicalConstants& c) {
    return sensitive_region(configs, globals, grid, c).volume();
}

SensitiveRegion upper_half(const SensitiveRegion& region) {
    SensitiveRegion out;
    out.voxel_volume = region.voxel_volume;
    out.spacing = region.spacing;
    for (const auto& x : region.centers)
        if (x.z() > 0.0) out.centers.push_back(x);
    return out;
}

double expected_spin_count(double volume, double density) {
    if (volume < 0.0 || density < 0.0) throw DomainError("expected_spin_count: negative input");
    return volume * density;
}

}  // namespace nvmap
