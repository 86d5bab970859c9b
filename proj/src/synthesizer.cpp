#include "nvmap/synthesizer.hpp"

#include <Eigen/Geometry>

#include <cmath>

#include "nvmap/errors.hpp"
#include "nvmap/rng.hpp"

namespace nvmap {

void ClusterSpec::validate() const {
    if (!(radius > 0.0)) throw DomainError("ClusterSpec: radius must be positive");
    if (!(abundance >= 0.0 && abundance <= 1.0)) throw DomainError("ClusterSpec: abundance outside [0, 1]");
    if (!(density >= 0.0)) throw DomainError("ClusterSpec: negative density");
    if (!(exclusion_radius >= 0.0)) throw DomainError("ClusterSpec: negative exclusion radius");
}

std::vector<Eigen::Vector3d> diamond_sites(double radius, double a) {
    static const double basis[8][3] = {{0, 0, 0},       {0, .5, .5},      {.5, 0, .5},      {.5, .5, 0},
                                       {.25, .25, .25}, {.25, .75, .75}, {.75, .25, .75}, {.75, .75, .25}};
    // Rows map cubic coordinates to the frame with z along [111].
    Eigen::Matrix3d rot;
    rot.row(0) = Eigen::Vector3d(1, -1, 0).normalized();
    rot.row(2) = Eigen::Vector3d(1, 1, 1).normalized();
    rot.row(1) = rot.row(2).cross(rot.row(0));
    const int m = static_cast<int>(std::ceil(radius / a)) + 1;
    std::vector<Eigen::Vector3d> out;
    for (int i = -m; i <= m; ++i)
        for (int j = -m; j <= m; ++j)
            for (int k = -m; k <= m; ++k)
                for (const auto& b : basis) {
                    const Eigen::Vector3d x = a * Eigen::Vector3d(i + b[0], j + b[1], k + b[2]);
                    if (x.norm() <= radius) out.push_back(rot * x);
                }
    return out;
}

std::vector<Position> sample_cluster(const ClusterSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng = make_rng(seed, {kTagCluster});
    std::vector<Position> out;
    if (spec.mode == ClusterMode::Lattice) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& x : diamond_sites(spec.radius)) {
            const bool keep = u(rng) < spec.abundance;  // draw for every site so streams align
            if (keep && x.norm() >= spec.exclusion_radius) out.push_back(Position::from_cartesian(x));
        }
        return out;
    }
    const double vol = 4.0 / 3.0 * kPi * spec.radius * spec.radius * spec.radius;
    std::poisson_distribution<int> pois(spec.density * vol);
    std::uniform_real_distribution<double> u(-spec.radius, spec.radius);
    const int n = pois(rng);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d x;
        do x = Eigen::Vector3d(u(rng), u(rng), u(rng));
        while (x.norm() > spec.radius);
        if (x.norm() >= spec.exclusion_radius) out.push_back(Position::from_cartesian(x));
    }
    return out;
}

void NoiseSpec::validate() const {
    if (!(contrast_eps > 0.0 && counts_c > 0.0 && repetitions > 0.0)) throw DomainError("NoiseSpec: all fields must be positive");
}

double NoiseSpec::sigma() const {
    validate();
    return 1.0 / (contrast_eps * std::sqrt(counts_c * repetitions));
}

SyntheticBundle generate_bundle(const std::vector<SpinParams>& spins, const GlobalParams& globals,
                                const std::vector<ExperimentConfig>& configs, const std::optional<NoiseSpec>& noise,
                                std::uint64_t seed) {
    if (configs.empty()) throw DomainError("generate_bundle: no configs");
    globals.validate();
    SyntheticBundle out;
    for (std::size_t d = 0; d < configs.size(); ++d) {
        FidTrace t = fid(spins, globals, configs[d]);
        if (noise) {
            const double s = noise->sigma();
            Rng rng = make_rng(seed, {kTagNoise, d});
            std::normal_distribution<double> N(0.0, s);
            for (double& x : t.samples) x += N(rng);
        }
        out.traces.push_back(std::move(t));
    }
    out.bundle = DatasetBundle::from_traces(out.traces);
    out.truth.model = {spins, globals};
    out.truth.n = static_cast<int>(spins.size());
    for (const auto& s : spins)
        out.truth.positions.push_back(s.a_perp > 0.0 || s.a_par != 0.0 ? position_from_hyperfine(s) : Position{});
    if (out.bundle.spectral_points() > out.truth.model.m_params() + 1)
        out.truth.cost = ic_cost(out.truth.model, out.bundle);
    return out;
}

SyntheticBundle generate_bundle(const std::vector<Position>& cluster, const GlobalParams& globals,
                                const std::vector<ExperimentConfig>& configs, const std::optional<NoiseSpec>& noise,
                                std::uint64_t seed) {
    std::vector<SpinParams> spins;
    for (const auto& p : cluster) {
        SpinParams s = hyperfine_from_position(p);
        if (s.phi < kPhiLo) s.phi += kTwoPi;
        if (s.phi >= kPhiHi) s.phi -= kTwoPi;
        spins.push_back(s);
    }
    return generate_bundle(spins, globals, configs, noise, seed);
}

}  // namespace nvmap
