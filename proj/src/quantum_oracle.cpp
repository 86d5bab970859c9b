#include "nvmap/quantum_oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "nvmap/errors.hpp"
#include "nvmap/geometry.hpp"
#include "nvmap/parallel.hpp"
#include "nvmap/rng.hpp"

namespace nvmap {

namespace {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

Mat pauli(char axis) {
    Mat s(2, 2);
    if (axis == 'x') s << 0, 1, 1, 0;
    else if (axis == 'y') s << 0, cd(0, -1), cd(0, 1), 0;
    else s << 1, 0, 0, -1;
    return s;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Spin-1/2 operator (Pauli / 2) acting on nucleus `which` of n.
Mat nuclear_op(char axis, int which, int n) {
    Mat out = Mat::Identity(1, 1);
    for (int i = 0; i < n; ++i) out = kron(out, i == which ? Mat(0.5 * pauli(axis)) : Mat(Mat::Identity(2, 2)));
    return out;
}

Mat propagator(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("oracle: eigendecomposition failed");
    Eigen::VectorXcd ph(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Polar projection onto the closest unitary; removes rounding drift from long operator products.
Mat nearest_unitary(const Mat& u) {
    Eigen::JacobiSVD<Mat> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

Mat electron_rotation(char axis, double angle, int dim_n) {
    Mat r = std::cos(0.5 * angle) * Mat::Identity(2, 2) - cd(0, std::sin(0.5 * angle)) * pauli(axis);
    return kron(r, Mat::Identity(dim_n, dim_n));
}

}  // namespace

void SpinSystem::validate() const {
    const int n = static_cast<int>(nuclei.size());
    if (n < 1 || n > kMaxOracleNuclei) throw DomainError("SpinSystem: oracle supports 1..4 nuclei");
    if (!(b0 > 0.0) || gamma_n == 0.0) throw DomainError("SpinSystem: invalid field or gyromagnetic ratio");
    if (g.size() != 0) {
        if (g.rows() != n || g.cols() != n) throw DomainError("SpinSystem: coupling matrix shape");
        for (int i = 0; i < n; ++i) {
            if (g(i, i) != 0.0) throw DomainError("SpinSystem: coupling diagonal must be zero");
            for (int j = 0; j < n; ++j)
                if (g(i, j) != g(j, i)) throw DomainError("SpinSystem: coupling matrix not symmetric");
        }
    }
}

ProtocolSpec ProtocolSpec::from_config(const ExperimentConfig& config) {
    config.validate();
    ProtocolSpec p;
    p.t_beta = config.t_beta;
    p.t_s = config.t_s;
    p.k_samples = config.k_samples;
    const double f0 = config.omega0() / kTwoPi;
    p.n_pulses = std::max(1, static_cast<int>(std::lround(2.0 * f0 * config.t_beta)));
    p.tau = config.t_beta / p.n_pulses;
    return p;
}

void ProtocolSpec::validate() const {
    if (!(t_beta > 0.0) || !(t_s >= t_beta)) throw DomainError("ProtocolSpec: need 0 < t_beta <= t_s");
    if (k_samples < 2) throw DomainError("ProtocolSpec: k_samples < 2");
    if (n_pulses < 1 || !(tau > 0.0) || n_pulses * tau > t_beta * (1.0 + 1e-9))
        throw DomainError("ProtocolSpec: pulses do not fit inside t_beta");
}

FidTrace simulate_weak_measurement_trace(const SpinSystem& system, const ProtocolSpec& protocol, double p0,
                                         OracleDiagnostics* diag) {
    system.validate();
    protocol.validate();
    if (!(p0 > 0.0 && p0 <= 1.0)) throw DomainError("oracle: p0 must lie in (0, 1]");
    const int n = static_cast<int>(system.nuclei.size());
    const int dim = 1 << n;
    const double w0 = std::abs(system.gamma_n) * system.b0;

    // Nuclear Hamiltonians for m_S = 0 and m_S = -1.
    Mat h0 = Mat::Zero(dim, dim), h1 = Mat::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        const auto& s = system.nuclei[i];
        const Mat iz = nuclear_op('z', i, n);
        const Mat hf = s.a_par * iz + s.a_perp * (std::cos(s.phi) * nuclear_op('x', i, n) + std::sin(s.phi) * nuclear_op('y', i, n));
        h0 -= w0 * iz;
        h1 -= w0 * iz + hf;
    }
    if (system.g.size() != 0) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (system.g(i, j) == 0.0) continue;
                const Mat hc = system.g(i, j) * (nuclear_op('z', i, n) * nuclear_op('z', j, n) -
                                                  0.5 * (nuclear_op('x', i, n) * nuclear_op('x', j, n) +
                                                         nuclear_op('y', i, n) * nuclear_op('y', j, n)));
                h0 += hc;
                h1 += hc;
            }
    }

    // Electron basis: |0> (m_S = 0), |1> (m_S = -1).
    Mat hfull = Mat::Zero(2 * dim, 2 * dim);
    hfull.topLeftCorner(dim, dim) = h0;
    hfull.bottomRightCorner(dim, dim) = h1;
    const double tau = protocol.tau;
    const Mat u_half = propagator(hfull, 0.5 * tau), u_tau = propagator(hfull, tau);
    const Mat pi_x = electron_rotation('x', kPi, dim);
    Mat ub = u_half;
    for (int i = 0; i < protocol.n_pulses; ++i) {
        ub = pi_x * ub;
        ub = (i < protocol.n_pulses - 1 ? u_tau : u_half) * ub;
    }
    // Free evolution between readout blocks, half in each electron branch.
    const double rest = protocol.t_s - protocol.n_pulses * tau;
    const Mat block =
        nearest_unitary(electron_rotation('y', 0.5 * kPi, dim) * ub * electron_rotation('x', 0.5 * kPi, dim));
    const Mat b00 = block.topLeftCorner(dim, dim), b10 = block.bottomLeftCorner(dim, dim);
    const Mat ud = nearest_unitary(propagator(h1, 0.5 * rest) * propagator(h0, 0.5 * rest));
    const Mat ud_adj = ud.adjoint();

    Mat rho = Mat::Identity(1, 1);
    const Mat single = 0.5 * (Mat(Mat::Identity(2, 2)) + p0 * pauli('x'));
    for (int i = 0; i < n; ++i) rho = kron(rho, single);

    FidTrace out;
    out.config.b0 = system.b0;
    out.config.gamma_n = system.gamma_n;
    out.config.t_s = protocol.t_s;
    out.config.t_beta = protocol.t_beta;
    out.config.k_samples = protocol.k_samples;
    out.samples.resize(protocol.k_samples);
    double max_trace_err = 0.0, max_step_err = 0.0, min_pop = 1.0, max_pop = 0.0;
    double prev_trace = rho.trace().real();
    for (int k = 0; k < protocol.k_samples; ++k) {
        rho = ud * rho * ud_adj;
        const Mat r0 = b00 * rho * b00.adjoint();
        const Mat r1 = b10 * rho * b10.adjoint();
        out.samples[k] = r1.trace().real() - 0.5;
        rho = r0 + r1;
        if (diag) {
            const double tr = rho.trace().real();
            max_trace_err = std::max(max_trace_err, std::abs(tr - 1.0));
            max_step_err = std::max(max_step_err, std::abs(tr - prev_trace));
            prev_trace = tr;
            for (int i = 0; i < dim; ++i) {
                min_pop = std::min(min_pop, rho(i, i).real());
                max_pop = std::max(max_pop, rho(i, i).real());
            }
        }
    }
    if (diag) *diag = {max_trace_err, max_step_err, min_pop, max_pop};
    return out;
}

PairStats pair_resolvability_mc(const SensitiveRegion& region, double density, double resolution_hz, int trials,
                                std::uint64_t seed, unsigned threads) {
    if (trials < 100) throw DomainError("pair_resolvability_mc: trials must be >= 100");
    if (region.centers.empty()) throw DomainError("pair_resolvability_mc: empty region");
    if (!(density >= 0.0)) throw DomainError("pair_resolvability_mc: negative density");
    if (density == 0.0) return {};
    const double lambda = density * region.volume();
    const double h = region.spacing;
    std::vector<int> counts(trials);
    parallel_for(
        trials,
        [&](std::size_t t) {
            Rng rng = make_rng(seed, {kTagPairs, static_cast<std::uint64_t>(t)});
            std::poisson_distribution<int> pois(lambda);
            std::uniform_int_distribution<std::size_t> pick(0, region.centers.size() - 1);
            std::uniform_real_distribution<double> u(-0.5, 0.5);
            const int n = pois(rng);
            std::vector<Eigen::Vector3d> pts(n);
            for (auto& p : pts) {
                const Eigen::Vector3d& c = region.centers[pick(rng)];
                const double dx = u(rng), dy = u(rng), dz = u(rng);
                p = c + h * Eigen::Vector3d(dx, dy, dz);
            }
            int c = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    if ((pts[i] - pts[j]).norm() == 0.0) continue;
                    if (nuclear_pair_coupling(pts[i], pts[j]) > resolution_hz) ++c;
                }
            counts[t] = c;
        },
        threads);
    long double s = 0.0L, q = 0.0L;
    int ge1 = 0;
    for (int c : counts) {
        s += c;
        ge1 += c >= 1;
    }
    PairStats st;
    st.mean = static_cast<double>(s / trials);
    for (int c : counts) q += (c - st.mean) * (c - st.mean);
    st.std = std::sqrt(static_cast<double>(q / (trials - 1)));
    st.p_ge1 = static_cast<double>(ge1) / trials;
    return st;
}

}  // namespace nvmap
