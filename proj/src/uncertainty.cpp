#include "nvmap/uncertainty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nvmap/errors.hpp"
#include "nvmap/geometry.hpp"
#include "nvmap/parallel.hpp"
#include "nvmap/rng.hpp"

namespace nvmap {

namespace {

struct Box {
    std::vector<double> lo, hi;
};

Box refine_box(int n, const ParameterBounds* b) {
    if (b) return {b->lo(n), b->hi(n)};
    const double inf = std::numeric_limits<double>::infinity();
    Box box;
    for (int i = 0; i < n; ++i) {
        box.lo.insert(box.lo.end(), {-inf, 0.0, -inf});
        box.hi.insert(box.hi.end(), {inf, inf, inf});
    }
    box.lo.insert(box.lo.end(), {1e-6, 0.0, 0.0});
    box.hi.insert(box.hi.end(), {1.0, inf, inf});
    return box;
}

double fd_step(int idx, int n) {
    if (idx < 3 * n) {
        const int k = idx % 3;
        return k == 2 ? 1e-5 : kTwoPi * 0.05;  // rad, rad/s
    }
    const int g = idx - 3 * n;
    return g == 0 ? 1e-7 : (g == 1 ? 1e-3 : 1e-11);
}

struct Eval {
    std::vector<std::vector<double>> re, im;  // per dataset model spectra
    RssTable rss;
    double nll = 0.0;
};

Eval evaluate(const std::vector<double>& theta, int n, const DatasetBundle& b) {
    const ClusterModel m = decode_model(theta, n);
    Eval e;
    for (const auto& d : b.datasets) {
        const ComplexSpectrum s = model_spectrum(m, d.config);
        e.rss.push_back(part_rss(d.spectrum, s.re, s.im));
        e.re.push_back(s.re);
        e.im.push_back(s.im);
    }
    e.nll = neg_log_likelihood(e.rss, b.spectral_points(), m.m_params());
    return e;
}

// Derivative of every dataset's model Re/Im with respect to one parameter.
void column(const std::vector<double>& theta, int idx, int n, const DatasetBundle& b, const Box& box,
            std::vector<std::vector<double>>& dre, std::vector<std::vector<double>>& dim) {
    const double h = fd_step(idx, n);
    double xp = theta[idx] + h, xm = theta[idx] - h;
    if (xp > box.hi[idx]) xp = theta[idx];
    if (xm < box.lo[idx]) xm = theta[idx];
    const double span = xp - xm;
    const std::size_t D = b.datasets.size();
    dre.assign(D, {});
    dim.assign(D, {});
    std::vector<double> tp = theta, tm = theta;
    tp[idx] = xp;
    tm[idx] = xm;
    const ClusterModel mp = decode_model(tp, n), mm = decode_model(tm, n);
    std::vector<double> rp, ip, rm, im;
    for (std::size_t d = 0; d < D; ++d) {
        const auto& cfg = b.datasets[d].config;
        if (idx < 3 * n) {
            const int i = idx / 3;
            spin_spectrum(mp.spins[i], mp.globals, cfg, rp, ip);
            spin_spectrum(mm.spins[i], mm.globals, cfg, rm, im);
        } else {
            const ComplexSpectrum sp = model_spectrum(mp, cfg), sm = model_spectrum(mm, cfg);
            rp = sp.re; ip = sp.im; rm = sm.re; im = sm.im;
        }
        dre[d].resize(rp.size());
        dim[d].resize(rp.size());
        for (std::size_t j = 0; j < rp.size(); ++j) {
            dre[d][j] = span > 0.0 ? (rp[j] - rm[j]) / span : 0.0;
            dim[d][j] = span > 0.0 ? (ip[j] - im[j]) / span : 0.0;
        }
    }
}

}  // namespace

ClusterModel local_refine(const ClusterModel& start, const DatasetBundle& bundle, const ParameterBounds* bounds,
                          const RefineOptions& opt) {
    bundle.validate();
    const int n = start.n();
    const int P = 3 * n + 3;
    const Box box = refine_box(n, bounds);
    std::vector<double> theta = encode_model(start);
    for (int i = 0; i < P; ++i) theta[i] = std::clamp(theta[i], box.lo[i], box.hi[i]);
    Eval cur = evaluate(theta, n, bundle);
    if (!std::isfinite(cur.nll)) throw NumericalError("local_refine: non-finite cost at start");

    const std::size_t D = bundle.datasets.size();
    const int Kp = bundle.spectral_points();
    const Eigen::Index rows = static_cast<Eigen::Index>(D) * kParts * Kp;
    double lambda = 1e-3;

    for (int it = 0; it < opt.max_iters; ++it) {
        double max_rss = 0.0;
        bool all_floor = true;
        for (const auto& r : cur.rss)
            for (double s : r) {
                max_rss = std::max(max_rss, s);
                if (s > kRssFloor) all_floor = false;
            }
        if (all_floor) break;

        Eigen::MatrixXd J(rows, P);
        Eigen::VectorXd res(rows);
        std::vector<double> w(D * kParts);
        for (std::size_t d = 0; d < D; ++d)
            for (int p = 0; p < kParts; ++p)
                w[d * kParts + p] = 1.0 / std::sqrt(std::max({cur.rss[d][p], 1e-12 * max_rss, kRssFloor}));
        for (std::size_t d = 0; d < D; ++d) {
            const auto& sp = bundle.datasets[d].spectrum;
            for (int j = 0; j < Kp; ++j) {
                const double mr = cur.re[d][j], mi = cur.im[d][j];
                const Eigen::Index base = static_cast<Eigen::Index>(d) * kParts * Kp;
                res(base + j) = w[d * kParts + kRe] * (sp.re[j] - mr);
                res(base + Kp + j) = w[d * kParts + kIm] * (sp.im[j] - mi);
                res(base + 2 * Kp + j) = w[d * kParts + kPsd] * (sp.psd[j] - (mr * mr + mi * mi));
            }
        }
        std::vector<std::vector<double>> dre, dim;
        for (int c = 0; c < P; ++c) {
            column(theta, c, n, bundle, box, dre, dim);
            for (std::size_t d = 0; d < D; ++d) {
                const Eigen::Index base = static_cast<Eigen::Index>(d) * kParts * Kp;
                for (int j = 0; j < Kp; ++j) {
                    const double mr = cur.re[d][j], mi = cur.im[d][j];
                    J(base + j, c) = w[d * kParts + kRe] * dre[d][j];
                    J(base + Kp + j, c) = w[d * kParts + kIm] * dim[d][j];
                    J(base + 2 * Kp + j, c) = w[d * kParts + kPsd] * 2.0 * (mr * dre[d][j] + mi * dim[d][j]);
                }
            }
        }
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * res;
        if (g.norm() == 0.0) break;
        Eigen::VectorXd diag = A.diagonal();
        const double dmax = diag.maxCoeff();
        for (int i = 0; i < P; ++i) diag(i) = std::max(diag(i), 1e-12 * dmax + 1e-300);

        bool accepted = false;
        double prev = cur.nll;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * diag;
            const Eigen::VectorXd step = M.ldlt().solve(g);
            std::vector<double> trial = theta;
            for (int i = 0; i < P; ++i) trial[i] = std::clamp(theta[i] + step(i), box.lo[i], box.hi[i]);
            if (trial == theta) break;
            Eval e = evaluate(trial, n, bundle);
            if (std::isfinite(e.nll) && e.nll < cur.nll) {
                theta = std::move(trial);
                cur = std::move(e);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e16) break;
        }
        if (!accepted) break;
        if (std::abs(prev - cur.nll) <= opt.rel_tol * std::max(1.0, std::abs(cur.nll))) break;
    }
    return decode_model(theta, n);
}

double dv_surrogate(double r, double theta, double sigma_r, double sigma_theta, double sigma_phi) {
    return (2.0 * sigma_r) * (2.0 * r * sigma_theta) * (2.0 * r * std::sin(theta) * sigma_phi);
}

PositionErrors propagate_position_errors(const SpinParams& mean, const SpinParams& sigma, int mc_samples,
                                         std::uint64_t seed) {
    if (mc_samples < 100) throw DomainError("propagate_position_errors: need >= 100 samples");
    Rng rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> rs, ts, ps;
    rs.reserve(mc_samples);
    ts.reserve(mc_samples);
    ps.reserve(mc_samples);
    long rejected = 0;
    while (static_cast<int>(rs.size()) < mc_samples) {
        const double ap = mean.a_par + sigma.a_par * N(rng);
        const double at = mean.a_perp + sigma.a_perp * N(rng);
        const double ph = mean.phi + sigma.phi * N(rng);
        if (at <= 0.0) {
            if (++rejected > 1000L * mc_samples) throw NumericalError("propagate_position_errors: a_perp <= 0 everywhere");
            continue;
        }
        const Position p = position_from_hyperfine(ap, at, ph);
        rs.push_back(p.r);
        ts.push_back(p.theta);
        ps.push_back(p.phi);
    }
    auto stats = [](const std::vector<double>& v, double& m, double& s) {
        long double acc = 0.0L;
        for (double x : v) acc += x;
        m = static_cast<double>(acc / v.size());
        long double q = 0.0L;
        for (double x : v) q += (x - m) * (x - m);
        s = std::sqrt(static_cast<double>(q / (v.size() - 1)));
    };
    PositionErrors e;
    stats(rs, e.r_mean, e.sigma_r);
    stats(ts, e.theta_mean, e.sigma_theta);
    stats(ps, e.phi_mean, e.sigma_phi);
    e.dv = dv_surrogate(e.r_mean, e.theta_mean, e.sigma_r, e.sigma_theta, e.sigma_phi);
    e.rejected_fraction = static_cast<double>(rejected) / (rejected + mc_samples);
    if (e.rejected_fraction > 0.1)
        std::fprintf(stderr, "note: %.1f%% of a_perp samples rejected (<= 0)\n", 100.0 * e.rejected_fraction);
    return e;
}

BootstrapResult bootstrap(const FitResult& fit, const DatasetBundle& bundle, int resamples, std::uint64_t seed,
                          const BootstrapOptions& opt) {
    if (resamples < 2) throw DomainError("bootstrap: need >= 2 resamples");
    bundle.validate();
    const int n = fit.model.n();
    const std::size_t D = bundle.datasets.size();
    const auto residues = model_residues(fit.model, bundle);
    std::vector<std::array<double, 2>> sd(D);
    bool degenerate = true;
    for (std::size_t d = 0; d < D; ++d)
        for (int p = 0; p < 2; ++p) {
            const auto& v = residues[d][p];
            long double m = 0.0L, q = 0.0L;
            for (double x : v) m += x;
            m /= v.size();
            for (double x : v) q += (x - m) * (x - m);
            sd[d][p] = std::sqrt(static_cast<double>(q / (v.size() - 1)));
            if (sd[d][p] > 0.0) degenerate = false;
        }

    const std::vector<double> theta0 = encode_model(fit.model);
    const std::size_t P = theta0.size();
    BootstrapResult out;
    out.resamples = resamples;
    if (degenerate) {
        out.mean = theta0;
        out.stderr_.assign(P, 0.0);
        for (int i = 0; i < n; ++i) {
            PositionErrors pe;
            const SpinParams& s = fit.model.spins[i];
            if (s.a_perp > 0.0 || s.a_par != 0.0) {
                const Position p = position_from_hyperfine(s);
                pe.r_mean = p.r;
                pe.theta_mean = p.theta;
                pe.phi_mean = p.phi;
            }
            out.positions.push_back(pe);
        }
        return out;
    }

    std::vector<ComplexSpectrum> model_sp;
    for (const auto& d : bundle.datasets) model_sp.push_back(model_spectrum(fit.model, d.config));
    std::vector<std::vector<double>> samples(resamples);
    parallel_for(
        resamples,
        [&](std::size_t k) {
            Rng rng = make_rng(seed, {kTagBootstrap, static_cast<std::uint64_t>(k)});
            std::normal_distribution<double> N(0.0, 1.0);
            DatasetBundle synth = bundle;
            for (std::size_t d = 0; d < D; ++d) {
                auto& s = synth.datasets[d].spectrum;
                s = model_sp[d];
                for (std::size_t j = 0; j < s.size(); ++j) {
                    s.re[j] += sd[d][0] * N(rng);
                    s.im[j] += sd[d][1] * N(rng);
                    s.psd[j] = s.re[j] * s.re[j] + s.im[j] * s.im[j];
                }
                synth.datasets[d].samples.clear();
            }
            samples[k] = encode_model(local_refine(fit.model, synth));
        },
        opt.threads);

    out.mean.assign(P, 0.0);
    out.stderr_.assign(P, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
        long double m = 0.0L;
        for (const auto& s : samples) m += s[i];
        m /= resamples;
        long double q = 0.0L;
        for (const auto& s : samples) q += (s[i] - m) * (s[i] - m);
        out.mean[i] = static_cast<double>(m);
        out.stderr_[i] = std::sqrt(static_cast<double>(q / (resamples - 1)));
    }
    for (int i = 0; i < n; ++i) {
        const SpinParams mu{out.mean[3 * i], out.mean[3 * i + 1], out.mean[3 * i + 2]};
        const SpinParams sg{out.stderr_[3 * i], out.stderr_[3 * i + 1], out.stderr_[3 * i + 2]};
        out.positions.push_back(propagate_position_errors(
            mu, sg, opt.mc_samples, derive_seed(seed, {kTagPropagate, static_cast<std::uint64_t>(i)})));
    }
    return out;
}

}  // namespace nvmap
