#include "nvmap/likelihood.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "nvmap/errors.hpp"
#include "nvmap/spectrum.hpp"

namespace nvmap {

void DatasetBundle::validate() const {
    if (datasets.empty()) throw DataError("bundle has no datasets");
    const auto& c0 = datasets.front().config;
    std::set<double> tbetas;
    for (const auto& d : datasets) {
        d.config.validate();
        if (d.config.k_samples != c0.k_samples || d.config.t_s != c0.t_s)
            throw DataError("datasets disagree on k_samples or t_s");
        if (static_cast<int>(d.spectrum.size()) != d.config.k_samples / 2)
            throw DataError("spectrum length does not match k_samples / 2");
        if (!tbetas.insert(d.config.t_beta).second) throw DataError("duplicate t_beta in bundle");
    }
}

int DatasetBundle::spectral_points() const {
    if (datasets.empty()) throw DataError("bundle has no datasets");
    return datasets.front().config.k_samples / 2;
}

DatasetBundle DatasetBundle::from_traces(const std::vector<FidTrace>& traces) {
    DatasetBundle b;
    for (const auto& t : traces) b.datasets.push_back({t.config, fid_to_spectrum(t), t.samples});
    b.validate();
    return b;
}

void spin_spectrum(const SpinParams& spin, const GlobalParams& globals, const ExperimentConfig& config,
                   std::vector<double>& re, std::vector<double>& im) {
    thread_local std::vector<double> buf;
    buf.assign(config.k_samples, 0.0);
    accumulate_fid(spin, globals, config, buf);
    one_sided_dft(buf, re, im);
}

ComplexSpectrum model_spectrum(const ClusterModel& model, const ExperimentConfig& config) {
    return fid_to_spectrum(fid(model.spins, model.globals, config));
}

std::vector<PartArray> model_residues(const ClusterModel& model, const DatasetBundle& bundle) {
    bundle.validate();
    std::vector<PartArray> out;
    for (const auto& d : bundle.datasets) {
        const ComplexSpectrum m = model_spectrum(model, d.config);
        PartArray r;
        const std::size_t n = d.spectrum.size();
        for (auto& v : r) v.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            r[kRe][j] = d.spectrum.re[j] - m.re[j];
            r[kIm][j] = d.spectrum.im[j] - m.im[j];
            r[kPsd][j] = d.spectrum.psd[j] - m.psd[j];
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::array<double, kParts> part_rss(const ComplexSpectrum& data, const std::vector<double>& model_re,
                                    const std::vector<double>& model_im) {
    std::array<double, kParts> s{0.0, 0.0, 0.0};
    const std::size_t n = data.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double dr = data.re[j] - model_re[j];
        const double di = data.im[j] - model_im[j];
        const double dp = data.psd[j] - (model_re[j] * model_re[j] + model_im[j] * model_im[j]);
        s[kRe] += dr * dr;
        s[kIm] += di * di;
        s[kPsd] += dp * dp;
    }
    return s;
}

double neg_log_likelihood(const RssTable& rss, int k_points, int m_params) {
    const double dof = static_cast<double>(k_points) - m_params - 1.0;
    if (!(dof > 0.0)) throw DomainError("neg_log_likelihood: K must exceed M + 1");
    double acc = 0.0;
    for (const auto& d : rss)
        for (double s : d) acc += std::log(std::max(s, kRssFloor));
    const double D = static_cast<double>(rss.size());
    return -kParts * D * k_points * std::log(dof) + k_points * acc;
}

double neg_log_likelihood(const std::vector<PartArray>& residues, int k_points, int m_params) {
    RssTable t;
    for (const auto& r : residues) {
        std::array<double, kParts> s{};
        for (int p = 0; p < kParts; ++p)
            for (double v : r[p]) s[p] += v * v;
        t.push_back(s);
    }
    return neg_log_likelihood(t, k_points, m_params);
}

double penalty(int k_points, int m_params, PenaltyKind kind) {
    if (m_params == 0) return 0.0;
    const double K = k_points, M = m_params;
    const double bic = M * std::log(K);
    if (kind == PenaltyKind::BIC) return bic;
    const double dof = K - M - 1.0;
    if (!(dof > 0.0)) throw DomainError("penalty: AIC needs K > M + 1");
    const double aic = 2.0 * M * K / dof;
    if (kind == PenaltyKind::AIC) return aic;
    return (aic * aic + bic * bic) / (aic + bic);
}

CostBreakdown cost_from_rss(const RssTable& rss, int k_points, int m_params, PenaltyKind kind) {
    CostBreakdown c;
    c.rss = rss;
    c.k_points = k_points;
    c.m_params = m_params;
    c.neg_log_likelihood = neg_log_likelihood(rss, k_points, m_params);
    c.penalty = penalty(k_points, m_params, kind);
    c.ic_total = c.neg_log_likelihood + c.penalty;
    return c;
}

CostBreakdown ic_cost(const ClusterModel& model, const DatasetBundle& bundle, PenaltyKind kind) {
    bundle.validate();
    RssTable rss;
    for (const auto& d : bundle.datasets) {
        const ComplexSpectrum m = model_spectrum(model, d.config);
        rss.push_back(part_rss(d.spectrum, m.re, m.im));
    }
    return cost_from_rss(rss, bundle.spectral_points(), model.m_params(), kind);
}

std::string format_cost_report(const CostBreakdown& cost) {
    std::ostringstream os;
    char line[256];
    os << "dataset,rss_re,rss_im,rss_psd\n";
    for (std::size_t d = 0; d < cost.rss.size(); ++d) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", d, cost.rss[d][0], cost.rss[d][1], cost.rss[d][2]);
        os << line;
    }
    std::snprintf(line, sizeof line, "k_points = %d\nm_params = %d\nneg_log_likelihood = %.17g\npenalty = %.17g\nic_total = %.17g\n",
                  cost.k_points, cost.m_params, cost.neg_log_likelihood, cost.penalty, cost.ic_total);
    os << line;
    return os.str();
}

}  // namespace nvmap
