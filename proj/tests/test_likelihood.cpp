#include <doctest.h>

#include <cmath>
#include <random>

#include "nvmap/errors.hpp"
#include "nvmap/likelihood.hpp"
#include "nvmap/signal_model.hpp"
#include "test_util.hpp"

using namespace nvmap;

namespace {

DatasetBundle noiseless(const ClusterModel& m, const std::vector<double>& tbetas) {
    std::vector<FidTrace> traces;
    for (double tb : tbetas) {
        ExperimentConfig c;
        c.t_beta = tb;
        traces.push_back(fid(m.spins, m.globals, c));
    }
    return DatasetBundle::from_traces(traces);
}

ClusterModel two_spins() {
    ClusterModel m;
    m.spins = {{kTwoPi * 3e3, kTwoPi * 20e3, 0.4}, {-kTwoPi * 2e3, kTwoPi * 30e3, 2.0}};
    m.globals = {0.7, 10e-3, 1e-6};
    return m;
}

}  // namespace

TEST_CASE("penalty values for K = 800, M = 63") {
    CHECK(penalty(800, 63, PenaltyKind::AIC) == approx(136.96).epsilon(1e-4));
    CHECK(penalty(800, 63, PenaltyKind::BIC) == approx(421.13).epsilon(1e-4));
    CHECK(penalty(800, 63, PenaltyKind::WIC) == approx(351.4).epsilon(1e-4));
}

TEST_CASE("WIC lies between AIC and BIC and is zero for M = 0") {
    for (int M : {1, 5, 30, 100}) {
        const double a = penalty(400, M, PenaltyKind::AIC), b = penalty(400, M, PenaltyKind::BIC);
        const double w = penalty(400, M, PenaltyKind::WIC);
        CHECK(w >= std::min(a, b));
        CHECK(w <= std::max(a, b));
    }
    CHECK(penalty(400, 0, PenaltyKind::WIC) == 0.0);
    CHECK_THROWS_AS(penalty(400, 399, PenaltyKind::AIC), DomainError);
}

TEST_CASE("NLL closed form") {
    RssTable t{{2.0, 3.0, 5.0}, {1.0, 1.0, 7.0}};
    const int K = 400, M = 9;
    const double expect = -3.0 * 2 * K * std::log(K - M - 1.0) + K * std::log(2.0 * 3 * 5 * 1 * 1 * 7);
    CHECK(neg_log_likelihood(t, K, M) == approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(neg_log_likelihood(t, 10, 9), DomainError);
}

TEST_CASE("RSS floor keeps a perfect fit finite") {
    const ClusterModel m = two_spins();
    const DatasetBundle b = noiseless(m, {1e-6, 2e-6});
    const CostBreakdown c = ic_cost(m, b);
    CHECK(std::isfinite(c.ic_total));
    for (const auto& d : c.rss)
        for (double s : d) CHECK(s < 1e-20);
}

TEST_CASE("spectra add linearly over spins") {
    const ClusterModel m = two_spins();
    ExperimentConfig c;
    c.t_beta = 1.5e-6;
    const ComplexSpectrum full = model_spectrum(m, c);
    std::vector<double> re(c.k_samples / 2, 0.0), im(c.k_samples / 2, 0.0), r, i;
    for (const auto& s : m.spins) {
        spin_spectrum(s, m.globals, c, r, i);
        for (std::size_t j = 0; j < re.size(); ++j) { re[j] += r[j]; im[j] += i[j]; }
    }
    for (std::size_t j = 0; j < re.size(); ++j) {
        CHECK(full.re[j] == approx(re[j]).epsilon(1e-10).scale(1e-12));
        CHECK(full.im[j] == approx(im[j]).epsilon(1e-10).scale(1e-12));
    }
}

TEST_CASE("residues agree with part_rss") {
    const ClusterModel m = two_spins();
    DatasetBundle b = noiseless(m, {1e-6, 2e-6});
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (auto& d : b.datasets)
        for (std::size_t j = 0; j < d.spectrum.size(); ++j) {
            d.spectrum.re[j] += n(rng);
            d.spectrum.im[j] += n(rng);
            d.spectrum.psd[j] = d.spectrum.re[j] * d.spectrum.re[j] + d.spectrum.im[j] * d.spectrum.im[j];
        }
    ClusterModel wrong = m;
    wrong.spins[0].a_par += kTwoPi * 100.0;
    const CostBreakdown c = ic_cost(wrong, b);
    const auto res = model_residues(wrong, b);
    CHECK(neg_log_likelihood(res, b.spectral_points(), wrong.m_params()) ==
          approx(c.neg_log_likelihood).epsilon(1e-10));
    CHECK(c.ic_total > ic_cost(m, b).ic_total);
    CHECK(c.ic_total == approx(c.neg_log_likelihood + c.penalty));
}

TEST_CASE("bundle validation") {
    DatasetBundle empty;
    CHECK_THROWS_AS(empty.validate(), DataError);
    const ClusterModel m = two_spins();
    DatasetBundle b = noiseless(m, {1e-6, 2e-6});
    b.datasets[1].config.t_beta = 1e-6;
    CHECK_THROWS_AS(b.validate(), DataError);
    b = noiseless(m, {1e-6});
    b.datasets[0].spectrum.re.pop_back();
    b.datasets[0].spectrum.im.pop_back();
    b.datasets[0].spectrum.psd.pop_back();
    b.datasets[0].spectrum.freq_axis.pop_back();
    CHECK_THROWS_AS(b.validate(), DataError);
}

TEST_CASE("cost report lists every dataset") {
    const ClusterModel m = two_spins();
    const auto c = ic_cost(m, noiseless(m, {1e-6, 2e-6, 3e-6}));
    const std::string s = format_cost_report(c);
    CHECK(s.find("\n2,") != std::string::npos);
    CHECK(s.find("ic_total = ") != std::string::npos);
}
