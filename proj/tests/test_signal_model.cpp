#include <doctest.h>

#include <complex>
#include <random>

#include "nvmap/errors.hpp"
#include "nvmap/signal_model.hpp"
#include "nvmap/spectrum.hpp"
#include "test_util.hpp"

using namespace nvmap;

TEST_CASE("measurement gain") {
    CHECK(measurement_gain(0.0, 1e-6) == 0.0);
    CHECK(measurement_gain(khz_to_rad(36.40), 0.930e-6) == approx(0.0677).epsilon(1e-3));
    CHECK(measurement_gain(khz_to_rad(36.40), 3.720e-6) == approx(0.2708).epsilon(1e-3));
    CHECK_THROWS_AS(measurement_gain(-1.0, 1e-6), DomainError);
    CHECK_THROWS_AS(measurement_gain(1.0, -1e-6), DomainError);
}

TEST_CASE("precession frequency") {
    const double w0 = khz_to_rad(2156.0);
    CHECK(precession_frequency(0.0, 0.0, w0) == approx(w0).epsilon(1e-15));
    CHECK(precession_frequency(khz_to_rad(10), 0.0, w0) == approx(w0 + khz_to_rad(5)).epsilon(1e-14));
    // second-order estimate a_perp^2 / (4 w0)
    const double shift = precession_frequency(0.0, khz_to_rad(40), w0) - w0;
    CHECK(shift / kTwoPi == approx(40e3 * 40e3 / (4 * 2156e3)).epsilon(2e-3));
    CHECK(shift / kTwoPi == approx(185.5).epsilon(1e-3));
    CHECK_THROWS_AS(precession_frequency(0, 0, 0), DomainError);
}

TEST_CASE("frequency ordering and second-order bound") {
    const double w0 = khz_to_rad(2000.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double ap = khz_to_rad(80) * u(rng), at = khz_to_rad(80) * std::abs(u(rng));
        const double w = precession_frequency(ap, at, w0);
        CHECK(precession_frequency(ap + 1.0, at, w0) > w);
        CHECK(std::abs(w - (w0 + 0.5 * ap)) <= at * at / (4 * (w0 - std::abs(ap))) * (1 + 1e-12) + 1e-9);
    }
}

TEST_CASE("amplitude") {
    CHECK(amplitude(0.66, 0.0) == 0.0);
    CHECK(amplitude(0.66, 0.0677) == approx(0.02232).epsilon(1e-3));
    CHECK(amplitude(1.0, kPi / 2) == approx(0.5));
    CHECK(amplitude(1.0, 1e-4) == approx(0.5e-4).epsilon(1e-8));
}

TEST_CASE("decay rate terms") {
    GlobalParams g;
    const double ts = 8e-6, tb = 1e-6;
    SpinParams s{0.0, 0.05 * kPi / tb, 0.0};
    CHECK(decay_rate(s, g, tb, ts) == approx(0.05 * 0.05 / (4 * ts)));
    CHECK(decay_rate(s, g, tb, ts) == approx(78.1).epsilon(1e-3));
    g.t2n_star = 11.69e-3;
    CHECK(decay_rate({}, g, tb, ts) == approx(85.5).epsilon(1e-3));
    GlobalParams g2;
    g2.t_ell = 1.65e-6;
    CHECK(decay_rate({khz_to_rad(8.14), 0, 0}, g2, tb, ts) == approx(445).epsilon(2e-3));
}

TEST_CASE("decay rate monotonicity") {
    GlobalParams g{1.0, 10e-3, 1e-6};
    const double tb = 2e-6, ts = 8e-6;
    double prev = 0;
    for (int i = 0; i < 50; ++i) {
        const double v = decay_rate({khz_to_rad(i), khz_to_rad(20), 0}, g, tb, ts);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0;
    for (int i = 0; i < 50; ++i) {
        const double v = decay_rate({khz_to_rad(5), khz_to_rad(i), 0}, g, tb, ts);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0;
    for (int i = 0; i < 50; ++i) {
        GlobalParams gi = g;
        gi.t_ell = i * 1e-7;
        const double v = decay_rate({khz_to_rad(5), khz_to_rad(20), 0}, gi, tb, ts);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 1e300;
    for (int i = 1; i < 50; ++i) {
        GlobalParams gi = g;
        gi.t2n_star = i * 1e-3;
        const double v = decay_rate({khz_to_rad(5), khz_to_rad(20), 0}, gi, tb, ts);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("fid basics") {
    ExperimentConfig c;
    const GlobalParams g{0.66, 11.69e-3, 1.65e-6};
    const auto empty = fid({}, g, c);
    REQUIRE(empty.samples.size() == 800u);
    for (double x : empty.samples) CHECK(x == 0.0);
    const SpinParams a{khz_to_rad(-8.14), khz_to_rad(36.4), 2.39}, b{khz_to_rad(4.0), khz_to_rad(12.0), -0.3};
    const auto fa = fid({a}, g, c), fb = fid({b}, g, c), fab = fid({a, b}, g, c);
    for (int k = 0; k < c.k_samples; ++k) CHECK(fab.samples[k] == approx(fa.samples[k] + fb.samples[k]).epsilon(1e-14));
    // direct evaluation of sample k (1-based time)
    const double beta = measurement_gain(a.a_perp, c.t_beta);
    const double G = decay_rate(a, g, c.t_beta, c.t_s);
    const double w = precession_frequency(a.a_par, a.a_perp, c.omega0());
    for (int k : {1, 2, 65, 400, 800}) {
        const double t = k * c.t_s;
        CHECK(fa.samples[k - 1] == approx(amplitude(g.p0, beta) * std::exp(-G * t) * std::cos(w * t + a.phi)).epsilon(1e-9));
    }
    ExperimentConfig bad = c;
    bad.t_beta = 2 * c.t_s;
    CHECK_THROWS_AS(fid({a}, g, bad), DomainError);
    bad = c;
    bad.k_samples = 1;
    CHECK_THROWS_AS(fid({a}, g, bad), DomainError);
}

TEST_CASE("fid peak of the first NV1 spin sits near half the parallel coupling") {
    const ReferenceDataset nv1 = reference_nv1();
    const auto row = table_nv1().rows.front();
    const ExperimentConfig c = nv1.experiments.front();
    const ComplexSpectrum s = fid_to_spectrum(fid({row.spin()}, nv1.globals, c));
    std::size_t jmax = 0;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s.psd[j] > s.psd[jmax]) jmax = j;
    const double bin = 1.0 / (c.k_samples * c.t_s);
    CHECK(std::abs(s.freq_axis[jmax] - (-4070.0)) <= bin);
    // and at the exact precession frequency within half a bin
    const double rel = (precession_frequency(row.spin().a_par, row.spin().a_perp, c.omega0()) - c.omega0()) / kTwoPi;
    CHECK(std::abs(s.freq_axis[jmax] - rel) <= 0.5 * bin + 1e-9);
}

TEST_CASE("spectrum conventions") {
    ExperimentConfig c;
    c.k_samples = 64;
    const int K = c.k_samples;
    const int j0 = 5;
    FidTrace t{c, std::vector<double>(K)};
    for (int k = 1; k <= K; ++k) t.samples[k - 1] = std::cos(kTwoPi * j0 * k / K);
    const auto s = fid_to_spectrum(t);
    REQUIRE(s.size() == static_cast<std::size_t>(K / 2));
    for (int j = 1; j <= K / 2; ++j) {
        const double mag = std::sqrt(s.psd[j - 1]);
        if (j == j0) CHECK(mag == approx(K / 2.0).epsilon(1e-12));
        else CHECK(mag < 1e-10);
        CHECK(s.psd[j - 1] == approx(s.re[j - 1] * s.re[j - 1] + s.im[j - 1] * s.im[j - 1]));
    }
    // direct sum oracle for the phase convention
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    for (double& x : t.samples) x = N(rng);
    const auto r = fid_to_spectrum(t);
    for (int j = 1; j <= K / 2; ++j) {
        std::complex<double> acc;
        for (int k = 1; k <= K; ++k) acc += t.samples[k - 1] * std::polar(1.0, -kTwoPi * k * j / K);
        CHECK(r.re[j - 1] == approx(acc.real()).epsilon(1e-10).scale(10));
        CHECK(r.im[j - 1] == approx(acc.imag()).epsilon(1e-10).scale(10));
    }
    FidTrace z{c, std::vector<double>(K, 0.0)};
    for (double p : fid_to_spectrum(z).psd) CHECK(p == 0.0);
}

TEST_CASE("Parseval with boundary terms and linearity") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N;
    for (int K : {8, 64, 800, 1000}) {
        ExperimentConfig c;
        c.k_samples = K;
        FidTrace t{c, std::vector<double>(K)}, u{c, std::vector<double>(K)}, w{c, std::vector<double>(K)};
        for (int k = 0; k < K; ++k) {
            t.samples[k] = N(rng);
            u.samples[k] = N(rng);
            w.samples[k] = 2.0 * t.samples[k] - 3.0 * u.samples[k];
        }
        const auto s = fid_to_spectrum(t);
        double e_time = 0, x0 = 0, xn = 0, e_freq = 0;
        for (int k = 1; k <= K; ++k) {
            e_time += t.samples[k - 1] * t.samples[k - 1];
            x0 += t.samples[k - 1];
            xn += (k % 2 ? -1.0 : 1.0) * t.samples[k - 1];
        }
        for (double p : s.psd) e_freq += p;
        CHECK(e_time == approx((2.0 / K) * e_freq + (x0 * x0 - xn * xn) / K).epsilon(1e-10));
        const auto su = fid_to_spectrum(u), sw = fid_to_spectrum(w);
        for (std::size_t j = 0; j < s.size(); ++j) {
            CHECK(sw.re[j] == approx(2 * s.re[j] - 3 * su.re[j]).epsilon(1e-9).scale(1));
            CHECK(sw.im[j] == approx(2 * s.im[j] - 3 * su.im[j]).epsilon(1e-9).scale(1));
        }
    }
}

TEST_CASE("bin frequency axis round trip") {
    for (double b0 : {0.20129, 0.18889, 0.202}) {
        ExperimentConfig c;
        c.b0 = b0;
        for (int j = 1; j <= c.k_samples / 2; ++j) CHECK(bin_for_relative_frequency(c, relative_bin_frequency(c, j)) == j);
    }
}

TEST_CASE("phi fit window") {
    CHECK(phi_in_fit_window(-kPi / 2));
    CHECK(phi_in_fit_window(0.0));
    CHECK_FALSE(phi_in_fit_window(2.5 * kPi));
    CHECK_FALSE(phi_in_fit_window(-kPi));
}
